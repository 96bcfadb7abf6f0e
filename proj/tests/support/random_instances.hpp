#pragma once

#include <cstdint>
#include <random>

#include "ose/ontology.hpp"
#include "ose/query.hpp"

namespace ose::testing {

struct InstanceBounds {
  int max_classes = 15;
  int max_properties = 8;
  int max_axioms = 25;
  int max_individuals = 200;
  int max_atoms = 4;
};

/// A QL ontology with ABox plus a conjunctive query over its vocabulary.
struct RandomInstance {
  Ontology ontology;
  ConjunctiveQuery query;
};

/// Random QL TBox over C0.., p0.. (object) and d0.. (data) names. No
/// disjointness, so every generated ABox is consistent.
Ontology random_ql_tbox(std::mt19937_64& rng, const InstanceBounds& b);

/// Fills `o` with individuals i0.. and random assertions over its vocabulary.
void add_random_abox(Ontology& o, std::mt19937_64& rng, int individuals);

/// A query with 1..max_atoms atoms over variables x0..x3 and occasional
/// constants; at least one head variable.
ConjunctiveQuery random_cq(const Ontology& o, std::mt19937_64& rng, int max_atoms);

RandomInstance random_instance(std::uint64_t seed, const InstanceBounds& b = {});

}  // namespace ose::testing

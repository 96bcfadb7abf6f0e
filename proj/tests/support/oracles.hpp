#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "ose/condition_analyzer.hpp"
#include "ose/datastore.hpp"
#include "ose/ontology.hpp"
#include "ose/reasoner.hpp"
#include "ose/sql.hpp"

// Brute-force reference implementations the production code is checked
// against. They favour obviousness over speed.
namespace ose::testing {

/// Every basic concept of the vocabulary: named classes, Exists and
/// ExistsInv of object properties, Exists of data properties.
std::vector<ClassExpr> basic_concepts(const Ontology& o);

/// Subsumption pairs between basic concepts by repeated axiom application
/// and transitivity until nothing changes.
std::set<std::pair<ClassExpr, ClassExpr>> naive_subsumptions(const Ontology& o);

/// ABox entailed over named individuals, computed by firing every axiom on
/// every fact until a fixpoint. Includes the original assertions.
std::set<Assertion> naive_saturation(const Ontology& o);

/// Cartesian-product evaluation of a parsed SQL query over the store's rows.
/// Supports plain column and literal items plus COUNT(*).
ResultSet nested_loop(const sql::Query& q, const DataStore& store);

/// Expected observation events of one variable's value series, sample i
/// taken at time i + 1.
std::vector<ca::ObservationEvent> replay_detection(int variable, const std::vector<double>& values);

/// Mean of each full window of `w` consecutive values.
std::vector<double> windowed_means(const std::vector<double>& values, std::size_t w);

}  // namespace ose::testing

#pragma once

#include <string_view>

// Bundled fixture texts, compiled into the library.
namespace ose::fixtures {

std::string_view ils_ontology();
std::string_view e414_ontology();
std::string_view hvac_ontology();
std::string_view tiny_ontology();
/// Threshold(80) + Debounce(3) alarm graph over the HVAC ontology.
std::string_view hvac_threshold_graph();

}  // namespace ose::fixtures

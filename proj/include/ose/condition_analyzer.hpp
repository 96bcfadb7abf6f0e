#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ose/ontology.hpp"
#include "ose/reasoner.hpp"

namespace ose::ca {

inline constexpr double kDetectionThreshold = 70.0;
inline constexpr int kOpenCount = 3;
inline constexpr int kCloseCount = 3;
inline constexpr int kVariables = 52;
/// Process variables 1..kTemperatureChannels are traction temperatures.
inline constexpr int kTemperatureChannels = 24;

enum class SeverityRange { R70to80, R80to130, R130plus };

/// `_70to80`, `_80to130` or `_130degrees`.
std::string_view range_constant(SeverityRange r);
/// Half-open partition [70,80), [80,130), [130,inf); values below 70 map to
/// the lowest range.
SeverityRange range_of(double value);

struct Sample {
  int variable = 0;
  std::int64_t t = 0;
  double value = 0;
};

struct ObservationEvent {
  int variable = 0;
  std::int64_t t = 0;
  SeverityRange range = SeverityRange::R70to80;
  double value = 0;
  bool transition = false;  // false for the opening event of a pattern

  bool operator==(const ObservationEvent&) const = default;
};

struct VariableState {
  int consecutive_above = 0;
  int consecutive_below = 0;
  std::optional<std::int64_t> last_t;
  std::optional<std::int64_t> pattern_start;
  SeverityRange current_range = SeverityRange::R70to80;

  bool active() const { return pattern_start.has_value(); }
};

/// Per-variable detector. A pattern opens on the third consecutive sample
/// above 70, reports every change of severity range while open, and closes
/// after three consecutive samples at or below 70.
class PatternDetector {
 public:
  /// Throws Error(OutOfOrderSample) unless s.t is after the variable's last sample.
  std::optional<ObservationEvent> feed(const Sample& s);

  const VariableState* state(int variable) const;
  std::size_t open_patterns() const;

 private:
  std::map<int, VariableState> states_;
};

/// Individuals and assertions recorded for one observation event.
struct Materialized {
  std::string observation;
  std::string symptom;
  std::string fault;
  std::string observation_data;  // persistent per channel
  std::vector<Assertion> assertions;
};

/// Names are `obs_<var>_<t>`, `sym_<var>_<t>`, `flt_<var>_<t>` and `pvNN`.
/// Symptom and fault are typed only generically; classification is left to
/// saturation.
Materialized materialize(const ObservationEvent& e);

struct Classified {
  std::string individual;
  std::vector<std::string> classes;  // most specific reported classes, sorted
  bool operator==(const Classified&) const = default;
};

struct ClassificationResult {
  std::vector<Classified> items;  // sorted by individual
  bool operator==(const ClassificationResult&) const = default;
};

/// Classes reported for faults and symptoms.
inline constexpr std::string_view kReportedClasses[] = {
    "PriorityFault", "NonPriorityFault", "MissionRelatedSymptom", "MaintenanceRelatedSymptom"};

/// Saturation-based classifier over a fixed TBox.
class Classifier {
 public:
  explicit Classifier(Ontology tbox);

  /// Saturates context + delta and reports every Symptom or Fault
  /// individual typed in `delta`. Throws Error(InconsistentABox).
  ClassificationResult classify(std::span<const Assertion> context,
                                std::span<const Assertion> delta) const;

 private:
  Ontology base_;
  TaxonomyClosure taxonomy_;
};

ClassificationResult classify(std::span<const Assertion> delta, const Ontology& o);

struct Scenario {
  std::string name;
  std::size_t rounds = 0;
  int variables = kVariables;
  std::vector<double> values;  // row-major: values[round * variables + (variable - 1)]

  double value(std::size_t round, int variable) const {
    return values[round * static_cast<std::size_t>(variables) + static_cast<std::size_t>(variable - 1)];
  }
};

struct ScenarioParams {
  std::size_t faults = 0;  // 0..kTemperatureChannels
  std::size_t rounds = 3600;
  std::uint64_t seed = 1;
  std::int64_t excursion_period = 600;  // seconds between fault onsets
  std::int64_t excursion_length = 60;   // seconds above threshold per onset
  std::int64_t first_onset = 120;
};

/// Baseline 45 +/- 5 on temperature channels; fault f drives channel f + 1
/// to a plateau (75, 105 or 140, +/- 1.5) for each excursion. Onsets are
/// shared by all faults, so faults are contemporary. Throws InvalidParams.
Scenario generate_scenario(const ScenarioParams& p);

/// CSV `round,variable,value`.
void write_scenario_csv(const Scenario& s, std::ostream& out);
Scenario read_scenario_csv(std::istream& in, std::string name = "scenario");

enum class Strategy { Lazy, Eager };
std::string_view to_string(Strategy s);

struct Publication {
  std::size_t round = 0;
  Classified item;
  bool operator==(const Publication&) const = default;
};

struct ScenarioMetrics {
  std::string scenario;
  Strategy strategy = Strategy::Lazy;
  std::size_t rounds = 0;
  std::size_t observations = 0;
  std::size_t peak_live_individuals = 0;
  std::size_t max_concurrent_observations = 0;  // most events in one round
  std::vector<double> per_round_time_ms;
  double total_time_ms = 0;
  double active_time_ms = 0;  // rounds with at least one observation
  /// active_time_ms / observations; empty when nothing was observed.
  std::optional<double> amortized_time_ms;
};

struct RunResult {
  ScenarioMetrics metrics;
  std::vector<Publication> publications;
};

struct RunOptions {
  std::optional<std::size_t> cap;  // live-individual limit
};

/// Per round: detect, materialize, classify, publish. Eager drops the
/// round's individuals once published; lazy keeps and re-saturates them.
/// Throws CapExceeded when the live count passes the cap.
RunResult run_scenario(const Scenario& s, Strategy strategy, const RunOptions& options = {});
RunResult run_scenario(const Scenario& s, Strategy strategy, const Ontology& e414,
                       const RunOptions& options = {});

/// Header `strategy,scenario,peak_live_individuals,total_time_ms,amortized_time_ms`.
std::string metrics_csv_header();
std::string metrics_csv_row(const ScenarioMetrics& m);
/// Row for a run stopped by the cap.
std::string out_of_memory_csv_row(Strategy strategy, std::string_view scenario);

}  // namespace ose::ca

#include "ose/condition_analyzer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include "ose/datastore.hpp"
#include "ose/error.hpp"
#include "ose/fixtures.hpp"
#include "ose/text.hpp"

namespace ose::ca {

std::string_view range_constant(SeverityRange r) {
  switch (r) {
    case SeverityRange::R70to80: return "_70to80";
    case SeverityRange::R80to130: return "_80to130";
    case SeverityRange::R130plus: return "_130degrees";
  }
  return "_70to80";
}

SeverityRange range_of(double value) {
  if (value >= 130.0) return SeverityRange::R130plus;
  if (value >= 80.0) return SeverityRange::R80to130;
  return SeverityRange::R70to80;
}

std::optional<ObservationEvent> PatternDetector::feed(const Sample& s) {
  VariableState& st = states_[s.variable];
  if (st.last_t && s.t <= *st.last_t) {
    throw Error(ErrorCode::OutOfOrderSample,
                "variable " + std::to_string(s.variable) + ": sample at t=" + std::to_string(s.t) +
                    " does not follow t=" + std::to_string(*st.last_t));
  }
  st.last_t = s.t;
  const bool above = s.value > kDetectionThreshold;

  if (!st.active()) {
    st.consecutive_above = above ? st.consecutive_above + 1 : 0;
    if (st.consecutive_above < kOpenCount) return std::nullopt;
    st.pattern_start = s.t;
    st.consecutive_below = 0;
    st.current_range = range_of(s.value);
    return ObservationEvent{s.variable, s.t, st.current_range, s.value, false};
  }

  if (!above) {
    if (++st.consecutive_below >= kCloseCount) {
      st.pattern_start.reset();
      st.consecutive_above = 0;
      st.consecutive_below = 0;
    }
    return std::nullopt;
  }
  st.consecutive_below = 0;
  const SeverityRange r = range_of(s.value);
  if (r == st.current_range) return std::nullopt;
  st.current_range = r;
  return ObservationEvent{s.variable, s.t, r, s.value, true};
}

const VariableState* PatternDetector::state(int variable) const {
  auto it = states_.find(variable);
  return it == states_.end() ? nullptr : &it->second;
}

std::size_t PatternDetector::open_patterns() const {
  return static_cast<std::size_t>(
      std::count_if(states_.begin(), states_.end(), [](const auto& kv) { return kv.second.active(); }));
}

Materialized materialize(const ObservationEvent& e) {
  const std::string suffix = std::to_string(e.variable) + "_" + std::to_string(e.t);
  char pv[16];
  std::snprintf(pv, sizeof pv, "pv%02d", e.variable);
  Materialized m{"obs_" + suffix, "sym_" + suffix, "flt_" + suffix, pv, {}};
  m.assertions = {
      ClassAssertion{m.observation_data, "TractionObservationData"},
      ClassAssertion{m.observation, "TractionHighTemperatureObservation"},
      ObjectAssertion{m.observation, "hasObservationData", m.observation_data},
      DataAssertion{m.observation, "isAt", std::string(range_constant(e.range))},
      ClassAssertion{m.symptom, "Symptom"},
      ObjectAssertion{m.symptom, "refersToObservation", m.observation},
      ObjectAssertion{m.symptom, "refersToFault", m.fault},
      ClassAssertion{m.fault, "Fault"},
      ObjectAssertion{m.fault, "causedBySymptom", m.symptom},
      ObjectAssertion{m.fault, "hasSymptom", m.symptom},
  };
  return m;
}

Classifier::Classifier(Ontology tbox) : base_(std::move(tbox)), taxonomy_(base_) { base_.abox.clear(); }

ClassificationResult Classifier::classify(std::span<const Assertion> context,
                                          std::span<const Assertion> delta) const {
  std::set<std::string> targets;
  for (const auto& a : delta) {
    if (const auto* c = std::get_if<ClassAssertion>(&a)) {
      if (taxonomy_.subsumes(ClassExpr::named(c->cls), ClassExpr::named("Symptom")) ||
          taxonomy_.subsumes(ClassExpr::named(c->cls), ClassExpr::named("Fault"))) {
        targets.insert(c->individual);
      }
    }
  }
  ClassificationResult result;
  if (targets.empty()) return result;

  Ontology work = base_;
  work.abox.reserve(context.size() + delta.size());
  work.abox.insert(work.abox.end(), context.begin(), context.end());
  work.abox.insert(work.abox.end(), delta.begin(), delta.end());
  for (const auto& a : work.abox) work.individuals.insert(subject_of(a));
  const Ontology sat = saturate_abox(work);

  std::map<std::string, std::set<std::string>> types;
  for (const auto& a : sat.abox) {
    if (const auto* c = std::get_if<ClassAssertion>(&a)) types[c->individual].insert(c->cls);
  }
  for (const auto& ax : base_.tbox) {
    const auto* dj = std::get_if<DisjointClasses>(&ax);
    if (dj == nullptr) continue;
    for (const auto& [ind, classes] : types) {
      if (classes.contains(dj->first) && classes.contains(dj->second)) {
        throw Error(ErrorCode::InconsistentABox,
                    ind + " is both " + dj->first + " and " + dj->second);
      }
    }
  }

  for (const auto& ind : targets) {
    std::vector<std::string> reported;
    for (auto cls : kReportedClasses) {
      if (types[ind].contains(std::string(cls))) reported.emplace_back(cls);
    }
    std::vector<std::string> specific;
    for (const auto& c : reported) {
      const bool has_subclass = std::any_of(reported.begin(), reported.end(), [&](const std::string& d) {
        return d != c && taxonomy_.subsumes(ClassExpr::named(d), ClassExpr::named(c));
      });
      if (!has_subclass) specific.push_back(c);
    }
    std::sort(specific.begin(), specific.end());
    result.items.push_back({ind, std::move(specific)});
  }
  return result;
}

ClassificationResult classify(std::span<const Assertion> delta, const Ontology& o) {
  return Classifier(o).classify(o.abox, delta);
}

Scenario generate_scenario(const ScenarioParams& p) {
  if (p.faults > static_cast<std::size_t>(kTemperatureChannels)) {
    throw Error(ErrorCode::InvalidParams, "at most " + std::to_string(kTemperatureChannels) +
                                              " faults (one per temperature channel)");
  }
  if (p.rounds == 0 || p.excursion_period <= 0 || p.excursion_length <= 0 ||
      p.excursion_length >= p.excursion_period || p.first_onset < 0) {
    throw Error(ErrorCode::InvalidParams, "invalid scenario timing parameters");
  }
  static constexpr double kPlateaus[] = {75.0, 105.0, 140.0};

  Scenario s;
  s.name = std::to_string(p.faults) + "-fault";
  s.rounds = p.rounds;
  s.variables = kVariables;
  s.values.resize(p.rounds * kVariables);
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> baseline(40.0, 50.0);
  std::uniform_real_distribution<double> noise(-1.5, 1.5);
  std::uniform_real_distribution<double> other(0.0, 60.0);

  for (std::size_t r = 0; r < p.rounds; ++r) {
    const auto t = static_cast<std::int64_t>(r);
    const std::int64_t since = t - p.first_onset;
    const bool in_excursion = since >= 0 && since % p.excursion_period < p.excursion_length;
    const std::int64_t excursion = since >= 0 ? since / p.excursion_period : 0;
    for (int v = 1; v <= kVariables; ++v) {
      double value;
      if (v > kTemperatureChannels) {
        value = other(rng);
      } else if (in_excursion && static_cast<std::size_t>(v) <= p.faults) {
        value = kPlateaus[(static_cast<std::size_t>(v - 1) + static_cast<std::size_t>(excursion)) % 3] +
                noise(rng);
      } else {
        value = baseline(rng);
      }
      s.values[r * kVariables + static_cast<std::size_t>(v - 1)] = value;
    }
  }
  return s;
}

void write_scenario_csv(const Scenario& s, std::ostream& out) {
  out << "round,variable,value\n";
  for (std::size_t r = 0; r < s.rounds; ++r) {
    for (int v = 1; v <= s.variables; ++v) {
      out << r << ',' << v << ',' << render(Value{s.value(r, v)}) << '\n';
    }
  }
}

Scenario read_scenario_csv(std::istream& in, std::string name) {
  std::string line;
  if (!std::getline(in, line) || text::split_csv(line) != std::vector<std::string>{"round", "variable", "value"}) {
    throw Error(ErrorCode::InvalidParams, "scenario CSV must start with 'round,variable,value'");
  }
  std::map<std::pair<std::size_t, int>, double> cells;
  std::size_t rounds = 0;
  int variables = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = text::split_csv(line);
    try {
      if (f.size() != 3) throw std::invalid_argument("arity");
      const auto r = static_cast<std::size_t>(std::stoull(f[0]));
      const int v = std::stoi(f[1]);
      if (v < 1) throw std::invalid_argument("variable");
      cells[{r, v}] = std::stod(f[2]);
      rounds = std::max(rounds, r + 1);
      variables = std::max(variables, v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidParams, "scenario CSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  Scenario s;
  s.name = std::move(name);
  s.rounds = rounds;
  s.variables = variables;
  s.values.assign(rounds * static_cast<std::size_t>(variables), 0.0);
  if (cells.size() != s.values.size()) {
    throw Error(ErrorCode::InvalidParams, "scenario CSV does not cover every (round, variable) cell");
  }
  for (const auto& [key, value] : cells) {
    s.values[key.first * static_cast<std::size_t>(variables) + static_cast<std::size_t>(key.second - 1)] = value;
  }
  return s;
}

std::string_view to_string(Strategy s) { return s == Strategy::Lazy ? "lazy" : "eager"; }

RunResult run_scenario(const Scenario& s, Strategy strategy, const RunOptions& options) {
  return run_scenario(s, strategy, parse_ontology(fixtures::e414_ontology()), options);
}

RunResult run_scenario(const Scenario& s, Strategy strategy, const Ontology& e414,
                       const RunOptions& options) {
  using Clock = std::chrono::steady_clock;
  const Classifier classifier(e414);
  PatternDetector detector;
  RunResult out;
  ScenarioMetrics& m = out.metrics;
  m.scenario = s.name;
  m.strategy = strategy;
  m.rounds = s.rounds;
  m.per_round_time_ms.reserve(s.rounds);

  std::vector<Assertion> persistent;  // observation-data individuals, one per channel
  std::set<std::string> channels;
  std::vector<Assertion> working;     // dynamic individuals kept alive
  std::size_t live = 0;
  const int channels_watched = std::min(s.variables, kTemperatureChannels);

  for (std::size_t round = 0; round < s.rounds; ++round) {
    const auto start = Clock::now();
    std::vector<ObservationEvent> events;
    for (int v = 1; v <= channels_watched; ++v) {
      if (auto e = detector.feed({v, static_cast<std::int64_t>(round), s.value(round, v)})) {
        events.push_back(*e);
      }
    }

    if (!events.empty()) {
      std::vector<Assertion> delta;
      for (const auto& e : events) {
        Materialized mat = materialize(e);
        for (auto& a : mat.assertions) {
          const auto* c = std::get_if<ClassAssertion>(&a);
          if (c != nullptr && c->individual == mat.observation_data) {
            if (channels.insert(mat.observation_data).second) persistent.push_back(a);
            continue;
          }
          delta.push_back(std::move(a));
        }
      }
      live += 3 * events.size();
      m.peak_live_individuals = std::max(m.peak_live_individuals, live);
      m.max_concurrent_observations = std::max(m.max_concurrent_observations, events.size());
      m.observations += events.size();
      if (strategy == Strategy::Lazy && options.cap && live > *options.cap) {
        throw CapExceeded(round, live, *options.cap);
      }

      std::vector<Assertion> context = persistent;
      context.insert(context.end(), working.begin(), working.end());
      const ClassificationResult result = classifier.classify(context, delta);
      for (const auto& item : result.items) out.publications.push_back({round, item});

      if (strategy == Strategy::Lazy) {
        working.insert(working.end(), delta.begin(), delta.end());
      } else {
        live = 0;
      }
    }

    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    m.per_round_time_ms.push_back(ms);
    m.total_time_ms += ms;
    if (!events.empty()) m.active_time_ms += ms;
  }
  if (m.observations > 0) m.amortized_time_ms = m.active_time_ms / static_cast<double>(m.observations);
  return out;
}

std::string metrics_csv_header() {
  return "strategy,scenario,peak_live_individuals,total_time_ms,amortized_time_ms";
}

std::string metrics_csv_row(const ScenarioMetrics& m) {
  char total[32];
  std::snprintf(total, sizeof total, "%.3f", m.total_time_ms);
  std::string amortized = "ND";
  if (m.amortized_time_ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *m.amortized_time_ms);
    amortized = buf;
  }
  return text::join_csv({std::string(to_string(m.strategy)), m.scenario,
                         std::to_string(m.peak_live_individuals), total, amortized});
}

std::string out_of_memory_csv_row(Strategy strategy, std::string_view scenario) {
  return text::join_csv({std::string(to_string(strategy)), std::string(scenario), "OUT OF MEMORY",
                         "OUT OF MEMORY", "OUT OF MEMORY"});
}

}  // namespace ose::ca

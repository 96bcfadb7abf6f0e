// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ose/condition_analyzer.hpp"
#include "ose/datastore.hpp"
#include "ose/ddss.hpp"
#include "ose/error.hpp"
#include "ose/fixtures.hpp"
#include "ose/ils.hpp"
#include "ose/ontology.hpp"
#include "ose/rewrite.hpp"
#include "ose/trend.hpp"
#include "random_instances.hpp"

namespace {

using namespace ose;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome rewriting_matches_chase() {
  Outcome out;
  const auto start = Clock::now();
  const testing::InstanceBounds bounds;
  int mismatches = 0;
  std::size_t answers = 0;
  constexpr int kInstances = 100;
  for (int seed = 0; seed < kInstances; ++seed) {
    const auto inst = testing::random_instance(static_cast<std::uint64_t>(seed) + 500000, bounds);
    auto [schema, mapping] = generate_schema(inst.ontology);
    DataStore store(std::move(schema), std::move(mapping));
    store.ingest(inst.ontology.abox);
    const ResultSet got = certain_answers(inst.query, inst.ontology, store);
    const ResultSet expected = chase_oracle(inst.query, inst.ontology);
    answers += expected.size();
    if (got != expected) {
      ++mismatches;
      out.require(false, "seed " + std::to_string(seed + 500000) + " differs for " + to_string(inst.query));
    }
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 60.0, "runtime " + fmt("%.1f", elapsed) + " s exceeds 60 s");
  if (out.pass) {
    out.detail = std::to_string(kInstances) + " instances, " + std::to_string(answers) + " answers, 0 mismatches, " +
                 fmt("%.1f", elapsed) + " s";
  }
  return out;
}

Outcome table_protocol() {
  Outcome out;
  const auto start = Clock::now();
  const Ontology e414 = parse_ontology(fixtures::e414_ontology());
  const std::size_t faults[] = {0, 1, 5, 17};
  std::vector<ca::Scenario> scenarios;
  std::vector<ca::RunResult> lazy, eager;
  for (std::size_t f : faults) {
    ca::ScenarioParams p;
    p.faults = f;
    p.rounds = 3600;
    p.seed = 20 + f;
    scenarios.push_back(ca::generate_scenario(p));
    out.require(scenarios.back().variables == 52, "scenario does not have 52 variables");
    lazy.push_back(ca::run_scenario(scenarios.back(), ca::Strategy::Lazy, e414));
    eager.push_back(ca::run_scenario(scenarios.back(), ca::Strategy::Eager, e414));
  }

  for (std::size_t i = 0; i < 4; ++i) {
    out.require(lazy[i].publications == eager[i].publications,
                std::to_string(faults[i]) + "-fault lazy and eager publications differ");
  }

  std::vector<double> per_bound;
  for (std::size_t i = 1; i < 4; ++i) {
    const auto& m = eager[i].metrics;
    out.require(m.max_concurrent_observations > 0, std::to_string(faults[i]) + "-fault scenario observed nothing");
    if (m.max_concurrent_observations > 0) {
      per_bound.push_back(static_cast<double>(m.peak_live_individuals) /
                          static_cast<double>(m.max_concurrent_observations));
    }
  }
  for (double b : per_bound) {
    out.require(b == per_bound.front(), "eager peak per concurrent observation varies across scenarios");
  }
  for (std::size_t i = 1; i < 4; ++i) {
    out.require(lazy[i].metrics.peak_live_individuals > lazy[i - 1].metrics.peak_live_individuals,
                "lazy peak does not increase from " + std::to_string(faults[i - 1]) + " to " +
                    std::to_string(faults[i]) + " faults");
  }

  ca::RunOptions capped;
  capped.cap = lazy[2].metrics.peak_live_individuals;
  bool cap_hit = false;
  try {
    ca::run_scenario(scenarios[3], ca::Strategy::Lazy, e414, capped);
  } catch (const CapExceeded&) {
    cap_hit = true;
  }
  out.require(cap_hit, "lazy 17-fault run under the 5-fault cap did not raise CapExceeded");

  out.require(!eager[0].metrics.amortized_time_ms.has_value() && !lazy[0].metrics.amortized_time_ms.has_value(),
              "0-fault amortized time is not ND");
  out.require(ca::metrics_csv_row(eager[0].metrics).ends_with(",ND"), "0-fault CSV row does not report ND");

  const double elapsed = seconds_since(start);
  out.require(elapsed < 120.0, "runtime " + fmt("%.1f", elapsed) + " s exceeds 120 s");
  if (out.pass) {
    std::ostringstream d;
    d << "lazy peaks";
    for (const auto& r : lazy) d << ' ' << r.metrics.peak_live_individuals;
    d << ", eager peaks";
    for (const auto& r : eager) d << ' ' << r.metrics.peak_live_individuals;
    d << ", eager peak per concurrent observation " << per_bound.front() << ", cap " << *capped.cap << " exceeded, "
      << fmt("%.1f", elapsed) << " s";
    out.detail = d.str();
  }
  return out;
}

Outcome classification_fidelity() {
  Outcome out;
  const Ontology e414 = parse_ontology(fixtures::e414_ontology());
  struct Expected {
    ca::SeverityRange range;
    std::vector<std::string> symptom;
    std::vector<std::string> fault;
  };
  const Expected cases[] = {
      {ca::SeverityRange::R130plus, {"MissionRelatedSymptom"}, {"PriorityFault"}},
      {ca::SeverityRange::R80to130, {"MissionRelatedSymptom"}, {"PriorityFault"}},
      {ca::SeverityRange::R70to80, {"MaintenanceRelatedSymptom"}, {"NonPriorityFault"}},
  };
  for (const auto& c : cases) {
    const ca::Materialized m = ca::materialize({1, 100, c.range, 0, false});
    const ca::ClassificationResult r = ca::classify(m.assertions, e414);
    const std::vector<ca::Classified> expected{{m.fault, c.fault}, {m.symptom, c.symptom}};
    out.require(r.items == expected, std::string(ca::range_constant(c.range)) + " classified differently");
  }
  if (out.pass) out.detail = "_130degrees and _80to130 mission related, _70to80 maintenance only";
  return out;
}

Outcome kpi_agreement_and_benchmark() {
  Outcome out;
  const auto start = Clock::now();
  const Ontology ils_onto = parse_ontology(fixtures::ils_ontology());
  const ils::Scenario s = ils::generate_scenario({45, 15, 42, 5});

  ils::BenchmarkParams cumulative;
  cumulative.kpi = std::string(ils::kUnloadsPerHour);
  cumulative.paths = {ils::Path::Sql, ils::Path::Obda, ils::Path::Oracle};
  cumulative.repetitions = 3;
  const ils::BenchmarkReport c = ils::run_benchmark(s, cumulative, ils_onto);
  out.require(c.values_agree, "cumulative KPI values differ between paths");

  std::map<int, std::map<ils::Path, const ils::LatencyEntry*>> by_day;
  for (const auto& e : c.per_day) by_day[e.day][e.path] = &e;
  out.require(by_day.size() == 15, "benchmark did not cover 15 days");
  int slower_days = 0;
  double sql_total = 0, obda_total = 0;
  for (const auto& [day, paths] : by_day) {
    const auto* sql = paths.at(ils::Path::Sql);
    const auto* obda = paths.at(ils::Path::Obda);
    const auto* oracle = paths.at(ils::Path::Oracle);
    out.require(sql->value == obda->value && obda->value == oracle->value,
                "day " + std::to_string(day) + " KPI values differ");
    if (sql->median_ms > obda->median_ms) ++slower_days;
    sql_total += sql->median_ms;
    obda_total += obda->median_ms;
  }
  out.require(slower_days == 0, std::to_string(slower_days) + " days with sql median above obda median");

  ils::BenchmarkParams windowed = cumulative;
  windowed.paths = {ils::Path::Sql, ils::Path::Obda};
  windowed.retention_window = 24 * ils::kHour;
  const ils::BenchmarkReport r = ils::run_benchmark(s, windowed, ils_onto);
  out.require(r.values_agree, "retention KPI values differ between paths");
  out.require(c.trend.size() == 3 && r.trend.size() == 2, "trend statistics missing");
  out.require(ils::trend_summary(c).find("mode=cumulative") != std::string::npos &&
                  ils::trend_summary(r).find("mode=retention") != std::string::npos,
              "trend summary lacks a mode");

  std::vector<std::pair<double, double>> line;
  for (int x = 1; x <= 15; ++x) line.emplace_back(x, 2.0 + 0.5 * x);
  const double line_p = trend_test(line).p_value;
  out.require(line_p < 0.001, "exact line p = " + fmt("%.3g", line_p));

  std::mt19937_64 rng(4242);
  std::normal_distribution<double> noise(0.0, 1.0);
  int quiet = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, double>> series;
    for (int x = 1; x <= 15; ++x) series.emplace_back(x, noise(rng));
    quiet += trend_test(series).p_value > 0.05;
  }
  out.require(quiet >= 90, std::to_string(quiet) + "/100 noise trials with p > 0.05");

  const double elapsed = seconds_since(start);
  out.require(elapsed < 300.0, "runtime " + fmt("%.1f", elapsed) + " s exceeds 300 s");
  if (out.pass) {
    std::ostringstream d;
    d << "15 days agree, obda/sql total median ratio " << fmt("%.1f", obda_total / sql_total)
      << ", noise trials quiet " << quiet << "/100, " << fmt("%.1f", elapsed) << " s";
    out.detail = d.str();
  }
  return out;
}

Outcome profile_gate() {
  Outcome out;
  for (auto [name, text] : {std::pair{"ils", fixtures::ils_ontology()}, std::pair{"hvac", fixtures::hvac_ontology()}}) {
    const ProfileReport r = validate_ql_profile(parse_ontology(text));
    out.require(r.conformant && r.violations.empty(), std::string(name) + " is not conformant");
  }
  const Ontology e414 = parse_ontology(fixtures::e414_ontology());
  const ProfileReport r = validate_ql_profile(e414);
  std::size_t rules = 0;
  for (const auto& ax : e414.tbox) rules += std::holds_alternative<ConditionalType>(ax);
  out.require(!r.conformant, "e414 reported conformant");
  out.require(r.violations.size() == rules, "e414 has " + std::to_string(r.violations.size()) + " violations for " +
                                                std::to_string(rules) + " rules");
  std::set<std::size_t> flagged;
  for (const auto& v : r.violations) {
    out.require(v.code == violation::kConditionalType, "unexpected violation " + v.code);
    out.require(v.axiom_index < e414.tbox.size() && std::holds_alternative<ConditionalType>(e414.tbox[v.axiom_index]),
                "violation points at a non-rule axiom");
    flagged.insert(v.axiom_index);
  }
  out.require(flagged.size() == rules, "some rule axioms were not flagged");
  if (out.pass) out.detail = "ils, hvac conformant; e414 flags exactly its " + std::to_string(rules) + " rules";
  return out;
}

/// Temperatures in [40, 79] with k planted runs above 80 of length 3..8 and
/// short spikes of length 1..2 that must not fire.
std::vector<double> synthetic_stream(std::size_t n, int k, std::mt19937_64& rng, int& crossings) {
  std::uniform_real_distribution<double> calm(40.0, 79.0);
  std::uniform_real_distribution<double> hot(80.5, 120.0);
  std::vector<double> v(n);
  for (auto& x : v) x = calm(rng);
  const std::size_t slot = n / static_cast<std::size_t>(2 * k);
  for (int i = 0; i < 2 * k; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * slot + 2;
    const std::size_t len = i % 2 == 0 ? 3 + rng() % 6 : 1 + rng() % 2;
    for (std::size_t j = 0; j < len; ++j) v[base + j] = hot(rng);
  }
  crossings = 0;
  std::size_t run = 0;
  for (double x : v) {
    run = x > 80.0 ? run + 1 : 0;
    crossings += run == 3;
  }
  return v;
}

Outcome ddss_round_trip() {
  Outcome out;
  const auto start = Clock::now();
  const Ontology hvac = parse_ontology(fixtures::hvac_ontology());
  const ddss::DDSSBundle bundle = ddss::generate_ddss(hvac, ddss::parse_rule_graph(fixtures::hvac_threshold_graph()));
  if (auto gap = ddss::endpoint_completeness(bundle)) out.require(false, *gap);

  std::mt19937_64 rng(77);
  constexpr int kPlanted = 25;
  int k = 0;
  const std::vector<double> stream = synthetic_stream(1000, kPlanted, rng, k);
  out.require(k == kPlanted, "stream has " + std::to_string(k) + " crossings instead of " + std::to_string(kPlanted));

  ddss::Ddss service(bundle);
  std::vector<ddss::EventRecord> emitted;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    service.ingest_event({"IncomingEvent", static_cast<std::int64_t>(1000 + i), "s1", stream[i], ""});
    for (auto& e : service.step_engine()) emitted.push_back(std::move(e));
  }
  std::size_t alarms = 0;
  for (const auto& e : emitted) alarms += e.event_class == "AlarmEvent";
  out.require(alarms == static_cast<std::size_t>(k) && emitted.size() == alarms,
              std::to_string(alarms) + " alarms of " + std::to_string(emitted.size()) + " records for " +
                  std::to_string(k) + " crossings");
  if (auto bad = ddss::check_outgoing(emitted, hvac)) out.require(false, *bad);

  const std::string id_list = [&] {
    std::size_t stored = service.store().execute("SELECT t0.id FROM alarmevent t0").size();
    std::size_t relates = service.store().execute("SELECT t0.s FROM relatesto t0 WHERE t0.o = 's1'").size();
    std::size_t reports = service.store().execute("SELECT t0.s FROM reports t0 WHERE t0.o = 'highTemperature'").size();
    return std::to_string(stored) + "/" + std::to_string(relates) + "/" + std::to_string(reports);
  }();
  const std::string want = std::to_string(k) + "/" + std::to_string(k) + "/" + std::to_string(k);
  out.require(id_list == want, "stored alarm/relatesTo/reports rows " + id_list + ", expected " + want);

  const double elapsed = seconds_since(start);
  out.require(elapsed < 30.0, "runtime " + fmt("%.1f", elapsed) + " s exceeds 30 s");
  if (out.pass) {
    out.detail = "endpoints bijective, " + std::to_string(k) + " crossings -> " + std::to_string(alarms) +
                 " AlarmEvents, invariants hold, " + fmt("%.2f", elapsed) + " s";
  }
  return out;
}

Outcome round_trip_and_determinism() {
  Outcome out;
  for (auto [name, text] : {std::pair{"ils", fixtures::ils_ontology()}, std::pair{"e414", fixtures::e414_ontology()},
                            std::pair{"hvac", fixtures::hvac_ontology()}, std::pair{"tiny", fixtures::tiny_ontology()}}) {
    const Ontology o = parse_ontology(text);
    const std::string printed = print_ontology(o);
    out.require(parse_ontology(printed) == o, std::string(name) + " changes under print and parse");
    out.require(print_ontology(parse_ontology(printed)) == printed, std::string(name) + " printing is not stable");
    const auto a = generate_schema(o);
    const auto b = generate_schema(parse_ontology(text));
    out.require(a.first == b.first && a.second == b.second && a.first.ddl() == b.first.ddl(),
                std::string(name) + " schema generation is not deterministic");
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Ontology o = testing::random_instance(seed, {}).ontology;
    out.require(parse_ontology(print_ontology(o)) == o, "random ontology " + std::to_string(seed) + " round trip");
  }

  ca::ScenarioParams cp;
  cp.faults = 5;
  cp.seed = 9;
  out.require(ca::generate_scenario(cp).values == ca::generate_scenario(cp).values, "ca scenario not deterministic");
  const ils::ScenarioParams ip{30, 3, 9, 5};
  const ils::Scenario x = ils::generate_scenario(ip);
  const ils::Scenario y = ils::generate_scenario(ip);
  out.require(x.events == y.events, "ils scenario not deterministic");
  std::ostringstream lx, ly;
  ils::write_event_log(x.events, lx);
  ils::write_event_log(y.events, ly);
  out.require(lx.str() == ly.str(), "ils event logs differ");
  if (out.pass) out.detail = "4 fixtures and 20 random ontologies round trip; schemas and scenarios reproducible";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "rewriting equals chase on random instances", rewriting_matches_chase},
      {2, "lazy/eager fault-scenario protocol", table_protocol},
      {3, "classification fidelity per severity range", classification_fidelity},
      {4, "KPI path agreement and benchmark shape", kpi_agreement_and_benchmark},
      {5, "profile gate", profile_gate},
      {6, "DDSS generation and alarm replay", ddss_round_trip},
      {7, "round trip and determinism", round_trip_and_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}

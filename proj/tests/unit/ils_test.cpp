#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "ose/error.hpp"
#include "ose/fixtures.hpp"
#include "ose/ils.hpp"
#include "ose/trend.hpp"

namespace ose::ils {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ose::Error thrown";
  return ErrorCode::Io;
}

const Ontology& ils() {
  static const Ontology o = parse_ontology(fixtures::ils_ontology());
  return o;
}

const Scenario& small_scenario() {
  static const Scenario s = generate_scenario({20, 3, 17, 5});
  return s;
}

TEST(Network, HubAndRoutes) {
  const NetworkFixture n = make_network(5);
  EXPECT_EQ(n.terminals, (std::vector<std::string>{"T1", "T2", "T3", "T4", "T5"}));
  EXPECT_EQ(n.cars_per_train, 24);
  EXPECT_EQ(n.routes.size(), 4u);
  for (const auto& r : n.routes) {
    const bool touches_hub = r.stops.front().terminal == "T3" || r.stops.back().terminal == "T3";
    EXPECT_TRUE(touches_hub) << r.id;
    EXPECT_EQ(r.stops.back().arrival_offset, r.stops.back().departure_offset);
  }
  EXPECT_EQ(code_of([] { make_network(1); }), ErrorCode::InvalidParams);
}

TEST(GenerateScenario, ItuCountPerTerminalDay) {
  const Scenario s = generate_scenario({45, 1, 1, 5});
  std::size_t gate_ins = 0;
  std::map<std::string, int> per_terminal;
  for (const auto& e : s.events) {
    if (e.kind == EventKind::GateIn) {
      ++gate_ins;
      ++per_terminal[e.terminal];
    }
  }
  EXPECT_EQ(gate_ins, 225u);
  EXPECT_EQ(s.orders.size(), 225u);
  for (const auto& [t, n] : per_terminal) EXPECT_EQ(n, 45) << t;
}

TEST(GenerateScenario, ValidItinerariesAndDeterminism) {
  const Scenario& s = small_scenario();
  EXPECT_EQ(check_itineraries(s.events), std::nullopt);
  EXPECT_EQ(generate_scenario({20, 3, 17, 5}).events, s.events);
  EXPECT_NE(generate_scenario({20, 3, 18, 5}).events, s.events);
  EXPECT_TRUE(std::is_sorted(s.events.begin(), s.events.end(),
                             [](const SimEvent& a, const SimEvent& b) { return a.t < b.t; }));
}

TEST(GenerateScenario, InvalidParams) {
  EXPECT_EQ(code_of([] { generate_scenario({9, 1, 1, 5}); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { generate_scenario({51, 1, 1, 5}); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { generate_scenario({20, 16, 1, 5}); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { generate_scenario({20, 0, 1, 5}); }), ErrorCode::InvalidParams);
}

TEST(CheckItineraries, DetectsOutOfOrderLeg) {
  std::vector<SimEvent> events = small_scenario().events;
  for (auto& e : events) {
    if (e.kind == EventKind::Unload) {
      e.t = 0;
      break;
    }
  }
  EXPECT_TRUE(check_itineraries(events).has_value());
}

TEST(EventLog, RoundTrip) {
  const Scenario& s = small_scenario();
  std::stringstream io;
  write_event_log(s.events, io);
  EXPECT_EQ(read_event_log(io), s.events);
  std::istringstream bad("a,b\n");
  EXPECT_EQ(code_of([&] { read_event_log(bad); }), ErrorCode::InvalidParams);
}

std::vector<SimEvent> unload_log(int unloads, std::int64_t start, std::int64_t spacing) {
  std::vector<SimEvent> log;
  for (int i = 0; i < unloads; ++i) {
    log.push_back({"ev" + std::to_string(i), EventKind::Unload, start + i * spacing, "T1",
                   "itu" + std::to_string(i), "R1-0", "o" + std::to_string(i)});
  }
  return log;
}

TEST(Kpi, TwentyFourUnloadsInADayIsOnePerHour) {
  const auto log = unload_log(24, 0, kHour);
  MonitoringStores stores(ils());
  stores.ingest_events(log);
  const KpiSources src{&stores, log, kDay, 5};
  for (Path p : {Path::Sql, Path::Obda, Path::Oracle}) {
    EXPECT_DOUBLE_EQ(compute_kpi(kUnloadsPerHour, {0, kDay}, p, src).value, 1.0) << to_string(p);
  }
}

TEST(Kpi, EmptyPeriodIsZero) {
  const auto log = unload_log(10, 0, 60);
  MonitoringStores stores(ils());
  stores.ingest_events(log);
  const KpiSources src{&stores, log, 2 * kDay, 5};
  for (Path p : {Path::Sql, Path::Obda, Path::Oracle}) {
    EXPECT_EQ(compute_kpi(kUnloadsPerHour, {kDay, 2 * kDay}, p, src).value, 0.0);
    EXPECT_EQ(compute_kpi(kAvgDwellHours, {kDay, 2 * kDay}, p, src).value, 0.0);
  }
}

TEST(Kpi, UnknownNameAndBadPeriod) {
  MonitoringStores stores(ils());
  const KpiSources src{&stores, {}, kDay, 5};
  EXPECT_EQ(code_of([&] { compute_kpi("throughput", {0, kDay}, Path::Sql, src); }), ErrorCode::UnknownKPI);
  EXPECT_EQ(code_of([&] { compute_kpi(kUnloadsPerHour, {kDay, kDay}, Path::Sql, src); }), ErrorCode::InvalidParams);
}

TEST(Kpi, AllPathsAgreeOnEveryKpiAndDay) {
  const Scenario& s = small_scenario();
  MonitoringStores stores(ils());
  stores.ingest_static(s);
  for (int day = 1; day <= s.params.days; ++day) {
    stores.ingest_day(s, day);
    const KpiSources src{&stores, s.events, day * kDay, s.params.terminals};
    for (auto name : kpi_names()) {
      const Period period{(day - 1) * kDay, day * kDay};
      const double oracle = compute_kpi(name, period, Path::Oracle, src).value;
      EXPECT_NEAR(compute_kpi(name, period, Path::Sql, src).value, oracle, 1e-9) << name << " day " << day;
      EXPECT_NEAR(compute_kpi(name, period, Path::Obda, src).value, oracle, 1e-9) << name << " day " << day;
    }
  }
}

TEST(Kpi, UnloadConservationOverTheWholeRun) {
  const Scenario& s = small_scenario();
  std::int64_t end = 0;
  for (const auto& e : s.events) end = std::max(end, e.t + 1);
  const KpiSources src{nullptr, s.events, end, s.params.terminals};
  const double per_hour = compute_kpi(kUnloadsPerHour, {0, end}, Path::Oracle, src).value;
  std::size_t gate_outs = 0;
  for (const auto& e : s.events) gate_outs += e.kind == EventKind::GateOut;
  EXPECT_EQ(gate_outs, s.orders.size());
  EXPECT_GE(std::llround(per_hour * static_cast<double>(end) / kHour), static_cast<long long>(s.orders.size()));
}

TEST(Retention, KeepsRecentEventsOnly) {
  const Scenario& s = small_scenario();
  MonitoringStores stores(ils());
  stores.ingest_static(s);
  for (int day = 1; day <= 3; ++day) stores.ingest_day(s, day);
  EXPECT_GT(stores.apply_retention(kDay, 3 * kDay), 0u);
  for (const auto& r : stores.native().rows("ils_event")) {
    EXPECT_GE(std::get<std::int64_t>(r[2]), 2 * kDay);
  }
  const KpiSources src{&stores, s.events, 3 * kDay, s.params.terminals};
  const Period last{2 * kDay, 3 * kDay};
  const double oracle = compute_kpi(kUnloadsPerHour, last, Path::Oracle, src).value;
  EXPECT_NEAR(compute_kpi(kUnloadsPerHour, last, Path::Sql, src).value, oracle, 1e-9);
  EXPECT_NEAR(compute_kpi(kUnloadsPerHour, last, Path::Obda, src).value, oracle, 1e-9);
}

TEST(Benchmark, ReportShape) {
  BenchmarkParams params;
  params.repetitions = 3;
  params.paths = {Path::Sql, Path::Obda, Path::Oracle};
  const BenchmarkReport r = run_benchmark(small_scenario(), params, ils());
  EXPECT_EQ(r.mode, "cumulative");
  EXPECT_EQ(r.per_day.size(), 9u);
  EXPECT_TRUE(r.values_agree);
  EXPECT_EQ(r.trend.size(), 3u);
  const std::string csv = report_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "day,path,median_ms,repetitions,value");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_NE(trend_summary(r).find("mode=cumulative"), std::string::npos);
  params.retention_window = 24 * kHour;
  EXPECT_EQ(run_benchmark(small_scenario(), params, ils()).mode, "retention");
}

std::vector<std::pair<double, double>> series(std::initializer_list<double> ys) {
  std::vector<std::pair<double, double>> out;
  double x = 1;
  for (double y : ys) out.emplace_back(x++, y);
  return out;
}

TEST(Trend, ExactLine) {
  const auto s = series({3, 5, 7, 9, 11, 13});
  const TrendResult r = trend_test(s);
  EXPECT_NEAR(r.slope, 2.0, 1e-12);
  EXPECT_NEAR(r.intercept, 1.0, 1e-12);
  EXPECT_LT(r.p_value, 0.001);
  EXPECT_EQ(r.n, 6u);
}

TEST(Trend, ConstantSeries) {
  const auto s = series({4, 4, 4, 4, 4});
  const TrendResult r = trend_test(s);
  EXPECT_EQ(r.slope, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Trend, KnownRegression) {
  // y = x with residuals +1, -1, -1, +1: t = sqrt(5/2) on 2 df, p = 1 - sqrt(5/9).
  const auto s = series({2, 1, 2, 5});
  const TrendResult r = trend_test(s);
  EXPECT_NEAR(r.slope, 1.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0 - std::sqrt(5.0 / 9.0), 1e-9);
}

TEST(Trend, Errors) {
  const auto two = series({1, 2});
  EXPECT_EQ(code_of([&] { trend_test(two); }), ErrorCode::InvalidParams);
  const std::vector<std::pair<double, double>> same_x{{1, 1}, {1, 2}, {1, 3}};
  EXPECT_EQ(code_of([&] { trend_test(same_x); }), ErrorCode::DegenerateSeries);
}

TEST(Trend, NoiseRarelySignificant) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(10.0, 1.0);
  int false_positives = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<std::pair<double, double>> s;
    for (int x = 1; x <= 15; ++x) s.emplace_back(x, noise(rng));
    false_positives += trend_test(s).p_value <= 0.05;
  }
  EXPECT_LE(false_positives, 40);
}

}  // namespace
}  // namespace ose::ils

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ose/datastore.hpp"
#include "ose/ontology.hpp"
#include "ose/trend.hpp"

namespace ose::ils {

inline constexpr std::int64_t kDay = 86400;
inline constexpr std::int64_t kHour = 3600;

struct ScheduledStop {
  std::string terminal;
  std::int64_t arrival_offset = 0;    // seconds after the run's first departure
  std::int64_t departure_offset = 0;  // equals arrival_offset at the last stop
};

struct Route {
  std::string id;
  std::vector<ScheduledStop> stops;
};

struct NetworkFixture {
  std::vector<std::string> terminals;  // in line order
  std::vector<Route> routes;
  int cars_per_train = 24;             // one ITU per car
  std::int64_t run_interval = 3 * kHour;
  int runs_per_day = 8;
  double customers_mean = 8.0;
  double delay_sd = 600.0;             // seconds per segment, truncated at 0
  std::int64_t leg_travel = 2 * kHour;
  std::int64_t stop_dwell = 30 * 60;

  /// Train serving `route` in daily slot `slot`.
  static std::string train_id(const Route& route, int slot);
};

/// Terminals T1..Tn on a line with the hub at T((n+1)/2): one route per
/// direction on each side of the hub, so ITUs crossing it change trains.
/// Throws InvalidParams for fewer than two terminals.
NetworkFixture make_network(int terminals);

enum class EventKind { GateIn, Load, Depart, Arrive, Unload, GateOut };

std::string_view to_string(EventKind k);
EventKind event_kind_from(std::string_view s);

struct SimEvent {
  std::string id;  // ev<index> in log order
  EventKind kind = EventKind::GateIn;
  std::int64_t t = 0;
  std::string terminal;
  std::string itu;
  std::string train;  // empty for gate events
  std::string order;

  bool operator==(const SimEvent&) const = default;
};

struct Customer {
  std::string id;
  std::string terminal;
};

struct Request {
  std::string id;
  std::string customer;
  int day = 1;
  std::vector<std::string> orders;
};

struct Order {
  std::string id;
  std::string request;
  std::string itu;
  std::string origin;
  std::string destination;
};

struct ScenarioParams {
  int itus_per_terminal_day = 45;  // 10..50
  int days = 1;                    // 1..15
  std::uint64_t seed = 1;
  int terminals = 5;
};

struct Scenario {
  ScenarioParams params;
  NetworkFixture network;
  std::vector<Customer> customers;
  std::vector<Request> requests;
  std::vector<Order> orders;
  std::vector<SimEvent> events;  // complete itineraries, sorted by time
  std::int64_t horizon = 0;      // days * kDay
};

/// Deterministic for equal parameters. Each terminal ships exactly
/// itus_per_terminal_day ITUs per day, gated in during the first 18 hours,
/// grouped into requests of 1-5 ITUs from Poisson-many customers. Every
/// itinerary runs to its GateOut even past the horizon. Throws InvalidParams.
Scenario generate_scenario(const ScenarioParams& p);

/// CSV `kind,t,terminal,itu,train,order` with ISO-8601 times.
void write_event_log(std::span<const SimEvent> events, std::ostream& out);
std::vector<SimEvent> read_event_log(std::istream& in);

/// Reports the first itinerary violating GateIn < Load < Depart < Arrive <
/// Unload < GateOut along each leg, or nothing when the log is valid.
std::optional<std::string> check_itineraries(std::span<const SimEvent> events);

/// Native event table `ils_event(id, kind, t, terminal, itu, train, transport_order)`.
RelationalSchema native_schema();

/// Assertions for one event: Load and Unload only through `loads`/`unloads`,
/// every other kind through its class and `concernsITU`.
std::vector<Assertion> event_assertions(const SimEvent& e);

/// The two stores a KPI can be computed from: the native event table and the
/// ontology-derived schema holding raw assertions.
class MonitoringStores {
 public:
  explicit MonitoringStores(Ontology ils);

  const Ontology& ontology() const { return onto_; }
  const DataStore& native() const { return native_; }
  const DataStore& obda() const { return obda_; }

  /// Network, trains and customers.
  void ingest_static(const Scenario& s);
  /// Requests gated in on `day` plus every event in [(day-1)*kDay, day*kDay).
  void ingest_day(const Scenario& s, int day);
  void ingest_events(std::span<const SimEvent> events);
  /// Recency retention on the event tables of both stores.
  std::size_t apply_retention(std::int64_t window, std::int64_t now);

 private:
  Ontology onto_;
  DataStore native_;
  DataStore obda_;
  std::set<std::string> event_tables_;
};

/// Options for generate_schema that type the ILS time columns.
SchemaOptions ils_schema_options();

enum class Path { Sql, Obda, Oracle };
std::string_view to_string(Path p);
Path path_from(std::string_view s);

struct Period {
  std::int64_t start = 0;
  std::int64_t end = 0;  // exclusive
};

struct KPIResult {
  std::string name;
  Period period;
  double value = 0;
};

/// ITUs unloaded per hour (Unload events in the period / period hours).
inline constexpr std::string_view kUnloadsPerHour = "unloads_per_hour";
/// Mean hours between GateIn and Load at the origin, by GateIn time (invented).
inline constexpr std::string_view kAvgDwellHours = "avg_dwell_hours";
/// Distinct train departures per terminal per day (invented).
inline constexpr std::string_view kTrainsPerDayPerTerminal = "trains_per_day_per_terminal";

std::vector<std::string_view> kpi_names();

/// Data visible to a KPI: the stores for sql and obda, the raw log for the
/// oracle, and the ingestion cut-off every path respects.
struct KpiSources {
  const MonitoringStores* stores = nullptr;
  std::span<const SimEvent> log;
  std::int64_t as_of = 0;  // only events with t < as_of are visible
  int terminals = 5;
};

/// Throws Error(UnknownKPI).
KPIResult compute_kpi(std::string_view name, Period period, Path path, const KpiSources& sources);

struct BenchmarkParams {
  std::string kpi = std::string(kUnloadsPerHour);
  std::vector<Path> paths = {Path::Sql, Path::Obda};
  int repetitions = 5;
  std::optional<std::int64_t> retention_window;  // seconds; cumulative when empty
};

struct LatencyEntry {
  int day = 0;
  Path path = Path::Sql;
  double median_ms = 0;
  int repetitions = 0;
  double value = 0;
};

struct BenchmarkReport {
  std::string mode;  // "cumulative" or "retention"
  std::string kpi;
  std::vector<LatencyEntry> per_day;
  std::vector<std::pair<Path, TrendResult>> trend;
  bool values_agree = true;  // every path returned the same value each day
};

/// Ingests the scenario day by day and, after each day, times the KPI over
/// that day on every requested path (median of `repetitions` runs).
BenchmarkReport run_benchmark(const Scenario& s, const BenchmarkParams& params,
                              const Ontology& ils);

/// `day,path,median_ms,repetitions,value`
std::string report_csv(const BenchmarkReport& r);
/// One line per path: mode, slope, p-value.
std::string trend_summary(const BenchmarkReport& r);
/// Whitespace-separated `x y series` rows.
std::string plot_data(const BenchmarkReport& r);

}  // namespace ose::ils

#include "ose/ils.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "ose/error.hpp"
#include "ose/query.hpp"
#include "ose/rewrite.hpp"
#include "ose/text.hpp"

namespace ose::ils {

std::string NetworkFixture::train_id(const Route& route, int slot) {
  return route.id + "-" + std::to_string(slot);
}

namespace {

Route make_route(const std::string& id, const std::vector<std::string>& seq, std::int64_t travel,
                 std::int64_t dwell) {
  Route r{id, {}};
  std::int64_t clock = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    ScheduledStop stop{seq[i], clock, clock};
    if (i > 0 && i + 1 < seq.size()) stop.departure_offset = clock + dwell;
    r.stops.push_back(stop);
    clock = stop.departure_offset + travel;
  }
  return r;
}

}  // namespace

NetworkFixture make_network(int terminals) {
  if (terminals < 2) throw Error(ErrorCode::InvalidParams, "the network needs at least two terminals");
  NetworkFixture n;
  for (int i = 1; i <= terminals; ++i) n.terminals.push_back("T" + std::to_string(i));
  const int hub = (terminals + 1) / 2;
  auto span = [&](int from, int to) {
    std::vector<std::string> seq;
    const int step = from < to ? 1 : -1;
    for (int i = from;; i += step) {
      seq.push_back(n.terminals[static_cast<std::size_t>(i - 1)]);
      if (i == to) break;
    }
    return seq;
  };
  if (hub > 1) n.routes.push_back(make_route("R1", span(1, hub), n.leg_travel, n.stop_dwell));
  if (terminals > hub) {
    n.routes.push_back(make_route("R2", span(hub, terminals), n.leg_travel, n.stop_dwell));
    n.routes.push_back(make_route("R3", span(terminals, hub), n.leg_travel, n.stop_dwell));
  }
  if (hub > 1) n.routes.push_back(make_route("R4", span(hub, 1), n.leg_travel, n.stop_dwell));
  return n;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::GateIn: return "GateIn";
    case EventKind::Load: return "Load";
    case EventKind::Depart: return "Depart";
    case EventKind::Arrive: return "Arrive";
    case EventKind::Unload: return "Unload";
    case EventKind::GateOut: return "GateOut";
  }
  return "GateIn";
}

EventKind event_kind_from(std::string_view s) {
  for (auto k : {EventKind::GateIn, EventKind::Load, EventKind::Depart, EventKind::Arrive,
                 EventKind::Unload, EventKind::GateOut}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidParams, "unknown event kind '" + std::string(s) + "'");
}

namespace {

constexpr std::int64_t kLoadLead = 600;       // Load precedes departure
constexpr std::int64_t kReadyMargin = 1800;   // ITU ready before departure
constexpr std::int64_t kUnloadLag = 900;      // Unload follows arrival
constexpr std::int64_t kGateHours = 18;

struct Run {
  std::vector<std::int64_t> arrival;
  std::vector<std::int64_t> departure;
  std::vector<int> load;  // ITUs on each segment
};

class Simulator {
 public:
  Simulator(const NetworkFixture& n, std::uint64_t seed) : net_(n), seed_(seed) {}

  // Books the leg on `route` from stop i to stop j for an ITU ready at
  // `ready`; returns (train, departure, arrival).
  std::tuple<std::string, std::int64_t, std::int64_t> book(std::size_t route, std::size_t i,
                                                           std::size_t j, std::int64_t ready) {
    const Route& r = net_.routes[route];
    for (std::int64_t day = std::max<std::int64_t>(0, ready / kDay - 1);; ++day) {
      for (int slot = 0; slot < net_.runs_per_day; ++slot) {
        Run& run = this->run(route, day, slot);
        if (run.departure[i] < ready + kReadyMargin) continue;
        bool room = true;
        for (std::size_t s = i; s < j; ++s) room = room && run.load[s] < net_.cars_per_train;
        if (!room) continue;
        for (std::size_t s = i; s < j; ++s) ++run.load[s];
        return {NetworkFixture::train_id(r, slot), run.departure[i], run.arrival[j]};
      }
    }
  }

 private:
  Run& run(std::size_t route, std::int64_t day, int slot) {
    const auto key = std::make_tuple(route, day, slot);
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;

    const Route& r = net_.routes[route];
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(route), static_cast<std::uint32_t>(day),
                      static_cast<std::uint32_t>(slot)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> delay(0.0, net_.delay_sd);
    Run run;
    const std::int64_t start = day * kDay + slot * net_.run_interval;
    std::int64_t cumulative = 0;
    for (std::size_t s = 0; s < r.stops.size(); ++s) {
      if (s > 0) cumulative += static_cast<std::int64_t>(std::max(0.0, delay(rng)));
      run.arrival.push_back(start + r.stops[s].arrival_offset + cumulative);
      run.departure.push_back(start + r.stops[s].departure_offset + cumulative);
    }
    run.load.assign(r.stops.size(), 0);
    return runs_.emplace(key, std::move(run)).first->second;
  }

  const NetworkFixture& net_;
  std::uint64_t seed_;
  std::map<std::tuple<std::size_t, std::int64_t, int>, Run> runs_;
};

struct Leg {
  std::size_t route;
  std::size_t from;
  std::size_t to;
};

std::size_t stop_index(const Route& r, const std::string& terminal) {
  for (std::size_t i = 0; i < r.stops.size(); ++i) {
    if (r.stops[i].terminal == terminal) return i;
  }
  return r.stops.size();
}

// Legs from terminal index o to d (1-based), changing trains at the hub.
std::vector<Leg> plan_legs(const NetworkFixture& n, int o, int d) {
  const int count = static_cast<int>(n.terminals.size());
  const int hub = (count + 1) / 2;
  std::vector<std::pair<std::string, std::pair<int, int>>> hops;
  if (o < d) {
    if (o < hub) hops.push_back({"R1", {o, std::min(d, hub)}});
    if (d > hub) hops.push_back({"R2", {std::max(o, hub), d}});
  } else {
    if (o > hub) hops.push_back({"R3", {o, std::max(d, hub)}});
    if (d < hub) hops.push_back({"R4", {std::min(o, hub), d}});
  }
  std::vector<Leg> legs;
  for (const auto& [id, ends] : hops) {
    for (std::size_t r = 0; r < n.routes.size(); ++r) {
      if (n.routes[r].id != id) continue;
      const Route& route = n.routes[r];
      legs.push_back({r, stop_index(route, n.terminals[static_cast<std::size_t>(ends.first - 1)]),
                      stop_index(route, n.terminals[static_cast<std::size_t>(ends.second - 1)])});
    }
  }
  return legs;
}

}  // namespace

Scenario generate_scenario(const ScenarioParams& p) {
  if (p.itus_per_terminal_day < 10 || p.itus_per_terminal_day > 50) {
    throw Error(ErrorCode::InvalidParams, "ITUs per terminal per day must be within 10..50");
  }
  if (p.days < 1 || p.days > 15) throw Error(ErrorCode::InvalidParams, "days must be within 1..15");
  Scenario s;
  s.params = p;
  s.network = make_network(p.terminals);
  s.horizon = static_cast<std::int64_t>(p.days) * kDay;
  const NetworkFixture& net = s.network;

  std::mt19937_64 rng(p.seed);
  std::poisson_distribution<int> customers(net.customers_mean);
  std::map<std::string, std::vector<std::string>> customers_at;
  for (const auto& term : net.terminals) {
    const int k = std::max(1, customers(rng));
    for (int c = 0; c < k; ++c) {
      Customer cust{"cust" + std::to_string(s.customers.size() + 1), term};
      customers_at[term].push_back(cust.id);
      s.customers.push_back(std::move(cust));
    }
  }

  struct Shipment {
    std::int64_t gate_in;
    std::size_t order;
  };
  std::vector<Shipment> shipments;
  std::uniform_int_distribution<std::int64_t> gate(0, kGateHours * kHour - 1);
  std::uniform_int_distribution<int> units(1, 5);
  for (int day = 0; day < p.days; ++day) {
    for (std::size_t ti = 0; ti < net.terminals.size(); ++ti) {
      const std::string& origin = net.terminals[ti];
      const auto& local = customers_at[origin];
      int remaining = p.itus_per_terminal_day;
      while (remaining > 0) {
        const int size = std::min(remaining, units(rng));
        remaining -= size;
        std::uniform_int_distribution<std::size_t> pick_customer(0, local.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_dest(0, net.terminals.size() - 2);
        std::size_t di = pick_dest(rng);
        if (di >= ti) ++di;
        Request req{"rfw" + std::to_string(s.requests.size() + 1), local[pick_customer(rng)], day + 1, {}};
        for (int u = 0; u < size; ++u) {
          const std::size_t n = s.orders.size() + 1;
          Order order{"to" + std::to_string(n), req.id, "itu" + std::to_string(n), origin,
                      net.terminals[di]};
          req.orders.push_back(order.id);
          shipments.push_back({day * kDay + gate(rng), s.orders.size()});
          s.orders.push_back(std::move(order));
        }
        s.requests.push_back(std::move(req));
      }
    }
  }
  std::stable_sort(shipments.begin(), shipments.end(),
                   [](const Shipment& a, const Shipment& b) { return a.gate_in < b.gate_in; });

  Simulator sim(net, p.seed);
  std::uniform_int_distribution<std::int64_t> pickup(30 * 60, 3 * kHour);
  auto index_of = [&](const std::string& term) {
    return static_cast<int>(std::find(net.terminals.begin(), net.terminals.end(), term) -
                            net.terminals.begin()) + 1;
  };
  std::vector<SimEvent> events;
  for (const auto& sh : shipments) {
    const Order& o = s.orders[sh.order];
    auto emit = [&](EventKind k, std::int64_t t, const std::string& term, const std::string& train) {
      events.push_back({"", k, t, term, o.itu, train, o.id});
    };
    emit(EventKind::GateIn, sh.gate_in, o.origin, "");
    std::int64_t ready = sh.gate_in;
    std::string last = o.origin;
    for (const Leg& leg : plan_legs(net, index_of(o.origin), index_of(o.destination))) {
      const Route& route = net.routes[leg.route];
      const auto [train, dep, arr] = sim.book(leg.route, leg.from, leg.to, ready);
      const std::string& from = route.stops[leg.from].terminal;
      const std::string& to = route.stops[leg.to].terminal;
      emit(EventKind::Load, dep - kLoadLead, from, train);
      emit(EventKind::Depart, dep, from, train);
      emit(EventKind::Arrive, arr, to, train);
      emit(EventKind::Unload, arr + kUnloadLag, to, train);
      ready = arr + kUnloadLag;
      last = to;
    }
    emit(EventKind::GateOut, ready + pickup(rng), last, "");
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.t < b.t; });
  for (std::size_t i = 0; i < events.size(); ++i) events[i].id = "ev" + std::to_string(i);
  s.events = std::move(events);
  return s;
}

void write_event_log(std::span<const SimEvent> events, std::ostream& out) {
  out << "kind,t,terminal,itu,train,order\n";
  for (const auto& e : events) {
    out << text::join_csv({std::string(to_string(e.kind)), text::format_iso8601(e.t), e.terminal, e.itu,
                           e.train, e.order})
        << '\n';
  }
}

std::vector<SimEvent> read_event_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      text::split_csv(line) != std::vector<std::string>{"kind", "t", "terminal", "itu", "train", "order"}) {
    throw Error(ErrorCode::InvalidParams, "event log must start with 'kind,t,terminal,itu,train,order'");
  }
  std::vector<SimEvent> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = text::split_csv(line);
    if (f.size() != 6) throw Error(ErrorCode::InvalidParams, "event log row needs 6 fields");
    out.push_back({"ev" + std::to_string(out.size()), event_kind_from(f[0]), text::parse_iso8601(f[1]), f[2],
                   f[3], f[4], f[5]});
  }
  return out;
}

std::optional<std::string> check_itineraries(std::span<const SimEvent> events) {
  std::map<std::string, std::vector<const SimEvent*>> by_itu;
  for (const auto& e : events) by_itu[e.itu].push_back(&e);
  for (auto& [itu, seq] : by_itu) {
    std::stable_sort(seq.begin(), seq.end(), [](const SimEvent* a, const SimEvent* b) {
      return a->t != b->t ? a->t < b->t : a->kind < b->kind;
    });
    auto fail = [&](const std::string& why) { return std::optional<std::string>(itu + ": " + why); };
    if (seq.size() < 6 || (seq.size() - 2) % 4 != 0) return fail("incomplete itinerary");
    if (seq.front()->kind != EventKind::GateIn) return fail("does not start with GateIn");
    if (seq.back()->kind != EventKind::GateOut) return fail("does not end with GateOut");
    static constexpr EventKind kLeg[] = {EventKind::Load, EventKind::Depart, EventKind::Arrive,
                                         EventKind::Unload};
    std::string at = seq.front()->terminal;
    for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
      const SimEvent& e = *seq[i];
      if (e.kind != kLeg[(i - 1) % 4]) return fail("leg events out of order at " + e.id);
      if (seq[i - 1]->t >= e.t) return fail("non-increasing time at " + e.id);
      const std::size_t pos = (i - 1) % 4;
      if (pos < 2 && e.terminal != at) return fail("leg starts away from the ITU at " + e.id);
      if (pos == 2) at = e.terminal;
      if (pos == 3 && e.terminal != at) return fail("unload away from arrival at " + e.id);
    }
    if (seq[seq.size() - 2]->t >= seq.back()->t) return fail("GateOut before final Unload");
    if (seq.back()->terminal != at) return fail("GateOut away from the final terminal");
  }
  return std::nullopt;
}

RelationalSchema native_schema() {
  RelationalSchema s;
  s.tables.push_back({"ils_event",
                      {{"id", ColumnType::Id},
                       {"kind", ColumnType::Text},
                       {"t", ColumnType::Timestamp},
                       {"terminal", ColumnType::Id},
                       {"itu", ColumnType::Id},
                       {"train", ColumnType::Text},
                       {"transport_order", ColumnType::Id}},
                      {"id"}});
  return s;
}

SchemaOptions ils_schema_options() {
  SchemaOptions o;
  o.value_types["hasTime"] = ColumnType::Timestamp;
  o.value_types["carsPerTrain"] = ColumnType::Integer;
  o.value_types["arrivalOffset"] = ColumnType::Integer;
  o.value_types["departureOffset"] = ColumnType::Integer;
  o.value_types["requestedUnits"] = ColumnType::Integer;
  return o;
}

std::vector<Assertion> event_assertions(const SimEvent& e) {
  std::vector<Assertion> out;
  switch (e.kind) {
    case EventKind::Load: out.emplace_back(ObjectAssertion{e.id, "loads", e.itu}); break;
    case EventKind::Unload: out.emplace_back(ObjectAssertion{e.id, "unloads", e.itu}); break;
    default:
      out.emplace_back(ClassAssertion{e.id, std::string(to_string(e.kind)) + "Event"});
      out.emplace_back(ObjectAssertion{e.id, "concernsITU", e.itu});
      break;
  }
  out.emplace_back(ObjectAssertion{e.id, "occursAt", e.terminal});
  out.emplace_back(DataAssertion{e.id, "hasTime", std::to_string(e.t)});
  if (!e.train.empty()) out.emplace_back(ObjectAssertion{e.id, "involvesTrain", e.train});
  out.emplace_back(ObjectAssertion{e.id, "underOrder", e.order});
  return out;
}

MonitoringStores::MonitoringStores(Ontology ils) : onto_(std::move(ils)) {
  auto [schema, mapping] = generate_schema(onto_, ils_schema_options());
  for (const char* cls : {"Event", "GateInEvent", "LoadEvent", "DepartEvent", "ArriveEvent", "UnloadEvent",
                          "GateOutEvent"}) {
    if (auto it = mapping.class_map.find(cls); it != mapping.class_map.end()) event_tables_.insert(it->second);
  }
  for (const char* p : {"occursAt", "concernsITU", "loads", "unloads", "involvesTrain", "underOrder"}) {
    if (auto it = mapping.object_property_map.find(p); it != mapping.object_property_map.end()) {
      event_tables_.insert(it->second.table);
    }
  }
  if (auto it = mapping.data_property_map.find("hasTime"); it != mapping.data_property_map.end()) {
    event_tables_.insert(it->second.table);
  }
  obda_ = DataStore(std::move(schema), std::move(mapping));
  native_ = DataStore(native_schema());
}

void MonitoringStores::ingest_static(const Scenario& s) {
  std::vector<Assertion> facts;
  for (const auto& term : s.network.terminals) {
    facts.emplace_back(ClassAssertion{term, "Terminal"});
    facts.emplace_back(DataAssertion{term, "terminalCode", term});
  }
  for (const auto& route : s.network.routes) {
    facts.emplace_back(ClassAssertion{route.id, "Route"});
    for (std::size_t i = 0; i < route.stops.size(); ++i) {
      const std::string stop = route.id + "_S" + std::to_string(i + 1);
      facts.emplace_back(ClassAssertion{stop, "ScheduledStop"});
      facts.emplace_back(ObjectAssertion{route.id, "hasStop", stop});
      facts.emplace_back(ObjectAssertion{stop, "stopsAt", route.stops[i].terminal});
      facts.emplace_back(DataAssertion{stop, "arrivalOffset", std::to_string(route.stops[i].arrival_offset)});
      facts.emplace_back(
          DataAssertion{stop, "departureOffset", std::to_string(route.stops[i].departure_offset)});
    }
    for (int slot = 0; slot < s.network.runs_per_day; ++slot) {
      const std::string train = NetworkFixture::train_id(route, slot);
      facts.emplace_back(ClassAssertion{train, "Train"});
      facts.emplace_back(ObjectAssertion{train, "servesRoute", route.id});
      facts.emplace_back(DataAssertion{train, "carsPerTrain", std::to_string(s.network.cars_per_train)});
    }
  }
  for (const auto& c : s.customers) {
    facts.emplace_back(ClassAssertion{c.id, "Customer"});
    facts.emplace_back(ObjectAssertion{c.id, "basedAt", c.terminal});
    facts.emplace_back(DataAssertion{c.id, "customerName", "Customer " + c.id.substr(4)});
  }
  obda_.ingest(facts);
}

void MonitoringStores::ingest_day(const Scenario& s, int day) {
  std::vector<Assertion> facts;
  std::map<std::string, const Order*> orders;
  for (const auto& o : s.orders) orders[o.id] = &o;
  for (const auto& r : s.requests) {
    if (r.day != day) continue;
    facts.emplace_back(ClassAssertion{r.id, "RequestForWork"});
    facts.emplace_back(ObjectAssertion{r.customer, "issues", r.id});
    facts.emplace_back(DataAssertion{r.id, "requestedUnits", std::to_string(r.orders.size())});
    for (const auto& oid : r.orders) {
      const Order& o = *orders.at(oid);
      facts.emplace_back(ClassAssertion{o.id, "TransportOrder"});
      facts.emplace_back(ObjectAssertion{r.id, "coversOrder", o.id});
      facts.emplace_back(ClassAssertion{o.itu, "ITU"});
      facts.emplace_back(ObjectAssertion{o.id, "shipsITU", o.itu});
      facts.emplace_back(ObjectAssertion{o.id, "hasOrigin", o.origin});
      facts.emplace_back(ObjectAssertion{o.id, "hasDestination", o.destination});
    }
  }
  obda_.ingest(facts);
  const std::int64_t lo = static_cast<std::int64_t>(day - 1) * kDay;
  const std::int64_t hi = static_cast<std::int64_t>(day) * kDay;
  auto first = std::lower_bound(s.events.begin(), s.events.end(), lo,
                                [](const SimEvent& e, std::int64_t t) { return e.t < t; });
  auto last = std::lower_bound(first, s.events.end(), hi,
                               [](const SimEvent& e, std::int64_t t) { return e.t < t; });
  ingest_events(std::span<const SimEvent>(&*first, static_cast<std::size_t>(last - first)));
}

void MonitoringStores::ingest_events(std::span<const SimEvent> events) {
  std::vector<Assertion> facts;
  facts.reserve(events.size() * 5);
  for (const auto& e : events) {
    native_.insert("ils_event", Row{e.id, std::string(to_string(e.kind)), e.t, e.terminal, e.itu, e.train,
                                    e.order});
    for (auto& a : event_assertions(e)) facts.push_back(std::move(a));
  }
  obda_.ingest(facts);
}

std::size_t MonitoringStores::apply_retention(std::int64_t window, std::int64_t now) {
  std::size_t n = native_.apply_retention({window, {"ils_event"}}, now);
  n += obda_.apply_retention({window, event_tables_}, now);
  return n;
}

std::string_view to_string(Path p) {
  switch (p) {
    case Path::Sql: return "sql";
    case Path::Obda: return "obda";
    case Path::Oracle: return "oracle";
  }
  return "sql";
}

Path path_from(std::string_view s) {
  for (auto p : {Path::Sql, Path::Obda, Path::Oracle}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::InvalidParams, "unknown path '" + std::string(s) + "'");
}

std::vector<std::string_view> kpi_names() { return {kUnloadsPerHour, kAvgDwellHours, kTrainsPerDayPerTerminal}; }

namespace {

std::int64_t as_int(const std::string& s) {
  if (s.empty()) return 0;
  return text::parse_iso8601(s);
}

const MonitoringStores& stores_of(const KpiSources& src) {
  if (src.stores == nullptr) throw Error(ErrorCode::InvalidParams, "KPI path needs a populated store");
  return *src.stores;
}

ResultSet obda_answers(const KpiSources& src, std::string_view query) {
  const MonitoringStores& st = stores_of(src);
  return certain_answers(parse_cq(query, st.ontology()), st.ontology(), st.obda());
}

struct DwellSums {
  std::int64_t count = 0;
  std::int64_t gate_in = 0;
  std::int64_t load = 0;
};

double dwell_value(const DwellSums& d) {
  if (d.count == 0) return 0.0;
  return static_cast<double>(d.load - d.gate_in) / static_cast<double>(d.count) / static_cast<double>(kHour);
}

}  // namespace

KPIResult compute_kpi(std::string_view name, Period period, Path path, const KpiSources& src) {
  if (period.end <= period.start) throw Error(ErrorCode::InvalidParams, "KPI period is empty or reversed");
  const std::int64_t lo = period.start;
  const std::int64_t hi = std::min(period.end, src.as_of);
  const std::string slo = std::to_string(lo);
  const std::string shi = std::to_string(hi);
  const std::string sasof = std::to_string(src.as_of);
  KPIResult out{std::string(name), period, 0.0};

  if (name == kUnloadsPerHour) {
    std::int64_t count = 0;
    if (path == Path::Sql) {
      const ResultSet r = stores_of(src).native().execute(
          "SELECT COUNT(*) FROM ils_event e WHERE e.kind = 'Unload' AND e.t >= " + slo + " AND e.t < " + shi);
      count = as_int(r.rows.begin()->front());
    } else if (path == Path::Obda) {
      const ResultSet r = obda_answers(src, "SELECT ?e ?time WHERE { ?e a UnloadEvent . ?e hasTime ?time }");
      std::set<std::string> seen;
      for (const auto& row : r.rows) {
        const std::int64_t t = as_int(row[1]);
        if (t >= lo && t < hi) seen.insert(row[0]);
      }
      count = static_cast<std::int64_t>(seen.size());
    } else {
      for (const auto& e : src.log) {
        if (e.kind == EventKind::Unload && e.t >= lo && e.t < hi) ++count;
      }
    }
    out.value = static_cast<double>(count) / (static_cast<double>(period.end - period.start) / kHour);
    return out;
  }

  if (name == kAvgDwellHours) {
    DwellSums d;
    if (path == Path::Sql) {
      const ResultSet r = stores_of(src).native().execute(
          "SELECT COUNT(*), SUM(g.t), SUM(l.t) FROM ils_event g, ils_event l WHERE g.kind = 'GateIn' AND "
          "l.kind = 'Load' AND l.itu = g.itu AND l.terminal = g.terminal AND g.t >= " +
          slo + " AND g.t < " + shi + " AND l.t < " + sasof);
      const auto& row = *r.rows.begin();
      d = {as_int(row[0]), as_int(row[1]), as_int(row[2])};
    } else if (path == Path::Obda) {
      const ResultSet r = obda_answers(
          src,
          "SELECT ?i ?g ?l WHERE { ?ge a GateInEvent . ?ge concernsITU ?i . ?ge occursAt ?term . "
          "?ge hasTime ?g . ?le loads ?i . ?le occursAt ?term . ?le hasTime ?l }");
      for (const auto& row : r.rows) {
        const std::int64_t g = as_int(row[1]);
        const std::int64_t l = as_int(row[2]);
        if (g < lo || g >= hi || l >= src.as_of) continue;
        ++d.count;
        d.gate_in += g;
        d.load += l;
      }
    } else {
      std::map<std::string, const SimEvent*> gate_in;
      for (const auto& e : src.log) {
        if (e.kind == EventKind::GateIn && e.t >= lo && e.t < hi) gate_in[e.itu] = &e;
      }
      for (const auto& e : src.log) {
        if (e.kind != EventKind::Load || e.t >= src.as_of) continue;
        auto it = gate_in.find(e.itu);
        if (it == gate_in.end() || it->second->terminal != e.terminal) continue;
        ++d.count;
        d.gate_in += it->second->t;
        d.load += e.t;
      }
    }
    out.value = dwell_value(d);
    return out;
  }

  if (name == kTrainsPerDayPerTerminal) {
    std::size_t departures = 0;
    if (path == Path::Sql) {
      departures = stores_of(src)
                       .native()
                       .execute("SELECT DISTINCT e.train, e.terminal, e.t FROM ils_event e WHERE e.kind = "
                                "'Depart' AND e.t >= " + slo + " AND e.t < " + shi)
                       .size();
    } else if (path == Path::Obda) {
      const ResultSet r = obda_answers(src,
                                       "SELECT ?tr ?term ?time WHERE { ?e a DepartEvent . ?e involvesTrain ?tr . "
                                       "?e occursAt ?term . ?e hasTime ?time }");
      std::set<std::vector<std::string>> seen;
      for (const auto& row : r.rows) {
        const std::int64_t t = as_int(row[2]);
        if (t >= lo && t < hi) seen.insert({row[0], row[1], std::to_string(t)});
      }
      departures = seen.size();
    } else {
      std::set<std::tuple<std::string, std::string, std::int64_t>> seen;
      for (const auto& e : src.log) {
        if (e.kind == EventKind::Depart && e.t >= lo && e.t < hi) seen.emplace(e.train, e.terminal, e.t);
      }
      departures = seen.size();
    }
    const double days = static_cast<double>(period.end - period.start) / kDay;
    out.value = static_cast<double>(departures) / days / static_cast<double>(std::max(1, src.terminals));
    return out;
  }

  throw Error(ErrorCode::UnknownKPI, "unknown KPI '" + std::string(name) + "'");
}

BenchmarkReport run_benchmark(const Scenario& s, const BenchmarkParams& params, const Ontology& ils) {
  if (params.repetitions < 1) throw Error(ErrorCode::InvalidParams, "repetitions must be positive");
  if (params.retention_window && *params.retention_window <= 0) {
    throw Error(ErrorCode::InvalidParams, "retention window must be positive");
  }
  using Clock = std::chrono::steady_clock;
  BenchmarkReport report;
  report.mode = params.retention_window ? "retention" : "cumulative";
  report.kpi = params.kpi;

  MonitoringStores stores(ils);
  stores.ingest_static(s);
  for (int day = 1; day <= s.params.days; ++day) {
    stores.ingest_day(s, day);
    const std::int64_t now = static_cast<std::int64_t>(day) * kDay;
    if (params.retention_window) stores.apply_retention(*params.retention_window, now);
    const KpiSources src{&stores, s.events, now, static_cast<int>(s.network.terminals.size())};
    const Period period{now - kDay, now};

    std::optional<double> reference;
    for (Path path : params.paths) {
      std::vector<double> times;
      double value = 0;
      for (int rep = 0; rep < params.repetitions; ++rep) {
        const auto start = Clock::now();
        value = compute_kpi(params.kpi, period, path, src).value;
        times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
      }
      std::sort(times.begin(), times.end());
      const std::size_t n = times.size();
      const double median = n % 2 == 1 ? times[n / 2] : (times[n / 2 - 1] + times[n / 2]) / 2.0;
      report.per_day.push_back({day, path, median, params.repetitions, value});
      if (!reference) {
        reference = value;
      } else if (*reference != value) {
        report.values_agree = false;
      }
    }
  }

  for (Path path : params.paths) {
    std::vector<std::pair<double, double>> series;
    for (const auto& e : report.per_day) {
      if (e.path == path) series.emplace_back(e.day, e.median_ms);
    }
    if (series.size() >= 3) report.trend.emplace_back(path, trend_test(series));
  }
  return report;
}

std::string report_csv(const BenchmarkReport& r) {
  std::string out = "day,path,median_ms,repetitions,value\n";
  char buf[128];
  for (const auto& e : r.per_day) {
    std::snprintf(buf, sizeof buf, ",%.4f,%d,%.10g\n", e.median_ms, e.repetitions, e.value);
    out += std::to_string(e.day) + "," + std::string(to_string(e.path)) + buf;
  }
  return out;
}

std::string trend_summary(const BenchmarkReport& r) {
  std::string out;
  char buf[256];
  for (const auto& [path, t] : r.trend) {
    std::snprintf(buf, sizeof buf, "mode=%s kpi=%s path=%s n=%zu slope_ms_per_day=%.6g p_value=%.4g %s\n",
                  r.mode.c_str(), r.kpi.c_str(), std::string(to_string(path)).c_str(), t.n, t.slope,
                  t.p_value, t.p_value < 0.05 && t.slope > 0 ? "significant-increase" : "no-significant-increase");
    out += buf;
  }
  return out;
}

std::string plot_data(const BenchmarkReport& r) {
  std::string out = "# x y series\n";
  char buf[128];
  for (const auto& e : r.per_day) {
    std::snprintf(buf, sizeof buf, "%d %.4f %s-%s\n", e.day, e.median_ms, std::string(to_string(e.path)).c_str(),
                  r.mode.c_str());
    out += buf;
  }
  return out;
}

}  // namespace ose::ils

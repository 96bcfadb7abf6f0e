#include "ose/ddss.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <filesystem>
#include <json.hpp>

#include "ose/error.hpp"
#include "ose/reasoner.hpp"
#include "ose/text.hpp"

namespace ose::ddss {

using nlohmann::json;

std::string_view to_string(ActorKind k) {
  switch (k) {
    case ActorKind::Source: return "Source";
    case ActorKind::Threshold: return "Threshold";
    case ActorKind::MovingAverage: return "MovingAverage";
    case ActorKind::Comparator: return "Comparator";
    case ActorKind::Debounce: return "Debounce";
    case ActorKind::StateDetector: return "StateDetector";
    case ActorKind::HealthScore: return "HealthScore";
    case ActorKind::Sink: return "Sink";
  }
  return "Source";
}

Stage stage_of(ActorKind k) {
  switch (k) {
    case ActorKind::MovingAverage: return Stage::DataManipulation;
    case ActorKind::Threshold:
    case ActorKind::Comparator:
    case ActorKind::Debounce:
    case ActorKind::StateDetector: return Stage::StateDetection;
    case ActorKind::HealthScore: return Stage::HealthAssessment;
    case ActorKind::Source:
    case ActorKind::Sink: return Stage::None;
  }
  return Stage::None;
}

std::string_view to_string(Direction d) { return d == Direction::In ? "in" : "out"; }

const Actor* DataflowGraph::find(std::string_view id) const {
  for (const auto& a : actors) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

namespace {

constexpr ActorKind kKinds[] = {ActorKind::Source,     ActorKind::Threshold,     ActorKind::MovingAverage,
                                ActorKind::Comparator, ActorKind::Debounce,      ActorKind::StateDetector,
                                ActorKind::HealthScore, ActorKind::Sink};

struct PortSpec {
  std::string_view name;
  bool input;
  PortType type;
};

std::vector<PortSpec> ports_of(ActorKind k) {
  using P = PortType;
  switch (k) {
    case ActorKind::Source: return {{"out", false, P::Scalar}};
    case ActorKind::Threshold:
    case ActorKind::StateDetector: return {{"in", true, P::Scalar}, {"out", false, P::Event}};
    case ActorKind::MovingAverage: return {{"in", true, P::Scalar}, {"out", false, P::Scalar}};
    case ActorKind::Comparator: return {{"a", true, P::Scalar}, {"b", true, P::Scalar}, {"out", false, P::Event}};
    case ActorKind::Debounce: return {{"in", true, P::Event}, {"out", false, P::Event}};
    case ActorKind::HealthScore: return {{"in", true, P::Event}, {"out", false, P::Scalar}};
    case ActorKind::Sink: return {{"in", true, P::Any}};
  }
  return {};
}

std::optional<PortSpec> port_of(ActorKind k, std::string_view name) {
  for (const auto& p : ports_of(k)) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

std::string_view type_name(PortType t) {
  switch (t) {
    case PortType::Scalar: return "scalar";
    case PortType::Event: return "event";
    case PortType::Any: return "any";
  }
  return "any";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::optional<double> to_number(std::string_view s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long> to_count(std::string_view s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) return std::nullopt;
  return v;
}

void check_params(const Actor& a, std::size_t line) {
  auto syntax = [&](const std::string& msg) { return SyntaxError(line, 1, a.id + ": " + msg); };
  const auto& p = a.params;
  auto arity = [&](std::size_t n) {
    if (p.size() != n) throw syntax(std::string(to_string(a.kind)) + " takes " + std::to_string(n) + " parameter(s)");
  };
  switch (a.kind) {
    case ActorKind::Source:
      if (p.empty() || p[0].empty()) throw Error(ErrorCode::UnboundSource, a.id + ": Source binds no DataSource");
      arity(1);
      if (!is_name(p[0])) throw syntax("bad DataSource name '" + p[0] + "'");
      break;
    case ActorKind::Sink:
      if (p.empty() || p[0].empty()) throw Error(ErrorCode::UnboundSink, a.id + ": Sink binds no event class");
      if (p.size() < 2 || p[1].empty()) {
        throw Error(ErrorCode::UnboundSink, a.id + ": Sink binds no diagnostic indicator");
      }
      arity(2);
      if (!is_name(p[0]) || !is_name(p[1])) throw syntax("bad Sink binding");
      break;
    case ActorKind::Threshold:
      arity(1);
      if (!to_number(p[0])) throw syntax("threshold must be a number");
      break;
    case ActorKind::MovingAverage:
    case ActorKind::Debounce:
    case ActorKind::HealthScore:
      arity(1);
      if (!to_count(p[0])) throw syntax("window must be a positive integer");
      break;
    case ActorKind::Comparator:
      arity(1);
      if (p[0] != "gt" && p[0] != "ge" && p[0] != "lt" && p[0] != "le") throw syntax("operator must be gt, ge, lt or le");
      break;
    case ActorKind::StateDetector: {
      arity(2);
      const auto lo = to_number(p[0]);
      const auto hi = to_number(p[1]);
      if (!lo || !hi || *lo > *hi) throw syntax("bounds must be numbers with low <= high");
      break;
    }
  }
}

// Actor indices in dataflow order; throws CycleDetected.
std::vector<std::size_t> topo_order(const DataflowGraph& g) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.actors.size(); ++i) index[g.actors[i].id] = i;
  std::vector<std::vector<std::size_t>> next(g.actors.size());
  std::vector<int> indegree(g.actors.size(), 0);
  for (const auto& e : g.edges) {
    const std::size_t from = index.at(e.from.actor);
    const std::size_t to = index.at(e.to.actor);
    next[from].push_back(to);
    ++indegree[to];
  }
  std::vector<std::size_t> order;
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < g.actors.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop_front();
    order.push_back(i);
    for (std::size_t j : next[i]) {
      if (--indegree[j] == 0) ready.push_back(j);
    }
  }
  if (order.size() != g.actors.size()) {
    std::string members;
    for (std::size_t i = 0; i < g.actors.size(); ++i) {
      if (indegree[i] > 0) members += (members.empty() ? "" : ", ") + g.actors[i].id;
    }
    throw Error(ErrorCode::CycleDetected, "rule graph has a cycle through " + members);
  }
  return order;
}

}  // namespace

DataflowGraph parse_rule_graph(std::string_view text) {
  DataflowGraph g;
  std::vector<std::size_t> edge_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t sp = line.find_first_of(" \t");
    const std::string_view keyword = line.substr(0, sp);
    const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
    if (keyword == "actor") {
      const std::size_t sp2 = rest.find_first_of(" \t");
      if (sp2 == std::string_view::npos) throw SyntaxError(line_no, 1, "expected 'actor <id> <Kind>(...)'");
      Actor a;
      a.id = std::string(rest.substr(0, sp2));
      const std::string_view call = trim(rest.substr(sp2));
      const std::size_t open = call.find('(');
      if (!is_name(a.id)) throw SyntaxError(line_no, 7, "bad actor id '" + a.id + "'");
      if (open == std::string_view::npos || call.back() != ')') {
        throw SyntaxError(line_no, 1, "expected '<Kind>(<params>)' after actor id");
      }
      const std::string_view kind = trim(call.substr(0, open));
      const auto k = std::find_if(std::begin(kKinds), std::end(kKinds),
                                  [&](ActorKind c) { return to_string(c) == kind; });
      if (k == std::end(kKinds)) throw SyntaxError(line_no, 1, "unknown actor kind '" + std::string(kind) + "'");
      a.kind = *k;
      std::string_view params = trim(call.substr(open + 1, call.size() - open - 2));
      while (!params.empty()) {
        const std::size_t comma = params.find(',');
        a.params.emplace_back(trim(params.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        params = params.substr(comma + 1);
        if (trim(params).empty()) throw SyntaxError(line_no, 1, "trailing comma in parameters");
      }
      if (g.find(a.id) != nullptr) throw SyntaxError(line_no, 7, "duplicate actor '" + a.id + "'");
      check_params(a, line_no);
      g.actors.push_back(std::move(a));
    } else if (keyword == "edge") {
      const std::size_t arrow = rest.find("->");
      if (arrow == std::string_view::npos) throw SyntaxError(line_no, 1, "expected 'edge a.out -> b.in'");
      auto endpoint = [&](std::string_view s) {
        s = trim(s);
        const std::size_t dot = s.find('.');
        if (dot == std::string_view::npos || !is_name(s.substr(0, dot)) || !is_name(s.substr(dot + 1))) {
          throw SyntaxError(line_no, 1, "expected '<actor>.<port>', got '" + std::string(s) + "'");
        }
        return Endpoint{std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
      };
      g.edges.push_back({endpoint(rest.substr(0, arrow)), endpoint(rest.substr(arrow + 2))});
      edge_lines.push_back(line_no);
    } else {
      throw SyntaxError(line_no, 1, "expected 'actor' or 'edge', got '" + std::string(keyword) + "'");
    }
  }

  std::set<std::pair<std::string, std::string>> fed;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    const Actor* from = g.find(e.from.actor);
    const Actor* to = g.find(e.to.actor);
    if (from == nullptr) throw SyntaxError(edge_lines[i], 1, "unknown actor '" + e.from.actor + "'");
    if (to == nullptr) throw SyntaxError(edge_lines[i], 1, "unknown actor '" + e.to.actor + "'");
    const auto out = port_of(from->kind, e.from.port);
    const auto in = port_of(to->kind, e.to.port);
    if (!out || out->input) throw SyntaxError(edge_lines[i], 1, e.from.actor + " has no output port '" + e.from.port + "'");
    if (!in || !in->input) throw SyntaxError(edge_lines[i], 1, e.to.actor + " has no input port '" + e.to.port + "'");
    if (!fed.emplace(e.to.actor, e.to.port).second) {
      throw SyntaxError(edge_lines[i], 1, "input " + e.to.actor + "." + e.to.port + " has two producers");
    }
    if (in->type != PortType::Any && in->type != out->type) {
      throw Error(ErrorCode::TypeMismatch, "edge " + e.from.actor + "." + e.from.port + " -> " + e.to.actor + "." +
                                               e.to.port + " connects " + std::string(type_name(out->type)) +
                                               " to " + std::string(type_name(in->type)));
    }
  }
  bool has_sink = false;
  for (const auto& a : g.actors) {
    has_sink = has_sink || a.kind == ActorKind::Sink;
    for (const auto& p : ports_of(a.kind)) {
      if (p.input && !fed.contains({a.id, std::string(p.name)})) {
        throw Error(ErrorCode::UnboundSource, "input " + a.id + "." + std::string(p.name) + " is not connected");
      }
    }
  }
  if (!has_sink) throw Error(ErrorCode::UnboundSink, "rule graph has no Sink");
  topo_order(g);
  return g;
}

std::string print_rule_graph(const DataflowGraph& g) {
  std::string out;
  for (const auto& a : g.actors) {
    out += "actor " + a.id + " " + std::string(to_string(a.kind)) + "(";
    for (std::size_t i = 0; i < a.params.size(); ++i) out += (i ? ", " : "") + a.params[i];
    out += ")\n";
  }
  for (const auto& e : g.edges) {
    out += "edge " + e.from.actor + "." + e.from.port + " -> " + e.to.actor + "." + e.to.port + "\n";
  }
  return out;
}

std::vector<std::string> stage_order_violations(const DataflowGraph& g) {
  const auto order = topo_order(g);
  std::map<std::string, Stage> reached;  // highest stage seen on any path into each actor
  std::vector<std::string> out;
  for (std::size_t i : order) {
    const Actor& a = g.actors[i];
    Stage upstream = Stage::None;
    for (const auto& e : g.edges) {
      if (e.to.actor == a.id) upstream = std::max(upstream, reached[e.from.actor]);
    }
    const Stage own = stage_of(a.kind);
    if (own != Stage::None && own < upstream) {
      out.push_back(a.id + " (" + std::string(to_string(a.kind)) + ") runs after a later processing stage");
    }
    reached[a.id] = std::max(upstream, own);
  }
  return out;
}

std::vector<std::string> leaf_subclasses(const Ontology& o, std::string_view root) {
  const TaxonomyClosure tc(o);
  std::vector<std::string> under;
  for (const auto& c : o.classes) {
    if (tc.subsumes(ClassExpr::named(c), ClassExpr::named(std::string(root)))) under.push_back(c);
  }
  std::vector<std::string> leaves;
  for (const auto& c : under) {
    const bool has_strict_sub = std::any_of(under.begin(), under.end(), [&](const std::string& d) {
      return d != c && tc.subsumes(ClassExpr::named(d), ClassExpr::named(c)) &&
             !tc.subsumes(ClassExpr::named(c), ClassExpr::named(d));
    });
    if (!has_strict_sub) leaves.push_back(c);
  }
  return leaves;
}

namespace {

std::map<std::string, std::set<std::string>> individual_types(const Ontology& o) {
  std::map<std::string, std::set<std::string>> types;
  for (const auto& a : saturate_abox(o).abox) {
    if (const auto* c = std::get_if<ClassAssertion>(&a)) types[c->individual].insert(c->cls);
  }
  return types;
}

bool has_type(const std::map<std::string, std::set<std::string>>& types, const std::string& ind,
              std::string_view cls) {
  const auto it = types.find(ind);
  return it != types.end() && it->second.contains(std::string(cls));
}

SchemaOptions ddss_schema_options() {
  SchemaOptions opt;
  opt.value_types["hasValue"] = ColumnType::Real;
  opt.value_types["hasTimestamp"] = ColumnType::Timestamp;
  return opt;
}

std::string endpoint_text(const std::vector<EndpointDescriptor>& eps) {
  std::string s;
  for (const auto& e : eps) s += std::string(to_string(e.direction)) + " " + e.path + " " + e.event_class + "\n";
  return s;
}

}  // namespace

DDSSBundle generate_ddss(const Ontology& o, const DataflowGraph& graph) {
  for (const char* c : {"DDSS", "IncomingEvent", "OutgoingEvent"}) {
    if (!o.is_class(c)) throw Error(ErrorCode::MissingDynamicPart, std::string("ontology lacks class ") + c);
  }
  for (const char* p : {"receives", "sends"}) {
    if (!o.is_object_property(p)) throw Error(ErrorCode::MissingDynamicPart, std::string("ontology lacks property ") + p);
  }
  const TaxonomyClosure tc(o);
  const auto needs = [&](const ClassExpr& sub, const char* super, const char* what) {
    if (!tc.subsumes(sub, ClassExpr::named(super))) {
      throw Error(ErrorCode::MissingDynamicPart, std::string("ontology does not state that ") + what);
    }
  };
  needs(ClassExpr::exists("receives"), "DDSS", "a DDSS receives events");
  needs(ClassExpr::exists_inverse("receives"), "IncomingEvent", "received events are IncomingEvents");
  needs(ClassExpr::exists("sends"), "DDSS", "a DDSS sends events");
  needs(ClassExpr::exists_inverse("sends"), "OutgoingEvent", "sent events are OutgoingEvents");
  const ProfileReport profile = validate_ql_profile(o);
  if (!profile.conformant) {
    throw Error(ErrorCode::NonQLAxiomEncountered, "ontology is not QL: " + profile.violations.front().message);
  }

  DataflowGraph g = parse_rule_graph(print_rule_graph(graph));
  if (const auto v = stage_order_violations(g); !v.empty()) throw Error(ErrorCode::InvalidParams, v.front());

  const auto types = individual_types(o);
  const auto in_leaves = leaf_subclasses(o, "IncomingEvent");
  const auto out_leaves = leaf_subclasses(o, "OutgoingEvent");
  for (const auto& a : g.actors) {
    if (a.kind == ActorKind::Source && !has_type(types, a.params[0], "DataSource")) {
      throw Error(ErrorCode::UnknownDataSource, a.id + ": '" + a.params[0] + "' is not a DataSource");
    }
    if (a.kind == ActorKind::Sink) {
      if (std::find(out_leaves.begin(), out_leaves.end(), a.params[0]) == out_leaves.end()) {
        throw Error(ErrorCode::UnboundEventClass, a.id + ": '" + a.params[0] + "' is not an OutgoingEvent leaf class");
      }
      if (!has_type(types, a.params[1], "DiagnosticIndicator")) {
        throw Error(ErrorCode::UnboundSink, a.id + ": '" + a.params[1] + "' is not a DiagnosticIndicator");
      }
    }
  }

  DDSSBundle b;
  b.ontology = o;
  b.engine = std::move(g);
  std::tie(b.schema, b.mapping) = generate_schema(o, ddss_schema_options());
  for (const auto& c : in_leaves) b.endpoints.push_back({"/events/" + c, Direction::In, c});
  for (const auto& c : out_leaves) b.endpoints.push_back({"/diagnostics/" + c, Direction::Out, c});
  b.digest = text::fnv1a_hex(b.schema.ddl() + "\n" + endpoint_text(b.endpoints) + "\n" +
                             print_rule_graph(b.engine) + "\n" + print_ontology(b.ontology));
  return b;
}

std::string DDSSBundle::manifest() const {
  json m;
  m["format"] = "ose-ddss-1";
  m["digest"] = digest;
  m["graph_digest"] = text::fnv1a_hex(print_rule_graph(engine));
  m["ontology_digest"] = text::fnv1a_hex(print_ontology(ontology));
  m["schema_ddl"] = schema.ddl();
  json eps = json::array();
  for (const auto& e : endpoints) {
    eps.push_back({{"path", e.path}, {"direction", std::string(to_string(e.direction))}, {"class", e.event_class}});
  }
  m["endpoints"] = eps;
  json actors = json::array();
  for (const auto& a : engine.actors) actors.push_back({{"id", a.id}, {"kind", std::string(to_string(a.kind))}});
  m["actors"] = actors;
  return m.dump(2) + "\n";
}

std::optional<std::string> endpoint_completeness(const DDSSBundle& b) {
  const auto check = [&](Direction d, const std::string& root,
                         const std::string& prefix) -> std::optional<std::string> {
    std::vector<std::string> have;
    for (const auto& e : b.endpoints) {
      if (e.direction != d) continue;
      if (e.path != prefix + e.event_class) return "endpoint " + e.path + " does not match class " + e.event_class;
      have.push_back(e.event_class);
    }
    std::sort(have.begin(), have.end());
    if (std::adjacent_find(have.begin(), have.end()) != have.end()) return root + " has a duplicated endpoint";
    const auto leaves = leaf_subclasses(b.ontology, root);
    for (const auto& c : leaves) {
      if (!std::binary_search(have.begin(), have.end(), c)) return root + " leaf " + c + " has no endpoint";
    }
    for (const auto& c : have) {
      if (std::find(leaves.begin(), leaves.end(), c) == leaves.end()) return "endpoint for non-leaf class " + c;
    }
    return std::nullopt;
  };
  if (auto r = check(Direction::In, "IncomingEvent", "/events/")) return r;
  if (auto r = check(Direction::Out, "OutgoingEvent", "/diagnostics/")) return r;
  for (const auto& a : b.engine.actors) {
    if (a.kind != ActorKind::Sink) continue;
    const bool served = std::any_of(b.endpoints.begin(), b.endpoints.end(), [&](const EndpointDescriptor& e) {
      return e.direction == Direction::Out && e.event_class == a.params[0];
    });
    if (!served) return "sink class " + a.params[0] + " has no out-endpoint";
  }
  return std::nullopt;
}

void write_bundle(const DDSSBundle& b, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path root(dir);
  text::write_file((root / "manifest.json").string(), b.manifest());
  text::write_file((root / "schema.sql").string(), b.schema.ddl());
  text::write_file((root / "ontology.onto").string(), print_ontology(b.ontology));
  text::write_file((root / "rules.graph").string(), print_rule_graph(b.engine));
}

DDSSBundle load_bundle(const std::string& dir) {
  const std::filesystem::path root(dir);
  const std::string manifest = text::read_file((root / "manifest.json").string());
  DDSSBundle b = generate_ddss(parse_ontology(text::read_file((root / "ontology.onto").string())),
                               parse_rule_graph(text::read_file((root / "rules.graph").string())));
  std::string recorded;
  try {
    recorded = json::parse(manifest).at("digest").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParams, "bad manifest in '" + dir + "': " + e.what());
  }
  if (recorded != b.digest) {
    throw Error(ErrorCode::InvalidParams, "bundle digest " + recorded + " does not match regenerated " + b.digest);
  }
  return b;
}

WireEvent parse_wire_event(std::string_view text) {
  WireEvent e;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::MalformedEvent, "event must be a JSON object");
    if (j.contains("class")) e.event_class = j.at("class").get<std::string>();
    const json& t = j.at("t");
    if (t.is_number_integer()) {
      e.t = t.get<std::int64_t>();
    } else if (t.is_string()) {
      e.t = text::parse_iso8601(t.get<std::string>());
    } else {
      throw Error(ErrorCode::MalformedEvent, "'t' must be epoch seconds or an ISO-8601 string");
    }
    if (e.t < 0) throw Error(ErrorCode::MalformedEvent, "'t' must not be negative");
    e.source = j.at("source").get<std::string>();
    const json& v = j.at("value");
    if (v.is_number()) {
      e.value = v.get<double>();
    } else if (v.is_string()) {
      e.text = v.get<std::string>();
    } else {
      throw Error(ErrorCode::MalformedEvent, "'value' must be a number or a string");
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::MalformedEvent, std::string("malformed event: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::MalformedEvent) throw;
    throw Error(ErrorCode::MalformedEvent, std::string("malformed event: ") + ex.what());
  }
  return e;
}

namespace {

json record_json(const EventRecord& r) {
  json j{{"id", r.id},
         {"direction", std::string(to_string(r.direction))},
         {"class", r.event_class},
         {"t", r.t},
         {"time", text::format_iso8601(r.t)},
         {"source", r.source}};
  if (r.value) {
    j["value"] = *r.value;
  } else {
    j["value"] = r.text;
  }
  if (r.direction == Direction::Out) j["indicator"] = r.indicator;
  if (r.degraded) j["degraded"] = true;
  return j;
}

}  // namespace

std::string to_json(const EventRecord& r) { return record_json(r).dump(); }

std::string to_json(const std::vector<EventRecord>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(record_json(r));
  return a.dump();
}

std::optional<std::string> check_outgoing(const std::vector<EventRecord>& records, const Ontology& o) {
  const auto types = individual_types(o);
  const auto out_leaves = leaf_subclasses(o, "OutgoingEvent");
  for (const auto& r : records) {
    if (r.direction != Direction::Out) continue;
    if (std::find(out_leaves.begin(), out_leaves.end(), r.event_class) == out_leaves.end()) {
      return r.id + ": class " + r.event_class + " is not an OutgoingEvent leaf";
    }
    if (!has_type(types, r.source, "DataSource")) return r.id + ": relatesTo '" + r.source + "' is not a DataSource";
    if (!has_type(types, r.indicator, "DiagnosticIndicator")) {
      return r.id + ": reports '" + r.indicator + "' is not a DiagnosticIndicator";
    }
    if (r.t < 0) return r.id + ": missing timestamp";
  }
  return std::nullopt;
}

struct Ddss::Engine {
  struct Token {
    double value = 0;
    bool on = false;
    std::string source;
  };

  struct State {
    std::deque<double> window;
    std::deque<bool> flags;
    std::optional<double> a;
    std::optional<double> b;
    long run = 0;
    bool was_on = false;
  };

  struct Input {
    std::size_t from;
    std::string port;
  };

  explicit Engine(const DataflowGraph& g) : graph(g), order(topo_order(g)), states(g.actors.size()) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.actors.size(); ++i) index[g.actors[i].id] = i;
    inputs.resize(g.actors.size());
    for (const auto& e : g.edges) inputs[index.at(e.to.actor)].push_back({index.at(e.from.actor), e.to.port});
  }

  // Pushes one sample through the graph; returns (sink index, token) pairs.
  std::vector<std::pair<std::size_t, Token>> feed(const std::string& source, double value) {
    std::vector<std::optional<Token>> out(graph.actors.size());
    std::vector<std::pair<std::size_t, Token>> fired;
    for (std::size_t i : order) {
      const Actor& a = graph.actors[i];
      State& st = states[i];
      std::map<std::string, const Token*> in;
      for (const auto& inp : inputs[i]) {
        if (out[inp.from]) in[inp.port] = &*out[inp.from];
      }
      const auto number = [&](std::size_t k) { return *to_number(a.params[k]); };
      switch (a.kind) {
        case ActorKind::Source:
          if (a.params[0] == source) out[i] = Token{value, false, source};
          break;
        case ActorKind::Threshold:
          if (in.contains("in")) out[i] = Token{in["in"]->value, in["in"]->value > number(0), in["in"]->source};
          break;
        case ActorKind::StateDetector:
          if (in.contains("in")) {
            const double v = in["in"]->value;
            out[i] = Token{v, v < number(0) || v > number(1), in["in"]->source};
          }
          break;
        case ActorKind::MovingAverage:
          if (in.contains("in")) {
            const auto w = static_cast<std::size_t>(*to_count(a.params[0]));
            st.window.push_back(in["in"]->value);
            if (st.window.size() > w) st.window.pop_front();
            if (st.window.size() == w) {
              double sum = 0;
              for (double v : st.window) sum += v;
              out[i] = Token{sum / static_cast<double>(w), false, in["in"]->source};
            }
          }
          break;
        case ActorKind::Comparator:
          if (in.contains("a")) st.a = in["a"]->value;
          if (in.contains("b")) st.b = in["b"]->value;
          if (!in.empty() && st.a && st.b) {
            const std::string& op = a.params[0];
            const double x = *st.a;
            const double y = *st.b;
            const bool on = op == "gt" ? x > y : op == "ge" ? x >= y : op == "lt" ? x < y : x <= y;
            out[i] = Token{x, on, in.begin()->second->source};
          }
          break;
        case ActorKind::Debounce:
          if (in.contains("in")) {
            st.run = in["in"]->on ? st.run + 1 : 0;
            out[i] = Token{in["in"]->value, st.run >= *to_count(a.params[0]), in["in"]->source};
          }
          break;
        case ActorKind::HealthScore:
          if (in.contains("in")) {
            const auto w = static_cast<std::size_t>(*to_count(a.params[0]));
            st.flags.push_back(in["in"]->on);
            if (st.flags.size() > w) st.flags.pop_front();
            const auto on = std::count(st.flags.begin(), st.flags.end(), true);
            out[i] = Token{1.0 - static_cast<double>(on) / static_cast<double>(st.flags.size()), false,
                           in["in"]->source};
          }
          break;
        case ActorKind::Sink:
          if (in.contains("in")) {
            const Token& tok = *in["in"];
            const Actor& up = graph.actors[inputs[i].front().from];
            if (ports_of(up.kind).back().type == PortType::Event) {
              if (tok.on && !st.was_on) fired.emplace_back(i, tok);
              st.was_on = tok.on;
            } else {
              fired.emplace_back(i, tok);
            }
          }
          break;
      }
    }
    return fired;
  }

  const DataflowGraph& graph;
  std::vector<std::size_t> order;
  std::vector<State> states;
  std::vector<std::vector<Input>> inputs;
};

Ddss::Ddss(DDSSBundle bundle) : bundle_(std::move(bundle)), store_(bundle_.schema, bundle_.mapping) {
  store_.ingest(bundle_.ontology.abox);
  for (const auto& e : bundle_.endpoints) (e.direction == Direction::In ? in_classes_ : out_classes_).insert(e.event_class);
  const auto types = individual_types(bundle_.ontology);
  std::string first_descriptor;
  for (const auto& [ind, classes] : types) {
    if (classes.contains("DataSource")) sources_.insert(ind);
    if (classes.contains("Descriptor") && first_descriptor.empty()) first_descriptor = ind;
  }
  degraded_indicator_ = types.contains("degradedInput") ? "degradedInput" : first_descriptor;
  if (degraded_indicator_.empty()) {
    for (const auto& [ind, classes] : types) {
      if (classes.contains("DiagnosticIndicator")) {
        degraded_indicator_ = ind;
        break;
      }
    }
  }
  degraded_class_ = out_classes_.contains("DescriptorEvent") ? "DescriptorEvent"
                    : out_classes_.empty()                   ? ""
                                                             : *out_classes_.begin();
  engine_ = std::make_unique<Engine>(bundle_.engine);
}

Ddss::~Ddss() = default;

void Ddss::persist(const EventRecord& r) {
  std::vector<Assertion> facts;
  facts.emplace_back(ClassAssertion{r.id, r.event_class});
  facts.emplace_back(DataAssertion{r.id, "hasTimestamp", std::to_string(r.t)});
  if (r.direction == Direction::In) {
    facts.emplace_back(ObjectAssertion{r.source, "generates", r.id});
    if (r.value) facts.emplace_back(DataAssertion{r.id, "hasValue", render(*r.value)});
  } else {
    facts.emplace_back(ObjectAssertion{r.id, "relatesTo", r.source});
    facts.emplace_back(ObjectAssertion{r.id, "reports", r.indicator});
  }
  store_.ingest(facts);
}

EventRecord Ddss::ingest_event(const WireEvent& e) {
  if (!in_classes_.contains(e.event_class)) {
    throw Error(ErrorCode::UnknownEventClass, "'" + e.event_class + "' has no in-endpoint");
  }
  if (!sources_.contains(e.source)) throw Error(ErrorCode::UnknownDataSource, "'" + e.source + "' is not a DataSource");
  EventRecord r;
  {
    std::lock_guard lock(queue_mutex_);
    auto [it, fresh] = last_t_.try_emplace(e.source, e.t);
    if (!fresh) {
      if (e.t < it->second) {
        throw Error(ErrorCode::NonMonotoneTimestamp, "source " + e.source + " went back from " +
                                                         std::to_string(it->second) + " to " + std::to_string(e.t));
      }
      it->second = e.t;
    }
    r = EventRecord{"in" + std::to_string(next_in_++), Direction::In, e.event_class, e.t, e.source, e.value, e.text,
                    "", false};
    queue_.push_back(r);
  }
  persist(r);
  return r;
}

std::size_t Ddss::queued() const {
  std::lock_guard lock(queue_mutex_);
  return queue_.size();
}

std::vector<EventRecord> Ddss::step_engine() {
  std::lock_guard engine_lock(engine_mutex_);
  std::vector<EventRecord> batch;
  {
    std::lock_guard lock(queue_mutex_);
    batch.swap(queue_);
  }
  std::stable_sort(batch.begin(), batch.end(), [](const EventRecord& a, const EventRecord& b) { return a.t < b.t; });
  std::vector<EventRecord> emitted;
  for (const auto& r : batch) {
    if (!r.value || !std::isfinite(*r.value)) {
      if (degraded_class_.empty() || degraded_indicator_.empty()) continue;
      emitted.push_back({"out" + std::to_string(next_out_++), Direction::Out, degraded_class_, r.t, r.source, r.value,
                         r.text, degraded_indicator_, true});
      continue;
    }
    for (const auto& [sink, tok] : engine_->feed(r.source, *r.value)) {
      const Actor& a = bundle_.engine.actors[sink];
      emitted.push_back({"out" + std::to_string(next_out_++), Direction::Out, a.params[0], r.t, tok.source, tok.value,
                         "", a.params[1], false});
    }
  }
  for (const auto& o : emitted) {
    persist(o);
    outbox_[o.event_class].push_back(o);
  }
  return emitted;
}

std::vector<EventRecord> Ddss::diagnostics(std::string_view event_class, std::int64_t since) const {
  std::lock_guard lock(engine_mutex_);
  if (!out_classes_.contains(std::string(event_class))) {
    throw Error(ErrorCode::UnknownEventClass, "'" + std::string(event_class) + "' has no out-endpoint");
  }
  std::vector<EventRecord> out;
  if (const auto it = outbox_.find(std::string(event_class)); it != outbox_.end()) {
    for (const auto& r : it->second) {
      if (r.t > since) out.push_back(r);
    }
  }
  return out;
}

}  // namespace ose::ddss

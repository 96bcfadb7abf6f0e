#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ose/datastore.hpp"
#include "ose/ontology.hpp"

namespace ose::ddss {

enum class ActorKind {
  Source,
  Threshold,
  MovingAverage,
  Comparator,
  Debounce,
  StateDetector,
  HealthScore,
  Sink,
};

std::string_view to_string(ActorKind k);

/// Scalar ports carry sample values; event ports carry an on/off state with
/// the value that produced it. A Sink input accepts either.
enum class PortType { Scalar, Event, Any };

/// Processing stages in the order a Source-to-Sink path must respect.
enum class Stage { None, DataManipulation, StateDetection, HealthAssessment };

Stage stage_of(ActorKind k);

struct Actor {
  std::string id;
  ActorKind kind = ActorKind::Source;
  std::vector<std::string> params;
  bool operator==(const Actor&) const = default;
};

struct Endpoint {
  std::string actor;
  std::string port;
  bool operator==(const Endpoint&) const = default;
};

struct Edge {
  Endpoint from;
  Endpoint to;
  bool operator==(const Edge&) const = default;
};

struct DataflowGraph {
  std::vector<Actor> actors;
  std::vector<Edge> edges;

  const Actor* find(std::string_view id) const;
  bool operator==(const DataflowGraph&) const = default;
};

/// Grammar, one statement per line, `#` comments:
///
///     actor <id> <Kind>(<param>, ...)
///     edge <id>.<port> -> <id>.<port>
///
/// Ports: Source.out; Threshold, MovingAverage, Debounce, StateDetector and
/// HealthScore have `in` and `out`; Comparator has `a`, `b` and `out`;
/// Sink has `in`. Parameters:
///
///     Source(<DataSource individual>)
///     Threshold(<limit>)               on while value > limit
///     MovingAverage(<window>)          mean of the last `window` values
///     Comparator(gt|ge|lt|le)          on while a <op> b
///     Debounce(<n>)                    on after n consecutive on inputs
///     StateDetector(<low>, <high>)     on while value lies outside [low, high]
///     HealthScore(<window>)            1 - share of on inputs in the window
///     Sink(<OutgoingEvent class>, <DiagnosticIndicator individual>)
///
/// Throws SyntaxError, or Error with TypeMismatch, CycleDetected,
/// UnboundSource (unconnected input) or UnboundSink (no sink, or a sink
/// without its class binding).
DataflowGraph parse_rule_graph(std::string_view text);

/// Canonical text; parse_rule_graph(print_rule_graph(g)) == g.
std::string print_rule_graph(const DataflowGraph& g);

/// Source-to-Sink paths whose stages go backwards, one message each.
std::vector<std::string> stage_order_violations(const DataflowGraph& g);

enum class Direction { In, Out };
std::string_view to_string(Direction d);

struct EndpointDescriptor {
  std::string path;  // /events/<class> or /diagnostics/<class>
  Direction direction = Direction::In;
  std::string event_class;
  bool operator==(const EndpointDescriptor&) const = default;
};

struct DDSSBundle {
  Ontology ontology;
  DataflowGraph engine;
  RelationalSchema schema;
  Mapping mapping;
  std::vector<EndpointDescriptor> endpoints;
  std::string digest;  // over schema DDL, endpoints, graph and ontology text

  /// JSON manifest listing the schema DDL, endpoints and digests.
  std::string manifest() const;
  bool operator==(const DDSSBundle&) const = default;
};

/// Leaf classes under `root` (the root itself when it has no subclasses).
std::vector<std::string> leaf_subclasses(const Ontology& o, std::string_view root);

/// Throws Error with MissingDynamicPart, NonQLAxiomEncountered,
/// UnboundEventClass (a Sink class that is not an OutgoingEvent leaf),
/// UnknownDataSource (a Source bound to a non-DataSource), UnboundSink (a
/// Sink indicator that is not a DiagnosticIndicator) or InvalidParams (a
/// stage-order violation).
DDSSBundle generate_ddss(const Ontology& o, const DataflowGraph& g);

/// Describes the first mismatch between the endpoints and the event
/// subclass partition of the bundle's ontology, or nothing.
std::optional<std::string> endpoint_completeness(const DDSSBundle& b);

/// Writes manifest.json, schema.sql, ontology.onto and rules.graph.
void write_bundle(const DDSSBundle& b, const std::string& dir);
/// Regenerates from the bundle's ontology and rules and checks the digest.
DDSSBundle load_bundle(const std::string& dir);

/// Incoming wire event: `{"class": ..., "t": ..., "source": ..., "value": ...}`
/// with `t` in epoch seconds or ISO-8601 and `value` a number or string.
struct WireEvent {
  std::string event_class;
  std::int64_t t = 0;
  std::string source;
  std::optional<double> value;
  std::string text;  // set when value is a string
};

/// Throws Error(MalformedEvent).
WireEvent parse_wire_event(std::string_view json);

struct EventRecord {
  std::string id;
  Direction direction = Direction::In;
  std::string event_class;
  std::int64_t t = 0;
  std::string source;
  std::optional<double> value;
  std::string text;
  std::string indicator;  // outgoing only
  bool degraded = false;
  bool operator==(const EventRecord&) const = default;
};

std::string to_json(const EventRecord& r);
std::string to_json(const std::vector<EventRecord>& rs);

/// Every outgoing record relates to a declared DataSource, reports a
/// declared DiagnosticIndicator and carries a timestamp. Returns the first
/// violation.
std::optional<std::string> check_outgoing(const std::vector<EventRecord>& records, const Ontology& o);

/// Running service. ingest may be called from several threads; step and
/// the diagnostics readers serialize on the engine lock.
class Ddss {
 public:
  explicit Ddss(DDSSBundle bundle);
  ~Ddss();

  const DDSSBundle& bundle() const { return bundle_; }
  const DataStore& store() const { return store_; }

  /// Throws Error with UnknownEventClass, UnknownDataSource or
  /// NonMonotoneTimestamp.
  EventRecord ingest_event(const WireEvent& e);
  /// Drains the queue in timestamp order and returns the emitted records.
  std::vector<EventRecord> step_engine();
  /// Outgoing records of `event_class` with t > since.
  std::vector<EventRecord> diagnostics(std::string_view event_class, std::int64_t since) const;
  std::size_t queued() const;

 private:
  struct Engine;

  void persist(const EventRecord& r);

  DDSSBundle bundle_;
  DataStore store_;
  std::set<std::string> in_classes_;
  std::set<std::string> out_classes_;
  std::set<std::string> sources_;
  std::string degraded_class_;
  std::string degraded_indicator_;

  mutable std::mutex queue_mutex_;
  std::vector<EventRecord> queue_;
  std::map<std::string, std::int64_t> last_t_;
  std::size_t next_in_ = 0;

  mutable std::mutex engine_mutex_;
  std::unique_ptr<Engine> engine_;
  std::map<std::string, std::vector<EventRecord>> outbox_;
  std::size_t next_out_ = 0;
};

}  // namespace ose::ddss

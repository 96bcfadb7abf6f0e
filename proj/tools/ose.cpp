#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ose/condition_analyzer.hpp"
#include "ose/datastore.hpp"
#include "ose/ddss.hpp"
#include "ose/error.hpp"
#include "ose/fixtures.hpp"
#include "ose/ils.hpp"
#include "ose/ontology.hpp"
#include "ose/query.hpp"
#include "ose/rewrite.hpp"
#include "ose/text.hpp"
#include "serve.hpp"

namespace {

using namespace ose;

// Query arguments may name a file holding the query text.
std::string query_text(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) return text::read_file(arg);
  return arg;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    text::write_file(out_path, content);
    std::cout << out_path << "\n";
  }
}

std::string result_csv(const ResultSet& r) {
  std::string out;
  for (const auto& row : r.rows) out += text::join_csv(row) + "\n";
  return out;
}

int cmd_validate(const std::string& path) {
  const Ontology o = load_ontology_file(path);
  const ProfileReport r = validate_ql_profile(o);
  std::cout << (r.conformant ? "conformant" : "non-conformant") << "\n";
  for (const auto& v : r.violations) {
    std::cout << "axiom " << v.axiom_index << " " << v.code << " " << v.message << "\n";
  }
  return 0;
}

int cmd_rewrite(const std::string& onto, const std::string& query) {
  const Ontology o = load_ontology_file(onto);
  const ConjunctiveQuery q = parse_cq(query_text(query), o);
  const UnionOfCQs u = perfect_rewrite(q, o);
  const auto [schema, mapping] = generate_schema(o);
  std::cout << "UCQ (" << u.disjuncts.size() << " disjuncts)\n";
  for (const auto& cq : u.disjuncts) std::cout << "  " << to_string(cq) << "\n";
  std::cout << "SQL\n  " << compile_to_sql(u, mapping).text << "\n";
  return 0;
}

int cmd_query(const std::string& onto, const std::string& data, const std::string& query, bool chase,
              const std::string& out) {
  const Ontology base = load_ontology_file(onto);
  const Ontology full = parse_ontology(text::read_file(data), base);
  const ConjunctiveQuery q = parse_cq(query_text(query), full);
  auto [schema, mapping] = generate_schema(full);
  DataStore store(std::move(schema), std::move(mapping));
  store.ingest(full.abox);
  const ResultSet answers = certain_answers(q, full, store);
  if (chase && answers != chase_oracle(q, full)) {
    throw Error(ErrorCode::InvalidParams, "rewriting and chase disagree");
  }
  emit(out, result_csv(answers));
  return 0;
}

int cmd_ca_gen(std::size_t faults, std::size_t rounds, std::uint64_t seed, const std::string& out) {
  ca::ScenarioParams p;
  p.faults = faults;
  p.rounds = rounds;
  p.seed = seed;
  std::ostringstream csv;
  ca::write_scenario_csv(ca::generate_scenario(p), csv);
  emit(out, csv.str());
  return 0;
}

int cmd_ca_run(const std::string& path, const std::string& strategy_name, std::optional<std::size_t> cap,
               const std::string& out) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  const ca::Scenario s = ca::read_scenario_csv(in, std::filesystem::path(path).stem().string());
  const ca::Strategy strategy = strategy_name == "eager" ? ca::Strategy::Eager : ca::Strategy::Lazy;
  std::string csv = ca::metrics_csv_header() + "\n";
  try {
    const ca::RunResult r = ca::run_scenario(s, strategy, ca::RunOptions{cap});
    csv += ca::metrics_csv_row(r.metrics) + "\n";
  } catch (const CapExceeded& e) {
    std::cerr << e.what() << "\n";
    csv += ca::out_of_memory_csv_row(strategy, s.name) + "\n";
  }
  emit(out, csv);
  return 0;
}

ils::ScenarioParams sim_params(int itus, int days, int terminals, std::uint64_t seed) {
  ils::ScenarioParams p;
  p.itus_per_terminal_day = itus;
  p.days = days;
  p.terminals = terminals;
  p.seed = seed;
  return p;
}

int cmd_sim_gen(const ils::ScenarioParams& p, const std::string& out) {
  const ils::Scenario s = ils::generate_scenario(p);
  if (const auto bad = ils::check_itineraries(s.events)) throw Error(ErrorCode::InvalidParams, *bad);
  std::ostringstream csv;
  ils::write_event_log(s.events, csv);
  emit(out, csv.str());
  return 0;
}

int cmd_bench(const ils::ScenarioParams& p, const std::string& kpi, int reps, double retention_hours,
              bool oracle, const std::string& out_dir) {
  const ils::Scenario s = ils::generate_scenario(p);
  const Ontology o = parse_ontology(fixtures::ils_ontology());
  ils::BenchmarkParams bp;
  bp.kpi = kpi;
  bp.repetitions = reps;
  if (oracle) bp.paths.push_back(ils::Path::Oracle);
  if (retention_hours > 0) bp.retention_window = static_cast<std::int64_t>(retention_hours * ils::kHour);
  const ils::BenchmarkReport r = ils::run_benchmark(s, bp, o);
  const std::string csv = ils::report_csv(r);
  const std::string trend = ils::trend_summary(r) + (r.values_agree ? "values agree\n" : "values DISAGREE\n");
  if (out_dir.empty()) {
    std::cout << csv << trend;
  } else {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    text::write_file((dir / ("bench_" + r.mode + ".csv")).string(), csv);
    text::write_file((dir / ("trend_" + r.mode + ".txt")).string(), trend);
    text::write_file((dir / ("plot_" + r.mode + ".dat")).string(), ils::plot_data(r));
    std::cout << trend;
  }
  return r.values_agree ? 0 : 1;
}

int cmd_ddss_gen(const std::string& onto, const std::string& rules, const std::string& out_dir) {
  const ddss::DDSSBundle b =
      ddss::generate_ddss(load_ontology_file(onto), ddss::parse_rule_graph(text::read_file(rules)));
  if (const auto gap = ddss::endpoint_completeness(b)) throw Error(ErrorCode::InvalidParams, *gap);
  ddss::write_bundle(b, out_dir);
  std::cout << "digest " << b.digest << "\n";
  for (const auto& e : b.endpoints) std::cout << to_string(e.direction) << " " << e.path << "\n";
  return 0;
}

int cmd_ddss_serve(const std::string& bundle, const std::string& host, int port) {
  ddss::Ddss service(ddss::load_bundle(bundle));
  tools::serve(service, host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology-driven monitoring toolkit: QL reasoning, rewriting, condition analysis, "
               "terminal simulation and diagnostic service generation"};
  app.require_subcommand(1);
  std::string format = "csv";
  app.add_option("--format", format, "Output format for tabular results")
      ->check(CLI::IsMember({"csv"}));

  std::string onto, data, query, out, scenario, strategy = "lazy", kpi(ils::kUnloadsPerHour), rules, bundle;
  std::string host = "127.0.0.1";
  std::uint64_t seed = 1;
  std::size_t faults = 0, rounds = 3600;
  std::optional<std::size_t> cap;
  int itus = 45, days = 1, terminals = 5, reps = 5, port = 8080;
  double retention_hours = 0;
  bool chase = false, oracle = false;

  auto* validate = app.add_subcommand("validate", "Report QL profile conformance of an ontology");
  validate->add_option("onto", onto, "Ontology file")->required();

  auto* rewrite = app.add_subcommand("rewrite", "Print the UCQ rewriting of a query and its SQL");
  rewrite->add_option("onto", onto, "Ontology file")->required();
  rewrite->add_option("query", query, "Query text or file")->required();

  auto* q = app.add_subcommand("query", "Certain answers of a query over an ontology and data");
  q->add_option("onto", onto, "Ontology file")->required();
  q->add_option("data", data, "Assertions in ontology syntax")->required();
  q->add_option("query", query, "Query text or file")->required();
  q->add_flag("--chase", chase, "Cross-check the answers against the chase");
  q->add_option("--out", out, "Write the answers to this file");

  auto* ca_gen = app.add_subcommand("ca-gen", "Generate a condition-analyzer scenario CSV");
  ca_gen->add_option("--faults", faults, "Injected faults (0..24)");
  ca_gen->add_option("--rounds", rounds, "Samples per variable");
  ca_gen->add_option("--seed", seed, "Random seed");
  ca_gen->add_option("--out", out, "Output file");

  auto* ca_run = app.add_subcommand("ca-run", "Run the condition analyzer over a scenario");
  ca_run->add_option("scenario", scenario, "Scenario CSV")->required();
  ca_run->add_option("--strategy", strategy, "lazy or eager")->check(CLI::IsMember({"lazy", "eager"}));
  ca_run->add_option("--cap", cap, "Live-individual limit");
  ca_run->add_option("--out", out, "Output file");

  auto* sim_gen = app.add_subcommand("sim-gen", "Simulate the terminal network and write the event log");
  sim_gen->add_option("--itus", itus, "ITUs per terminal per day (10..50)");
  sim_gen->add_option("--days", days, "Simulated days (1..15)");
  sim_gen->add_option("--terminals", terminals, "Terminals on the line");
  sim_gen->add_option("--seed", seed, "Random seed");
  sim_gen->add_option("--out", out, "Output file");

  auto* bench = app.add_subcommand("bench", "Benchmark KPI latency per day on the sql and obda paths");
  bench->add_option("--itus", itus, "ITUs per terminal per day (10..50)");
  bench->add_option("--days", days, "Simulated days (1..15)");
  bench->add_option("--terminals", terminals, "Terminals on the line");
  bench->add_option("--seed", seed, "Random seed");
  bench->add_option("--kpi", kpi, "KPI name")->check(CLI::IsMember({std::string(ils::kUnloadsPerHour),
                                                                     std::string(ils::kAvgDwellHours),
                                                                     std::string(ils::kTrainsPerDayPerTerminal)}));
  bench->add_option("--reps", reps, "Repetitions per day and path");
  bench->add_option("--retention-hours", retention_hours, "Retention window; cumulative when 0");
  bench->add_flag("--oracle", oracle, "Also time the log-scan oracle");
  bench->add_option("--out", out, "Directory for CSV, trend and plot files");

  auto* ddss_gen = app.add_subcommand("ddss-gen", "Generate a diagnostic service bundle");
  ddss_gen->add_option("onto", onto, "Ontology file")->required();
  ddss_gen->add_option("rules", rules, "Rule graph file")->required();
  ddss_gen->add_option("--out", out, "Bundle directory")->required();

  auto* ddss_serve = app.add_subcommand("ddss-serve", "Serve a generated bundle over HTTP");
  ddss_serve->add_option("bundle", bundle, "Bundle directory")->required();
  ddss_serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  ddss_serve->add_option("--host", host, "Listen address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(onto);
    if (*rewrite) return cmd_rewrite(onto, query);
    if (*q) return cmd_query(onto, data, query, chase, out);
    if (*ca_gen) return cmd_ca_gen(faults, rounds, seed, out);
    if (*ca_run) return cmd_ca_run(scenario, strategy, cap, out);
    if (*sim_gen) return cmd_sim_gen(sim_params(itus, days, terminals, seed), out);
    if (*bench) return cmd_bench(sim_params(itus, days, terminals, seed), kpi, reps, retention_hours, oracle, out);
    if (*ddss_gen) return cmd_ddss_gen(onto, rules, out);
    if (*ddss_serve) return cmd_ddss_serve(bundle, host, port);
  } catch (const ose::Error& e) {
    std::cerr << "error [" << ose::to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

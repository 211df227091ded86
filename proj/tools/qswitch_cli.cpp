// qswitch: generate and validate topologies, run simulations and sweeps,
// dump BSA tables, summarize recorded event logs.
//
// Exit codes: 0 success, 1 invalid input, 2 simulation assertion failure,
// 64 usage error. Relative output paths resolve against $QSWITCH_OUT_DIR
// when it is set.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qswitch/analytics.hpp"
#include "qswitch/config.hpp"
#include "qswitch/engine.hpp"
#include "qswitch/topology.hpp"

namespace fs = std::filesystem;
using namespace qswitch;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitUsage = 64;

struct TopoOptions {
  std::string topo = "sphd20";
  std::optional<unsigned> g, p, b, k, n;

  void attach(CLI::App* app) {
    app->add_option("--topo", topo, "sphd20, dphd42, qfly, or a topology file");
    app->add_option("--g", g, "groups (qfly)");
    app->add_option("--p", p, "end nodes per group (qfly)");
    app->add_option("--b", b, "BSAs per group (qfly)");
    app->add_option("--k", k, "switch radix (qfly, informational)");
    app->add_option("--n", n, "total end nodes (qfly)");
  }

  bool is_qfly() const { return topo == "sphd20" || topo == "dphd42" || topo == "qfly"; }

  QFlyParams params() const {
    QFlyParams q = topo == "dphd42" ? QFlyParams::dphd42() : topo == "sphd20" ? QFlyParams::sphd20() : QFlyParams{};
    if (g) q.g = *g;
    if (p) q.p = *p;
    if (b) q.b = *b;
    if (k) q.k = *k;
    if (n) q.n_override = *n;
    return q;
  }

  std::variant<QFlyParams, Topology> source() const {
    if (is_qfly()) return params();
    return load_topology_file(topo);
  }

  Topology build() const {
    if (is_qfly()) {
      for (const auto& w : qfly_warnings(params())) std::cerr << "warning: " << w << "\n";
      return generate_qfly(params());
    }
    return load_topology_file(topo);
  }
};

std::string out_path(const std::string& path) {
  if (path.empty() || path == "-") return path;
  const char* dir = std::getenv("QSWITCH_OUT_DIR");
  if (!dir || !*dir || fs::path(path).is_absolute()) return path;
  fs::create_directories(dir);
  return (fs::path(dir) / path).string();
}

void write_file(const std::string& path, const std::string& content) {
  const auto target = out_path(path);
  std::ofstream out(target, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + target);
  out << content;
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size() || !(v > 0)) throw std::invalid_argument("bad lambda '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("no lambdas given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed BSA switching protocol simulator"};
  app.require_subcommand(1);

  // gen-topo
  auto* gen = app.add_subcommand("gen-topo", "Generate a Q-Fly topology file");
  TopoOptions gen_topo;
  gen_topo.topo = "qfly";
  gen_topo.attach(gen);
  std::string gen_file;
  gen->add_option("--file", gen_file, "output path (stdout when omitted)");

  // validate
  auto* val = app.add_subcommand("validate", "Check a topology file");
  std::string val_file;
  val->add_option("file", val_file, "topology file")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  TopoOptions run_topo;
  run_topo.attach(run_cmd);
  std::string config_file, run_out, run_log, policy, addressed;
  double lambda = 100;
  std::uint64_t seed = 1;
  SimTime horizon = 10'000, grace = 50'000, hold = 10;
  run_cmd->add_option("--config", config_file, "key = value config file; flags override it");
  auto* o_lambda = run_cmd->add_option("--lambda", lambda, "mean request inter-arrival time");
  auto* o_seed = run_cmd->add_option("--seed", seed, "RNG seed");
  auto* o_horizon = run_cmd->add_option("--horizon", horizon, "last request time");
  auto* o_grace = run_cmd->add_option("--grace", grace, "post-horizon drain in steps");
  auto* o_hold = run_cmd->add_option("--session-hold", hold, "steps an active circuit is held");
  auto* o_policy = run_cmd->add_option("--reject-policy", policy, "next_candidate or queue");
  auto* o_addr = run_cmd->add_option("--addressed", addressed, "direct or routed end-to-end delivery");
  auto* o_topo = run_cmd->get_option("--topo");
  run_cmd->add_option("--out", run_out, "summary JSON path");
  run_cmd->add_option("--log", run_log, "JSON-lines event log path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a lambda x seed grid over topologies");
  std::string lambdas_text = "75,100,150", topos_text = "sphd20,dphd42", csv_file;
  unsigned seeds = 5, threads = 0;
  SimTime sweep_horizon = 10'000, sweep_grace = 50'000, sweep_hold = 10;
  std::string sweep_policy;
  sweep_cmd->add_option("--lambdas", lambdas_text, "comma separated lambdas");
  sweep_cmd->add_option("--seeds", seeds, "seeds 1..N per cell");
  sweep_cmd->add_option("--topos", topos_text, "comma separated presets");
  sweep_cmd->add_option("--horizon", sweep_horizon, "last request time");
  sweep_cmd->add_option("--grace", sweep_grace, "post-horizon drain in steps");
  sweep_cmd->add_option("--session-hold", sweep_hold, "steps an active circuit is held");
  sweep_cmd->add_option("--reject-policy", sweep_policy, "next_candidate or queue");
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  sweep_cmd->add_option("--csv", csv_file, "CSV output path (stdout when omitted)");

  // tables
  auto* tables = app.add_subcommand("tables", "Run discovery and dump BSA tables");
  TopoOptions tables_topo;
  tables_topo.attach(tables);
  std::optional<unsigned> tables_node;
  tables->add_option("--node", tables_node, "only this node");

  // replay
  auto* replay = app.add_subcommand("replay", "Summarize a recorded JSON-lines event log");
  std::string replay_file, replay_out;
  replay->add_option("file", replay_file, "event log")->required();
  replay->add_option("--out", replay_out, "summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      const auto text = serialize_topology(gen_topo.build());
      if (gen_file.empty()) {
        std::cout << text;
      } else {
        write_file(gen_file, text);
      }
      return 0;
    }

    if (*val) {
      Topology t = load_topology_file(val_file);
      for (const auto& w : t.warnings()) std::cout << "warning: " << w << "\n";
      std::cout << val_file << ": ok (" << t.nodes().size() << " nodes, " << t.channels().size()
                << " channels)\n";
      return 0;
    }

    if (*run_cmd) {
      SimConfig cfg = config_file.empty() ? SimConfig{} : load_config_file(config_file);
      if (config_file.empty() || o_topo->count()) cfg.topology = run_topo.source();
      if (config_file.empty() || o_lambda->count()) cfg.lambda = lambda;
      if (config_file.empty() || o_seed->count()) cfg.seed = seed;
      if (config_file.empty() || o_horizon->count()) cfg.horizon = horizon;
      if (config_file.empty() || o_grace->count()) cfg.grace = grace;
      if (config_file.empty() || o_hold->count()) cfg.protocol.session_hold = hold;
      if (o_policy->count()) cfg.protocol.reject_policy = reject_policy_from_string(policy);
      if (o_addr->count()) cfg.addressed = addressed_delivery_from_string(addressed);
      cfg.log_messages = !run_log.empty();

      RunResult r = run(cfg);
      RunSummary s = summarize(r.log);
      std::cout << r.topology_name << " (" << r.node_count << " nodes, " << r.channel_count
                << " channels), lambda " << cfg.lambda << ", seed " << cfg.seed << "\n"
                << "discovery messages  " << r.discovery_messages << "\n"
                << format_summary(s);
      if (!run_out.empty()) write_file(run_out, to_json(s) + "\n");
      if (!run_log.empty()) write_file(run_log, r.log.to_jsonl());
      return s.unresolved ? kExitAssertion : 0;
    }

    if (*sweep_cmd) {
      std::vector<SimConfig> configs;
      std::stringstream topos(topos_text);
      std::string name;
      const auto lambdas = parse_lambdas(lambdas_text);
      while (std::getline(topos, name, ',')) {
        if (name != "sphd20" && name != "dphd42") throw std::invalid_argument("unknown preset '" + name + "'");
        for (double l : lambdas) {
          for (unsigned sd = 1; sd <= seeds; ++sd) {
            SimConfig c;
            c.topology = name == "dphd42" ? QFlyParams::dphd42() : QFlyParams::sphd20();
            c.lambda = l;
            c.seed = sd;
            c.horizon = sweep_horizon;
            c.grace = sweep_grace;
            c.protocol.session_hold = sweep_hold;
            if (!sweep_policy.empty()) c.protocol.reject_policy = reject_policy_from_string(sweep_policy);
            c.log_messages = false;
            configs.push_back(c);
          }
        }
      }
      const auto rows = sweep(configs, threads);
      std::ostringstream csv;
      write_csv(csv, rows);
      if (csv_file.empty()) {
        std::cout << csv.str();
      } else {
        write_file(csv_file, csv.str());
        std::cout << rows.size() << " rows written to " << out_path(csv_file) << "\n";
      }
      bool failed = false;
      for (const auto& row : rows) {
        if (!row.error.empty()) {
          std::cerr << row.topology << " lambda=" << row.lambda << " seed=" << row.seed << ": "
                    << row.error << "\n";
          failed = true;
        }
      }
      return failed ? kExitAssertion : 0;
    }

    if (*tables) {
      Topology t = tables_topo.build();
      t.validate();
      EngineOptions opts;
      opts.log_messages = false;
      Engine engine(t, opts);
      engine.run_discovery();
      for (NodeId id : engine.node_ids()) {
        if (tables_node && id.value != *tables_node) continue;
        const Node& n = engine.node(id);
        if (n.kind() == NodeKind::Bsa) continue;
        std::cout << "# node " << id.value << " (" << to_string(n.kind()) << ")\n"
                  << dump_bsa_table(n.bsa_table());
      }
      return 0;
    }

    if (*replay) {
      std::ifstream in(replay_file);
      if (!in) throw std::invalid_argument("cannot open " + replay_file);
      RunSummary s = summarize(EventLog::read_jsonl(in));
      std::cout << format_summary(s);
      if (!replay_out.empty()) write_file(replay_out, to_json(s) + "\n");
      return 0;
    }
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failure: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const DeadlockDetected& e) {
    std::cerr << "deadlock: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const PastEvent& e) {
    std::cerr << "causality violation: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const WrongBsa& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}

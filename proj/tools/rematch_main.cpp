#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rematch/events.hpp"
#include "rematch/harness.hpp"
#include "rematch/metric_io.hpp"

using namespace rematch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheck = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("REMATCH_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("REMATCH_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

struct GenOptions {
  std::size_t n = 64;
  std::size_t k = 64;
  unsigned gen_d = 3;
  std::size_t events = 200;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--n", n, "Servers, points or star leaves, depending on the generator")->capture_default_str();
    cmd->add_option("--k", k, "Clients (or initial servers for random-dynamic)")->capture_default_str();
    cmd->add_option("--gen-d", gen_d, "Odd base for batchperm-tight")->capture_default_str();
    cmd->add_option("--num-events", events, "Stream length for random-dynamic")->capture_default_str();
    cmd->add_option("--seed", seed, "Generator and tree seed (default: $REMATCH_SEED or 0)");
  }
  GenParams params() const { return {n, k, gen_d, events}; }
  std::uint64_t resolved_seed() const { return seed ? *seed : default_seed(); }
};

bool arrivals_only(const Workload& w) {
  for (const Event& e : w.events)
    if (e.kind != EventKind::ClientArrival) return false;
  return true;
}

// Instance file holding the workload's metric and servers, plus its clients
// when every event is a client arrival.
Instance as_instance(const Workload& w) {
  Instance inst{w.metric, w.servers, {}};
  if (arrivals_only(w))
    for (const Event& e : w.events) inst.clients.push_back(e.point);
  return inst;
}

Workload load_workload(const std::string& instance_path, const std::string& events_path) {
  Instance inst = read_instance_file(instance_path);
  if (!events_path.empty()) {
    Workload w{inst.metric, inst.servers, read_events_file(events_path), false};
    return w;
  }
  Workload w = workload_from_instance(inst);
  // A star with servers and no clients is driven by the adaptive adversary.
  if (const auto* g = std::get_if<GeneralMetric>(&w.metric); g && is_star(*g) && w.events.empty()) w.star_adversary = true;
  return w;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  body(f);
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online metric matching with recourse: run algorithms, generate instances, verify inputs"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Replay a workload with one algorithm and write a trace");
  std::string alg_name, instance_path, gen_name, events_path, out_path, format = "csv", checks = "none";
  unsigned d = 2;
  GenOptions run_gen;
  run_cmd->add_option("--alg", alg_name, "permutation | batchperm | farthest-server | recursive-cancel | nearest-match")
      ->required();
  auto* inst_opt = run_cmd->add_option("--instance", instance_path, "Instance file")->check(CLI::ExistingFile);
  auto* gen_opt = run_cmd->add_option("--gen", gen_name, "Generator name");
  inst_opt->excludes(gen_opt);
  run_cmd->add_option("--events", events_path, "JSONL event stream replacing the instance's clients")
      ->check(CLI::ExistingFile)
      ->needs(inst_opt);
  run_cmd->add_option("--d", d, "BatchPerm base")->capture_default_str();
  run_cmd->add_option("--checks", checks, "all | none | comma separated check names")->capture_default_str();
  run_cmd->add_option("--out", out_path, "Trace output path")->required();
  run_cmd->add_option("--format", format, "csv | jsonl")->capture_default_str();
  run_gen.add_to(run_cmd);

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance (and event stream) to files");
  std::string gen_cmd_name, gen_out, gen_events_out;
  GenOptions gen_opts;
  gen_cmd->add_option("name", gen_cmd_name, "Generator name")->required();
  gen_cmd->add_option("--out", gen_out, "Instance output path")->required();
  gen_cmd->add_option("--events-out", gen_events_out, "Event stream output path (mixed streams only)");
  gen_opts.add_to(gen_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Validate an instance's metric and feasibility");
  std::string verify_instance, verify_events;
  verify_cmd->add_option("--instance", verify_instance, "Instance file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--events", verify_events, "Optional JSONL event stream")->check(CLI::ExistingFile);

  // list
  auto* list_cmd = app.add_subcommand("list", "Print algorithm, generator and check names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) {
      if (instance_path.empty() && gen_name.empty()) throw std::invalid_argument("run needs --instance or --gen");
      RunConfig cfg;
      cfg.algorithm = parse_algorithm(alg_name);
      cfg.workload = instance_path.empty() ? generate(gen_name, run_gen.params(), run_gen.resolved_seed())
                                           : load_workload(instance_path, events_path);
      cfg.d = d;
      cfg.seed = run_gen.resolved_seed();
      cfg.checks = parse_checks(checks);
      const TraceFormat fmt = parse_trace_format(format);
      RunTrace trace = run(cfg);
      emit_trace(trace, fmt, out_path);
      std::cerr << "wrote " << trace.rows.size() << " rows to " << out_path << '\n';
      return kExitOk;
    }
    if (*gen_cmd) {
      Workload w = generate(gen_cmd_name, gen_opts.params(), gen_opts.resolved_seed());
      const bool mixed = !arrivals_only(w);
      if (mixed && gen_events_out.empty()) throw std::invalid_argument(gen_cmd_name + " produces a mixed stream; pass --events-out");
      write_file(gen_out, [&](std::ostream& os) { write_instance(os, as_instance(w)); });
      if (!gen_events_out.empty()) write_file(gen_events_out, [&](std::ostream& os) { write_events(os, w.events); });
      return kExitOk;
    }
    if (*verify_cmd) {
      Instance inst = read_instance_file(verify_instance);
      if (auto v = validate_metric(inst.metric)) {
        std::cerr << "metric violation: " << v->describe() << '\n';
        return kExitCheck;
      }
      try {
        if (verify_events.empty())
          inst.validate();
        else
          validate_events(size(inst.metric), inst.servers.size(), read_events_file(verify_events));
      } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitCheck;
      }
      std::cout << "ok: " << size(inst.metric) << " points, " << inst.servers.size() << " servers, "
                << inst.clients.size() << " clients";
      if (size(inst.metric) >= 2) std::cout << ", aspect ratio " << aspect_ratio(inst.metric);
      std::cout << '\n';
      return kExitOk;
    }
    if (*list_cmd) {
      std::cout << "algorithms: permutation batchperm farthest-server recursive-cancel nearest-match\ngenerators:";
      for (const auto& g : generator_names()) std::cout << ' ' << g;
      std::cout << "\nchecks:";
      for (const auto& c : check_names()) std::cout << ' ' << c;
      std::cout << '\n';
      return kExitOk;
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitCheck;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

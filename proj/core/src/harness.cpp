#include "rematch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rematch/adversaries.hpp"
#include "rematch/batchperm.hpp"
#include "rematch/hst.hpp"
#include "rematch/line.hpp"
#include "rematch/permutation.hpp"

namespace rematch {
namespace {

const std::vector<std::pair<Algorithm, std::string>> kAlgorithms = {
    {Algorithm::Permutation, "permutation"},
    {Algorithm::BatchPerm, "batchperm"},
    {Algorithm::FarthestServer, "farthest-server"},
    {Algorithm::RecursiveCancel, "recursive-cancel"},
    {Algorithm::NearestMatch, "nearest-match"},
};

template <class Cost>
bool at_most(Cost lhs, Cost rhs) {
  if constexpr (std::is_floating_point_v<Cost>)
    return lhs <= rhs + 1e-9 * std::max<Cost>(1, std::abs(rhs));
  else
    return lhs <= rhs;
}

class Checker {
 public:
  explicit Checker(const std::set<std::string>& enabled) : enabled_(enabled) {}
  bool on(const char* name) const { return enabled_.count(name) > 0; }
  void require(std::uint64_t seq, const char* name, bool ok, const std::string& what) const {
    if (!ok) throw InvariantViolation(seq, name, what);
  }
  void require(std::uint64_t seq, const char* name, const std::optional<std::string>& violation) const {
    if (violation) throw InvariantViolation(seq, name, *violation);
  }

 private:
  const std::set<std::string>& enabled_;
};

void require_arrivals_only(const Workload& w, Algorithm a) {
  for (const Event& e : w.events)
    if (e.kind != EventKind::ClientArrival)
      throw std::invalid_argument(to_string(a) + " supports client arrivals only; event seq " + std::to_string(e.seq) +
                                  " is " + to_string(e.kind));
}

// Feeds client locations either from the event list or the star adversary.
class ArrivalSource {
 public:
  explicit ArrivalSource(const Workload& w) : w_(w) {
    if (w.star_adversary) {
      const auto* g = std::get_if<GeneralMetric>(&w.metric);
      if (!g || !is_star(*g)) throw std::invalid_argument("star adversary needs a star metric");
      adversary_.emplace(g->size() - 1);
    }
  }
  std::size_t count() const { return w_.star_adversary ? adversary_->servers().size() : w_.events.size(); }
  std::uint64_t seq(std::size_t i) const { return w_.star_adversary ? i + 1 : w_.events[i].seq; }
  PointId point(std::size_t i, const Matching& current) {
    return w_.star_adversary ? adversary_->next(current) : w_.events[i].point;
  }

 private:
  const Workload& w_;
  std::optional<StarAdversary> adversary_;
};

template <Metric M>
void check_nesting(const Checker& ck, std::uint64_t seq, const Matching& m, std::vector<char>& used_before) {
  for (ServerId s = 0; s < used_before.size(); ++s)
    ck.require(seq, "nesting", !used_before[s] || !m.server_free(s),
               "server " + std::to_string(s) + " left the used set");
  for (ServerId s = 0; s < used_before.size(); ++s) used_before[s] = !m.server_free(s);
}

template <Metric M>
void check_server_optimal(const Checker& ck, std::uint64_t seq, const M& metric, std::span<const PointId> clients,
                          std::span<const PointId> servers, const Matching& m, typename M::cost_type opt) {
  auto used = m.used_servers();
  ck.require(seq, "server-optimal", is_server_optimal(metric, clients, servers, std::span<const ServerId>(used), opt),
             "used servers do not support an optimal matching");
}

template <Metric M>
RunTrace run_permutation(const RunConfig& cfg, const M& metric) {
  const Workload& w = cfg.workload;
  Checker ck(cfg.checks);
  ArrivalSource src(w);
  Permutation<M> alg(metric, w.servers);
  IncrementalAssignment<M> opt(metric, w.servers);
  std::vector<char> used(w.servers.size(), 0);
  RunTrace tr;
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < src.count(); ++i) {
    const std::uint64_t seq = src.seq(i);
    PointId p = src.point(i, alg.matching());
    alg.arrive(p);
    opt.add_client(p);
    cum += 1;
    if (ck.on("server-optimal"))
      check_server_optimal(ck, seq, metric, opt.clients(), w.servers, alg.matching(), opt.cost());
    if (ck.on("nesting")) check_nesting<M>(ck, seq, alg.matching(), used);
    tr.rows.push_back({seq, alg.cost(), opt.cost(), cost_ratio(alg.cost(), opt.cost()), 1, cum, 0});
  }
  return tr;
}

template <Metric M>
RunTrace run_batchperm(const RunConfig& cfg, const M& metric) {
  const Workload& w = cfg.workload;
  Checker ck(cfg.checks);
  ArrivalSource src(w);
  BatchPerm<M> alg(metric, w.servers, cfg.d);
  IncrementalAssignment<M> opt(metric, w.servers);
  std::vector<char> used(w.servers.size(), 0);
  RunTrace tr;
  std::uint64_t cum = 0;
  std::uint32_t worst = 0;
  for (std::size_t i = 0; i < src.count(); ++i) {
    const std::uint64_t seq = src.seq(i);
    PointId p = src.point(i, alg.matching());
    auto step = alg.arrive(p);
    opt.add_client(p);
    cum += step.recourse;
    for (auto r : alg.rematch_counts()) worst = std::max(worst, r);
    const std::uint64_t t = i + 1;
    if (ck.on("server-optimal"))
      check_server_optimal(ck, seq, metric, opt.clients(), w.servers, alg.matching(), opt.cost());
    if (ck.on("nesting")) check_nesting<M>(ck, seq, alg.matching(), used);
    if (ck.on("block-equivalence")) {
      auto ref = permutation_on_digit_blocks(metric, w.servers, std::span<const PointId>(opt.clients()), cfg.d);
      ck.require(seq, "block-equivalence", ref == alg.matching(), "matching differs from the digit-block batches");
    }
    if (ck.on("batch-cost")) {
      auto m = static_cast<typename M::cost_type>(2 * digit_sum(t, cfg.d) - 1);
      ck.require(seq, "batch-cost", at_most(alg.cost(), m * opt.cost()),
                 "cost exceeds " + std::to_string(2 * digit_sum(t, cfg.d) - 1) + " times the optimum");
    }
    tr.rows.push_back({seq, alg.cost(), opt.cost(), cost_ratio(alg.cost(), opt.cost()), step.recourse, cum, worst});
  }
  return tr;
}

RunTrace run_line(const RunConfig& cfg, const LineMetric& metric, LinePolicy policy) {
  const Workload& w = cfg.workload;
  Checker ck(cfg.checks);
  LineMatcher lm(metric, w.servers, policy);
  IncrementalAssignment<LineMetric> opt(metric, w.servers);
  std::vector<std::uint32_t> rematches;
  std::uint32_t worst = 0;
  std::uint64_t cum = 0;
  RunTrace tr;
  for (const Event& e : w.events) {
    const std::uint64_t seq = e.seq;
    auto step = lm.arrive(e.point);
    opt.add_client(e.point);
    rematches.push_back(0);
    for (ClientId c : step.rematched) worst = std::max(worst, ++rematches[c]);
    cum += step.recourse;
    if (ck.on("three-competitive"))
      ck.require(seq, "three-competitive", lm.cost() <= 3 * opt.cost(),
                 "cost " + std::to_string(lm.cost()) + " exceeds 3 * " + std::to_string(opt.cost()));
    if (ck.on("server-optimal"))
      check_server_optimal(ck, seq, metric, opt.clients(), w.servers, lm.matching(), opt.cost());
    if (ck.on("no-free-server-inside")) ck.require(seq, "no-free-server-inside", check_no_free_server_inside_arcs(lm));
    if (policy == LinePolicy::FarthestServer && step.backward) {
      if (ck.on("sweep-disjoint"))
        ck.require(seq, "sweep-disjoint", step.sweep.new_forward_disjoint, "new forward arcs overlap");
      if (ck.on("sweep-lost-server"))
        ck.require(seq, "sweep-lost-server", step.sweep.max_lost_unvisited <= 1,
                   std::to_string(step.sweep.max_lost_unvisited) + " servers ahead lost their clients");
      if (ck.on("shorten")) ck.require(seq, "shorten", step.sweep.shortened, "a moved client's server moved right");
    }
    if (policy == LinePolicy::RecursiveCancel) {
      if (ck.on("redundancy-count")) ck.require(seq, "redundancy-count", check_redundancy_count(lm));
      if (ck.on("suffix-domination")) ck.require(seq, "suffix-domination", check_suffix_domination(lm));
      if (ck.on("redundant-cost")) ck.require(seq, "redundant-cost", check_redundant_cost(lm));
    }
    tr.rows.push_back({seq, lm.cost(), opt.cost(), cost_ratio(lm.cost(), opt.cost()), step.recourse, cum, worst});
  }
  return tr;
}

RunTrace run_nearest(const RunConfig& cfg, const GeneralMetric& metric) {
  const Workload& w = cfg.workload;
  Checker ck(cfg.checks);
  Hst tree = frt_sample(w.metric, cfg.seed);
  GeneralMetric tmetric = tree.to_metric();
  NearestMatch nm(tree, w.servers);
  std::vector<std::uint32_t> rematches;
  std::uint32_t worst = 0;
  std::uint64_t cum = 0;
  RunTrace tr;
  tr.tree_depth = tree.depth();
  for (const Event& e : w.events) {
    NearestMatch::Result r;
    switch (e.kind) {
      case EventKind::ClientArrival:
        r = nm.client_arrival(e.point);
        rematches.push_back(0);
        break;
      case EventKind::ServerArrival: r = nm.server_arrival(e.point); break;
      case EventKind::ClientDeparture: r = nm.client_departure(e.subject); break;
      case EventKind::ServerDeparture: r = nm.server_departure(e.subject); break;
    }
    for (ClientId c : r.moved)
      if (!(e.kind == EventKind::ClientArrival && c == r.subject)) worst = std::max(worst, ++rematches[c]);
    cum += r.recourse;
    auto clients = nm.live_client_points();
    auto servers = nm.live_server_points();
    double opt = min_cost_matching(metric, std::span<const PointId>(clients), std::span<const PointId>(servers)).cost;
    double alg = nm.cost(metric);
    if (ck.on("subtree-discrepancy")) ck.require(e.seq, "subtree-discrepancy", check_subtree_discrepancy(nm));
    if (ck.on("event-recourse"))
      ck.require(e.seq, "event-recourse", r.recourse <= tree.depth(),
                 "recourse " + std::to_string(r.recourse) + " exceeds depth " + std::to_string(tree.depth()));
    if (ck.on("tree-competitive")) {
      double opt_t =
          min_cost_matching(tmetric, std::span<const PointId>(clients), std::span<const PointId>(servers)).cost;
      ck.require(e.seq, "tree-competitive", at_most(nm.cost(tmetric), 3 * opt_t),
                 "tree cost exceeds three times the tree optimum");
    }
    tr.rows.push_back({e.seq, alg, opt, cost_ratio(alg, opt), r.recourse, cum, worst});
  }
  return tr;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_distance(const Distance& d) {
  if (auto i = std::get_if<std::int64_t>(&d)) return std::to_string(*i);
  return format_double(std::get<double>(d));
}

template <class T>
T parse_token(const std::string& tok) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) throw std::invalid_argument("bad trace field '" + tok + "'");
  return v;
}

Distance parse_distance(const std::string& tok) {
  if (tok.find_first_of(".eEn") != std::string::npos) return parse_token<double>(tok);
  return parse_token<std::int64_t>(tok);
}

const char* kHeader = "seq,alg_cost,opt_cost,ratio,step_recourse,cum_recourse,max_client_recourse";

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& [alg, name] : kAlgorithms)
    if (alg == a) return name;
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  for (const auto& [alg, name] : kAlgorithms)
    if (name == s) return alg;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

Workload workload_from_instance(const Instance& inst) {
  inst.validate();
  return Workload{inst.metric, inst.servers, arrival_events(inst), false};
}

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names = {"random-line",      "random-general",       "line-alternating",
                                                 "recursive-cancel-bad", "batchperm-tight", "star",
                                                 "random-dynamic"};
  return names;
}

Workload generate(const std::string& name, const GenParams& p, std::uint64_t seed) {
  if (name == "random-line") return workload_from_instance(gen_random_line(p.n, p.k, seed));
  if (name == "random-general") return workload_from_instance(gen_random_general(p.n, p.k, seed));
  if (name == "line-alternating") return workload_from_instance(gen_line_alternating(p.k));
  if (name == "recursive-cancel-bad") return workload_from_instance(gen_recursive_cancel_bad(p.k));
  if (name == "batchperm-tight") return workload_from_instance(gen_batchperm_tight(p.k, p.d));
  if (name == "star") {
    Workload w{star_metric(p.n), {}, {}, true};
    for (std::size_t i = 1; i <= p.n; ++i) w.servers.push_back(static_cast<PointId>(i));
    return w;
  }
  if (name == "random-dynamic") {
    Instance base = gen_random_general(p.n, 0, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(p.n - 1));
    Workload w{std::move(base.metric), {}, {}, false};
    for (std::size_t i = 0; i < p.k; ++i) w.servers.push_back(pick(rng));
    w.events = gen_random_events(p.n, p.k, p.events, seed + 1);
    return w;
  }
  throw std::invalid_argument("unknown generator '" + name + "'");
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "server-optimal",      "nesting",         "block-equivalence", "batch-cost",        "three-competitive",
      "no-free-server-inside", "sweep-disjoint", "sweep-lost-server", "shorten",           "redundancy-count",
      "suffix-domination",   "redundant-cost",  "subtree-discrepancy", "event-recourse",  "tree-competitive"};
  return names;
}

std::set<std::string> parse_checks(const std::string& spec) {
  const auto& all = check_names();
  if (spec == "all") return {all.begin(), all.end()};
  if (spec == "none" || spec.empty()) return {};
  std::set<std::string> out;
  std::istringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    if (std::find(all.begin(), all.end(), item) == all.end()) throw std::invalid_argument("unknown check '" + item + "'");
    out.insert(item);
  }
  return out;
}

double cost_ratio(const Distance& alg, const Distance& opt) {
  double a = to_double(alg);
  double o = to_double(opt);
  if (o == 0) {
    if (a == 0) return 0;
    throw std::domain_error("positive cost " + to_string(alg) + " against a zero optimum");
  }
  return a / o;
}

RunTrace run(const RunConfig& cfg) {
  const Workload& w = cfg.workload;
  if (!w.star_adversary) validate_events(size(w.metric), w.servers.size(), w.events);
  for (PointId p : w.servers)
    if (p >= size(w.metric)) throw InvalidPointError("server point " + std::to_string(p) + " out of range");
  switch (cfg.algorithm) {
    case Algorithm::Permutation:
    case Algorithm::BatchPerm:
      require_arrivals_only(w, cfg.algorithm);
      return std::visit(
          [&](const auto& metric) {
            return cfg.algorithm == Algorithm::Permutation ? run_permutation(cfg, metric) : run_batchperm(cfg, metric);
          },
          w.metric);
    case Algorithm::FarthestServer:
    case Algorithm::RecursiveCancel: {
      require_arrivals_only(w, cfg.algorithm);
      const auto* line = std::get_if<LineMetric>(&w.metric);
      if (!line || w.star_adversary) throw std::invalid_argument(to_string(cfg.algorithm) + " needs a line metric");
      return run_line(cfg, *line,
                      cfg.algorithm == Algorithm::FarthestServer ? LinePolicy::FarthestServer : LinePolicy::RecursiveCancel);
    }
    case Algorithm::NearestMatch: {
      const auto* g = std::get_if<GeneralMetric>(&w.metric);
      if (!g || w.star_adversary) throw std::invalid_argument("nearest-match needs a metric table");
      return run_nearest(cfg, *g);
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

std::vector<RunTrace> run_many(const std::vector<RunConfig>& configs, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));
  std::vector<RunTrace> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      try {
        out[i] = run(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

TraceFormat parse_trace_format(const std::string& s) {
  if (s == "csv") return TraceFormat::Csv;
  if (s == "jsonl") return TraceFormat::Jsonl;
  throw std::invalid_argument("unknown trace format '" + s + "'");
}

void emit_trace(const RunTrace& trace, TraceFormat format, std::ostream& out) {
  if (format == TraceFormat::Csv) {
    out << kHeader << '\n';
    for (const TraceRow& r : trace.rows)
      out << r.seq << ',' << format_distance(r.alg_cost) << ',' << format_distance(r.opt_cost) << ','
          << format_double(r.ratio) << ',' << r.step_recourse << ',' << r.cum_recourse << ',' << r.max_client_recourse
          << '\n';
    return;
  }
  for (const TraceRow& r : trace.rows) {
    nlohmann::ordered_json j;
    j["seq"] = r.seq;
    std::visit([&](auto v) { j["alg_cost"] = v; }, r.alg_cost);
    std::visit([&](auto v) { j["opt_cost"] = v; }, r.opt_cost);
    j["ratio"] = r.ratio;
    j["step_recourse"] = r.step_recourse;
    j["cum_recourse"] = r.cum_recourse;
    j["max_client_recourse"] = r.max_client_recourse;
    out << j.dump() << '\n';
  }
}

void emit_trace(const RunTrace& trace, TraceFormat format, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  emit_trace(trace, format, f);
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path);
}

RunTrace parse_trace(std::istream& in, TraceFormat format) {
  RunTrace tr;
  std::string line;
  if (format == TraceFormat::Csv) {
    if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("missing trace header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::istringstream ss(line);
      for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
      if (f.size() != 7) throw std::invalid_argument("trace row has " + std::to_string(f.size()) + " fields");
      tr.rows.push_back({parse_token<std::uint64_t>(f[0]), parse_distance(f[1]), parse_distance(f[2]),
                         parse_token<double>(f[3]), parse_token<std::uint64_t>(f[4]), parse_token<std::uint64_t>(f[5]),
                         parse_token<std::uint64_t>(f[6])});
    }
    return tr;
  }
  auto cost = [](const nlohmann::json& v) -> Distance {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    return v.get<double>();
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    tr.rows.push_back({j.at("seq").get<std::uint64_t>(), cost(j.at("alg_cost")), cost(j.at("opt_cost")),
                       j.at("ratio").get<double>(), j.at("step_recourse").get<std::uint64_t>(),
                       j.at("cum_recourse").get<std::uint64_t>(), j.at("max_client_recourse").get<std::uint64_t>()});
  }
  return tr;
}

}  // namespace rematch

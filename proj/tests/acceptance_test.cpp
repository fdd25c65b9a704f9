// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "rematch/adversaries.hpp"
#include "rematch/assignment.hpp"
#include "rematch/batchperm.hpp"
#include "rematch/harness.hpp"
#include "rematch/hst.hpp"
#include "rematch/line.hpp"
#include "rematch/permutation.hpp"

using namespace rematch;

namespace {

constexpr double kRelTol = 1e-9;
constexpr double kOracleSeconds = 30.0;
constexpr double kLineSeconds = 120.0;
constexpr double kHstSeconds = 120.0;
constexpr double kStretchConstant = 8.0;  // mean stretch <= 8 ln n
constexpr double kTightRatio = 2.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  Outcome out;
  auto t0 = Clock::now();
  try {
    out = body();
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  if (!out.ok) ++failures;
  std::printf("%s [%2d] %-28s %6.2fs  %s\n", out.ok ? "PASS" : "FAIL", id, name, seconds_since(t0), out.detail.c_str());
  std::fflush(stdout);
}

bool rel_equal(double a, double b) { return std::abs(a - b) <= kRelTol * std::max({1.0, std::abs(a), std::abs(b)}); }

// Criteria 2 to 5 share one set of line workloads.
struct LineCase {
  std::string name;
  Workload workload;
};

std::vector<LineCase> line_cases() {
  std::vector<LineCase> out;
  std::mt19937_64 rng(2024);
  for (std::uint64_t i = 0; i < 500; ++i) {
    std::size_t k = 1 + i % 128;
    std::size_t n = k + std::uniform_int_distribution<std::size_t>(0, k)(rng);
    out.push_back({"random-line#" + std::to_string(i), workload_from_instance(gen_random_line(n, k, i))});
  }
  out.push_back({"line-alternating(128)", workload_from_instance(gen_line_alternating(128))});
  out.push_back({"recursive-cancel-bad(64)", workload_from_instance(gen_recursive_cancel_bad(64))});
  return out;
}

struct LineRuns {
  std::vector<RunTrace> fs;
  std::vector<RunTrace> rc;
  double fs_seconds = 0;
  std::string invariant_failure;
};

const LineRuns& line_runs() {
  static LineRuns runs = [] {
    LineRuns r;
    auto cases = line_cases();
    std::vector<RunConfig> fs, rc;
    for (const auto& c : cases) {
      fs.push_back({Algorithm::FarthestServer, c.workload, 2, 0, {}});
      rc.push_back({Algorithm::RecursiveCancel, c.workload, 2, 0, {}});
    }
    auto t0 = Clock::now();
    r.fs = run_many(fs);
    r.fs_seconds = seconds_since(t0);
    r.rc = run_many(rc);
    // Structural checks, one instance at a time so a failure names its case.
    for (std::size_t i = 0; i < cases.size() && r.invariant_failure.empty(); ++i) {
      for (auto alg : {Algorithm::FarthestServer, Algorithm::RecursiveCancel}) {
        try {
          run({alg, cases[i].workload, 2, 0,
               parse_checks("server-optimal,no-free-server-inside,sweep-disjoint,sweep-lost-server,shorten,"
                            "redundancy-count,suffix-domination,redundant-cost")});
        } catch (const InvariantViolation& e) {
          r.invariant_failure = cases[i].name + " " + to_string(alg) + ": " + e.what();
          break;
        }
      }
    }
    return r;
  }();
  return runs;
}

Outcome oracle_equivalence() {
  Outcome out;
  auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::size_t line = 0, general = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
    std::size_t n = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(k, 1), 12)(rng);
    Instance inst = i % 2 ? gen_random_general(n, k, i) : gen_random_line(n, k, i);
    auto fast = min_cost_matching(inst);
    auto slow = brute_force_matching(inst);
    if (is_line(inst.metric)) {
      ++line;
      if (std::get<std::int64_t>(fast.cost) != std::get<std::int64_t>(slow.cost))
        out.fail("line instance " + std::to_string(i) + ": " + to_string(fast.cost) + " vs " + to_string(slow.cost));
    } else {
      ++general;
      if (!rel_equal(std::get<double>(fast.cost), std::get<double>(slow.cost)))
        out.fail("general instance " + std::to_string(i) + ": " + to_string(fast.cost) + " vs " + to_string(slow.cost));
    }
  }
  double secs = seconds_since(t0);
  if (secs >= kOracleSeconds) out.fail("took " + std::to_string(secs) + "s");
  if (out.ok) out.detail = std::to_string(line) + " line + " + std::to_string(general) + " general instances agree";
  return out;
}

Outcome line_three_competitive() {
  Outcome out;
  const auto& r = line_runs();
  double worst = 0;
  for (const auto& tr : r.fs)
    for (const auto& row : tr.rows) {
      auto alg = std::get<std::int64_t>(row.alg_cost), opt = std::get<std::int64_t>(row.opt_cost);
      if (alg > 3 * opt) out.fail("seq " + std::to_string(row.seq) + ": " + std::to_string(alg) + " > 3*" + std::to_string(opt));
      worst = std::max(worst, row.ratio);
    }
  if (r.fs_seconds >= kLineSeconds) out.fail("took " + std::to_string(r.fs_seconds) + "s");
  if (out.ok) {
    std::ostringstream os;
    os << r.fs.size() << " instances, worst ratio " << worst;
    out.detail = os.str();
  }
  return out;
}

Outcome equal_cost_bridge() {
  Outcome out;
  const auto& r = line_runs();
  std::size_t rows = 0;
  for (std::size_t i = 0; i < r.fs.size(); ++i) {
    if (r.fs[i].rows.size() != r.rc[i].rows.size()) out.fail("row count differs on case " + std::to_string(i));
    for (std::size_t j = 0; j < r.fs[i].rows.size() && j < r.rc[i].rows.size(); ++j, ++rows)
      if (r.fs[i].rows[j].alg_cost != r.rc[i].rows[j].alg_cost)
        out.fail("case " + std::to_string(i) + " seq " + std::to_string(r.fs[i].rows[j].seq) + ": " +
                 to_string(r.fs[i].rows[j].alg_cost) + " vs " + to_string(r.rc[i].rows[j].alg_cost));
  }
  if (out.ok) out.detail = std::to_string(rows) + " arrivals with identical cost";
  return out;
}

std::size_t line_total_recourse(const Instance& inst, LinePolicy policy) {
  const auto& m = std::get<LineMetric>(inst.metric);
  LineMatcher lm(m, inst.servers, policy);
  std::size_t total = 0;
  for (PointId c : inst.clients) total += lm.arrive(c).recourse;
  return total;
}

Outcome line_recourse() {
  Outcome out;
  const auto& r = line_runs();
  for (std::size_t i = 0; i < r.fs.size(); ++i) {
    if (r.fs[i].rows.empty()) continue;
    const double k = double(r.fs[i].rows.size());
    const double bound = 2 * k * (1 + std::log2(2 * k)) + 2 * k;
    if (double(r.fs[i].rows.back().cum_recourse) > bound)
      out.fail("case " + std::to_string(i) + ": recourse " + std::to_string(r.fs[i].rows.back().cum_recourse) +
               " above " + std::to_string(bound));
  }
  auto small = gen_recursive_cancel_bad(2);
  if (line_total_recourse(small, LinePolicy::FarthestServer) != 7 || line_total_recourse(small, LinePolicy::RecursiveCancel) != 7)
    out.fail("k=2 hand trace expects recourse 7 for both policies");
  auto bad = gen_recursive_cancel_bad(64);
  const std::size_t fs = line_total_recourse(bad, LinePolicy::FarthestServer);
  const std::size_t rc = line_total_recourse(bad, LinePolicy::RecursiveCancel);
  if (rc < 64 * 64 / 4) out.fail("recursive-cancel recourse " + std::to_string(rc) + " < 1024");
  if (double(rc) < 4.0 * double(fs)) out.fail("recourse ratio " + std::to_string(double(rc) / fs) + " < 4");
  if (out.ok) {
    std::ostringstream os;
    os << "bad(64): RC " << rc << " FS " << fs << " ratio " << double(rc) / fs;
    out.detail = os.str();
  }
  return out;
}

Outcome line_invariant_suite() {
  Outcome out;
  const auto& r = line_runs();
  if (!r.invariant_failure.empty()) out.fail(r.invariant_failure);
  if (out.ok) out.detail = "all structural checks held on " + std::to_string(r.fs.size()) + " instances, both policies";
  return out;
}

template <Metric M>
void permutation_batches(const M& m, const Instance& inst, std::mt19937_64& rng, Outcome& out) {
  Permutation<M> p(m, inst.servers);
  std::size_t at = 0, batches = 0;
  while (at < inst.clients.size()) {
    std::size_t len = std::min(std::uniform_int_distribution<std::size_t>(1, 8)(rng), inst.clients.size() - at);
    auto b = p.arrive_batch(std::span<const PointId>(inst.clients).subspan(at, len));
    at += len;
    ++batches;
    if (double(b.local_cost) > 2 * double(b.opt_after) * (1 + kRelTol))
      out.fail("batch cost " + std::to_string(double(b.local_cost)) + " > 2 OPT");
  }
  const double bound = (2.0 * double(batches) - 1) * double(p.offline().cost());
  if (double(p.cost()) > bound * (1 + kRelTol)) out.fail("m-batch cost above (2m-1) OPT");
}

Outcome permutation_properties() {
  Outcome out;
  std::mt19937_64 rng(6);
  std::size_t brute = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    std::size_t k = 1 + i % 64;
    std::size_t n = k + std::uniform_int_distribution<std::size_t>(0, k)(rng);
    if (i % 4 == 0) {
      k = 1 + i % 8;
      n = std::min<std::size_t>(12, k + 3);
    }
    Instance inst = i % 2 ? gen_random_general(n, k, i) : gen_random_line(n, k, i);
    try {
      run({Algorithm::Permutation, workload_from_instance(inst), 2, 0, parse_checks("server-optimal,nesting")});
    } catch (const InvariantViolation& e) {
      out.fail("instance " + std::to_string(i) + ": " + e.what());
    }
    if (k <= kBruteForceMaxClients && n <= kBruteForceMaxServers) {
      ++brute;
      std::visit(
          [&](const auto& m) {
            Permutation<std::decay_t<decltype(m)>> p(m, inst.servers);
            for (std::size_t t = 0; t < inst.clients.size(); ++t) {
              p.arrive(inst.clients[t]);
              auto prefix = std::span<const PointId>(inst.clients).first(t + 1);
              auto used = p.matching().used_servers();
              std::vector<PointId> locs;
              for (ServerId s : used) locs.push_back(inst.servers[s]);
              auto all = brute_force_matching(m, prefix, std::span<const PointId>(inst.servers)).cost;
              auto restricted = brute_force_matching(m, prefix, std::span<const PointId>(locs)).cost;
              if (!cost_equal(all, restricted)) out.fail("instance " + std::to_string(i) + " not server-optimal by brute force");
            }
          },
          inst.metric);
    }
    std::visit([&](const auto& m) { permutation_batches(m, inst, rng, out); }, inst.metric);
  }
  if (out.ok) out.detail = "200 instances, " + std::to_string(brute) + " also against brute force";
  return out;
}

Outcome batchperm_properties() {
  Outcome out;
  const std::size_t k = 64;
  for (unsigned d : {2u, 3u}) {
    unsigned ceil_log = 0;
    for (std::size_t p = 1; p < k; p *= d) ++ceil_log;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      Instance inst = seed % 2 ? gen_random_general(k + 16, k, seed) : gen_random_line(k + 16, k, seed);
      RunTrace tr;
      try {
        tr = run({Algorithm::BatchPerm, workload_from_instance(inst), d, 0, parse_checks("block-equivalence,batch-cost")});
      } catch (const InvariantViolation& e) {
        out.fail("d=" + std::to_string(d) + " seed " + std::to_string(seed) + ": " + e.what());
        continue;
      }
      const auto& last = tr.rows.back();
      if (last.max_client_recourse > ceil_log)
        out.fail("a client moved " + std::to_string(last.max_client_recourse) + " times, d=" + std::to_string(d));
      const double bound = double(k) * (1 + std::log(double(k)) / std::log(double(d)));
      if (double(last.cum_recourse) > bound) out.fail("total recourse " + std::to_string(last.cum_recourse) + " above bound");
    }
  }
  // Hand trace at k=3 fixes the tight instance's constants.
  {
    auto inst = gen_batchperm_tight(3, 3);
    const auto& m = std::get<LineMetric>(inst.metric);
    BatchPerm<LineMetric> bp(m, inst.servers, 3);
    std::vector<std::int64_t> costs;
    for (PointId c : inst.clients) {
      bp.arrive(c);
      costs.push_back(bp.cost());
    }
    if (costs != std::vector<std::int64_t>{7, 24, 15}) out.fail("k=3 hand trace costs differ");
  }
  auto inst = gen_batchperm_tight(27, 3);
  const auto& m = std::get<LineMetric>(inst.metric);
  BatchPerm<LineMetric> bp(m, inst.servers, 3);
  IncrementalAssignment<LineMetric> opt(m, inst.servers);
  std::size_t recourse = 0;
  double ratio_at_13 = 0;
  for (std::size_t t = 1; t <= inst.clients.size(); ++t) {
    recourse += bp.arrive(inst.clients[t - 1]).recourse;
    opt.add_client(inst.clients[t - 1]);
    if (t == 13) ratio_at_13 = double(bp.cost()) / double(opt.cost());  // 13 = 111 in base 3
  }
  if (ratio_at_13 < kTightRatio) out.fail("tight ratio at t=13 is " + std::to_string(ratio_at_13));
  if (recourse < 27) out.fail("tight recourse " + std::to_string(recourse) + " < 27");
  if (out.ok) {
    std::ostringstream os;
    os << "tight(27,3): ratio at t=13 " << ratio_at_13 << ", recourse " << recourse;
    out.detail = os.str();
  }
  return out;
}

Outcome hst_invariants() {
  Outcome out;
  auto t0 = Clock::now();
  std::vector<RunConfig> cfgs;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    cfgs.push_back({Algorithm::NearestMatch, generate("random-dynamic", {64, 16, 3, 200}, seed), 2, seed,
                    parse_checks("subtree-discrepancy,event-recourse,tree-competitive")});
  std::vector<RunTrace> traces;
  try {
    traces = run_many(cfgs);
  } catch (const InvariantViolation& e) {
    out.fail(e.what());
  }
  double secs = seconds_since(t0);
  if (secs >= kHstSeconds) out.fail("took " + std::to_string(secs) + "s");
  if (out.ok) {
    unsigned depth = 0;
    for (const auto& tr : traces) depth = std::max(depth, tr.tree_depth);
    out.detail = "100 streams x 200 events, max depth " + std::to_string(depth);
  }
  return out;
}

Outcome frt_properties() {
  Outcome out;
  auto inst = gen_random_general(32, 0, 32);
  const auto& g = std::get<GeneralMetric>(inst.metric);
  const double depth_limit = std::ceil(std::log2(aspect_ratio(inst.metric))) + 2;
  double sum = 0;
  std::size_t pairs = 0;
  unsigned deepest = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Hst t = frt_sample(inst.metric, seed);
    deepest = std::max(deepest, t.depth());
    if (t.depth() > depth_limit) out.fail("seed " + std::to_string(seed) + " depth " + std::to_string(t.depth()));
    for (PointId a = 0; a < g.size(); ++a)
      for (PointId b = a + 1; b < g.size(); ++b) {
        const double dt = t.distance(a, b), d = g.distance(a, b);
        if (dt < d) out.fail("seed " + std::to_string(seed) + " shrinks pair " + std::to_string(a) + "," + std::to_string(b));
        sum += dt / d;
        ++pairs;
      }
  }
  const double mean = sum / double(pairs);
  const double bound = kStretchConstant * std::log(32.0);
  if (mean > bound) out.fail("mean stretch " + std::to_string(mean) + " > " + std::to_string(bound));
  if (out.ok) {
    std::ostringstream os;
    os << "mean stretch " << mean << " (bound " << bound << "), depth " << deepest << " <= " << depth_limit;
    out.detail = os.str();
  }
  return out;
}

Outcome star_lower_bound() {
  Outcome out;
  const std::size_t n = 256;
  {
    StarAdversary adv(n);
    Permutation<GeneralMetric> p(adv.metric(), adv.servers());
    for (std::size_t t = 0; !adv.done(); ++t) {
      p.arrive(adv.next(p.matching()));
      if (p.offline().cost() != 1.0) out.fail("OPT at t=" + std::to_string(t) + " is not 1");
      auto diag = path_diagnostic(adv.metric(), adv.servers(), adv.emitted(), p.matching());
      if (diag.path_length != t + 1) out.fail("path length at t=" + std::to_string(t) + " is " + std::to_string(diag.path_length));
    }
    const double ratio = p.cost() / p.offline().cost();
    if (ratio < double(n) / 2) out.fail("permutation ratio at t=n-1 is " + std::to_string(ratio));
  }
  double worst = 0;
  {
    StarAdversary adv(n);
    BatchPerm<GeneralMetric> bp(adv.metric(), adv.servers(), 2);
    Permutation<GeneralMetric> opt(adv.metric(), adv.servers());
    while (!adv.done()) {
      PointId c = adv.next(bp.matching());
      bp.arrive(c);
      opt.arrive(c);
      if (opt.offline().cost() != 1.0) out.fail("OPT under batchperm is not 1");
      worst = std::max(worst, bp.cost() / opt.offline().cost());
    }
    if (worst > 2 * std::log2(double(n)) + 1) out.fail("batchperm ratio " + std::to_string(worst));
  }
  if (out.ok) {
    std::ostringstream os;
    os << "n=256: permutation path t+1 throughout, batchperm worst ratio " << worst;
    out.detail = os.str();
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

Outcome determinism() {
  Outcome out;
  auto dir = std::filesystem::temp_directory_path() / ("rematch_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::vector<RunConfig> cfgs = {
      {Algorithm::Permutation, generate("random-general", {40, 30, 3, 0}, 5), 2, 0, {}},
      {Algorithm::BatchPerm, generate("random-line", {40, 30, 3, 0}, 5), 3, 0, {}},
      {Algorithm::FarthestServer, generate("random-line", {80, 64, 3, 0}, 5), 2, 0, {}},
      {Algorithm::RecursiveCancel, generate("random-line", {80, 64, 3, 0}, 5), 2, 0, {}},
      {Algorithm::NearestMatch, generate("random-dynamic", {64, 16, 3, 200}, 5), 2, 5, {}},
      {Algorithm::BatchPerm, generate("star", {64, 0, 3, 0}, 0), 2, 0, {}},
  };
  std::size_t files = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i)
    for (auto fmt : {TraceFormat::Csv, TraceFormat::Jsonl}) {
      auto a = dir / ("a" + std::to_string(i)), b = dir / ("b" + std::to_string(i));
      emit_trace(run(cfgs[i]), fmt, a.string());
      emit_trace(run(cfgs[i]), fmt, b.string());
      if (slurp(a) != slurp(b)) out.fail(to_string(cfgs[i].algorithm) + " traces differ");
      files += 2;
    }
  std::filesystem::remove_all(dir);
  if (out.ok) out.detail = std::to_string(files) + " trace files, pairwise identical";
  return out;
}

}  // namespace

int main() {
  report(1, "oracle-equivalence", oracle_equivalence);
  report(2, "line-3-competitive", line_three_competitive);
  report(3, "equal-cost-bridge", equal_cost_bridge);
  report(4, "line-recourse", line_recourse);
  report(5, "line-invariant-suite", line_invariant_suite);
  report(6, "permutation-properties", permutation_properties);
  report(7, "batchperm-properties", batchperm_properties);
  report(8, "hst-invariants", hst_invariants);
  report(9, "frt-embedding", frt_properties);
  report(10, "star-lower-bound", star_lower_bound);
  report(11, "determinism", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures ? 1 : 0;
}

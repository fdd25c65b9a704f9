#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rematch/events.hpp"
#include "rematch/matching.hpp"
#include "rematch/metric.hpp"

namespace rematch {

enum class Algorithm { Permutation, BatchPerm, FarthestServer, RecursiveCancel, NearestMatch };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

// What a run replays: a metric, the servers present at the start, and either
// an event stream or the adaptive star adversary.
struct Workload {
  MetricSpace metric;
  std::vector<PointId> servers;
  std::vector<Event> events;
  bool star_adversary = false;
};

Workload workload_from_instance(const Instance& inst);

struct GenParams {
  std::size_t n = 64;       // servers, points, or leaves depending on the generator
  std::size_t k = 64;       // clients
  unsigned d = 3;           // base for batchperm-tight
  std::size_t events = 200; // random-dynamic stream length
};

// random-line, random-general, line-alternating, recursive-cancel-bad,
// batchperm-tight, star, random-dynamic.
const std::vector<std::string>& generator_names();
Workload generate(const std::string& name, const GenParams& p, std::uint64_t seed);

// Invariant checkers that a run can enable.
const std::vector<std::string>& check_names();
std::set<std::string> parse_checks(const std::string& spec);  // "all", "none" or a comma list

struct RunConfig {
  Algorithm algorithm = Algorithm::Permutation;
  Workload workload;
  unsigned d = 2;          // BatchPerm base
  std::uint64_t seed = 0;  // tree sampling for nearest-match
  std::set<std::string> checks;
};

struct TraceRow {
  std::uint64_t seq = 0;
  Distance alg_cost = std::int64_t{0};
  Distance opt_cost = std::int64_t{0};
  double ratio = 0;
  std::uint64_t step_recourse = 0;
  std::uint64_t cum_recourse = 0;
  std::uint64_t max_client_recourse = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  unsigned tree_depth = 0;  // nearest-match only
};

class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::uint64_t seq, const std::string& check, const std::string& what)
      : std::runtime_error("seq " + std::to_string(seq) + ": " + check + ": " + what), seq_(seq), check_(check) {}
  std::uint64_t seq() const noexcept { return seq_; }
  const std::string& check() const noexcept { return check_; }

 private:
  std::uint64_t seq_;
  std::string check_;
};

// Ratio policy: 0 when both costs are 0; std::domain_error when only OPT is 0.
double cost_ratio(const Distance& alg, const Distance& opt);

// Throws InvariantViolation on the first failed enabled check.
RunTrace run(const RunConfig& config);

// Independent runs on a pool of threads; results in input order.
std::vector<RunTrace> run_many(const std::vector<RunConfig>& configs, unsigned threads = 0);

enum class TraceFormat { Csv, Jsonl };
TraceFormat parse_trace_format(const std::string& s);

void emit_trace(const RunTrace& trace, TraceFormat format, std::ostream& out);
void emit_trace(const RunTrace& trace, TraceFormat format, const std::string& path);
RunTrace parse_trace(std::istream& in, TraceFormat format);

}  // namespace rematch

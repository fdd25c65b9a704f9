#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rematch/permutation.hpp"

namespace rematch {

struct Arc {
  ClientId client;
  ServerId server;
  std::int64_t client_x;
  std::int64_t server_x;

  bool forward() const noexcept { return client_x <= server_x; }
  std::int64_t lo() const noexcept { return forward() ? client_x : server_x; }
  std::int64_t hi() const noexcept { return forward() ? server_x : client_x; }
  bool covers(std::int64_t l, std::int64_t r) const noexcept { return lo() <= l && r <= hi(); }
};

struct IntervalStats {
  std::int64_t left;
  std::int64_t right;
  std::int64_t disc;  // servers minus clients at or left of `left`
  std::int64_t nf;
  std::int64_t nb;
};

// Elementary intervals between consecutive endpoints of the arcs.
std::vector<IntervalStats> interval_decomposition(std::span<const Arc> arcs);

struct Range {
  std::int64_t lo;
  std::int64_t hi;
  friend bool operator==(const Range&, const Range&) = default;
};

// Parts of a new forward arc [cx, sx] where the existing arcs cross with more
// backward than forward arcs. Adjacent parts are merged.
std::vector<Range> redundant_ranges(std::span<const Arc> arcs, std::int64_t cx, std::int64_t sx);

struct SweepPoint {
  std::int64_t x;
  bool is_server;
  std::uint32_t id;
  std::uint32_t old_partner;  // kNone for the new client and the new server
};

struct SweepResult {
  std::vector<std::pair<ClientId, ServerId>> pairs;
  bool new_forward_disjoint = true;
  bool shortened = true;             // every moved client's new server is left of its old one
  std::size_t max_lost_unvisited = 0;  // servers ahead of the sweep whose client already moved
};

// Left-to-right re-matching of the points. Points must be sorted by x, and
// every old partner must itself be in the list. Throws ContractError otherwise.
SweepResult sweep(std::span<const SweepPoint> points);

enum class LinePolicy { FarthestServer, RecursiveCancel };

struct LineStep {
  ServerId new_server;
  bool backward;
  std::size_t recourse;            // moved clients plus one for the new client
  std::vector<ClientId> rematched;  // clients other than the new one whose server changed
  SweepResult sweep;               // FarthestServer backward steps only
};

class LineMatcher {
 public:
  LineMatcher(const LineMetric& metric, std::vector<PointId> servers, LinePolicy policy);

  // Server chosen by the internal Permutation run.
  LineStep arrive(PointId c);
  // Same update with the server supplied by the caller, for hand-built states.
  // After this, arrive() refuses to run because the internal run no longer agrees.
  LineStep arrive_with_server(PointId c, ServerId s);
  // Places a client already matched to s without any cancellation.
  ClientId place(PointId c, ServerId s);

  LinePolicy policy() const noexcept { return policy_; }
  const Matching& matching() const noexcept { return matching_; }
  std::int64_t cost() const noexcept { return cost_; }
  std::size_t num_clients() const noexcept { return clients_.size(); }
  const std::vector<PointId>& clients() const noexcept { return clients_; }
  const std::vector<PointId>& servers() const noexcept { return servers_; }
  const LineMetric& metric() const noexcept { return *metric_; }
  std::int64_t client_x(ClientId c) const { return metric_->coord(clients_.at(c)); }
  std::int64_t server_x(ServerId s) const { return metric_->coord(servers_.at(s)); }

  std::vector<Arc> arcs() const;
  std::vector<IntervalStats> intervals() const { return interval_decomposition(arcs()); }
  // Redundant parts of the forward arc of c (RecursiveCancel only).
  const std::vector<Range>& labels(ClientId c) const { return labels_.at(c); }

  // Offline optimum of the clients so far, from the internal Permutation run.
  std::int64_t opt_cost() const;

 private:
  void match(ClientId c, ServerId s);
  void recursive_cancel(ClientId c, ServerId s, LineStep& step);
  void farthest_server(ClientId c, ServerId s, LineStep& step);
  LineStep apply(ClientId c, ServerId s);

  const LineMetric* metric_;
  LinePolicy policy_;
  std::vector<PointId> servers_;
  std::vector<PointId> clients_;
  Matching matching_;
  std::int64_t cost_ = 0;
  std::optional<Permutation<LineMetric>> inner_;
  std::vector<std::vector<Range>> labels_;
};

// Diagnostics. Each returns a description of the first violation, or nullopt.
std::optional<std::string> check_no_free_server_inside_arcs(const LineMetric& metric, std::span<const PointId> servers,
                                                            const Matching& m, std::span<const Arc> arcs);
std::optional<std::string> check_no_free_server_inside_arcs(const LineMatcher& lm);
std::optional<std::string> check_redundancy_count(const LineMatcher& lm);
std::optional<std::string> check_suffix_domination(const LineMatcher& lm);
std::optional<std::string> check_redundant_cost(const LineMatcher& lm);

// Redundant and non-redundant forward length summed over all forward arcs.
struct RedundancyTotals {
  std::int64_t redundant = 0;
  std::int64_t non_redundant = 0;
};
RedundancyTotals redundancy_totals(const LineMatcher& lm);

}  // namespace rematch

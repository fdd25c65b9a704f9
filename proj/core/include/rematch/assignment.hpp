#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rematch/matching.hpp"
#include "rematch/metric.hpp"

namespace rematch {

template <class Cost>
inline constexpr Cost kInfCost = std::numeric_limits<Cost>::has_infinity ? std::numeric_limits<Cost>::infinity()
                                                                          : std::numeric_limits<Cost>::max() / 4;

template <class Cost>
bool cost_equal(Cost a, Cost b) {
  if constexpr (std::is_floating_point_v<Cost>)
    return std::abs(a - b) <= 1e-9 * std::max({Cost{1}, std::abs(a), std::abs(b)});
  else
    return a == b;
}

// Successive shortest augmenting paths with potentials, one client at a time.
// After every add_client the matching is a minimum cost matching of all clients
// so far, and the set of used servers only grows by the returned server.
//
// Ties: columns at the minimum reduced distance that are already matched are
// explored before any free column is accepted, and among free columns at the
// minimum the smallest server id wins. So the chosen server is the smallest id
// among all servers reachable by a shortest augmenting path.
template <Metric M>
class IncrementalAssignment {
 public:
  using Cost = typename M::cost_type;

  struct Step {
    ClientId client;
    ServerId new_server;  // server that was free before and is used now
    Cost cost_increase;
    std::vector<std::pair<ClientId, ServerId>> reassigned;  // every client whose server changed, new server
  };

  IncrementalAssignment(const M& metric, std::vector<PointId> servers)
      : metric_(&metric), servers_(std::move(servers)), v_(servers_.size(), Cost{}),
        matching_(0, servers_.size()) {
    for (PointId p : servers_)
      if (p >= metric.size()) throw InvalidPointError("server point out of range");
  }

  std::size_t num_clients() const noexcept { return clients_.size(); }
  std::size_t num_servers() const noexcept { return servers_.size(); }
  const Matching& matching() const noexcept { return matching_; }
  const std::vector<PointId>& clients() const noexcept { return clients_; }
  const std::vector<PointId>& servers() const noexcept { return servers_; }
  Cost cost() const noexcept { return cost_; }

  Step add_client(PointId location) {
    if (location >= metric_->size()) throw InvalidPointError("client point out of range");
    if (clients_.size() >= servers_.size()) throw InfeasibleError("no free server left");
    const std::size_t m = servers_.size();
    const ClientId root = matching_.add_client();
    clients_.push_back(location);
    u_.push_back(Cost{});

    minv_.assign(m, kInfCost<Cost>);
    way_.assign(m, kNone);
    used_.assign(m, 0);
    visited_.clear();

    ClientId row = root;
    ServerId col = kNone;
    ServerId terminal = kNone;
    for (;;) {
      const PointId at = clients_[row];
      const Cost ur = u_[row];
      for (ServerId j = 0; j < m; ++j) {
        if (used_[j]) continue;
        Cost r = metric_->distance(at, servers_[j]) - ur - v_[j];
        if (r < minv_[j]) {
          minv_[j] = r;
          way_[j] = col;
        }
      }
      Cost delta = kInfCost<Cost>;
      for (ServerId j = 0; j < m; ++j)
        if (!used_[j] && minv_[j] < delta) delta = minv_[j];
      ServerId pick = kNone;
      ServerId free_pick = kNone;
      for (ServerId j = 0; j < m; ++j) {
        if (used_[j] || minv_[j] != delta) continue;
        if (!matching_.server_free(j)) {
          pick = j;
          break;
        }
        if (free_pick == kNone) free_pick = j;
      }
      u_[root] += delta;
      for (ServerId j : visited_) {
        u_[matching_.client_of(j)] += delta;
        v_[j] -= delta;
      }
      for (ServerId j = 0; j < m; ++j)
        if (!used_[j]) minv_[j] -= delta;
      if (pick == kNone) {
        terminal = free_pick;
        break;
      }
      used_[pick] = 1;
      visited_.push_back(pick);
      col = pick;
      row = matching_.client_of(pick);
    }

    Step step{root, terminal, Cost{}, {}};
    Cost before = cost_;
    for (ServerId j = terminal; j != kNone;) {
      ServerId prev = way_[j];
      ClientId c = prev == kNone ? root : matching_.client_of(prev);
      cost_ -= c == root ? Cost{} : metric_->distance(clients_[c], servers_[prev]);
      matching_.match(c, j);
      cost_ += metric_->distance(clients_[c], servers_[j]);
      step.reassigned.emplace_back(c, j);
      j = prev;
    }
    std::reverse(step.reassigned.begin(), step.reassigned.end());
    step.cost_increase = cost_ - before;
    return step;
  }

 private:
  const M* metric_;
  std::vector<PointId> servers_;
  std::vector<PointId> clients_;
  std::vector<Cost> u_;
  std::vector<Cost> v_;
  Matching matching_;
  Cost cost_{};
  std::vector<Cost> minv_;
  std::vector<ServerId> way_;
  std::vector<char> used_;
  std::vector<ServerId> visited_;
};

template <class Cost>
struct OptResult {
  Matching matching;
  Cost cost{};
};

template <Metric M>
OptResult<typename M::cost_type> min_cost_matching(const M& metric, std::span<const PointId> clients,
                                                   std::span<const PointId> servers) {
  if (clients.size() > servers.size()) throw InfeasibleError("more clients than servers");
  IncrementalAssignment<M> solver(metric, std::vector<PointId>(servers.begin(), servers.end()));
  for (PointId c : clients) solver.add_client(c);
  return {solver.matching(), solver.cost()};
}

// Exhaustive search over injections, as an oracle for small inputs.
inline constexpr std::size_t kBruteForceMaxClients = 9;
inline constexpr std::size_t kBruteForceMaxServers = 12;

template <Metric M>
OptResult<typename M::cost_type> brute_force_matching(const M& metric, std::span<const PointId> clients,
                                                      std::span<const PointId> servers) {
  using Cost = typename M::cost_type;
  if (clients.size() > kBruteForceMaxClients || servers.size() > kBruteForceMaxServers)
    throw std::length_error("instance too large for brute force");
  if (clients.size() > servers.size()) throw InfeasibleError("more clients than servers");
  const std::size_t k = clients.size();
  std::vector<ServerId> cur(k), best(k);
  std::vector<char> taken(servers.size(), 0);
  Cost best_cost = kInfCost<Cost>;
  auto dfs = [&](auto&& self, std::size_t i, Cost acc) -> void {
    if (acc >= best_cost) return;
    if (i == k) {
      best_cost = acc;
      best = cur;
      return;
    }
    for (ServerId s = 0; s < servers.size(); ++s) {
      if (taken[s]) continue;
      taken[s] = 1;
      cur[i] = s;
      self(self, i + 1, acc + metric.distance(clients[i], servers[s]));
      taken[s] = 0;
    }
  };
  dfs(dfs, 0, Cost{});
  OptResult<Cost> out{Matching(k, servers.size()), k == 0 ? Cost{} : best_cost};
  for (std::size_t i = 0; i < k; ++i) out.matching.match(static_cast<ClientId>(i), best[i]);
  return out;
}

// Optimal cost when |clients| == |servers| on a line: the sum over elementary
// intervals of length times absolute imbalance.
inline std::int64_t line_balanced_cost(std::vector<std::int64_t> clients, std::vector<std::int64_t> servers) {
  if (clients.size() != servers.size()) throw std::invalid_argument("line_balanced_cost needs equal sizes");
  std::vector<std::pair<std::int64_t, int>> pts;
  pts.reserve(clients.size() * 2);
  for (auto x : clients) pts.emplace_back(x, -1);
  for (auto x : servers) pts.emplace_back(x, +1);
  std::sort(pts.begin(), pts.end());
  std::int64_t total = 0;
  std::int64_t disc = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    disc += pts[i].second;
    total += (pts[i + 1].first - pts[i].first) * (disc < 0 ? -disc : disc);
  }
  return total;
}

// True when the servers in `used` admit a matching of all clients as cheap as
// the unrestricted optimum `opt`.
template <Metric M>
bool is_server_optimal(const M& metric, std::span<const PointId> clients, std::span<const PointId> servers,
                       std::span<const ServerId> used, typename M::cost_type opt) {
  if (used.size() < clients.size()) return false;
  std::vector<PointId> restricted;
  restricted.reserve(used.size());
  for (ServerId s : used) restricted.push_back(servers[s]);
  typename M::cost_type rc;
  if constexpr (std::is_same_v<M, LineMetric>) {
    if (used.size() == clients.size()) {
      std::vector<std::int64_t> cx, sx;
      for (PointId p : clients) cx.push_back(metric.coord(p));
      for (PointId p : restricted) sx.push_back(metric.coord(p));
      rc = line_balanced_cost(std::move(cx), std::move(sx));
    } else {
      rc = min_cost_matching(metric, clients, std::span<const PointId>(restricted)).cost;
    }
  } else {
    rc = min_cost_matching(metric, clients, std::span<const PointId>(restricted)).cost;
  }
  return cost_equal(rc, opt);
}

template <Metric M>
bool is_server_optimal(const M& metric, std::span<const PointId> clients, std::span<const PointId> servers,
                       std::span<const ServerId> used) {
  return is_server_optimal(metric, clients, servers, used, min_cost_matching(metric, clients, servers).cost);
}

OptResult<Distance> min_cost_matching(const Instance& inst);
OptResult<Distance> brute_force_matching(const Instance& inst);

}  // namespace rematch

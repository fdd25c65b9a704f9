#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "rematch/permutation.hpp"

namespace rematch {

// Largest i with d^i dividing t. Throws std::domain_error for t = 0, std::invalid_argument for d < 2.
unsigned block_exponent(std::uint64_t t, unsigned d);

// Block sizes of t in base d, largest first: digit a_j contributes a_j blocks of d^j.
std::vector<std::uint64_t> digit_blocks(std::uint64_t t, unsigned d);

// Sum of the base-d digits of t.
unsigned digit_sum(std::uint64_t t, unsigned d);

// Permutation run on batches, where at time t the last d^i(t) clients are
// re-matched together against the servers the offline optimum added for them.
template <Metric M>
class BatchPerm {
 public:
  using Cost = typename M::cost_type;

  struct Step {
    ServerId server;          // server of the new client
    std::size_t recourse;     // 1 for the new client plus every block client that moved
    std::uint64_t block_size;
  };

  BatchPerm(const M& metric, std::vector<PointId> servers, unsigned d)
      : metric_(&metric), d_(d), offline_(metric, std::move(servers)), online_(0, offline_.num_servers()) {
    if (d < 2) throw std::invalid_argument("batch base d must be at least 2");
  }

  Step arrive(PointId c) {
    auto add = offline_.add_client(c);
    additions_.push_back(add.new_server);
    const ClientId id = online_.add_client();
    rematches_.push_back(0);
    const std::uint64_t t = online_.num_clients();
    const std::uint64_t size = power(block_exponent(t, d_));
    const std::size_t first = static_cast<std::size_t>(t - size);

    std::vector<ServerId> block_servers(additions_.begin() + first, additions_.end());
    std::sort(block_servers.begin(), block_servers.end());
    std::vector<PointId> block_clients(offline_.clients().begin() + first, offline_.clients().end());
    std::vector<PointId> locs;
    for (ServerId s : block_servers) locs.push_back(offline_.servers()[s]);
    auto local = min_cost_matching(*metric_, std::span<const PointId>(block_clients), std::span<const PointId>(locs));

    std::vector<ServerId> before;
    for (std::size_t i = first; i < t; ++i) {
      before.push_back(online_.server_of(static_cast<ClientId>(i)));
      if (i + 1 < t) cost_ -= metric_->distance(offline_.clients()[i], offline_.servers()[before.back()]);
      online_.unmatch_client(static_cast<ClientId>(i));
    }
    std::size_t recourse = 1;
    for (std::size_t i = first; i < t; ++i) {
      ServerId s = block_servers[local.matching.server_of(static_cast<ClientId>(i - first))];
      online_.match(static_cast<ClientId>(i), s);
      cost_ += metric_->distance(offline_.clients()[i], offline_.servers()[s]);
      if (i != id && s != before[i - first]) {
        ++recourse;
        ++rematches_[i];
      }
    }
    return {online_.server_of(id), recourse, size};
  }

  const Matching& matching() const noexcept { return online_; }
  Cost cost() const noexcept { return cost_; }
  unsigned base() const noexcept { return d_; }
  const IncrementalAssignment<M>& offline() const noexcept { return offline_; }
  // Times each client changed server after its first match.
  const std::vector<std::uint32_t>& rematch_counts() const noexcept { return rematches_; }

 private:
  std::uint64_t power(unsigned i) const {
    std::uint64_t p = 1;
    while (i--) p *= d_;
    return p;
  }

  const M* metric_;
  unsigned d_;
  IncrementalAssignment<M> offline_;
  Matching online_;
  Cost cost_{};
  std::vector<ServerId> additions_;
  std::vector<std::uint32_t> rematches_;
};

// Permutation fed the digit blocks of t, for comparison with BatchPerm at time t.
template <Metric M>
Matching permutation_on_digit_blocks(const M& metric, const std::vector<PointId>& servers,
                                     std::span<const PointId> clients, unsigned d) {
  Permutation<M> p(metric, servers);
  std::size_t at = 0;
  for (std::uint64_t b : digit_blocks(clients.size(), d)) {
    p.arrive_batch(clients.subspan(at, b));
    at += b;
  }
  return p.matching();
}

}  // namespace rematch

#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "rematch/assignment.hpp"

namespace rematch {

// Online matching that never rematches. An internal incremental optimum
// decides which server becomes used at each arrival; the online side matches
// the arriving clients to exactly those servers.
template <Metric M>
class Permutation {
 public:
  using Cost = typename M::cost_type;

  struct Batch {
    std::vector<ServerId> new_servers;  // ascending ids
    Cost local_cost{};                  // cost of the batch's local matching
    Cost opt_after{};                   // offline optimum after the batch
    std::size_t recourse = 0;
  };

  Permutation(const M& metric, std::vector<PointId> servers)
      : metric_(&metric), offline_(metric, std::move(servers)), online_(0, offline_.num_servers()) {}

  // One client: matched to the server the offline optimum just started using.
  ServerId arrive(PointId c) {
    auto step = offline_.add_client(c);
    ClientId id = online_.add_client();
    online_.match(id, step.new_server);
    cost_ += metric_->distance(c, offline_.servers()[step.new_server]);
    new_servers_.push_back(step.new_server);
    return step.new_server;
  }

  // A batch arrives at once: the servers the offline optimum adds for it are
  // matched to the batch by a local min-cost matching.
  Batch arrive_batch(std::span<const PointId> batch) {
    Batch out;
    for (PointId c : batch) {
      auto step = offline_.add_client(c);
      out.new_servers.push_back(step.new_server);
      new_servers_.push_back(step.new_server);
    }
    std::sort(out.new_servers.begin(), out.new_servers.end());
    std::vector<PointId> locs;
    for (ServerId s : out.new_servers) locs.push_back(offline_.servers()[s]);
    auto local = min_cost_matching(*metric_, batch, std::span<const PointId>(locs));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ClientId id = online_.add_client();
      online_.match(id, out.new_servers[local.matching.server_of(static_cast<ClientId>(i))]);
    }
    out.local_cost = local.cost;
    out.opt_after = offline_.cost();
    out.recourse = batch.size();
    cost_ += local.cost;
    return out;
  }

  const Matching& matching() const noexcept { return online_; }
  Cost cost() const noexcept { return cost_; }
  std::size_t num_clients() const noexcept { return online_.num_clients(); }
  const IncrementalAssignment<M>& offline() const noexcept { return offline_; }
  // Server added to the offline optimum at each arrival, in arrival order.
  const std::vector<ServerId>& offline_additions() const noexcept { return new_servers_; }

 private:
  const M* metric_;
  IncrementalAssignment<M> offline_;
  Matching online_;
  Cost cost_{};
  std::vector<ServerId> new_servers_;
};

}  // namespace rematch

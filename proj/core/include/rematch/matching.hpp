#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rematch/metric.hpp"

namespace rematch {

// Clients are numbered by arrival, servers by position in the server list.
// Both are entities with a location, so a client may share a point with a server.
using ClientId = std::uint32_t;
using ServerId = std::uint32_t;
inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Matching {
 public:
  Matching() = default;
  Matching(std::size_t clients, std::size_t servers)
      : server_of_(clients, kNone), client_of_(servers, kNone) {}

  std::size_t num_clients() const noexcept { return server_of_.size(); }
  std::size_t num_servers() const noexcept { return client_of_.size(); }
  std::size_t size() const noexcept { return matched_; }

  ClientId add_client() {
    server_of_.push_back(kNone);
    return static_cast<ClientId>(server_of_.size() - 1);
  }
  ServerId add_server() {
    client_of_.push_back(kNone);
    return static_cast<ServerId>(client_of_.size() - 1);
  }
  void reserve_clients(std::size_t n) {
    if (n > server_of_.size()) server_of_.resize(n, kNone);
  }
  void reserve_servers(std::size_t n) {
    if (n > client_of_.size()) client_of_.resize(n, kNone);
  }

  ServerId server_of(ClientId c) const { return server_of_.at(c); }
  ClientId client_of(ServerId s) const { return client_of_.at(s); }
  bool client_matched(ClientId c) const { return server_of(c) != kNone; }
  bool server_free(ServerId s) const { return client_of(s) == kNone; }

  // Matches c to s, first releasing whatever either was matched to.
  void match(ClientId c, ServerId s);
  void unmatch_client(ClientId c);
  void unmatch_server(ServerId s);

  std::vector<std::pair<ClientId, ServerId>> pairs() const;
  std::vector<ServerId> used_servers() const;

  friend bool operator==(const Matching& a, const Matching& b) {
    return a.server_of_ == b.server_of_ && a.client_of_ == b.client_of_;
  }

 private:
  std::vector<ServerId> server_of_;
  std::vector<ClientId> client_of_;
  std::size_t matched_ = 0;
};

struct Instance {
  MetricSpace metric;
  std::vector<PointId> servers;
  std::vector<PointId> clients;  // arrival order

  void validate() const;  // point ids in range, |clients| <= |servers|
};

// Sum of distances over matched pairs, with client i at clients[i], server j at servers[j].
template <Metric M>
typename M::cost_type matching_cost(const M& metric, std::span<const PointId> clients,
                                    std::span<const PointId> servers, const Matching& m) {
  typename M::cost_type total{};
  for (ClientId c = 0; c < m.num_clients() && c < clients.size(); ++c) {
    ServerId s = m.server_of(c);
    if (s != kNone) total += metric.distance(clients[c], servers[s]);
  }
  return total;
}

Distance matching_cost(const Instance& inst, const Matching& m);

}  // namespace rematch

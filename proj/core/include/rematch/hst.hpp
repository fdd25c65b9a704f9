#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rematch/matching.hpp"
#include "rematch/metric.hpp"

namespace rematch {

struct HstNode {
  std::uint32_t parent;  // kNone for the root
  unsigned level;        // leaves are 1, the root is depth()
  double edge;           // length of the edge to the parent, 0 for the root
  PointId point;         // kNone for internal nodes
  std::vector<std::uint32_t> children;
};

// Hierarchically separated tree whose leaves are the points of a metric.
// Every leaf sits at level 1 and edges out of level L all have the same length,
// doubling per level.
class Hst {
 public:
  using cost_type = double;

  Hst() = default;
  // Node 0 must be the root. Throws std::invalid_argument when the tree is malformed.
  explicit Hst(std::vector<HstNode> nodes);

  std::size_t size() const noexcept { return leaf_of_.size(); }  // number of points
  unsigned depth() const noexcept { return nodes_.empty() ? 0 : nodes_[0].level; }
  const std::vector<HstNode>& nodes() const noexcept { return nodes_; }
  std::uint32_t leaf(PointId p) const { return leaf_of_.at(p); }
  // Ancestor of point p at the given level (1 is the leaf itself).
  std::uint32_t ancestor(PointId p, unsigned level) const;
  unsigned lca_level(PointId a, PointId b) const;
  double distance(PointId a, PointId b) const;
  // Distance from a leaf up to its ancestor at the given level.
  double up_length(unsigned level) const { return up_.at(level); }

  GeneralMetric to_metric() const;

 private:
  std::vector<HstNode> nodes_;
  std::vector<std::uint32_t> leaf_of_;
  std::vector<std::vector<std::uint32_t>> ancestors_;  // per point, index level-1
  std::vector<double> up_;
};

double tree_distance(const Hst& t, PointId a, PointId b);

// Random tree embedding of the metric with power-of-two scales. Dominating,
// depth at most ceil(log2 aspect) + 2, and deterministic for a given seed.
Hst frt_sample(const MetricSpace& m, std::uint64_t seed);

// "node <id> <parent|-> <level> <edge> [point]" per line.
void write_hst(std::ostream& out, const Hst& t);
Hst parse_hst(std::istream& in);

// Dynamic matching on the leaves of an HST. Clients and servers arrive and
// depart; all live clients stay matched.
class NearestMatch {
 public:
  struct Result {
    std::uint32_t subject;          // id of the arriving entity, or the departed one
    std::size_t recourse;           // clients whose server changed, counting a new client once
    std::vector<ClientId> moved;
  };

  NearestMatch(const Hst& tree, std::span<const PointId> initial_servers);

  Result client_arrival(PointId p);
  Result server_arrival(PointId p);
  Result client_departure(ClientId c);
  Result server_departure(ServerId s);

  const Hst& tree() const noexcept { return *tree_; }
  const Matching& matching() const noexcept { return matching_; }
  bool client_alive(ClientId c) const { return client_alive_.at(c); }
  bool server_alive(ServerId s) const { return server_alive_.at(s); }
  PointId client_point(ClientId c) const { return client_point_.at(c); }
  PointId server_point(ServerId s) const { return server_point_.at(s); }
  std::size_t num_client_ids() const noexcept { return client_point_.size(); }
  std::size_t num_server_ids() const noexcept { return server_point_.size(); }
  std::vector<PointId> live_client_points() const;
  std::vector<PointId> live_server_points() const;
  std::size_t live_clients() const noexcept { return live_clients_; }
  std::size_t live_servers() const noexcept { return live_servers_; }

  // Cost of the current matching under the given metric on the same points.
  template <Metric M>
  typename M::cost_type cost(const M& metric) const {
    typename M::cost_type total{};
    for (auto [c, s] : matching_.pairs()) total += metric.distance(client_point_[c], server_point_[s]);
    return total;
  }

 private:
  void link(ClientId c, ServerId s);
  void unlink(ClientId c);
  void place_client(ClientId c, unsigned level, Result& r);
  void place_server(ServerId s, unsigned level, Result& r);

  const Hst* tree_;
  Matching matching_;
  std::vector<PointId> client_point_;
  std::vector<PointId> server_point_;
  std::vector<char> client_alive_;
  std::vector<char> server_alive_;
  std::size_t live_clients_ = 0;
  std::size_t live_servers_ = 0;
  std::vector<std::set<ServerId>> free_;       // free live servers below each node
  std::vector<std::set<ServerId>> out_servers_;  // servers below matched to a client outside
  std::vector<std::set<ClientId>> out_clients_;  // clients below matched to a server outside
};

// For every node, the number of its clients matched outside the subtree must
// equal max(0, clients - servers) in the subtree. First violation, or nullopt.
std::optional<std::string> check_subtree_discrepancy(const NearestMatch& nm);

}  // namespace rematch

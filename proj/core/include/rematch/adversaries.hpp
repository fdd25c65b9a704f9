#pragma once

#include <cstdint>
#include <vector>

#include "rematch/matching.hpp"
#include "rematch/metric.hpp"

namespace rematch {

// n servers and k clients. Line: distinct coordinates drawn from [0, 10^6].
// General: points in the 1000 x 1000 square with Euclidean distances.
Instance gen_random_line(std::size_t n, std::size_t k, std::uint64_t seed);
Instance gen_random_general(std::size_t n, std::size_t k, std::uint64_t seed);

// n clients and n servers on alternating sides, so that the optimal matchings
// of the prefixes are nested and every prefix optimum rematches all clients.
Instance gen_line_alternating(std::size_t n);

// One block of k clients whose optimal servers sit to their right, followed by
// k clients further right whose only remaining servers lie far to the left.
Instance gen_recursive_cancel_bad(std::size_t k);

// Core and auxiliary arrivals interleaved by the block structure of base d.
// Coordinates are scaled by 8. Requires odd d >= 3 and k a power of d.
Instance gen_batchperm_tight(std::size_t k, unsigned d);

// Adaptive adversary on a star with n leaves: point 0 is the center and
// server i sits at leaf i + 1.
class StarAdversary {
 public:
  explicit StarAdversary(std::size_t leaves);

  const GeneralMetric& metric() const noexcept { return metric_; }
  const std::vector<PointId>& servers() const noexcept { return servers_; }
  const std::vector<PointId>& emitted() const noexcept { return clients_; }
  bool done() const noexcept { return clients_.size() >= servers_.size(); }

  // Next client location given the algorithm's current matching of the
  // clients emitted so far.
  PointId next(const Matching& current);

 private:
  GeneralMetric metric_;
  std::vector<PointId> servers_;
  std::vector<PointId> clients_;
  std::vector<ClientId> client_at_leaf_;
};

struct PathDiagnostic {
  std::size_t path_length;  // clients on the chain starting at client 0
  double normalized_cost;
  bool single_chain;        // every client off the chain sits on its own server
  Matching normalized;
};

// Repeatedly moves a leaf client onto the free server at its own leaf, then
// follows the chain from client 0. Throws std::invalid_argument unless the
// metric is a star with servers at the leaves.
PathDiagnostic path_diagnostic(const GeneralMetric& star, const std::vector<PointId>& servers,
                               const std::vector<PointId>& clients, const Matching& m);

}  // namespace rematch

#include "rematch/assignment.hpp"

namespace rematch {

OptResult<Distance> min_cost_matching(const Instance& inst) {
  return std::visit(
      [&](const auto& metric) -> OptResult<Distance> {
        auto r = min_cost_matching(metric, inst.clients, inst.servers);
        return {std::move(r.matching), r.cost};
      },
      inst.metric);
}

OptResult<Distance> brute_force_matching(const Instance& inst) {
  return std::visit(
      [&](const auto& metric) -> OptResult<Distance> {
        auto r = brute_force_matching(metric, inst.clients, inst.servers);
        return {std::move(r.matching), r.cost};
      },
      inst.metric);
}

}  // namespace rematch

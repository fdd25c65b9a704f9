#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rematch/adversaries.hpp"
#include "rematch/assignment.hpp"
#include "rematch/events.hpp"
#include "rematch/hst.hpp"

using namespace rematch;

namespace {

// Root at level 3 with two children A and B; A holds points 0,1 and B holds 2,3.
Hst two_by_two() {
  std::vector<HstNode> nodes = {
      {kNone, 3, 0, kNone, {}}, {0, 2, 2, kNone, {}}, {0, 2, 2, kNone, {}}, {1, 1, 1, 0, {}},
      {1, 1, 1, 1, {}},         {2, 1, 1, 2, {}},     {2, 1, 1, 3, {}},
  };
  return Hst(nodes);
}

}  // namespace

TEST(Hst, DistancesOnSmallTree) {
  Hst t = two_by_two();
  EXPECT_EQ(t.depth(), 3u);
  EXPECT_DOUBLE_EQ(tree_distance(t, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(tree_distance(t, 0, 1), 2.0);
  EXPECT_DOUBLE_EQ(tree_distance(t, 1, 2), 6.0);
  EXPECT_EQ(t.lca_level(0, 1), 2u);
  EXPECT_EQ(t.ancestor(3, 2), 2u);
}

TEST(Hst, PathSumAcrossRoot) {
  // chain of single children except at the root, edges 1, 2, 4
  std::vector<HstNode> nodes = {
      {kNone, 4, 0, kNone, {}}, {0, 3, 4, kNone, {}}, {0, 3, 4, kNone, {}}, {1, 2, 2, kNone, {}},
      {2, 2, 2, kNone, {}},     {3, 1, 1, 0, {}},     {4, 1, 1, 1, {}},
  };
  Hst t(nodes);
  EXPECT_DOUBLE_EQ(tree_distance(t, 0, 1), 14.0);
}

TEST(Hst, RejectsMalformedTrees) {
  std::vector<HstNode> uneven = {{kNone, 2, 0, kNone, {}}, {0, 1, 1, 0, {}}, {0, 1, 2, 1, {}}};
  EXPECT_THROW(Hst{uneven}, std::invalid_argument);
  std::vector<HstNode> skip = {{kNone, 3, 0, kNone, {}}, {0, 1, 1, 0, {}}};
  EXPECT_THROW(Hst{skip}, std::invalid_argument);
  std::vector<HstNode> no_root = {{1, 1, 1, 0, {}}};
  EXPECT_THROW(Hst{no_root}, std::invalid_argument);
}

TEST(Hst, TextRoundTrip) {
  auto inst = gen_random_general(12, 0, 3);
  Hst t = frt_sample(inst.metric, 5);
  std::stringstream ss;
  write_hst(ss, t);
  Hst back = parse_hst(ss);
  ASSERT_EQ(back.size(), t.size());
  EXPECT_EQ(back.depth(), t.depth());
  for (PointId a = 0; a < t.size(); ++a)
    for (PointId b = 0; b < t.size(); ++b) EXPECT_DOUBLE_EQ(back.distance(a, b), t.distance(a, b));
}

TEST(Frt, SinglePoint) {
  Hst t = frt_sample(LineMetric({7}), 1);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.size(), 1u);
}

TEST(Frt, TwoPointsDominate) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Hst t = frt_sample(LineMetric({0, 1}), seed);
    EXPECT_GE(t.distance(0, 1), 1.0);
  }
}

TEST(Frt, DominanceDepthAndDeterminism) {
  auto inst = gen_random_general(24, 0, 8);
  const auto& g = std::get<GeneralMetric>(inst.metric);
  const double limit = std::ceil(std::log2(aspect_ratio(inst.metric))) + 2;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Hst t = frt_sample(inst.metric, seed);
    EXPECT_LE(t.depth(), limit);
    for (PointId a = 0; a < g.size(); ++a)
      for (PointId b = a + 1; b < g.size(); ++b) ASSERT_GE(t.distance(a, b), g.distance(a, b));
    Hst again = frt_sample(inst.metric, seed);
    EXPECT_DOUBLE_EQ(again.distance(0, 5), t.distance(0, 5));
  }
}

TEST(NearestMatch, ClientOnFreeServerLeaf) {
  Hst t = two_by_two();
  std::vector<PointId> servers{1};
  NearestMatch nm(t, servers);
  auto r = nm.client_arrival(1);
  EXPECT_EQ(r.recourse, 1u);
  EXPECT_EQ(nm.matching().server_of(0), 0u);
  EXPECT_DOUBLE_EQ(nm.cost(t), 0.0);
}

TEST(NearestMatch, StealAndCascade) {
  Hst t = two_by_two();
  std::vector<PointId> servers{1, 3};
  NearestMatch nm(t, servers);
  nm.client_arrival(2);  // takes the server at 3 inside B
  EXPECT_EQ(nm.matching().server_of(0), 1u);
  auto r = nm.client_arrival(3);
  EXPECT_EQ(r.recourse, 2u);
  EXPECT_EQ(nm.matching().server_of(1), 1u);
  EXPECT_EQ(nm.matching().server_of(0), 0u);
  auto clients = nm.live_client_points();
  auto live = nm.live_server_points();
  auto tm = t.to_metric();
  EXPECT_DOUBLE_EQ(nm.cost(t), brute_force_matching(tm, std::span<const PointId>(clients),
                                                    std::span<const PointId>(live)).cost);
  EXPECT_FALSE(check_subtree_discrepancy(nm));
}

TEST(NearestMatch, ServerDepartureReinsertsClient) {
  Hst t = two_by_two();
  std::vector<PointId> servers{0, 3};
  NearestMatch nm(t, servers);
  nm.client_arrival(0);
  auto r = nm.server_departure(0);
  EXPECT_EQ(r.recourse, 1u);
  EXPECT_EQ(nm.matching().server_of(0), 1u);
  EXPECT_THROW(nm.server_departure(1), InfeasibleError);
  EXPECT_THROW(nm.client_arrival(1), InfeasibleError);
}

TEST(NearestMatch, ClientDepartureKeepsInvariant) {
  Hst t = two_by_two();
  std::vector<PointId> servers{0, 2};
  NearestMatch nm(t, servers);
  nm.client_arrival(2);
  nm.client_arrival(3);  // crosses the root to the server at 0
  nm.client_departure(1);
  EXPECT_FALSE(check_subtree_discrepancy(nm));
  EXPECT_DOUBLE_EQ(nm.cost(t), 0.0);
}

TEST(NearestMatch, OptimalInTreeMetricOnRandomStreams) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto base = gen_random_general(20, 0, seed);
    std::vector<PointId> servers;
    for (PointId p = 0; p < 8; ++p) servers.push_back(p * 2);
    auto events = gen_random_events(20, servers.size(), 60, seed + 100);
    Hst t = frt_sample(base.metric, seed);
    auto tm = t.to_metric();
    NearestMatch nm(t, servers);
    for (const Event& e : events) {
      NearestMatch::Result r;
      switch (e.kind) {
        case EventKind::ClientArrival: r = nm.client_arrival(e.point); break;
        case EventKind::ServerArrival: r = nm.server_arrival(e.point); break;
        case EventKind::ClientDeparture: r = nm.client_departure(e.subject); break;
        case EventKind::ServerDeparture: r = nm.server_departure(e.subject); break;
      }
      ASSERT_LE(r.recourse, t.depth());
      ASSERT_FALSE(check_subtree_discrepancy(nm));
      auto clients = nm.live_client_points();
      auto live = nm.live_server_points();
      double opt = min_cost_matching(tm, std::span<const PointId>(clients), std::span<const PointId>(live)).cost;
      ASSERT_TRUE(cost_equal(nm.cost(tm), opt)) << "seed " << seed << " seq " << e.seq;
    }
  }
}

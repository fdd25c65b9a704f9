#include <gtest/gtest.h>

#include <sstream>

#include "rematch/adversaries.hpp"
#include "rematch/metric_io.hpp"

using namespace rematch;

namespace {

Instance round_trip(const Instance& inst) {
  std::stringstream ss;
  write_instance(ss, inst);
  return parse_instance(ss);
}

}  // namespace

TEST(InstanceIo, ParsesLineWithComments) {
  std::istringstream in(
      "# demo\n"
      "metric line\n"
      "point 1 10   # out of order ids are fine\n"
      "point 0 -4\n"
      "servers 0\n"
      "clients 1\n");
  Instance inst = parse_instance(in);
  const auto& m = std::get<LineMetric>(inst.metric);
  EXPECT_EQ(m.coord(0), -4);
  EXPECT_EQ(m.coord(1), 10);
  EXPECT_EQ(inst.servers, std::vector<PointId>{0});
  EXPECT_EQ(inst.clients, std::vector<PointId>{1});
}

TEST(InstanceIo, RoundTripLine) {
  auto inst = gen_random_line(12, 7, 4);
  auto back = round_trip(inst);
  EXPECT_EQ(std::get<LineMetric>(back.metric).coords().size(), 19u);
  EXPECT_TRUE(std::equal(std::get<LineMetric>(back.metric).coords().begin(),
                         std::get<LineMetric>(back.metric).coords().end(),
                         std::get<LineMetric>(inst.metric).coords().begin()));
  EXPECT_EQ(back.servers, inst.servers);
  EXPECT_EQ(back.clients, inst.clients);
}

TEST(InstanceIo, RoundTripGeneralIsExact) {
  auto inst = gen_random_general(6, 4, 9);
  auto back = round_trip(inst);
  auto a = std::get<GeneralMetric>(inst.metric).table();
  auto b = std::get<GeneralMetric>(back.metric).table();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(InstanceIo, StarIsCompact) {
  Instance inst{star_metric(5), {1, 2, 3, 4, 5}, {0}};
  std::stringstream ss;
  write_instance(ss, inst);
  EXPECT_NE(ss.str().find("metric star"), std::string::npos);
  auto back = parse_instance(ss);
  EXPECT_TRUE(is_star(std::get<GeneralMetric>(back.metric)));
  EXPECT_EQ(back.servers.size(), 5u);
}

TEST(InstanceIo, ErrorsCarryLineNumbers) {
  std::istringstream bad_kind("metric torus\nn 3\n");
  EXPECT_THROW(parse_instance(bad_kind), ParseError);

  std::istringstream dup("metric line\npoint 0 1\npoint 1 1\n");
  EXPECT_THROW(parse_instance(dup), ParseError);

  std::istringstream range("metric line\npoint 0 1\nservers 3\n");
  try {
    parse_instance(range);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }

  std::istringstream short_row("metric general\nn 2\n0 1\n1\n");
  EXPECT_THROW(parse_instance(short_row), ParseError);
}

TEST(MetricIo, MetricOnlyFiles) {
  std::stringstream ss;
  write_metric(ss, LineMetric({5, 2}));
  auto m = parse_metric(ss);
  EXPECT_EQ(std::get<LineMetric>(m).coord(0), 5);
  std::istringstream with_points("metric line\npoint 0 1\nclients 0\n");
  EXPECT_THROW(parse_metric(with_points), ParseError);
}

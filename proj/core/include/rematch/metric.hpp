#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rematch {

using PointId = std::uint32_t;

// Exact for line metrics, floating for everything else.
using Distance = std::variant<std::int64_t, double>;

double to_double(const Distance& d) noexcept;
std::string to_string(const Distance& d);

class InvalidPointError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

template <class M>
concept Metric = requires(const M& m, PointId a, PointId b) {
  typename M::cost_type;
  { m.size() } -> std::convertible_to<std::size_t>;
  { m.distance(a, b) } -> std::same_as<typename M::cost_type>;
};

class LineMetric {
 public:
  using cost_type = std::int64_t;
  static constexpr std::int64_t kMaxAbsCoordinate = std::int64_t{1} << 40;

  LineMetric() = default;
  explicit LineMetric(std::vector<std::int64_t> coords);

  std::size_t size() const noexcept { return coords_.size(); }
  std::int64_t coord(PointId p) const;
  std::int64_t distance(PointId a, PointId b) const;
  std::span<const std::int64_t> coords() const noexcept { return coords_; }

  // Point at coordinate x, if any.
  std::optional<PointId> find(std::int64_t x) const;

 private:
  std::vector<std::int64_t> coords_;
  std::vector<PointId> by_coord_;
};

class GeneralMetric {
 public:
  using cost_type = double;

  GeneralMetric() = default;
  // Row-major n*n table. Shape and non-negativity are checked here,
  // the metric axioms by validate_metric.
  GeneralMetric(std::size_t n, std::vector<double> table);

  std::size_t size() const noexcept { return n_; }
  double distance(PointId a, PointId b) const;
  std::span<const double> row(PointId a) const;
  std::span<const double> table() const noexcept { return table_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> table_;
};

using MetricSpace = std::variant<LineMetric, GeneralMetric>;

std::size_t size(const MetricSpace& m) noexcept;
Distance distance(const MetricSpace& m, PointId a, PointId b);
bool is_line(const MetricSpace& m) noexcept;

// Dense table view of any metric (a line becomes a general table).
GeneralMetric to_general(const MetricSpace& m);

struct MetricViolation {
  enum class Kind { Negative, Identity, Symmetry, Triangle };
  Kind kind;
  PointId i;
  PointId j;  // intermediate point for Triangle
  PointId k;
  double lhs;
  double rhs;

  std::string describe() const;
};

// First violation in (i, k, j) scan order, or nullopt. Relative tolerance 1e-9.
std::optional<MetricViolation> validate_metric(const GeneralMetric& m);
std::optional<MetricViolation> validate_metric(const MetricSpace& m);

// Largest over smallest nonzero distance. Throws std::domain_error when fewer
// than two points are at positive distance.
double aspect_ratio(const MetricSpace& m);

// Point 0 is the center, points 1..leaves are leaves at distance 1 from it.
GeneralMetric star_metric(std::size_t leaves);
bool is_star(const GeneralMetric& m);

}  // namespace rematch

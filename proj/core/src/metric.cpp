#include "rematch/metric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace rematch {

double to_double(const Distance& d) noexcept {
  return std::visit([](auto v) { return static_cast<double>(v); }, d);
}

std::string to_string(const Distance& d) {
  if (auto i = std::get_if<std::int64_t>(&d)) return std::to_string(*i);
  double v = std::get<double>(d);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

LineMetric::LineMetric(std::vector<std::int64_t> coords) : coords_(std::move(coords)) {
  by_coord_.resize(coords_.size());
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i] > kMaxAbsCoordinate || coords_[i] < -kMaxAbsCoordinate)
      throw std::invalid_argument("line coordinate out of range: " + std::to_string(coords_[i]));
    by_coord_[i] = static_cast<PointId>(i);
  }
  std::sort(by_coord_.begin(), by_coord_.end(),
            [&](PointId a, PointId b) { return coords_[a] < coords_[b]; });
  for (std::size_t i = 1; i < by_coord_.size(); ++i) {
    if (coords_[by_coord_[i]] == coords_[by_coord_[i - 1]])
      throw std::invalid_argument("duplicate line coordinate " +
                                  std::to_string(coords_[by_coord_[i]]));
  }
}

std::int64_t LineMetric::coord(PointId p) const {
  if (p >= coords_.size()) throw InvalidPointError("point id " + std::to_string(p) + " out of range");
  return coords_[p];
}

std::int64_t LineMetric::distance(PointId a, PointId b) const {
  std::int64_t d = coord(a) - coord(b);
  return d < 0 ? -d : d;
}

std::optional<PointId> LineMetric::find(std::int64_t x) const {
  auto it = std::lower_bound(by_coord_.begin(), by_coord_.end(), x,
                             [&](PointId p, std::int64_t v) { return coords_[p] < v; });
  if (it == by_coord_.end() || coords_[*it] != x) return std::nullopt;
  return *it;
}

GeneralMetric::GeneralMetric(std::size_t n, std::vector<double> table)
    : n_(n), table_(std::move(table)) {
  if (table_.size() != n_ * n_)
    throw std::invalid_argument("distance table has " + std::to_string(table_.size()) +
                                " entries, expected " + std::to_string(n_ * n_));
  for (double v : table_) {
    if (!std::isfinite(v) || v < 0) throw std::invalid_argument("distance table entry is negative or not finite");
  }
}

double GeneralMetric::distance(PointId a, PointId b) const {
  if (a >= n_ || b >= n_) throw InvalidPointError("point id out of range");
  return table_[static_cast<std::size_t>(a) * n_ + b];
}

std::span<const double> GeneralMetric::row(PointId a) const {
  if (a >= n_) throw InvalidPointError("point id out of range");
  return std::span<const double>(table_).subspan(static_cast<std::size_t>(a) * n_, n_);
}

std::size_t size(const MetricSpace& m) noexcept {
  return std::visit([](const auto& x) { return x.size(); }, m);
}

Distance distance(const MetricSpace& m, PointId a, PointId b) {
  return std::visit([&](const auto& x) -> Distance { return x.distance(a, b); }, m);
}

bool is_line(const MetricSpace& m) noexcept { return std::holds_alternative<LineMetric>(m); }

GeneralMetric to_general(const MetricSpace& m) {
  if (auto g = std::get_if<GeneralMetric>(&m)) return *g;
  const auto& line = std::get<LineMetric>(m);
  std::size_t n = line.size();
  std::vector<double> table(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      table[i * n + j] = static_cast<double>(line.distance(static_cast<PointId>(i), static_cast<PointId>(j)));
  return GeneralMetric(n, std::move(table));
}

std::string MetricViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Negative:
      os << "negative distance d(" << i << "," << k << ") = " << lhs;
      break;
    case Kind::Identity:
      os << "d(" << i << "," << i << ") = " << lhs << " is not zero";
      break;
    case Kind::Symmetry:
      os << "d(" << i << "," << k << ") = " << lhs << " != d(" << k << "," << i << ") = " << rhs;
      break;
    case Kind::Triangle:
      os << "d(" << i << "," << k << ") = " << lhs << " > d(" << i << "," << j << ") + d(" << j << ","
         << k << ") = " << rhs;
      break;
  }
  return os.str();
}

std::optional<MetricViolation> validate_metric(const GeneralMetric& m) {
  const std::size_t n = m.size();
  constexpr double tol = 1e-9;
  auto close = [&](double a, double b) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (PointId i = 0; i < n; ++i) {
    if (m.distance(i, i) != 0)
      return MetricViolation{MetricViolation::Kind::Identity, i, i, i, m.distance(i, i), 0};
    for (PointId k = 0; k < n; ++k) {
      double d = m.distance(i, k);
      if (d < 0) return MetricViolation{MetricViolation::Kind::Negative, i, k, k, d, 0};
      if (!close(d, m.distance(k, i)))
        return MetricViolation{MetricViolation::Kind::Symmetry, i, k, k, d, m.distance(k, i)};
    }
  }
  for (PointId i = 0; i < n; ++i) {
    for (PointId k = 0; k < n; ++k) {
      double d = m.distance(i, k);
      for (PointId j = 0; j < n; ++j) {
        double via = m.distance(i, j) + m.distance(j, k);
        if (d > via + tol * std::max(1.0, d))
          return MetricViolation{MetricViolation::Kind::Triangle, i, j, k, d, via};
      }
    }
  }
  return std::nullopt;
}

std::optional<MetricViolation> validate_metric(const MetricSpace& m) {
  // Line metrics are valid by construction.
  if (auto g = std::get_if<GeneralMetric>(&m)) return validate_metric(*g);
  return std::nullopt;
}

double aspect_ratio(const MetricSpace& m) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0;
  if (auto line = std::get_if<LineMetric>(&m)) {
    if (line->size() >= 2) {
      std::vector<std::int64_t> xs(line->coords().begin(), line->coords().end());
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 1; i < xs.size(); ++i) lo = std::min(lo, static_cast<double>(xs[i] - xs[i - 1]));
      hi = static_cast<double>(xs.back() - xs.front());
    }
  } else {
    const auto& g = std::get<GeneralMetric>(m);
    for (double v : g.table()) {
      if (v > 0) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (hi <= 0) throw std::domain_error("aspect ratio needs two points at positive distance");
  return hi / lo;
}

GeneralMetric star_metric(std::size_t leaves) {
  std::size_t n = leaves + 1;
  std::vector<double> table(n * n, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    table[i * n + i] = 0;
    if (i > 0) table[i] = table[i * n] = 1.0;
  }
  return GeneralMetric(n, std::move(table));
}

bool is_star(const GeneralMetric& m) {
  const std::size_t n = m.size();
  if (n < 2) return false;
  for (PointId i = 0; i < n; ++i)
    for (PointId j = 0; j < n; ++j) {
      double want = i == j ? 0.0 : (i == 0 || j == 0) ? 1.0 : 2.0;
      if (m.distance(i, j) != want) return false;
    }
  return true;
}

}  // namespace rematch

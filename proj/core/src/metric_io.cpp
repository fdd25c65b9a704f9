#include "rematch/metric_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace rematch {
namespace {

struct Lines {
  std::istream& in;
  std::size_t number = 0;

  // Next non-empty line with comments stripped, split into tokens.
  std::optional<std::vector<std::string>> next() {
    std::string raw;
    while (std::getline(in, raw)) {
      ++number;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      std::istringstream ss(raw);
      std::vector<std::string> toks;
      for (std::string t; ss >> t;) toks.push_back(t);
      if (!toks.empty()) return toks;
    }
    return std::nullopt;
  }
};

template <class T>
T parse_number(const std::string& tok, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(line, "bad number '" + tok + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

MetricSpace parse_metric_body(Lines& lines, const std::string& kind, std::optional<std::vector<std::string>>& pending) {
  pending.reset();
  if (kind == "line") {
    std::vector<std::optional<std::int64_t>> coords;
    while (auto toks = lines.next()) {
      if ((*toks)[0] != "point") {
        pending = toks;
        break;
      }
      if (toks->size() != 3) throw ParseError(lines.number, "expected: point <id> <coord>");
      auto id = parse_number<std::uint32_t>((*toks)[1], lines.number);
      auto x = parse_number<std::int64_t>((*toks)[2], lines.number);
      if (id >= coords.size()) coords.resize(id + 1);
      if (coords[id]) throw ParseError(lines.number, "point " + std::to_string(id) + " defined twice");
      coords[id] = x;
    }
    std::vector<std::int64_t> xs;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (!coords[i]) throw ParseError(lines.number, "point " + std::to_string(i) + " missing");
      xs.push_back(*coords[i]);
    }
    try {
      return LineMetric(std::move(xs));
    } catch (const std::invalid_argument& e) {
      throw ParseError(lines.number, e.what());
    }
  }
  auto header = lines.next();
  if (!header || (*header)[0] != "n" || header->size() != 2) throw ParseError(lines.number, "expected: n <count>");
  auto n = parse_number<std::size_t>((*header)[1], lines.number);
  if (kind == "star") return star_metric(n);
  if (kind != "general") throw ParseError(lines.number, "unknown metric kind '" + kind + "'");
  std::vector<double> table;
  table.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    auto toks = lines.next();
    if (!toks || toks->size() != n) throw ParseError(lines.number, "expected a row of " + std::to_string(n) + " distances");
    for (const auto& t : *toks) table.push_back(parse_number<double>(t, lines.number));
  }
  try {
    return GeneralMetric(n, std::move(table));
  } catch (const std::invalid_argument& e) {
    throw ParseError(lines.number, e.what());
  }
}

}  // namespace

Instance parse_instance(std::istream& in) {
  Lines lines{in};
  auto first = lines.next();
  if (!first || (*first)[0] != "metric" || first->size() != 2) throw ParseError(lines.number, "expected: metric <kind>");
  std::optional<std::vector<std::string>> pending;
  Instance inst{parse_metric_body(lines, (*first)[1], pending), {}, {}};
  for (;;) {
    auto toks = pending ? pending : lines.next();
    pending.reset();
    if (!toks) break;
    const auto& key = (*toks)[0];
    std::vector<PointId>* dst = key == "servers" ? &inst.servers : key == "clients" ? &inst.clients : nullptr;
    if (!dst) throw ParseError(lines.number, "unexpected '" + key + "'");
    for (std::size_t i = 1; i < toks->size(); ++i) {
      auto p = parse_number<PointId>((*toks)[i], lines.number);
      if (p >= size(inst.metric)) throw ParseError(lines.number, "point " + std::to_string(p) + " out of range");
      dst->push_back(p);
    }
  }
  return inst;
}

Instance read_instance_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return parse_instance(f);
}

MetricSpace parse_metric(std::istream& in) {
  Instance inst = parse_instance(in);
  if (!inst.servers.empty() || !inst.clients.empty()) throw ParseError(0, "metric file lists servers or clients");
  return std::move(inst.metric);
}

void write_metric(std::ostream& out, const MetricSpace& m) {
  if (auto line = std::get_if<LineMetric>(&m)) {
    out << "metric line\n";
    for (PointId i = 0; i < line->size(); ++i) out << "point " << i << ' ' << line->coord(i) << '\n';
    return;
  }
  const auto& g = std::get<GeneralMetric>(m);
  if (is_star(g)) {
    out << "metric star\nn " << g.size() - 1 << '\n';
    return;
  }
  out << "metric general\nn " << g.size() << '\n';
  for (PointId i = 0; i < g.size(); ++i) {
    auto row = g.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << format_double(row[j]);
    out << '\n';
  }
}

void write_instance(std::ostream& out, const Instance& inst) {
  write_metric(out, inst.metric);
  out << "servers";
  for (PointId p : inst.servers) out << ' ' << p;
  out << "\nclients";
  for (PointId p : inst.clients) out << ' ' << p;
  out << '\n';
}

}  // namespace rematch

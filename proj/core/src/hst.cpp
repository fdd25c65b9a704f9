#include "rematch/hst.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace rematch {

Hst::Hst(std::vector<HstNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("tree has no nodes");
  if (nodes_[0].parent != kNone) throw std::invalid_argument("node 0 must be the root");
  const unsigned depth = nodes_[0].level;
  if (depth < 1) throw std::invalid_argument("root level must be at least 1");
  for (auto& n : nodes_) n.children.clear();
  std::vector<double> edge_at(depth + 1, -1);
  std::size_t points = 0;
  for (std::uint32_t i = 1; i < nodes_.size(); ++i) {
    const HstNode& n = nodes_[i];
    if (n.parent >= nodes_.size() || n.parent == i) throw std::invalid_argument("node " + std::to_string(i) + " has a bad parent");
    if (n.level + 1 != nodes_[n.parent].level)
      throw std::invalid_argument("node " + std::to_string(i) + " is not one level below its parent");
    if (!(n.edge > 0)) throw std::invalid_argument("node " + std::to_string(i) + " has a non-positive edge");
    if (edge_at[n.level] < 0)
      edge_at[n.level] = n.edge;
    else if (edge_at[n.level] != n.edge)
      throw std::invalid_argument("edges at level " + std::to_string(n.level) + " differ");
    nodes_[n.parent].children.push_back(i);
  }
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    const HstNode& n = nodes_[i];
    if (n.point != kNone) {
      if (n.level != 1) throw std::invalid_argument("point leaf above level 1");
      points = std::max<std::size_t>(points, n.point + 1);
    } else if (n.children.empty()) {
      throw std::invalid_argument("internal node " + std::to_string(i) + " has no children");
    }
  }
  for (unsigned l = 1; l + 1 < depth; ++l)
    if (edge_at[l] > 0 && edge_at[l + 1] > 0 && edge_at[l + 1] < 2 * edge_at[l] * (1 - 1e-12))
      throw std::invalid_argument("edge lengths do not double per level");
  leaf_of_.assign(points, kNone);
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    PointId p = nodes_[i].point;
    if (p == kNone) continue;
    if (leaf_of_[p] != kNone) throw std::invalid_argument("point " + std::to_string(p) + " has two leaves");
    leaf_of_[p] = i;
  }
  for (PointId p = 0; p < points; ++p)
    if (leaf_of_[p] == kNone) throw std::invalid_argument("point " + std::to_string(p) + " has no leaf");
  ancestors_.resize(points);
  for (PointId p = 0; p < points; ++p) {
    for (std::uint32_t v = leaf_of_[p]; v != kNone; v = nodes_[v].parent) ancestors_[p].push_back(v);
    if (ancestors_[p].size() != depth) throw std::invalid_argument("leaf depth mismatch");
  }
  up_.assign(depth + 1, 0);
  for (unsigned l = 2; l <= depth; ++l) up_[l] = up_[l - 1] + std::max(0.0, edge_at[l - 1]);
}

std::uint32_t Hst::ancestor(PointId p, unsigned level) const {
  const auto& a = ancestors_.at(p);
  if (level < 1 || level > a.size()) throw std::out_of_range("level out of range");
  return a[level - 1];
}

unsigned Hst::lca_level(PointId a, PointId b) const {
  const auto& x = ancestors_.at(a);
  const auto& y = ancestors_.at(b);
  unsigned l = 1;
  while (x[l - 1] != y[l - 1]) ++l;
  return l;
}

double Hst::distance(PointId a, PointId b) const {
  if (a == b) {
    if (a >= size()) throw InvalidPointError("point id out of range");
    return 0;
  }
  return 2 * up_[lca_level(a, b)];
}

GeneralMetric Hst::to_metric() const {
  const std::size_t n = size();
  std::vector<double> table(n * n);
  for (PointId a = 0; a < n; ++a)
    for (PointId b = 0; b < n; ++b) table[a * n + b] = distance(a, b);
  return GeneralMetric(n, std::move(table));
}

double tree_distance(const Hst& t, PointId a, PointId b) { return t.distance(a, b); }

Hst frt_sample(const MetricSpace& m, std::uint64_t seed) {
  const std::size_t n = size(m);
  if (n == 0) throw std::invalid_argument("cannot embed an empty metric");
  std::vector<double> d(n * n);
  double base = 0;
  for (PointId i = 0; i < n; ++i)
    for (PointId j = 0; j < n; ++j) d[i * n + j] = to_double(distance(m, i, j));
  std::vector<HstNode> nodes;
  if (n == 1) {
    nodes.push_back({kNone, 1, 0, 0, {}});
    return Hst(std::move(nodes));
  }
  base = std::numeric_limits<double>::infinity();
  double far = 0;
  for (double v : d)
    if (v > 0) {
      base = std::min(base, v);
      far = std::max(far, v);
    }
  if (far == 0) throw std::domain_error("all points coincide");

  std::mt19937_64 rng(seed);
  std::vector<PointId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const double beta = std::exp2(std::uniform_real_distribution<double>(0.0, 1.0)(rng));

  // Cluster level i holds clusters of scaled diameter below 2^(i+1); leaves are level 0.
  const double aspect = far / base;
  int top = std::max(1, static_cast<int>(std::ceil(std::log2(aspect) - 1e-12)));
  while (std::exp2(top) < aspect) ++top;
  const unsigned depth = static_cast<unsigned>(top) + 1;

  nodes.push_back({kNone, depth, 0, kNone, {}});
  std::vector<std::pair<std::uint32_t, std::vector<PointId>>> clusters{{0, {}}};
  clusters[0].second.resize(n);
  std::iota(clusters[0].second.begin(), clusters[0].second.end(), 0);

  for (int i = top - 1; i >= 0; --i) {
    const double radius = beta * std::exp2(i - 1) * base;
    const unsigned level = static_cast<unsigned>(i) + 1;
    const double edge = base * std::exp2(level);
    std::vector<std::pair<std::uint32_t, std::vector<PointId>>> next;
    for (auto& [parent, members] : clusters) {
      std::vector<char> taken(members.size(), 0);
      std::size_t left = members.size();
      for (PointId center : order) {
        if (!left) break;
        std::vector<PointId> part;
        for (std::size_t k = 0; k < members.size(); ++k) {
          if (!taken[k] && d[center * n + members[k]] <= radius) {
            taken[k] = 1;
            part.push_back(members[k]);
          }
        }
        if (part.empty()) continue;
        left -= part.size();
        if (i == 0) {
          // Coincident points still get their own leaves.
          for (PointId p : part) {
            nodes.push_back({parent, level, edge, p, {}});
          }
        } else {
          nodes.push_back({parent, level, edge, kNone, {}});
          next.emplace_back(static_cast<std::uint32_t>(nodes.size() - 1), std::move(part));
        }
      }
    }
    clusters = std::move(next);
  }
  return Hst(std::move(nodes));
}

void write_hst(std::ostream& out, const Hst& t) {
  const auto& nodes = t.nodes();
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    const HstNode& n = nodes[i];
    out << "node " << i << ' ';
    if (n.parent == kNone)
      out << '-';
    else
      out << n.parent;
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, n.edge);
    out << ' ' << n.level << ' ' << std::string_view(buf, res.ptr - buf);
    if (n.point != kNone) out << ' ' << n.point;
    out << '\n';
  }
}

Hst parse_hst(std::istream& in) {
  std::vector<HstNode> nodes;
  std::string raw;
  std::size_t line = 0;
  auto num = [&](const std::string& tok, auto& v) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw std::invalid_argument("line " + std::to_string(line) + ": bad number '" + tok + "'");
  };
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    std::istringstream ss(raw);
    std::vector<std::string> tok;
    for (std::string s; ss >> s;) tok.push_back(s);
    if (tok.empty()) continue;
    if (tok[0] != "node" || tok.size() < 5 || tok.size() > 6)
      throw std::invalid_argument("line " + std::to_string(line) + ": expected node <id> <parent|-> <level> <edge> [point]");
    std::uint32_t id = 0;
    num(tok[1], id);
    HstNode n{kNone, 0, 0, kNone, {}};
    if (tok[2] != "-") num(tok[2], n.parent);
    num(tok[3], n.level);
    num(tok[4], n.edge);
    if (tok.size() == 6) num(tok[5], n.point);
    if (id >= nodes.size()) nodes.resize(id + 1, HstNode{kNone, 0, -1, kNone, {}});
    nodes[id] = n;
  }
  return Hst(std::move(nodes));
}

NearestMatch::NearestMatch(const Hst& tree, std::span<const PointId> initial_servers)
    : tree_(&tree), free_(tree.nodes().size()), out_servers_(tree.nodes().size()), out_clients_(tree.nodes().size()) {
  for (PointId p : initial_servers) {
    if (p >= tree.size()) throw InvalidPointError("server point out of range");
    ServerId s = matching_.add_server();
    server_point_.push_back(p);
    server_alive_.push_back(1);
    ++live_servers_;
    for (unsigned l = 1; l <= tree.depth(); ++l) free_[tree.ancestor(p, l)].insert(s);
  }
}

void NearestMatch::link(ClientId c, ServerId s) {
  const PointId cp = client_point_[c];
  const PointId sp = server_point_[s];
  const unsigned top = tree_->lca_level(cp, sp);
  for (unsigned l = 1; l <= tree_->depth(); ++l) free_[tree_->ancestor(sp, l)].erase(s);
  for (unsigned l = 1; l < top; ++l) {
    out_clients_[tree_->ancestor(cp, l)].insert(c);
    out_servers_[tree_->ancestor(sp, l)].insert(s);
  }
  matching_.match(c, s);
}

void NearestMatch::unlink(ClientId c) {
  const ServerId s = matching_.server_of(c);
  if (s == kNone) return;
  const PointId cp = client_point_[c];
  const PointId sp = server_point_[s];
  const unsigned top = tree_->lca_level(cp, sp);
  for (unsigned l = 1; l < top; ++l) {
    out_clients_[tree_->ancestor(cp, l)].erase(c);
    out_servers_[tree_->ancestor(sp, l)].erase(s);
  }
  matching_.unmatch_client(c);
  if (server_alive_[s])
    for (unsigned l = 1; l <= tree_->depth(); ++l) free_[tree_->ancestor(sp, l)].insert(s);
}

void NearestMatch::place_client(ClientId c, unsigned level, Result& r) {
  for (;;) {
    if (level > tree_->depth()) throw InfeasibleError("no server left for client " + std::to_string(c));
    const std::uint32_t v = tree_->ancestor(client_point_[c], level);
    if (!free_[v].empty()) {
      link(c, *free_[v].begin());
      return;
    }
    if (!out_servers_[v].empty()) {
      const ServerId s = *out_servers_[v].begin();
      const ClientId displaced = matching_.client_of(s);
      const unsigned next = tree_->lca_level(client_point_[displaced], server_point_[s]);
      unlink(displaced);
      link(c, s);
      r.moved.push_back(displaced);
      ++r.recourse;
      c = displaced;
      level = next;
      continue;
    }
    ++level;
  }
}

void NearestMatch::place_server(ServerId s, unsigned level, Result& r) {
  while (level < tree_->depth()) {
    const std::uint32_t v = tree_->ancestor(server_point_[s], level);
    if (out_clients_[v].empty()) {
      ++level;
      continue;
    }
    const ClientId c = *out_clients_[v].begin();
    const ServerId old = matching_.server_of(c);
    const unsigned next = tree_->lca_level(client_point_[c], server_point_[old]);
    unlink(c);
    link(c, s);
    r.moved.push_back(c);
    ++r.recourse;
    s = old;
    level = next;
  }
}

NearestMatch::Result NearestMatch::client_arrival(PointId p) {
  if (p >= tree_->size()) throw InvalidPointError("client point out of range");
  if (live_clients_ >= live_servers_) throw InfeasibleError("client arrival without a free server");
  const ClientId c = matching_.add_client();
  client_point_.push_back(p);
  client_alive_.push_back(1);
  ++live_clients_;
  Result r{c, 1, {c}};
  place_client(c, 1, r);
  return r;
}

NearestMatch::Result NearestMatch::server_arrival(PointId p) {
  if (p >= tree_->size()) throw InvalidPointError("server point out of range");
  const ServerId s = matching_.add_server();
  server_point_.push_back(p);
  server_alive_.push_back(1);
  ++live_servers_;
  for (unsigned l = 1; l <= tree_->depth(); ++l) free_[tree_->ancestor(p, l)].insert(s);
  Result r{s, 0, {}};
  place_server(s, 1, r);
  return r;
}

NearestMatch::Result NearestMatch::client_departure(ClientId c) {
  if (c >= client_alive_.size() || !client_alive_[c]) throw std::invalid_argument("client " + std::to_string(c) + " is not present");
  const ServerId s = matching_.server_of(c);
  unlink(c);
  client_alive_[c] = 0;
  --live_clients_;
  Result r{c, 0, {}};
  place_server(s, 1, r);
  return r;
}

NearestMatch::Result NearestMatch::server_departure(ServerId s) {
  if (s >= server_alive_.size() || !server_alive_[s]) throw std::invalid_argument("server " + std::to_string(s) + " is not present");
  if (live_clients_ >= live_servers_ && matching_.client_of(s) != kNone)
    throw InfeasibleError("server departure would leave a client unmatched");
  const ClientId c = matching_.client_of(s);
  if (c != kNone) unlink(c);
  server_alive_[s] = 0;
  --live_servers_;
  for (unsigned l = 1; l <= tree_->depth(); ++l) free_[tree_->ancestor(server_point_[s], l)].erase(s);
  Result r{s, 0, {}};
  if (c != kNone) {
    r.moved.push_back(c);
    r.recourse = 1;
    place_client(c, 1, r);
  }
  return r;
}

std::vector<PointId> NearestMatch::live_client_points() const {
  std::vector<PointId> out;
  for (ClientId c = 0; c < client_point_.size(); ++c)
    if (client_alive_[c]) out.push_back(client_point_[c]);
  return out;
}

std::vector<PointId> NearestMatch::live_server_points() const {
  std::vector<PointId> out;
  for (ServerId s = 0; s < server_point_.size(); ++s)
    if (server_alive_[s]) out.push_back(server_point_[s]);
  return out;
}

std::optional<std::string> check_subtree_discrepancy(const NearestMatch& nm) {
  const Hst& t = nm.tree();
  const std::size_t nodes = t.nodes().size();
  std::vector<std::int64_t> clients(nodes, 0), servers(nodes, 0), outside(nodes, 0);
  for (ClientId c = 0; c < nm.num_client_ids(); ++c) {
    if (!nm.client_alive(c)) continue;
    ServerId s = nm.matching().server_of(c);
    if (s == kNone) return "client " + std::to_string(c) + " is unmatched";
    unsigned top = t.lca_level(nm.client_point(c), nm.server_point(s));
    for (unsigned l = 1; l <= t.depth(); ++l) {
      std::uint32_t v = t.ancestor(nm.client_point(c), l);
      ++clients[v];
      if (l < top) ++outside[v];
    }
  }
  for (ServerId s = 0; s < nm.num_server_ids(); ++s) {
    if (!nm.server_alive(s)) continue;
    for (unsigned l = 1; l <= t.depth(); ++l) ++servers[t.ancestor(nm.server_point(s), l)];
  }
  for (std::uint32_t v = 0; v < nodes; ++v) {
    std::int64_t want = std::max<std::int64_t>(0, clients[v] - servers[v]);
    if (outside[v] != want)
      return "node " + std::to_string(v) + ": " + std::to_string(outside[v]) + " clients matched outside, expected " +
             std::to_string(want);
  }
  return std::nullopt;
}

}  // namespace rematch

#include "rematch/line.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rematch {
namespace {

// Crossing counts of forward and backward arcs over the elementary intervals
// of the sorted point list xs.
struct Crossings {
  std::vector<std::int64_t> nf;
  std::vector<std::int64_t> nb;
};

Crossings crossings(std::span<const Arc> arcs, const std::vector<std::int64_t>& xs) {
  Crossings out{std::vector<std::int64_t>(xs.size() + 1, 0), std::vector<std::int64_t>(xs.size() + 1, 0)};
  auto index = [&](std::int64_t x) {
    return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
  };
  for (const Arc& a : arcs) {
    std::size_t l = index(a.lo());
    std::size_t r = index(a.hi());
    if (l >= r) continue;
    auto& d = a.forward() ? out.nf : out.nb;
    d[l] += 1;
    d[r] -= 1;
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    out.nf[i] += out.nf[i - 1];
    out.nb[i] += out.nb[i - 1];
  }
  out.nf.resize(xs.size() ? xs.size() - 1 : 0);
  out.nb.resize(xs.size() ? xs.size() - 1 : 0);
  return out;
}

std::vector<Range> clip(const std::vector<Range>& ranges, std::int64_t lo, std::int64_t hi) {
  std::vector<Range> out;
  for (const Range& r : ranges) {
    std::int64_t a = std::max(r.lo, lo);
    std::int64_t b = std::min(r.hi, hi);
    if (a < b) out.push_back({a, b});
  }
  return out;
}

// Redundant length of [l, r] under the given ranges.
std::int64_t covered(const std::vector<Range>& ranges, std::int64_t l, std::int64_t r) {
  std::int64_t total = 0;
  for (const Range& g : ranges) total += std::max<std::int64_t>(0, std::min(g.hi, r) - std::max(g.lo, l));
  return total;
}

}  // namespace

std::vector<IntervalStats> interval_decomposition(std::span<const Arc> arcs) {
  std::vector<std::int64_t> xs;
  std::vector<std::pair<std::int64_t, int>> events;
  for (const Arc& a : arcs) {
    xs.push_back(a.client_x);
    xs.push_back(a.server_x);
    events.emplace_back(a.client_x, -1);
    events.emplace_back(a.server_x, +1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(events.begin(), events.end());
  auto cr = crossings(arcs, xs);
  std::vector<IntervalStats> out;
  std::int64_t disc = 0;
  std::size_t e = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    while (e < events.size() && events[e].first <= xs[i]) disc += events[e++].second;
    out.push_back({xs[i], xs[i + 1], disc, cr.nf[i], cr.nb[i]});
  }
  return out;
}

std::vector<Range> redundant_ranges(std::span<const Arc> arcs, std::int64_t cx, std::int64_t sx) {
  std::vector<std::int64_t> xs{cx, sx};
  for (const Arc& a : arcs) {
    for (std::int64_t x : {a.client_x, a.server_x})
      if (cx < x && x < sx) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  auto cr = crossings(arcs, xs);
  std::vector<Range> out;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (cr.nb[i] <= cr.nf[i]) continue;
    if (!out.empty() && out.back().hi == xs[i])
      out.back().hi = xs[i + 1];
    else
      out.push_back({xs[i], xs[i + 1]});
  }
  return out;
}

SweepResult sweep(std::span<const SweepPoint> points) {
  std::unordered_map<std::uint32_t, std::size_t> server_at;
  std::unordered_map<std::uint32_t, std::size_t> client_at;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && points[i].x <= points[i - 1].x) throw ContractError("sweep points are not sorted");
    auto& idx = points[i].is_server ? server_at : client_at;
    if (!idx.emplace(points[i].id, i).second) throw ContractError("sweep point listed twice");
  }
  for (const SweepPoint& p : points) {
    if (p.old_partner == kNone) continue;
    const auto& other = p.is_server ? client_at : server_at;
    auto it = other.find(p.old_partner);
    if (it == other.end() || points[it->second].old_partner != p.id)
      throw ContractError("sweep point has an old partner outside the list");
  }

  // The arriving client has no old server; it ranks as the farthest.
  constexpr std::int64_t kFarthest = std::numeric_limits<std::int64_t>::max();
  auto current_server_x = [&](const SweepPoint& c) {
    return c.old_partner == kNone ? kFarthest : points[server_at.at(c.old_partner)].x;
  };

  SweepResult res;
  std::vector<std::size_t> clients_in_l;
  constexpr std::size_t kEmpty = std::numeric_limits<std::size_t>::max();
  std::size_t server_in_l = kEmpty;
  std::set<std::uint32_t> lost;  // unvisited servers whose old client moved
  auto record = [&](std::size_t ci, std::size_t si) {
    const SweepPoint& c = points[ci];
    const SweepPoint& s = points[si];
    res.pairs.emplace_back(c.id, s.id);
    if (c.old_partner != kNone && c.old_partner != s.id) {
      std::size_t old = server_at.at(c.old_partner);
      if (old > si) lost.insert(c.old_partner);
      if (points[old].x <= s.x) res.shortened = false;
    }
    res.max_lost_unvisited = std::max(res.max_lost_unvisited, lost.size());
  };

  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& v = points[i];
    if (v.is_server) {
      lost.erase(v.id);
      if (server_in_l != kEmpty) throw ContractError("sweep met a second unmatched server");
      if (clients_in_l.empty()) {
        server_in_l = i;
        continue;
      }
      auto pick = clients_in_l.end();
      if (v.old_partner != kNone) {
        std::size_t oc = client_at.at(v.old_partner);
        pick = std::find(clients_in_l.begin(), clients_in_l.end(), oc);
      }
      if (pick == clients_in_l.end()) {
        pick = std::max_element(clients_in_l.begin(), clients_in_l.end(), [&](std::size_t a, std::size_t b) {
          return current_server_x(points[a]) < current_server_x(points[b]);
        });
      }
      std::size_t ci = *pick;
      clients_in_l.erase(pick);
      record(ci, i);
    } else if (server_in_l != kEmpty) {
      record(i, server_in_l);
      server_in_l = kEmpty;
    } else {
      clients_in_l.push_back(i);
    }
  }
  if (server_in_l != kEmpty || !clients_in_l.empty()) throw ContractError("sweep points are unbalanced");

  std::vector<Range> fresh;
  for (auto [c, s] : res.pairs) {
    const SweepPoint& cp = points[client_at.at(c)];
    const SweepPoint& sp = points[server_at.at(s)];
    if (cp.old_partner != s && cp.x < sp.x) fresh.push_back({cp.x, sp.x});
  }
  std::sort(fresh.begin(), fresh.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < fresh.size(); ++i)
    if (fresh[i].lo < fresh[i - 1].hi) res.new_forward_disjoint = false;
  return res;
}

LineMatcher::LineMatcher(const LineMetric& metric, std::vector<PointId> servers, LinePolicy policy)
    : metric_(&metric), policy_(policy), servers_(std::move(servers)), matching_(0, servers_.size()) {
  inner_.emplace(metric, servers_);
}

std::vector<Arc> LineMatcher::arcs() const {
  std::vector<Arc> out;
  for (auto [c, s] : matching_.pairs()) out.push_back({c, s, client_x(c), server_x(s)});
  return out;
}

std::int64_t LineMatcher::opt_cost() const {
  if (inner_) return inner_->offline().cost();
  return min_cost_matching(*metric_, std::span<const PointId>(clients_), std::span<const PointId>(servers_)).cost;
}

void LineMatcher::match(ClientId c, ServerId s) {
  if (ServerId old = matching_.server_of(c); old != kNone) cost_ -= metric_->distance(clients_[c], servers_[old]);
  if (ClientId old = matching_.client_of(s); old != kNone) {
    cost_ -= metric_->distance(clients_[old], servers_[s]);
    labels_[old].clear();
  }
  matching_.match(c, s);
  cost_ += metric_->distance(clients_[c], servers_[s]);
}

LineStep LineMatcher::arrive(PointId c) {
  if (!inner_) throw ContractError("arrive() after a caller-supplied server");
  if (c >= metric_->size()) throw InvalidPointError("client point out of range");
  ServerId s = inner_->arrive(c);
  clients_.push_back(c);
  labels_.emplace_back();
  return apply(matching_.add_client(), s);
}

LineStep LineMatcher::arrive_with_server(PointId c, ServerId s) {
  if (c >= metric_->size()) throw InvalidPointError("client point out of range");
  if (s >= servers_.size() || !matching_.server_free(s)) throw ContractError("supplied server is not free");
  inner_.reset();
  clients_.push_back(c);
  labels_.emplace_back();
  return apply(matching_.add_client(), s);
}

ClientId LineMatcher::place(PointId c, ServerId s) {
  if (c >= metric_->size()) throw InvalidPointError("client point out of range");
  if (s >= servers_.size() || !matching_.server_free(s)) throw ContractError("placed server is not free");
  inner_.reset();
  clients_.push_back(c);
  labels_.emplace_back();
  ClientId id = matching_.add_client();
  if (policy_ == LinePolicy::RecursiveCancel && client_x(id) < server_x(s)) {
    auto current = arcs();
    labels_[id] = redundant_ranges(current, client_x(id), server_x(s));
  }
  match(id, s);
  return id;
}

LineStep LineMatcher::apply(ClientId c, ServerId s) {
  LineStep step{s, server_x(s) < client_x(c), 1, {}, {}};
  if (!step.backward) {
    if (policy_ == LinePolicy::RecursiveCancel) {
      auto current = arcs();
      labels_[c] = redundant_ranges(current, client_x(c), server_x(s));
    }
    match(c, s);
    return step;
  }
  if (policy_ == LinePolicy::RecursiveCancel)
    recursive_cancel(c, s, step);
  else
    farthest_server(c, s, step);
  step.recourse = step.rematched.size() + 1;
  return step;
}

void LineMatcher::recursive_cancel(ClientId c, ServerId s, LineStep& step) {
  const std::int64_t sx = server_x(s);
  ClientId cur = c;
  for (;;) {
    const std::int64_t cur_x = client_x(cur);
    ClientId best = kNone;
    std::int64_t best_sx = 0;
    for (auto [c2, s2] : matching_.pairs()) {
      std::int64_t x = client_x(c2);
      std::int64_t y = server_x(s2);
      if (x < y && sx < x && x < cur_x && (best == kNone || y > best_sx)) {
        best = c2;
        best_sx = y;
      }
    }
    if (best == kNone) break;
    ServerId s2 = matching_.server_of(best);
    std::vector<Range> inherited = clip(labels_[best], cur_x, best_sx);
    matching_.unmatch_client(best);
    cost_ -= best_sx - client_x(best);
    labels_[best].clear();
    match(cur, s2);
    labels_[cur] = cur_x < best_sx ? std::move(inherited) : std::vector<Range>{};
    if (cur != c) step.rematched.push_back(cur);
    cur = best;
  }
  match(cur, s);
  labels_[cur].clear();
  if (cur != c) step.rematched.push_back(cur);
}

void LineMatcher::farthest_server(ClientId c, ServerId s, LineStep& step) {
  const std::int64_t sx = server_x(s);
  const std::int64_t cx = client_x(c);
  std::vector<SweepPoint> pts{{sx, true, s, kNone}, {cx, false, c, kNone}};
  std::map<ClientId, ServerId> before;
  for (auto [c2, s2] : matching_.pairs()) {
    std::int64_t x = client_x(c2);
    std::int64_t y = server_x(s2);
    if (x < y && sx <= x && x <= cx) {
      pts.push_back({x, false, c2, s2});
      pts.push_back({y, true, s2, c2});
      before.emplace(c2, s2);
    }
  }
  std::sort(pts.begin(), pts.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.x < b.x; });
  step.sweep = sweep(pts);
  for (auto [c2, s2] : before) {
    cost_ -= server_x(s2) - client_x(c2);
    matching_.unmatch_client(c2);
  }
  for (auto [c2, s2] : step.sweep.pairs) {
    match(c2, s2);
    if (auto it = before.find(c2); it != before.end() && it->second != s2) step.rematched.push_back(c2);
  }
  std::sort(step.rematched.begin(), step.rematched.end());
}

std::optional<std::string> check_no_free_server_inside_arcs(const LineMetric& metric, std::span<const PointId> servers,
                                                            const Matching& m, std::span<const Arc> arcs) {
  std::vector<std::pair<std::int64_t, ServerId>> free;
  for (ServerId s = 0; s < servers.size(); ++s)
    if (s >= m.num_servers() || m.server_free(s)) free.emplace_back(metric.coord(servers[s]), s);
  std::sort(free.begin(), free.end());
  for (const Arc& a : arcs) {
    auto it = std::upper_bound(free.begin(), free.end(), std::make_pair(a.lo(), std::numeric_limits<ServerId>::max()));
    if (it != free.end() && it->first < a.hi()) {
      std::ostringstream os;
      os << "free server " << it->second << " at " << it->first << " inside arc of client " << a.client << " ["
         << a.lo() << "," << a.hi() << "]";
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_no_free_server_inside_arcs(const LineMatcher& lm) {
  auto a = lm.arcs();
  return check_no_free_server_inside_arcs(lm.metric(), lm.servers(), lm.matching(), a);
}

std::optional<std::string> check_redundancy_count(const LineMatcher& lm) {
  auto arcs = lm.arcs();
  for (const IntervalStats& iv : interval_decomposition(arcs)) {
    std::int64_t redundant = 0;
    for (const Arc& a : arcs)
      if (a.forward() && a.covers(iv.left, iv.right) && covered(lm.labels(a.client), iv.left, iv.right) > 0)
        ++redundant;
    if (redundant != std::min(iv.nf, iv.nb)) {
      std::ostringstream os;
      os << "interval [" << iv.left << "," << iv.right << "] has " << redundant << " redundant forward arcs, nf="
         << iv.nf << " nb=" << iv.nb;
      return os.str();
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_suffix_domination(const LineMatcher& lm) {
  auto arcs = lm.arcs();
  std::vector<std::int64_t> xs;
  for (const Arc& a : arcs) {
    xs.push_back(a.client_x);
    xs.push_back(a.server_x);
  }
  std::sort(xs.begin(), xs.end());
  for (const Arc& a : arcs) {
    if (!a.forward()) continue;
    const auto& labels = lm.labels(a.client);
    auto lo = std::lower_bound(xs.begin(), xs.end(), a.client_x);
    auto hi = std::upper_bound(xs.begin(), xs.end(), a.server_x);
    for (auto it = lo; it != hi; ++it) {
      std::int64_t red = covered(labels, *it, a.server_x);
      std::int64_t len = a.server_x - *it;
      if (len - red < red) {
        std::ostringstream os;
        os << "suffix [" << *it << "," << a.server_x << "] of client " << a.client << " has redundant length " << red
           << " of " << len;
        return os.str();
      }
    }
  }
  return std::nullopt;
}

RedundancyTotals redundancy_totals(const LineMatcher& lm) {
  RedundancyTotals t;
  for (const Arc& a : lm.arcs()) {
    if (!a.forward()) continue;
    std::int64_t red = covered(lm.labels(a.client), a.client_x, a.server_x);
    t.redundant += red;
    t.non_redundant += a.server_x - a.client_x - red;
  }
  return t;
}

std::optional<std::string> check_redundant_cost(const LineMatcher& lm) {
  auto t = redundancy_totals(lm);
  if (t.redundant <= t.non_redundant) return std::nullopt;
  return "redundant forward cost " + std::to_string(t.redundant) + " exceeds non-redundant " +
         std::to_string(t.non_redundant);
}

}  // namespace rematch

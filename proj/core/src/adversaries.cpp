#include "rematch/adversaries.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "rematch/batchperm.hpp"

namespace rematch {
namespace {

Instance line_instance(const std::vector<std::int64_t>& servers, const std::vector<std::int64_t>& clients) {
  std::vector<std::int64_t> coords(servers);
  coords.insert(coords.end(), clients.begin(), clients.end());
  Instance inst{LineMetric(std::move(coords)), {}, {}};
  for (std::size_t i = 0; i < servers.size(); ++i) inst.servers.push_back(static_cast<PointId>(i));
  for (std::size_t i = 0; i < clients.size(); ++i) inst.clients.push_back(static_cast<PointId>(servers.size() + i));
  return inst;
}

}  // namespace

Instance gen_random_line(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("more clients than servers");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, 1'000'000);
  std::unordered_set<std::int64_t> seen;
  std::vector<std::int64_t> xs;
  while (xs.size() < n + k) {
    std::int64_t x = pick(rng);
    if (seen.insert(x).second) xs.push_back(x);
  }
  return line_instance(std::vector<std::int64_t>(xs.begin(), xs.begin() + n),
                       std::vector<std::int64_t>(xs.begin() + n, xs.end()));
}

Instance gen_random_general(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("more clients than servers");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 1000.0);
  const std::size_t total = n + k;
  std::vector<std::pair<double, double>> pts(total);
  for (auto& p : pts) {
    p.first = coord(rng);
    p.second = coord(rng);
  }
  std::vector<double> table(total * total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j)
      table[i * total + j] = i == j ? 0.0 : std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
  Instance inst{GeneralMetric(total, std::move(table)), {}, {}};
  for (std::size_t i = 0; i < n; ++i) inst.servers.push_back(static_cast<PointId>(i));
  for (std::size_t i = 0; i < k; ++i) inst.clients.push_back(static_cast<PointId>(n + i));
  return inst;
}

Instance gen_line_alternating(std::size_t n) {
  if (n == 0 || n % 2) throw std::invalid_argument("gen_line_alternating needs a positive even n");
  // Element j of either side sits at distance j^2 + j from the middle; the
  // quadratic spacing keeps every optimum of a prefix unique.
  auto left = [](std::int64_t j) { return -(j * j + j); };
  auto right = [](std::int64_t j) { return j * j + j + 1; };
  std::vector<std::int64_t> servers, clients;
  for (std::size_t t = 1; t <= n; ++t) {
    std::int64_t j = static_cast<std::int64_t>(t) - 1;
    bool odd = t % 2 == 1;
    clients.push_back(odd ? left(j) : right(j));
    servers.push_back(odd ? right(j) : left(j));
  }
  return line_instance(servers, clients);
}

Instance gen_recursive_cancel_bad(std::size_t k) {
  if (k == 0) throw std::invalid_argument("gen_recursive_cancel_bad needs k >= 1");
  const auto K = static_cast<std::int64_t>(k);
  std::vector<std::int64_t> servers, clients;
  for (std::int64_t i = 0; i < K; ++i) servers.push_back(K + i);        // right of the first block
  for (std::int64_t j = 0; j < K; ++j) servers.push_back(-2 * K - j);   // far left, nearest first
  for (std::int64_t i = 0; i < K; ++i) clients.push_back(i);
  for (std::int64_t j = 0; j < K; ++j) clients.push_back(2 * K + j);
  return line_instance(servers, clients);
}

Instance gen_batchperm_tight(std::size_t k, unsigned d) {
  if (d < 3 || d % 2 == 0) throw std::invalid_argument("gen_batchperm_tight needs an odd base d >= 3");
  std::size_t p = 1;
  while (p < k) p *= d;
  if (k == 0 || p != k) throw std::invalid_argument("gen_batchperm_tight needs k a power of d");
  const auto K = static_cast<std::int64_t>(k);
  const std::int64_t half = K / 2 + 1;
  const std::int64_t aux = 80 * K + 100;

  std::vector<std::int64_t> servers;
  for (std::int64_t j = 1; j <= half; ++j) {
    servers.push_back(8 * j);
    servers.push_back(-8 * j);
  }
  for (std::int64_t j = 0; j < K; ++j) servers.push_back(aux + 2 * j);

  auto core_client = [](std::int64_t i) -> std::int64_t {
    if (i == 0) return 1;
    std::int64_t j = (i + 1) / 2;
    return i % 2 ? 8 * j + 1 : -(8 * j + 1);
  };

  std::vector<char> is_core;
  std::vector<std::int64_t> clients;
  std::int64_t next_core = 0, next_aux = 0;
  for (std::uint64_t t = 1; t <= k; ++t) {
    bool core = true;
    unsigned i = block_exponent(t, d);
    if (i > 0) {
      std::uint64_t last = 1;
      for (unsigned e = 1; e < i; ++e) last *= d;
      std::size_t count = 0;
      for (std::uint64_t leaf = t - last + 1; leaf < t; ++leaf) count += is_core[leaf - 1];
      core = count % 2 == 0;
    }
    is_core.push_back(core);
    clients.push_back(core ? core_client(next_core++) : aux + 2 * next_aux++ + 1);
  }
  return line_instance(servers, clients);
}

StarAdversary::StarAdversary(std::size_t leaves) : metric_(star_metric(leaves)), client_at_leaf_(leaves + 1, kNone) {
  if (leaves == 0) throw std::invalid_argument("star needs at least one leaf");
  for (std::size_t i = 1; i <= leaves; ++i) servers_.push_back(static_cast<PointId>(i));
}

PointId StarAdversary::next(const Matching& current) {
  if (done()) throw std::logic_error("star adversary has emitted all clients");
  PointId at = 0;
  if (!clients_.empty()) {
    ClientId c = 0;
    for (std::size_t steps = 0;; ++steps) {
      if (steps > clients_.size()) throw ContractError("matching does not form a chain");
      ServerId s = current.server_of(c);
      if (s == kNone) throw ContractError("client " + std::to_string(c) + " is unmatched");
      PointId leaf = servers_[s];
      if (client_at_leaf_[leaf] == kNone) {
        at = leaf;
        break;
      }
      c = client_at_leaf_[leaf];
    }
  }
  if (at != 0) client_at_leaf_[at] = static_cast<ClientId>(clients_.size());
  clients_.push_back(at);
  return at;
}

PathDiagnostic path_diagnostic(const GeneralMetric& star, const std::vector<PointId>& servers,
                               const std::vector<PointId>& clients, const Matching& m) {
  if (!is_star(star)) throw std::invalid_argument("path_diagnostic needs a star metric");
  const std::size_t n = star.size();
  std::vector<ServerId> server_at(n, kNone);
  for (ServerId s = 0; s < servers.size(); ++s) {
    PointId p = servers[s];
    if (p == 0 || p >= n || server_at[p] != kNone) throw std::invalid_argument("servers must sit on distinct leaves");
    server_at[p] = s;
  }
  std::vector<ClientId> client_at(n, kNone);
  for (ClientId c = 0; c < clients.size(); ++c) {
    PointId p = clients[c];
    if (p >= n || client_at[p] != kNone) throw std::invalid_argument("clients must sit at distinct points");
    if ((c == 0) != (p == 0)) throw std::invalid_argument("only the first client may sit at the center");
    client_at[p] = c;
  }

  PathDiagnostic out{0, 0, true, m};
  Matching& mm = out.normalized;
  for (bool changed = true; changed;) {
    changed = false;
    for (ClientId c = 1; c < clients.size(); ++c) {
      ServerId home = server_at[clients[c]];
      if (home != kNone && mm.server_of(c) != home && mm.server_free(home)) {
        mm.match(c, home);
        changed = true;
      }
    }
  }
  std::vector<char> on_chain(clients.size(), 0);
  if (!clients.empty()) {
    ClientId c = 0;
    while (c != kNone && !on_chain[c]) {
      on_chain[c] = 1;
      ++out.path_length;
      ServerId s = mm.server_of(c);
      if (s == kNone) break;
      ClientId nxt = client_at[servers[s]];
      c = nxt == c ? kNone : nxt;
    }
  }
  for (ClientId c = 0; c < clients.size(); ++c) {
    ServerId s = mm.server_of(c);
    if (s != kNone) out.normalized_cost += star.distance(clients[c], servers[s]);
    if (!on_chain[c] && (s == kNone || servers[s] != clients[c])) out.single_chain = false;
  }
  return out;
}

}  // namespace rematch

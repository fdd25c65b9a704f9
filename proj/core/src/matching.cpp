#include "rematch/matching.hpp"

#include <string>

namespace rematch {

void Matching::match(ClientId c, ServerId s) {
  if (c >= server_of_.size() || s >= client_of_.size()) throw std::out_of_range("matching id out of range");
  if (server_of_[c] == s) return;
  unmatch_client(c);
  unmatch_server(s);
  server_of_[c] = s;
  client_of_[s] = c;
  ++matched_;
}

void Matching::unmatch_client(ClientId c) {
  ServerId s = server_of_.at(c);
  if (s == kNone) return;
  server_of_[c] = kNone;
  client_of_[s] = kNone;
  --matched_;
}

void Matching::unmatch_server(ServerId s) {
  ClientId c = client_of_.at(s);
  if (c == kNone) return;
  server_of_[c] = kNone;
  client_of_[s] = kNone;
  --matched_;
}

std::vector<std::pair<ClientId, ServerId>> Matching::pairs() const {
  std::vector<std::pair<ClientId, ServerId>> out;
  out.reserve(matched_);
  for (ClientId c = 0; c < server_of_.size(); ++c)
    if (server_of_[c] != kNone) out.emplace_back(c, server_of_[c]);
  return out;
}

std::vector<ServerId> Matching::used_servers() const {
  std::vector<ServerId> out;
  for (ServerId s = 0; s < client_of_.size(); ++s)
    if (client_of_[s] != kNone) out.push_back(s);
  return out;
}

void Instance::validate() const {
  const std::size_t n = size(metric);
  for (PointId p : servers)
    if (p >= n) throw InvalidPointError("server point " + std::to_string(p) + " out of range");
  for (PointId p : clients)
    if (p >= n) throw InvalidPointError("client point " + std::to_string(p) + " out of range");
  if (clients.size() > servers.size())
    throw InfeasibleError(std::to_string(clients.size()) + " clients but only " + std::to_string(servers.size()) +
                          " servers");
}

Distance matching_cost(const Instance& inst, const Matching& m) {
  return std::visit([&](const auto& metric) -> Distance { return matching_cost(metric, inst.clients, inst.servers, m); },
                    inst.metric);
}

}  // namespace rematch

#include "rematch/events.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include <json.hpp>

namespace rematch {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::ClientArrival: return "client_arrival";
    case EventKind::ClientDeparture: return "client_departure";
    case EventKind::ServerArrival: return "server_arrival";
    case EventKind::ServerDeparture: return "server_departure";
  }
  return "?";
}

EventKind parse_event_kind(const std::string& s) {
  if (s == "client_arrival") return EventKind::ClientArrival;
  if (s == "client_departure") return EventKind::ClientDeparture;
  if (s == "server_arrival") return EventKind::ServerArrival;
  if (s == "server_departure") return EventKind::ServerDeparture;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

static bool is_arrival(EventKind k) { return k == EventKind::ClientArrival || k == EventKind::ServerArrival; }

std::vector<Event> parse_events(std::istream& in) {
  std::vector<Event> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Event e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.kind = parse_event_kind(j.at("kind").get<std::string>());
      if (is_arrival(e.kind))
        e.point = j.at("point").get<PointId>();
      else
        e.subject = j.at("subject").get<std::uint32_t>();
      out.push_back(e);
    } catch (const std::exception& ex) {
      throw std::invalid_argument("event line " + std::to_string(number) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<Event> read_events_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return parse_events(f);
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
  for (const Event& e : events) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["kind"] = to_string(e.kind);
    if (is_arrival(e.kind))
      j["point"] = e.point;
    else
      j["subject"] = e.subject;
    out << j.dump() << '\n';
  }
}

void validate_events(std::size_t points, std::size_t initial_servers, const std::vector<Event>& events) {
  std::vector<char> client_live;
  std::vector<char> server_live(initial_servers, 1);
  std::size_t clients = 0, servers = initial_servers;
  for (const Event& e : events) {
    const std::string at = "event seq " + std::to_string(e.seq) + ": ";
    switch (e.kind) {
      case EventKind::ClientArrival:
        if (e.point >= points) throw std::invalid_argument(at + "point out of range");
        client_live.push_back(1);
        ++clients;
        break;
      case EventKind::ServerArrival:
        if (e.point >= points) throw std::invalid_argument(at + "point out of range");
        server_live.push_back(1);
        ++servers;
        break;
      case EventKind::ClientDeparture:
        if (e.subject >= client_live.size() || !client_live[e.subject])
          throw std::invalid_argument(at + "client " + std::to_string(e.subject) + " is not present");
        client_live[e.subject] = 0;
        --clients;
        break;
      case EventKind::ServerDeparture:
        if (e.subject >= server_live.size() || !server_live[e.subject])
          throw std::invalid_argument(at + "server " + std::to_string(e.subject) + " is not present");
        server_live[e.subject] = 0;
        --servers;
        break;
    }
    if (clients > servers) throw InfeasibleError(at + "more clients than servers");
  }
}

std::vector<Event> arrival_events(const Instance& inst) {
  std::vector<Event> out;
  for (std::size_t i = 0; i < inst.clients.size(); ++i)
    out.push_back({i + 1, EventKind::ClientArrival, inst.clients[i], kNone});
  return out;
}

std::vector<Event> gen_random_events(std::size_t points, std::size_t initial_servers, std::size_t count,
                                     std::uint64_t seed) {
  if (points == 0) throw std::invalid_argument("no points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointId> point(0, static_cast<PointId>(points - 1));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::uint32_t> live_clients;
  std::vector<std::uint32_t> live_servers(initial_servers);
  for (std::uint32_t s = 0; s < initial_servers; ++s) live_servers[s] = s;
  std::uint32_t next_client = 0, next_server = static_cast<std::uint32_t>(initial_servers);
  auto take = [&](std::vector<std::uint32_t>& v) {
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    std::size_t i = pick(rng);
    std::uint32_t id = v[i];
    v[i] = v.back();
    v.pop_back();
    return id;
  };
  std::vector<Event> out;
  for (std::uint64_t seq = 1; seq <= count; ++seq) {
    double r = coin(rng);
    Event e;
    e.seq = seq;
    bool can_add_client = live_clients.size() < live_servers.size();
    bool can_drop_server = live_servers.size() > live_clients.size() && !live_servers.empty();
    if (r < 0.4 && can_add_client) {
      e.kind = EventKind::ClientArrival;
      e.point = point(rng);
      live_clients.push_back(next_client++);
    } else if (r < 0.6 && !live_clients.empty()) {
      e.kind = EventKind::ClientDeparture;
      e.subject = take(live_clients);
    } else if (r < 0.8 && can_drop_server) {
      e.kind = EventKind::ServerDeparture;
      e.subject = take(live_servers);
    } else {
      e.kind = EventKind::ServerArrival;
      e.point = point(rng);
      live_servers.push_back(next_server++);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace rematch

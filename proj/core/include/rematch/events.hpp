#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rematch/matching.hpp"
#include "rematch/metric.hpp"

namespace rematch {

enum class EventKind { ClientArrival, ClientDeparture, ServerArrival, ServerDeparture };

std::string to_string(EventKind k);
EventKind parse_event_kind(const std::string& s);

// Arrivals carry a point, departures the id of the departing entity. Servers
// listed up front get ids 0..m-1 and arriving servers continue that numbering;
// clients are numbered by arrival.
struct Event {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ClientArrival;
  PointId point = kNone;
  std::uint32_t subject = kNone;

  friend bool operator==(const Event&, const Event&) = default;
};

// One JSON object per line, e.g. {"seq":3,"kind":"client_arrival","point":7}.
std::vector<Event> parse_events(std::istream& in);
std::vector<Event> read_events_file(const std::string& path);
void write_events(std::ostream& out, const std::vector<Event>& events);

// Checks ids, liveness and |servers| >= |clients| after every event. Throws
// InfeasibleError or std::invalid_argument naming the offending seq.
void validate_events(std::size_t points, std::size_t initial_servers, const std::vector<Event>& events);

// Arrivals-only stream for an instance.
std::vector<Event> arrival_events(const Instance& inst);

// Random feasible mixed stream over `points` points, starting from the given servers.
std::vector<Event> gen_random_events(std::size_t points, std::size_t initial_servers, std::size_t count,
                                     std::uint64_t seed);

}  // namespace rematch

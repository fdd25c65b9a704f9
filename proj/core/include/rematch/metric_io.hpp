#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rematch/matching.hpp"
#include "rematch/metric.hpp"

namespace rematch {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Text format, one directive per line, '#' starts a comment:
//
//   metric line              metric general          metric star
//   point <id> <coord>       n <points>              n <leaves>
//   ...                      <row 0>
//                            ...
//   servers <point ids...>
//   clients <point ids...>
//
// Star point 0 is the center. servers/clients may repeat; ids accumulate.
Instance parse_instance(std::istream& in);
Instance read_instance_file(const std::string& path);
void write_instance(std::ostream& out, const Instance& inst);

MetricSpace parse_metric(std::istream& in);
void write_metric(std::ostream& out, const MetricSpace& m);

}  // namespace rematch

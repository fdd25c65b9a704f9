#include "rematch/batchperm.hpp"

#include <stdexcept>

namespace rematch {

unsigned block_exponent(std::uint64_t t, unsigned d) {
  if (t == 0) throw std::domain_error("block_exponent needs t >= 1");
  if (d < 2) throw std::invalid_argument("block_exponent needs d >= 2");
  unsigned i = 0;
  while (t % d == 0) {
    t /= d;
    ++i;
  }
  return i;
}

std::vector<std::uint64_t> digit_blocks(std::uint64_t t, unsigned d) {
  if (d < 2) throw std::invalid_argument("digit_blocks needs d >= 2");
  std::vector<std::uint64_t> digits;
  for (std::uint64_t x = t; x; x /= d) digits.push_back(x % d);
  std::vector<std::uint64_t> out;
  for (std::size_t j = digits.size(); j-- > 0;) {
    std::uint64_t p = 1;
    for (std::size_t e = 0; e < j; ++e) p *= d;
    for (std::uint64_t a = 0; a < digits[j]; ++a) out.push_back(p);
  }
  return out;
}

unsigned digit_sum(std::uint64_t t, unsigned d) {
  if (d < 2) throw std::invalid_argument("digit_sum needs d >= 2");
  unsigned s = 0;
  for (; t; t /= d) s += static_cast<unsigned>(t % d);
  return s;
}

}  // namespace rematch

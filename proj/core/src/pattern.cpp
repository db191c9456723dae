#include "nsc/pattern.hpp"

#include <bit>
#include <stdexcept>

namespace nsc {

namespace {

void check_k(int k) {
  if (k < kMinVariables || k > kMaxVariables) {
    throw std::invalid_argument("pattern: K must be in [" + std::to_string(kMinVariables) + ", " +
                                std::to_string(kMaxVariables) + "], got " + std::to_string(k));
  }
}

}  // namespace

Pattern::Pattern(std::uint32_t index, int k) : index_(index), k_(k) {
  check_k(k);
  if (index >= (1u << k)) {
    throw std::invalid_argument("pattern: index " + std::to_string(index) + " out of range for K=" +
                                std::to_string(k));
  }
}

Pattern Pattern::encode(std::span<const int> bits) {
  const int k = static_cast<int>(bits.size());
  check_k(k);
  std::uint32_t index = 0;
  for (int i = 0; i < k; ++i) {
    if (bits[i] != 0 && bits[i] != 1) {
      throw std::invalid_argument("pattern: entries must be 0 or 1");
    }
    index |= static_cast<std::uint32_t>(bits[i]) << i;
  }
  return Pattern(index, k);
}

Pattern Pattern::parse(const std::string& bits) {
  std::vector<int> v;
  v.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("pattern: cannot parse '" + bits + "'");
    v.push_back(c - '0');
  }
  return encode(v);
}

Pattern Pattern::complete(int k) {
  check_k(k);
  return Pattern((1u << k) - 1u, k);
}

Pattern Pattern::leave_one_out(int k, int i) {
  check_k(k);
  if (i < 0 || i >= k) throw std::invalid_argument("pattern: variable index out of range");
  return Pattern(((1u << k) - 1u) & ~(1u << i), k);
}

std::vector<int> Pattern::decode() const {
  std::vector<int> bits(k_);
  for (int i = 0; i < k_; ++i) bits[i] = observed(i) ? 1 : 0;
  return bits;
}

int Pattern::n_missing() const { return std::popcount(missing_mask()); }

std::string Pattern::to_string() const {
  std::string s(k_, '0');
  for (int i = 0; i < k_; ++i) {
    if (observed(i)) s[i] = '1';
  }
  return s;
}

std::size_t pattern_count(int k) {
  check_k(k);
  return std::size_t{1} << k;
}

}  // namespace nsc

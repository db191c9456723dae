#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nsc {

inline constexpr int kMinVariables = 2;
inline constexpr int kMaxVariables = 20;

/// Missingness pattern over K partially observed variables.
///
/// Bit i (0-based) is set when L_{i+1} is observed, so the integer index is
/// sum_i bits_i * 2^i and the complete-case pattern is all ones.
class Pattern {
 public:
  Pattern() = default;
  Pattern(std::uint32_t index, int k);

  /// Encodes a 0/1 sequence of length K (first entry is L1).
  static Pattern encode(std::span<const int> bits);
  /// Parses "101"-style strings, first character is L1.
  static Pattern parse(const std::string& bits);
  static Pattern complete(int k);
  /// Pattern with only variable i (0-based) missing.
  static Pattern leave_one_out(int k, int i);

  std::vector<int> decode() const;

  std::uint32_t index() const { return index_; }
  int k() const { return k_; }
  bool observed(int i) const { return (index_ >> i) & 1u; }
  bool is_complete() const { return index_ == full_mask(); }
  std::uint32_t full_mask() const { return (1u << k_) - 1u; }
  std::uint32_t missing_mask() const { return full_mask() & ~index_; }
  int n_missing() const;
  std::string to_string() const;

  auto operator<=>(const Pattern&) const = default;

 private:
  std::uint32_t index_ = 0;
  int k_ = 0;
};

std::size_t pattern_count(int k);

}  // namespace nsc

#include "nsc/functional.hpp"

#include <charconv>
#include <stdexcept>

namespace nsc {

namespace {

int parse_coordinate(const std::string& token, int k) {
  if (token.size() < 2 || token[0] != 'L') throw std::invalid_argument("functional: expected L<index>, got '" + token + "'");
  int v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data() + 1, end, v);
  if (ec != std::errc() || ptr != end || v < 1 || v > k) {
    throw std::invalid_argument("functional: coordinate '" + token + "' out of range");
  }
  return v - 1;
}

}  // namespace

TargetFunctional TargetFunctional::mean(int i) {
  if (i < 0) throw std::invalid_argument("functional: negative coordinate");
  TargetFunctional f;
  f.kind_ = Kind::coordinate_mean;
  f.index_ = i;
  f.name_ = "mean:L" + std::to_string(i + 1);
  return f;
}

TargetFunctional TargetFunctional::product(std::uint32_t mask) {
  TargetFunctional f;
  f.kind_ = Kind::product;
  f.mask_ = mask;
  f.name_ = "product";
  if (mask != 0) {
    f.name_ += ":";
    for (int j = 0; j < 32; ++j) {
      if ((mask >> j) & 1u) f.name_ += "L" + std::to_string(j + 1);
    }
  }
  return f;
}

TargetFunctional TargetFunctional::cell(std::vector<int> cell) {
  TargetFunctional f;
  f.kind_ = Kind::cell_indicator;
  f.name_ = "cell:";
  for (int v : cell) {
    if (v != 0 && v != 1) throw std::invalid_argument("functional: cell entries must be 0 or 1");
    f.name_ += static_cast<char>('0' + v);
  }
  f.cell_ = std::move(cell);
  return f;
}

TargetFunctional TargetFunctional::custom(std::string name, Fn fn) {
  if (!fn) throw std::invalid_argument("functional: custom function is empty");
  TargetFunctional f;
  f.kind_ = Kind::custom;
  f.name_ = std::move(name);
  f.fn_ = std::move(fn);
  return f;
}

TargetFunctional TargetFunctional::parse(const std::string& text, int k) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "mean") return mean(parse_coordinate(rest, k));
  if (head == "product") {
    if (rest.empty()) return product();
    std::uint32_t mask = 0;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t next = rest.find('L', pos + 1);
      if (next == std::string::npos) next = rest.size();
      mask |= 1u << parse_coordinate(rest.substr(pos, next - pos), k);
      pos = next;
    }
    return product(mask);
  }
  if (head == "cell") {
    if (rest.size() != static_cast<std::size_t>(k)) throw std::invalid_argument("functional: cell needs K digits");
    std::vector<int> cell;
    for (char c : rest) {
      if (c != '0' && c != '1') throw std::invalid_argument("functional: cell digits must be 0 or 1");
      cell.push_back(c - '0');
    }
    return TargetFunctional::cell(std::move(cell));
  }
  throw std::invalid_argument("functional: unknown functional '" + text + "'");
}

double TargetFunctional::operator()(std::span<const double> l) const {
  switch (kind_) {
    case Kind::coordinate_mean:
      return l[index_];
    case Kind::product: {
      double v = 1.0;
      for (std::size_t j = 0; j < l.size(); ++j) {
        if (mask_ == 0 || ((mask_ >> j) & 1u)) v *= l[j];
      }
      return v;
    }
    case Kind::cell_indicator:
      for (std::size_t j = 0; j < cell_.size(); ++j) {
        if (l[j] != static_cast<double>(cell_[j])) return 0.0;
      }
      return 1.0;
    case Kind::custom:
      return fn_(l);
  }
  return 0.0;
}

}  // namespace nsc

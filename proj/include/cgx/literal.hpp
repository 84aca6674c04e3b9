#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <tuple>

namespace cgx {

// Comparison carried by a literal. Declaration order is the canonical order.
enum class Op : std::uint8_t { kLessEqual = 0, kGreater = 1, kEqual = 2 };

std::string_view op_symbol(Op op);
std::optional<Op> parse_op(std::string_view symbol);

// Maps a double to an integer whose order is the IEEE-754 total order.
inline std::int64_t total_order_key(double v) {
  const auto bits = std::bit_cast<std::int64_t>(v);
  return bits < 0 ? bits ^ INT64_MAX : bits;
}

// One threshold comparison on one feature: the unit of rule complexity.
// For kEqual the threshold holds a category id.
struct Literal {
  std::size_t feature = 0;
  Op op = Op::kLessEqual;
  double threshold = 0.0;

  bool holds(double value) const {
    switch (op) {
      case Op::kLessEqual:
        return value <= threshold;
      case Op::kGreater:
        return value > threshold;
      case Op::kEqual:
        return value == threshold;
    }
    return false;
  }

  // Canonical order: (feature, op, threshold).
  friend auto operator<=>(const Literal& a, const Literal& b) {
    if (auto c = a.feature <=> b.feature; c != 0) return c;
    if (auto c = a.op <=> b.op; c != 0) return c;
    return total_order_key(a.threshold) <=> total_order_key(b.threshold);
  }
  // Thresholds compare bit-for-bit.
  friend bool operator==(const Literal& a, const Literal& b) {
    return a.feature == b.feature && a.op == b.op &&
           std::bit_cast<std::uint64_t>(a.threshold) ==
               std::bit_cast<std::uint64_t>(b.threshold);
  }
};

}  // namespace cgx

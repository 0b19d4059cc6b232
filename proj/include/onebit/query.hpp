#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>

namespace onebit {

/// 1{x >= gamma}
struct ThresholdGE {
  double gamma = 0.0;
};

/// 1{x <= gamma}
struct ThresholdLE {
  double gamma = 0.0;
};

/// 1{lo <= x <= hi}; infinite endpoints are allowed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Gray bit g_level evaluated at x' = (x + shift) / scale.
struct GrayBit {
  int level = 1;
  double shift = 0.0;
  double scale = 1.0;
};

using Query = std::variant<ThresholdGE, ThresholdLE, Interval, GrayBit>;

/// g_level(x) = 0 if floor(2^level * clamp(x, 0, 1)) mod 4 is 0 or 3, else 1.
inline bool gray_bit_value(int level, double x) {
  if (level < 1) throw std::invalid_argument("gray bit level must be at least 1");
  const double c = std::clamp(x, 0.0, 1.0);
  const double cell = std::floor(std::ldexp(c, level));
  const auto residue = static_cast<int>(std::fmod(cell, 4.0));
  return residue == 1 || residue == 2;
}

inline void validate(const Query& q) {
  if (const auto* iv = std::get_if<Interval>(&q)) {
    if (std::isnan(iv->lo) || std::isnan(iv->hi) || iv->lo > iv->hi)
      throw std::invalid_argument("interval query requires lo <= hi");
  } else if (const auto* g = std::get_if<GrayBit>(&q)) {
    if (g->level < 1) throw std::invalid_argument("gray query level must be at least 1");
    if (!(g->scale > 0.0)) throw std::invalid_argument("gray query scale must be positive");
  } else if (const auto* ge = std::get_if<ThresholdGE>(&q)) {
    if (std::isnan(ge->gamma)) throw std::invalid_argument("threshold is NaN");
  } else if (const auto* le = std::get_if<ThresholdLE>(&q)) {
    if (std::isnan(le->gamma)) throw std::invalid_argument("threshold is NaN");
  }
}

/// Applies the quantizer to a sample. Only agents call this.
inline bool evaluate(const Query& q, double x) {
  return std::visit(
      [x](const auto& v) -> bool {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, ThresholdGE>) return x >= v.gamma;
        else if constexpr (std::is_same_v<V, ThresholdLE>) return x <= v.gamma;
        else if constexpr (std::is_same_v<V, Interval>) return x >= v.lo && x <= v.hi;
        else return gray_bit_value(v.level, (x + v.shift) / v.scale);
      },
      q);
}

inline std::string_view kind_name(const Query& q) {
  constexpr std::string_view names[] = {"ge", "le", "interval", "gray"};
  return names[q.index()];
}

/// The two numeric parameters written to transcript dumps.
/// Thresholds report (gamma, 0); gray bits report (level, scale) with the shift
/// recoverable from the localizer configuration.
inline std::pair<double, double> query_params(const Query& q) {
  return std::visit(
      [](const auto& v) -> std::pair<double, double> {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, ThresholdGE> || std::is_same_v<V, ThresholdLE>)
          return {v.gamma, 0.0};
        else if constexpr (std::is_same_v<V, Interval>) return {v.lo, v.hi};
        else return {static_cast<double>(v.level), v.scale};
      },
      q);
}

}  // namespace onebit

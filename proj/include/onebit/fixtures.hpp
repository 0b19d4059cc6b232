#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "onebit/distributions.hpp"
#include "onebit/family.hpp"
#include "onebit/hardness.hpp"

namespace onebit {

/// Parsed fixture text `kind:key=value,key=v1|v2|v3`.
struct FixtureSpec {
  std::string kind;
  std::map<std::string, std::string, std::less<>> values;
  std::string text;
};

struct Fixture {
  std::string label;
  Distribution dist;
};

inline double parse_real(std::string_view s) {
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + tmp + "'");
  }
  if (used != tmp.size()) throw std::invalid_argument("not a number: '" + tmp + "'");
  return v;
}

inline std::vector<double> parse_real_list(std::string_view s, char sep = '|') {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find(sep, start);
    const auto piece = s.substr(start, end == std::string_view::npos ? s.size() - start : end - start);
    if (piece.empty()) throw std::invalid_argument("empty entry in list '" + std::string(s) + "'");
    out.push_back(parse_real(piece));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

inline FixtureSpec parse_fixture_spec(std::string_view text) {
  FixtureSpec spec;
  spec.text = std::string(text);
  const std::size_t colon = text.find(':');
  spec.kind = std::string(text.substr(0, colon));
  if (spec.kind.empty()) throw std::invalid_argument("fixture spec has no kind: '" + spec.text + "'");
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument("fixture entry must be key=value: '" + std::string(item) + "'");
    spec.values.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

namespace detail {

inline double get_real(const FixtureSpec& s, std::string_view key, double fallback) {
  auto it = s.values.find(key);
  return it == s.values.end() ? fallback : parse_real(it->second);
}

inline int get_sign(const FixtureSpec& s) {
  auto it = s.values.find("sign");
  if (it == s.values.end() || it->second == "+" || it->second == "+1" || it->second == "1") return 1;
  if (it->second == "-" || it->second == "-1") return -1;
  throw std::invalid_argument("pair sign must be + or -");
}

}  // namespace detail

/// Builds a fixture. Keys not given default from the family parameters.
///   point     at
///   discrete  points, probs
///   pareto    mu, alpha, sigma_target, k
///   gaussian  mu, sigma_target, k   (or s for an explicit scale)
///   pair      j, sign, shift        (uses lambda and sigma of the family)
///   k2-null   eps
///   k2-alt    eps
inline Fixture make_fixture(const FixtureSpec& spec, const FamilyParams& params) {
  using detail::get_real;
  const double sigma_target = get_real(spec, "sigma_target", params.sigma);
  if (spec.kind == "point") {
    return {spec.text, Distribution::point_mass(get_real(spec, "at", 0.0))};
  }
  if (spec.kind == "discrete") {
    auto pts = spec.values.find("points");
    auto prs = spec.values.find("probs");
    if (pts == spec.values.end() || prs == spec.values.end())
      throw std::invalid_argument("discrete fixture needs points and probs");
    const auto points = parse_real_list(pts->second);
    const auto probs = parse_real_list(prs->second);
    return {spec.text, Distribution::discrete(points, probs)};
  }
  if (spec.kind == "pareto") {
    const double k = get_real(spec, "k", std::min(params.k, 3.0));
    const double alpha = get_real(spec, "alpha", k + 0.4);
    return {spec.text, Distribution::two_sided_pareto(k, sigma_target, get_real(spec, "mu", 0.0), alpha)};
  }
  if (spec.kind == "gaussian") {
    const double mu = get_real(spec, "mu", 0.0);
    if (spec.values.contains("s")) return {spec.text, Distribution::gaussian(mu, get_real(spec, "s", 1.0))};
    return {spec.text, Distribution::gaussian_moment_tight(mu, sigma_target, get_real(spec, "k", params.k))};
  }
  if (spec.kind == "pair") {
    const PairGrid g = make_pair_grid(params.lambda, params.sigma, get_real(spec, "shift", params.sigma / 10.0));
    const auto j = static_cast<int>(get_real(spec, "j", 1.0));
    return {spec.text, g.member(j, detail::get_sign(spec))};
  }
  if (spec.kind == "k2-null" || spec.kind == "k2-alt") {
    const K2HardPair h = make_k2_pair(params.sigma, get_real(spec, "eps", params.sigma / 48.0), params.lambda);
    return {spec.text, spec.kind == "k2-null" ? h.null_law() : h.mixture()};
  }
  throw std::invalid_argument("unknown fixture kind: '" + spec.kind + "'");
}

inline Fixture make_fixture(std::string_view text, const FamilyParams& params) {
  return make_fixture(parse_fixture_spec(text), params);
}

}  // namespace onebit

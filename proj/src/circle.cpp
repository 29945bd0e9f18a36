#include "superres/circle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "superres/error.hpp"

namespace superres {

double wrap_unit(double t) noexcept {
  double r = t - std::floor(t);
  // floor() of a tiny negative number leaves r == 1.0 after rounding.
  if (r >= 1.0) r = 0.0;
  return r;
}

CirclePoint::CirclePoint(double t) : value_(wrap_unit(t)) {}

double wrap_sub(CirclePoint a, CirclePoint b) noexcept {
  return wrap_unit(a.value() - b.value());
}

double wrap_dist(CirclePoint a, CirclePoint b) noexcept {
  return std::min(wrap_sub(a, b), wrap_sub(b, a));
}

double signed_offset(CirclePoint a, CirclePoint b) noexcept {
  double d = wrap_sub(a, b);
  if (d >= 0.5) d -= 1.0;
  return d;
}

CirclePoint shift(CirclePoint a, double delta) noexcept {
  return CirclePoint(a.value() + delta);
}

Positions make_positions(std::span<const double> values) {
  Positions out;
  out.reserve(values.size());
  for (double v : values) out.emplace_back(v);
  return out;
}

std::vector<double> position_values(std::span<const CirclePoint> pts) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (auto p : pts) out.push_back(p.value());
  return out;
}

namespace {

double directed(std::span<const CirclePoint> from, std::span<const CirclePoint> to) {
  double worst = 0.0;
  for (auto a : from) {
    double best = std::numeric_limits<double>::infinity();
    for (auto b : to) best = std::min(best, wrap_dist(a, b));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff(std::span<const CirclePoint> a, std::span<const CirclePoint> b) {
  if (a.empty() || b.empty()) throw Error("empty point set");
  return std::max(directed(a, b), directed(b, a));
}

double separation(std::span<const CirclePoint> tau) {
  if (tau.size() < 2) throw Error("separation undefined: need at least two points");
  // Sort once; on the circle the closest pair is adjacent after sorting.
  std::vector<double> v = position_values(tau);
  std::sort(v.begin(), v.end());
  double best = 1.0 - v.back() + v.front();
  for (std::size_t i = 1; i < v.size(); ++i) best = std::min(best, v[i] - v[i - 1]);
  return std::min(best, 0.5);
}

double dynamic_range(std::span<const double> alpha) {
  if (alpha.empty()) throw Error("dynamic range of an empty amplitude vector");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double a : alpha) {
    if (a == 0.0) throw Error("zero amplitude");
    lo = std::min(lo, std::abs(a));
    hi = std::max(hi, std::abs(a));
  }
  return hi / lo;
}

}  // namespace superres

#pragma once

#include <span>
#include <vector>

namespace superres {

/// A point on the unit circle [0, 1). Every constructor reduces its input
/// modulo one, so iterates that leave the interval are folded back in.
class CirclePoint {
 public:
  constexpr CirclePoint() = default;
  explicit CirclePoint(double t);

  [[nodiscard]] double value() const noexcept { return value_; }

  friend bool operator==(CirclePoint, CirclePoint) = default;

 private:
  double value_ = 0.0;
};

using Positions = std::vector<CirclePoint>;

/// Reduce an arbitrary real to [0, 1).
[[nodiscard]] double wrap_unit(double t) noexcept;

/// (a - b) mod 1, in [0, 1).
[[nodiscard]] double wrap_sub(CirclePoint a, CirclePoint b) noexcept;

/// Shortest arc length between a and b, in [0, 1/2].
[[nodiscard]] double wrap_dist(CirclePoint a, CirclePoint b) noexcept;

/// Signed displacement a - b taken along the shorter arc, in [-1/2, 1/2).
[[nodiscard]] double signed_offset(CirclePoint a, CirclePoint b) noexcept;

/// a + delta, folded back onto the circle.
[[nodiscard]] CirclePoint shift(CirclePoint a, double delta) noexcept;

[[nodiscard]] Positions make_positions(std::span<const double> values);
[[nodiscard]] std::vector<double> position_values(std::span<const CirclePoint> pts);

/// Hausdorff distance between two point sets under the wraparound metric.
/// Throws Error("empty point set") if either set is empty.
[[nodiscard]] double hausdorff(std::span<const CirclePoint> a, std::span<const CirclePoint> b);

/// Minimum pairwise wraparound distance. Needs at least two points.
[[nodiscard]] double separation(std::span<const CirclePoint> tau);

/// max |alpha| / min |alpha|; every entry must be nonzero.
[[nodiscard]] double dynamic_range(std::span<const double> alpha);

}  // namespace superres

#pragma once

#include <cmath>
#include <vector>

namespace swarmcast {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) noexcept = default;

  constexpr double dot(Vec2 o) const noexcept { return x * o.x + y * o.y; }
  constexpr double norm2() const noexcept { return x * x + y * y; }
  double norm() const noexcept { return std::hypot(x, y); }
  bool finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

using Positions = std::vector<Vec2>;

inline double distance(Vec2 a, Vec2 b) noexcept { return (a - b).norm(); }

}  // namespace swarmcast

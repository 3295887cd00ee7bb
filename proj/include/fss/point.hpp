#pragma once

#include <cmath>

namespace fss {

/// World-space coordinate or direction, millimeters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Point3 operator-(Point3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Point3 operator*(Point3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Point3 operator*(double s, Point3 a) { return a * s; }
  friend constexpr Point3 operator/(Point3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  Point3& operator+=(Point3 b) {
    x += b.x;
    y += b.y;
    z += b.z;
    return *this;
  }
  friend constexpr bool operator==(Point3 a, Point3 b) = default;
};

constexpr double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Point3 cross(Point3 a, Point3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(Point3 a) { return std::sqrt(dot(a, a)); }

inline double distance(Point3 a, Point3 b) { return norm(a - b); }

inline Point3 normalized(Point3 a) { return a / norm(a); }

inline bool is_finite(Point3 a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

/// Unsigned angle between two directions, degrees. atan2 form stays accurate near 0 and 180.
inline double angle_deg(Point3 a, Point3 b) {
  return std::atan2(norm(cross(a, b)), dot(a, b)) * (180.0 / M_PI);
}

}  // namespace fss

#pragma once

#include <cmath>

namespace zson {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

inline double deg2rad(double d) { return d * (M_PI / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / M_PI); }

// wrap to [0, 360)
inline int wrap_deg(int d) {
  d %= 360;
  return d < 0 ? d + 360 : d;
}

// absolute angular difference in [0, 180]
inline int angle_diff_deg(int a, int b) {
  int d = wrap_deg(a - b);
  return d > 180 ? 360 - d : d;
}

// continuous variant, result in [0, 180]
inline double angle_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d < 0) d += 360.0;
  return d > 180.0 ? 360.0 - d : d;
}

// signed relative bearing in (-180, 180]
inline double rel_bearing_deg(double bearing, double heading) {
  double d = std::fmod(bearing - heading, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

}  // namespace zson

#include "glpd/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "glpd/sphere.hpp"

namespace glpd {

namespace {

using Vec3 = std::array<double, 3>;

struct Box {
  Vec3 lo, hi, albedo;
};

struct Sphere {
  Vec3 center;
  double radius;
  Vec3 albedo;
};

struct RoomBox {
  double lo[3];
  double hi[3];
};

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal{0, 0, 0};
  Vec3 albedo{0, 0, 0};
  bool checker = false;
};

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Entry distance of a ray into a closed box from outside, or +inf.
bool ray_box_entry(const Box& b, const Vec3& o, const Vec3& d, double& t_out, int& axis_out, double& sign_out) {
  double tmin = -std::numeric_limits<double>::infinity(), tmax = std::numeric_limits<double>::infinity();
  int axis = -1;
  double sign = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < b.lo[a] || o[a] > b.hi[a]) return false;
      continue;
    }
    double t0 = (b.lo[a] - o[a]) / d[a], t1 = (b.hi[a] - o[a]) / d[a];
    double s = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      s = 1.0;
    }
    if (t0 > tmin) {
      tmin = t0;
      axis = a;
      sign = s;
    }
    tmax = std::min(tmax, t1);
  }
  if (tmax < tmin || tmin <= 0.0 || axis < 0) return false;
  t_out = tmin;
  axis_out = axis;
  sign_out = sign;
  return true;
}

bool ray_sphere(const Sphere& s, const Vec3& o, const Vec3& d, double& t_out) {
  const Vec3 oc{o[0] - s.center[0], o[1] - s.center[1], o[2] - s.center[2]};
  const double b = dot(oc, d);
  const double c = dot(oc, oc) - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return false;
  const double t = -b - std::sqrt(disc);
  if (t <= 0.0) return false;
  t_out = t;
  return true;
}

double point_box_distance(const Vec3& p, const Box& b) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = std::max({b.lo[a] - p[a], 0.0, p[a] - b.hi[a]});
    s += e * e;
  }
  return std::sqrt(s);
}

Vec3 random_albedo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 0.95);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

PanoSample synth_generate(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.height != 64 && spec.height != 128 && spec.height != 256) {
    throw ContractError("synth_generate: height must be 64, 128 or 256");
  }
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto uint = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  // Room centered on the origin horizontally, floor at y = 0.
  const double hx = uni(spec.min_half_extent, spec.max_half_extent);
  const double hz = uni(spec.min_half_extent, spec.max_half_extent);
  const double room_h = uni(spec.min_room_height, spec.max_room_height);
  const RoomBox room{{-hx, 0.0, -hz}, {hx, room_h, hz}};
  std::array<Vec3, 6> wall_albedo;
  for (auto& a : wall_albedo) a = random_albedo(rng);

  std::vector<Box> boxes;
  std::vector<Sphere> spheres;
  if (!spec.empty_room) {
    const int nb = uint(spec.min_boxes, spec.max_boxes);
    for (int i = 0; i < nb; ++i) {
      const double sx = uni(0.3, 1.0), sz = uni(0.3, 1.0), sy = uni(0.3, 1.5);
      const double cx = uni(-hx + sx, hx - sx), cz = uni(-hz + sz, hz - sz);
      boxes.push_back({{cx - sx / 2, 0.0, cz - sz / 2}, {cx + sx / 2, sy, cz + sz / 2}, random_albedo(rng)});
    }
    const int ns = uint(spec.min_spheres, spec.max_spheres);
    for (int i = 0; i < ns; ++i) {
      const double r = uni(0.2, 0.5);
      spheres.push_back({{uni(-hx + r, hx - r), uni(r, room_h - r), uni(-hz + r, hz - r)}, r, random_albedo(rng)});
    }
  }

  // Viewpoint: keep clear of walls and objects so depth stays ≥ 0.5 m.
  const double margin = 0.6;
  Vec3 cam{0.0, room_h / 2.0, 0.0};
  bool ok = false;
  for (int attempt = 0; attempt < spec.max_retries && !ok; ++attempt) {
    if (!spec.center_camera) {
      cam = {uni(-hx + margin, hx - margin), uni(std::min(1.0, room_h / 2), std::min(1.7, room_h - margin)),
             uni(-hz + margin, hz - margin)};
    }
    ok = true;
    for (const auto& b : boxes) ok = ok && point_box_distance(cam, b) >= kSynthMinDepth;
    for (const auto& s : spheres) {
      const Vec3 d{cam[0] - s.center[0], cam[1] - s.center[1], cam[2] - s.center[2]};
      ok = ok && std::sqrt(dot(d, d)) - s.radius >= kSynthMinDepth;
    }
    if (spec.center_camera) break;
  }
  if (!ok) throw DegenerateScene("synth_generate: no clear viewpoint after " + std::to_string(spec.max_retries) + " tries");

  const RoomBox local_room{{room.lo[0] - cam[0], room.lo[1] - cam[1], room.lo[2] - cam[2]},
                           {room.hi[0] - cam[0], room.hi[1] - cam[1], room.hi[2] - cam[2]}};
  const Vec3 origin{0.0, 0.0, 0.0};
  for (auto& b : boxes) {
    for (int a = 0; a < 3; ++a) {
      b.lo[a] -= cam[a];
      b.hi[a] -= cam[a];
    }
  }
  for (auto& s : spheres)
    for (int a = 0; a < 3; ++a) s.center[a] -= cam[a];

  const Vec3 light = [] {
    const Vec3 l{0.4, 0.8, 0.3};
    const double n = std::sqrt(dot(l, l));
    return Vec3{l[0] / n, l[1] / n, l[2] / n};
  }();

  const std::size_t h = static_cast<std::size_t>(spec.height), w = 2 * h;
  std::vector<double> rgb(3 * h * w), depth(h * w);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const auto sd = dir_from_equirect(static_cast<double>(u), static_cast<double>(v), static_cast<int>(w),
                                        static_cast<int>(h));
      const Vec3 d{sd.x, sd.y, sd.z};
      Hit hit;
      // Room interior: exit face determines the wall.
      for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) continue;
        const double bound = d[a] > 0.0 ? local_room.hi[a] : local_room.lo[a];
        const double t = bound / d[a];
        if (t < hit.t) {
          hit.t = t;
          hit.normal = {0, 0, 0};
          hit.normal[a] = d[a] > 0.0 ? -1.0 : 1.0;
          hit.albedo = wall_albedo[static_cast<std::size_t>(2 * a + (d[a] > 0.0 ? 1 : 0))];
          hit.checker = (a == 1 && d[a] < 0.0);
        }
      }
      for (const auto& b : boxes) {
        double t;
        int axis;
        double sign;
        if (ray_box_entry(b, origin, d, t, axis, sign) && t < hit.t) {
          hit.t = t;
          hit.normal = {0, 0, 0};
          hit.normal[axis] = sign;
          hit.albedo = b.albedo;
          hit.checker = false;
        }
      }
      for (const auto& s : spheres) {
        double t;
        if (ray_sphere(s, origin, d, t) && t < hit.t) {
          hit.t = t;
          const Vec3 p{d[0] * t - s.center[0], d[1] * t - s.center[1], d[2] * t - s.center[2]};
          hit.normal = {p[0] / s.radius, p[1] / s.radius, p[2] / s.radius};
          hit.albedo = s.albedo;
          hit.checker = false;
        }
      }
      double shade = 0.35 + 0.65 * std::abs(dot(hit.normal, light));
      if (hit.checker) {
        const double px = d[0] * hit.t + cam[0], pz = d[2] * hit.t + cam[2];
        const bool odd = (static_cast<long>(std::floor(px / 0.5)) + static_cast<long>(std::floor(pz / 0.5))) % 2 != 0;
        shade *= odd ? 0.7 : 1.0;
      }
      const std::size_t idx = v * w + u;
      depth[idx] = std::clamp(hit.t, kSynthMinDepth, kSynthMaxDepth);
      for (std::size_t c = 0; c < 3; ++c) rgb[c * h * w + idx] = std::clamp(hit.albedo[c] * shade, 0.0, 1.0);
    }
  }

  PanoSample s;
  s.name = "synth_" + std::to_string(seed);
  s.rgb = Tensor({3, h, w}, std::move(rgb));
  s.depth = Tensor({1, h, w}, std::move(depth));
  s.mask = validity_mask(s.depth);
  return s;
}

}  // namespace glpd

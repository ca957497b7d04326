#include "glpd/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "glpd/ops.hpp"

namespace glpd {

namespace {

constexpr double kPi = std::numbers::pi;

SphereDirection normalized(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  return {x / n, y / n, z / n};
}

// Axis index (0=x, 1=y, 2=z) and sign of each face's outward normal.
constexpr std::array<std::pair<int, int>, 6> kFaceAxis = {{
    {2, -1},  // back
    {1, -1},  // down
    {2, +1},  // front
    {0, -1},  // left
    {0, +1},  // right
    {1, +1},  // up
}};

}  // namespace

SphereDirection dir_from_equirect(double u, double v, int width, int height) {
  const double lon = (u + 0.5) / width * 2.0 * kPi - kPi;
  const double lat = kPi / 2.0 - (v + 0.5) / height * kPi;
  return {std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
}

EquirectCoord equirect_from_dir(const SphereDirection& d, int width, int height) {
  const double y = std::clamp(d.y, -1.0, 1.0);
  const double lat = std::asin(y);
  const bool pole = std::abs(y) >= 1.0 || (d.x == 0.0 && d.z == 0.0);
  const double lon = pole ? 0.0 : std::atan2(d.x, d.z);
  return {(lon + kPi) / (2.0 * kPi) * width - 0.5, (kPi / 2.0 - lat) / kPi * height - 0.5};
}

FaceCoord face_coords_from_dir(const SphereDirection& d) {
  const std::array<double, 3> c = {d.x, d.y, d.z};
  const double m = std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
  int face = 0;
  for (int f = 0; f < 6; ++f) {
    const auto [axis, sign] = kFaceAxis[f];
    if (c[axis] * sign == m) {
      face = f;
      break;
    }
  }
  const double t = 1.0 / m;
  FaceCoord out;
  out.face = static_cast<Face>(face);
  switch (out.face) {
    case Face::back:  out.a = -d.x * t; out.b = -d.y * t; break;
    case Face::down:  out.a = d.x * t;  out.b = -d.z * t; break;
    case Face::front: out.a = d.x * t;  out.b = -d.y * t; break;
    case Face::left:  out.a = d.z * t;  out.b = -d.y * t; break;
    case Face::right: out.a = -d.z * t; out.b = -d.y * t; break;
    case Face::up:    out.a = d.x * t;  out.b = d.z * t;  break;
  }
  return out;
}

SphereDirection dir_from_face_coords(Face face, double a, double b) {
  switch (face) {
    case Face::back:  return normalized(-a, -b, -1.0);
    case Face::down:  return normalized(a, -1.0, -b);
    case Face::front: return normalized(a, -b, 1.0);
    case Face::left:  return normalized(-1.0, -b, a);
    case Face::right: return normalized(1.0, -b, -a);
    case Face::up:    return normalized(a, 1.0, b);
  }
  throw ContractError("dir_from_face_coords: unknown face");
}

SphereDirection dir_from_face_coords(int face, double a, double b) {
  if (face < 0 || face > 5) throw ContractError("dir_from_face_coords: unknown face id " + std::to_string(face));
  return dir_from_face_coords(static_cast<Face>(face), a, b);
}

CubemapTensor::CubemapTensor(Tensor faces) : faces_(std::move(faces)) {
  if (faces_.rank() != 4 || faces_.dim(0) != 6 || faces_.dim(2) != faces_.dim(3)) {
    throw ShapeError("cubemap must be 6×C×S×S, got " + shape_str(faces_.shape()));
  }
}

CubemapTensor resample_equirect_to_cubemap(const Tensor& img) {
  if (img.rank() != 3) throw ShapeError("equirect image must be C×H×W, got " + shape_str(img.shape()));
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  if (w != 2 * h || h % 2 != 0) throw ShapeError("equirect image needs W = 2H with H even, got " + shape_str(img.shape()));
  const std::size_t s = h / 2;
  const int W = static_cast<int>(w), H = static_cast<int>(h);

  std::vector<Tensor> faces;
  faces.reserve(6);
  for (int f = 0; f < 6; ++f) {
    std::vector<double> coords(s * s * 2);
    for (std::size_t j = 0; j < s; ++j) {
      for (std::size_t i = 0; i < s; ++i) {
        const double a = (static_cast<double>(i) + 0.5) / static_cast<double>(s) * 2.0 - 1.0;
        const double b = (static_cast<double>(j) + 0.5) / static_cast<double>(s) * 2.0 - 1.0;
        const auto uv = equirect_from_dir(dir_from_face_coords(f, a, b), W, H);
        coords[2 * (j * s + i)] = uv.u;
        coords[2 * (j * s + i) + 1] = uv.v;
      }
    }
    Tensor grid({s * s, 2}, std::move(coords));
    faces.push_back(reshape(grid_sample_bilinear(img, grid, Border::wrap, Border::clamp), {1, c, s, s}));
  }
  return CubemapTensor(concat(faces, 0));
}

Tensor resample_cubemap_to_equirect(const CubemapTensor& cm, int height) {
  if (height <= 0) throw ContractError("resample_cubemap_to_equirect: height must be positive");
  const std::size_t c = cm.channels();
  const long s = static_cast<long>(cm.face_size());
  const std::size_t h = height, w = 2 * h;
  const auto src = cm.faces().data();
  const std::size_t plane = static_cast<std::size_t>(s * s);
  std::vector<double> out(c * h * w);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const auto fc = face_coords_from_dir(dir_from_equirect(static_cast<double>(u), static_cast<double>(v),
                                                             static_cast<int>(w), height));
      const double px = (fc.a + 1.0) / 2.0 * static_cast<double>(s) - 0.5;
      const double py = (fc.b + 1.0) / 2.0 * static_cast<double>(s) - 0.5;
      const double fx = std::floor(px), fy = std::floor(py);
      const double ax = px - fx, ay = py - fy;
      const long x0 = std::clamp<long>(static_cast<long>(fx), 0, s - 1);
      const long x1 = std::clamp<long>(static_cast<long>(fx) + 1, 0, s - 1);
      const long y0 = std::clamp<long>(static_cast<long>(fy), 0, s - 1);
      const long y1 = std::clamp<long>(static_cast<long>(fy) + 1, 0, s - 1);
      const int face = static_cast<int>(fc.face);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double* p = src.data() + (static_cast<std::size_t>(face) * c + ch) * plane;
        const double val = (1 - ax) * (1 - ay) * p[y0 * s + x0] + ax * (1 - ay) * p[y0 * s + x1] +
                           (1 - ax) * ay * p[y1 * s + x0] + ax * ay * p[y1 * s + x1];
        out[(ch * h + v) * w + u] = val;
      }
    }
  }
  return Tensor({c, h, w}, std::move(out));
}

}  // namespace glpd

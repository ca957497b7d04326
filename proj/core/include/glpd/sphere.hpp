#pragma once

#include <array>
#include <string_view>

#include "glpd/tensor.hpp"

namespace glpd {

// Coordinate frame: x right, y up, z forward. Longitude 0 looks down +z.
// Equirect pixel (u, v) has its center at integer coordinates; the image
// spans u ∈ [-0.5, W-0.5], v ∈ [-0.5, H-0.5] with the north pole at v = -0.5.

struct SphereDirection {
  double x = 0.0, y = 0.0, z = 1.0;
};

enum class Face : int { back = 0, down = 1, front = 2, left = 3, right = 4, up = 5 };

inline constexpr std::array<std::string_view, 6> kFaceNames = {"back", "down", "front", "left", "right", "up"};

struct EquirectCoord {
  double u = 0.0, v = 0.0;
};

/// Gnomonic in-face coordinates; a grows to the image right, b grows down.
struct FaceCoord {
  Face face = Face::front;
  double a = 0.0, b = 0.0;
};

SphereDirection dir_from_equirect(double u, double v, int width, int height);
EquirectCoord equirect_from_dir(const SphereDirection& d, int width, int height);

/// Dominant-axis face with ties going to the lower face index.
FaceCoord face_coords_from_dir(const SphereDirection& d);
SphereDirection dir_from_face_coords(Face face, double a, double b);
SphereDirection dir_from_face_coords(int face, double a, double b);

/// Six square faces stacked as Tensor[6×C×S×S] in `kFaceNames` order.
class CubemapTensor {
 public:
  explicit CubemapTensor(Tensor faces);

  const Tensor& faces() const { return faces_; }
  std::size_t face_size() const { return faces_.dim(2); }
  std::size_t channels() const { return faces_.dim(1); }

 private:
  Tensor faces_;
};

/// Samples every face texel center along its ray (horizontal wrap, vertical
/// clamp). Differentiable with respect to `img`. Face size is H/2.
CubemapTensor resample_equirect_to_cubemap(const Tensor& img);

/// Per-pixel face lookup with bilinear sampling clamped inside each face.
/// Not recorded on the tape.
Tensor resample_cubemap_to_equirect(const CubemapTensor& cm, int height);

}  // namespace glpd

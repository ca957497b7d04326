#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "glpd/tensor.hpp"

namespace glpd {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageHeader {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
};

/// 8-bit interleaved RGB.
struct Rgb8Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;
  std::map<std::string, std::string> text;  // PNG tEXt chunks
};

struct Gray16Image {
  int width = 0, height = 0;
  std::vector<std::uint16_t> pixels;
};

ImageHeader read_png_header(const std::filesystem::path& path);
/// Accepts gray, RGB, RGBA or palette PNGs; 16-bit samples are reduced to 8 bits.
Rgb8Image read_png_rgb8(const std::filesystem::path& path);
/// Requires a single-channel 16-bit PNG.
Gray16Image read_png_gray16(const std::filesystem::path& path);

void write_png_rgb8(const std::filesystem::path& path, const Rgb8Image& img);
void write_png_gray16(const std::filesystem::path& path, const Gray16Image& img);

/// Single-channel little-endian PFM ("Pf", scale -1), rows stored bottom-up.
void write_pfm(const std::filesystem::path& path, int width, int height, const std::vector<float>& values);
std::vector<float> read_pfm(const std::filesystem::path& path, int& width, int& height);

/// 3×H×W tensor with values in [0,1].
Tensor rgb8_to_tensor(const Rgb8Image& img);
Rgb8Image tensor_to_rgb8(const Tensor& t);

}  // namespace glpd

#include "glpd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace glpd {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw ImageIoError("cannot open " + path.string() + ": " + std::strerror(errno));
  return f;
}

enum class ReadMode { header, rgb8, gray16 };

struct ReadResult {
  ImageHeader header;
  std::vector<std::uint8_t> rows;  // decoded rows after transforms
  std::size_t rowbytes = 0;
  std::vector<std::pair<std::string, std::string>> text;
  char error[256] = {0};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* r = static_cast<ReadResult*>(png_get_error_ptr(png));
  if (r) std::snprintf(r->error, sizeof r->error, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// No objects with destructors live in this frame across setjmp.
bool decode(std::FILE* fp, ReadMode mode, ReadResult* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, out, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  out->header.width = static_cast<int>(png_get_image_width(png, info));
  out->header.height = static_cast<int>(png_get_image_height(png, info));
  out->header.channels = png_get_channels(png, info);
  out->header.bit_depth = depth;
  png_textp text = nullptr;
  int ntext = 0;
  png_get_text(png, info, &text, &ntext);
  for (int i = 0; i < ntext; ++i) out->text.emplace_back(text[i].key, text[i].text ? text[i].text : "");
  if (mode == ReadMode::header) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
  }
  if (mode == ReadMode::rgb8) {
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
      png_set_tRNS_to_alpha(png);
      png_set_strip_alpha(png);
    }
  } else {
    if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
      std::snprintf(out->error, sizeof out->error, "expected a 16-bit single-channel PNG (color type %d, depth %d)",
                    color, depth);
      png_destroy_read_struct(&png, &info, nullptr);
      return false;
    }
  }
  png_read_update_info(png, info);
  out->rowbytes = png_get_rowbytes(png, info);
  out->rows.resize(out->rowbytes * static_cast<std::size_t>(out->header.height));
  for (int y = 0; y < out->header.height; ++y) {
    png_read_row(png, out->rows.data() + out->rowbytes * static_cast<std::size_t>(y), nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

ReadResult read_png(const std::filesystem::path& path, ReadMode mode) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ImageIoError(path.string() + ": not a PNG file");
  }
  std::rewind(f.get());
  ReadResult r;
  if (!decode(f.get(), mode, &r)) {
    throw ImageIoError(path.string() + ": " + (r.error[0] ? r.error : "PNG decode failed"));
  }
  return r;
}

struct WriteJob {
  int width = 0, height = 0, bit_depth = 8, color = PNG_COLOR_TYPE_RGB;
  const std::uint8_t* rows = nullptr;
  std::size_t rowbytes = 0;
  const std::map<std::string, std::string>* text = nullptr;
  char error[256] = {0};
};

void on_png_write_error(png_structp png, png_const_charp msg) {
  auto* j = static_cast<WriteJob*>(png_get_error_ptr(png));
  if (j) std::snprintf(j->error, sizeof j->error, "%s", msg);
  png_longjmp(png, 1);
}

bool encode(std::FILE* fp, WriteJob* job) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, job, on_png_write_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(job->width), static_cast<png_uint_32>(job->height), job->bit_depth,
               job->color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (job->text && !job->text->empty()) {
    png_text entries[8];
    int n = 0;
    for (const auto& [k, v] : *job->text) {
      if (n == 8) break;
      entries[n].compression = PNG_TEXT_COMPRESSION_NONE;
      entries[n].key = const_cast<char*>(k.c_str());
      entries[n].text = const_cast<char*>(v.c_str());
      entries[n].text_length = v.size();
      entries[n].itxt_length = 0;
      entries[n].lang = nullptr;
      entries[n].lang_key = nullptr;
      ++n;
    }
    png_set_text(png, info, entries, n);
  }
  png_write_info(png, info);
  for (int y = 0; y < job->height; ++y) {
    png_write_row(png, job->rows + job->rowbytes * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_png(const std::filesystem::path& path, WriteJob& job) {
  FilePtr f = open_file(path, "wb");
  if (!encode(f.get(), &job)) throw ImageIoError(path.string() + ": " + (job.error[0] ? job.error : "PNG encode failed"));
  if (std::fflush(f.get()) != 0) throw ImageIoError(path.string() + ": write failed");
}

}  // namespace

ImageHeader read_png_header(const std::filesystem::path& path) { return read_png(path, ReadMode::header).header; }

Rgb8Image read_png_rgb8(const std::filesystem::path& path) {
  ReadResult r = read_png(path, ReadMode::rgb8);
  Rgb8Image img;
  img.width = r.header.width;
  img.height = r.header.height;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y) {
    std::memcpy(img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3,
                r.rows.data() + r.rowbytes * static_cast<std::size_t>(y), static_cast<std::size_t>(img.width) * 3);
  }
  for (auto& [k, v] : r.text) img.text[k] = v;
  return img;
}

Gray16Image read_png_gray16(const std::filesystem::path& path) {
  ReadResult r = read_png(path, ReadMode::gray16);
  Gray16Image img;
  img.width = r.header.width;
  img.height = r.header.height;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* row = r.rows.data() + r.rowbytes * static_cast<std::size_t>(y);
    for (int x = 0; x < img.width; ++x) {
      img.pixels[static_cast<std::size_t>(y) * img.width + x] =
          static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
    }
  }
  return img;
}

void write_png_rgb8(const std::filesystem::path& path, const Rgb8Image& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw ImageIoError(path.string() + ": pixel buffer does not match dimensions");
  }
  WriteJob job;
  job.width = img.width;
  job.height = img.height;
  job.rows = img.pixels.data();
  job.rowbytes = static_cast<std::size_t>(img.width) * 3;
  job.text = &img.text;
  write_png(path, job);
}

void write_png_gray16(const std::filesystem::path& path, const Gray16Image& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ImageIoError(path.string() + ": pixel buffer does not match dimensions");
  }
  std::vector<std::uint8_t> be(img.pixels.size() * 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    be[2 * i] = static_cast<std::uint8_t>(img.pixels[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(img.pixels[i] & 0xff);
  }
  WriteJob job;
  job.width = img.width;
  job.height = img.height;
  job.bit_depth = 16;
  job.color = PNG_COLOR_TYPE_GRAY;
  job.rows = be.data();
  job.rowbytes = static_cast<std::size_t>(img.width) * 2;
  write_png(path, job);
}

void write_pfm(const std::filesystem::path& path, int width, int height, const std::vector<float>& values) {
  if (values.size() != static_cast<std::size_t>(width) * height) throw ImageIoError("write_pfm: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot open " + path.string());
  out << "Pf\n" << width << ' ' << height << "\n-1.0\n";
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      const float v = values[static_cast<std::size_t>(y) * width + x];
      unsigned char b[4];
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
      out.write(reinterpret_cast<const char*>(b), 4);
    }
  }
  if (!out) throw ImageIoError("write failed: " + path.string());
}

std::vector<float> read_pfm(const std::filesystem::path& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open " + path.string());
  std::string magic;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  in.get();
  if (magic != "Pf" || width <= 0 || height <= 0) throw ImageIoError(path.string() + ": not a single-channel PFM");
  if (scale >= 0.0) throw ImageIoError(path.string() + ": big-endian PFM not supported");
  std::vector<float> values(static_cast<std::size_t>(width) * height);
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      unsigned char b[4];
      if (!in.read(reinterpret_cast<char*>(b), 4)) throw ImageIoError(path.string() + ": truncated PFM");
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(b[i]) << (8 * i);
      float v;
      std::memcpy(&v, &bits, 4);
      values[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return values;
}

Tensor rgb8_to_tensor(const Rgb8Image& img) {
  const std::size_t h = img.height, w = img.width;
  std::vector<double> v(3 * h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) v[(c * h + y) * w + x] = img.pixels[(y * w + x) * 3 + c] / 255.0;
  return Tensor({3, h, w}, std::move(v));
}

Rgb8Image tensor_to_rgb8(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 3) throw ShapeError("tensor_to_rgb8: expected 3×H×W, got " + shape_str(t.shape()));
  const std::size_t h = t.dim(1), w = t.dim(2);
  Rgb8Image img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(3 * h * w);
  auto d = t.data();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(d[(c * h + y) * w + x], 0.0, 1.0);
        img.pixels[(y * w + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  return img;
}

}  // namespace glpd

#include "glpd_tools/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "glpd/checkpoint.hpp"
#include "glpd/config_file.hpp"
#include "glpd/dataset.hpp"
#include "glpd/image_io.hpp"
#include "glpd/metrics.hpp"
#include "glpd/ops.hpp"
#include "glpd/sphere.hpp"
#include "glpd/train.hpp"

namespace glpd::cli {

namespace fs = std::filesystem;

namespace {

// Separable bilinear resize with half-pixel centers and clamped borders.
Tensor resize_bilinear(const Tensor& img, std::size_t out_h, std::size_t out_w) {
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  if (h == out_h && w == out_w) return img.detach();
  const auto src = img.data();
  std::vector<double> out(c * out_h * out_w);
  auto axis = [](std::size_t i, std::size_t n_in, std::size_t n_out, std::size_t& i0, std::size_t& i1, double& t) {
    const double x = std::clamp((static_cast<double>(i) + 0.5) * static_cast<double>(n_in) / static_cast<double>(n_out) - 0.5,
                                0.0, static_cast<double>(n_in - 1));
    i0 = static_cast<std::size_t>(std::floor(x));
    i1 = std::min(i0 + 1, n_in - 1);
    t = x - static_cast<double>(i0);
  };
  for (std::size_t y = 0; y < out_h; ++y) {
    std::size_t y0, y1;
    double ty;
    axis(y, h, out_h, y0, y1, ty);
    for (std::size_t x = 0; x < out_w; ++x) {
      std::size_t x0, x1;
      double tx;
      axis(x, w, out_w, x0, x1, tx);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double* p = src.data() + ch * h * w;
        const double top = (1 - tx) * p[y0 * w + x0] + tx * p[y0 * w + x1];
        const double bot = (1 - tx) * p[y1 * w + x0] + tx * p[y1 * w + x1];
        out[(ch * out_h + y) * out_w + x] = (1 - ty) * top + ty * bot;
      }
    }
  }
  return Tensor({c, out_h, out_w}, std::move(out));
}

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return e;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int cmd_train(const std::string& config, std::ostream& out) {
  const TrainConfig cfg = load_train_config(config);
  const TrainResult r = train_loop(cfg, &out);
  out << "steps=" << r.steps << "\n" << r.final_metrics.to_text();
  return kExitOk;
}

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& split, double depth_scale,
             std::ostream& out) {
  const LoadedModel lm = checkpoint_load(ckpt);
  const PanoDataset ds = dataset_load(data, split, DatasetOptions{depth_scale});
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  PanoStream stream(ds, order);
  const int h = lm.model.config().height;
  MetricsAccumulator acc;
  Tape::Pause pause;
  while (auto s = stream.next()) {
    if (static_cast<int>(s->rgb.dim(1)) != h) {
      throw UsageError("eval: sample " + s->name + " has height " + std::to_string(s->rgb.dim(1)) +
                       " but the checkpoint expects " + std::to_string(h));
    }
    acc.add(lm.model.forward(s->rgb).depth, s->depth, s->mask);
  }
  out << acc.report().to_text();
  return kExitOk;
}

int cmd_infer(const std::string& ckpt, const fs::path& input, const fs::path& output, double depth_scale,
              std::ostream& out) {
  const std::string ext = lower_ext(output);
  if (ext != ".png" && ext != ".pfm") throw UsageError("infer: --output must end in .png or .pfm");
  const LoadedModel lm = checkpoint_load(ckpt);
  const Rgb8Image img = read_png_rgb8(input);
  if (img.width != 2 * img.height) throw UsageError("infer: input must be a 2:1 equirectangular panorama");

  const auto& cfg = lm.model.config();
  Tensor rgb = resize_bilinear(rgb8_to_tensor(img), static_cast<std::size_t>(cfg.height),
                               static_cast<std::size_t>(cfg.width));
  Tensor depth;
  {
    Tape::Pause pause;
    depth = lm.model.forward(rgb).depth;
  }
  depth = resize_bilinear(depth, static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width));

  const auto d = depth.data();
  if (ext == ".pfm") {
    std::vector<float> values(d.begin(), d.end());
    write_pfm(output, img.width, img.height, values);
  } else {
    Gray16Image g{img.width, img.height, std::vector<std::uint16_t>(d.size())};
    for (std::size_t i = 0; i < d.size(); ++i) {
      g.pixels[i] = static_cast<std::uint16_t>(std::clamp(std::lround(d[i] * depth_scale), 0L, 65535L));
    }
    write_png_gray16(output, g);
  }
  out << "wrote " << output.string() << " (" << img.width << "x" << img.height << ")\n";
  return kExitOk;
}

// Cubemaps are stored as a vertical strip of six S×S faces in face order.
int cmd_project(const fs::path& input, const std::string& to, const fs::path& output, std::ostream& out) {
  const Rgb8Image img = read_png_rgb8(input);
  Tape::Pause pause;
  Rgb8Image result;
  if (to == "cubemap") {
    if (img.width != 2 * img.height || img.height % 2 != 0) {
      throw UsageError("project: equirect input must be W = 2H with H even");
    }
    const CubemapTensor cm = resample_equirect_to_cubemap(rgb8_to_tensor(img));
    const std::size_t s = cm.face_size(), c = cm.channels();
    std::vector<std::size_t> index;
    index.reserve(c * 6 * s * s);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t f = 0; f < 6; ++f)
        for (std::size_t i = 0; i < s * s; ++i) index.push_back((f * c + ch) * s * s + i);
    result = tensor_to_rgb8(gather(cm.faces(), std::move(index), {c, 6 * s, s}));
    std::string order;
    for (const auto name : kFaceNames) order += (order.empty() ? "" : ",") + std::string(name);
    result.text["face_order"] = order;
  } else {
    if (img.height != 6 * img.width) throw UsageError("project: cubemap input must be a 6S-tall, S-wide strip");
    const Tensor strip = rgb8_to_tensor(img);
    const std::size_t s = static_cast<std::size_t>(img.width), c = strip.dim(0);
    std::vector<std::size_t> index;
    index.reserve(6 * c * s * s);
    for (std::size_t f = 0; f < 6; ++f)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < s * s; ++i) index.push_back((ch * 6 + f) * s * s + i);
    const CubemapTensor cm(gather(strip, std::move(index), {6, c, s, s}));
    result = tensor_to_rgb8(resample_cubemap_to_equirect(cm, static_cast<int>(2 * s)));
  }
  write_png_rgb8(output, result);
  out << "wrote " << output.string() << " (" << result.width << "x" << result.height << ")\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GLPanoDepth panoramic depth estimation"};
  app.require_subcommand(1);

  std::string config;
  auto* train = app.add_subcommand("train", "Train a model from a key=value config file");
  train->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);

  std::string ckpt, data, split = "test";
  double depth_scale = kDefaultDepthScale;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  eval->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  eval->add_option("--data", data, "Dataset root")->required();
  eval->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--depth-scale", depth_scale, "Raw 16-bit depth units per meter");

  std::string input, output;
  auto* infer = app.add_subcommand("infer", "Predict depth for one panorama");
  infer->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  infer->add_option("--input", input, "RGB panorama (PNG)")->required();
  infer->add_option("--output", output, "Depth output (.png 16-bit or .pfm float)")->required();
  infer->add_option("--depth-scale", depth_scale, "PNG output units per meter");

  std::string to;
  auto* project = app.add_subcommand("project", "Convert between equirect and cubemap strip");
  project->add_option("--input", input, "Input PNG")->required();
  project->add_option("--to", to, "Target layout")->required()->check(CLI::IsMember({"cubemap", "equirect"}));
  project->add_option("--output", output, "Output PNG")->required();

  auto* selftest = app.add_subcommand("selftest", "Run gradient checks and projection round trips");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(config, out);
    if (*eval) return cmd_eval(ckpt, data, split, depth_scale, out);
    if (*infer) return cmd_infer(ckpt, input, output, depth_scale, out);
    if (*project) return cmd_project(input, to, output, out);
    if (*selftest) return run_selftest(out) ? kExitOk : kExitRuntime;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace glpd::cli

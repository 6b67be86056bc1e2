#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsipnp/admm.hpp"
#include "hsipnp/checkpoint.hpp"
#include "hsipnp/cube_file.hpp"
#include "hsipnp/degrade.hpp"
#include "hsipnp/elementwise.hpp"
#include "hsipnp/error.hpp"
#include "hsipnp/grcnn.hpp"
#include "hsipnp/metrics.hpp"
#include "hsipnp/noise.hpp"
#include "hsipnp/png_export.hpp"
#include "hsipnp/synthetic.hpp"
#include "hsipnp/train.hpp"

namespace hsipnp::cli {
namespace {

using degrade::TaskOperator;

struct Options {
  // shared
  std::string task = "inpaint";
  std::string input, gt, mask, out, trace, model;
  std::uint64_t seed = 0;
  // operator
  std::size_t factor = 2;
  double blur_sigma = 3.0;
  std::size_t blur_size = 8;
  double missing = 0.5;
  std::string mask_type = "random";
  std::string noise = "0";
  // schedule
  double sigma1 = 50.0, sigma2 = 5.0, lambda = 1.5;
  std::size_t iters = 0;
  std::string denoiser = "grcnn";
  // synth
  std::size_t rows = 32, cols = 32, bands = 8;
  // report / export
  std::string format = "csv";
  std::size_t band = 0;
  double gain = 5.0;
  // train-toy
  std::size_t scenes = 24, scene_size = 32, patch = 16, batch = 2;
  std::size_t epochs_fixed = 5, epochs_random = 5, steps_per_epoch = 150, depth = 2;
  std::vector<std::size_t> widths{8, 16, 32};
  double lr = 1e-3, lr_decay = 1.0;
  bool no_noise_map = false;
  std::string loss_curve;
};

std::vector<degrade::NoiseModel> parse_noise(const std::string& spec, std::uint64_t seed) {
  std::vector<degrade::NoiseModel> models;
  std::stringstream ss(spec);
  std::string token;
  std::uint64_t k = 0;
  while (std::getline(ss, token, '+')) {
    const std::uint64_t s = seed + 1000003ULL * (++k);
    const auto colon = token.find(':');
    const std::string kind = token.substr(0, colon);
    const auto level = [&]() {
      require(colon != std::string::npos, ErrorCode::InvalidArgument,
              "noise '" + token + "' needs a level, e.g. " + kind + ":30");
      try {
        return std::stod(token.substr(colon + 1));
      } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "bad noise level in '" + token + "'");
      }
    };
    if (kind == "gaussian") {
      models.push_back({degrade::IidGaussian{level()}, s});
    } else if (kind == "noniid") {
      models.push_back({degrade::NonIidGaussian{level()}, s});
    } else if (kind == "stripe") {
      models.push_back({degrade::Stripe{}, s});
    } else if (kind == "impulse") {
      models.push_back({degrade::Impulse{}, s});
    } else if (kind == "none") {
    } else {
      std::size_t used = 0;
      double sigma = 0.0;
      try {
        sigma = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == token.size() && !token.empty(), ErrorCode::InvalidArgument,
              "unknown noise '" + token + "' (gaussian:S, noniid:S, stripe, impulse, none)");
      if (sigma > 0.0) models.push_back({degrade::IidGaussian{sigma}, s});
    }
  }
  return models;
}

Cube apply_noise(const Cube& x, const Options& o) {
  const auto models = parse_noise(o.noise, o.seed);
  return models.empty() ? x : degrade::add_noise(x, models);
}

void require_task(const std::string& task) {
  require(task == "denoise" || task == "sr" || task == "cs" || task == "inpaint",
          ErrorCode::InvalidArgument, "unknown task '" + task + "' (denoise, sr, cs, inpaint)");
}

degrade::SuperRes make_sr(const Options& o) {
  return degrade::SuperRes(degrade::Kernel2d::gaussian(o.blur_size, o.blur_sigma), o.factor);
}

std::vector<degrade::Shift> cassi_shifts(std::size_t bands) {
  std::vector<degrade::Shift> shifts(bands);
  for (std::size_t b = 0; b < bands; ++b) shifts[b] = {0, static_cast<std::ptrdiff_t>(b)};
  return shifts;
}

void cmd_synth(const Options& o, std::ostream&) {
  require(!o.out.empty(), ErrorCode::InvalidArgument, "synth needs --out");
  io::write_cube(synthetic_scene({o.rows, o.cols, o.bands}, o.seed), o.out);
}

void cmd_simulate(const Options& o, std::ostream&) {
  require_task(o.task);
  require(!o.input.empty() && !o.out.empty(), ErrorCode::InvalidArgument,
          "simulate needs --input and --out");
  const Cube clean = io::read_cube(o.input);
  Cube obs;
  if (o.task == "denoise") {
    obs = apply_noise(clean, o);
  } else if (o.task == "sr") {
    const TaskOperator op = make_sr(o);
    obs = clip(apply_noise(degrade::apply(op, clean), o), 0.0, 1.0);
  } else if (o.task == "cs") {
    require(!o.mask.empty(), ErrorCode::InvalidArgument, "simulate --task cs needs --mask");
    const auto sensing = degrade::Sensing::cassi(clean.rows(), clean.cols(), clean.bands(), o.seed);
    obs = apply_noise(degrade::apply(TaskOperator{sensing}, clean), o);
    io::write_cube(sensing.masks(), o.mask);
  } else {
    require(!o.mask.empty(), ErrorCode::InvalidArgument, "simulate --task inpaint needs --mask");
    require(o.mask_type == "random" || o.mask_type == "stripe", ErrorCode::InvalidArgument,
            "unknown --mask-type '" + o.mask_type + "' (random, stripe)");
    const auto mask = o.mask_type == "random"
                          ? degrade::Mask::random(clean.extent(), o.missing, o.seed)
                          : degrade::Mask::stripes(clean.extent(), o.missing, o.seed);
    // Missing voxels carry no value, so noise only lands on observed ones.
    obs = hadamard(mask.mask(), apply_noise(clean, o));
    io::write_cube(mask.mask(), o.mask);
  }
  io::write_cube(obs, o.out);
  if (!o.gt.empty()) io::write_cube(clean, o.gt);
}

admm::Denoiser make_denoiser(const Options& o, std::ostream& err) {
  if (o.denoiser == "identity") return admm::identity_denoiser();
  if (o.denoiser == "box") return admm::box_denoiser(3);
  require(o.denoiser == "grcnn", ErrorCode::InvalidArgument,
          "unknown --denoiser '" + o.denoiser + "' (grcnn, identity, box)");
  require(!o.model.empty(), ErrorCode::InvalidArgument, "--denoiser grcnn needs --model");
  auto model = std::make_shared<const grcnn::GrcnnModel>(grcnn::load_checkpoint(o.model));
  return admm::grcnn_denoiser(model, [&err](const std::string& msg) {
    err << nlohmann::json{{"warning", msg}}.dump() << '\n';
  });
}

void cmd_restore(const Options& o, std::ostream&, std::ostream& err) {
  require_task(o.task);
  require(!o.input.empty() && !o.out.empty(), ErrorCode::InvalidArgument,
          "restore needs --input and --out");
  const Cube y = io::read_cube(o.input);
  const admm::Denoiser denoiser = make_denoiser(o, err);
  std::optional<Cube> gt;
  if (!o.gt.empty()) gt = io::read_cube(o.gt);

  if (o.task == "denoise") {
    const Cube out = denoiser(y, o.sigma1);
    io::write_cube(out, o.out);
    if (!o.trace.empty()) {
      admm::TraceRow row{0, o.sigma1, 0.0, 0.0, std::nullopt};
      if (gt) row.psnr = metrics::psnr(*gt, out);
      std::ofstream f(o.trace);
      admm::write_trace_csv(f, std::span<const admm::TraceRow>(&row, 1));
    }
    return;
  }

  std::optional<TaskOperator> op;
  if (o.task == "sr") {
    op = make_sr(o);
  } else {
    require(!o.mask.empty(), ErrorCode::InvalidArgument, "restore --task " + o.task + " needs --mask");
    Cube m = io::read_cube(o.mask);
    if (o.task == "cs") {
      const std::size_t bands = m.bands();
      op = degrade::Sensing(std::move(m), cassi_shifts(bands));
    } else {
      op = degrade::Mask(std::move(m));
    }
  }
  const std::size_t iters = o.iters > 0 ? o.iters : o.task == "sr" ? 25 : o.task == "cs" ? 50 : 100;
  const auto schedule = admm::make_schedule(o.sigma1, o.sigma2, iters, o.lambda);
  admm::RunOptions ro;
  if (gt) ro.ground_truth = &*gt;
  const auto result = admm::run(*op, y, denoiser, schedule, ro);
  io::write_cube(result.output, o.out);
  if (!o.trace.empty()) {
    std::ofstream f(o.trace);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot write " + o.trace);
    admm::write_trace_csv(f, result.trace);
  }
}

void cmd_report(const Options& o, std::ostream& out) {
  require(!o.gt.empty() && !o.input.empty(), ErrorCode::InvalidArgument,
          "report needs --gt and --input");
  require(o.format == "csv" || o.format == "json", ErrorCode::InvalidArgument,
          "unknown --format '" + o.format + "' (csv, json)");
  const auto r = metrics::evaluate(io::read_cube(o.gt), io::read_cube(o.input));
  std::ostringstream text;
  if (o.format == "json") {
    text << nlohmann::json{{"psnr", r.psnr},
                           {"ssim", r.ssim},
                           {"sam", r.sam},
                           {"sam_skipped", r.sam_skipped},
                           {"psnr_bands", r.psnr_bands},
                           {"ssim_bands", r.ssim_bands}}
                .dump()
         << '\n';
  } else {
    text.precision(17);
    text << "metric,value\npsnr," << r.psnr << "\nssim," << r.ssim << "\nsam," << r.sam
         << "\nsam_skipped," << r.sam_skipped << '\n';
  }
  if (o.out.empty()) {
    out << text.str();
  } else {
    std::ofstream f(o.out);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot write " + o.out);
    f << text.str();
  }
}

void cmd_export_png(const Options& o) {
  require(!o.input.empty() && !o.out.empty(), ErrorCode::InvalidArgument,
          "export-png needs --input and --out");
  io::write_band_png(io::read_cube(o.input), o.band, o.out);
}

void cmd_export_error_map(const Options& o) {
  require(!o.gt.empty() && !o.input.empty() && !o.out.empty(), ErrorCode::InvalidArgument,
          "export-error-map needs --gt, --input and --out");
  io::write_error_map_png(io::read_cube(o.gt), io::read_cube(o.input), o.band, o.out, o.gain);
}

void cmd_train_toy(const Options& o, std::ostream& out) {
  require(!o.out.empty(), ErrorCode::InvalidArgument, "train-toy needs --out");
  std::vector<Cube> scenes;
  for (std::size_t i = 0; i < o.scenes; ++i)
    scenes.push_back(synthetic_scene({o.scene_size, o.scene_size, o.bands}, o.seed * 7919 + i));
  grcnn::Architecture arch;
  arch.depth = o.depth;
  arch.widths = o.widths;
  arch.uses_noise_map = !o.no_noise_map;
  grcnn::TrainConfig cfg;
  cfg.learning_rate = o.lr;
  cfg.lr_decay = o.lr_decay;
  cfg.batch_size = o.batch;
  cfg.patch_rows = cfg.patch_cols = o.patch;
  cfg.steps_per_epoch = o.steps_per_epoch;
  cfg.phases = {{o.epochs_fixed, 50.0, 50.0}, {o.epochs_random, 0.0, 50.0}};
  cfg.seed = o.seed;
  const auto result = grcnn::train(grcnn::GrcnnModel(arch, o.seed), scenes, cfg);
  grcnn::save_checkpoint(result.model, o.out);
  if (!o.loss_curve.empty()) {
    std::ofstream f(o.loss_curve);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot write " + o.loss_curve);
    f.precision(17);
    f << "step,loss\n";
    for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
      f << i << ',' << result.loss_curve[i] << '\n';
  }
  out << nlohmann::json{{"steps", result.loss_curve.size()},
                        {"final_loss", result.loss_curve.back()},
                        {"parameters", result.model.parameter_count()}}
             .dump()
      << '\n';
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Hyperspectral plug-and-play ADMM restoration", "hsipnp"};
  app.require_subcommand(1);

  const auto seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "random seed"); };
  const auto operator_flags = [&](CLI::App* c) {
    c->add_option("--task", o.task, "denoise, sr, cs or inpaint");
    c->add_option("--factor", o.factor, "super-resolution factor");
    c->add_option("--blur-sigma", o.blur_sigma, "Gaussian blur sigma (pixels)");
    c->add_option("--blur-size", o.blur_size, "blur kernel size");
    c->add_option("--mask", o.mask, "mask cube (written by simulate, read by restore)");
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic clean cube");
  synth->add_option("--rows", o.rows);
  synth->add_option("--cols", o.cols);
  synth->add_option("--bands", o.bands);
  synth->add_option("--out", o.out)->required();
  seed(synth);

  auto* simulate = app.add_subcommand("simulate", "degrade a clean cube");
  operator_flags(simulate);
  simulate->add_option("--input", o.input, "clean cube")->required();
  simulate->add_option("--out", o.out, "observation cube")->required();
  simulate->add_option("--gt", o.gt, "also write the ground truth here");
  simulate->add_option("--noise", o.noise, "e.g. gaussian:25, noniid:70+stripe, 30");
  simulate->add_option("--missing", o.missing, "inpainting missing ratio");
  simulate->add_option("--mask-type", o.mask_type, "random or stripe");
  seed(simulate);

  auto* restore = app.add_subcommand("restore", "plug-and-play restoration");
  operator_flags(restore);
  restore->add_option("--input", o.input, "observation cube")->required();
  restore->add_option("--out", o.out, "restored cube")->required();
  restore->add_option("--gt", o.gt, "ground truth for the PSNR trace column");
  restore->add_option("--trace", o.trace, "per-iteration CSV");
  restore->add_option("--sigma1", o.sigma1, "first denoiser level (0-255)");
  restore->add_option("--sigma2", o.sigma2, "last denoiser level (0-255)");
  restore->add_option("--iters", o.iters, "iterations (default sr 25, cs 50, inpaint 100)");
  restore->add_option("--lambda", o.lambda, "regularization weight");
  restore->add_option("--model", o.model, "GRC1 checkpoint");
  restore->add_option("--denoiser", o.denoiser, "grcnn, identity or box");
  seed(restore);

  auto* report = app.add_subcommand("report", "PSNR / SSIM / SAM");
  report->add_option("--gt", o.gt)->required();
  report->add_option("--input", o.input, "restored cube")->required();
  report->add_option("--format", o.format, "csv or json");
  report->add_option("--out", o.out, "write here instead of stdout");

  auto* png = app.add_subcommand("export-png", "8-bit grayscale band image");
  png->add_option("--input", o.input)->required();
  png->add_option("--band", o.band);
  png->add_option("--out", o.out)->required();

  auto* errmap = app.add_subcommand("export-error-map", "absolute-error heat map of one band");
  errmap->add_option("--gt", o.gt)->required();
  errmap->add_option("--input", o.input)->required();
  errmap->add_option("--band", o.band);
  errmap->add_option("--gain", o.gain, "error multiplier before clamping");
  errmap->add_option("--out", o.out)->required();

  auto* train = app.add_subcommand("train-toy", "train a small denoiser on synthetic scenes");
  train->add_option("--out", o.out, "GRC1 checkpoint")->required();
  train->add_option("--scenes", o.scenes);
  train->add_option("--scene-size", o.scene_size);
  train->add_option("--bands", o.bands);
  train->add_option("--patch", o.patch);
  train->add_option("--batch", o.batch);
  train->add_option("--epochs-fixed", o.epochs_fixed, "epochs at sigma 50");
  train->add_option("--epochs-random", o.epochs_random, "epochs at sigma ~ U[0, 50]");
  train->add_option("--steps-per-epoch", o.steps_per_epoch);
  train->add_option("--lr", o.lr);
  train->add_option("--lr-decay", o.lr_decay);
  train->add_option("--depth", o.depth);
  train->add_option("--widths", o.widths)->delimiter(',');
  train->add_flag("--no-noise-map", o.no_noise_map);
  train->add_option("--loss-curve", o.loss_curve, "CSV of per-step loss");
  seed(train);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*synth) cmd_synth(o, out);
    if (*simulate) cmd_simulate(o, out);
    if (*restore) cmd_restore(o, out, err);
    if (*report) cmd_report(o, out);
    if (*png) cmd_export_png(o);
    if (*errmap) cmd_export_error_map(o);
    if (*train) cmd_train_toy(o, out);
  } catch (const Error& e) {
    print_error(err, std::string(error_code_name(e.code())), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace hsipnp::cli

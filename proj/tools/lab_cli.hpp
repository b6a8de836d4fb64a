#pragma once

// Subcommands of the pdsa_lab executable. Exit codes: 0 success, 1 numerical
// failure (divergence, non-convergence), 2 bad input.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pdsa/ambiguity.hpp"
#include "pdsa/datagen.hpp"
#include "pdsa/experiment.hpp"
#include "pdsa/io.hpp"
#include "pdsa/kpe.hpp"
#include "pdsa/miner.hpp"
#include "pdsa/render.hpp"

namespace pdsa::cli {

enum ExitCode : int { kOk = 0, kNumerical = 1, kBadInput = 2 };

// Off-axis angle at which a 0.485-radius sphere with a 0.5-wide silhouette
// (f = 1) sits 2.43 away.
inline constexpr double kOffAxisAngle = 0.43537516102570795;

struct CommonOptions {
  std::string camera_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

inline PinholeCamera load_camera(const CommonOptions& common, bool required) {
  if (common.camera_path.empty()) {
    if (required) throw InputError("--camera is required");
    return kReferenceCamera;
  }
  return io::read_camera(common.camera_path);
}

inline std::filesystem::path prepare_out_dir(const CommonOptions& common) {
  std::filesystem::path dir(common.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw InputError("cannot create output directory '" + common.out_dir + "'");
  return dir;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

// ---- encode -------------------------------------------------------------

struct EncodeOptions {
  std::vector<double> crop;  // u0,v0,u1,v1; empty means the full image
  std::string mode = "sparse";
  int out_h = 1;
  int out_w = 1;
};

inline int cmd_encode(const CommonOptions& common, const EncodeOptions& opt, std::ostream& log) {
  const PinholeCamera cam = load_camera(common, true);
  CropRegion crop{0.0, 0.0, static_cast<double>(cam.width), static_cast<double>(cam.height)};
  if (!opt.crop.empty()) {
    if (opt.crop.size() != 4) throw InputError("--crop takes u0,v0,u1,v1");
    crop = {opt.crop[0], opt.crop[1], opt.crop[2], opt.crop[3]};
  }
  crop.validate();
  const auto dir = prepare_out_dir(common);
  if (opt.mode == "sparse") {
    auto out = open_out(dir / "sparse.json");
    io::write_sparse_json(out, sparse_encoding(cam, crop));
    log << "wrote " << (dir / "sparse.json").string() << '\n';
  } else if (opt.mode == "dense") {
    auto out = open_out(dir / "dense.csv");
    io::write_dense_csv(out, dense_encoding(cam, crop, opt.out_h, opt.out_w));
    log << "wrote " << (dir / "dense.csv").string() << '\n';
  } else {
    throw InputError("--mode must be sparse or dense");
  }
  return kOk;
}

// ---- scatter / render ---------------------------------------------------

inline std::vector<Offset> default_render_offsets() {
  return {{0.1, 0.0}, {0.2, 0.1}, {-0.25, 0.15}, {0.3, -0.2}};
}

inline std::vector<Offset> parse_offsets(const std::vector<std::string>& specs) {
  std::vector<Offset> out;
  for (const auto& s : specs) {
    std::istringstream in(s);
    Offset o;
    char comma = 0;
    if (!(in >> o.dx >> comma >> o.dy) || comma != ',' || !in.eof())
      throw InputError("offset '" + s + "' must look like dx,dy");
    out.push_back(o);
  }
  return out;
}

inline void write_render(const std::filesystem::path& path, const PinholeCamera& cam,
                         const std::vector<Offset>& offsets) {
  const Instance ref = reference_instance();
  std::vector<Instance> insts;
  for (const auto& o : offsets) insts.push_back(construct_ambiguous(ref, o.dx, o.dy));
  for (const auto& inst : insts)
    if (!inst.shape.valid()) throw InputError("offset produces an invalid parallelepiped");
  auto out = open_out(path);
  render_wireframes_svg(out, cam, ref, insts);
}

struct ScatterOptions {
  int grid = 21;
  double max_offset = 0.3;
  int perturbed = 0;
  double sigma = 0.02;
  bool svg = false;
};

inline int cmd_scatter(const CommonOptions& common, const ScatterOptions& opt, std::ostream& log) {
  const PinholeCamera cam = load_camera(common, false);
  if (opt.perturbed > 0 && !common.seed) throw InputError("--seed is required with --perturbed");
  if (opt.perturbed < 0 || !(opt.sigma > 0.0)) throw InputError("invalid perturbation options");
  if (!(opt.max_offset >= 0.0)) throw InputError("--max-offset must be non-negative");
  const auto dir = prepare_out_dir(common);
  ScatterConfig cfg{opt.perturbed, opt.sigma, common.seed.value_or(0)};
  const auto records =
      sweep_scatter(cam, reference_instance(), offset_grid(opt.grid, opt.max_offset), cfg);
  {
    auto out = open_out(dir / "scatter.csv");
    io::write_scatter_csv(out, records);
  }
  log << "wrote " << records.size() << " records to " << (dir / "scatter.csv").string() << '\n';
  if (opt.svg) {
    write_render(dir / "wireframes.svg", cam, default_render_offsets());
    log << "wrote " << (dir / "wireframes.svg").string() << '\n';
  }
  return kOk;
}

inline int cmd_render(const CommonOptions& common, const std::vector<std::string>& offsets,
                      std::ostream& log) {
  const PinholeCamera cam = load_camera(common, false);
  const auto dir = prepare_out_dir(common);
  write_render(dir / "wireframes.svg", cam,
               offsets.empty() ? default_render_offsets() : parse_offsets(offsets));
  log << "wrote " << (dir / "wireframes.svg").string() << '\n';
  return kOk;
}

// ---- mine ---------------------------------------------------------------

struct MineOptions {
  double dx = 0.1;
  double dy = 0.0;
  bool free_txy = false;
  bool free_tz = false;
  double tol = 0.1;
  int max_iters = 200;
};

inline int cmd_mine(const CommonOptions& common, const MineOptions& opt, std::ostream& log) {
  const PinholeCamera cam = load_camera(common, false);
  const Instance ref = reference_instance();
  Placement init = ref.placement;
  init.t += Vec3(opt.dx, opt.dy, 0.0);
  MinerConfig cfg;
  cfg.freeze_txy = !opt.free_txy;
  cfg.freeze_tz = !opt.free_tz;
  cfg.tol = opt.tol;
  cfg.max_iters = opt.max_iters;
  const MinerResult r = mine_ambiguous(cam, ref, init, cfg);
  const Keypoints3 ref3 = corners_3d(ref), k3 = corners_3d(r.instance);
  nlohmann::json j{{"converged", r.converged},
                   {"residual_px", r.residual},
                   {"iterations", r.iterations},
                   {"extrusion", {r.instance.shape.extrusion.x(), r.instance.shape.extrusion.y(),
                                  r.instance.shape.extrusion.z()}},
                   {"t", {r.instance.placement.t.x(), r.instance.placement.t.y(),
                          r.instance.placement.t.z()}},
                   {"err3d_rel_m", error_3d(ref3, k3, ErrorMode::RootRelative)},
                   {"err3d_abs_m", error_3d(ref3, k3, ErrorMode::Absolute)}};
  log << j.dump(2) << '\n';
  {
    auto out = open_out(prepare_out_dir(common) / "mined.json");
    out << j.dump(2) << '\n';
  }
  return r.converged ? kOk : kNumerical;
}

// ---- train --------------------------------------------------------------

struct TrainOptions {
  std::size_t n_train = 50000;
  std::size_t n_val = 5000;
  int epochs = 200;
  int hidden = 256;
  double lr = 1e-3;
  int batch = 256;
  std::string target = "root_relative";
  double pair_fraction = 0.1;
  std::string precision = "float";
  bool save_dataset = false;
};

struct TrainSummary {
  std::string status = "ok";
  std::string message;
  double collision_floor = 0.0;
  VariantOutcome centered;
  VariantOutcome absolute;
  nlohmann::json params_centered;
  nlohmann::json params_absolute;
};

template <class Scalar>
TrainSummary run_train_experiment(const PinholeCamera& cam, const Dataset& train_set,
                                  const Dataset& val_set, const TrainConfig& base) {
  TrainSummary s;
  s.collision_floor = collision_floor(train_set, base.target);
  for (InputVariant v : {InputVariant::Centered, InputVariant::Absolute}) {
    TrainConfig cfg = base;
    cfg.variant = v;
    VariantRun<Scalar> run;
    try {
      run = run_variant<Scalar>(cam, cfg, train_set, val_set);
    } catch (const NumericalError& e) {
      s.status = "diverged";
      s.message = std::string(to_string(v)) + ": " + e.what();
      return s;
    }
    (v == InputVariant::Centered ? s.centered : s.absolute) = run.outcome;
    (v == InputVariant::Centered ? s.params_centered : s.params_absolute) =
        io::params_to_json(run.params);
  }
  return s;
}

inline int cmd_train(const CommonOptions& common, const TrainOptions& opt, std::ostream& log) {
  if (!common.seed) throw InputError("--seed is required for train");
  const PinholeCamera cam = load_camera(common, false);
  if (opt.n_train < 1 || opt.n_val < 1) throw InputError("--n-train and --n-val must be positive");
  if (opt.target != "root_relative" && opt.target != "absolute")
    throw InputError("--target must be root_relative or absolute");
  if (opt.precision != "float" && opt.precision != "double")
    throw InputError("--precision must be float or double");
  const auto dir = prepare_out_dir(common);
  const std::uint64_t seed = *common.seed;

  const std::size_t n = opt.n_train + opt.n_val;
  PairConfig pairs;
  pairs.fraction = opt.pair_fraction;
  const Dataset ds = sample_dataset(cam, SampleRanges{}, n, seed, pairs);
  const auto [train_set, val_set] =
      split(ds, static_cast<double>(opt.n_train) / static_cast<double>(n), seed);
  if (opt.save_dataset) {
    io::save_dataset(train_set, (dir / "dataset_train.csv").string());
    io::save_dataset(val_set, (dir / "dataset_val.csv").string());
  }

  TrainConfig base;
  base.target = opt.target == "absolute" ? TargetKind::Absolute3D : TargetKind::RootRelative;
  base.optimizer = OptimizerConfig{opt.hidden, opt.lr, opt.batch, opt.epochs, seed};

  TrainSummary s = opt.precision == "float"
                       ? run_train_experiment<float>(cam, train_set, val_set, base)
                       : run_train_experiment<double>(cam, train_set, val_set, base);
  if (s.status == "ok" && opt.epochs == 0) s.status = "noop";

  for (auto [name, outcome, params] :
       {std::tuple{"centered", &s.centered, &s.params_centered},
        std::tuple{"absolute", &s.absolute, &s.params_absolute}}) {
    auto out = open_out(dir / (std::string("curve_") + name + ".csv"));
    io::write_curve_csv(out, outcome->curve);
    if (!params->is_null()) {
      auto pout = open_out(dir / (std::string("params_") + name + ".json"));
      pout << params->dump() << '\n';
    }
  }

  auto variant_json = [](const VariantOutcome& o) {
    return nlohmann::json{{"final_train_mse", o.final_train_mse},
                          {"final_val_mse", o.final_val_mse},
                          {"epochs_completed", o.curve.size()}};
  };
  const double ratio = s.absolute.final_train_mse > 0.0
                           ? s.centered.final_train_mse / s.absolute.final_train_mse
                           : 0.0;
  nlohmann::json summary{{"status", s.status},
                         {"seed", seed},
                         {"target", opt.target},
                         {"precision", opt.precision},
                         {"n_train", train_set.size()},
                         {"n_val", val_set.size()},
                         {"epochs", opt.epochs},
                         {"hidden", opt.hidden},
                         {"collision_floor", s.collision_floor},
                         {"centered", variant_json(s.centered)},
                         {"absolute", variant_json(s.absolute)},
                         {"train_mse_ratio_centered_over_absolute", ratio}};
  if (!s.message.empty()) summary["message"] = s.message;
  if (s.status == "noop") summary["note"] = "epochs=0: no training performed";
  {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  log << summary.dump(2) << '\n';
  return s.status == "diverged" ? kNumerical : kOk;
}

// ---- circle-demo --------------------------------------------------------

struct CircleOptions {
  double f = 1.0;
  double radius = 0.485;
  double crop_width = 0.5;
  std::vector<double> angles{0.0, kOffAxisAngle};
  double max_distance = 0.0;
};

inline int cmd_circle_demo(const CommonOptions& common, const CircleOptions& opt,
                           std::ostream& log) {
  const auto dir = prepare_out_dir(common);
  auto csv = open_out(dir / "circle.csv");
  csv << "angle_rad,angle_deg,distance,status\n";
  log << std::setw(14) << "angle_rad" << std::setw(12) << "angle_deg" << std::setw(16)
      << "distance" << '\n';
  for (double a : opt.angles) {
    std::string dist, status = "ok";
    try {
      dist = io::fmt_real(circle_distance_for_crop(opt.f, opt.radius, opt.crop_width, a,
                                                   opt.max_distance));
    } catch (const InputError&) {
      status = "infeasible";
    }
    csv << io::fmt_real(a) << ',' << io::fmt_real(a * 180.0 / M_PI) << ',' << dist << ','
        << status << '\n';
    log << std::setw(14) << std::setprecision(8) << a << std::setw(12) << std::setprecision(6)
        << a * 180.0 / M_PI << std::setw(16)
        << (status == "ok" ? dist.substr(0, std::min<std::size_t>(dist.size(), 12)) : status)
        << '\n';
  }
  return kOk;
}

// ---- entry point --------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Perspective-distortion shape ambiguity lab"};
  app.require_subcommand(1);
  CommonOptions common;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--camera", common.camera_path, "Intrinsics JSON {fx,fy,px,py,width,height}");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--seed", seed_value, "Random seed");
  };

  EncodeOptions enc;
  auto* encode = app.add_subcommand("encode", "Intrinsics-aware positional encoding of a crop");
  add_common(encode);
  encode->add_option("--crop", enc.crop, "u0,v0,u1,v1 in original pixels")->delimiter(',');
  encode->add_option("--mode", enc.mode, "sparse | dense");
  encode->add_option("--out-h", enc.out_h, "Dense rows");
  encode->add_option("--out-w", enc.out_w, "Dense columns");

  ScatterOptions sc;
  auto* scatter = app.add_subcommand("scatter", "2D vs 3D error scatter of ambiguous shapes");
  add_common(scatter);
  scatter->add_option("--grid", sc.grid, "Offsets per axis");
  scatter->add_option("--max-offset", sc.max_offset, "Largest |dx|, |dy| in meters");
  scatter->add_option("--perturbed", sc.perturbed, "Perturbed context points per offset");
  scatter->add_option("--sigma", sc.sigma, "Extrusion perturbation std-dev in meters");
  scatter->add_flag("--svg", sc.svg, "Also write wireframes.svg");

  std::vector<std::string> render_offsets;
  auto* render = app.add_subcommand("render", "SVG wireframes of ambiguous parallelepipeds");
  add_common(render);
  render->add_option("--offset", render_offsets, "dx,dy (repeatable)");

  MineOptions mo;
  auto* mine = app.add_subcommand("mine", "Numerically mine an ambiguous parallelepiped");
  add_common(mine);
  mine->add_option("--dx", mo.dx);
  mine->add_option("--dy", mo.dy);
  mine->add_flag("--free-txy", mo.free_txy);
  mine->add_flag("--free-tz", mo.free_tz);
  mine->add_option("--tol", mo.tol, "Convergence threshold in px");
  mine->add_option("--max-iters", mo.max_iters);

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train the centered and absolute keypoint MLPs");
  add_common(train);
  train->add_option("--n-train", tr.n_train);
  train->add_option("--n-val", tr.n_val);
  train->add_option("--epochs", tr.epochs);
  train->add_option("--hidden", tr.hidden);
  train->add_option("--lr", tr.lr);
  train->add_option("--batch", tr.batch);
  train->add_option("--target", tr.target, "root_relative | absolute");
  train->add_option("--pair-fraction", tr.pair_fraction);
  train->add_option("--precision", tr.precision, "float | double");
  train->add_flag("--save-dataset", tr.save_dataset);

  CircleOptions co;
  auto* circle = app.add_subcommand("circle-demo", "Distance of equal-looking spheres");
  add_common(circle);
  circle->add_option("--f", co.f);
  circle->add_option("--radius", co.radius);
  circle->add_option("--crop-width", co.crop_width);
  circle->add_option("--angles", co.angles, "Offset angles in radians")->delimiter(',');
  circle->add_option("--max-distance", co.max_distance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kBadInput;
  }

  auto* active = app.get_subcommands().front();
  if (active->count("--seed")) common.seed = seed_value;

  try {
    if (active == encode) return cmd_encode(common, enc, log);
    if (active == scatter) return cmd_scatter(common, sc, log);
    if (active == render) return cmd_render(common, render_offsets, log);
    if (active == mine) return cmd_mine(common, mo, log);
    if (active == train) return cmd_train(common, tr, log);
    if (active == circle) return cmd_circle_demo(common, co, log);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kBadInput;
}

}  // namespace pdsa::cli

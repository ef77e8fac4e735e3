#include "commands.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stratdepth/dvlora.hpp"
#include "stratdepth/io.hpp"
#include "stratdepth/losses.hpp"

namespace stratdepth::cli {

using nlohmann::json;

void init_logging() {
  auto logger = spdlog::stderr_color_mt("stratdepth");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("STRATDEPTH_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

Alignment alignment_from_string(const std::string& s) {
  if (s == "none") return Alignment::kNone;
  if (s == "se3") return Alignment::kSe3;
  if (s == "sim3") return Alignment::kSim3;
  throw UsageError("--align must be none, se3 or sim3 (got '" + s + "')");
}

std::string to_string(Alignment a) {
  switch (a) {
    case Alignment::kNone: return "none";
    case Alignment::kSe3: return "se3";
    case Alignment::kSim3: return "sim3";
  }
  return "none";
}

Scaling scaling_from_string(const std::string& s) {
  if (s == "none") return Scaling::kNone;
  if (s == "median") return Scaling::kMedian;
  throw UsageError("--scaling must be none or median (got '" + s + "')");
}

std::string to_string(Scaling s) {
  return s == Scaling::kMedian ? "median" : "none";
}

namespace {

struct FrameOutcome {
  bool ok = false;
  MetricSet metrics;
  double valid_ratio = 0.0;
  std::string reason;
};

void validate_common(const CommonOptions& opts) {
  try {
    opts.eval.validate();
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  if (!(opts.depth_scale > 0.0)) throw UsageError("--depth-scale must be > 0");
  if (opts.jobs == 0) throw UsageError("--jobs must be >= 1");
}

std::map<std::string, ConfigValue> common_config(const CommonOptions& opts) {
  std::map<std::string, ConfigValue> c;
  c["manifest"] = opts.manifest.string();
  c["out"] = opts.out.string();
  if (opts.csv_out) c["csv"] = opts.csv_out->string();
  c["min_depth"] = opts.eval.min_depth;
  c["max_depth"] = opts.eval.max_depth;
  c["scaling"] = to_string(opts.eval.scaling);
  c["delta1_threshold"] = opts.eval.delta_thresholds[0];
  c["delta2_threshold"] = opts.eval.delta_thresholds[1];
  c["delta3_threshold"] = opts.eval.delta_thresholds[2];
  c["depth_scale"] = opts.depth_scale;
  c["jobs"] = static_cast<std::int64_t>(opts.jobs);
  return c;
}

// Frames are independent; results land in manifest order whatever the
// completion order.
std::vector<FrameOutcome> evaluate_frames(const FrameManifest& manifest,
                                          const CommonOptions& opts) {
  std::vector<FrameOutcome> results(manifest.entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      const auto& e = manifest.entries[i];
      FrameOutcome& r = results[i];
      try {
        const DepthMap gt = read_depth(manifest.resolve(e.gt_path), opts.depth_scale);
        const DepthMap pred =
            read_depth(manifest.resolve(e.pred_path), opts.depth_scale);
        r.metrics = compute_metrics(pred, gt, opts.eval);
        r.valid_ratio = valid_ratio(gt);
        r.ok = true;
      } catch (const std::exception& ex) {
        r.reason = ex.what();
      }
    }
  };
  const std::size_t n_threads = std::min(opts.jobs, std::max<std::size_t>(1, results.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok) {
      spdlog::warn("skipping frame '{}': {}", manifest.entries[i].frame_id,
                   results[i].reason);
    }
  }
  return results;
}

void write_outputs(const CommonOptions& opts, const Report& report) {
  write_report(opts.out, report);
  if (opts.csv_out) write_report_csv(*opts.csv_out, report);
}

json metrics_summary(const MetricSet& m) {
  return json{{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},
              {"rmse", m.rmse},       {"rmse_log", m.rmse_log},
              {"delta1", m.delta1},   {"delta2", m.delta2},
              {"delta3", m.delta3},   {"n_pixels", m.n_pixels}};
}

std::vector<std::string> rank_names(std::size_t k) {
  switch (k) {
    case 1: return {"Hard"};
    case 2: return {"Hard", "Easy"};
    case 3: return {"Hard", "Medium", "Easy"};
    default: break;
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("Rank" + std::to_string(i));
  return names;
}

}  // namespace

int run_evaluate(const EvaluateOptions& opts, std::ostream& out) {
  validate_common(opts);
  const FrameManifest manifest = read_manifest(opts.manifest);
  const auto outcomes = evaluate_frames(manifest, opts);

  Report report;
  report.command = "evaluate";
  report.config = common_config(opts);
  std::vector<MetricSet> per_frame;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& id = manifest.entries[i].frame_id;
    if (outcomes[i].ok) {
      report.frames.push_back({id, outcomes[i].metrics, {}, {}, {}});
      per_frame.push_back(outcomes[i].metrics);
    } else {
      report.skipped.push_back({id, outcomes[i].reason});
    }
  }
  if (!per_frame.empty()) report.global = aggregate(per_frame);
  write_outputs(opts, report);

  json summary{{"command", "evaluate"},
               {"evaluated", report.frames.size()},
               {"skipped", report.skipped.size()}};
  if (report.global) summary["global"] = metrics_summary(*report.global);
  out << summary.dump() << '\n';
  if (per_frame.empty()) {
    spdlog::error("no frame could be evaluated");
    return kExitDataError;
  }
  return kExitOk;
}

int run_stratify(const StratifyOptions& opts, std::ostream& out) {
  validate_common(opts);
  if (opts.k == 0) throw UsageError("--k must be >= 1");
  if (!(opts.tol > 0.0)) throw UsageError("--tol must be > 0");

  const FrameManifest manifest = read_manifest(opts.manifest);
  if (opts.feature == FeatureKind::kBaselineError) {
    for (const auto& e : manifest.entries) {
      if (!e.baseline_abs_rel) {
        throw Error(ErrorCode::kManifestError,
                    "frame '" + e.frame_id +
                        "' has no baseline_abs_rel, required by "
                        "--feature baseline-error");
      }
    }
  }
  const auto outcomes = evaluate_frames(manifest, opts);

  Report report;
  report.command = "stratify";
  report.config = common_config(opts);
  report.config["feature"] = std::string(to_string(opts.feature));
  report.config["k"] = static_cast<std::int64_t>(opts.k);
  report.config["seed"] = static_cast<std::int64_t>(opts.seed);
  report.config["tol"] = opts.tol;
  report.config["max_iter"] = static_cast<std::int64_t>(opts.max_iter);
  report.config["init_jitter"] = opts.init_jitter;
  if (opts.model_in) report.config["model"] = opts.model_in->string();
  if (opts.model_out) report.config["model_out"] = opts.model_out->string();

  std::vector<std::size_t> kept;
  std::vector<double> features;
  std::vector<MetricSet> per_frame;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok) {
      report.skipped.push_back({manifest.entries[i].frame_id, outcomes[i].reason});
      continue;
    }
    kept.push_back(i);
    per_frame.push_back(outcomes[i].metrics);
    features.push_back(opts.feature == FeatureKind::kValidRatio
                           ? outcomes[i].valid_ratio
                           : *manifest.entries[i].baseline_abs_rel);
  }
  if (kept.empty()) {
    write_outputs(opts, report);
    spdlog::error("no frame could be evaluated");
    out << json{{"command", "stratify"}, {"evaluated", 0},
                {"skipped", report.skipped.size()}}.dump()
        << '\n';
    return kExitDataError;
  }

  GmmModel model;
  if (opts.model_in) {
    std::ifstream in(*opts.model_in);
    if (!in) {
      throw Error(ErrorCode::kIoError, "cannot open " + opts.model_in->string());
    }
    const std::string text{std::istreambuf_iterator<char>(in), {}};
    model = gmm_from_json(text);
    if (model.feature_kind != opts.feature) {
      throw UsageError("model was fitted on " +
                       std::string(to_string(model.feature_kind)) +
                       ", not " + std::string(to_string(opts.feature)));
    }
  } else {
    GmmOptions g;
    g.k = opts.k;
    g.seed = opts.seed;
    g.tol = opts.tol;
    g.max_iter = opts.max_iter;
    g.init_jitter = opts.init_jitter;
    g.feature_kind = opts.feature;
    model = fit_gmm_1d(features, g);
    spdlog::info("GMM fitted in {} iterations (converged: {})", model.iterations,
                 model.converged);
  }
  const auto labels = assign(model, features);
  const auto order = difficulty_order(model);
  const auto names = rank_names(model.k);
  std::vector<std::string> name_of(model.k);
  for (std::size_t rank = 0; rank < model.k; ++rank) name_of[order[rank]] = names[rank];

  for (std::size_t j = 0; j < kept.size(); ++j) {
    report.frames.push_back({manifest.entries[kept[j]].frame_id, per_frame[j],
                             features[j], labels[j], name_of[labels[j]]});
  }
  report.global = aggregate(per_frame);

  if (model.k == 3) {
    const auto labeling = label_difficulty(model);
    const auto strat = stratified_report(labels, labeling, per_frame);
    for (const auto& [difficulty, summary] : strat) {
      report.clusters.push_back(
          {std::string(to_string(difficulty)),
           labeling.component_of[static_cast<std::size_t>(difficulty)],
           summary.count, summary.metrics});
    }
  } else {
    for (std::size_t rank = 0; rank < model.k; ++rank) {
      std::vector<MetricSet> group;
      for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] == order[rank]) group.push_back(per_frame[j]);
      }
      ClusterRecord c{names[rank], order[rank], group.size(), std::nullopt};
      if (!group.empty()) c.metrics = aggregate(group);
      report.clusters.push_back(std::move(c));
    }
  }
  report.gmm = model;
  write_outputs(opts, report);
  if (opts.model_out) {
    std::ofstream mo(*opts.model_out, std::ios::trunc);
    mo << gmm_to_json(model) << '\n';
    if (!mo) {
      throw Error(ErrorCode::kIoError, "cannot write " + opts.model_out->string());
    }
  }

  json clusters = json::array();
  for (const auto& c : report.clusters) {
    json cj{{"name", c.name}, {"count", c.count}};
    if (c.metrics) cj["abs_rel"] = c.metrics->abs_rel;
    clusters.push_back(cj);
  }
  out << json{{"command", "stratify"},
              {"evaluated", report.frames.size()},
              {"skipped", report.skipped.size()},
              {"clusters", clusters}}
             .dump()
      << '\n';
  return kExitOk;
}

int run_warp(const WarpOptions& opts, std::ostream& out) {
  if (!(opts.alpha >= 0.0 && opts.alpha <= 1.0)) {
    throw UsageError("--alpha must lie in [0, 1]");
  }
  if (!(opts.depth_scale > 0.0)) throw UsageError("--depth-scale must be > 0");
  // Validate the rig before touching the images.
  const CameraRig rig = read_rig(opts.rig);
  const Image source = image_from_grid(read_pfm(opts.image));
  const DepthMap depth = read_depth(opts.depth, opts.depth_scale);
  if (source.width != depth.width || source.height != depth.height) {
    throw Error(ErrorCode::kShapeError, "image and depth differ in size");
  }
  const WarpResult w = warp(source, depth, rig);
  write_pfm(opts.out, grid_from_image(w.warped));
  const auto mask_path =
      opts.mask_out ? *opts.mask_out
                    : std::filesystem::path(opts.out.string() + ".mask.pgm");
  write_mask_pgm(mask_path, w.valid, depth.width, depth.height);

  const auto valid = static_cast<std::size_t>(
      std::count(w.valid.begin(), w.valid.end(), std::uint8_t{1}));
  json summary{{"command", "warp"},
               {"valid_pixels", valid},
               {"total_pixels", w.valid.size()},
               {"warped", opts.out.string()},
               {"mask", mask_path.string()}};
  if (opts.target) {
    const Image target = image_from_grid(read_pfm(*opts.target));
    const auto pl = photometric_loss(target, w.warped, w.valid, opts.alpha);
    summary["photometric_loss"] = pl.scalar;
    summary["alpha"] = opts.alpha;
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

int run_dvlora_check(const DvloraCheckOptions& opts, std::ostream& out) {
  try {
    check_rank(opts.d_in, opts.d_out, opts.rank);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  if (opts.trials == 0 || opts.batch == 0) {
    throw UsageError("--trials and --batch must be >= 1");
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_matrix = [&](std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };

  std::size_t passed = 0;
  double worst = 0.0;
  bool frozen_ok = true;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const DvLoraLayer layer = random_layer(opts.d_in, opts.d_out, opts.rank, rng());
    const Eigen::MatrixXd x = random_matrix(opts.d_in, opts.batch);
    const Eigen::MatrixXd up = random_matrix(opts.d_out, opts.batch);
    const auto r = check_gradients(layer, x, up);
    worst = std::max(worst, r.max_rel_error);
    if (r.passed) {
      ++passed;
    } else {
      spdlog::warn("trial {}: max relative error {} in {}", t, r.max_rel_error,
                   r.worst_tensor);
    }
    const DvLoraLayer fresh = init_layer(layer.w0, opts.rank, rng());
    const DvLoraLayer stepped =
        apply_update(layer, gradients(layer, x, up), 1e-2);
    frozen_ok = frozen_ok && effective_weight(fresh) == layer.w0 &&
                stepped.w0 == layer.w0;
  }
  const std::size_t count = trainable_param_count(opts.d_in, opts.d_out, opts.rank);
  const bool ok = passed == opts.trials && frozen_ok;
  out << json{{"command", "dvlora-check"},
              {"d_in", opts.d_in},
              {"d_out", opts.d_out},
              {"rank", opts.rank},
              {"trials", opts.trials},
              {"passed", passed},
              {"max_rel_error", worst},
              {"tolerance", GradCheckOptions{}.tolerance},
              {"frozen_base_intact", frozen_ok},
              {"trainable_params", count},
              {"params_a", opts.rank * opts.d_in},
              {"params_b", opts.d_out * opts.rank},
              {"params_lambda_u", opts.rank},
              {"params_lambda_v", opts.d_out},
              {"result", ok ? "pass" : "fail"}}
             .dump()
      << '\n';
  return ok ? kExitOk : kExitDataError;
}

int run_ate(const AteOptions& opts, std::ostream& out) {
  const Trajectory gt = read_trajectory(opts.gt);
  const Trajectory est = read_trajectory(opts.est);
  const AteResult r = ate(gt, est, opts.align);
  if (opts.out) write_trajectory(*opts.out, r.aligned);
  double max_err = 0.0;
  for (double e : r.per_frame) max_err = std::max(max_err, e);
  out << json{{"command", "ate"},
              {"align", to_string(opts.align)},
              {"poses", gt.size()},
              {"ate_rmse", r.rmse},
              {"max_error", max_err},
              {"scale", r.alignment.scale}}
             .dump()
      << '\n';
  return kExitOk;
}

}  // namespace stratdepth::cli

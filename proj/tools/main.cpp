#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "stratdepth/io.hpp"

namespace cli = stratdepth::cli;

namespace {

void add_common(CLI::App* cmd, cli::CommonOptions& o, std::string& scaling) {
  cmd->add_option("--manifest", o.manifest, "JSON frame manifest")->required();
  cmd->add_option("--out", o.out, "report JSON path")->required();
  cmd->add_option("--csv", o.csv_out, "optional CSV flattening of the report");
  cmd->add_option("--min-depth", o.eval.min_depth, "lower depth clamp (mm)")
      ->capture_default_str();
  cmd->add_option("--max-depth", o.eval.max_depth, "upper depth clamp (mm)")
      ->capture_default_str();
  cmd->add_option("--scaling", scaling, "none | median")->capture_default_str();
  cmd->add_option("--depth-scale", o.depth_scale,
                  "divisor turning 16-bit PGM samples into mm")
      ->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  cli::init_logging();

  CLI::App app{"Stratified depth evaluation, self-supervised losses and "
               "DV-LoRA checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", stratdepth::library_version());

  cli::EvaluateOptions eval_opts;
  std::string eval_scaling = "none";
  auto* evaluate = app.add_subcommand("evaluate", "per-frame and aggregate depth metrics");
  add_common(evaluate, eval_opts, eval_scaling);

  cli::StratifyOptions strat_opts;
  std::string strat_scaling = "none";
  std::string feature = "valid-ratio";
  auto* stratify =
      app.add_subcommand("stratify", "GMM difficulty stratification of frames");
  add_common(stratify, strat_opts, strat_scaling);
  stratify->add_option("--feature", feature, "valid-ratio | baseline-error")
      ->capture_default_str();
  stratify->add_option("--k", strat_opts.k, "mixture components")->capture_default_str();
  stratify->add_option("--seed", strat_opts.seed, "seed for initialization jitter")
      ->capture_default_str();
  stratify->add_option("--tol", strat_opts.tol, "EM log-likelihood tolerance")
      ->capture_default_str();
  stratify->add_option("--max-iter", strat_opts.max_iter, "EM iteration cap")
      ->capture_default_str();
  stratify->add_option("--init-jitter", strat_opts.init_jitter,
                       "seeded jitter on initial means (std units)")
      ->capture_default_str();
  stratify->add_option("--model", strat_opts.model_in, "reuse a fitted GMM JSON");
  stratify->add_option("--model-out", strat_opts.model_out, "write the fitted GMM JSON");

  cli::WarpOptions warp_opts;
  auto* warp = app.add_subcommand("warp", "inverse-warp a source image into the target view");
  warp->add_option("--image", warp_opts.image, "source image (grayscale PFM)")->required();
  warp->add_option("--depth", warp_opts.depth, "target depth (PFM or 16-bit PGM)")
      ->required();
  warp->add_option("--rig", warp_opts.rig, "camera rig JSON")->required();
  warp->add_option("--out", warp_opts.out, "warped image PFM")->required();
  warp->add_option("--mask-out", warp_opts.mask_out, "validity mask PGM");
  warp->add_option("--target", warp_opts.target, "target image for the photometric loss");
  warp->add_option("--alpha", warp_opts.alpha, "SSIM weight")->capture_default_str();
  warp->add_option("--lambda", warp_opts.lambda, "smoothness weight")->capture_default_str();
  warp->add_option("--depth-scale", warp_opts.depth_scale, "16-bit PGM divisor")
      ->capture_default_str();

  cli::DvloraCheckOptions dv_opts;
  auto* dvlora = app.add_subcommand("dvlora-check",
                                    "finite-difference gradient suite for DV-LoRA");
  dvlora->add_option("--d-in", dv_opts.d_in)->capture_default_str();
  dvlora->add_option("--d-out", dv_opts.d_out)->capture_default_str();
  dvlora->add_option("--rank", dv_opts.rank)->capture_default_str();
  dvlora->add_option("--seed", dv_opts.seed)->capture_default_str();
  dvlora->add_option("--trials", dv_opts.trials)->capture_default_str();
  dvlora->add_option("--batch", dv_opts.batch, "inputs per trial")->capture_default_str();

  cli::AteOptions ate_opts;
  std::string align = "se3";
  auto* ate = app.add_subcommand("ate", "absolute trajectory error");
  ate->add_option("--gt", ate_opts.gt, "ground-truth trajectory")->required();
  ate->add_option("--est", ate_opts.est, "estimated trajectory")->required();
  ate->add_option("--align", align, "none | se3 | sim3")->capture_default_str();
  ate->add_option("--out", ate_opts.out, "aligned estimate trajectory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  return cli::guarded([&]() -> int {
    if (*evaluate) {
      eval_opts.eval.scaling = cli::scaling_from_string(eval_scaling);
      return cli::run_evaluate(eval_opts, std::cout);
    }
    if (*stratify) {
      strat_opts.eval.scaling = cli::scaling_from_string(strat_scaling);
      try {
        strat_opts.feature = stratdepth::feature_kind_from_string(feature);
      } catch (const stratdepth::Error& e) {
        throw cli::UsageError(e.detail());
      }
      return cli::run_stratify(strat_opts, std::cout);
    }
    if (*warp) return cli::run_warp(warp_opts, std::cout);
    if (*dvlora) return cli::run_dvlora_check(dv_opts, std::cout);
    ate_opts.align = cli::alignment_from_string(align);
    return cli::run_ate(ate_opts, std::cout);
  });
}

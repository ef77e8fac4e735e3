#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace stratdepth {

/**
 * Low-rank adapted linear layer with learnable diagonal scalings:
 *
 *     W_eff = W0 + diag(lambda_v) * B * diag(lambda_u) * A
 *
 * W0 is d_out x d_in and frozen, A is r x d_in, B is d_out x r, lambda_u has
 * r entries and lambda_v has d_out entries. Layers are values; updates build
 * new layers and never touch W0.
 */
struct DvLoraLayer {
  Eigen::MatrixXd w0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd lambda_u;
  Eigen::VectorXd lambda_v;

  std::size_t d_in() const noexcept { return static_cast<std::size_t>(w0.cols()); }
  std::size_t d_out() const noexcept { return static_cast<std::size_t>(w0.rows()); }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(a.rows()); }

  /// Throws kRankError when rank is outside [1, min(d_in, d_out)] and
  /// kShapeError when factor shapes disagree.
  void validate() const;
};

/// Gradients of the trainable tensors. There is deliberately no slot for W0.
struct DvLoraGradients {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd lambda_u;
  Eigen::VectorXd lambda_v;
};

/// Multiply-accumulate counts of one factored forward call.
struct ForwardCost {
  std::size_t frozen_macs = 0;   // W0 x
  std::size_t adapter_macs = 0;  // A x, lambda_u, B, lambda_v
};

void check_rank(std::size_t d_in, std::size_t d_out, std::size_t rank);

/// A ~ N(0, 1/d_in) from a seeded generator, B = 0, both scalings = 1, so
/// the fresh layer computes exactly W0.
DvLoraLayer init_layer(const Eigen::MatrixXd& w0, std::size_t rank,
                       std::uint64_t seed);

/// Dense W_eff built by row and column scaling (no diagonal matrices).
Eigen::MatrixXd effective_weight(const DvLoraLayer& layer);

/// Factored y = W0 x + lambda_v . (B (lambda_u . (A x))); `x` holds one
/// input per column. Throws kShapeError on a dimension mismatch.
Eigen::MatrixXd forward(const DvLoraLayer& layer, const Eigen::MatrixXd& x,
                        ForwardCost* cost = nullptr);
Eigen::VectorXd forward(const DvLoraLayer& layer, const Eigen::VectorXd& x,
                        ForwardCost* cost = nullptr);

/// Analytic gradients of sum(upstream .* forward(x)).
DvLoraGradients gradients(const DvLoraLayer& layer, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& upstream);

/// Plain gradient step on the trainable tensors; W0 is copied unchanged.
DvLoraLayer apply_update(const DvLoraLayer& layer, const DvLoraGradients& g,
                         double learning_rate);

/// r*d_in + d_out*r + r + d_out. Throws kRankError for an invalid rank.
std::size_t trainable_param_count(std::size_t d_in, std::size_t d_out,
                                  std::size_t rank);

struct MergedWeight {
  Eigen::MatrixXd merged;
  Eigen::MatrixXd delta;
};

MergedWeight merge(const DvLoraLayer& layer);
Eigen::MatrixXd unmerge(const MergedWeight& m);

// Finite-difference verification ------------------------------------------

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor of the relative error |g - fd| / max(|g|, |fd|, floor);
  /// only matters for gradients that are exactly zero.
  double floor = 1e-8;
  double tolerance = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
  bool passed = false;
};

/// Central differences of sum(upstream .* W_eff x) against gradients(). The
/// objective is re-evaluated from the factors with long double accumulation.
GradCheckResult check_gradients(const DvLoraLayer& layer,
                                const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& upstream,
                                const GradCheckOptions& opts = {});

/// Layer with every tensor (including B and the scalings) drawn at random.
DvLoraLayer random_layer(std::size_t d_in, std::size_t d_out, std::size_t rank,
                         std::uint64_t seed);

// Serialization -------------------------------------------------------------

/// Binary bundle: 8-byte magic "DVLORA\0\0", u32 version, u32 d_out, d_in,
/// rank (little-endian), then little-endian float64 tensors in row-major
/// order: w0, a, b, lambda_u, lambda_v.
std::vector<std::uint8_t> layer_to_bytes(const DvLoraLayer& layer);
DvLoraLayer layer_from_bytes(std::span<const std::uint8_t> bytes);

void save_layer(const std::filesystem::path& path, const DvLoraLayer& layer);
DvLoraLayer load_layer(const std::filesystem::path& path);

}  // namespace stratdepth

#pragma once

#include "stratdepth/camera.hpp"
#include "stratdepth/depth_map.hpp"
#include "stratdepth/image.hpp"

namespace stratdepth {

struct SsimParams {
  std::size_t window = 3;  // odd, box window
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

struct LossWeights {
  double alpha = 0.85;
  double lambda = 1e-3;

  void validate() const;
};

struct SsimResult {
  Image map;  // same shape as the inputs
  double mean = 0.0;
};

/// Box-window SSIM with reflect padding (edge sample not repeated).
/// Throws kShapeError on mismatched inputs, kValidationError on an even or
/// zero window.
SsimResult ssim(const Image& a, const Image& b, const SsimParams& params = {});

struct PhotometricResult {
  Image map;  // single channel, channel-averaged per-pixel loss
  double scalar = 0.0;
};

/**
 * Per-pixel alpha * (1 - SSIM) / 2 + (1 - alpha) * |target - warped|,
 * averaged over channels; the scalar is the mean over `valid` pixels.
 * Throws kEmptyMask when no pixel is valid.
 */
PhotometricResult photometric_loss(const Image& target, const Image& warped,
                                   const Mask& valid, double alpha,
                                   const SsimParams& params = {});

/**
 * Edge-aware smoothness of a single-channel disparity map.
 *
 * Disparity is divided by its mean, then the x and y forward-difference
 * terms |d d*| * exp(-|d I|) are each averaged over the positions where the
 * difference exists and summed. Image gradients are channel-averaged.
 * Throws kDegenerateDisparity when mean(disp) == 0.
 */
double edge_aware_smoothness(const Image& disp, const Image& guide);

double total_loss(double photometric, double smoothness,
                  const LossWeights& weights);

struct WarpResult {
  Image warped;
  Mask valid;
};

/// Sub-pixel distance under which a projected coordinate snaps to the
/// nearest integer, so exact reprojections sample exactly.
inline constexpr double kPixelSnap = 1e-9;

/**
 * Inverse-warps `source` into the target view using the target depth.
 *
 * Each valid target pixel is backprojected, moved by the rig and projected
 * into the source, which is bilinearly sampled there. A pixel is invalid
 * when its depth is invalid, the point lands at z <= 0, or any bilinear tap
 * with nonzero weight falls outside the source. Invalid pixels hold zeros.
 */
WarpResult warp(const Image& source, const DepthMap& target_depth,
                const CameraRig& rig);

}  // namespace stratdepth

#include "stratdepth/losses.hpp"

#include <cmath>
#include <string>

#include "stratdepth/error.hpp"

namespace stratdepth {

namespace {

// Reflect without repeating the edge sample: -1 -> 1, n -> n-2.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kValidationError, "alpha must lie in [0, 1]");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kValidationError, "lambda must be >= 0");
  }
}

SsimResult ssim(const Image& a, const Image& b, const SsimParams& params) {
  if (!same_shape(a, b) || a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kShapeError, "SSIM inputs differ in shape");
  }
  if (params.window == 0 || params.window % 2 == 0) {
    throw Error(ErrorCode::kValidationError,
                "SSIM window must be odd, got " +
                    std::to_string(params.window));
  }
  const auto r = static_cast<std::ptrdiff_t>(params.window / 2);
  const double inv_n = 1.0 / static_cast<double>(params.window * params.window);

  SsimResult out{Image(a.width, a.height, a.channels), 0.0};
  double total = 0.0;
  for (std::size_t y = 0; y < a.height; ++y) {
    for (std::size_t x = 0; x < a.width; ++x) {
      for (std::size_t c = 0; c < a.channels; ++c) {
        double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
          const auto yy = reflect(static_cast<std::ptrdiff_t>(y) + dy, a.height);
          for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
            const auto xx =
                reflect(static_cast<std::ptrdiff_t>(x) + dx, a.width);
            const double va = a.at(xx, yy, c);
            const double vb = b.at(xx, yy, c);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
          }
        }
        const double mu_a = sa * inv_n;
        const double mu_b = sb * inv_n;
        const double var_a = saa * inv_n - mu_a * mu_a;
        const double var_b = sbb * inv_n - mu_b * mu_b;
        const double cov = sab * inv_n - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + params.c1) * (2.0 * cov + params.c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + params.c1) *
                           (var_a + var_b + params.c2);
        const double s = num / den;
        out.map.at(x, y, c) = s;
        total += s;
      }
    }
  }
  out.mean = total / static_cast<double>(out.map.values.size());
  return out;
}

PhotometricResult photometric_loss(const Image& target, const Image& warped,
                                   const Mask& valid, double alpha,
                                   const SsimParams& params) {
  if (!same_shape(target, warped) || valid.size() != target.pixels()) {
    throw Error(ErrorCode::kShapeError,
                "photometric loss inputs differ in shape");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kValidationError, "alpha must lie in [0, 1]");
  }
  const auto s = ssim(target, warped, params);
  PhotometricResult out{Image(target.width, target.height, 1), 0.0};
  const double inv_c = 1.0 / static_cast<double>(target.channels);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y < target.height; ++y) {
    for (std::size_t x = 0; x < target.width; ++x) {
      double l = 0.0;
      for (std::size_t c = 0; c < target.channels; ++c) {
        const double l1 = std::abs(target.at(x, y, c) - warped.at(x, y, c));
        l += alpha * (1.0 - s.map.at(x, y, c)) / 2.0 + (1.0 - alpha) * l1;
      }
      l *= inv_c;
      out.map.at(x, y) = l;
      if (valid[y * target.width + x]) {
        total += l;
        ++count;
      }
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyMask, "photometric loss has no valid pixel");
  }
  out.scalar = total / static_cast<double>(count);
  return out;
}

double edge_aware_smoothness(const Image& disp, const Image& guide) {
  if (disp.channels != 1) {
    throw Error(ErrorCode::kShapeError, "disparity must be single-channel");
  }
  if (disp.width != guide.width || disp.height != guide.height ||
      disp.values.size() != disp.pixels() ||
      guide.values.size() != guide.pixels() * guide.channels) {
    throw Error(ErrorCode::kShapeError,
                "disparity and guide differ in spatial shape");
  }
  double mean = 0.0;
  for (double d : disp.values) mean += d;
  mean /= static_cast<double>(disp.values.size());
  if (mean == 0.0 || !std::isfinite(mean)) {
    throw Error(ErrorCode::kDegenerateDisparity, "mean disparity is zero");
  }

  auto image_grad = [&](std::size_t x0, std::size_t y0, std::size_t x1,
                        std::size_t y1) {
    double g = 0.0;
    for (std::size_t c = 0; c < guide.channels; ++c) {
      g += std::abs(guide.at(x1, y1, c) - guide.at(x0, y0, c));
    }
    return g / static_cast<double>(guide.channels);
  };

  const std::size_t w = disp.width, h = disp.height;
  double term_x = 0.0, term_y = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const double dd = std::abs(disp.at(x + 1, y) - disp.at(x, y)) / std::abs(mean);
      term_x += dd * std::exp(-image_grad(x, y, x + 1, y));
    }
  }
  for (std::size_t y = 0; y + 1 < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dd = std::abs(disp.at(x, y + 1) - disp.at(x, y)) / std::abs(mean);
      term_y += dd * std::exp(-image_grad(x, y, x, y + 1));
    }
  }
  double loss = 0.0;
  if (w > 1) loss += term_x / static_cast<double>(h * (w - 1));
  if (h > 1) loss += term_y / static_cast<double>((h - 1) * w);
  return loss;
}

double total_loss(double photometric, double smoothness,
                  const LossWeights& weights) {
  return photometric + weights.lambda * smoothness;
}

}  // namespace stratdepth

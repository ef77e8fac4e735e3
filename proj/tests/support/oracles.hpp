#pragma once

// Brute-force reference implementations used only by the tests. They are
// written to be obviously correct rather than fast, and deliberately avoid
// the library's code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "stratdepth/depth_map.hpp"
#include "stratdepth/dvlora.hpp"
#include "stratdepth/image.hpp"
#include "stratdepth/metrics.hpp"
#include "stratdepth/stratify.hpp"

namespace stratdepth::oracle {

inline double median_by_sort(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

inline MetricSet metrics(const DepthMap& pred, const DepthMap& gt,
                         const EvalOptions& opts) {
  std::vector<double> p, g;
  for (std::size_t y = 0; y < gt.height; ++y) {
    for (std::size_t x = 0; x < gt.width; ++x) {
      const std::size_t i = y * gt.width + x;
      if (pred.valid[i] && gt.valid[i]) {
        p.push_back(pred.values[i]);
        g.push_back(gt.values[i]);
      }
    }
  }
  double ratio = 1.0;
  if (opts.scaling == Scaling::kMedian) {
    std::vector<double> r;
    for (std::size_t i = 0; i < p.size(); ++i) r.push_back(g[i] / p[i]);
    ratio = median_by_sort(r);
  }
  MetricSet m;
  const double n = static_cast<double>(p.size());
  double a = 0, s = 0, e = 0, l = 0, d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double pi = p[i] * ratio;
    double gi = g[i];
    pi = pi < opts.min_depth ? opts.min_depth : (pi > opts.max_depth ? opts.max_depth : pi);
    gi = gi < opts.min_depth ? opts.min_depth : (gi > opts.max_depth ? opts.max_depth : gi);
    a += std::fabs(pi - gi) / gi;
    s += std::pow(pi - gi, 2) / gi;
    e += std::pow(pi - gi, 2);
    l += std::pow(std::log(pi / gi), 2);
    const double up = pi / gi, down = gi / pi;
    const double t = up > down ? up : down;
    d1 += t < opts.delta_thresholds[0] ? 1 : 0;
    d2 += t < opts.delta_thresholds[1] ? 1 : 0;
    d3 += t < opts.delta_thresholds[2] ? 1 : 0;
  }
  m.abs_rel = a / n;
  m.sq_rel = s / n;
  m.rmse = std::sqrt(e / n);
  m.rmse_log = std::sqrt(l / n);
  m.delta1 = d1 / n;
  m.delta2 = d2 / n;
  m.delta3 = d3 / n;
  m.n_pixels = p.size();
  return m;
}

inline MetricSet mean_of(const std::vector<MetricSet>& v) {
  MetricSet m;
  for (const auto& x : v) {
    m.abs_rel += x.abs_rel / static_cast<double>(v.size());
    m.sq_rel += x.sq_rel / static_cast<double>(v.size());
    m.rmse += x.rmse / static_cast<double>(v.size());
    m.rmse_log += x.rmse_log / static_cast<double>(v.size());
    m.delta1 += x.delta1 / static_cast<double>(v.size());
    m.delta2 += x.delta2 / static_cast<double>(v.size());
    m.delta3 += x.delta3 / static_cast<double>(v.size());
    m.n_pixels += x.n_pixels;
  }
  return m;
}

inline double max_metric_diff(const MetricSet& a, const MetricSet& b) {
  const auto va = metric_values(a);
  const auto vb = metric_values(b);
  double d = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) d = std::max(d, std::fabs(va[i] - vb[i]));
  return d;
}

/// Windowed SSIM on an explicitly mirrored copy of each channel, with
/// two-pass (centered) variance and covariance.
inline Image ssim_map(const Image& a, const Image& b, std::size_t window,
                      double c1, double c2) {
  const auto r = static_cast<long>(window / 2);
  const long w = static_cast<long>(a.width), h = static_cast<long>(a.height);
  auto mirror = [](long i, long n) {
    if (n == 1) return 0L;
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
  };
  Image out(a.width, a.height, a.channels);
  for (std::size_t c = 0; c < a.channels; ++c) {
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        std::vector<double> va, vb;
        for (long dy = -r; dy <= r; ++dy) {
          for (long dx = -r; dx <= r; ++dx) {
            const auto xx = static_cast<std::size_t>(mirror(x + dx, w));
            const auto yy = static_cast<std::size_t>(mirror(y + dy, h));
            va.push_back(a.at(xx, yy, c));
            vb.push_back(b.at(xx, yy, c));
          }
        }
        const double n = static_cast<double>(va.size());
        double ma = 0, mb = 0;
        for (std::size_t k = 0; k < va.size(); ++k) {
          ma += va[k];
          mb += vb[k];
        }
        ma /= n;
        mb /= n;
        double sa = 0, sb = 0, sab = 0;
        for (std::size_t k = 0; k < va.size(); ++k) {
          sa += (va[k] - ma) * (va[k] - ma);
          sb += (vb[k] - mb) * (vb[k] - mb);
          sab += (va[k] - ma) * (vb[k] - mb);
        }
        sa /= n;
        sb /= n;
        sab /= n;
        out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) =
            ((2 * ma * mb + c1) * (2 * sab + c2)) /
            ((ma * ma + mb * mb + c1) * (sa + sb + c2));
      }
    }
  }
  return out;
}

/// Posterior via plain densities (no log domain); argmax with lowest index.
inline std::size_t posterior_argmax(const GmmModel& m, double x) {
  std::size_t best = 0;
  double best_p = -1.0;
  for (std::size_t c = 0; c < m.k; ++c) {
    const double p = m.weights[c] *
                     std::exp(-(x - m.means[c]) * (x - m.means[c]) /
                              (2 * m.variances[c])) /
                     std::sqrt(2 * std::numbers::pi * m.variances[c]);
    if (p > best_p) {
      best_p = p;
      best = c;
    }
  }
  return best;
}

/// Dense effective weight with explicit diagonal matrices.
inline Eigen::MatrixXd dense_effective_weight(const DvLoraLayer& l) {
  const Eigen::MatrixXd lv = l.lambda_v.asDiagonal().toDenseMatrix();
  const Eigen::MatrixXd lu = l.lambda_u.asDiagonal().toDenseMatrix();
  return l.w0 + lv * l.b * lu * l.a;
}

/// Central-difference gradients of sum(upstream .* W_eff x), objective in
/// long double from the explicit dense product.
struct FdGradients {
  Eigen::MatrixXd a, b;
  Eigen::VectorXd lambda_u, lambda_v;
};

inline FdGradients finite_differences(const DvLoraLayer& layer,
                                      const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& up,
                                      double step = 1e-5) {
  auto objective = [&](const DvLoraLayer& l) {
    // W_eff entries accumulated in long double.
    long double total = 0.0L;
    for (Eigen::Index i = 0; i < l.w0.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.w0.cols(); ++j) {
        long double w = l.w0(i, j);
        for (Eigen::Index k = 0; k < l.a.rows(); ++k) {
          w += static_cast<long double>(l.lambda_v(i)) * l.b(i, k) *
               l.lambda_u(k) * l.a(k, j);
        }
        long double gx = 0.0L;
        for (Eigen::Index n = 0; n < x.cols(); ++n) {
          gx += static_cast<long double>(up(i, n)) * x(j, n);
        }
        total += w * gx;
      }
    }
    return total;
  };
  FdGradients g;
  auto run = [&](auto member, auto& out) {
    DvLoraLayer work = layer;
    auto& t = work.*member;
    out = t;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double saved = t.data()[i];
      const double hi = saved + step, lo = saved - step;
      t.data()[i] = hi;
      const long double fp = objective(work);
      t.data()[i] = lo;
      const long double fm = objective(work);
      t.data()[i] = saved;
      out.data()[i] = static_cast<double>((fp - fm) / (hi - lo));
    }
  };
  run(&DvLoraLayer::a, g.a);
  run(&DvLoraLayer::b, g.b);
  run(&DvLoraLayer::lambda_u, g.lambda_u);
  run(&DvLoraLayer::lambda_v, g.lambda_v);
  return g;
}

template <typename A, typename B>
double max_rel_error(const A& analytic, const B& numeric, double floor = 1e-8) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i], n = numeric.data()[i];
    const double d = std::max({std::fabs(a), std::fabs(n), floor});
    worst = std::max(worst, std::fabs(a - n) / d);
  }
  return worst;
}

// Generators ----------------------------------------------------------------

inline DepthMap random_depth(std::mt19937_64& rng, std::size_t w, std::size_t h,
                             double valid_prob = 0.8, double lo = 0.5,
                             double hi = 120.0) {
  std::uniform_real_distribution<double> depth(lo, hi);
  std::bernoulli_distribution keep(valid_prob);
  DepthMap d;
  d.width = w;
  d.height = h;
  d.values.resize(w * h);
  d.valid.resize(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    d.values[i] = depth(rng);
    d.valid[i] = keep(rng);
  }
  return d;
}

inline Image random_image(std::mt19937_64& rng, std::size_t w, std::size_t h,
                          std::size_t c = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h, c);
  for (double& v : img.values) v = u(rng);
  return img;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r,
                                     Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace stratdepth::oracle

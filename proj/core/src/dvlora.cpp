#include "stratdepth/dvlora.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bytes.hpp"
#include "stratdepth/error.hpp"

namespace stratdepth {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'D', 'V', 'L', 'O', 'R', 'A', 0, 0};
constexpr std::uint32_t kFormatVersion = 1;

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

void check_rank(std::size_t d_in, std::size_t d_out, std::size_t rank) {
  if (rank < 1 || rank > std::min(d_in, d_out)) {
    throw Error(ErrorCode::kRankError,
                "rank " + std::to_string(rank) + " outside [1, " +
                    std::to_string(std::min(d_in, d_out)) + "]");
  }
}

void DvLoraLayer::validate() const {
  check_rank(d_in(), d_out(), rank());
  const auto r = a.rows();
  if (a.cols() != w0.cols() || b.rows() != w0.rows() || b.cols() != r ||
      lambda_u.size() != r || lambda_v.size() != w0.rows()) {
    throw Error(ErrorCode::kShapeError,
                "inconsistent factors: w0 " + dims(w0.rows(), w0.cols()) +
                    ", a " + dims(a.rows(), a.cols()) + ", b " +
                    dims(b.rows(), b.cols()) + ", lambda_u " +
                    std::to_string(lambda_u.size()) + ", lambda_v " +
                    std::to_string(lambda_v.size()));
  }
}

DvLoraLayer init_layer(const Eigen::MatrixXd& w0, std::size_t rank,
                       std::uint64_t seed) {
  const auto d_in = static_cast<std::size_t>(w0.cols());
  const auto d_out = static_cast<std::size_t>(w0.rows());
  check_rank(d_in, d_out, rank);
  const auto r = static_cast<Eigen::Index>(rank);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));

  DvLoraLayer layer;
  layer.w0 = w0;
  layer.a.resize(r, w0.cols());
  for (Eigen::Index i = 0; i < layer.a.rows(); ++i) {
    for (Eigen::Index j = 0; j < layer.a.cols(); ++j) {
      layer.a(i, j) = normal(rng) * scale;
    }
  }
  layer.b = Eigen::MatrixXd::Zero(w0.rows(), r);
  layer.lambda_u = Eigen::VectorXd::Ones(r);
  layer.lambda_v = Eigen::VectorXd::Ones(w0.rows());
  return layer;
}

DvLoraLayer random_layer(std::size_t d_in, std::size_t d_out, std::size_t rank,
                         std::uint64_t seed) {
  check_rank(d_in, d_out, rank);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
  };
  const auto in = static_cast<Eigen::Index>(d_in);
  const auto out = static_cast<Eigen::Index>(d_out);
  const auto r = static_cast<Eigen::Index>(rank);
  DvLoraLayer layer;
  layer.w0 = fill(out, in);
  layer.a = fill(r, in);
  layer.b = fill(out, r);
  layer.lambda_u = fill(r, 1);
  layer.lambda_v = fill(out, 1);
  return layer;
}

Eigen::MatrixXd effective_weight(const DvLoraLayer& layer) {
  layer.validate();
  // Column-scale B by lambda_u, then row-scale the product by lambda_v.
  const Eigen::MatrixXd bu = layer.b * layer.lambda_u.asDiagonal();
  Eigen::MatrixXd delta = bu * layer.a;
  delta.array().colwise() *= layer.lambda_v.array();
  return layer.w0 + delta;
}

Eigen::MatrixXd forward(const DvLoraLayer& layer, const Eigen::MatrixXd& x,
                        ForwardCost* cost) {
  layer.validate();
  if (x.rows() != layer.w0.cols()) {
    throw Error(ErrorCode::kShapeError,
                "input has " + std::to_string(x.rows()) + " rows, layer takes " +
                    std::to_string(layer.w0.cols()));
  }
  const Eigen::Index d_out = layer.w0.rows();
  const Eigen::Index d_in = layer.w0.cols();
  const Eigen::Index r = layer.a.rows();
  const Eigen::Index n = x.cols();

  Eigen::MatrixXd y(d_out, n);
  Eigen::VectorXd h(r);
  std::size_t frozen = 0, adapter = 0;
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index i = 0; i < d_out; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < d_in; ++j) acc += layer.w0(i, j) * x(j, col);
      y(i, col) = acc;
    }
    frozen += static_cast<std::size_t>(d_out * d_in);

    for (Eigen::Index k = 0; k < r; ++k) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < d_in; ++j) acc += layer.a(k, j) * x(j, col);
      h(k) = acc * layer.lambda_u(k);
    }
    adapter += static_cast<std::size_t>(r * d_in + r);

    for (Eigen::Index i = 0; i < d_out; ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < r; ++k) acc += layer.b(i, k) * h(k);
      y(i, col) += layer.lambda_v(i) * acc;
    }
    adapter += static_cast<std::size_t>(d_out * r + d_out);
  }
  if (cost != nullptr) {
    cost->frozen_macs += frozen;
    cost->adapter_macs += adapter;
  }
  return y;
}

Eigen::VectorXd forward(const DvLoraLayer& layer, const Eigen::VectorXd& x,
                        ForwardCost* cost) {
  const Eigen::MatrixXd batch = x;
  return forward(layer, batch, cost).col(0);
}

DvLoraGradients gradients(const DvLoraLayer& layer, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& upstream) {
  layer.validate();
  if (x.rows() != layer.w0.cols() || upstream.rows() != layer.w0.rows() ||
      upstream.cols() != x.cols()) {
    throw Error(ErrorCode::kShapeError,
                "gradient inputs: x " + dims(x.rows(), x.cols()) +
                    ", upstream " + dims(upstream.rows(), upstream.cols()) +
                    ", layer " + dims(layer.w0.rows(), layer.w0.cols()));
  }
  const Eigen::MatrixXd h = layer.a * x;
  const Eigen::MatrixXd s = layer.lambda_u.asDiagonal() * h;
  const Eigen::MatrixXd z = layer.b * s;
  const Eigen::MatrixXd gz = layer.lambda_v.asDiagonal() * upstream;
  const Eigen::MatrixXd ds = layer.b.transpose() * gz;

  DvLoraGradients g;
  g.lambda_v = upstream.cwiseProduct(z).rowwise().sum();
  g.b = gz * s.transpose();
  g.lambda_u = ds.cwiseProduct(h).rowwise().sum();
  g.a = (layer.lambda_u.asDiagonal() * ds) * x.transpose();
  return g;
}

DvLoraLayer apply_update(const DvLoraLayer& layer, const DvLoraGradients& g,
                         double learning_rate) {
  layer.validate();
  DvLoraLayer next = layer;
  next.a -= learning_rate * g.a;
  next.b -= learning_rate * g.b;
  next.lambda_u -= learning_rate * g.lambda_u;
  next.lambda_v -= learning_rate * g.lambda_v;
  return next;
}

std::size_t trainable_param_count(std::size_t d_in, std::size_t d_out,
                                  std::size_t rank) {
  check_rank(d_in, d_out, rank);
  return rank * d_in + d_out * rank + rank + d_out;
}

MergedWeight merge(const DvLoraLayer& layer) {
  MergedWeight m;
  m.merged = effective_weight(layer);
  m.delta = m.merged - layer.w0;
  return m;
}

Eigen::MatrixXd unmerge(const MergedWeight& m) { return m.merged - m.delta; }

GradCheckResult check_gradients(const DvLoraLayer& layer,
                                const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& upstream,
                                const GradCheckOptions& opts) {
  const DvLoraGradients analytic = gradients(layer, x, upstream);
  GradCheckResult result;

  // sum(upstream .* y) evaluated straight from the factors with extended
  // accumulation, independent of forward(). The objective is linear in every
  // single parameter, so the central difference has no truncation error and
  // only rounding of this sum limits the check.
  auto objective = [&](const DvLoraLayer& l) {
    long double total = 0.0L;
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
      for (Eigen::Index i = 0; i < l.w0.rows(); ++i) {
        long double yi = 0.0L;
        for (Eigen::Index j = 0; j < l.w0.cols(); ++j) {
          yi += static_cast<long double>(l.w0(i, j)) * x(j, n);
        }
        long double adapted = 0.0L;
        for (Eigen::Index k = 0; k < l.a.rows(); ++k) {
          long double h = 0.0L;
          for (Eigen::Index j = 0; j < l.a.cols(); ++j) {
            h += static_cast<long double>(l.a(k, j)) * x(j, n);
          }
          adapted += static_cast<long double>(l.b(i, k)) * l.lambda_u(k) * h;
        }
        yi += static_cast<long double>(l.lambda_v(i)) * adapted;
        total += static_cast<long double>(upstream(i, n)) * yi;
      }
    }
    return total;
  };
  auto probe = [&](const char* name, auto member, const auto& grad) {
    DvLoraLayer work = layer;
    auto& tensor = work.*member;
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      const double saved = tensor.data()[i];
      const double plus = saved + opts.step;
      const double minus = saved - opts.step;
      tensor.data()[i] = plus;
      const long double up = objective(work);
      tensor.data()[i] = minus;
      const long double down = objective(work);
      tensor.data()[i] = saved;
      // Divide by the step actually taken, which is exact in double.
      const auto fd = static_cast<double>((up - down) / (plus - minus));
      const double an = grad.data()[i];
      const double denom =
          std::max({std::abs(an), std::abs(fd), opts.floor});
      const double rel = std::abs(an - fd) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = name;
      }
      ++result.checked;
    }
  };
  probe("a", &DvLoraLayer::a, analytic.a);
  probe("b", &DvLoraLayer::b, analytic.b);
  probe("lambda_u", &DvLoraLayer::lambda_u, analytic.lambda_u);
  probe("lambda_v", &DvLoraLayer::lambda_v, analytic.lambda_v);
  result.passed = result.max_rel_error < opts.tolerance;
  return result;
}

std::vector<std::uint8_t> layer_to_bytes(const DvLoraLayer& layer) {
  layer.validate();
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  const auto le = std::endian::little;
  detail::store<std::uint32_t>(out, kFormatVersion, le);
  detail::store<std::uint32_t>(out, static_cast<std::uint32_t>(layer.d_out()), le);
  detail::store<std::uint32_t>(out, static_cast<std::uint32_t>(layer.d_in()), le);
  detail::store<std::uint32_t>(out, static_cast<std::uint32_t>(layer.rank()), le);
  auto put_matrix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        detail::store<double>(out, m(i, j), le);
      }
    }
  };
  put_matrix(layer.w0);
  put_matrix(layer.a);
  put_matrix(layer.b);
  put_matrix(layer.lambda_u);
  put_matrix(layer.lambda_v);
  return out;
}

DvLoraLayer layer_from_bytes(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 8 + 4 * 4;
  if (bytes.size() < kHeader) {
    throw Error(ErrorCode::kTruncatedError, "layer bundle header is truncated");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kFormatError, "not a DVLORA layer bundle");
  }
  const auto le = std::endian::little;
  const auto version = detail::load<std::uint32_t>(bytes.data() + 8, le);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kFormatError,
                "unsupported layer bundle version " + std::to_string(version));
  }
  const std::uint64_t d_out = detail::load<std::uint32_t>(bytes.data() + 12, le);
  const std::uint64_t d_in = detail::load<std::uint32_t>(bytes.data() + 16, le);
  const std::uint64_t rank = detail::load<std::uint32_t>(bytes.data() + 20, le);
  check_rank(d_in, d_out, rank);
  const std::uint64_t payload = bytes.size() - kHeader;
  // Each product of two 32-bit dims fits in 64 bits; bounding W0 by the
  // payload first keeps the sum from wrapping.
  const std::uint64_t w0_count = d_out * d_in;
  const std::uint64_t count =
      w0_count > payload / 8
          ? w0_count
          : w0_count + rank * d_in + d_out * rank + rank + d_out;
  if (payload / 8 < count) {
    throw Error(ErrorCode::kTruncatedError,
                "layer bundle declares " + std::to_string(count) +
                    " values but holds " + std::to_string(payload / 8));
  }
  if (payload != count * 8) {
    throw Error(ErrorCode::kFormatError, "trailing bytes after layer bundle");
  }
  const std::uint8_t* p = bytes.data() + kHeader;
  auto get_matrix = [&](std::uint64_t rows, std::uint64_t cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = detail::load<double>(p, le);
        p += 8;
      }
    }
    return m;
  };
  DvLoraLayer layer;
  layer.w0 = get_matrix(d_out, d_in);
  layer.a = get_matrix(rank, d_in);
  layer.b = get_matrix(d_out, rank);
  layer.lambda_u = get_matrix(rank, 1);
  layer.lambda_v = get_matrix(d_out, 1);
  return layer;
}

void save_layer(const std::filesystem::path& path, const DvLoraLayer& layer) {
  detail::write_file(path, layer_to_bytes(layer));
}

DvLoraLayer load_layer(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return layer_from_bytes(bytes);
}

}  // namespace stratdepth

// Copyright 2026 The noiseinv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "noiseinv/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Core>

namespace noiseinv {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) { return ConstMap(m.data(), m.rows(), m.cols()); }
MutMap view(Matrix& m) { return MutMap(m.data(), m.rows(), m.cols()); }

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch(op, a, b);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(values_.size()) + " values cannot fill " +
                     shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << '[' << rows_ << 'x' << cols_ << ']';
  return os.str();
}

bool Matrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void AffineLayer::validate() const {
  if (biases.rows() != weights.rows() || biases.cols() != 1) {
    throw ShapeError("AffineLayer: weights " + weights.shape_string() + " with biases " +
                     biases.shape_string());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  Matrix out(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_mismatch("matmul_nt", a, b);
  Matrix out(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_mismatch("matmul_tn", a, b);
  Matrix out(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape("add", a, b);
  Matrix out = a;
  axpy(out, 1.0, b);
  return out;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix out = a;
  for (double& v : out.values()) v *= factor;
  return out;
}

void axpy(Matrix& a, double factor, const Matrix& b) {
  require_same_shape("axpy", a, b);
  auto dst = a.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * src[i];
}

Matrix affine_forward(const Matrix& x, const AffineLayer& layer) {
  layer.validate();
  if (x.cols() != layer.weights.cols()) {
    throw ShapeError("affine_forward: input " + x.shape_string() + " does not match weights " +
                     layer.weights.shape_string());
  }
  Matrix out = matmul_nt(x, layer.weights);
  const auto b = layer.biases.values();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return out;
}

AffineGrads affine_backward(const Matrix& grad_out, const Matrix& x, const AffineLayer& layer,
                            bool need_grad_x) {
  layer.validate();
  if (x.cols() != layer.in_dim() || grad_out.cols() != layer.out_dim() ||
      grad_out.rows() != x.rows()) {
    throw ShapeError("affine_backward: grad_out " + grad_out.shape_string() + ", input " +
                     x.shape_string() + ", weights " + layer.weights.shape_string());
  }
  AffineGrads g;
  if (need_grad_x) g.grad_x = matmul(grad_out, layer.weights);
  g.grad_w = matmul_tn(grad_out, x);
  g.grad_b = Matrix(layer.out_dim(), 1);
  for (std::size_t i = 0; i < grad_out.rows(); ++i) {
    const auto r = grad_out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) g.grad_b(j, 0) += r[j];
  }
  return g;
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& grad_out, const Matrix& x) {
  require_same_shape("relu_backward", grad_out, x);
  Matrix out(x.rows(), x.cols());
  auto dst = out.values();
  auto g = grad_out.values();
  auto in = x.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = in[i] > 0.0 ? g[i] : 0.0;
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  if (logits.cols() < 2) {
    throw ShapeError("softmax_rows: need at least 2 classes, got " + logits.shape_string());
  }
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    auto dst = out.row(i);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      dst[j] = std::exp(in[j] - peak);
      total += dst[j];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  // Below about -745 exp(z) is 0 in double; keep the result positive.
  const double e = std::exp(z);
  return std::max(e / (1.0 + e), std::numeric_limits<double>::denorm_min());
}

Matrix sigmoid(const Matrix& z) {
  Matrix out = z;
  for (double& v : out.values()) v = sigmoid(v);
  return out;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double check_gradient(const std::function<double(const Matrix&)>& value,
                      const Matrix& analytic, const Matrix& params, std::size_t probe_count,
                      double step, std::uint64_t seed) {
  require_same_shape("check_gradient", analytic, params);
  if (params.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
  Matrix probe = params;
  double worst = 0.0;
  for (std::size_t n = 0; n < probe_count; ++n) {
    const std::size_t k = pick(rng);
    const double saved = probe.values()[k];
    probe.values()[k] = saved + step;
    const double plus = value(probe);
    probe.values()[k] = saved - step;
    const double minus = value(probe);
    probe.values()[k] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw std::runtime_error("check_gradient: non-finite evaluation at coordinate " +
                               std::to_string(k));
    }
    const double numeric = (plus - minus) / (2.0 * step);
    worst = std::max(worst, relative_error(analytic.values()[k], numeric));
  }
  return worst;
}

double check_gradient(const std::function<ValueAndGradient(const Matrix&)>& fn,
                      const Matrix& params, std::size_t probe_count, double step,
                      std::uint64_t seed) {
  const ValueAndGradient at = fn(params);
  if (!std::isfinite(at.value) || !at.gradient.all_finite()) {
    throw std::runtime_error("check_gradient: non-finite evaluation at the base point");
  }
  return check_gradient([&fn](const Matrix& p) { return fn(p).value; }, at.gradient, params,
                        probe_count, step, seed);
}

}  // namespace noiseinv

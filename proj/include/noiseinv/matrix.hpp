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

#ifndef NOISEINV_MATRIX_HPP_
#define NOISEINV_MATRIX_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace noiseinv {

/// Raised whenever two operands do not have compatible shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles. Batch-first: one example per row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  std::string shape_string() const;
  bool all_finite() const;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// One fully connected layer: out = x * W^T + b, with W stored out x in.
struct AffineLayer {
  Matrix weights;  // out x in
  Matrix biases;   // out x 1

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
  void validate() const;

  friend bool operator==(const AffineLayer&, const AffineLayer&) = default;
};

struct AffineGrads {
  Matrix grad_x;
  Matrix grad_w;
  Matrix grad_b;
};

// Plain products, routed through Eigen. `_nt` multiplies by the transpose of
// the second argument, `_tn` by the transpose of the first.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
/// a += factor * b, in place.
void axpy(Matrix& a, double factor, const Matrix& b);

Matrix affine_forward(const Matrix& x, const AffineLayer& layer);

/// Exact gradients of affine_forward. When `need_grad_x` is false the
/// returned grad_x is left empty (used for the input layer).
AffineGrads affine_backward(const Matrix& grad_out, const Matrix& x, const AffineLayer& layer,
                            bool need_grad_x = true);

Matrix relu(const Matrix& x);
/// Passes grad_out where x > 0; the subgradient at exactly 0 is 0.
Matrix relu_backward(const Matrix& grad_out, const Matrix& x);

/// Row-wise softmax with max subtraction. Requires at least two columns.
Matrix softmax_rows(const Matrix& logits);

double sigmoid(double z);
Matrix sigmoid(const Matrix& z);

/// Analytic value and gradient of a scalar function of one parameter matrix.
struct ValueAndGradient {
  double value = 0.0;
  Matrix gradient;
};

/// Compares `fn`'s analytic gradient with central differences at
/// `probe_count` randomly chosen coordinates of `params` and returns the
/// largest |a - n| / max(|a|, |n|, 1e-8). Throws std::runtime_error if any
/// evaluation is non-finite.
double check_gradient(const std::function<ValueAndGradient(const Matrix&)>& fn,
                      const Matrix& params, std::size_t probe_count, double step,
                      std::uint64_t seed = 0);

/// The same comparison as check_gradient, for callers that evaluate the
/// scalar and the analytic gradient separately.
double check_gradient(const std::function<double(const Matrix&)>& value,
                      const Matrix& analytic, const Matrix& params, std::size_t probe_count,
                      double step, std::uint64_t seed = 0);

/// |a - n| / max(|a|, |n|, floor). The floor turns the ratio into an
/// absolute bound for gradients too small to difference reliably.
double relative_error(double analytic, double numeric, double floor = 1e-8);

}  // namespace noiseinv

#endif  // NOISEINV_MATRIX_HPP_

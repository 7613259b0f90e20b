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

// The Y-shaped invariance network.
//
//            x
//            |
//        encoder E            (ReLU after every layer)
//            |
//            h  -------------.
//            |               |
//      recognizer R    discriminator D
//            |               |
//     softmax -> y_hat   sigmoid -> d_hat
//
// Training minimizes
//
//   L = L1(y_hat, y; R, E) + alpha * L2(d_hat, d; D) - beta * L3(d_hat, d; E)
//
// where the parameters after the semicolon are the only ones a term updates.
// L1 and L2 are ordinary cross-entropies. L3 = d log(1 - d_hat) +
// (1 - d) log(d_hat), so -L3 is the cross-entropy against flipped domain
// labels: minimizing it over E pushes h towards representations on which D
// picks the wrong domain. The D branch is only used during training.

#ifndef NOISEINV_YNET_HPP_
#define NOISEINV_YNET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "noiseinv/matrix.hpp"

namespace noiseinv {

inline constexpr double kProbFloor = 1e-12;

struct YNetConfig {
  std::size_t input_dim = 0;
  /// Widths of the encoder layers; the last one is the dimension of h.
  std::vector<std::size_t> encoder_layers;
  /// Recognizer widths, ending in the number of classes.
  std::vector<std::size_t> recognizer_layers;
  /// Discriminator widths, ending in 1. Empty means a branch-free network,
  /// i.e. plain multi-condition training.
  std::vector<std::size_t> discriminator_layers;

  std::size_t hidden_dim() const { return encoder_layers.back(); }
  std::size_t num_classes() const { return recognizer_layers.back(); }
  bool has_discriminator() const { return !discriminator_layers.empty(); }

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  friend bool operator==(const YNetConfig&, const YNetConfig&) = default;
};

/// Default discriminator width for a given h: a quarter of it, at least 16.
std::size_t default_discriminator_width(std::size_t hidden_dim);

/// Builds a config; `discriminator_hidden` defaults to one hidden layer of
/// default_discriminator_width(h).
YNetConfig make_ynet_config(std::size_t input_dim, std::size_t num_classes,
                            std::vector<std::size_t> encoder_layers,
                            std::vector<std::size_t> recognizer_hidden,
                            std::optional<std::vector<std::size_t>> discriminator_hidden = {});

/// Encoder, recognizer and discriminator parameter subsets. No layer is
/// shared between them.
struct YNetParams {
  std::vector<AffineLayer> encoder;
  std::vector<AffineLayer> recognizer;
  std::vector<AffineLayer> discriminator;

  YNetConfig config() const;
  /// Checks that layer dimensions chain from the input through h.
  void validate() const;
  std::size_t parameter_count() const;

  friend bool operator==(const YNetParams&, const YNetParams&) = default;
};

/// Same layout as YNetParams; holds d(loss)/d(param) for each subset.
struct YNetGrads {
  std::vector<AffineLayer> encoder;
  std::vector<AffineLayer> recognizer;
  std::vector<AffineLayer> discriminator;

  static YNetGrads zeros_like(const YNetParams& params);
  friend bool operator==(const YNetGrads&, const YNetGrads&) = default;
};

/// Glorot-uniform weights, zero biases. Layers are drawn in the order
/// encoder, recognizer, discriminator from one stream, so two configs that
/// differ only in their discriminator share encoder and recognizer weights.
YNetParams init_params(const YNetConfig& config, std::uint64_t seed);

/// Activations cached by forward() for composite_backward().
struct StackTrace {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // affine output of each layer
};

struct ForwardTrace {
  StackTrace encoder;
  StackTrace recognizer;
  StackTrace discriminator;
  Matrix h;
  Matrix y_hat;  // batch x C
  Matrix d_hat;  // batch x 1, empty for branch-free networks
};

struct BatchLabels {
  std::vector<std::uint32_t> y;
  std::vector<std::uint8_t> d;  // 0 = clean, 1 = noisy
};

ForwardTrace forward(const YNetParams& params, const Matrix& x);

/// Class posteriors only; the discriminator is never touched.
Matrix predict(const YNetParams& params, const Matrix& x);
std::vector<std::uint32_t> predict_classes(const YNetParams& params, const Matrix& x);

/// Mean of -log y_hat[i, y_i].
double loss_l1(const Matrix& y_hat, std::span<const std::uint32_t> y);
/// Mean binary cross-entropy of d_hat against d.
double loss_l2(const Matrix& d_hat, std::span<const std::uint8_t> d);
/// Mean of d log(1 - d_hat) + (1 - d) log(d_hat). Always <= 0.
double loss_l3(const Matrix& d_hat, std::span<const std::uint8_t> d);

struct LossTerms {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
};

LossTerms compute_losses(const ForwardTrace& trace, const BatchLabels& labels);

/// Gradient of the composite loss with each term restricted to its own
/// parameter subset:
///   recognizer    <- dL1/dR
///   discriminator <- alpha * dL2/dD
///   encoder       <- dL1/dE + beta * d(-L3)/dE, the L3 part flowing back
///                    through D's layers with D held fixed.
/// Throws std::invalid_argument for negative alpha or beta.
YNetGrads composite_backward(const YNetParams& params, const ForwardTrace& trace,
                             const BatchLabels& labels, double alpha, double beta);

/// Fraction of rows where (d_hat > 0.5) equals d. A d_hat of exactly 0.5
/// counts as a prediction of 0 (clean).
double discriminator_accuracy(const Matrix& d_hat, std::span<const std::uint8_t> d);

// Checkpoint file: "YNET1", the layer widths as little-endian u32, then
// every layer's weights (row-major) and biases as little-endian f64.
std::vector<std::uint8_t> serialize_params(const YNetParams& params);
YNetParams deserialize_params(std::span<const std::uint8_t> bytes);
void save_checkpoint(const YNetParams& params, const std::filesystem::path& path);
/// Rejects bad magic, truncation, and, when `expected` is given, any
/// dimension that differs from it.
YNetParams load_checkpoint(const std::filesystem::path& path,
                           const YNetConfig* expected = nullptr);

}  // namespace noiseinv

#endif  // NOISEINV_YNET_HPP_

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


#include "noiseinv/gradcheck.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "noiseinv/rng.hpp"

namespace noiseinv {

namespace {

using Objective = std::function<double(const YNetParams&)>;

// Central differences over every coordinate of `layers` (a subset of
// `params` chosen by `select`), against the matching analytic subset.
double check_subset(const YNetParams& params, const std::vector<AffineLayer>& analytic,
                    std::vector<AffineLayer> YNetParams::*select, const Objective& objective,
                    double step) {
  double worst = 0.0;
  YNetParams probe = params;
  for (std::size_t l = 0; l < analytic.size(); ++l) {
    for (int part = 0; part < 2; ++part) {
      auto pick = [&](auto& layer) -> Matrix& { return part == 0 ? layer.weights : layer.biases; };
      const Matrix& grad = part == 0 ? analytic[l].weights : analytic[l].biases;
      Matrix& target = pick((probe.*select)[l]);
      for (std::size_t k = 0; k < target.size(); ++k) {
        const double saved = target.values()[k];
        target.values()[k] = saved + step;
        const double plus = objective(probe);
        target.values()[k] = saved - step;
        const double minus = objective(probe);
        target.values()[k] = saved;
        const double numeric = (plus - minus) / (2.0 * step);
        worst = std::max(worst, relative_error(grad.values()[k], numeric, kGradcheckFloor));
      }
    }
  }
  return worst;
}

std::vector<std::size_t> random_widths(std::mt19937_64& rng, std::size_t min_layers,
                                       std::size_t max_layers) {
  std::uniform_int_distribution<std::size_t> count(min_layers, max_layers);
  std::uniform_int_distribution<std::size_t> width(3, 8);
  std::vector<std::size_t> out(count(rng));
  for (auto& w : out) w = width(rng);
  return out;
}

}  // namespace

double GradcheckCase::max_error() const {
  return std::max({encoder_error, recognizer_error, discriminator_error});
}

double GradcheckReport::max_encoder() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.encoder_error);
  return m;
}

double GradcheckReport::max_recognizer() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.recognizer_error);
  return m;
}

double GradcheckReport::max_discriminator() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.discriminator_error);
  return m;
}

double GradcheckReport::max_error() const {
  return std::max({max_encoder(), max_recognizer(), max_discriminator()});
}

GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t instances, double step) {
  GradcheckReport report;
  for (std::size_t i = 0; i < instances; ++i) {
    auto rng = keyed_stream(seed, {i});
    std::uniform_int_distribution<std::size_t> in_dim(3, 8), classes(2, 5), batch(4, 16);
    std::uniform_real_distribution<double> weight(0.1, 2.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    GradcheckCase c;
    const std::size_t input_dim = in_dim(rng);
    const std::size_t num_classes = classes(rng);
    auto enc = random_widths(rng, 1, 3);
    auto rec = random_widths(rng, 0, 2);
    auto disc = random_widths(rng, 0, 2);
    c.config = make_ynet_config(input_dim, num_classes, enc, rec, disc);
    c.batch = batch(rng);
    c.alpha = weight(rng);
    c.beta = weight(rng);

    YNetParams params = init_params(c.config, rng());
    // Non-zero biases so every layer's bias gradient is exercised.
    for (auto* stack : {&params.encoder, &params.recognizer, &params.discriminator}) {
      for (auto& layer : *stack) {
        for (auto& b : layer.biases.values()) b = 0.1 * normal(rng);
      }
    }
    Matrix x(c.batch, input_dim);
    for (auto& v : x.values()) v = normal(rng);
    BatchLabels labels;
    std::uniform_int_distribution<std::uint32_t> label(0, static_cast<std::uint32_t>(num_classes - 1));
    for (std::size_t r = 0; r < c.batch; ++r) {
      labels.y.push_back(label(rng));
      labels.d.push_back(static_cast<std::uint8_t>(r % 2));
    }

    const YNetGrads grads = composite_backward(params, forward(params, x), labels, c.alpha, c.beta);
    auto losses = [&](const YNetParams& p) { return compute_losses(forward(p, x), labels); };
    c.recognizer_error = check_subset(
        params, grads.recognizer, &YNetParams::recognizer,
        [&](const YNetParams& p) { return losses(p).l1; }, step);
    c.discriminator_error = check_subset(
        params, grads.discriminator, &YNetParams::discriminator,
        [&](const YNetParams& p) { return c.alpha * losses(p).l2; }, step);
    c.encoder_error = check_subset(
        params, grads.encoder, &YNetParams::encoder,
        [&](const YNetParams& p) {
          const auto t = losses(p);
          return t.l1 - c.beta * t.l3;
        },
        step);
    report.cases.push_back(std::move(c));
  }
  return report;
}

}  // namespace noiseinv

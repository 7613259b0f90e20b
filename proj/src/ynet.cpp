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

#include "noiseinv/ynet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace noiseinv {

namespace {

void require_widths(const std::vector<std::size_t>& widths, const char* name) {
  for (std::size_t w : widths) {
    if (w == 0) throw std::invalid_argument(std::string(name) + ": layer width must be positive");
  }
}

std::vector<std::size_t> widths_of(const std::vector<AffineLayer>& layers) {
  std::vector<std::size_t> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.out_dim());
  return out;
}

void check_chain(const std::vector<AffineLayer>& layers, std::size_t in, const char* name) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].validate();
    if (layers[i].in_dim() != in) {
      throw ShapeError(std::string(name) + " layer " + std::to_string(i) + " expects input " +
                       std::to_string(layers[i].in_dim()) + " but receives " +
                       std::to_string(in));
    }
    in = layers[i].out_dim();
  }
}

std::vector<AffineLayer> init_stack(std::size_t in, const std::vector<std::size_t>& widths,
                                    std::mt19937_64& rng) {
  std::vector<AffineLayer> layers;
  for (std::size_t out : widths) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> draw(-limit, limit);
    AffineLayer layer{Matrix(out, in), Matrix(out, 1)};
    for (double& w : layer.weights.values()) w = draw(rng);
    layers.push_back(std::move(layer));
    in = out;
  }
  return layers;
}

std::vector<AffineLayer> zero_stack(const std::vector<AffineLayer>& like) {
  std::vector<AffineLayer> out;
  out.reserve(like.size());
  for (const auto& l : like) {
    out.push_back({Matrix(l.out_dim(), l.in_dim()), Matrix(l.out_dim(), 1)});
  }
  return out;
}

// ReLU follows every layer except, when relu_last is false, the final one.
Matrix run_stack(const std::vector<AffineLayer>& layers, const Matrix& x, bool relu_last,
                 StackTrace* trace) {
  Matrix act = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix pre = affine_forward(act, layers[i]);
    Matrix next = (i + 1 < layers.size() || relu_last) ? relu(pre) : pre;
    if (trace != nullptr) {
      trace->inputs.push_back(std::move(act));
      trace->pre.push_back(std::move(pre));
    }
    act = std::move(next);
  }
  return act;
}

// Backpropagates `grad_top` (w.r.t. the stack output) and returns the
// gradient w.r.t. the stack input, or an empty matrix if not requested.
Matrix backprop_stack(const std::vector<AffineLayer>& layers, const StackTrace& trace,
                      Matrix grad_top, bool relu_last, std::vector<AffineLayer>* param_grads,
                      bool need_input_grad) {
  Matrix g = std::move(grad_top);
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (k + 1 < layers.size() || relu_last) g = relu_backward(g, trace.pre[k]);
    AffineGrads ag = affine_backward(g, trace.inputs[k], layers[k], k > 0 || need_input_grad);
    if (param_grads != nullptr) {
      (*param_grads)[k].weights = std::move(ag.grad_w);
      (*param_grads)[k].biases = std::move(ag.grad_b);
    }
    g = std::move(ag.grad_x);
  }
  return g;
}

void check_batch(const Matrix& probs, std::size_t label_count, const char* op) {
  if (probs.rows() != label_count) {
    throw ShapeError(std::string(op) + ": " + std::to_string(label_count) +
                     " labels for predictions " + probs.shape_string());
  }
  if (probs.rows() == 0) throw ShapeError(std::string(op) + ": empty batch");
}

void check_binary(std::span<const std::uint8_t> d, const char* op) {
  for (auto v : d) {
    if (v > 1) throw std::invalid_argument(std::string(op) + ": domain label must be 0 or 1");
  }
}

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

}  // namespace

void YNetConfig::validate() const {
  if (input_dim == 0) throw std::invalid_argument("YNetConfig: input_dim must be positive");
  if (encoder_layers.empty()) throw std::invalid_argument("YNetConfig: encoder has no layers");
  if (recognizer_layers.empty() || recognizer_layers.back() < 2) {
    throw std::invalid_argument("YNetConfig: recognizer must end in at least 2 classes");
  }
  if (has_discriminator() && discriminator_layers.back() != 1) {
    throw std::invalid_argument("YNetConfig: discriminator must end in a single unit");
  }
  require_widths(encoder_layers, "encoder");
  require_widths(recognizer_layers, "recognizer");
  require_widths(discriminator_layers, "discriminator");
}

std::size_t default_discriminator_width(std::size_t hidden_dim) {
  return std::max<std::size_t>(16, hidden_dim / 4);
}

YNetConfig make_ynet_config(std::size_t input_dim, std::size_t num_classes,
                            std::vector<std::size_t> encoder_layers,
                            std::vector<std::size_t> recognizer_hidden,
                            std::optional<std::vector<std::size_t>> discriminator_hidden) {
  YNetConfig cfg;
  cfg.input_dim = input_dim;
  cfg.encoder_layers = std::move(encoder_layers);
  if (cfg.encoder_layers.empty()) throw std::invalid_argument("YNetConfig: encoder has no layers");
  cfg.recognizer_layers = std::move(recognizer_hidden);
  cfg.recognizer_layers.push_back(num_classes);
  cfg.discriminator_layers = discriminator_hidden.value_or(
      std::vector<std::size_t>{default_discriminator_width(cfg.hidden_dim())});
  cfg.discriminator_layers.push_back(1);
  cfg.validate();
  return cfg;
}

YNetConfig YNetParams::config() const {
  YNetConfig cfg;
  cfg.input_dim = encoder.empty() ? 0 : encoder.front().in_dim();
  cfg.encoder_layers = widths_of(encoder);
  cfg.recognizer_layers = widths_of(recognizer);
  cfg.discriminator_layers = widths_of(discriminator);
  return cfg;
}

void YNetParams::validate() const {
  config().validate();
  check_chain(encoder, encoder.front().in_dim(), "encoder");
  check_chain(recognizer, encoder.back().out_dim(), "recognizer");
  check_chain(discriminator, encoder.back().out_dim(), "discriminator");
}

std::size_t YNetParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* stack : {&encoder, &recognizer, &discriminator}) {
    for (const auto& l : *stack) n += l.weights.size() + l.biases.size();
  }
  return n;
}

YNetGrads YNetGrads::zeros_like(const YNetParams& params) {
  return {zero_stack(params.encoder), zero_stack(params.recognizer),
          zero_stack(params.discriminator)};
}

YNetParams init_params(const YNetConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  YNetParams p;
  p.encoder = init_stack(config.input_dim, config.encoder_layers, rng);
  p.recognizer = init_stack(config.hidden_dim(), config.recognizer_layers, rng);
  p.discriminator = init_stack(config.hidden_dim(), config.discriminator_layers, rng);
  return p;
}

ForwardTrace forward(const YNetParams& params, const Matrix& x) {
  ForwardTrace t;
  t.h = run_stack(params.encoder, x, true, &t.encoder);
  t.y_hat = softmax_rows(run_stack(params.recognizer, t.h, false, &t.recognizer));
  if (!params.discriminator.empty()) {
    t.d_hat = sigmoid(run_stack(params.discriminator, t.h, false, &t.discriminator));
  }
  return t;
}

Matrix predict(const YNetParams& params, const Matrix& x) {
  const Matrix h = run_stack(params.encoder, x, true, nullptr);
  return softmax_rows(run_stack(params.recognizer, h, false, nullptr));
}

std::vector<std::uint32_t> predict_classes(const YNetParams& params, const Matrix& x) {
  const Matrix probs = predict(params, x);
  std::vector<std::uint32_t> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto r = probs.row(i);
    out[i] = static_cast<std::uint32_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

double loss_l1(const Matrix& y_hat, std::span<const std::uint32_t> y) {
  check_batch(y_hat, y.size(), "loss_l1");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= y_hat.cols()) {
      throw std::invalid_argument("loss_l1: class label " + std::to_string(y[i]) +
                                  " out of range for " + std::to_string(y_hat.cols()) +
                                  " classes");
    }
    total -= safe_log(y_hat(i, y[i]));
  }
  return total / static_cast<double>(y.size());
}

double loss_l2(const Matrix& d_hat, std::span<const std::uint8_t> d) {
  check_batch(d_hat, d.size(), "loss_l2");
  check_binary(d, "loss_l2");
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double p = d_hat(i, 0);
    total -= d[i] ? safe_log(p) : safe_log(1.0 - p);
  }
  return total / static_cast<double>(d.size());
}

double loss_l3(const Matrix& d_hat, std::span<const std::uint8_t> d) {
  check_batch(d_hat, d.size(), "loss_l3");
  check_binary(d, "loss_l3");
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double p = d_hat(i, 0);
    total += d[i] ? safe_log(1.0 - p) : safe_log(p);
  }
  return total / static_cast<double>(d.size());
}

LossTerms compute_losses(const ForwardTrace& trace, const BatchLabels& labels) {
  LossTerms terms;
  terms.l1 = loss_l1(trace.y_hat, labels.y);
  if (!trace.d_hat.empty()) {
    terms.l2 = loss_l2(trace.d_hat, labels.d);
    terms.l3 = loss_l3(trace.d_hat, labels.d);
  }
  return terms;
}

YNetGrads composite_backward(const YNetParams& params, const ForwardTrace& trace,
                             const BatchLabels& labels, double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw std::invalid_argument("composite_backward: alpha and beta must be nonnegative");
  }
  const bool branch = !params.discriminator.empty();
  if (!branch && beta > 0.0) {
    throw std::invalid_argument("composite_backward: beta > 0 needs a discriminator");
  }
  const std::size_t batch = trace.y_hat.rows();
  check_batch(trace.y_hat, labels.y.size(), "composite_backward");
  if (branch) {
    check_batch(trace.d_hat, labels.d.size(), "composite_backward");
    check_binary(labels.d, "composite_backward");
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);

  YNetGrads grads = YNetGrads::zeros_like(params);

  // Softmax cross-entropy: dL1/dlogits = (y_hat - onehot(y)) / batch.
  Matrix dlogits = trace.y_hat;
  for (std::size_t i = 0; i < batch; ++i) {
    if (labels.y[i] >= dlogits.cols()) {
      throw std::invalid_argument("composite_backward: class label out of range");
    }
    dlogits(i, labels.y[i]) -= 1.0;
  }
  for (double& v : dlogits.values()) v *= inv_batch;
  Matrix grad_h = backprop_stack(params.recognizer, trace.recognizer, std::move(dlogits), false,
                                 &grads.recognizer, true);

  if (branch && alpha != 0.0) {
    // alpha * dL2/dz with z the discriminator logit; accumulates into D only.
    Matrix dz(batch, 1);
    for (std::size_t i = 0; i < batch; ++i) {
      dz(i, 0) = alpha * (trace.d_hat(i, 0) - labels.d[i]) * inv_batch;
    }
    backprop_stack(params.discriminator, trace.discriminator, std::move(dz), false,
                   &grads.discriminator, false);
  }

  if (branch && beta != 0.0) {
    // beta * d(-L3)/dz: cross-entropy against 1 - d. Flows through D into h;
    // D's own parameter gradients from this pass are discarded.
    Matrix dz(batch, 1);
    for (std::size_t i = 0; i < batch; ++i) {
      dz(i, 0) = beta * (trace.d_hat(i, 0) - (1.0 - labels.d[i])) * inv_batch;
    }
    const Matrix from_d = backprop_stack(params.discriminator, trace.discriminator,
                                         std::move(dz), false, nullptr, true);
    axpy(grad_h, 1.0, from_d);
  }

  backprop_stack(params.encoder, trace.encoder, std::move(grad_h), true, &grads.encoder, false);
  return grads;
}

double discriminator_accuracy(const Matrix& d_hat, std::span<const std::uint8_t> d) {
  check_batch(d_hat, d.size(), "discriminator_accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::uint8_t guess = d_hat(i, 0) > 0.5 ? 1 : 0;
    hits += guess == d[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace noiseinv

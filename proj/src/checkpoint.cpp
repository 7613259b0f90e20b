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

#include <string>

#include "noiseinv/binary_io.hpp"
#include "noiseinv/ynet.hpp"

namespace noiseinv {

namespace {

constexpr std::string_view kMagic = "YNET1";
// Generous cap on a single dimension; anything larger is a corrupt header.
constexpr std::uint32_t kMaxDim = 1u << 24;

void put_widths(ByteWriter& w, const std::vector<std::size_t>& widths) {
  w.put_u32(static_cast<std::uint32_t>(widths.size()));
  for (std::size_t v : widths) w.put_u32(static_cast<std::uint32_t>(v));
}

std::vector<std::size_t> get_widths(ByteReader& r, const char* name) {
  const std::uint32_t n = r.get_u32();
  if (n > 1024) r.fail(std::string(name) + " declares " + std::to_string(n) + " layers");
  std::vector<std::size_t> widths(n);
  for (auto& v : widths) {
    v = r.get_u32();
    if (v == 0 || v > kMaxDim) r.fail(std::string(name) + " has invalid width");
  }
  return widths;
}

void put_stack(ByteWriter& w, const std::vector<AffineLayer>& layers) {
  for (const auto& l : layers) {
    w.put_f64s(l.weights.values());
    w.put_f64s(l.biases.values());
  }
}

std::vector<AffineLayer> get_stack(ByteReader& r, std::size_t in,
                                   const std::vector<std::size_t>& widths) {
  std::vector<AffineLayer> layers;
  for (std::size_t out : widths) {
    r.require((out * in + out) * sizeof(double));
    AffineLayer l{Matrix(out, in), Matrix(out, 1)};
    r.get_f64s(l.weights.values());
    r.get_f64s(l.biases.values());
    layers.push_back(std::move(l));
    in = out;
  }
  return layers;
}

}  // namespace

std::vector<std::uint8_t> serialize_params(const YNetParams& params) {
  params.validate();
  const YNetConfig cfg = params.config();
  ByteWriter w;
  w.put_magic(kMagic);
  w.put_u32(static_cast<std::uint32_t>(cfg.input_dim));
  put_widths(w, cfg.encoder_layers);
  put_widths(w, cfg.recognizer_layers);
  put_widths(w, cfg.discriminator_layers);
  put_stack(w, params.encoder);
  put_stack(w, params.recognizer);
  put_stack(w, params.discriminator);
  return w.bytes();
}

YNetParams deserialize_params(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  r.expect_magic(kMagic);
  YNetConfig cfg;
  cfg.input_dim = r.get_u32();
  if (cfg.input_dim == 0 || cfg.input_dim > kMaxDim) r.fail("invalid input dimension");
  cfg.encoder_layers = get_widths(r, "encoder");
  cfg.recognizer_layers = get_widths(r, "recognizer");
  cfg.discriminator_layers = get_widths(r, "discriminator");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  YNetParams p;
  p.encoder = get_stack(r, cfg.input_dim, cfg.encoder_layers);
  p.recognizer = get_stack(r, cfg.hidden_dim(), cfg.recognizer_layers);
  p.discriminator = get_stack(r, cfg.hidden_dim(), cfg.discriminator_layers);
  r.expect_end();
  return p;
}

void save_checkpoint(const YNetParams& params, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_params(params));
}

YNetParams load_checkpoint(const std::filesystem::path& path, const YNetConfig* expected) {
  YNetParams p = deserialize_params(read_file_bytes(path));
  if (expected != nullptr && p.config() != *expected) {
    throw FormatError("checkpoint " + path.string() +
                      ": layer dimensions do not match the configured network");
  }
  return p;
}

}  // namespace noiseinv

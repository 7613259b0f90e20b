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

#include "noiseinv/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "noiseinv/binary_io.hpp"

namespace noiseinv {

namespace {

std::size_t clamp_index(std::ptrdiff_t t, std::size_t count) {
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(count) - 1));
}

void require_frames(const Matrix& frames, const char* op) {
  if (frames.rows() == 0 || frames.cols() == 0) {
    throw ShapeError(std::string(op) + ": need at least one frame, got " + frames.shape_string());
  }
}

constexpr std::string_view kNormMagic = "NORM1";

}  // namespace

Matrix compute_deltas(const Matrix& frames) {
  require_frames(frames, "compute_deltas");
  const std::size_t T = frames.rows();
  const std::size_t F = frames.cols();
  double denom = 0.0;
  for (std::size_t n = 1; n <= kDeltaWindow; ++n) denom += static_cast<double>(n * n);
  denom *= 2.0;

  Matrix out(T, F);
  for (std::size_t t = 0; t < T; ++t) {
    auto dst = out.row(t);
    for (std::size_t n = 1; n <= kDeltaWindow; ++n) {
      const auto ahead = frames.row(clamp_index(static_cast<std::ptrdiff_t>(t + n), T));
      const auto behind = frames.row(
          clamp_index(static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(n), T));
      const double w = static_cast<double>(n);
      for (std::size_t f = 0; f < F; ++f) dst[f] += w * (ahead[f] - behind[f]);
    }
    for (double& v : dst) v /= denom;
  }
  return out;
}

Matrix append_deltas(const Matrix& frames) {
  const Matrix d1 = compute_deltas(frames);
  const Matrix d2 = compute_deltas(d1);
  const std::size_t F = frames.cols();
  Matrix out(frames.rows(), 3 * F);
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    auto dst = out.row(t);
    std::copy_n(frames.row(t).begin(), F, dst.begin());
    std::copy_n(d1.row(t).begin(), F, dst.begin() + F);
    std::copy_n(d2.row(t).begin(), F, dst.begin() + 2 * F);
  }
  return out;
}

Matrix splice(const Matrix& frames, std::size_t context) {
  require_frames(frames, "splice");
  const std::size_t T = frames.rows();
  const std::size_t F = frames.cols();
  const std::size_t width = 2 * context + 1;
  Matrix out(T, width * F);
  for (std::size_t t = 0; t < T; ++t) {
    auto dst = out.row(t);
    for (std::size_t k = 0; k < width; ++k) {
      const auto offset = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(context);
      const auto src = frames.row(clamp_index(offset, T));
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(k * F));
    }
  }
  return out;
}

Matrix featurize(const Matrix& base_frames, std::size_t context) {
  return splice(append_deltas(base_frames), context);
}

std::uint64_t NormStats::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto* v : {&mean, &std}) {
    const auto* p = reinterpret_cast<const unsigned char*>(v->data());
    for (std::size_t i = 0; i < v->size() * sizeof(double); ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  return h;
}

NormStats fit_norm(const Matrix& rows) {
  if (rows.rows() < 2) {
    throw std::invalid_argument("fit_norm: need at least 2 training rows, got " +
                                std::to_string(rows.rows()));
  }
  const std::size_t N = rows.rows();
  const std::size_t D = rows.cols();
  // Shifted by the first row so a constant column gives its value exactly.
  const auto anchor = rows.row(0);
  std::vector<double> shift_sum(D, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const auto r = rows.row(i);
    for (std::size_t j = 0; j < D; ++j) shift_sum[j] += r[j] - anchor[j];
  }
  NormStats s;
  s.mean.resize(D);
  for (std::size_t j = 0; j < D; ++j) s.mean[j] = anchor[j] + shift_sum[j] / static_cast<double>(N);

  std::vector<double> sq(D, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const auto r = rows.row(i);
    for (std::size_t j = 0; j < D; ++j) {
      const double dev = r[j] - s.mean[j];
      sq[j] += dev * dev;
    }
  }
  s.std.resize(D);
  for (std::size_t j = 0; j < D; ++j) {
    s.std[j] = std::max(std::sqrt(sq[j] / static_cast<double>(N)), kStdFloor);
  }
  return s;
}

void apply_norm_inplace(Matrix& rows, const NormStats& stats) {
  if (rows.cols() != stats.dim()) {
    throw ShapeError("apply_norm: rows " + rows.shape_string() + " vs stats of dimension " +
                     std::to_string(stats.dim()));
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto r = rows.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - stats.mean[j]) / stats.std[j];
  }
}

Matrix apply_norm(const Matrix& rows, const NormStats& stats) {
  Matrix out = rows;
  apply_norm_inplace(out, stats);
  return out;
}

std::vector<std::uint8_t> serialize_norm(const NormStats& stats) {
  if (stats.mean.size() != stats.std.size()) {
    throw std::invalid_argument("serialize_norm: mean and std lengths differ");
  }
  ByteWriter w;
  w.put_magic(kNormMagic);
  w.put_u32(static_cast<std::uint32_t>(stats.dim()));
  w.put_f64s(stats.mean);
  w.put_f64s(stats.std);
  return w.bytes();
}

NormStats deserialize_norm(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "norm stats");
  r.expect_magic(kNormMagic);
  const std::uint32_t dim = r.get_u32();
  r.require(2ull * dim * sizeof(double));
  NormStats s;
  s.mean.resize(dim);
  s.std.resize(dim);
  r.get_f64s(s.mean);
  r.get_f64s(s.std);
  r.expect_end();
  for (double v : s.std) {
    if (!(v >= kStdFloor)) r.fail("standard deviation below floor");
  }
  return s;
}

void save_norm(const NormStats& stats, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_norm(stats));
}

NormStats load_norm(const std::filesystem::path& path) {
  return deserialize_norm(read_file_bytes(path));
}

}  // namespace noiseinv

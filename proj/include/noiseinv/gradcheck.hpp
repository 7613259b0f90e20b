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


// Finite-difference check of composite_backward on small random networks.
// Each parameter subset is compared with the objective it is supposed to
// descend: L1 for the recognizer, alpha * L2 for the discriminator, and
// L1 - beta * L3 for the encoder.

#ifndef NOISEINV_GRADCHECK_HPP_
#define NOISEINV_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "noiseinv/ynet.hpp"

namespace noiseinv {

inline constexpr double kGradcheckStep = 1e-6;
inline constexpr double kGradcheckTolerance = 1e-5;
/// Denominator floor of the relative error. Central differences at step
/// 1e-6 carry about 1e-10 of rounding error, so gradients below this size
/// are held to an absolute error of tolerance * floor instead.
inline constexpr double kGradcheckFloor = 1e-4;

struct GradcheckCase {
  YNetConfig config;
  std::size_t batch = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double encoder_error = 0.0;
  double recognizer_error = 0.0;
  double discriminator_error = 0.0;

  double max_error() const;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;

  double max_encoder() const;
  double max_recognizer() const;
  double max_discriminator() const;
  double max_error() const;
  bool passed(double tolerance = kGradcheckTolerance) const { return max_error() <= tolerance; }
};

/// Runs `instances` random (config, batch) cases. Every coordinate of every
/// parameter is probed.
GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t instances = 20,
                              double step = kGradcheckStep);

}  // namespace noiseinv

#endif  // NOISEINV_GRADCHECK_HPP_

/* Copyright 2026 The FLIGHT-Net Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef FLIGHT_GRADCHECK_H_
#define FLIGHT_GRADCHECK_H_

// Central-difference verification of tape gradients, in double precision.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flight/autograd.h"
#include "flight/tensor.h"

namespace flight {

struct GradCheckReport {
  std::string op;
  // max over probed coordinates of
  //   |g_analytic - g_numeric| / max(|g_analytic|, |g_numeric|, 1e-8)
  double max_rel_error = 0.0;
  std::int64_t points = 0;
  std::int64_t coords = 0;
  // Probes discarded because the perturbation switched the branch of a
  // ReLU, max pool or floor (the function is not differentiable there).
  std::int64_t skipped = 0;
  bool valid = true;  // false once any probe evaluated to a non-finite value
  double threshold = 1e-4;

  bool passed() const { return valid && max_rel_error < threshold; }
  // Folds another point's report for the same op into this one.
  void merge(const GradCheckReport& other);
};

// Rebuilds the function on a fresh tape from leaf inputs.
using GradFn =
    std::function<ag::Var<double>(std::span<const ag::Var<double>> inputs)>;

struct GradCheckOptions {
  double eps = 1e-4;  // must lie in [1e-5, 1e-2]
  // Coordinates probed per input; larger inputs are sampled without
  // replacement. Must be at least 64.
  std::int64_t max_coords_per_input = 64;
  // When positive, this many coordinates are instead sampled jointly across
  // all inputs (at least 64).
  std::int64_t joint_coords = 0;
  std::uint64_t seed = 0;
  double threshold = 1e-4;
};

// Compares backward() against central differences at one point. Non-scalar
// outputs are reduced to <R, f(x)> with a fixed random R, so every output
// element contributes.
GradCheckReport finite_diff_check(const std::string& op, const GradFn& fn,
                                  const std::vector<TensorD>& point,
                                  const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric);

}  // namespace flight

#endif  // FLIGHT_GRADCHECK_H_

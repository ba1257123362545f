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

#ifndef FLIGHT_OPTIM_H_
#define FLIGHT_OPTIM_H_

#include <cstdint>
#include <stdexcept>

#include "flight/params.h"

namespace flight {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

// First and second moments, one store per moment with the parameter names.
struct OptState {
  ParamStore m;
  ParamStore v;
  std::int64_t step = 0;

  bool operator==(const OptState& other) const;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero moments shaped like `params`.
OptState init_opt_state(const ParamStore& params);

// theta -= lr * wd * theta, then the bias-corrected Adam update using each
// entry's grad buffer. Arithmetic is done in double and rounded once per
// element. A non-finite gradient aborts before anything is modified.
void adamw_step(ParamStore& params, OptState& state, double lr,
                const AdamWConfig& cfg);

}  // namespace flight

#endif  // FLIGHT_OPTIM_H_

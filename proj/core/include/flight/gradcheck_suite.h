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

#ifndef FLIGHT_GRADCHECK_SUITE_H_
#define FLIGHT_GRADCHECK_SUITE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flight/gradcheck.h"

namespace flight {

struct GradCheckSuiteOptions {
  int points = 5;  // random evaluation points per op
  std::uint64_t seed = 7;
  double eps = 1e-4;  // central-difference step, unless a case sets its own
  double op_threshold = 1e-4;
  double end_to_end_threshold = 1e-3;
};

// Checks every differentiable tensor, model and loss op, then the full
// network composed with the training loss. `progress` sees each finished
// report.
std::vector<GradCheckReport> run_gradcheck_suite(
    const GradCheckSuiteOptions& options = {},
    const std::function<void(const GradCheckReport&)>& progress = {});

// "<op> max_rel_error=... points=... coords=... skipped=... PASS|FAIL".
std::string format_report(const GradCheckReport& report);

}  // namespace flight

#endif  // FLIGHT_GRADCHECK_SUITE_H_

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

#include "flight/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "flight/random.h"

namespace flight {
namespace {

struct Probe {
  double value = 0.0;
  ag::BranchTrace trace;
};

// <R, f(x)> on a fresh non-recording tape, with the branches taken.
Probe evaluate_projected(const GradFn& fn, const std::vector<TensorD>& point,
                         const TensorD& projection) {
  Probe probe;
  ag::BranchTrace* previous = std::exchange(ag::active_branch_trace(), &probe.trace);
  try {
    ag::Tape<double> tape(/*recording=*/false);
    std::vector<ag::Var<double>> inputs;
    inputs.reserve(point.size());
    for (const auto& p : point) inputs.push_back(tape.constant(p));
    const auto out = fn(inputs);
    for (std::int64_t i = 0; i < out.value().size(); ++i) {
      probe.value += projection[i] * out.value()[i];
    }
  } catch (...) {
    ag::active_branch_trace() = previous;
    throw;
  }
  ag::active_branch_trace() = previous;
  return probe;
}

// `count` distinct indices of [0, numel) in increasing order (all of them
// when numel <= count).
std::vector<std::int64_t> sample_indices(std::int64_t numel, std::int64_t count,
                                         Rng& rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(numel));
  std::iota(idx.begin(), idx.end(), std::int64_t{0});
  if (numel <= count) return idx;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::int64_t>(uniform_index(rng, numel - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// (input, element) pairs to probe.
std::vector<std::pair<std::size_t, std::int64_t>> choose_coords(
    const std::vector<TensorD>& point, const GradCheckOptions& options, Rng& rng) {
  std::vector<std::pair<std::size_t, std::int64_t>> coords;
  if (options.joint_coords > 0) {
    std::int64_t total = 0;
    for (const auto& p : point) total += p.size();
    for (std::int64_t flat : sample_indices(total, options.joint_coords, rng)) {
      std::size_t k = 0;
      while (flat >= point[k].size()) flat -= point[k++].size();
      coords.emplace_back(k, flat);
    }
    return coords;
  }
  for (std::size_t k = 0; k < point.size(); ++k) {
    for (std::int64_t i :
         sample_indices(point[k].size(), options.max_coords_per_input, rng)) {
      coords.emplace_back(k, i);
    }
  }
  return coords;
}

}  // namespace

void GradCheckReport::merge(const GradCheckReport& other) {
  max_rel_error = std::max(max_rel_error, other.max_rel_error);
  points += other.points;
  coords += other.coords;
  skipped += other.skipped;
  valid = valid && other.valid;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport finite_diff_check(const std::string& op, const GradFn& fn,
                                  const std::vector<TensorD>& point,
                                  const GradCheckOptions& options) {
  if (!(options.eps >= 1e-5 && options.eps <= 1e-2)) {
    throw std::invalid_argument("finite_diff_check: eps must lie in [1e-5, 1e-2]");
  }
  if (options.max_coords_per_input < 64 ||
      (options.joint_coords != 0 && options.joint_coords < 64)) {
    throw std::invalid_argument("finite_diff_check: probe at least 64 coordinates");
  }
  GradCheckReport report;
  report.op = op;
  report.points = 1;
  report.threshold = options.threshold;

  Rng rng = make_rng(options.seed, 0x6C4B);

  // Analytic pass.
  ag::Tape<double> tape;
  std::vector<ag::Var<double>> leaves;
  leaves.reserve(point.size());
  for (const auto& p : point) leaves.push_back(tape.leaf(p));
  const auto out = fn(leaves);
  for (double v : out.value().data()) {
    if (!std::isfinite(v)) report.valid = false;
  }
  if (!report.valid) return report;
  TensorD projection(out.shape(), 1.0);
  if (projection.size() > 1) {
    for (double& r : projection.data()) r = uniform(rng, -1.0, 1.0);
  }
  tape.backward(out, projection);
  std::vector<TensorD> analytic;
  for (const auto& leaf : leaves) analytic.push_back(leaf.grad());

  const Probe base = evaluate_projected(fn, point, projection);
  std::vector<TensorD> probe = point;
  for (const auto& [k, i] : choose_coords(point, options, rng)) {
    const double x = point[k][i];
    probe[k][i] = x + options.eps;
    const Probe up = evaluate_projected(fn, probe, projection);
    probe[k][i] = x - options.eps;
    const Probe down = evaluate_projected(fn, probe, projection);
    probe[k][i] = x;
    if (!std::isfinite(up.value) || !std::isfinite(down.value)) {
      report.valid = false;
      continue;
    }
    if (up.trace != base.trace || down.trace != base.trace) {
      ++report.skipped;
      continue;
    }
    const double numeric = (up.value - down.value) / (2.0 * options.eps);
    report.max_rel_error =
        std::max(report.max_rel_error, relative_error(analytic[k][i], numeric));
    ++report.coords;
  }
  return report;
}

}  // namespace flight

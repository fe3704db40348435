// Copyright 2026 The kimoi Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/lpn/loss.hpp"
#include "kimoi/lpn/model.hpp"
#include "kimoi/random.hpp"

namespace kimoi::lpn {

struct GradCheckOptions {
  double eps = 1e-5;
  std::size_t samples = 256;  // spread evenly over every tensor
  std::uint64_t seed = 0;
  // Denominator floor for the relative error.
  double floor = 1e-8;
};

struct GradCheckEntry {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<GradCheckEntry> entries;
  std::size_t tensors_covered = 0;
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares analytic parameter gradients of the total loss against central
// finite differences. `tamper` may edit the analytic gradients before the
// comparison (used for negative controls).
inline GradCheckReport gradient_check(LpnModel<double> model, const LandmarkSequence& seq,
                                      const GradCheckOptions& opts = {},
                                      const std::function<void(LpnParams<double>&)>& tamper = {}) {
  const Matrix<double> clip = to_rows<double>(seq);
  model.check_input(clip);
  const Matrix<double> coord_w = coordinate_weights<double>(model.config());
  LpnParams<double> grad = model.zero_gradients();
  loss_and_gradient(model, clip, coord_w, &grad);
  if (tamper) tamper(grad);

  std::vector<std::string> names;
  model.params().visit([&](const std::string& name, Matrix<double>&) { names.push_back(name); });
  auto params = model.params().tensors();
  auto grads = grad.tensors();
  const std::size_t per_tensor =
      std::max<std::size_t>(1, (opts.samples + params.size() - 1) / params.size());

  Rng rng(derive_seed(opts.seed, streams::kFixture));
  GradCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix<double>& p = *params[t];
    const std::size_t size = static_cast<std::size_t>(p.size());
    std::uniform_int_distribution<std::size_t> pick(0, size - 1);
    for (std::size_t s = 0; s < std::min(per_tensor, size); ++s) {
      const std::size_t idx = pick(rng);
      const double original = p.data()[idx];
      p.data()[idx] = original + opts.eps;
      const double up = loss_and_gradient<double>(model, clip, coord_w, nullptr).total;
      p.data()[idx] = original - opts.eps;
      const double down = loss_and_gradient<double>(model, clip, coord_w, nullptr).total;
      p.data()[idx] = original;
      GradCheckEntry e{names[t], idx, grads[t]->data()[idx], (up - down) / (2.0 * opts.eps), 0.0};
      e.relative_error = relative_error(e.analytic, e.numeric, opts.floor);
      report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
      report.entries.push_back(e);
    }
    ++report.tensors_covered;
  }
  return report;
}

template <class S>
double gradient_norm(const LpnModel<S>& model, const LandmarkSequence& seq) {
  LpnParams<S> grad = model.zero_gradients();
  loss_and_gradient(model, to_rows<S>(seq), coordinate_weights<S>(model.config()), &grad);
  double norm2 = 0.0;
  grad.visit([&](const std::string&, const Matrix<S>& m) {
    norm2 += static_cast<double>(m.squaredNorm());
  });
  return std::sqrt(norm2);
}

}  // namespace kimoi::lpn

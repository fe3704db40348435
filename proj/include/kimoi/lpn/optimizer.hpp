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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "kimoi/lpn/layers.hpp"

namespace kimoi::lpn {

struct AdamOptions {
  double learning_rate = 1e-4;
  double min_learning_rate = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t warmup_steps = 0;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 1.0;
};

// Linear warm-up followed by cosine decay to min_learning_rate at `total`.
inline double cosine_learning_rate(const AdamOptions& opts, std::size_t step, std::size_t total) {
  if (opts.warmup_steps > 0 && step < opts.warmup_steps) {
    return opts.learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(opts.warmup_steps);
  }
  if (total <= opts.warmup_steps + 1) return opts.learning_rate;
  const double progress = static_cast<double>(step - opts.warmup_steps) /
                          static_cast<double>(total - opts.warmup_steps - 1);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(progress, 1.0)));
  return opts.min_learning_rate + (opts.learning_rate - opts.min_learning_rate) * cosine;
}

template <class S>
class Adam {
 public:
  Adam(const std::vector<Matrix<S>*>& params, AdamOptions opts) : opts_(opts) {
    for (const Matrix<S>* p : params) {
      m_.push_back(Matrix<S>::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix<S>::Zero(p->rows(), p->cols()));
    }
  }

  const AdamOptions& options() const { return opts_; }
  std::size_t steps_taken() const { return t_; }

  // Returns the pre-clip global gradient norm.
  double step(const std::vector<Matrix<S>*>& params, const std::vector<Matrix<S>*>& grads,
              double learning_rate) {
    double norm2 = 0.0;
    for (const Matrix<S>* g : grads) norm2 += static_cast<double>(g->squaredNorm());
    const double norm = std::sqrt(norm2);
    const S scale = (opts_.clip_norm > 0.0 && norm > opts_.clip_norm)
                        ? S(opts_.clip_norm / norm)
                        : S(1);
    ++t_;
    const S b1 = S(opts_.beta1), b2 = S(opts_.beta2);
    const S c1 = S(1.0 - std::pow(opts_.beta1, static_cast<double>(t_)));
    const S c2 = S(1.0 - std::pow(opts_.beta2, static_cast<double>(t_)));
    const S lr = S(learning_rate);
    const S eps = S(opts_.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto g = grads[i]->array() * scale;
      m_[i].array() = b1 * m_[i].array() + (S(1) - b1) * g;
      v_[i].array() = b2 * v_[i].array() + (S(1) - b2) * g * g;
      params[i]->array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
    return norm;
  }

 private:
  AdamOptions opts_;
  std::vector<Matrix<S>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace kimoi::lpn

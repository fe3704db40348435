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

#include <cstddef>
#include <span>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/lpn/layers.hpp"
#include "kimoi/lpn/model.hpp"

namespace kimoi::lpn {

// Weighted reconstruction loss: (1 / (T N)) sum_i sum_j w_j |pred - target|^2.
inline double loss_rec(const LandmarkSequence& pred, const LandmarkSequence& target,
                       std::span<const double> weights) {
  require(pred.same_shape(target), ErrorKind::kInvalidInput, "loss_rec: shape mismatch");
  require(weights.size() == pred.points(), ErrorKind::kInvalidInput,
          "loss_rec: need one weight per landmark");
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.frames(); ++t) {
    for (std::size_t j = 0; j < pred.points(); ++j) {
      const Point2 d = pred.at(t, j) - target.at(t, j);
      sum += weights[j] * (d.x * d.x + d.y * d.y);
    }
  }
  return sum / static_cast<double>(pred.frames() * pred.points());
}

// Temporal smoothness of the basis weights:
// (1 / ((T-1) k)) sum_i sum_j (W[i+1, j] - W[i, j])^2.
inline double loss_reg(const WeightMatrix& weights) {
  require(weights.steps() >= 2, ErrorKind::kInvalidInput, "loss_reg: need T >= 2");
  const auto& w = weights.values;
  const auto diff = w.bottomRows(w.rows() - 1) - w.topRows(w.rows() - 1);
  return diff.squaredNorm() / static_cast<double>((w.rows() - 1) * w.cols());
}

inline double total_loss(double rec, double reg, double lambda_reg) {
  require(lambda_reg >= 0.0, ErrorKind::kInvalidInput, "total_loss: lambda_reg must be >= 0");
  return rec + lambda_reg * reg;
}

template <class S>
struct LossTerms {
  S rec = 0;
  S reg = 0;
  S total = 0;
};

// Matrix forms used by training. `gradient` (optional) receives the loss
// gradient w.r.t. the prediction / the weights.
template <class S>
S loss_rec_rows(const Matrix<S>& pred, const Matrix<S>& target, const Matrix<S>& coord_weights,
                Matrix<S>* gradient) {
  const Matrix<S> diff = pred - target;
  const S denom = S(pred.rows()) * S(pred.cols() / 2);
  const Matrix<S> weighted = diff.array().rowwise() * coord_weights.row(0).array();
  if (gradient) *gradient = (S(2) / denom) * weighted;
  return (weighted.array() * diff.array()).sum() / denom;
}

template <class S>
S loss_reg_rows(const Matrix<S>& w, Matrix<S>* gradient) {
  const Eigen::Index steps = w.rows();
  const S denom = S(steps - 1) * S(w.cols());
  const Matrix<S> diff = w.bottomRows(steps - 1) - w.topRows(steps - 1);
  if (gradient) {
    gradient->setZero(w.rows(), w.cols());
    const Matrix<S> g = (S(2) / denom) * diff;
    gradient->bottomRows(steps - 1) += g;
    gradient->topRows(steps - 1) -= g;
  }
  return diff.squaredNorm() / denom;
}

// Per-coordinate weight row (w_0, w_0, w_1, w_1, ...).
template <class S>
Matrix<S> coordinate_weights(const LpnConfig& config) {
  const auto w = config.weights();
  Matrix<S> row(1, 2 * w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    row(0, 2 * j) = S(w[j]);
    row(0, 2 * j + 1) = S(w[j]);
  }
  return row;
}

// Forward + backward for one clip reconstructing itself. Accumulates
// parameter gradients into `grad` when non-null.
template <class S>
LossTerms<S> loss_and_gradient(const LpnModel<S>& model, const Matrix<S>& clip,
                               const Matrix<S>& coord_weights, LpnParams<S>* grad) {
  ForwardCache<S> cache;
  const Matrix<S> pred = model.forward(clip, cache);
  LossTerms<S> terms;
  Matrix<S> dpred, dweights;
  terms.rec = loss_rec_rows(pred, clip, coord_weights, grad ? &dpred : nullptr);
  terms.reg = loss_reg_rows(cache.weights, grad ? &dweights : nullptr);
  const S lambda = S(model.config().lambda_reg);
  terms.total = terms.rec + lambda * terms.reg;
  if (grad) {
    dweights *= lambda;
    model.backward(cache, dpred, dweights, *grad);
  }
  return terms;
}

}  // namespace kimoi::lpn

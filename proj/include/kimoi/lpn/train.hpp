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
#include <string>
#include <utility>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/lpn/loss.hpp"
#include "kimoi/lpn/model.hpp"
#include "kimoi/lpn/optimizer.hpp"
#include "kimoi/parallel.hpp"
#include "kimoi/perturb/sampler.hpp"
#include "kimoi/random.hpp"

namespace kimoi::lpn {

struct TrainOptions {
  std::size_t steps = 2000;
  std::size_t batch_size = 16;
  AdamOptions adam;
  SamplingMode sampling = SamplingMode::kGuided;
  double guided_std = 0.0;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  // Fit the model's input normalizer to the corpus before the first step.
  bool fit_normalizer = true;
};

struct LossRecord {
  std::size_t step = 0;
  double rec = 0.0;
  double reg = 0.0;
  double total = 0.0;
  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

template <class S>
struct TrainResult {
  LpnModel<S> model;
  std::vector<LossRecord> history;
};

using ProgressFn = std::function<void(const LossRecord&)>;

// Mini-batch Adam on self-reconstruction of clips drawn from `corpus`.
// Per-clip gradients are reduced in clip order, so the result does not
// depend on the thread count.
template <class S>
TrainResult<S> train(LpnModel<S> model, const std::vector<LandmarkSequence>& corpus,
                     const TrainOptions& opts, const ProgressFn& progress = {}) {
  const LpnConfig& config = model.config();
  require(!corpus.empty(), ErrorKind::kInvalidInput, "train: corpus is empty");
  require(opts.batch_size >= 1, ErrorKind::kInvalidInput, "train: batch size must be >= 1");
  for (const LandmarkSequence& seq : corpus) {
    require(seq.points() == config.points && seq.frames() >= config.frames,
            ErrorKind::kInvalidInput, "train: corpus sequence shorter than T or wrong N_lnd");
  }

  ClipSampler sampler{config.frames, opts.sampling, opts.guided_std};
  std::vector<std::vector<double>> start_probs;
  for (const LandmarkSequence& seq : corpus) {
    start_probs.push_back(clip_start_distribution(sampler, seq));
  }

  if (opts.fit_normalizer) model.fit_normalizer(corpus);
  const Matrix<S> coord_w = coordinate_weights<S>(config);
  Adam<S> adam(model.params().tensors(), opts.adam);
  std::vector<LpnParams<S>> clip_grads(opts.batch_size, model.zero_gradients());
  LpnParams<S> total_grad = model.zero_gradients();
  std::vector<LossTerms<S>> clip_losses(opts.batch_size);
  std::vector<Matrix<S>> batch(opts.batch_size);

  Rng rng(derive_seed(opts.seed, streams::kTrain));
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);

  TrainResult<S> result{model, {}};
  result.history.reserve(opts.steps);
  for (std::size_t step = 0; step < opts.steps; ++step) {
    for (std::size_t b = 0; b < opts.batch_size; ++b) {
      const std::size_t idx = pick(rng);
      const auto& probs = start_probs[idx];
      std::size_t start = 0;
      if (probs.size() > 1) {
        if (opts.sampling == SamplingMode::kUniform) {
          start = std::uniform_int_distribution<std::size_t>(0, probs.size() - 1)(rng);
        } else {
          start = std::discrete_distribution<std::size_t>(probs.begin(), probs.end())(rng);
        }
      }
      batch[b] = to_rows<S>(corpus[idx].slice(start, config.frames));
    }

    const LpnModel<S>& current = result.model;
    parallel_for(opts.batch_size, opts.threads, [&](std::size_t b) {
      clip_grads[b].set_zero();
      clip_losses[b] = loss_and_gradient(current, batch[b], coord_w, &clip_grads[b]);
    });

    LossRecord rec{step, 0.0, 0.0, 0.0};
    total_grad.set_zero();
    auto total_tensors = total_grad.tensors();
    for (std::size_t b = 0; b < opts.batch_size; ++b) {
      rec.rec += static_cast<double>(clip_losses[b].rec);
      rec.reg += static_cast<double>(clip_losses[b].reg);
      auto g = clip_grads[b].tensors();
      for (std::size_t i = 0; i < g.size(); ++i) *total_tensors[i] += *g[i];
    }
    const double inv_batch = 1.0 / static_cast<double>(opts.batch_size);
    rec.rec *= inv_batch;
    rec.reg *= inv_batch;
    rec.total = rec.rec + config.lambda_reg * rec.reg;
    if (!std::isfinite(rec.total)) {
      throw Error(ErrorKind::kTrainingFailure,
                  "training diverged (non-finite loss) at step " + std::to_string(step));
    }
    for (Matrix<S>* g : total_tensors) *g *= S(inv_batch);
    adam.step(result.model.params().tensors(), total_tensors,
              cosine_learning_rate(opts.adam, step, opts.steps));
    result.history.push_back(rec);
    if (progress) progress(rec);
  }
  return result;
}

// Trailing moving average of the total loss.
inline std::vector<double> smoothed_loss(const std::vector<LossRecord>& history,
                                         std::size_t window) {
  std::vector<double> out;
  double running = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    running += history[i].total;
    if (i >= window) running -= history[i - window].total;
    out.push_back(running / static_cast<double>(std::min(i + 1, window)));
  }
  return out;
}

// Mean loss over a set of clips without updating the model.
template <class S>
LossTerms<double> evaluate(const LpnModel<S>& model, const std::vector<LandmarkSequence>& clips) {
  const Matrix<S> coord_w = coordinate_weights<S>(model.config());
  LossTerms<double> sum;
  for (const LandmarkSequence& clip : clips) {
    const LossTerms<S> t = loss_and_gradient<S>(model, to_rows<S>(clip), coord_w, nullptr);
    sum.rec += static_cast<double>(t.rec);
    sum.reg += static_cast<double>(t.reg);
    sum.total += static_cast<double>(t.total);
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, clips.size()));
  return {sum.rec / n, sum.reg / n, sum.total / n};
}

// Root mean squared per-landmark Euclidean reconstruction error, unweighted.
template <class S>
double reconstruction_rmse(const LpnModel<S>& model, const std::vector<LandmarkSequence>& clips) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const LandmarkSequence& clip : clips) {
    const LandmarkSequence rec = reconstruct(model, clip);
    for (std::size_t n = 0; n < clip.data().size(); ++n) {
      const Point2 d = rec.data()[n] - clip.data()[n];
      sum += d.x * d.x + d.y * d.y;
      ++count;
    }
  }
  return std::sqrt(sum / static_cast<double>(std::max<std::size_t>(1, count)));
}

}  // namespace kimoi::lpn

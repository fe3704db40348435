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
#include <random>
#include <string>
#include <vector>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/lpn/config.hpp"
#include "kimoi/lpn/layers.hpp"
#include "kimoi/random.hpp"

namespace kimoi::lpn {

// Per-step weights over the k deformation bases, T x k.
struct WeightMatrix {
  Matrix<double> values;

  std::size_t steps() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t bases() const { return static_cast<std::size_t>(values.cols()); }
  friend bool operator==(const WeightMatrix& a, const WeightMatrix& b) {
    return a.values.rows() == b.values.rows() && a.values.cols() == b.values.cols() &&
           a.values == b.values;
  }
};

// Landmark sequence flattened to T x 2N rows of (x0, y0, x1, y1, ...).
template <class S>
Matrix<S> to_rows(const LandmarkSequence& seq) {
  Matrix<S> m(seq.frames(), 2 * seq.points());
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    for (std::size_t j = 0; j < seq.points(); ++j) {
      m(t, 2 * j) = S(seq.at(t, j).x);
      m(t, 2 * j + 1) = S(seq.at(t, j).y);
    }
  }
  return m;
}

template <class S>
LandmarkSequence from_rows(const Matrix<S>& m) {
  const std::size_t frames = static_cast<std::size_t>(m.rows());
  const std::size_t points = static_cast<std::size_t>(m.cols()) / 2;
  LandmarkSequence seq(frames, points);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < points; ++j) {
      seq.at(t, j) = {static_cast<double>(m(t, 2 * j)), static_cast<double>(m(t, 2 * j + 1))};
    }
  }
  return seq;
}

template <class S>
struct LpnParams {
  Linear<S> input;
  std::vector<TransformerBlock<S>> encoder;
  LayerNorm<S> encoder_norm;
  Linear<S> weight_head;
  Matrix<S> bases;  // k x d
  std::vector<TransformerBlock<S>> decoder;
  LayerNorm<S> decoder_norm;
  Linear<S> output;

  LpnParams() = default;
  explicit LpnParams(const LpnConfig& c)
      : input(c.coords(), c.width),
        encoder_norm(c.width),
        weight_head(c.width, c.bases),
        bases(Matrix<S>::Zero(c.bases, c.width)),
        decoder_norm(c.width),
        output(c.width, c.coords()) {
    for (std::size_t i = 0; i < c.encoder_layers; ++i) {
      encoder.emplace_back(c.width, c.heads, c.ff_width);
    }
    for (std::size_t i = 0; i < c.decoder_layers; ++i) {
      decoder.emplace_back(c.width, c.heads, c.ff_width);
    }
  }

  // Visits every tensor in a fixed order with a stable name.
  template <class F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <class F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  std::vector<Matrix<S>*> tensors() {
    std::vector<Matrix<S>*> out;
    visit([&](const std::string&, Matrix<S>& m) { out.push_back(&m); });
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](const std::string&, const Matrix<S>& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  void set_zero() {
    visit([](const std::string&, Matrix<S>& m) { m.setZero(); });
  }

 private:
  template <class Self, class F>
  static void visit_impl(Self& self, F& f) {
    self.input.visit("input", f);
    for (std::size_t i = 0; i < self.encoder.size(); ++i) {
      self.encoder[i].visit("encoder." + std::to_string(i), f);
    }
    self.encoder_norm.visit("encoder_norm", f);
    self.weight_head.visit("weight_head", f);
    f(std::string("bases"), self.bases);
    for (std::size_t i = 0; i < self.decoder.size(); ++i) {
      self.decoder[i].visit("decoder." + std::to_string(i), f);
    }
    self.decoder_norm.visit("decoder_norm", f);
    self.output.visit("output", f);
  }
};

template <class S>
struct ForwardCache {
  Matrix<S> input;    // standardized input, T x 2N
  Matrix<S> weights;  // W, T x k
  Matrix<S> latent;   // x_D = W B, T x d
  Matrix<S> output;   // reconstruction, T x 2N
  std::vector<typename TransformerBlock<S>::Cache> encoder, decoder;
  typename LayerNorm<S>::Cache encoder_norm, decoder_norm;
  Matrix<S> encoder_features, decoder_features;
};

// Transformer autoencoder whose decoder sees only a weighted sum of k
// learnable deformation bases.
template <class S>
class LpnModel {
 public:
  explicit LpnModel(LpnConfig config) : config_(std::move(config)) {
    config_.validate();
    params_ = LpnParams<S>(config_);
    positions_ = sinusoidal_positions<S>(config_.frames, config_.width);
    input_mean_ = Matrix<S>::Zero(1, config_.coords());
    input_scale_ = Matrix<S>::Ones(1, config_.coords());
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for linear weights, unit gains,
  // zero biases, bases ~ N(0, 1/d).
  static LpnModel initialize(const LpnConfig& config, std::uint64_t seed) {
    LpnModel model(config);
    Rng rng(derive_seed(seed, streams::kInit));
    model.params_.visit([&](const std::string& name, Matrix<S>& m) {
      if (name == "bases") {
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(double(config.width)));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = S(dist(rng));
      } else if (name.ends_with(".weight")) {
        const double bound = 1.0 / std::sqrt(double(m.rows()));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = S(dist(rng));
      }
    });
    return model;
  }

  const LpnConfig& config() const { return config_; }
  LpnParams<S>& params() { return params_; }
  const LpnParams<S>& params() const { return params_; }
  const Matrix<S>& positions() const { return positions_; }

  // Fixed per-coordinate standardization: the encoder sees
  // (x - mean) / scale and the decoder output is mapped back. Not trained.
  const Matrix<S>& input_mean() const { return input_mean_; }
  const Matrix<S>& input_scale() const { return input_scale_; }
  void set_normalizer(Matrix<S> mean, Matrix<S> scale) {
    require(mean.rows() == 1 && scale.rows() == 1 &&
                static_cast<std::size_t>(mean.cols()) == config_.coords() && scale.cols() == mean.cols(),
            ErrorKind::kInvalidInput, "lpn: normalizer must be 1 x 2N");
    for (Eigen::Index i = 0; i < scale.size(); ++i) {
      require(std::isfinite(double(mean(0, i))) && scale(0, i) > S(0), ErrorKind::kInvalidInput,
              "lpn: normalizer scale must be positive");
    }
    input_mean_ = std::move(mean);
    input_scale_ = std::move(scale);
  }

  // Mean and standard deviation of every coordinate over all frames of the
  // corpus; the scale is floored at 1e-4.
  void fit_normalizer(const std::vector<LandmarkSequence>& corpus) {
    const std::size_t n = config_.coords();
    std::vector<double> sum(n, 0.0), sq(n, 0.0);
    double count = 0.0;
    for (const LandmarkSequence& seq : corpus) {
      require(seq.points() * 2 == n, ErrorKind::kInvalidInput, "fit_normalizer: wrong N_lnd");
      for (std::size_t t = 0; t < seq.frames(); ++t) {
        for (std::size_t j = 0; j < seq.points(); ++j) {
          const Point2 p = seq.at(t, j);
          sum[2 * j] += p.x;
          sum[2 * j + 1] += p.y;
          sq[2 * j] += p.x * p.x;
          sq[2 * j + 1] += p.y * p.y;
        }
        count += 1.0;
      }
    }
    require(count > 0.0, ErrorKind::kInvalidInput, "fit_normalizer: empty corpus");
    Matrix<S> mean(1, n), scale(1, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = sum[i] / count;
      const double var = std::max(0.0, sq[i] / count - m * m);
      mean(0, i) = S(m);
      scale(0, i) = S(std::max(std::sqrt(var), 1e-4));
    }
    set_normalizer(std::move(mean), std::move(scale));
  }

  LpnParams<S> zero_gradients() const {
    LpnParams<S> g(config_);
    g.set_zero();
    return g;
  }

  template <class T>
  LpnModel<T> cast() const {
    LpnModel<T> out(config_);
    auto dst = out.params().tensors();
    std::size_t i = 0;
    params_.visit([&](const std::string&, const Matrix<S>& m) { *dst[i++] = m.template cast<T>(); });
    out.set_normalizer(input_mean_.template cast<T>(), input_scale_.template cast<T>());
    return out;
  }

  void check_input(const Matrix<S>& input) const {
    require(static_cast<std::size_t>(input.rows()) == config_.frames &&
                static_cast<std::size_t>(input.cols()) == config_.coords(),
            ErrorKind::kInvalidInput, "lpn: input shape does not match the configured T x N_lnd");
  }

  Matrix<S> encode(const Matrix<S>& input, ForwardCache<S>& cache) const {
    check_input(input);
    cache.input = (input.rowwise() - input_mean_.row(0)) * input_scale_.row(0).cwiseInverse().asDiagonal();
    Matrix<S> x = params_.input.forward(cache.input) + positions_;
    cache.encoder.resize(params_.encoder.size());
    for (std::size_t i = 0; i < params_.encoder.size(); ++i) {
      x = params_.encoder[i].forward(x, cache.encoder[i]);
    }
    cache.encoder_features = params_.encoder_norm.forward(x, cache.encoder_norm);
    cache.weights = params_.weight_head.forward(cache.encoder_features);
    return cache.weights;
  }

  Matrix<S> bottleneck(const Matrix<S>& weights) const {
    require(static_cast<std::size_t>(weights.cols()) == config_.bases, ErrorKind::kInvalidInput,
            "lpn: weight matrix must have k columns");
    return weights * params_.bases;
  }

  Matrix<S> decode(const Matrix<S>& weights, ForwardCache<S>& cache) const {
    require(static_cast<std::size_t>(weights.rows()) == config_.frames, ErrorKind::kInvalidInput,
            "lpn: weight matrix must have T rows");
    cache.weights = weights;
    cache.latent = bottleneck(weights);
    Matrix<S> x = cache.latent + positions_;
    cache.decoder.resize(params_.decoder.size());
    for (std::size_t i = 0; i < params_.decoder.size(); ++i) {
      x = params_.decoder[i].forward(x, cache.decoder[i]);
    }
    cache.decoder_features = params_.decoder_norm.forward(x, cache.decoder_norm);
    cache.output = params_.output.forward(cache.decoder_features) * input_scale_.row(0).asDiagonal();
    cache.output.rowwise() += input_mean_.row(0);
    return cache.output;
  }

  Matrix<S> forward(const Matrix<S>& input, ForwardCache<S>& cache) const {
    encode(input, cache);
    return decode(Matrix<S>(cache.weights), cache);
  }

  Matrix<S> reconstruct(const Matrix<S>& input) const {
    ForwardCache<S> cache;
    return forward(input, cache);
  }

  // Backpropagates d(loss)/d(output) and d(loss)/d(W) through a cached
  // forward pass, accumulating into grad.
  void backward(const ForwardCache<S>& cache, const Matrix<S>& doutput, const Matrix<S>& dweights,
                LpnParams<S>& grad) const {
    const Matrix<S> dscaled = doutput * input_scale_.row(0).asDiagonal();
    Matrix<S> dx = params_.output.backward(cache.decoder_features, dscaled, grad.output);
    dx = params_.decoder_norm.backward(cache.decoder_norm, dx, grad.decoder_norm);
    for (std::size_t i = params_.decoder.size(); i-- > 0;) {
      dx = params_.decoder[i].backward(cache.decoder[i], dx, grad.decoder[i]);
    }
    // dx is now d/d(latent).
    grad.bases.noalias() += cache.weights.transpose() * dx;
    Matrix<S> dw = dx * params_.bases.transpose() + dweights;
    Matrix<S> de = params_.weight_head.backward(cache.encoder_features, dw, grad.weight_head);
    de = params_.encoder_norm.backward(cache.encoder_norm, de, grad.encoder_norm);
    for (std::size_t i = params_.encoder.size(); i-- > 0;) {
      de = params_.encoder[i].backward(cache.encoder[i], de, grad.encoder[i]);
    }
    params_.input.backward(cache.input, de, grad.input);
  }

 private:
  LpnConfig config_;
  LpnParams<S> params_;
  Matrix<S> positions_;
  Matrix<S> input_mean_;
  Matrix<S> input_scale_;
};

template <class S>
WeightMatrix encode(const LpnModel<S>& model, const LandmarkSequence& seq) {
  require(seq.frames() == model.config().frames && seq.points() == model.config().points,
          ErrorKind::kInvalidInput, "encode: sequence shape does not match the model");
  ForwardCache<S> cache;
  return {model.encode(to_rows<S>(seq), cache).template cast<double>()};
}

template <class S>
LandmarkSequence decode(const LpnModel<S>& model, const WeightMatrix& weights) {
  require(weights.steps() == model.config().frames && weights.bases() == model.config().bases,
          ErrorKind::kInvalidInput, "decode: weight matrix must be T x k");
  ForwardCache<S> cache;
  return from_rows<S>(model.decode(weights.values.cast<S>(), cache));
}

template <class S>
Matrix<double> bottleneck(const LpnModel<S>& model, const WeightMatrix& weights) {
  return model.bottleneck(weights.values.cast<S>()).template cast<double>();
}

template <class S>
LandmarkSequence reconstruct(const LpnModel<S>& model, const LandmarkSequence& seq) {
  return decode(model, encode(model, seq));
}

}  // namespace kimoi::lpn

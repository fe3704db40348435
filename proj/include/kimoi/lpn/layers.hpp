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
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kimoi::lpn {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Activations are row-per-timestep: a (T x features) matrix.

template <class S>
struct Linear {
  Matrix<S> weight;  // in x out
  Matrix<S> bias;    // 1 x out, or empty without a bias

  Linear() = default;
  Linear(std::size_t in, std::size_t out, bool with_bias = true)
      : weight(Matrix<S>::Zero(in, out)), bias(Matrix<S>::Zero(with_bias ? 1 : 0, out)) {}

  bool has_bias() const { return bias.rows() != 0; }

  Matrix<S> forward(const Matrix<S>& x) const {
    Matrix<S> y = x * weight;
    if (has_bias()) y.rowwise() += bias.row(0);
    return y;
  }

  // Accumulates parameter gradients, returns d/dx.
  Matrix<S> backward(const Matrix<S>& x, const Matrix<S>& dy, Linear& grad) const {
    grad.weight.noalias() += x.transpose() * dy;
    if (has_bias()) grad.bias.row(0) += dy.colwise().sum();
    return dy * weight.transpose();
  }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".weight", weight);
    if (has_bias()) f(prefix + ".bias", bias);
  }
  template <class F>
  void visit(const std::string& prefix, F&& f) const {
    f(prefix + ".weight", weight);
    if (has_bias()) f(prefix + ".bias", bias);
  }
};

template <class S>
struct LayerNorm {
  static constexpr S kEps = S(1e-5);
  Matrix<S> gain;   // 1 x n
  Matrix<S> shift;  // 1 x n

  LayerNorm() = default;
  explicit LayerNorm(std::size_t n)
      : gain(Matrix<S>::Ones(1, n)), shift(Matrix<S>::Zero(1, n)) {}

  struct Cache {
    Matrix<S> normalized;
    Eigen::Matrix<S, Eigen::Dynamic, 1> inv_std;
  };

  Matrix<S> forward(const Matrix<S>& x, Cache& cache) const {
    const Eigen::Index n = x.cols();
    Eigen::Matrix<S, Eigen::Dynamic, 1> mean = x.rowwise().mean();
    cache.normalized = x.colwise() - mean;
    cache.inv_std.resize(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const S var = cache.normalized.row(r).squaredNorm() / S(n);
      cache.inv_std(r) = S(1) / std::sqrt(var + kEps);
      cache.normalized.row(r) *= cache.inv_std(r);
    }
    Matrix<S> y = cache.normalized.array().rowwise() * gain.row(0).array();
    y.rowwise() += shift.row(0);
    return y;
  }

  Matrix<S> backward(const Cache& cache, const Matrix<S>& dy, LayerNorm& grad) const {
    const S n = S(dy.cols());
    grad.gain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
    grad.shift.row(0) += dy.colwise().sum();
    Matrix<S> dxhat = dy.array().rowwise() * gain.row(0).array();
    Matrix<S> dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      const S sum = dxhat.row(r).sum();
      const S dot = dxhat.row(r).dot(cache.normalized.row(r));
      dx.row(r) = (cache.inv_std(r) / n) *
                  (n * dxhat.row(r).array() - sum - cache.normalized.row(r).array() * dot).matrix();
    }
    return dx;
  }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".gain", gain);
    f(prefix + ".shift", shift);
  }
  template <class F>
  void visit(const std::string& prefix, F&& f) const {
    f(prefix + ".gain", gain);
    f(prefix + ".shift", shift);
  }
};

// Multi-head self-attention with a causal mask: step t attends to steps <= t.
// The key projection has no bias: softmax over a row is invariant to it.
template <class S>
struct CausalSelfAttention {
  std::size_t heads = 1;
  Linear<S> query, key, value, out;

  CausalSelfAttention() = default;
  CausalSelfAttention(std::size_t width, std::size_t head_count)
      : heads(head_count), query(width, width), key(width, width, false), value(width, width),
        out(width, width) {}

  struct Cache {
    Matrix<S> input, q, k, v, context;
    std::vector<Matrix<S>> probs;  // per head, T x T
  };

  Matrix<S> forward(const Matrix<S>& x, Cache& cache) const {
    const Eigen::Index steps = x.rows();
    const Eigen::Index width = x.cols();
    const Eigen::Index dh = width / static_cast<Eigen::Index>(heads);
    const S scale = S(1) / std::sqrt(S(dh));
    cache.input = x;
    cache.q = query.forward(x);
    cache.k = key.forward(x);
    cache.v = value.forward(x);
    cache.context.resize(steps, width);
    cache.probs.resize(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dh;
      Matrix<S> scores = (cache.q.middleCols(c0, dh) * cache.k.middleCols(c0, dh).transpose()) * scale;
      Matrix<S>& p = cache.probs[h];
      p.setZero(steps, steps);
      for (Eigen::Index i = 0; i < steps; ++i) {
        const S peak = scores.row(i).head(i + 1).maxCoeff();
        S total = 0;
        for (Eigen::Index j = 0; j <= i; ++j) {
          p(i, j) = std::exp(scores(i, j) - peak);
          total += p(i, j);
        }
        p.row(i).head(i + 1) /= total;
      }
      cache.context.middleCols(c0, dh).noalias() = p * cache.v.middleCols(c0, dh);
    }
    return out.forward(cache.context);
  }

  Matrix<S> backward(const Cache& cache, const Matrix<S>& dy, CausalSelfAttention& grad) const {
    const Eigen::Index steps = dy.rows();
    const Eigen::Index width = dy.cols();
    const Eigen::Index dh = width / static_cast<Eigen::Index>(heads);
    const S scale = S(1) / std::sqrt(S(dh));
    Matrix<S> dcontext = out.backward(cache.context, dy, grad.out);
    Matrix<S> dq(steps, width), dk(steps, width), dv(steps, width);
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dh;
      const Matrix<S>& p = cache.probs[h];
      const Matrix<S> dctx = dcontext.middleCols(c0, dh);
      Matrix<S> dp = dctx * cache.v.middleCols(c0, dh).transpose();
      dv.middleCols(c0, dh).noalias() = p.transpose() * dctx;
      Matrix<S> dscores(steps, steps);
      for (Eigen::Index i = 0; i < steps; ++i) {
        const S inner = p.row(i).dot(dp.row(i));
        dscores.row(i) = (p.row(i).array() * (dp.row(i).array() - inner)).matrix();
      }
      dscores *= scale;
      dq.middleCols(c0, dh).noalias() = dscores * cache.k.middleCols(c0, dh);
      dk.middleCols(c0, dh).noalias() = dscores.transpose() * cache.q.middleCols(c0, dh);
    }
    Matrix<S> dx = query.backward(cache.input, dq, grad.query);
    dx += key.backward(cache.input, dk, grad.key);
    dx += value.backward(cache.input, dv, grad.value);
    return dx;
  }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    query.visit(prefix + ".query", f);
    key.visit(prefix + ".key", f);
    value.visit(prefix + ".value", f);
    out.visit(prefix + ".out", f);
  }
  template <class F>
  void visit(const std::string& prefix, F&& f) const {
    query.visit(prefix + ".query", f);
    key.visit(prefix + ".key", f);
    value.visit(prefix + ".value", f);
    out.visit(prefix + ".out", f);
  }
};

// tanh approximation of GELU; smooth, so finite differences behave.
template <class S>
inline S gelu(S x) {
  constexpr S c = S(0.7978845608028654);  // sqrt(2/pi)
  return S(0.5) * x * (S(1) + std::tanh(c * (x + S(0.044715) * x * x * x)));
}

template <class S>
inline S gelu_grad(S x) {
  constexpr S c = S(0.7978845608028654);
  const S th = std::tanh(c * (x + S(0.044715) * x * x * x));
  return S(0.5) * (S(1) + th) +
         S(0.5) * x * (S(1) - th * th) * c * (S(1) + S(3) * S(0.044715) * x * x);
}

template <class S>
struct FeedForward {
  Linear<S> expand, project;

  FeedForward() = default;
  FeedForward(std::size_t width, std::size_t hidden) : expand(width, hidden), project(hidden, width) {}

  struct Cache {
    Matrix<S> input, pre, act;
  };

  Matrix<S> forward(const Matrix<S>& x, Cache& cache) const {
    cache.input = x;
    cache.pre = expand.forward(x);
    cache.act = cache.pre.unaryExpr([](S v) { return gelu(v); });
    return project.forward(cache.act);
  }

  Matrix<S> backward(const Cache& cache, const Matrix<S>& dy, FeedForward& grad) const {
    Matrix<S> dact = project.backward(cache.act, dy, grad.project);
    Matrix<S> dpre = dact.array() * cache.pre.unaryExpr([](S v) { return gelu_grad(v); }).array();
    return expand.backward(cache.input, dpre, grad.expand);
  }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    expand.visit(prefix + ".expand", f);
    project.visit(prefix + ".project", f);
  }
  template <class F>
  void visit(const std::string& prefix, F&& f) const {
    expand.visit(prefix + ".expand", f);
    project.visit(prefix + ".project", f);
  }
};

// Pre-norm transformer block:
//   h = x + attn(norm1(x));  y = h + ff(norm2(h))
template <class S>
struct TransformerBlock {
  LayerNorm<S> norm1;
  CausalSelfAttention<S> attention;
  LayerNorm<S> norm2;
  FeedForward<S> ff;

  TransformerBlock() = default;
  TransformerBlock(std::size_t width, std::size_t heads, std::size_t hidden)
      : norm1(width), attention(width, heads), norm2(width), ff(width, hidden) {}

  struct Cache {
    typename LayerNorm<S>::Cache n1, n2;
    typename CausalSelfAttention<S>::Cache attn;
    typename FeedForward<S>::Cache ff;
  };

  Matrix<S> forward(const Matrix<S>& x, Cache& cache) const {
    Matrix<S> h = x + attention.forward(norm1.forward(x, cache.n1), cache.attn);
    return h + ff.forward(norm2.forward(h, cache.n2), cache.ff);
  }

  Matrix<S> backward(const Cache& cache, const Matrix<S>& dy, TransformerBlock& grad) const {
    Matrix<S> dh = dy + norm2.backward(cache.n2, ff.backward(cache.ff, dy, grad.ff), grad.norm2);
    return dh + norm1.backward(cache.n1, attention.backward(cache.attn, dh, grad.attention),
                               grad.norm1);
  }

  template <class F>
  void visit(const std::string& prefix, F&& f) {
    norm1.visit(prefix + ".norm1", f);
    attention.visit(prefix + ".attn", f);
    norm2.visit(prefix + ".norm2", f);
    ff.visit(prefix + ".ff", f);
  }
  template <class F>
  void visit(const std::string& prefix, F&& f) const {
    norm1.visit(prefix + ".norm1", f);
    attention.visit(prefix + ".attn", f);
    norm2.visit(prefix + ".norm2", f);
    ff.visit(prefix + ".ff", f);
  }
};

template <class S>
Matrix<S> sinusoidal_positions(std::size_t steps, std::size_t width) {
  Matrix<S> pe(steps, width);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < width; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(width));
      pe(t, i) = S(std::sin(static_cast<double>(t) * freq));
      if (i + 1 < width) pe(t, i + 1) = S(std::cos(static_cast<double>(t) * freq));
    }
  }
  return pe;
}

}  // namespace kimoi::lpn

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
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/geometry/regions.hpp"
#include "kimoi/random.hpp"

namespace kimoi::analysis {

// Analytical noise baselines and the rigid per-region fixture. All operate
// on normalized landmark sequences and only touch the selected regions.

inline LandmarkSequence iid_noise_baseline(const LandmarkSequence& seq, double sigma,
                                           const std::vector<FaceRegion>& regions, Rng& rng) {
  require(sigma >= 0.0, ErrorKind::kInvalidInput, "iid_noise_baseline: sigma must be >= 0");
  const std::vector<bool> selected = region_mask(regions, seq.points());
  LandmarkSequence out = seq;
  if (sigma == 0.0) return out;
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    for (std::size_t j = 0; j < seq.points(); ++j) {
      if (!selected[j]) continue;
      out.at(t, j).x += sigma * standard_normal(rng);
      out.at(t, j).y += sigma * standard_normal(rng);
    }
  }
  return out;
}

// Lower Cholesky factor of a symmetric PSD matrix, retrying with a 1e-10
// diagonal jitter when the plain factorization fails.
inline Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& covariance) {
  require(covariance.rows() == covariance.cols(), ErrorKind::kInvalidInput,
          "covariance must be square");
  require((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff()),
          ErrorKind::kInvalidInput, "covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    const Eigen::MatrixXd jittered =
        covariance + 1e-10 * Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols());
    llt.compute(jittered);
  }
  require(llt.info() == Eigen::Success, ErrorKind::kInvalidInput,
          "covariance is not positive semi-definite");
  return llt.matrixL();
}

// Per frame, draws z ~ N(0, covariance) over the 2N interleaved coordinates
// (x0, y0, x1, y1, ...) and adds it to landmarks of the selected regions.
inline LandmarkSequence multivariate_noise_baseline(const LandmarkSequence& seq,
                                                    const Eigen::MatrixXd& covariance,
                                                    const std::vector<FaceRegion>& regions, Rng& rng) {
  const Eigen::Index dim = static_cast<Eigen::Index>(2 * seq.points());
  require(covariance.rows() == dim, ErrorKind::kInvalidInput,
          "multivariate_noise_baseline: covariance must be 2N x 2N");
  const Eigen::MatrixXd factor = psd_cholesky(covariance);
  const std::vector<bool> selected = region_mask(regions, seq.points());
  LandmarkSequence out = seq;
  Eigen::VectorXd z(dim);
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = standard_normal(rng);
    const Eigen::VectorXd noise = factor.triangularView<Eigen::Lower>() * z;
    for (std::size_t j = 0; j < seq.points(); ++j) {
      if (!selected[j]) continue;
      out.at(t, j).x += noise(static_cast<Eigen::Index>(2 * j));
      out.at(t, j).y += noise(static_cast<Eigen::Index>(2 * j + 1));
    }
  }
  return out;
}

// Per-frame noise covariance whose temporal differences reproduce the
// step covariance of `artifacts`: differencing i.i.d. frame noise doubles
// the covariance, so the estimate is halved.
inline Eigen::MatrixXd covariance_from_artifacts(const std::vector<TemporalArtifact>& artifacts) {
  require(!artifacts.empty(), ErrorKind::kInvalidInput, "covariance_from_artifacts: no artifacts");
  const std::size_t n = artifacts.front().points();
  std::size_t rows = 0;
  for (const TemporalArtifact& a : artifacts) {
    require(a.points() == n, ErrorKind::kInvalidInput, "covariance_from_artifacts: inconsistent N_lnd");
    rows += a.steps();
  }
  require(rows >= 2, ErrorKind::kInvalidInput, "covariance_from_artifacts: need >= 2 steps");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(2 * n));
  Eigen::Index r = 0;
  for (const TemporalArtifact& a : artifacts) {
    for (std::size_t i = 0; i < a.steps(); ++i, ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        data(r, static_cast<Eigen::Index>(2 * j)) = a.at(i, j).x;
        data(r, static_cast<Eigen::Index>(2 * j + 1)) = a.at(i, j).y;
      }
    }
  }
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(rows - 1);
  cov = (0.25 * (cov + cov.transpose())).eval();
  return cov;
}

struct RigidFixtureOptions {
  double translation = 0.004;  // std of per-frame translation, normalized units
  double rotation = 0.02;      // std of rotation, radians
  double scale = 0.02;         // std of isotropic scale change
};

// Per frame and per selected region, applies an independent small random
// similarity transform about the region centroid, so every landmark of a
// region moves rigidly together.
inline LandmarkSequence rigid_region_fixture(const LandmarkSequence& seq,
                                             const std::vector<FaceRegion>& regions, Rng& rng,
                                             const RigidFixtureOptions& opts = {}) {
  LandmarkSequence out = seq;
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    for (FaceRegion region : regions) {
      const std::vector<std::size_t> idx = region_indices(region);
      Point2 centroid;
      for (std::size_t j : idx) centroid += seq.at(t, j);
      centroid = (1.0 / static_cast<double>(idx.size())) * centroid;
      const double angle = opts.rotation * standard_normal(rng);
      const double s = 1.0 + opts.scale * standard_normal(rng);
      const Point2 shift{opts.translation * standard_normal(rng), opts.translation * standard_normal(rng)};
      const double c = std::cos(angle) * s, sn = std::sin(angle) * s;
      for (std::size_t j : idx) {
        const Point2 d = seq.at(t, j) - centroid;
        out.at(t, j) = centroid + Point2{c * d.x - sn * d.y, sn * d.x + c * d.y} + shift;
      }
    }
  }
  return out;
}

}  // namespace kimoi::analysis

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
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kimoi/error.hpp"
#include "kimoi/geometry/landmarks.hpp"
#include "kimoi/geometry/regions.hpp"

namespace kimoi::analysis {

// Which scalar per landmark per step is correlated.
enum class SeriesMode { kMagnitude, kX, kY };

inline std::string_view series_mode_name(SeriesMode mode) {
  switch (mode) {
    case SeriesMode::kMagnitude: return "magnitude";
    case SeriesMode::kX: return "x";
    case SeriesMode::kY: return "y";
  }
  return "";
}

inline SeriesMode series_mode_from_name(std::string_view name) {
  if (name == "magnitude") return SeriesMode::kMagnitude;
  if (name == "x") return SeriesMode::kX;
  if (name == "y") return SeriesMode::kY;
  throw Error(ErrorKind::kUsage, "unknown series mode: " + std::string(name));
}

// observations x landmarks; one row per (clip, step).
struct ArtifactSeries {
  Eigen::MatrixXd values;

  std::size_t landmarks() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t observations() const { return static_cast<std::size_t>(values.rows()); }
  std::vector<double> series(std::size_t landmark) const {
    std::vector<double> out(observations());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(landmark));
    return out;
  }
};

inline ArtifactSeries artifact_series(const std::vector<TemporalArtifact>& artifacts,
                                      SeriesMode mode = SeriesMode::kMagnitude) {
  require(!artifacts.empty(), ErrorKind::kInvalidInput, "artifact_series: no artifacts");
  const std::size_t n = artifacts.front().points();
  std::size_t rows = 0;
  for (const TemporalArtifact& a : artifacts) {
    require(a.points() == n, ErrorKind::kInvalidInput, "artifact_series: inconsistent N_lnd");
    rows += a.steps();
  }
  ArtifactSeries out{Eigen::MatrixXd(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n))};
  Eigen::Index r = 0;
  for (const TemporalArtifact& a : artifacts) {
    for (std::size_t i = 0; i < a.steps(); ++i, ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        const Point2 d = a.at(i, j);
        double v = 0.0;
        switch (mode) {
          case SeriesMode::kMagnitude: v = l2_norm(d); break;
          case SeriesMode::kX: v = d.x; break;
          case SeriesMode::kY: v = d.y; break;
        }
        out.values(r, static_cast<Eigen::Index>(j)) = v;
      }
    }
  }
  return out;
}

struct CorrelationMatrix {
  Eigen::MatrixXd values;
  std::size_t sample_count = 0;
  std::vector<bool> zero_variance;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  double max_abs_off_diagonal() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        if (i != j) m = std::max(m, std::abs(values(i, j)));
      }
    }
    return m;
  }
};

// Pearson correlation between columns of `data` (observations x variables).
// Zero-variance variables get a zero row/column (diagonal included) and are
// flagged.
inline CorrelationMatrix pearson(const Eigen::MatrixXd& data) {
  require(data.rows() >= 2, ErrorKind::kInvalidInput,
          "correlation_matrix: need at least 2 observations");
  const Eigen::Index n = data.cols();
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  CorrelationMatrix out{Eigen::MatrixXd::Zero(n, n), static_cast<std::size_t>(data.rows()),
                        std::vector<bool>(static_cast<std::size_t>(n), false)};
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = data.col(i).cwiseAbs().maxCoeff();
    const double floor = 1e-24 * static_cast<double>(data.rows()) * std::max(mag * mag, 1e-300);
    out.zero_variance[static_cast<std::size_t>(i)] = !(cov(i, i) > floor);
    scale(i) = out.zero_variance[static_cast<std::size_t>(i)] ? 0.0 : 1.0 / std::sqrt(cov(i, i));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.zero_variance[static_cast<std::size_t>(i)]) continue;
    out.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (out.zero_variance[static_cast<std::size_t>(j)]) continue;
      const double r = std::clamp(cov(i, j) * scale(i) * scale(j), -1.0, 1.0);
      out.values(i, j) = r;
      out.values(j, i) = r;
    }
  }
  return out;
}

inline CorrelationMatrix correlation_matrix(const ArtifactSeries& series) {
  return pearson(series.values);
}

// Mean |corr| over off-diagonal pairs inside the same block minus mean |corr|
// over pairs in different blocks. Indices outside every block are ignored.
inline double block_structure_score(const CorrelationMatrix& corr,
                                    const std::vector<std::vector<std::size_t>>& blocks) {
  std::vector<int> block_of(corr.size(), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i : blocks[b]) {
      require(i < corr.size(), ErrorKind::kInvalidInput, "block_structure_score: index out of range");
      block_of[i] = static_cast<int>(b);
    }
  }
  double within = 0.0, across = 0.0;
  std::size_t n_within = 0, n_across = 0;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    if (block_of[i] < 0) continue;
    for (std::size_t j = 0; j < corr.size(); ++j) {
      if (i == j || block_of[j] < 0) continue;
      const double v = std::abs(corr(i, j));
      if (block_of[i] == block_of[j]) {
        within += v;
        ++n_within;
      } else {
        across += v;
        ++n_across;
      }
    }
  }
  const double mean_within = n_within ? within / static_cast<double>(n_within) : 0.0;
  const double mean_across = n_across ? across / static_cast<double>(n_across) : 0.0;
  return mean_within - mean_across;
}

inline std::vector<std::vector<std::size_t>> region_blocks(const std::vector<FaceRegion>& regions) {
  std::vector<std::vector<std::size_t>> blocks;
  for (FaceRegion r : regions) blocks.push_back(region_indices(r));
  return blocks;
}

inline std::string to_csv(const CorrelationMatrix& corr) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < corr.values.cols(); ++j) {
      if (j) os << ',';
      os << corr.values(i, j);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace kimoi::analysis

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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "kimoi/kimoi.hpp"
#include "support/fixtures.hpp"

namespace kimoi::analysis {
namespace {

std::vector<FaceRegion> inner() { return {kInnerRegions.begin(), kInnerRegions.end()}; }

LandmarkSequence static_face(std::size_t frames) {
  const std::vector<Point2> face = synth::template_face();
  LandmarkSequence seq(frames, 68);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < 68; ++j) seq.at(t, j) = face[j];
  }
  return seq;
}

double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

void expect_valid(const CorrelationMatrix& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.zero_variance[i]) {
      EXPECT_EQ(c(i, i), 1.0);
    }
    for (std::size_t j = 0; j < c.size(); ++j) {
      EXPECT_NEAR(c(i, j), c(j, i), 1e-12);
      EXPECT_LE(std::abs(c(i, j)), 1.0 + 1e-12);
    }
  }
}

TEST(ArtifactSeries, ZeroArtifactsGiveZeroSeries) {
  const ArtifactSeries s = artifact_series({TemporalArtifact(5, 68)});
  EXPECT_EQ(s.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.observations(), 5u);
}

TEST(ArtifactSeries, ThreeFourFive) {
  TemporalArtifact a(1, 68);
  a.at(0, 12) = {3.0, 4.0};
  EXPECT_EQ(artifact_series({a}).values(0, 12), 5.0);
}

TEST(ArtifactSeries, MatchesNaiveLoop) {
  Rng rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<TemporalArtifact> clips;
  for (int c = 0; c < 4; ++c) {
    TemporalArtifact a(3 + c, 68);
    for (Point2& p : a.data()) p = {n(rng), n(rng)};
    clips.push_back(a);
  }
  const ArtifactSeries s = artifact_series(clips);
  Eigen::Index row = 0;
  for (const TemporalArtifact& a : clips) {
    for (std::size_t i = 0; i < a.steps(); ++i, ++row) {
      for (std::size_t j = 0; j < 68; ++j) {
        EXPECT_DOUBLE_EQ(s.values(row, j), std::sqrt(a.at(i, j).x * a.at(i, j).x + a.at(i, j).y * a.at(i, j).y));
      }
    }
  }
  EXPECT_EQ(row, 18);
  EXPECT_THROW(artifact_series({}), Error);
}

TEST(Correlation, CoMovingLandmarksCorrelatePerfectly) {
  Eigen::MatrixXd data(6, 3);
  data << 1, 2, 5, 2, 4, 1, 3, 6, 4, 4, 8, 2, 5, 10, 9, 6, 12, 0;
  const CorrelationMatrix c = pearson(data);
  EXPECT_NEAR(c(0, 1), 1.0, 1e-15);
  expect_valid(c);
}

TEST(Correlation, MatchesNaivePearson) {
  Rng rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd data(50, 6);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = n(rng);
  data.col(3) += 0.7 * data.col(1);
  const CorrelationMatrix c = pearson(data);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      std::vector<double> a(data.col(i).data(), data.col(i).data() + 50);
      std::vector<double> b(data.col(j).data(), data.col(j).data() + 50);
      EXPECT_NEAR(c(i, j), naive_pearson(a, b), 1e-12);
    }
  }
}

TEST(Correlation, ZeroVarianceIsFlagged) {
  Eigen::MatrixXd data(4, 3);
  data << 1, 7, 3, 2, 7, 1, 3, 7, 2, 4, 7, 5;
  const CorrelationMatrix c = pearson(data);
  EXPECT_TRUE(c.zero_variance[1]);
  EXPECT_FALSE(c.zero_variance[0]);
  EXPECT_EQ(c(0, 1), 0.0);
  EXPECT_EQ(c(1, 2), 0.0);
}

TEST(Correlation, NeedsTwoObservations) {
  try {
    pearson(Eigen::MatrixXd::Ones(1, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

std::vector<TemporalArtifact> iid_artifacts(std::size_t clips, std::size_t frames, double sigma, Rng& rng) {
  const LandmarkSequence base = static_face(frames);
  std::vector<TemporalArtifact> out;
  for (std::size_t c = 0; c < clips; ++c) {
    out.push_back(temporal_artifacts(iid_noise_baseline(base, sigma, inner(), rng), base));
  }
  return out;
}

TEST(IidBaseline, ZeroSigmaIsIdentity) {
  Rng rng(3);
  const LandmarkSequence seq = testing::random_sequence(5, 68, rng);
  const LandmarkSequence out = iid_noise_baseline(seq, 0.0, inner(), rng);
  EXPECT_EQ(out.data().size(), seq.data().size());
  for (std::size_t n = 0; n < seq.data().size(); ++n) EXPECT_EQ(out.data()[n].x, seq.data()[n].x);
  EXPECT_THROW(iid_noise_baseline(seq, -1.0, inner(), rng), Error);
}

TEST(IidBaseline, VarianceMatchesSigma) {
  Rng rng(4);
  const LandmarkSequence base = static_face(10000);
  const double sigma = 0.007;
  const LandmarkSequence out = iid_noise_baseline(base, sigma, {FaceRegion::kMouth}, rng);
  double sq = 0.0;
  for (std::size_t t = 0; t < 10000; ++t) {
    const double d = out.at(t, 50).x - base.at(t, 50).x;
    sq += d * d;
    EXPECT_EQ(out.at(t, 0).x, base.at(t, 0).x);
  }
  EXPECT_NEAR(sq / 10000, sigma * sigma, 0.05 * sigma * sigma);
}

TEST(IidBaseline, OffDiagonalCorrelationVanishes) {
  Rng rng(5);
  const CorrelationMatrix c = correlation_matrix(artifact_series(iid_artifacts(625, 17, 0.007, rng)));
  EXPECT_EQ(c.sample_count, 10000u);
  expect_valid(c);
  double m = 0.0;
  for (std::size_t i = 17; i < 68; ++i) {
    for (std::size_t j = 17; j < 68; ++j) {
      if (i != j) m = std::max(m, std::abs(c(i, j)));
    }
  }
  EXPECT_LT(m, 0.05);
  // Jawline is never perturbed.
  EXPECT_TRUE(c.zero_variance[0]);
}

TEST(IidBaseline, SplitHalvesAgree) {
  Rng rng(6);
  std::vector<TemporalArtifact> all = iid_artifacts(400, 17, 0.007, rng);
  const std::vector<TemporalArtifact> a(all.begin(), all.begin() + 200), b(all.begin() + 200, all.end());
  const CorrelationMatrix ca = correlation_matrix(artifact_series(a));
  const CorrelationMatrix cb = correlation_matrix(artifact_series(b));
  EXPECT_LT((ca.values - cb.values).cwiseAbs().maxCoeff(), 0.1);
}

TEST(MultivariateBaseline, DiagonalCovarianceMatchesIidInDistribution) {
  // Two-sample Kolmogorov-Smirnov per coordinate at alpha = 0.01.
  const double sigma = 0.007;
  const std::size_t n = 10000;
  const LandmarkSequence base = static_face(n);
  Rng r1(7), r2(8);
  const LandmarkSequence a = iid_noise_baseline(base, sigma, inner(), r1);
  const Eigen::MatrixXd cov = sigma * sigma * Eigen::MatrixXd::Identity(136, 136);
  const LandmarkSequence b = multivariate_noise_baseline(base, cov, inner(), r2);
  const double critical = 1.628 * std::sqrt(2.0 / n);
  int rejections = 0;
  for (std::size_t j : {18u, 30u, 37u, 44u, 50u, 60u}) {
    std::vector<double> xa(n), xb(n);
    for (std::size_t t = 0; t < n; ++t) {
      xa[t] = a.at(t, j).x - base.at(t, j).x;
      xb[t] = b.at(t, j).x - base.at(t, j).x;
    }
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < n && ib < n) {
      if (xa[ia] <= xb[ib]) ++ia; else ++ib;
      d = std::max(d, std::abs(double(ia) / n - double(ib) / n));
    }
    rejections += d > critical;
  }
  EXPECT_EQ(rejections, 0);
}

TEST(MultivariateBaseline, RankOneCovarianceCorrelatesEverything) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(136);
  for (std::size_t j : region_indices(FaceRegion::kMouth)) v(2 * j) = 0.005;
  const Eigen::MatrixXd cov = v * v.transpose();
  Rng rng(9);
  const LandmarkSequence base = static_face(2000);
  const LandmarkSequence out = multivariate_noise_baseline(base, cov, {FaceRegion::kMouth}, rng);
  Eigen::MatrixXd dx(2000, 20);
  for (std::size_t t = 0; t < 2000; ++t) {
    for (std::size_t j = 0; j < 20; ++j) dx(t, j) = out.at(t, 48 + j).x - base.at(t, 48 + j).x;
  }
  const CorrelationMatrix c = pearson(dx);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) EXPECT_GT(c(i, j), 0.999);
  }
}

TEST(MultivariateBaseline, NonPsdCovarianceIsInvalid) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(136, 136);
  cov(0, 0) = -1.0;
  Rng rng(10);
  try {
    multivariate_noise_baseline(static_face(2), cov, inner(), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(136, 136);
  asym(0, 1) = 0.5;
  EXPECT_THROW(multivariate_noise_baseline(static_face(2), asym, inner(), rng), Error);
}

TEST(MultivariateBaseline, EstimatedCovarianceReproducesCorrelation) {
  // Reference corpus: rigid per-region motion, strongly block structured.
  Rng rng(11);
  const LandmarkSequence base = static_face(17);
  std::vector<TemporalArtifact> reference;
  for (int c = 0; c < 600; ++c) {
    reference.push_back(temporal_artifacts(rigid_region_fixture(base, inner(), rng), base));
  }
  const Eigen::MatrixXd cov = covariance_from_artifacts(reference);
  std::vector<TemporalArtifact> resampled;
  for (int c = 0; c < 600; ++c) {
    resampled.push_back(temporal_artifacts(multivariate_noise_baseline(base, cov, inner(), rng), base));
  }
  const CorrelationMatrix a = correlation_matrix(artifact_series(reference, SeriesMode::kX));
  const CorrelationMatrix b = correlation_matrix(artifact_series(resampled, SeriesMode::kX));
  double worst = 0.0;
  for (std::size_t i = 17; i < 68; ++i) {
    for (std::size_t j = 17; j < 68; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  }
  EXPECT_LT(worst, 0.1);
}

TEST(BlockScore, IdentityScoresZero) {
  CorrelationMatrix c{Eigen::MatrixXd::Identity(68, 68), 10, std::vector<bool>(68, false)};
  EXPECT_EQ(block_structure_score(c, region_blocks(inner())), 0.0);
}

TEST(BlockScore, BlockConstantScoresOne) {
  CorrelationMatrix c{Eigen::MatrixXd::Zero(68, 68), 10, std::vector<bool>(68, false)};
  for (FaceRegion r : kAllRegions) {
    for (std::size_t i : region_indices(r)) {
      for (std::size_t j : region_indices(r)) c.values(i, j) = 1.0;
    }
  }
  EXPECT_DOUBLE_EQ(block_structure_score(c, region_blocks(inner())), 1.0);
}

TEST(BlockScore, RigidFixtureBeatsIidNoise) {
  Rng rng(12);
  const LandmarkSequence base = static_face(17);
  std::vector<TemporalArtifact> rigid, iid;
  for (int c = 0; c < 100; ++c) {
    rigid.push_back(temporal_artifacts(rigid_region_fixture(base, inner(), rng), base));
    iid.push_back(temporal_artifacts(iid_noise_baseline(base, 0.004, inner(), rng), base));
  }
  const auto blocks = region_blocks(inner());
  const double sr = block_structure_score(correlation_matrix(artifact_series(rigid)), blocks);
  const double si = block_structure_score(correlation_matrix(artifact_series(iid)), blocks);
  EXPECT_GT(sr, si);
  EXPECT_GT(sr, 0.2);
}

TEST(Csv, WritesEveryEntry) {
  CorrelationMatrix c{Eigen::MatrixXd::Identity(3, 3), 2, std::vector<bool>(3, false)};
  EXPECT_EQ(to_csv(c), "1,0,0\n0,1,0\n0,0,1\n");
}

}  // namespace
}  // namespace kimoi::analysis

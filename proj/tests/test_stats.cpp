#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "curvematch/stats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace cm = curvematch;

namespace {

cm::Curve blob(double bump = 0.25, double phase = 0.0) {
  return cm::project_curve(
      [=](double t) {
        const double r = 1.0 + bump * std::cos(3.0 * t + phase) + 0.1 * std::sin(2.0 * t);
        return Eigen::Vector2d(r * std::cos(t), r * std::sin(t));
      },
      12, 4);
}

std::vector<cm::TangentVector> random_fields(std::mt19937_64& rng, const cm::Curve& base, std::size_t n,
                                             double scale = 0.1) {
  std::vector<cm::TangentVector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(cm::fixtures::random_field(rng, base, scale));
  return out;
}

// Eigenvalues of the G-covariance operator from the control-space
// generalized problem C M u = lambda u, via M = L L^T.
Eigen::VectorXd primal_spectrum(const cm::MetricParams& p, const cm::Curve& base,
                                const std::vector<cm::TangentVector>& vs, double div) {
  const Eigen::MatrixXd M = cm::metric_matrix(p, base, cm::default_grid(base.basis()));
  Eigen::MatrixXd X(static_cast<Eigen::Index>(vs.size()), M.rows());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(vs[i].controls().data(), vs[i].controls().size());
  }
  X.rowwise() -= X.colwise().mean();
  const Eigen::MatrixXd C = X.transpose() * X / div;
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(M).matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L.transpose() * C * L);
  return eig.eigenvalues().reverse();
}

cm::MetricParams l2_params() {
  cm::MetricParams p;
  p.a1 = p.a2 = 0.0;
  p.allow_degenerate = true;
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// PCA

TEST(TangentPca, RankOne) {
  const cm::MetricParams p;
  const cm::Curve mean = blob();
  std::mt19937_64 rng(1);
  const cm::TangentVector v = cm::fixtures::random_field(rng, mean, 0.2);
  const cm::PcaModel m = cm::tangent_pca(p, mean, {v, -v});
  const double g = cm::metric_eval(p, mean, v, v);
  ASSERT_EQ(m.components(), 1u);
  EXPECT_NEAR(m.eigenvalues[0], g, 1e-8 * g);
  EXPECT_LE(m.eigenvalues[1], 1e-12 * g);
  ASSERT_EQ(m.explained.size(), 1);
  EXPECT_EQ(m.explained[0], 1.0);
  EXPECT_EQ(m.ratio[0], 1.0);
}

TEST(TangentPca, EqualVelocitiesHaveNoVariance) {
  const cm::MetricParams p;
  const cm::Curve mean = blob();
  std::mt19937_64 rng(2);
  const cm::TangentVector v = cm::fixtures::random_field(rng, mean, 0.2);
  const cm::PcaModel m = cm::tangent_pca(p, mean, {v, v, v});
  EXPECT_EQ(m.components(), 0u);
  EXPECT_LT(m.eigenvalues.cwiseAbs().maxCoeff(), 1e-20);
  EXPECT_LT((m.center.controls() - v.controls()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TangentPca, RandomSetContract) {
  const cm::MetricParams p = cm::MetricParams::sobolev(1.0, 0.5, 2.0);
  const cm::Curve mean = blob();
  std::mt19937_64 rng(3);
  const auto vs = random_fields(rng, mean, 7);
  const cm::PcaModel m = cm::tangent_pca(p, mean, vs);
  ASSERT_EQ(m.components(), 6u);  // centring removes one dimension

  for (Eigen::Index k = 1; k < m.eigenvalues.size(); ++k) EXPECT_LE(m.eigenvalues[k], m.eigenvalues[k - 1]);
  for (Eigen::Index k = 1; k < m.explained.size(); ++k) EXPECT_LE(m.explained[k - 1], m.explained[k]);
  EXPECT_EQ(m.explained[m.explained.size() - 1], 1.0);
  EXPECT_NEAR(m.ratio.sum(), 1.0, 1e-14);

  for (std::size_t a = 0; a < m.components(); ++a) {
    for (std::size_t b = 0; b < m.components(); ++b) {
      EXPECT_NEAR(cm::metric_eval(p, mean, m.directions[a], m.directions[b]), a == b ? 1.0 : 0.0, 1e-8);
    }
  }
  // scores are G-inner products, and they reconstruct the centred data
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const cm::TangentVector centred = vs[i] - m.center;
    cm::TangentVector rebuilt = cm::TangentVector::zero(mean);
    for (std::size_t k = 0; k < m.components(); ++k) {
      const double s = m.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      EXPECT_NEAR(s, cm::metric_eval(p, mean, centred, m.directions[k]), 1e-8);
      rebuilt += m.directions[k] * s;
    }
    EXPECT_LT((rebuilt.controls() - centred.controls()).cwiseAbs().maxCoeff(), 1e-8);
  }
  // total variance and spectrum against the control-space problem
  EXPECT_NEAR(m.total_variance, m.eigenvalues.sum(), 1e-10 * m.total_variance);
  const Eigen::VectorXd ref = primal_spectrum(p, mean, vs, 7.0);
  for (Eigen::Index k = 0; k < 6; ++k) EXPECT_NEAR(m.eigenvalues[k], ref[k], 1e-9 * ref[0]);
}

TEST(TangentPca, SampleDivisor) {
  const cm::MetricParams p;
  const cm::Curve mean = blob();
  std::mt19937_64 rng(4);
  const auto vs = random_fields(rng, mean, 5);
  const cm::PcaModel a = cm::tangent_pca(p, mean, vs, cm::Divisor::population);
  const cm::PcaModel b = cm::tangent_pca(p, mean, vs, cm::Divisor::sample);
  for (Eigen::Index k = 0; k < a.eigenvalues.size(); ++k) {
    EXPECT_NEAR(b.eigenvalues[k], a.eigenvalues[k] * 5.0 / 4.0, 1e-10 * a.eigenvalues[0]);
  }
  EXPECT_THROW(cm::tangent_pca(p, mean, {vs[0]}, cm::Divisor::sample), cm::InvalidArgument);
}

TEST(TangentPca, PrimalRouteMatchesGram) {
  // 30 velocities in a 24-dimensional control space use the primal route;
  // the first 20 of them (Gram route) embedded in the same span must agree
  // on every invariant quantity.
  const cm::MetricParams p;
  const cm::Curve mean = blob();
  std::mt19937_64 rng(5);
  const auto vs = random_fields(rng, mean, 30);
  const cm::PcaModel m = cm::tangent_pca(p, mean, vs);
  EXPECT_EQ(m.eigenvalues.size(), 24);
  const Eigen::VectorXd ref = primal_spectrum(p, mean, vs, 30.0);
  for (Eigen::Index k = 0; k < 24; ++k) EXPECT_NEAR(m.eigenvalues[k], ref[k], 1e-10 * ref[0]);
  for (std::size_t a = 0; a < m.components(); ++a) {
    EXPECT_NEAR(cm::metric_norm(p, mean, m.directions[a]), 1.0, 1e-8);
  }
  for (std::size_t i = 0; i < vs.size(); ++i) {
    cm::TangentVector rebuilt = m.center;
    for (std::size_t k = 0; k < m.components(); ++k) {
      rebuilt += m.directions[k] * m.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    EXPECT_LT((rebuilt.controls() - vs[i].controls()).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_NEAR(m.total_variance, m.eigenvalues.sum(), 1e-10 * m.total_variance);
}

TEST(TangentPca, InvalidInput) {
  const cm::Curve mean = blob();
  EXPECT_THROW(cm::tangent_pca(cm::MetricParams{}, mean, {}), cm::InvalidArgument);
  const cm::Curve other = cm::fixtures::ellipse(1.0, 0.5, 10, 3);
  EXPECT_THROW(cm::tangent_pca(cm::MetricParams{}, mean, {cm::TangentVector::zero(other)}),
               cm::InvalidArgument);
}

// ---------------------------------------------------------------------------
// principal geodesics and sampling

class ModelFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    mean = blob();
    std::mt19937_64 rng(6);
    model = cm::tangent_pca(params, mean, random_fields(rng, mean, 5, 0.05));
  }
  cm::MetricParams params;
  cm::Curve mean;
  cm::PcaModel model;
};

TEST_F(ModelFixture, PrincipalGeodesicAtZeroIsMean) {
  const cm::CurveBatch b = cm::principal_geodesic(model, 0, {0.0});
  ASSERT_TRUE(b.complete());
  EXPECT_TRUE(b.curves[0]->controls() == mean.controls());
}

TEST_F(ModelFixture, PrincipalGeodesicSidesDiffer) {
  const cm::CurveBatch b = cm::principal_geodesic(model, 0, {-3, -2, -1, 0, 1, 2, 3});
  ASSERT_TRUE(b.complete());
  ASSERT_EQ(b.curves.size(), 7u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_GT((b.curves[k]->controls() - b.curves[6 - k]->controls()).norm(), 1e-3);
  }
}

TEST_F(ModelFixture, PrincipalGeodesicSecondOrderDeviation) {
  cm::ExpBatchOptions opt;
  opt.steps = 10;
  const double sd = std::sqrt(model.eigenvalues[0]);
  auto deviation = [&](double s) {
    const cm::CurveBatch b = cm::principal_geodesic(model, 0, {s}, opt);
    const cm::Controls linear = mean.controls() + (s * sd) * model.directions[0].controls();
    return (b.curves[0]->controls() - linear).norm();
  };
  const double r1 = deviation(0.4) / deviation(0.2);
  const double r2 = deviation(0.2) / deviation(0.1);
  EXPECT_GT(r1, 3.0);
  EXPECT_LT(r1, 5.0);
  EXPECT_GT(r2, 3.0);
  EXPECT_LT(r2, 5.0);
}

TEST_F(ModelFixture, PrincipalGeodesicComponentCheck) {
  EXPECT_THROW(cm::principal_geodesic(model, model.components(), {1.0}), cm::InvalidArgument);
}

TEST_F(ModelFixture, FailedRayGivesPartialBatch) {
  cm::ExpBatchOptions opt;
  opt.steps = 2;
  const cm::CurveBatch b = cm::principal_geodesic(model, 0, {0.0, 1.0, 1e4}, opt);
  EXPECT_EQ(b.failed, std::vector<std::size_t>{2});
  ASSERT_EQ(b.curves.size(), 3u);
  EXPECT_TRUE(b.curves[0] && b.curves[1]);
  EXPECT_FALSE(b.curves[2]);
}

TEST_F(ModelFixture, SamplesAreDeterministic) {
  const cm::GaussianSamples a = cm::sample_gaussian(model, 3, 99);
  const cm::GaussianSamples b = cm::sample_gaussian(model, 3, 99);
  const cm::GaussianSamples c = cm::sample_gaussian(model, 3, 100);
  ASSERT_TRUE(a.batch.complete() && b.batch.complete());
  EXPECT_TRUE(a.coefficients == b.coefficients);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(a.batch.curves[i]->controls() == b.batch.curves[i]->controls());
  EXPECT_FALSE(a.coefficients == c.coefficients);
}

TEST_F(ModelFixture, CoefficientVariance) {
  const Eigen::MatrixXd z = cm::gaussian_coefficients(model, 10000, 7);
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const double var = z.col(k).squaredNorm() / static_cast<double>(z.rows());
    EXPECT_NEAR(var, model.eigenvalues[k], 0.05 * model.eigenvalues[k]) << k;
  }
}

TEST_F(ModelFixture, PcaOfSampledVelocitiesRecoversSpectrum) {
  const Eigen::MatrixXd z = cm::gaussian_coefficients(model, 10000, 8);
  std::vector<cm::TangentVector> vs;
  for (Eigen::Index i = 0; i < z.rows(); ++i) vs.push_back(cm::combine_directions(model, z.row(i).transpose()));
  const cm::PcaModel again = cm::tangent_pca(params, mean, vs);
  ASSERT_GE(again.eigenvalues.size(), static_cast<Eigen::Index>(model.components()));
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(model.components()); ++k) {
    EXPECT_NEAR(again.eigenvalues[k], model.eigenvalues[k], 0.05 * model.eigenvalues[k]) << k;
  }
}

TEST(SampleGaussian, ZeroVarianceSamplesAreMean) {
  const cm::Curve mean = blob();
  std::mt19937_64 rng(9);
  const cm::TangentVector v = cm::fixtures::random_field(rng, mean, 0.1);
  const cm::PcaModel m = cm::tangent_pca(cm::MetricParams{}, mean, {v, v});
  const cm::GaussianSamples s = cm::sample_gaussian(m, 4, 1);
  ASSERT_EQ(s.batch.curves.size(), 4u);
  for (const auto& c : s.batch.curves) EXPECT_TRUE(c->controls() == mean.controls());
}

// ---------------------------------------------------------------------------
// distance matrices

TEST(DistanceMatrix, SymmetricWithDuplicates) {
  const cm::MetricParams p;
  const std::vector<cm::Curve> cs{blob(), blob(0.15), blob(), blob(0.3, 0.4)};
  const cm::DistanceMatrix D = cm::distance_matrix(p, cs);
  EXPECT_EQ(D.solves, 6u);
  EXPECT_TRUE(D.all_converged());
  EXPECT_TRUE(D.values.isApprox(D.values.transpose(), 0.0));
  EXPECT_TRUE(D.values.diagonal().isZero(0.0));
  EXPECT_LT(D.values(0, 2), 1e-6);
  EXPECT_GT(D.values(0, 1), 1e-3);
  EXPECT_NEAR(D.values(1, 3), cm::distance(cs[1], cs[3], p), 1e-12);
  EXPECT_TRUE(cm::triangle_violations(D.values, 2e-6).empty());
}

TEST(DistanceMatrix, NineteenCurves) {
  const cm::MetricParams p;
  std::mt19937_64 rng(10);
  std::vector<cm::Curve> cs;
  for (int i = 0; i < 19; ++i) cs.push_back(cm::fixtures::random_curve(rng, 12, 4, 0.06));
  cm::DistanceOptions opt;
  opt.bvp.nt = 6;
  const cm::DistanceMatrix D = cm::distance_matrix(p, cs, opt);
  EXPECT_EQ(D.solves, 171u);
  EXPECT_TRUE(D.all_converged());
  EXPECT_EQ(D.values.rows(), 19);
  const auto v = cm::triangle_violations(D.values, 2e-6);
  EXPECT_TRUE(v.empty()) << v.size() << " violations, first excess " << (v.empty() ? 0.0 : v[0].excess);
}

TEST(DistanceMatrix, FailuresAreMarked) {
  const cm::MetricParams p;
  const cm::Curve flat = cm::Curve::from_controls(cm::Controls::Zero(12, 2), 4);
  const cm::DistanceMatrix D = cm::distance_matrix(p, {blob(), flat, blob(0.1)});
  EXPECT_FALSE(D.all_converged());
  EXPECT_EQ(D.status[0][1], cm::EntryStatus::failed);
  EXPECT_EQ(D.status[2][1], cm::EntryStatus::failed);
  EXPECT_EQ(D.status[0][2], cm::EntryStatus::ok);
  EXPECT_TRUE(std::isnan(D.values(0, 1)));
  EXPECT_TRUE(std::isfinite(D.values(0, 2)));
  EXPECT_EQ(D.messages.size(), 2u);
}

TEST(DistanceMatrix, NeedsTwoCurves) {
  EXPECT_THROW(cm::distance_matrix(cm::MetricParams{}, {blob()}), cm::InvalidArgument);
}

TEST(TriangleScan, FindsViolation) {
  Eigen::Matrix3d D;
  D << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  const auto v = cm::triangle_violations(D, 1e-9);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].i, 0u);
  EXPECT_EQ(v[0].j, 1u);
  EXPECT_EQ(v[0].k, 2u);
  EXPECT_DOUBLE_EQ(v[0].excess, 1.0);
}

// ---------------------------------------------------------------------------
// MDS

TEST(ClassicalMds, EquilateralTriangle) {
  const Eigen::MatrixXd D = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  const cm::MdsResult r = cm::classical_mds(D, 2);
  ASSERT_EQ(r.coordinates.cols(), 2);
  const Eigen::MatrixXd E = cm::oracles::euclidean_distances(r.coordinates);
  EXPECT_LT((E - D).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(r.negative_mass, 0.0);
}

TEST(ClassicalMds, CollinearPoints) {
  Eigen::Matrix3d D;
  D << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const cm::MdsResult r = cm::classical_mds(D, 1);
  ASSERT_EQ(r.coordinates.cols(), 1);
  EXPECT_LT((cm::oracles::euclidean_distances(r.coordinates) - Eigen::MatrixXd(D)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ClassicalMds, RandomEuclideanCloud) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int dim = 1; dim <= 4; ++dim) {
    Eigen::MatrixXd pts(12, dim);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng);
    const Eigen::MatrixXd D = cm::oracles::euclidean_distances(pts);
    const cm::MdsResult r = cm::classical_mds(D, static_cast<std::size_t>(dim));
    ASSERT_EQ(r.coordinates.cols(), dim);
    EXPECT_LT((cm::oracles::euclidean_distances(r.coordinates) - D).cwiseAbs().maxCoeff(), 1e-8) << dim;
  }
}

TEST(ClassicalMds, ReducedOutputAndNegativeMass) {
  Eigen::Matrix3d D;
  D << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const cm::MdsResult r = cm::classical_mds(D, 3);
  EXPECT_EQ(r.coordinates.cols(), 1);
  EXPECT_FALSE(r.warnings.empty());

  // the triangle inequality fails, so the matrix is not Euclidean
  Eigen::Matrix3d bad;
  bad << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  const cm::MdsResult s = cm::classical_mds(bad, 2);
  EXPECT_GT(s.negative_mass, 0.0);
  EXPECT_LE(s.coordinates.cols(), 2);
  const double neg = -s.eigenvalues.cwiseMin(0.0).sum();
  EXPECT_NEAR(s.negative_mass, neg / s.eigenvalues.cwiseAbs().sum(), 1e-15);
}

TEST(ClassicalMds, RejectsInvalidMatrices) {
  Eigen::Matrix3d D;
  D << 0, 1, 2, 1, 0, 1, 2, 1.5, 0;
  EXPECT_THROW(cm::classical_mds(D, 2), cm::InvalidArgument);
  D << 0, 1, 2, 1, 0, 1, 2, 1, 0.5;
  EXPECT_THROW(cm::classical_mds(D, 2), cm::InvalidArgument);
  D << 0, -1, 2, -1, 0, 1, 2, 1, 0;
  EXPECT_THROW(cm::classical_mds(D, 2), cm::InvalidArgument);
  EXPECT_THROW(cm::classical_mds(Eigen::MatrixXd::Zero(2, 3), 2), cm::InvalidArgument);
}

// ---------------------------------------------------------------------------
// single linkage

TEST(SingleLinkage, ThreePoints) {
  Eigen::Matrix3d D;
  D << 0, 1, 3, 1, 0, 2, 3, 2, 0;
  const cm::Dendrogram t = cm::single_linkage(D, {"a", "b", "c"});
  ASSERT_EQ(t.merges.size(), 2u);
  EXPECT_EQ(t.merges[0].a, 0u);
  EXPECT_EQ(t.merges[0].b, 1u);
  EXPECT_EQ(t.merges[0].height, 1.0);
  EXPECT_EQ(t.merges[1].a, 2u);
  EXPECT_EQ(t.merges[1].b, 3u);
  EXPECT_EQ(t.merges[1].height, 2.0);
  EXPECT_EQ(t.merges[1].size, 3u);
  EXPECT_EQ(t.newick(), "(c:2,(a:1,b:1):1);");
}

TEST(SingleLinkage, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> size(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd D = cm::oracles::random_distance_matrix(rng, size(rng), trial % 2 == 1);
    const cm::Dendrogram t = cm::single_linkage(D);
    const std::vector<cm::Merge> ref = cm::oracles::brute_force_linkage(D);
    ASSERT_EQ(t.merges.size(), ref.size());
    std::vector<double> heights;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      EXPECT_EQ(t.merges[k].a, ref[k].a) << trial;
      EXPECT_EQ(t.merges[k].b, ref[k].b) << trial;
      EXPECT_EQ(t.merges[k].height, ref[k].height) << trial;
      EXPECT_EQ(t.merges[k].size, ref[k].size) << trial;
      heights.push_back(t.merges[k].height);
    }
    EXPECT_EQ(heights, cm::oracles::mst_weights(D)) << trial;
  }
}

TEST(SingleLinkage, MonotoneHeights) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const cm::Dendrogram t = cm::single_linkage(cm::oracles::random_distance_matrix(rng, 15, false));
    for (std::size_t k = 1; k < t.merges.size(); ++k) {
      EXPECT_LE(t.merges[k - 1].height, t.merges[k].height);
    }
  }
}

TEST(SingleLinkage, UniqueMinimumMergesFirst) {
  std::mt19937_64 rng(14);
  Eigen::MatrixXd D = cm::oracles::random_distance_matrix(rng, 8, false);
  D(5, 2) = D(2, 5) = 0.01;
  const cm::Dendrogram t = cm::single_linkage(D);
  EXPECT_EQ(t.merges[0].a, 2u);
  EXPECT_EQ(t.merges[0].b, 5u);
}

TEST(SingleLinkage, SeparatedClusters) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g(0.0, 0.3);
  Eigen::MatrixXd pts(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const double cx = (i % 3 == 0) ? 10.0 : 0.0;  // members 0, 3, 6, 9 form the far cluster
    pts(i, 0) = cx + g(rng);
    pts(i, 1) = g(rng);
  }
  const cm::Dendrogram t = cm::single_linkage(cm::oracles::euclidean_distances(pts));
  const cm::Merge& top = t.merges.back();
  std::vector<std::size_t> a = t.leaves(top.a), b = t.leaves(top.b);
  if (a.front() != 0) std::swap(a, b);
  EXPECT_EQ(a, (std::vector<std::size_t>{0, 3, 6, 9}));
  EXPECT_EQ(b, (std::vector<std::size_t>{1, 2, 4, 5, 7, 8}));
}

TEST(SingleLinkage, NewickQuotesLabels) {
  Eigen::Matrix2d D;
  D << 0, 0.5, 0.5, 0;
  EXPECT_EQ(cm::single_linkage(D, {"cell 1", "it's"}).newick(), "('cell 1':0.5,'it''s':0.5);");
  EXPECT_THROW(cm::single_linkage(D, {"x"}), cm::InvalidArgument);
}

// ---------------------------------------------------------------------------
// calibration

TEST(Calibration, ClosedForm) {
  const cm::Calibration c = cm::calibrate_from_energies({10.0, 10.0, 10.0}, 3, 1, 6, 100, false);
  EXPECT_EQ(c.params.a0, 3.0);
  EXPECT_EQ(c.params.a1, 1.0);
  EXPECT_EQ(c.params.a2, 6.0);
  EXPECT_EQ(c.scale, 1.0);
}

TEST(Calibration, ScalingExponents) {
  std::mt19937_64 rng(16);
  std::vector<cm::Curve> cs;
  for (int i = 0; i < 4; ++i) cs.push_back(cm::fixtures::random_curve(rng, 12, 4, 0.1));
  const cm::EnergyMeans e1 = cm::average_linear_energies(cs);
  const cm::EnergyMeans e2 = cm::average_linear_energies(cs, 2.0);
  EXPECT_NEAR(e2.l2 / e1.l2, 8.0, 1e-9);
  EXPECT_NEAR(e2.h1 / e1.h1, 2.0, 1e-9);
  EXPECT_NEAR(e2.h2 / e1.h2, 0.5, 1e-9);
}

TEST(Calibration, RescaleEquatesL2AndH2) {
  std::mt19937_64 rng(17);
  std::vector<cm::Curve> cs;
  for (int i = 0; i < 5; ++i) cs.push_back(cm::fixtures::random_curve(rng, 12, 4, 0.1));
  const cm::Calibration c = cm::calibrate_params(cs, 3, 1, 6, 100, true);
  const cm::EnergyMeans e = cm::average_linear_energies(cm::scale_curves(cs, c.scale));
  EXPECT_NEAR(e.l2, e.h2, 0.01 * e.h2);
  // the calibrated weights give the requested split of the mean energy
  EXPECT_NEAR(c.params.a0 * e.l2, 30.0, 1e-6);
  EXPECT_NEAR(c.params.a1 * e.h1, 10.0, 1e-6);
  EXPECT_NEAR(c.params.a2 * e.h2, 60.0, 1e-6);
}

TEST(Calibration, DegenerateDataset) {
  const cm::Curve c = blob();
  EXPECT_THROW(cm::calibrate_params({c, c}, 3, 1, 6, 100), cm::DegenerateDataset);
  EXPECT_THROW(cm::calibrate_params({c}, 3, 1, 6, 100), cm::InvalidArgument);
  EXPECT_THROW(cm::calibrate_from_energies({1, 1, 1}, 0, 0, 0, 100, false), cm::InvalidArgument);
}

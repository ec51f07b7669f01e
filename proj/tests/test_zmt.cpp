#include <gtest/gtest.h>

#include "loopcut/eat_gauge.hpp"
#include "loopcut/zmt.hpp"
#include "test_util.hpp"

using namespace loopcut;
using testutil::random_matrix;

namespace {

// Minimum of N/|E_D|^2 over every eigenmode of the full metric.
double brute_force_full(const Matrix<cplx>& g_full, Eigen::Index d) {
  auto e = eig_hermitian(g_full);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < e.values.size(); ++m) {
    Matrix<cplx> z(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) z(i, j) = e.vectors(i * d + j, m);
    Eigen::ComplexEigenSolver<Matrix<cplx>> es(z);
    const double lead = es.eigenvalues().cwiseAbs().maxCoeff();
    best = std::min(best, std::max(0.0, e.values(m)) / (lead * lead));
  }
  return best;
}

BondEnvironment<cplx> random_full_env(Eigen::Index d, std::mt19937_64& rng) {
  return BondEnvironment<cplx>::from_full(testutil::random_psd<cplx>(d * d, rng), d);
}

Matrix<cplx> exact_zero_mode_metric(const Matrix<cplx>& z, std::mt19937_64& rng) {
  return testutil::metric_with_mode<cplx>(z, 0.0, rng);
}

}  // namespace

TEST(SelectMode, ToyPairDiagonalZeroMode) {
  Matrix<double> ones = Matrix<double>::Ones(2, 2);
  auto env = BondEnvironment<double>::from_full(testutil::product_metric(ones, ones), 2);
  auto c = select_mode(env, Subspace::Diagonal);
  EXPECT_NEAR(c.n_value, 0.0, 1e-14);
  EXPECT_NEAR(c.f_pred, 0.0, 1e-14);
  EXPECT_NEAR(c.z_matrix(0, 0) + c.z_matrix(1, 1), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.z_matrix(0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(c.z_matrix.norm(), 1.0, 1e-14);
}

TEST(SelectMode, NonLoopyEatGaugePicksCornerMode) {
  Vector<double> lam(4);
  lam << 2.0, 1.1, 0.7, 0.3;
  Matrix<cplx> dl = lam.cast<cplx>().asDiagonal();
  auto env = BondEnvironment<cplx>::from_full(testutil::product_metric(dl, dl), 4);
  auto c = select_mode(env, Subspace::Full);
  EXPECT_NEAR(std::abs(c.z_matrix(3, 3)), 1.0, 1e-12);
  EXPECT_NEAR(c.n_value, 0.09, 1e-12);
  EXPECT_NEAR(c.f_pred, 0.09, 1e-12);
}

TEST(SelectMode, PrefersLargerLeadOverLowerN) {
  std::mt19937_64 rng(1);
  const int d = 3;
  Matrix<cplx> z1 = Matrix<cplx>::Zero(d, d);
  z1(0, 1) = 1.0;
  z1(0, 0) = 0.01;
  z1(1, 1) = -0.01;
  z1 /= z1.norm();
  Matrix<cplx> z2 = Matrix<cplx>::Identity(d, d) / std::sqrt(3.0);
  auto v1 = testutil::flat(z1), v2 = testutil::flat(z2);
  Matrix<cplx> q = Matrix<cplx>::Identity(d * d, d * d) - v1 * v1.adjoint() - v2 * v2.adjoint();
  Matrix<cplx> g = q * (testutil::random_psd<cplx>(d * d, rng) / 9.0 + Matrix<cplx>::Identity(d * d, d * d)) * q;
  g += 1e-6 * v1 * v1.adjoint() + 1e-4 * v2 * v2.adjoint();
  auto env = BondEnvironment<cplx>::from_full(hermitian_part(g), d);
  auto c = select_mode(env, Subspace::Full);
  EXPECT_EQ(c.eigen_index, 1);
  EXPECT_NEAR(c.f_pred, 3e-4, 1e-9);
}

TEST(SelectMode, MatchesBruteForceOverAllModes) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    auto env = random_full_env(3, rng);
    auto c = select_mode(env, Subspace::Full, {.k_candidates = 9});
    EXPECT_NEAR(c.f_pred, brute_force_full(env.full(), 3), 1e-10 * c.f_pred);
  }
}

TEST(SelectMode, CandidateInvariants) {
  std::mt19937_64 rng(3);
  auto env = testutil::loopy_env<cplx>(3, 2, 4, rng);
  for (Subspace s : {Subspace::Diagonal, Subspace::Hermitian, Subspace::RealSymmetric, Subspace::Full}) {
    auto c = select_mode(env, s);
    EXPECT_NEAR(c.z_matrix.norm(), 1.0, 1e-12) << subspace_name(s);
    EXPECT_NEAR(c.f_pred, c.n_value / std::norm(c.e_lead), 1e-14 * (1 + c.f_pred));
    EXPECT_NEAR(c.n_value, std::real(coefficient_overlap<cplx>(env, c.z_matrix, c.z_matrix)), 1e-10 * env.norm_target());
    if (s == Subspace::Hermitian) EXPECT_LE((c.z_matrix - c.z_matrix.adjoint()).norm(), 1e-12);
    if (s == Subspace::RealSymmetric) {
      EXPECT_LE(c.z_matrix.imag().norm(), 1e-14);
      EXPECT_LE((c.z_matrix - c.z_matrix.transpose()).norm(), 1e-12);
    }
  }
}

TEST(SelectMode, GaugeCovariance) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    auto env = testutil::loopy_env<cplx>(3, 2, 5, rng);
    Matrix<cplx> w = testutil::random_unitary<cplx>(3, rng);
    auto moved = env.congruence(w, w.conjugate());
    const double f0 = select_mode(env, Subspace::Full).f_pred, f1 = select_mode(moved, Subspace::Full).f_pred;
    EXPECT_NEAR(f1, f0, 1e-10 * f0);
  }
}

TEST(StepLinear, ToyPairCutsToOne) {
  Matrix<double> ones = Matrix<double>::Ones(2, 2);
  auto env = BondEnvironment<double>::from_full(testutil::product_metric(ones, ones), 2);
  auto s = step_linear<double>(diag_metric(env), env);
  ASSERT_EQ(s.dim_after, 1);
  Matrix<double> m = s.left_absorb * s.right_absorb.transpose();
  EXPECT_NEAR(m.trace(), 2.0, 1e-14);
  EXPECT_NEAR(s.f_measured, 0.0, 1e-14);
  EXPECT_NEAR(s.f_pred, 0.0, 1e-14);
}

TEST(StepLinear, GenericPredictionMatchesMeasurement) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    auto env = testutil::loopy_env<cplx>(5, 2, 4, rng);
    auto s = step_linear<cplx>(diag_metric(env), env);
    EXPECT_GT(s.f_pred, 0.0);
    EXPECT_NEAR(s.f_measured, s.f_pred, 1e-10 * env.norm_target());
    EXPECT_EQ(s.left_absorb.cols(), 4);
  }
}

TEST(StepGeneral, ExactZeroModeDropsZeroSingularValue) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix<cplx> z = random_matrix<cplx>(3, 3, rng);
    auto env = BondEnvironment<cplx>::from_full(exact_zero_mode_metric(z, rng), 3);
    auto c = select_mode(env, Subspace::Full);
    Matrix<cplx> m = Matrix<cplx>::Identity(3, 3) - c.z_matrix / c.e_lead;
    auto sv = svd(m);
    EXPECT_LE(sv.s(2), 1e-12 * sv.s(0));
    auto s = step_general(env, Subspace::Full);
    EXPECT_LE(s.f_measured_rel, 1e-12);
    EXPECT_EQ(s.dim_after, 2);
  }
}

TEST(StepGeneral, DiagonalSubspaceEqualsLinearElimination) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    auto env = testutil::loopy_env<cplx>(4, 2, 4, rng);
    auto lin = step_linear<cplx>(diag_metric(env), env);
    auto gen = step_general(env, Subspace::Diagonal);
    Matrix<cplx> m1 = lin.left_absorb * lin.right_absorb.transpose();
    Matrix<cplx> m2 = gen.left_absorb * gen.right_absorb.transpose();
    EXPECT_LE(fidelity_mismatch<cplx>(env, m1, m2), 1e-12);
  }
}

TEST(StepGeneral, NonLoopyEatGaugeMatchesEatTruncation) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix<cplx> gl = testutil::random_psd<cplx>(4, rng), gr = testutil::random_psd<cplx>(4, rng);
    auto env = BondEnvironment<cplx>::from_full(testutil::product_metric(gl, gr), 4);
    auto pair = eat_gauge_fix(env);
    auto gauged = gauge_transformed(env, pair);
    auto s = step_general(gauged, Subspace::Full);
    Matrix<cplx> m_zmt = pair.left_absorb() * s.left_absorb * (pair.right_absorb() * s.right_absorb).transpose();
    auto eat = eat_truncate(env, 3);
    Matrix<cplx> m_eat = eat.left_absorb * eat.right_absorb.transpose();
    EXPECT_LE(fidelity_mismatch<cplx>(env, m_zmt, m_eat), 1e-12);
  }
}

TEST(StepProduct, RecoversPlantedRankOneZeroMode) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix<cplx> r = random_matrix<cplx>(4, 1, rng), l = random_matrix<cplx>(4, 1, rng);
    Matrix<cplx> z = r * l.transpose();
    auto env = BondEnvironment<cplx>::from_full(exact_zero_mode_metric(z, rng), 4);
    auto s = step_product(env);
    EXPECT_LE(s.f_measured_rel, 1e-12);
    EXPECT_LE(s.f_pred_rel, 1e-12);
  }
}

TEST(StepProduct, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    auto env = testutil::loopy_env<cplx>(4, 2, 3, rng);
    auto c = product_mode(env);
    for (std::size_t k = 1; k < c.objective_trace.size(); ++k) EXPECT_LE(c.objective_trace[k], c.objective_trace[k - 1]);
    EXPECT_NEAR(c.f_pred, c.objective_trace.back(), 1e-12 * c.f_pred);
  }
}

TEST(StepProduct, MatchesGeneralWhenOptimalModeIsRankOne) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix<double> u = random_matrix<double>(3, 1, rng);
    u.normalize();
    Matrix<double> z = u * u.transpose();
    auto env = BondEnvironment<double>::from_full(testutil::metric_with_mode<double>(z, 1e-3, rng), 3);
    auto gen = select_mode(env, Subspace::Full);
    auto prod = product_mode(env);
    EXPECT_NEAR(prod.f_pred, gen.f_pred, 1e-10);
  }
}

TEST(RefineW, ExactZeroModeIsFixedPoint) {
  std::mt19937_64 rng(12);
  Matrix<cplx> z = random_matrix<cplx>(3, 3, rng);
  auto env = BondEnvironment<cplx>::from_full(exact_zero_mode_metric(z, rng), 3);
  auto c = select_mode(env, Subspace::Full);
  auto r = refine_w(env, c);
  EXPECT_NEAR(std::abs(r.w_min + 1.0), 0.0, 1e-8);
  EXPECT_NEAR(r.f_min, 0.0, 1e-12 * env.norm_target());
  EXPECT_NEAR(r.f0, 0.0, 1e-12 * env.norm_target());
}

TEST(RefineW, NeverIncreasesError) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    auto env = random_full_env(3, rng);
    for (Subspace s : {Subspace::Diagonal, Subspace::Full}) {
      auto c = select_mode(env, s);
      auto r = refine_w(env, c);
      EXPECT_LE(r.f_min, c.f_pred);
      EXPECT_LT(r.f_min, c.f_pred);
      EXPECT_NEAR(r.f0, c.f_pred, 1e-10 * c.f_pred);
      EXPECT_NEAR(r.a, 1.0 / std::norm(c.e_lead), 1e-12 * r.a);
    }
  }
}

TEST(RefineW, LinearSchemeCoefficients) {
  std::mt19937_64 rng(14);
  auto env = random_full_env(4, rng);
  auto c = select_mode(env, Subspace::Diagonal);
  auto r = refine_w(env, c);
  Matrix<cplx> gd = diag_metric(env);
  EXPECT_NEAR(r.c, gd(c.lead, c.lead).real(), 1e-12 * r.c);
  EXPECT_NEAR(std::abs(r.b - 1.0), 0.0, 1e-8);
}

TEST(ImproveMode, ExactZeroModeUnchanged) {
  std::mt19937_64 rng(15);
  Matrix<cplx> z = random_matrix<cplx>(3, 3, rng);
  auto env = BondEnvironment<cplx>::from_full(exact_zero_mode_metric(z, rng), 3);
  auto c = select_mode(env, Subspace::Full);
  auto im = improve_mode(env, c);
  const cplx phase = (c.z_matrix.adjoint() * im.mode.z_matrix).trace();
  EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
  EXPECT_LE(im.mode.f_pred, 1e-12 * env.norm_target());
}

TEST(ImproveMode, OrthogonalAndNoWorse) {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix<cplx> z = random_matrix<cplx>(3, 3, rng);
    auto env = BondEnvironment<cplx>::from_full(testutil::metric_with_mode<cplx>(z, 1e-4, rng), 3);
    auto c = select_mode(env, Subspace::Full);
    auto im = improve_mode(env, c);
    EXPECT_LE(std::abs((c.z_matrix.adjoint() * im.epsilon).trace()), 1e-12 * (1 + im.epsilon.norm()));
    EXPECT_LT(im.mode.f_pred, c.f_pred);
  }
}

TEST(TruncateTo, ThresholdBoundaries) {
  std::mt19937_64 rng(17);
  auto env = testutil::loopy_env<cplx>(5, 2, 4, rng);
  ZmtOptions all_general{.scheme = ZmtScheme::Switched, .subspace = Subspace::Hermitian, .switch_threshold = 0.0};
  auto g = truncate_to(env, 2, all_general);
  ASSERT_EQ(g.steps.size(), 3u);
  for (const auto& s : g.steps) EXPECT_EQ(s.scheme, "general/hermitian");
  EXPECT_EQ(g.switch_dim, 5);
  ZmtOptions all_linear = all_general;
  all_linear.switch_threshold = std::numeric_limits<double>::infinity();
  auto l = truncate_to(env, 2, all_linear);
  for (const auto& s : l.steps) EXPECT_EQ(s.scheme, "linear");
  EXPECT_EQ(l.switch_dim, -1);
  auto pure = truncate_to(env, 2, ZmtOptions{.scheme = ZmtScheme::Linear});
  EXPECT_NEAR(pure.error.absolute, l.error.absolute, 1e-12 * env.norm_target());
}

TEST(TruncateTo, LinearLazyMetricMatchesStepwise) {
  std::mt19937_64 rng(18);
  auto env = testutil::loopy_env<cplx>(5, 2, 4, rng);
  auto lazy = truncate_to(env, 2, ZmtOptions{.scheme = ZmtScheme::Linear});
  BondEnvironment<cplx> cur = env;
  for (const auto& s : lazy.steps) {
    auto ref = step_linear<cplx>(diag_metric(cur), cur);
    EXPECT_NEAR(ref.f_measured, s.f_measured, 1e-9 * env.norm_target());
    cur = cur.congruence(ref.left_absorb, ref.right_absorb);
  }
  EXPECT_LE((cur.full() - lazy.env.full()).norm(), 1e-9 * cur.full().norm());
}

TEST(TruncateTo, NonLoopyMatchesEat) {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix<cplx> gl = testutil::random_psd<cplx>(5, rng), gr = testutil::random_psd<cplx>(5, rng);
    auto env = BondEnvironment<cplx>::from_full(testutil::product_metric(gl, gr), 5);
    auto z = truncate_to(env, 2, ZmtOptions{.scheme = ZmtScheme::General, .subspace = Subspace::Full, .eat_gauge_init = true});
    auto e = eat_truncate(env, 2);
    EXPECT_NEAR(z.error.absolute, e.error.absolute, 1e-10 * env.norm_target());
    EXPECT_LE(fidelity_mismatch<cplx>(env, z.left_absorb * z.right_absorb.transpose(),
                                      e.left_absorb * e.right_absorb.transpose()),
              1e-12);
  }
}

TEST(TruncateTo, AbsorbsIntoTensors) {
  std::mt19937_64 rng(20);
  const std::size_t d = 4;
  Matrix<double> ma = random_matrix<double>(6, d, rng), mb = random_matrix<double>(d, 6, rng);
  BondTensors<double> bt{RealTensor::from_matrix(ma, {6, d}, {"p", "x"}), "x", RealTensor::from_matrix(mb, {d, 6}, {"y", "q"}), "y"};
  auto env = build_metric(make_double_layer<double>({bt.left, bt.right}, {}, {0, "x"}, {1, "y"}));
  auto t = truncate_to(env, bt, 2, ZmtOptions{.scheme = ZmtScheme::General, .subspace = Subspace::RealSymmetric});
  ASSERT_TRUE(t.tensors.has_value());
  Matrix<double> psi = ma * mb, psi_t = t.tensors->left.matrix({"p"}, {"x"}) * t.tensors->right.matrix({"y"}, {"q"});
  EXPECT_NEAR((psi - psi_t).squaredNorm(), t.error.absolute, 1e-10 * psi.squaredNorm());
}

TEST(RefineW, ClosedFormMatchesScan) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 3 + rep % 2;
    auto env = random_full_env(d, rng);
    for (Subspace s : {Subspace::Diagonal, Subspace::Full}) {
      auto c = select_mode(env, s);
      auto r = refine_w(env, c);
      auto scan = testutil::scan_w_min([&](cplx w) { return measure_error<cplx>(env, coefficient_at_w(c, w)).absolute; });
      EXPECT_NEAR(r.f_min, scan.f, 1e-10);
      EXPECT_NEAR(std::abs(r.w_min - scan.w), 0.0, 1e-10);
      EXPECT_NEAR(measure_error<cplx>(env, coefficient_at_w(c, cplx(-1, 0))).absolute, r.f0, 1e-10);
    }
  }
}

TEST(ImproveMode, ImprovementScalesAsSquare) {
  std::mt19937_64 rng(22);
  Matrix<cplx> z = random_matrix<cplx>(3, 3, rng);
  const auto seed = rng();
  std::vector<double> fs, gains;
  for (int k = 2; k <= 5; ++k) {
    std::mt19937_64 local(seed);
    auto env = BondEnvironment<cplx>::from_full(testutil::metric_with_mode<cplx>(z, std::pow(10.0, -k), local), 3);
    auto c = select_mode(env, Subspace::Full);
    auto im = improve_mode(env, c);
    fs.push_back(c.f_pred);
    gains.push_back(c.f_pred - im.mode.f_pred);
    EXPECT_GT(gains.back(), 0.0);
  }
  EXPECT_NEAR(testutil::loglog_slope(fs, gains), 2.0, 0.2);
}

TEST(SelectMode, SubspaceMonotonicityWithPlantedMode) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix<cplx> z = Matrix<cplx>(random_matrix<double>(3, 1, rng).col(0).asDiagonal()).cast<cplx>();
    auto env = BondEnvironment<cplx>::from_full(testutil::metric_with_mode<cplx>(z, 1e-6, rng), 3);
    const double full = select_mode(env, Subspace::Full).f_pred;
    const double herm = select_mode(env, Subspace::Hermitian).f_pred;
    const double diag = select_mode(env, Subspace::Diagonal).f_pred;
    const double tol = 1e-12 * env.norm_target();
    EXPECT_LE(full, herm + tol);
    EXPECT_LE(herm, diag + tol);
  }
}

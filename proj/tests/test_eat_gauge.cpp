#include <gtest/gtest.h>

#include "loopcut/eat_gauge.hpp"
#include "test_util.hpp"

using namespace loopcut;
using testutil::random_matrix;

namespace {

// psi = sum_i A[:,i] (x) B[:,i]; Schmidt values from the explicit p x q coefficient matrix.
struct ExplicitProduct {
  Matrix<cplx> a, b;
  BondEnvironment<cplx> env;
  Vector<double> schmidt;
};

ExplicitProduct explicit_product(Eigen::Index d, std::mt19937_64& rng) {
  ExplicitProduct e;
  e.a = random_matrix<cplx>(d + 2, d, rng);
  e.b = random_matrix<cplx>(d + 3, d, rng);
  Matrix<cplx> gl = e.a.adjoint() * e.a, gr = e.b.adjoint() * e.b;
  e.env = BondEnvironment<cplx>::from_full(testutil::product_metric(gl, gr), d);
  e.schmidt = svd<cplx>(e.a * e.b.transpose()).s.head(d);
  return e;
}

}  // namespace

TEST(EatGauge, IdentityInsertionAndDiagonalMetrics) {
  std::mt19937_64 rng(1);
  for (int d = 1; d <= 8; ++d) {
    Matrix<cplx> gl = testutil::random_psd<cplx>(d, rng), gr = testutil::random_psd<cplx>(d, rng);
    auto env = BondEnvironment<cplx>::from_full(testutil::product_metric(gl, gr), d);
    auto pair = eat_gauge_fix(env);
    const Matrix<cplx> id = Matrix<cplx>::Identity(d, d);
    EXPECT_LE((pair.left_factor * pair.right_factor - id).norm(), 1e-10 * std::sqrt(double(d)));
    for (int k = 1; k < d; ++k) EXPECT_LE(pair.lambda(k), pair.lambda(k - 1));
    auto split = eat_split(env);
    const double root = std::sqrt(split.lambda1);
    Matrix<cplx> a = pair.left_absorb(), b = pair.right_absorb();
    Matrix<cplx> lam = pair.lambda.cast<cplx>().asDiagonal();
    EXPECT_LE((a.adjoint() * split.g_left * root * a - lam).norm(), 1e-10 * pair.lambda(0));
    EXPECT_LE((b.adjoint() * split.g_right * root * b - lam).norm(), 1e-10 * pair.lambda(0));
  }
}

TEST(EatGauge, NonLoopyTransformedMetricIsLambdaProduct) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    auto e = explicit_product(4, rng);
    auto pair = eat_gauge_fix(e.env);
    Matrix<cplx> lam = pair.lambda.cast<cplx>().asDiagonal();
    Matrix<cplx> expected = testutil::product_metric(lam, lam);
    EXPECT_LE((gauge_transformed(e.env, pair).full() - expected).norm(), 1e-12 * expected.norm());
    // Lambda are the Schmidt values of the explicit state.
    EXPECT_LE((pair.lambda - e.schmidt).norm(), 1e-10 * e.schmidt(0));
  }
}

TEST(EatGauge, AlreadyInGaugeIsIdempotent) {
  Vector<double> lam(3);
  lam << 3.0, 1.5, 0.25;
  Matrix<double> dl = lam.asDiagonal();
  auto env = BondEnvironment<double>::from_full(testutil::product_metric(dl, dl), 3);
  auto pair = eat_gauge_fix(env);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j)
        EXPECT_NEAR(std::abs(pair.left_factor(i, j)), 1.0, 1e-10);
      else
        EXPECT_NEAR(pair.left_factor(i, j), 0.0, 1e-10);
    }
  EXPECT_LE((pair.lambda - lam).norm(), 1e-10);
}

TEST(EatGauge, BondDimensionOne) {
  Matrix<double> g(1, 1);
  g << 4.0;
  auto pair = eat_gauge_fix(BondEnvironment<double>::from_full(g, 1));
  EXPECT_NEAR(pair.left_factor(0, 0) * pair.right_factor(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(pair.lambda(0), 2.0, 1e-12);
}

TEST(EatGauge, ZeroMetricIsAnError) {
  auto env = BondEnvironment<double>::from_full(Matrix<double>::Zero(4, 4), 2);
  EXPECT_THROW(eat_gauge_fix(env), NumericalError);
}

TEST(EatTruncate, NonLoopyMatchesOptimalSchmidtTruncation) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    auto e = explicit_product(5, rng);
    for (int keep = 1; keep < 5; ++keep) {
      auto t = eat_truncate(e.env, keep);
      const double optimum = e.schmidt.tail(5 - keep).squaredNorm();
      EXPECT_NEAR(t.error.absolute, optimum, 1e-10 * e.schmidt.squaredNorm());
      EXPECT_EQ(t.env.dim(), keep);
    }
  }
}

TEST(EatTruncate, FullDimensionIsIdentity) {
  std::mt19937_64 rng(4);
  auto env = testutil::loopy_env<cplx>(3, 2, 4, rng);
  auto t = eat_truncate(env, 3);
  EXPECT_LE(t.error.relative, 1e-12);
  EXPECT_THROW(eat_truncate(env, 0), InvalidArgument);
}

TEST(EatTruncate, AbsorbsIntoBondTensors) {
  std::mt19937_64 rng(5);
  const std::size_t d = 3;
  Matrix<cplx> ma = random_matrix<cplx>(4, d, rng), mb = random_matrix<cplx>(d, 5, rng);
  BondTensors<cplx> bt{ComplexTensor::from_matrix(ma, {4, d}, {"p", "x"}), "x",
                       ComplexTensor::from_matrix(mb, {d, 5}, {"y", "q"}), "y"};
  auto env = build_metric(make_double_layer<cplx>({bt.left, bt.right}, {}, {0, "x"}, {1, "y"}));
  auto t = eat_truncate(env, bt, 2);
  ASSERT_TRUE(t.tensors.has_value());
  EXPECT_EQ(t.tensors->left.dim("x"), 2u);
  EXPECT_EQ(t.tensors->right.dim("y"), 2u);
  // Direct error of the truncated state vs the original, both as p x q matrices.
  Matrix<cplx> psi = ma * mb;
  Matrix<cplx> psi_t = t.tensors->left.matrix({"p"}, {"x"}) * t.tensors->right.matrix({"y"}, {"q"});
  EXPECT_NEAR((psi - psi_t).squaredNorm(), t.error.absolute, 1e-10 * psi.squaredNorm());
}

TEST(LocalTruncate, TreeBondMatchesSchmidtTruncation) {
  std::mt19937_64 rng(6);
  const std::size_t d = 4;
  Matrix<cplx> ma = random_matrix<cplx>(5, d, rng), mb = random_matrix<cplx>(d, 6, rng);
  BondTensors<cplx> bt{ComplexTensor::from_matrix(ma, {5, d}, {"p", "x"}), "x",
                       ComplexTensor::from_matrix(mb, {d, 6}, {"y", "q"}), "y"};
  auto env = build_metric(make_double_layer<cplx>({bt.left, bt.right}, {}, {0, "x"}, {1, "y"}));
  const Matrix<cplx> psi = ma * mb;
  const Vector<double> s = svd<cplx>(psi).s;
  auto t = local_truncate(env, bt, 2);
  EXPECT_NEAR(t.error.absolute, s.tail(s.size() - 2).squaredNorm(), 1e-10 * psi.squaredNorm());
  EXPECT_NEAR(t.error.absolute, eat_truncate(env, 2).error.absolute, 1e-10 * psi.squaredNorm());
  Matrix<cplx> psi_t = t.tensors.left.matrix({"p"}, {"x"}) * t.tensors.right.matrix({"y"}, {"q"});
  EXPECT_NEAR((psi - psi_t).squaredNorm(), t.error.absolute, 1e-10 * psi.squaredNorm());
}

TEST(LocalTruncate, FullDimensionIsExact) {
  std::mt19937_64 rng(7);
  Matrix<double> ma = random_matrix<double>(4, 3, rng), mb = random_matrix<double>(3, 4, rng);
  BondTensors<double> bt{RealTensor::from_matrix(ma, {4, 3}, {"p", "x"}), "x",
                         RealTensor::from_matrix(mb, {3, 4}, {"y", "q"}), "y"};
  auto env = build_metric(make_double_layer<double>({bt.left, bt.right}, {}, {0, "x"}, {1, "y"}));
  EXPECT_LE(local_truncate(env, bt, 3).error.relative, 1e-12);
  EXPECT_THROW(local_truncate(env, bt, 4), InvalidArgument);
}

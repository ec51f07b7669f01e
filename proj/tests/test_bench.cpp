#include <gtest/gtest.h>

#include "loopcut/bench.hpp"

using namespace loopcut;

namespace {

BenchOptions virtual_loop(Eigen::Index d_bond, Eigen::Index d_loop) {
  BenchOptions o;
  o.fixture.kind = FixtureKind::VirtualLoop;
  o.fixture.d_bond = d_bond;
  o.fixture.d_loop = d_loop;
  o.fixture.seed = 3;
  return o;
}

}  // namespace

TEST(Bench, SchemeNamesRoundTrip) {
  for (auto s : {BenchScheme::Tebd, BenchScheme::Eat, BenchScheme::Zmt1, BenchScheme::Zmt2, BenchScheme::Zmt3,
                 BenchScheme::Zmt4})
    EXPECT_EQ(parse_bench_scheme(bench_scheme_name(s)), s);
  EXPECT_FALSE(parse_bench_scheme("svd").has_value());
}

TEST(Bench, VirtualLoopSeparatesLoopAwareSchemes) {
  const auto o = virtual_loop(2, 2);
  for (auto s : {BenchScheme::Zmt1, BenchScheme::Zmt2, BenchScheme::Zmt3}) {
    const auto r = bench_truncate(o, s);
    EXPECT_EQ(r.bond_dim, 4);
    EXPECT_EQ(r.target_dim, 2);
    EXPECT_LE(r.error.relative, 1e-12) << bench_scheme_name(s);
  }
  EXPECT_GT(bench_truncate(o, BenchScheme::Eat).error.relative, 1e-3);
  EXPECT_GT(bench_truncate(o, BenchScheme::Tebd).error.relative, 1e-3);
}

TEST(Bench, ToyPairReachesDimensionOne) {
  BenchOptions o;
  o.fixture.kind = FixtureKind::ToyPair;
  const auto r = bench_truncate(o, BenchScheme::Zmt1);
  EXPECT_EQ(r.target_dim, 1);
  EXPECT_LE(r.error.relative, 1e-14);
}

TEST(Bench, EatIsOptimalOnProductEnv) {
  BenchOptions o;
  o.fixture.kind = FixtureKind::ProductEnv;
  o.fixture.d_bond = 4;
  const auto eat = bench_truncate(o, BenchScheme::Eat);
  EXPECT_LE(eat.loopiness, 1e-12);
  for (auto s : {BenchScheme::Zmt1, BenchScheme::Zmt2, BenchScheme::Zmt3, BenchScheme::Zmt4})
    EXPECT_GE(bench_truncate(o, s).error.relative, eat.error.relative * (1 - 1e-8)) << bench_scheme_name(s);
  EXPECT_THROW(bench_truncate(o, BenchScheme::Tebd), InvalidArgument);
}

TEST(Bench, RejectsBadTarget) {
  auto o = virtual_loop(2, 2);
  o.target_dim = 5;
  EXPECT_THROW(bench_truncate(o, BenchScheme::Eat), InvalidArgument);
}

TEST(Bench, Deterministic) {
  BenchOptions o;
  o.fixture.kind = FixtureKind::LoopyEnv;
  o.fixture.d_bond = 3;
  o.fixture.seed = 11;
  const auto a = bench_truncate(o, BenchScheme::Zmt2), b = bench_truncate(o, BenchScheme::Zmt2);
  EXPECT_EQ(a.error.relative, b.error.relative);
  EXPECT_EQ(a.loopiness, b.loopiness);
}

TEST(Bench, DescribeVirtualLoop) {
  const auto info = describe_fixture(virtual_loop(2, 3).fixture);
  EXPECT_EQ(info.bond_dim, 6);
  EXPECT_EQ(info.default_target_dim, 2);
  EXPECT_NEAR(info.loopiness, info.expected_loopiness, 1e-10);
  EXPECT_GT(info.norm, 0);
}

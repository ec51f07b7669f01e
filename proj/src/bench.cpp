#include "loopcut/bench.hpp"

#include <chrono>
#include <type_traits>

#include "loopcut/eat_gauge.hpp"
#include "loopcut/zmt.hpp"

namespace loopcut {

namespace {

constexpr BenchScheme kAll[] = {BenchScheme::Tebd, BenchScheme::Eat,  BenchScheme::Zmt1,
                                BenchScheme::Zmt2, BenchScheme::Zmt3, BenchScheme::Zmt4};

template <typename T>
void run_scheme(const BondEnvironment<T>& env, const BondTensors<T>* tensors, const BenchOptions& opts, BenchScheme scheme,
                BenchResult& out) {
  out.bond_dim = env.dim();
  out.loopiness = loopiness(env);
  LOOPCUT_REQUIRE(out.target_dim >= 1 && out.target_dim <= env.dim(), "target dimension out of range");
  switch (scheme) {
    case BenchScheme::Tebd:
      if (!tensors) throw InvalidArgument("tebd needs bond tensors; fixture '" + std::string(fixture_name(opts.fixture.kind)) + "' has none");
      out.error = local_truncate(env, *tensors, out.target_dim).error;
      return;
    case BenchScheme::Eat:
      out.error = eat_truncate(env, out.target_dim).error;
      return;
    default:
      break;
  }
  ZmtOptions z;
  z.real_lead = !std::is_same_v<T, cplx>;
  z.switch_threshold = opts.delta;
  if (scheme == BenchScheme::Zmt1) {
    z.scheme = ZmtScheme::Linear;
  } else if (scheme == BenchScheme::Zmt4) {
    z.scheme = ZmtScheme::Product;
  } else {
    z.scheme = ZmtScheme::Switched;
    z.subspace = scheme == BenchScheme::Zmt2 ? Subspace::RealSymmetric : Subspace::Full;
  }
  const auto t = truncate_to(env, out.target_dim, z);
  out.error = t.error;
  out.switch_dim = t.switch_dim;
}

// f(env, tensors or nullptr, default target, expected loopiness or -1)
template <typename F>
void with_fixture(const FixtureSpec& f, F&& fn) {
  switch (f.kind) {
    case FixtureKind::VirtualLoop: {
      const auto net = virtual_loop_network(f.d_bond, f.d_loop, f.seed);
      fn(net.env, &net.tensors, net.exact_dim, net.expected_loopiness);
      return;
    }
    case FixtureKind::ToyPair: {
      const auto toy = toy_pair();
      fn(toy.env, &toy.tensors, Eigen::Index(1), -1.0);
      return;
    }
    case FixtureKind::ProductEnv:
    case FixtureKind::LoopyEnv: {
      LOOPCUT_REQUIRE(f.d_bond >= 2, "bond dimension must be at least 2");
      const auto kind = f.kind == FixtureKind::ProductEnv ? EnvKind::Product : EnvKind::Loopy;
      const auto env = random_env<cplx>(f.d_bond, kind, f.loop_target, f.seed);
      fn(env, static_cast<const BondTensors<cplx>*>(nullptr), f.d_bond - 1, -1.0);
      return;
    }
  }
}

}  // namespace

const char* bench_scheme_name(BenchScheme s) {
  switch (s) {
    case BenchScheme::Tebd: return "tebd";
    case BenchScheme::Eat: return "eat";
    case BenchScheme::Zmt1: return "zmt1";
    case BenchScheme::Zmt2: return "zmt2";
    case BenchScheme::Zmt3: return "zmt3";
    case BenchScheme::Zmt4: return "zmt4";
  }
  return "?";
}

std::optional<BenchScheme> parse_bench_scheme(const std::string& name) {
  for (auto s : kAll)
    if (name == bench_scheme_name(s)) return s;
  return std::nullopt;
}

BenchResult bench_truncate(const BenchOptions& opts, BenchScheme scheme) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchResult out;
  out.scheme = scheme;
  with_fixture(opts.fixture, [&](const auto& env, const auto* tensors, Eigen::Index exact, double) {
    out.target_dim = opts.target_dim == 0 ? exact : opts.target_dim;
    run_scheme(env, tensors, opts, scheme, out);
  });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

FixtureInfo describe_fixture(const FixtureSpec& spec) {
  FixtureInfo info;
  with_fixture(spec, [&](const auto& env, const auto*, Eigen::Index exact, double expected) {
    info.bond_dim = env.dim();
    info.default_target_dim = exact;
    info.loopiness = loopiness(env);
    info.expected_loopiness = expected;
    info.norm = env.norm_target();
  });
  return info;
}

}  // namespace loopcut

#include "loopcut/loopcut.h"

#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "loopcut/bench.hpp"
#include "loopcut/ising.hpp"
#include "loopcut/trg.hpp"
#include "loopcut/version.hpp"

using namespace loopcut;

namespace {

thread_local std::string g_last_error;

lc_status fail(lc_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
lc_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return LC_OK;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::InvalidArgument: return fail(LC_ERR_INVALID_ARGUMENT, e.what());
      case ErrorKind::Numerical: return fail(LC_ERR_NUMERICAL, e.what());
      case ErrorKind::Io: return fail(LC_ERR_IO, e.what());
    }
    return fail(LC_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LC_ERR_INTERNAL, "unknown error");
  }
}

TrgScheme to_trg(lc_scheme s) {
  switch (s) {
    case LC_SCHEME_TEBD: return TrgScheme::Tebd;
    case LC_SCHEME_EAT: return TrgScheme::Eat;
    case LC_SCHEME_ZMT1: return TrgScheme::Zmt1;
    case LC_SCHEME_ZMT2: return TrgScheme::Zmt2;
    case LC_SCHEME_ZMT3: return TrgScheme::Zmt3;
    default: break;
  }
  throw InvalidArgument(std::string("scheme '") + lc_scheme_name(s) + "' is not available in TRG");
}

lc_scheme from_trg(TrgScheme s) { return static_cast<lc_scheme>(static_cast<int>(s)); }

BenchScheme to_bench(lc_scheme s) {
  LOOPCUT_REQUIRE(s >= LC_SCHEME_TEBD && s <= LC_SCHEME_ZMT4, "unknown scheme");
  return static_cast<BenchScheme>(static_cast<int>(s));
}

FixtureSpec to_spec(const lc_fixture_options& o) {
  FixtureSpec f;
  LOOPCUT_REQUIRE(o.kind >= LC_FIXTURE_VIRTUAL_LOOP && o.kind <= LC_FIXTURE_LOOPY_ENV, "unknown fixture kind");
  LOOPCUT_REQUIRE(o.d_bond >= 1 && o.d_loop >= 1, "fixture dimensions must be positive");
  f.kind = static_cast<FixtureKind>(static_cast<int>(o.kind));
  f.d_bond = o.d_bond;
  f.d_loop = o.d_loop;
  f.loop_target = o.loop_target;
  f.seed = o.seed;
  return f;
}

}  // namespace

struct lc_trg {
  TrgOptions opts;
  TrgState state;
  std::vector<SchemeCost> compared;
};

extern "C" {

const char* lc_version(void) { return kVersion; }

const char* lc_status_name(lc_status status) {
  switch (status) {
    case LC_OK: return "ok";
    case LC_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case LC_ERR_NUMERICAL: return "NumericalError";
    case LC_ERR_IO: return "IoError";
    case LC_ERR_INTERNAL: return "InternalError";
  }
  return "unknown";
}

const char* lc_last_error(void) { return g_last_error.c_str(); }

const char* lc_scheme_name(lc_scheme scheme) {
  if (scheme < LC_SCHEME_TEBD || scheme > LC_SCHEME_ZMT4) return "unknown";
  return bench_scheme_name(static_cast<BenchScheme>(static_cast<int>(scheme)));
}

lc_status lc_scheme_parse(const char* name, lc_scheme* out) {
  if (!name || !out) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  const auto s = parse_bench_scheme(name);
  if (!s) return fail(LC_ERR_INVALID_ARGUMENT, std::string("unknown scheme '") + name + "'");
  *out = static_cast<lc_scheme>(static_cast<int>(*s));
  g_last_error.clear();
  return LC_OK;
}

const char* lc_fixture_name(lc_fixture kind) {
  if (kind < LC_FIXTURE_VIRTUAL_LOOP || kind > LC_FIXTURE_LOOPY_ENV) return "unknown";
  return fixture_name(static_cast<FixtureKind>(static_cast<int>(kind)));
}

lc_status lc_fixture_parse(const char* name, lc_fixture* out) {
  if (!name || !out) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  const auto k = parse_fixture(name);
  if (!k) return fail(LC_ERR_INVALID_ARGUMENT, std::string("unknown fixture '") + name + "'");
  *out = static_cast<lc_fixture>(static_cast<int>(*k));
  g_last_error.clear();
  return LC_OK;
}

void lc_trg_options_init(lc_trg_options* o) {
  if (!o) return;
  const TrgOptions d;
  o->beta = d.beta;
  o->chi = d.chi;
  o->iterations = d.iterations;
  o->scheme = from_trg(d.scheme);
  o->delta = d.delta;
  o->seed = d.seed;
  o->run_als = d.run_als;
  o->als_max_sweeps = d.als.max_sweeps;
  o->als_tol = d.als.tol;
  o->als_rcond = d.als.rcond;
  o->vidal_drop = d.vidal.drop;
  o->eat_gauge_init = d.eat_gauge_init;
  o->general_dim_cap = d.general_dim_cap;
  o->measure_loopiness = d.measure_loopiness;
}

lc_status lc_trg_create(const lc_trg_options* o, lc_trg** out) {
  if (!o || !out) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    LOOPCUT_REQUIRE(std::isfinite(o->beta) && o->beta > 0, "beta must be positive");
    LOOPCUT_REQUIRE(o->chi >= 2, "chi must be at least 2");
    LOOPCUT_REQUIRE(o->iterations >= 1, "at least one TRG iteration is required");
    LOOPCUT_REQUIRE(o->delta >= 0, "delta must be non-negative");
    LOOPCUT_REQUIRE(o->als_max_sweeps >= 0, "ALS sweeps must be non-negative");
    LOOPCUT_REQUIRE(o->als_tol >= 0 && o->als_rcond >= 0 && o->vidal_drop >= 0, "tolerances must be non-negative");
    LOOPCUT_REQUIRE(o->general_dim_cap >= 0, "general_dim_cap must be non-negative");
    auto run = std::make_unique<lc_trg>();
    TrgOptions& t = run->opts;
    t.beta = o->beta;
    t.chi = o->chi;
    t.iterations = o->iterations;
    t.scheme = to_trg(o->scheme);
    t.delta = o->delta;
    t.seed = o->seed;
    t.run_als = o->run_als != 0;
    t.als.max_sweeps = o->als_max_sweeps;
    t.als.tol = o->als_tol;
    t.als.rcond = o->als_rcond;
    t.vidal.drop = o->vidal_drop;
    t.eat_gauge_init = o->eat_gauge_init != 0;
    t.general_dim_cap = o->general_dim_cap;
    t.measure_loopiness = o->measure_loopiness != 0;
    run->state = trg_init(t.beta);
    *out = run.release();
  });
}

void lc_trg_destroy(lc_trg* run) { delete run; }

lc_status lc_trg_set_compare(lc_trg* run, const lc_scheme* schemes, size_t count) {
  if (!run || (count > 0 && !schemes)) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::vector<TrgScheme> list;
    for (size_t k = 0; k < count; ++k) list.push_back(to_trg(schemes[k]));
    run->opts.compare = std::move(list);
  });
}

lc_status lc_trg_step(lc_trg* run, lc_trg_iteration* out) {
  if (!run || !out) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    TrgIterationReport r = trg_step(run->state, run->opts);
    const double log_z = log_z_estimate(run->state);
    lc_trg_iteration it{};
    it.iteration = r.iteration;
    it.ring_dim = r.ring_dim;
    it.split_dim = r.split_dim;
    it.gauge_residual = r.gauge_residual;
    it.loopiness = r.loopiness;
    it.f_initial_rel = r.f_initial_rel;
    it.f_final_rel = r.f_final_rel;
    it.als_sweeps = r.als_sweeps;
    it.als_max_rise = r.als_max_rise;
    for (std::size_t k = 0; k < 4; ++k) it.switch_dims[k] = k < r.switch_dims.size() ? r.switch_dims[k] : -1;
    it.log_z_per_spin = 0.5 * log_z;
    it.free_energy = -it.log_z_per_spin / run->opts.beta;
    it.onsager = onsager_free_energy(run->opts.beta);
    it.relative_error = std::abs(it.free_energy - it.onsager) / std::abs(it.onsager);
    it.wall_time_ms = 1e3 * std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run->compared = std::move(r.compared);
    *out = it;
  });
}

int32_t lc_trg_iterations_done(const lc_trg* run) { return run ? run->state.iteration : 0; }

size_t lc_trg_compared_count(const lc_trg* run) { return run ? run->compared.size() : 0; }

lc_status lc_trg_compared(const lc_trg* run, size_t index, lc_scheme* scheme, double* f_initial_rel) {
  if (!run || !scheme || !f_initial_rel) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= run->compared.size()) return fail(LC_ERR_INVALID_ARGUMENT, "comparison index out of range");
  *scheme = from_trg(run->compared[index].scheme);
  *f_initial_rel = run->compared[index].f_initial_rel;
  g_last_error.clear();
  return LC_OK;
}

void lc_fixture_options_init(lc_fixture_options* o) {
  if (!o) return;
  const BenchOptions d;
  o->kind = static_cast<lc_fixture>(static_cast<int>(d.fixture.kind));
  o->d_bond = d.fixture.d_bond;
  o->d_loop = d.fixture.d_loop;
  o->loop_target = d.fixture.loop_target;
  o->seed = d.fixture.seed;
  o->target_dim = d.target_dim;
  o->delta = d.delta;
}

lc_status lc_fixture_describe(const lc_fixture_options* o, lc_fixture_info* out) {
  if (!o || !out) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const FixtureInfo info = describe_fixture(to_spec(*o));
    out->bond_dim = info.bond_dim;
    out->default_target_dim = info.default_target_dim;
    out->loopiness = info.loopiness;
    out->expected_loopiness = info.expected_loopiness;
    out->norm = info.norm;
  });
}

lc_status lc_bench_run(const lc_fixture_options* o, lc_scheme scheme, lc_bench_result* out) {
  if (!o || !out) return fail(LC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    BenchOptions b;
    b.fixture = to_spec(*o);
    LOOPCUT_REQUIRE(o->target_dim >= 0, "target dimension must be non-negative");
    LOOPCUT_REQUIRE(o->delta >= 0, "delta must be non-negative");
    b.target_dim = o->target_dim;
    b.delta = o->delta;
    const BenchResult r = bench_truncate(b, to_bench(scheme));
    out->scheme = scheme;
    out->bond_dim = r.bond_dim;
    out->target_dim = r.target_dim;
    out->loopiness = r.loopiness;
    out->f_initial_abs = r.error.absolute;
    out->f_initial_rel = r.error.relative;
    out->switch_dim = r.switch_dim;
    out->wall_time_ms = 1e3 * r.seconds;
  });
}

}  // extern "C"

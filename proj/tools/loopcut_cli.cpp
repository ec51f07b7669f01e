#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "loopcut/loopcut.h"

using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Flat key = value files: unscoped keys belong to the selected subcommand.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigINI::from_config(in);
    const auto subs = app_->get_subcommands();
    if (!subs.empty())
      for (auto& it : items)
        if (it.parents.empty() && it.name != "--") it.parents = {subs.front()->get_name()};
    return items;
  }

 private:
  const CLI::App* app_;
};

struct Failure {
  lc_status status;
  std::string message;
};

int exit_code(lc_status s) {
  switch (s) {
    case LC_OK: return kExitOk;
    case LC_ERR_INVALID_ARGUMENT:
    case LC_ERR_IO: return kExitConfig;
    case LC_ERR_NUMERICAL: return kExitNumerical;
    case LC_ERR_INTERNAL: return 1;
  }
  return 1;
}

void check(lc_status s) {
  if (s != LC_OK) throw Failure{s, lc_last_error()};
}

[[noreturn]] void config_error(const std::string& msg) { throw Failure{LC_ERR_INVALID_ARGUMENT, msg}; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

lc_scheme parse_scheme(const std::string& name) {
  lc_scheme s;
  check(lc_scheme_parse(name.c_str(), &s));
  return s;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Report table: fixed leading columns, then command-specific extras.
const std::vector<std::string> kFixedColumns = {"iteration", "bond",  "scheme", "f_initial_rel", "f_final_rel",
                                                "loopiness", "chi",   "beta",   "delta",         "wall_time_ms"};

struct Report {
  std::vector<std::string> columns = kFixedColumns;
  std::vector<ordered_json> rows;
  ordered_json config;
  ordered_json summary;

  void add_column(const std::string& c) { columns.push_back(c); }
};

std::string csv_cell(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string render(const Report& r, const std::string& format) {
  if (format == "json") {
    ordered_json out;
    out["version"] = lc_version();
    out["config"] = r.config;
    out["columns"] = r.columns;
    out["rows"] = r.rows;
    if (!r.summary.is_null()) out["summary"] = r.summary;
    return out.dump(2) + "\n";
  }
  std::string s;
  for (std::size_t k = 0; k < r.columns.size(); ++k) s += (k ? "," : "") + r.columns[k];
  s += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t k = 0; k < r.columns.size(); ++k) {
      if (k) s += ",";
      if (row.contains(r.columns[k])) s += csv_cell(row[r.columns[k]]);
    }
    s += "\n";
  }
  return s;
}

struct Output {
  std::string path;  // empty: stdout
  std::string format;
};

std::string infer_format(const std::string& path, const std::string& requested) {
  if (!requested.empty()) return requested;
  if (std::filesystem::path(path).extension() == ".csv") return "csv";
  return "json";
}

// Opens early so an unwritable path fails before any computation.
std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Failure{LC_ERR_IO, "cannot open output '" + path + "' for writing"};
  return f;
}

void emit(const Report& r, const Output& out, std::ofstream* file) {
  const std::string text = render(r, out.format);
  if (!file) {
    std::cout << text;
    return;
  }
  *file << text;
  file->flush();
  if (!*file) throw Failure{LC_ERR_IO, "failed writing '" + out.path + "'"};
}

std::string path_for(const std::string& path, const std::string& tag, bool many) {
  if (!many || path.empty()) return path;
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "." + tag + p.extension().string())).string();
}

unsigned thread_cap() {
  if (const char* env = std::getenv("LOOPCUT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) config_error("LOOPCUT_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return 1;
}

// ---- trg ----

struct TrgArgs {
  lc_trg_options opts{};
  std::string schemes = "tebd";
  std::string compare;
  std::string out;
  std::string format;
  bool quiet = false;
};

Report run_trg(const TrgArgs& a, lc_scheme scheme, std::mutex& log_mu) {
  lc_trg_options o = a.opts;
  o.scheme = scheme;
  std::vector<lc_scheme> compare;
  for (const auto& name : split_list(a.compare)) compare.push_back(parse_scheme(name));

  lc_trg* raw = nullptr;
  check(lc_trg_create(&o, &raw));
  std::unique_ptr<lc_trg, void (*)(lc_trg*)> run(raw, lc_trg_destroy);
  if (!compare.empty()) check(lc_trg_set_compare(run.get(), compare.data(), compare.size()));

  Report r;
  for (const char* c : {"seed", "version", "log_z_per_spin", "free_energy", "onsager", "relative_error", "gauge_residual",
                        "split_dim", "als_sweeps", "switch_dims"})
    r.add_column(c);
  r.config = {{"command", "trg"},
              {"beta", o.beta},
              {"chi", o.chi},
              {"iters", o.iterations},
              {"scheme", lc_scheme_name(scheme)},
              {"compare", a.compare},
              {"delta", o.delta},
              {"seed", o.seed},
              {"als", o.run_als != 0},
              {"als_sweeps", o.als_max_sweeps},
              {"als_tol", o.als_tol},
              {"als_rcond", o.als_rcond},
              {"vidal_drop", o.vidal_drop},
              {"eat_gauge_init", o.eat_gauge_init != 0},
              {"general_dim_cap", o.general_dim_cap}};

  const std::string version = lc_version();
  lc_trg_iteration last{};
  for (int k = 0; k < o.iterations; ++k) {
    lc_trg_iteration it{};
    check(lc_trg_step(run.get(), &it));
    last = it;
    std::string dims;
    for (int b = 0; b < 4; ++b) dims += (b ? ";" : "") + std::to_string(it.switch_dims[b]);
    ordered_json row = {{"iteration", it.iteration},
                        {"bond", "all"},
                        {"scheme", lc_scheme_name(scheme)},
                        {"f_initial_rel", it.f_initial_rel},
                        {"f_final_rel", it.f_final_rel},
                        {"loopiness", it.loopiness},
                        {"chi", o.chi},
                        {"beta", o.beta},
                        {"delta", o.delta},
                        {"wall_time_ms", it.wall_time_ms},
                        {"seed", o.seed},
                        {"version", version},
                        {"log_z_per_spin", it.log_z_per_spin},
                        {"free_energy", it.free_energy},
                        {"onsager", it.onsager},
                        {"relative_error", it.relative_error},
                        {"gauge_residual", it.gauge_residual},
                        {"split_dim", it.split_dim},
                        {"als_sweeps", it.als_sweeps},
                        {"switch_dims", dims}};
    r.rows.push_back(row);
    for (std::size_t c = 0; c < lc_trg_compared_count(run.get()); ++c) {
      lc_scheme s;
      double f;
      check(lc_trg_compared(run.get(), c, &s, &f));
      ordered_json cmp = row;
      cmp["scheme"] = lc_scheme_name(s);
      cmp["f_initial_rel"] = f;
      for (const char* drop : {"f_final_rel", "log_z_per_spin", "free_energy", "relative_error", "als_sweeps", "switch_dims"})
        cmp.erase(drop);
      r.rows.push_back(cmp);
    }
    if (!a.quiet) {
      std::lock_guard<std::mutex> lock(log_mu);
      std::fprintf(stderr, "[%s] iter %2d  f_init %.3e  f_final %.3e  l %.3f  rel.err %.3e  %.1fs\n", lc_scheme_name(scheme),
                   it.iteration, it.f_initial_rel, it.f_final_rel, it.loopiness, it.relative_error, it.wall_time_ms / 1e3);
    }
  }
  r.summary = {{"iterations", last.iteration},
               {"log_z_per_spin", last.log_z_per_spin},
               {"free_energy", last.free_energy},
               {"onsager", last.onsager},
               {"relative_error", last.relative_error}};
  return r;
}

int cmd_trg(const TrgArgs& a) {
  std::vector<lc_scheme> schemes;
  for (const auto& name : split_list(a.schemes)) schemes.push_back(parse_scheme(name));
  if (schemes.empty()) config_error("no scheme given");
  const bool many = schemes.size() > 1;
  if (many && a.out.empty()) config_error("several schemes need --out; each run writes its own file");
  const std::string format = infer_format(a.out, a.format);

  std::vector<std::optional<std::ofstream>> files(schemes.size());
  std::vector<Output> outs(schemes.size());
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    outs[k] = {path_for(a.out, lc_scheme_name(schemes[k]), many), format};
    if (!outs[k].path.empty()) files[k] = open_output(outs[k].path);
  }

  std::mutex log_mu;
  std::vector<std::optional<Failure>> failures(schemes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < schemes.size();) {
      try {
        const Report r = run_trg(a, schemes[k], log_mu);
        emit(r, outs[k], files[k] ? &*files[k] : nullptr);
      } catch (const Failure& f) {
        failures[k] = f;
      }
    }
  };
  const unsigned n = std::min<unsigned>(thread_cap(), schemes.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f) throw *f;
  return kExitOk;
}

// ---- bench / fixture ----

struct FixtureArgs {
  lc_fixture_options opts{};
  std::string kind = "virtual-loop";
  std::string schemes = "tebd,eat,zmt1,zmt2,zmt3";
  std::string out;
  std::string format;
};

lc_fixture_options resolve_fixture(const FixtureArgs& a) {
  lc_fixture_options o = a.opts;
  check(lc_fixture_parse(a.kind.c_str(), &o.kind));
  return o;
}

int cmd_bench(const FixtureArgs& a) {
  const lc_fixture_options o = resolve_fixture(a);
  std::vector<lc_scheme> schemes;
  for (const auto& name : split_list(a.schemes)) schemes.push_back(parse_scheme(name));
  if (schemes.empty()) config_error("no scheme given");
  const Output out{a.out, infer_format(a.out, a.format)};
  std::optional<std::ofstream> file;
  if (!out.path.empty()) file = open_output(out.path);

  Report r;
  for (const char* c : {"seed", "version", "fixture", "bond_dim", "f_initial_abs", "switch_dim"}) r.add_column(c);
  r.config = {{"command", "bench"},     {"fixture", a.kind},       {"D", o.d_bond},
              {"d", o.d_loop},          {"loop_target", o.loop_target}, {"target_dim", o.target_dim},
              {"schemes", a.schemes},   {"delta", o.delta},        {"seed", o.seed}};
  const std::string version = lc_version();
  for (lc_scheme s : schemes) {
    lc_bench_result b{};
    check(lc_bench_run(&o, s, &b));
    r.rows.push_back({{"iteration", 0},
                      {"bond", 0},
                      {"scheme", lc_scheme_name(s)},
                      {"f_initial_rel", b.f_initial_rel},
                      {"f_final_rel", nullptr},
                      {"loopiness", b.loopiness},
                      {"chi", b.target_dim},
                      {"beta", nullptr},
                      {"delta", o.delta},
                      {"wall_time_ms", b.wall_time_ms},
                      {"seed", o.seed},
                      {"version", version},
                      {"fixture", a.kind},
                      {"bond_dim", b.bond_dim},
                      {"f_initial_abs", b.f_initial_abs},
                      {"switch_dim", b.switch_dim}});
  }
  emit(r, out, file ? &*file : nullptr);
  return kExitOk;
}

int cmd_fixture(const FixtureArgs& a) {
  const lc_fixture_options o = resolve_fixture(a);
  std::optional<std::ofstream> file;
  if (!a.out.empty()) file = open_output(a.out);
  lc_fixture_info info{};
  check(lc_fixture_describe(&o, &info));
  ordered_json j = {{"version", lc_version()},
                    {"config", {{"command", "fixture"}, {"kind", a.kind}, {"D", o.d_bond}, {"d", o.d_loop},
                                {"loop_target", o.loop_target}, {"seed", o.seed}}},
                    {"bond_dim", info.bond_dim},
                    {"default_target_dim", info.default_target_dim},
                    {"loopiness", info.loopiness},
                    {"expected_loopiness", info.expected_loopiness < 0 ? ordered_json() : ordered_json(info.expected_loopiness)},
                    {"norm", info.norm}};
  const std::string text = j.dump(2) + "\n";
  if (!file) {
    std::cout << text;
  } else {
    *file << text;
    if (!*file) throw Failure{LC_ERR_IO, "failed writing '" + a.out + "'"};
  }
  return kExitOk;
}

void add_fixture_options(CLI::App* sub, FixtureArgs& a) {
  sub->add_option("--D", a.opts.d_bond, "bond dimension")->check(CLI::PositiveNumber);
  sub->add_option("--d", a.opts.d_loop, "loop line dimension (virtual-loop)")->check(CLI::PositiveNumber);
  sub->add_option("--loop-target", a.opts.loop_target, "target loopiness (loopy-env)")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", a.opts.seed, "random seed");
  sub->add_option("--out", a.out, "report path; stdout when omitted");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bond truncation experiments on loopy tensor networks"};
  app.set_version_flag("--version", std::string(lc_version()));
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.set_config("--config", "", "flat key = value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  TrgArgs trg;
  lc_trg_options_init(&trg.opts);
  auto* t = app.add_subcommand("trg", "coarse-grain the 2D Ising model and compare with the exact free energy");
  t->fallthrough();
  t->add_option("--beta", trg.opts.beta, "inverse temperature")->check(CLI::PositiveNumber);
  t->add_option("--chi", trg.opts.chi, "bond dimension")->check(CLI::Range(int64_t{2}, int64_t{1} << 20));
  t->add_option("--iters", trg.opts.iterations, "TRG iterations")->check(CLI::PositiveNumber);
  t->add_option("--scheme", trg.schemes, "tebd|eat|zmt1|zmt2|zmt3, comma list runs one file per scheme");
  t->add_option("--compare", trg.compare, "schemes whose initial cost is also recorded on the same splits");
  t->add_option("--delta", trg.opts.delta, "zmt2/zmt3 switch threshold")->check(CLI::NonNegativeNumber);
  t->add_option("--seed", trg.opts.seed, "random seed");
  t->add_option("--als-sweeps", trg.opts.als_max_sweeps, "maximum ALS sweeps")->check(CLI::NonNegativeNumber);
  t->add_option("--als-tol", trg.opts.als_tol, "ALS relative cost tolerance")->check(CLI::NonNegativeNumber);
  t->add_option("--als-rcond", trg.opts.als_rcond, "ALS pseudoinverse cutoff")->check(CLI::NonNegativeNumber);
  t->add_option("--vidal-drop", trg.opts.vidal_drop, "relative lambda cutoff of the ring gauge")->check(CLI::NonNegativeNumber);
  t->add_option("--general-dim-cap", trg.opts.general_dim_cap, "linear zmt steps while the bond exceeds this")
      ->check(CLI::NonNegativeNumber);
  bool no_als = false, eat_init = false, no_loop = false;
  t->add_flag("--no-als", no_als, "skip the ALS optimization");
  t->add_flag("--eat-gauge-init", eat_init, "start zmt steps in the EAT gauge");
  t->add_flag("--no-loopiness", no_loop, "skip the loopiness measurement");
  t->add_option("--out", trg.out, "report path; stdout when omitted");
  t->add_option("--format", trg.format, "csv|json; inferred from --out")->check(CLI::IsMember({"csv", "json"}));
  t->add_flag("--quiet", trg.quiet, "no progress on stderr");

  FixtureArgs bench;
  lc_fixture_options_init(&bench.opts);
  auto* b = app.add_subcommand("bench", "truncate one fixture bond with several schemes");
  b->fallthrough();
  b->add_option("--fixture", bench.kind, "virtual-loop|toy-pair|product-env|loopy-env");
  add_fixture_options(b, bench);
  b->add_option("--schemes", bench.schemes, "comma list of tebd|eat|zmt1|zmt2|zmt3|zmt4");
  b->add_option("--target-dim", bench.opts.target_dim, "truncated dimension; 0 picks the fixture default")
      ->check(CLI::NonNegativeNumber);
  b->add_option("--delta", bench.opts.delta, "zmt2/zmt3 switch threshold")->check(CLI::NonNegativeNumber);
  b->add_option("--format", bench.format, "csv|json; inferred from --out")->check(CLI::IsMember({"csv", "json"}));

  FixtureArgs fix;
  lc_fixture_options_init(&fix.opts);
  auto* f = app.add_subcommand("fixture", "describe a fixture bond as JSON");
  f->fallthrough();
  f->add_option("--kind", fix.kind, "virtual-loop|toy-pair|product-env|loopy-env");
  add_fixture_options(f, fix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "error: ConfigError: %s\n", e.what());
    return kExitConfig;
  }

  try {
    if (t->parsed()) {
      trg.opts.run_als = no_als ? 0 : 1;
      trg.opts.eat_gauge_init = eat_init ? 1 : 0;
      trg.opts.measure_loopiness = no_loop ? 0 : 1;
      return cmd_trg(trg);
    }
    if (b->parsed()) return cmd_bench(bench);
    return cmd_fixture(fix);
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s: %s\n", lc_status_name(e.status), e.message.c_str());
    return exit_code(e.status);
  }
}

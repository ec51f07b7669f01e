#pragma once

#include <optional>
#include <string>

#include "loopcut/fixtures.hpp"

namespace loopcut {

// Single-bond truncation schemes. zmt4 is the product ansatz.
enum class BenchScheme { Tebd, Eat, Zmt1, Zmt2, Zmt3, Zmt4 };

const char* bench_scheme_name(BenchScheme s);
std::optional<BenchScheme> parse_bench_scheme(const std::string& name);

struct BenchOptions {
  FixtureSpec fixture;
  Eigen::Index target_dim = 0;  // 0: exact dimension for virtual-loop, D - 1 otherwise
  double delta = 1e-10;         // zmt2/zmt3 switch threshold
};

struct BenchResult {
  BenchScheme scheme = BenchScheme::Tebd;
  Eigen::Index bond_dim = 0;
  Eigen::Index target_dim = 0;
  double loopiness = 0;
  ErrorMeasure error;
  Eigen::Index switch_dim = -1;
  double seconds = 0;
};

struct FixtureInfo {
  Eigen::Index bond_dim = 0;
  Eigen::Index default_target_dim = 0;
  double loopiness = 0;
  double expected_loopiness = -1;  // virtual-loop only
  double norm = 0;
};

FixtureInfo describe_fixture(const FixtureSpec& spec);

// Truncates the fixture's cut bond. tebd needs bond tensors, so it is only
// available for virtual-loop and toy-pair.
BenchResult bench_truncate(const BenchOptions& opts, BenchScheme scheme);

}  // namespace loopcut

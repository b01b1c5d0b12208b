#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bct/margins.hpp"
#include "bct/runner.hpp"
#include "bct/sampler.hpp"

namespace bct {

/// Which instance to run on. Family parameters resolve to margins via
/// d_r = floor(beta*m), d_c = floor(gamma*m) unless explicit d_r/d_c
/// overrides are given.
struct InstanceSpec {
  enum class Kind { explicit_margins, one_heavy, two_heavy, regular };
  Kind kind = Kind::explicit_margins;
  std::vector<int> rows, cols;        // explicit_margins
  int m = 0;                          // one_heavy / two_heavy
  int d = 0;                          // one_heavy
  double beta = 0, gamma = 0;         // two_heavy
  std::optional<int> d_r, d_c;        // two_heavy overrides
  int n = 0, r = 0;                   // regular

  Margins build() const;
  std::string describe() const;
};

struct RunConfig {
  InstanceSpec instance;
  SamplerConfig sampler;
  RunParams run;
  int runs = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv", "json", "svg"};

  bool wants(const std::string& format) const;
};

/// Versioned JSON config ("version": 1). Unknown fields are rejected.
RunConfig run_config_from_json_text(const std::string& text);

}  // namespace bct

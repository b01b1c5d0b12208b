#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bct/errors.hpp"
#include "bct/margins.hpp"
#include "bct/run_config.hpp"
#include "bct/runner.hpp"

using namespace bct;

namespace {

std::string trace_csv(const RunOutcome& outcome) {
  std::ostringstream out;
  write_trace_header(out);
  write_trace_rows(out, 0, outcome.trace);
  return out.str();
}

}  // namespace

TEST_CASE("trace striding") {
  CHECK(trace_emits(1));
  CHECK(trace_emits(99999));
  CHECK(trace_emits(100000));
  // past 1e5: t must be divisible by ceil(t/1e4)
  CHECK(trace_emits(100001));   // stride 11 divides 100001
  CHECK_FALSE(trace_emits(100003));
  CHECK(trace_emits(110000));   // stride 11
  CHECK_FALSE(trace_emits(110001));
  CHECK(trace_emits(1000000));  // stride 100
  CHECK_FALSE(trace_emits(999999));
}

TEST_CASE("fixed-trials runs are identical across worker counts") {
  const Margins margins = make_one_heavy(8, 3);
  SamplerConfig sampler;
  RunParams params;
  params.max_trials = 4000;
  params.jobs = 1;
  const auto one = run_estimate(margins, sampler, params, 99);
  params.jobs = 4;
  const auto four = run_estimate(margins, sampler, params, 99);
  CHECK(one.trials == four.trials);
  CHECK(one.final_log10 == four.final_log10);
  CHECK(trace_csv(one) == trace_csv(four));
  CHECK_FALSE(one.stopped_at.has_value());

  const auto other_seed = run_estimate(margins, sampler, params, 100);
  CHECK(other_seed.final_log10 != one.final_log10);
}

TEST_CASE("zero-variance instance stops exactly at the window size") {
  const Margins margins = make_regular(3, 1);  // N = 6, k = 5 -> window 30
  SamplerConfig sampler;
  RunParams params;
  params.stop_heuristic = true;
  params.max_trials = 100000;
  const auto outcome = run_estimate(margins, sampler, params, 7);
  REQUIRE(outcome.stopped_at.has_value());
  CHECK(*outcome.stopped_at == 30);
  CHECK(outcome.trials == 30);
  CHECK(outcome.final_log10 == doctest::Approx(std::log10(6.0)).epsilon(1e-10));
  CHECK(trials_to_stop(outcome) == 30);
  // last trace row carries the stop flag
  REQUIRE(!outcome.trace.empty());
  CHECK(outcome.trace.back().stopped);
  CHECK(outcome.trace.back().trial == 30);
}

TEST_CASE("past-stop factor keeps sampling beyond the stop point") {
  const Margins margins = make_regular(3, 1);
  SamplerConfig sampler;
  RunParams params;
  params.stop_heuristic = true;
  params.past_stop_factor = 2.0;
  params.max_trials = 100000;
  const auto outcome = run_estimate(margins, sampler, params, 7);
  REQUIRE(outcome.stopped_at.has_value());
  CHECK(*outcome.stopped_at == 30);
  CHECK(outcome.trials == 60);
}

TEST_CASE("trial cap without stopping") {
  const Margins margins = make_one_heavy(5, 2);
  SamplerConfig sampler;
  RunParams params;
  params.stop_heuristic = true;
  params.max_trials = 17;  // cap hits long before the window fills
  const auto outcome = run_estimate(margins, sampler, params, 3);
  CHECK(outcome.trials == 17);
  CHECK_FALSE(outcome.stopped_at.has_value());
  CHECK(trials_to_stop(outcome) == 17);
}

TEST_CASE("trace rows are well-formed") {
  const Margins margins = make_one_heavy(5, 2);
  SamplerConfig sampler;
  RunParams params;
  params.max_trials = 50;
  const auto outcome = run_estimate(margins, sampler, params, 11);
  REQUIRE(outcome.trace.size() == 50);
  std::uint64_t prev = 0;
  for (const auto& row : outcome.trace) {
    CHECK(row.trial > prev);
    prev = row.trial;
    CHECK(row.failures <= row.trial);
  }
  const std::string csv = trace_csv(outcome);
  CHECK(csv.rfind("run,trial,log10_estimate,failures,stopped\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
}

TEST_CASE("zero-variance instance: every trace row shows the exact count") {
  const Margins margins = make_regular(4, 1);  // 4! = 24 tables
  SamplerConfig sampler;
  RunParams params;
  params.max_trials = 200;
  const auto outcome = run_estimate(margins, sampler, params, 99);
  REQUIRE(outcome.trace.size() == 200);
  for (const auto& row : outcome.trace) {
    CHECK(row.log10_estimate == doctest::Approx(std::log10(24.0)).epsilon(1e-9));
    CHECK(row.failures == 0);
  }
}

TEST_CASE("short fixed run lands near the exact count") {
  const Margins margins = make_one_heavy(2, 1);  // 6 tables
  SamplerConfig sampler;
  RunParams params;
  params.max_trials = 1000;
  params.keep_trace = false;
  const auto outcome = run_estimate(margins, sampler, params, 5);
  // crude 3-sigma band: per-trial weights live in [2, 12] here
  CHECK(std::fabs(std::pow(10.0, outcome.final_log10) - 6.0) < 0.5);
}

TEST_CASE("median helper") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({1.0, 2.0, 3.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("run config json parsing") {
  const auto config = run_config_from_json_text(R"({
    "version": 1,
    "instance": {"family": "two_heavy", "m": 60, "beta": 0.6, "gamma": 0.8},
    "sampler": {"variant": "feasible", "orientation": "col", "ordering": "desc"},
    "estimator": {"epsilon": 0.02, "k": 4, "max_trials": 1234, "stop_heuristic": true},
    "runs": 3, "seed": 17, "out": "results", "formats": ["csv"], "jobs": 2
  })");
  CHECK(config.instance.kind == InstanceSpec::Kind::two_heavy);
  const Margins margins = config.instance.build();
  CHECK(margins.n_rows() == 61);
  CHECK(margins.row_sums().back() == 36);
  CHECK(margins.col_sums().back() == 48);
  CHECK(config.sampler.variant == Variant::feasible);
  CHECK(config.sampler.ordering == Ordering::descending_sum);
  CHECK(config.run.epsilon == 0.02);
  CHECK(config.run.k == 4);
  CHECK(config.run.max_trials == 1234);
  CHECK(config.run.stop_heuristic);
  CHECK(config.runs == 3);
  CHECK(config.seed == 17);
  CHECK(config.out_dir == "results");
  CHECK(config.wants("csv"));
  CHECK_FALSE(config.wants("svg"));
  CHECK(config.run.jobs == 2);
}

TEST_CASE("run config rejects bad input") {
  CHECK_THROWS_AS(run_config_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json_text(R"({"instance": {"rows": [1], "cols": [1]}})"),
                  ConfigError);  // missing version
  CHECK_THROWS_AS(run_config_from_json_text(
                      R"({"version": 2, "instance": {"rows": [1], "cols": [1]}})"),
                  ConfigError);
  CHECK_THROWS_AS(run_config_from_json_text(
                      R"({"version": 1, "instance": {"rows": [1], "cols": [1]}, "zap": 0})"),
                  ConfigError);
  CHECK_THROWS_AS(run_config_from_json_text(
                      R"({"version": 1, "instance": {"family": "two_heavy", "m": 3}})"),
                  ConfigError);  // needs beta/d_r
  CHECK_THROWS_AS(run_config_from_json_text(
                      R"({"version": 1, "instance": {"family": "one_heavy", "m": 3, "d": 1},
                          "sampler": {"variant": "maybe"}})"),
                  ConfigError);
}

TEST_CASE("explicit margins and regular instances build") {
  auto config = run_config_from_json_text(
      R"({"version": 1, "instance": {"rows": [1, 1, 2], "cols": [1, 1, 1, 1]}})");
  CHECK(config.instance.build() == Margins::validated({1, 1, 2}, {1, 1, 1, 1}));
  config = run_config_from_json_text(
      R"({"version": 1, "instance": {"family": "regular", "n": 5, "r": 2}})");
  CHECK(config.instance.build() == make_regular(5, 2));
  CHECK(config.instance.describe() == "regular(n=5, r=2)");
}

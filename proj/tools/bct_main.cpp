#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bct/errors.hpp"
#include "bct/exact_count.hpp"
#include "bct/run_config.hpp"
#include "bct/runner.hpp"
#include "bct/svg.hpp"
#include "bct/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- shared CLI state

struct CliState {
  bct::RunConfig config;
  std::string config_path;
  std::string margins_path;
  std::string family;
  std::vector<int> rows, cols;
  int m = 0, d = 0, n = 0, r = 0;
  double beta = -1, gamma = -1;
  int dr = -1, dc = -1;
  std::string variant = "restart", orient = "col", order = "given";
  std::uint64_t seed = 1, trials = 10000;
  bool stop_heuristic = false;
  double epsilon = 0.01;
  int k = 5, runs = 1, jobs = 1;
  std::string out_dir = "out";
  std::string formats = "csv,svg,json";
};

void add_instance_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "JSON run config (flags override it)");
  cmd->add_option("--margins-file", st.margins_path, "margins in two-line text form");
  cmd->add_option("--rows", st.rows, "explicit row sums")->delimiter(',');
  cmd->add_option("--cols", st.cols, "explicit column sums")->delimiter(',');
  cmd->add_option("--family", st.family, "one-heavy | two-heavy | regular");
  cmd->add_option("--m", st.m, "family size parameter");
  cmd->add_option("--d", st.d, "one-heavy row sum d");
  cmd->add_option("--beta", st.beta, "two-heavy: d_r = floor(beta*m)");
  cmd->add_option("--gamma", st.gamma, "two-heavy: d_c = floor(gamma*m)");
  cmd->add_option("--dr", st.dr, "two-heavy explicit d_r (overrides beta)");
  cmd->add_option("--dc", st.dc, "two-heavy explicit d_c (overrides gamma)");
  cmd->add_option("--n", st.n, "regular: matrix size");
  cmd->add_option("--r", st.r, "regular: row/column sum");
}

void add_sampler_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--variant", st.variant, "restart | feasible");
  cmd->add_option("--orient", st.orient, "col | row");
  cmd->add_option("--order", st.order, "given | desc | asc");
}

void add_run_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--seed", st.seed, "master seed");
  cmd->add_option("--trials", st.trials, "trial count (fixed mode) or cap");
  cmd->add_flag("--stop-heuristic", st.stop_heuristic, "stop on the plateau rule");
  cmd->add_option("--epsilon", st.epsilon, "plateau tolerance");
  cmd->add_option("--k", st.k, "plateau window factor (window = k*(rows+cols))");
  cmd->add_option("--runs", st.runs, "independent replications");
  cmd->add_option("--jobs", st.jobs, "worker threads (fixed-trials mode)");
  cmd->add_option("--out", st.out_dir, "output directory");
  cmd->add_option("--format", st.formats, "comma list of csv,svg,json");
}

bool flag_given(const CLI::App* cmd, const char* name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flags override whatever the JSON config provided.
bct::RunConfig resolve(const CLI::App* cmd, CliState& st, bool require_instance = true) {
  bct::RunConfig config;
  if (!st.config_path.empty()) {
    std::ifstream in(st.config_path);
    if (!in) throw bct::ConfigError("cannot open config file " + st.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    config = bct::run_config_from_json_text(buf.str());
  }
  auto given = [&](const char* name) { return flag_given(cmd, name); };

  if (!st.margins_path.empty()) {
    std::ifstream in(st.margins_path);
    if (!in) throw bct::ConfigError("cannot open margins file " + st.margins_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const bct::Margins margins = bct::margins_from_text(buf.str());
    config.instance = {};
    config.instance.kind = bct::InstanceSpec::Kind::explicit_margins;
    config.instance.rows.assign(margins.row_sums().begin(), margins.row_sums().end());
    config.instance.cols.assign(margins.col_sums().begin(), margins.col_sums().end());
  } else if (given("--rows") || given("--cols")) {
    config.instance = {};
    config.instance.kind = bct::InstanceSpec::Kind::explicit_margins;
    config.instance.rows = st.rows;
    config.instance.cols = st.cols;
  } else if (given("--family")) {
    config.instance = {};
    if (st.family == "one-heavy" || st.family == "one_heavy") {
      config.instance.kind = bct::InstanceSpec::Kind::one_heavy;
      config.instance.m = st.m;
      config.instance.d = st.d;
    } else if (st.family == "two-heavy" || st.family == "two_heavy") {
      config.instance.kind = bct::InstanceSpec::Kind::two_heavy;
      config.instance.m = st.m;
      config.instance.beta = st.beta;
      config.instance.gamma = st.gamma;
      if (given("--dr")) config.instance.d_r = st.dr;
      if (given("--dc")) config.instance.d_c = st.dc;
      if (st.beta < 0 && !config.instance.d_r)
        throw bct::ConfigError("two-heavy needs --beta or --dr");
      if (st.gamma < 0 && !config.instance.d_c)
        throw bct::ConfigError("two-heavy needs --gamma or --dc");
    } else if (st.family == "regular") {
      config.instance.kind = bct::InstanceSpec::Kind::regular;
      config.instance.n = st.n;
      config.instance.r = st.r;
    } else {
      throw bct::ConfigError("unknown family '" + st.family + "'");
    }
  } else if (st.config_path.empty() && require_instance) {
    throw bct::ConfigError("no instance given (use --family, --rows/--cols, "
                           "--margins-file or --config)");
  }

  if (given("--variant")) config.sampler.variant = st.variant == "feasible"
                                                       ? bct::Variant::feasible
                                                       : bct::Variant::restart;
  if (given("--variant") && st.variant != "feasible" && st.variant != "restart")
    throw bct::ConfigError("variant must be restart or feasible");
  if (given("--orient")) {
    if (st.orient == "col")
      config.sampler.orientation = bct::Orientation::column_wise;
    else if (st.orient == "row")
      config.sampler.orientation = bct::Orientation::row_wise;
    else
      throw bct::ConfigError("orient must be col or row");
  }
  if (given("--order")) {
    if (st.order == "given")
      config.sampler.ordering = bct::Ordering::as_given;
    else if (st.order == "desc")
      config.sampler.ordering = bct::Ordering::descending_sum;
    else if (st.order == "asc")
      config.sampler.ordering = bct::Ordering::ascending_sum;
    else
      throw bct::ConfigError("order must be given, desc or asc");
  }
  if (given("--seed")) config.seed = st.seed;
  if (given("--trials")) config.run.max_trials = st.trials;
  if (given("--stop-heuristic")) config.run.stop_heuristic = true;
  if (given("--epsilon")) config.run.epsilon = st.epsilon;
  if (given("--k")) config.run.k = st.k;
  if (config.run.epsilon <= 0 || config.run.k < 1)
    throw bct::ConfigError("estimator needs epsilon > 0 and k >= 1");
  if (given("--runs")) config.runs = st.runs;
  if (given("--jobs")) config.run.jobs = st.jobs;
  if (given("--out")) config.out_dir = st.out_dir;
  if (given("--format")) config.formats = split_list(st.formats);
  config.sampler.seed = config.seed;
  return config;
}

std::string json_log10(double value) {
  return std::isfinite(value) ? std::to_string(value) : "null";
}

json run_outcome_json(int run, std::uint64_t run_seed, const bct::RunOutcome& outcome) {
  json j;
  j["run"] = run;
  j["seed"] = run_seed;
  j["trials"] = outcome.trials;
  j["failures"] = outcome.failures;
  if (std::isfinite(outcome.final_log10))
    j["final_log10_estimate"] = outcome.final_log10;
  else
    j["final_log10_estimate"] = nullptr;
  if (outcome.stopped_at)
    j["stopped_at"] = *outcome.stopped_at;
  else
    j["stopped_at"] = nullptr;
  j["wall_seconds"] = outcome.wall_seconds;
  return j;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const CLI::App* cmd, CliState& st) {
  bct::RunConfig config = resolve(cmd, st);
  const bct::Margins margins = config.instance.build();
  fs::create_directories(config.out_dir);

  json summary;
  summary["instance"] = config.instance.describe();
  summary["n_rows"] = margins.n_rows();
  summary["n_cols"] = margins.n_cols();
  summary["seed"] = config.seed;
  summary["runs"] = json::array();

  std::ofstream trace;
  if (config.wants("csv")) {
    trace.open(fs::path(config.out_dir) / "trace.csv");
    bct::write_trace_header(trace);
  }
  for (int run = 0; run < config.runs; ++run) {
    const std::uint64_t run_seed = bct::derive_seed(config.seed, static_cast<std::uint64_t>(run));
    const bct::RunOutcome outcome = bct::run_estimate(margins, config.sampler, config.run, run_seed);
    if (trace.is_open()) bct::write_trace_rows(trace, run, outcome.trace);
    summary["runs"].push_back(run_outcome_json(run, run_seed, outcome));
    std::printf("run %d: trials=%llu failures=%llu log10(X)=%s%s\n", run,
                static_cast<unsigned long long>(outcome.trials),
                static_cast<unsigned long long>(outcome.failures),
                json_log10(outcome.final_log10).c_str(),
                outcome.stopped_at ? " (stopped)" : "");
  }
  if (config.wants("json")) {
    std::ofstream out(fs::path(config.out_dir) / "summary.json");
    out << summary.dump(2) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- count

int cmd_count(const CLI::App* cmd, CliState& st, const std::string& method) {
  bct::RunConfig config = resolve(cmd, st);
  const bct::Margins margins = config.instance.build();
  const auto kind = config.instance.kind;
  auto closed_form = [&]() {
    if (kind == bct::InstanceSpec::Kind::one_heavy) {
      return bct::count_one_heavy(config.instance.m, config.instance.d);
    }
    if (kind == bct::InstanceSpec::Kind::two_heavy) {
      const int dr = config.instance.d_r
                         ? *config.instance.d_r
                         : bct::scaled_floor(config.instance.beta, config.instance.m);
      const int dc = config.instance.d_c
                         ? *config.instance.d_c
                         : bct::scaled_floor(config.instance.gamma, config.instance.m);
      return bct::count_two_heavy(config.instance.m, dr, dc);
    }
    throw bct::ConfigError("closed_form only applies to one-heavy/two-heavy families");
  };

  bct::BigCount count;
  std::string used = method;
  if (method == "auto") {
    if (kind == bct::InstanceSpec::Kind::one_heavy ||
        kind == bct::InstanceSpec::Kind::two_heavy) {
      count = closed_form();
      used = "closed_form";
    } else {
      try {
        count = bct::dp_count(margins);
        used = "dp";
      } catch (const bct::TooLarge&) {
        count = bct::brute_force_count(margins);
        used = "brute";
      }
    }
  } else if (method == "closed_form") {
    count = closed_form();
  } else if (method == "dp") {
    count = bct::dp_count(margins);
  } else if (method == "brute") {
    count = bct::brute_force_count(margins);
  } else {
    throw bct::ConfigError("method must be auto, brute, dp or closed_form");
  }
  std::printf("instance: %s\n", config.instance.describe().c_str());
  std::printf("method:   %s\n", used.c_str());
  std::printf("count:    %s\n", bct::count_report(count).c_str());
  if (count > 0) std::printf("log10:    %.9f\n", bct::log10_of(count));
  return 0;
}

// ---------------------------------------------------------------- theory

json theory_json(const bct::TheoryReport& rep) {
  json j;
  j["family"] = rep.family;
  j["beta"] = static_cast<double>(rep.beta);
  if (rep.family == "two_heavy") j["gamma"] = static_cast<double>(rep.gamma);
  if (rep.m) j["m"] = *rep.m;
  if (rep.d_r) j[rep.family == "one_heavy" ? "d" : "d_r"] = *rep.d_r;
  if (rep.d_c) j["d_c"] = *rep.d_c;
  if (rep.marginals1) {
    j["pi1"] = static_cast<double>(rep.marginals1->pi1);
    j["mu1"] = static_cast<double>(rep.marginals1->mu1);
  }
  if (rep.marginals2) {
    j["f2"] = static_cast<double>(rep.marginals2->f);
    j["g2"] = static_cast<double>(rep.marginals2->g);
  }
  j["f_limit0"] = static_cast<double>(rep.f_limit0);
  j["g_limit0"] = static_cast<double>(rep.g_limit0);
  j["delta"] = static_cast<double>(rep.delta);
  j["branch"] = rep.branch;
  auto put = [&](const char* key, const std::optional<long double>& v) {
    if (v) j[key] = static_cast<double>(*v);
  };
  put("alpha", rep.alpha);
  put("epsilon", rep.epsilon);
  put("f_shifted", rep.f_shifted);
  put("g_shifted", rep.g_shifted);
  put("b1", rep.b1);
  put("b2", rep.b2);
  put("s1", rep.s1);
  put("s2", rep.s2);
  put("log10_underestimation", rep.log10_underestimation);
  put("log10_failure_prob", rep.log10_failure_prob);
  return j;
}

int cmd_theory(const std::string& family, double beta, double gamma, int m, bool as_json) {
  std::optional<int> m_opt;
  if (m > 0) m_opt = m;
  bct::TheoryReport rep;
  if (family == "one-heavy" || family == "one_heavy") {
    rep = bct::one_heavy_report(beta, m_opt);
  } else if (family == "two-heavy" || family == "two_heavy") {
    if (gamma < 0) throw bct::ConfigError("two-heavy theory needs --gamma");
    rep = bct::two_heavy_report(beta, gamma, m_opt);
  } else {
    throw bct::ConfigError("theory family must be one-heavy or two-heavy");
  }
  if (as_json)
    std::cout << theory_json(rep).dump(2) << '\n';
  else
    std::cout << bct::to_text(rep);
  return 0;
}

// ---------------------------------------------------------------- figures

struct FigRun {
  std::string label;
  std::string color;
  bct::RunOutcome outcome;
};

int cmd_fig1(const CLI::App* cmd, CliState& st) {
  bct::RunConfig config = resolve(cmd, st);
  const bct::Margins margins = config.instance.build();
  fs::create_directories(config.out_dir);
  if (!flag_given(cmd, "--variant")) config.sampler.variant = bct::Variant::feasible;
  config.run.stop_heuristic = true;

  const bool panel_a = config.instance.kind == bct::InstanceSpec::Kind::regular;
  if (!panel_a && config.instance.kind != bct::InstanceSpec::Kind::two_heavy) {
    throw bct::ConfigError("fig1 runs on --family regular (panel a) or two-heavy (panel b)");
  }

  std::vector<FigRun> runs;
  if (panel_a) {
    const int n_runs = flag_given(cmd, "--runs") ? config.runs : 5;
    if (n_runs < 1) throw bct::ConfigError("fig1 needs at least one run");
    for (int i = 0; i < n_runs; ++i) {
      const std::uint64_t run_seed = bct::derive_seed(config.seed, static_cast<std::uint64_t>(i));
      runs.push_back({"run " + std::to_string(i), "", {}});
      runs.back().outcome = bct::run_estimate(margins, config.sampler, config.run, run_seed);
    }
  } else {
    // Three runs per setting: column/descending, row/descending,
    // column/ascending; runs continue to twice the stopping point.
    config.run.past_stop_factor = 2.0;
    const struct {
      bct::Orientation orient;
      bct::Ordering order;
      const char* label;
      const char* color;
    } settings[] = {
        {bct::Orientation::column_wise, bct::Ordering::descending_sum, "col desc", "red"},
        {bct::Orientation::row_wise, bct::Ordering::descending_sum, "row desc", "blue"},
        {bct::Orientation::column_wise, bct::Ordering::ascending_sum, "col asc", "green"},
    };
    int run_index = 0;
    for (const auto& setting : settings) {
      bct::SamplerConfig sampler = config.sampler;
      sampler.orientation = setting.orient;
      sampler.ordering = setting.order;
      for (int i = 0; i < 3; ++i, ++run_index) {
        const std::uint64_t run_seed =
            bct::derive_seed(config.seed, static_cast<std::uint64_t>(run_index));
        runs.push_back({setting.label, setting.color, {}});
        runs.back().outcome = bct::run_estimate(margins, sampler, config.run, run_seed);
      }
    }
  }

  if (config.wants("csv")) {
    for (size_t i = 0; i < runs.size(); ++i) {
      std::ofstream out(fs::path(config.out_dir) / ("fig1_run" + std::to_string(i) + ".csv"));
      bct::write_trace_header(out);
      bct::write_trace_rows(out, static_cast<int>(i), runs[i].outcome.trace);
    }
  }

  bct::BigCount exact;
  if (panel_a) {
    exact = bct::dp_count(margins);
  } else {
    const int dr = margins.row_sums().back();
    const int dc = margins.col_sums().back();
    exact = bct::count_two_heavy(margins.n_rows() - 1, dr, dc);
  }
  const double exact_log10 = bct::log10_of(exact);

  if (config.wants("svg")) {
    bct::SvgChartSpec spec;
    std::vector<bct::SvgSeries> series;
    if (panel_a) {
      const double scale = std::floor(exact_log10);
      spec.title = "SIS estimate vs trials, " + config.instance.describe();
      spec.x_label = "trials";
      spec.y_label = "estimate / 10^" + std::to_string(static_cast<long long>(scale));
      spec.hline = std::pow(10.0, exact_log10 - scale);
      spec.hline_label = "exact";
      const char* colors[] = {"red", "blue", "green", "black", "orange", "purple"};
      for (size_t i = 0; i < runs.size(); ++i) {
        bct::SvgSeries s;
        s.label = runs[i].label;
        s.color = colors[i % 6];
        for (const auto& row : runs[i].outcome.trace) {
          if (!std::isfinite(row.log10_estimate)) continue;
          s.points.emplace_back(static_cast<double>(row.trial),
                                std::pow(10.0, row.log10_estimate - scale));
        }
        series.push_back(std::move(s));
      }
    } else {
      spec.title = "SIS estimate vs trials, " + config.instance.describe();
      spec.x_label = "trials";
      spec.y_label = "log10 estimate";
      spec.hline = exact_log10;
      spec.hline_label = "exact";
      for (const auto& run : runs) {
        bct::SvgSeries s;
        s.label = run.label;
        s.color = run.color;
        for (const auto& row : run.outcome.trace) {
          if (!std::isfinite(row.log10_estimate)) continue;
          s.points.emplace_back(static_cast<double>(row.trial), row.log10_estimate);
        }
        series.push_back(std::move(s));
      }
    }
    std::ofstream out(fs::path(config.out_dir) / "fig1.svg");
    out << bct::render_line_chart(spec, series);
  }
  std::printf("exact count: %s\n", bct::count_report(exact).c_str());
  for (size_t i = 0; i < runs.size(); ++i) {
    std::printf("run %zu [%s]: trials=%llu final log10(X)=%s\n", i, runs[i].label.c_str(),
                static_cast<unsigned long long>(runs[i].outcome.trials),
                json_log10(runs[i].outcome.final_log10).c_str());
  }
  return 0;
}

int cmd_fig2(const CLI::App* cmd, CliState& st, std::string families_csv, int n_min, int n_max,
             int n_step) {
  bct::RunConfig config = resolve(cmd, st, /*require_instance=*/false);
  fs::create_directories(config.out_dir);
  if (!flag_given(cmd, "--variant")) config.sampler.variant = bct::Variant::feasible;
  config.run.stop_heuristic = true;
  const int runs = flag_given(cmd, "--runs") ? config.runs : 20;

  struct Family {
    std::string name;
    std::string color;
    std::function<int(int)> r_of_n;
    bool clamp;  // clamp r to n instead of skipping the point
  };
  std::vector<Family> all = {
      {"5", "red", [](int) { return 5; }, false},
      {"10", "blue", [](int) { return 10; }, false},
      // floor(5 ln n), natural log; clamped to n where it exceeds it
      {"5logn", "green",
       [](int n) { return static_cast<int>(std::floor(5 * std::log(n))); }, true},
      {"half", "black", [](int n) { return n / 2; }, false},
  };
  std::vector<Family> chosen;
  for (const auto& name : split_list(families_csv)) {
    bool found = false;
    for (const auto& fam : all) {
      if (fam.name == name) {
        chosen.push_back(fam);
        found = true;
      }
    }
    if (!found) throw bct::ConfigError("unknown fig2 family '" + name + "'");
  }

  std::ofstream csv(fs::path(config.out_dir) / "fig2.csv");
  csv << "family,n,r,median_trials\n";
  std::vector<bct::SvgSeries> series;
  for (const auto& fam : chosen) {
    bct::SvgSeries s;
    s.label = fam.name + "-regular";
    s.color = fam.color;
    for (int n = n_min; n <= n_max; n += n_step) {
      int r = fam.r_of_n(n);
      if (r > n) {
        if (!fam.clamp) {
          std::fprintf(stderr, "fig2: family %s needs n >= %d; skipping n=%d\n",
                       fam.name.c_str(), r, n);
          continue;
        }
        std::fprintf(stderr, "fig2: family %s at n=%d gives r=%d > n; clamping to n\n",
                     fam.name.c_str(), n, r);
        r = n;
      }
      if (r < 1) {
        std::fprintf(stderr, "fig2: family %s at n=%d gives r=%d; skipping\n",
                     fam.name.c_str(), n, r);
        continue;
      }
      const bct::Margins margins = bct::make_regular(n, r);
      std::vector<double> counts;
      for (int run = 0; run < runs; ++run) {
        const std::uint64_t run_seed = bct::derive_seed(
            config.seed, static_cast<std::uint64_t>(run) * 1000003ull +
                             static_cast<std::uint64_t>(n) * 1009ull +
                             static_cast<std::uint64_t>(r));
        bct::RunParams params = config.run;
        params.keep_trace = false;
        const auto outcome = bct::run_estimate(margins, config.sampler, params, run_seed);
        counts.push_back(static_cast<double>(bct::trials_to_stop(outcome)));
      }
      const double med = bct::median(counts);
      csv << fam.name << ',' << n << ',' << r << ',' << med << '\n';
      s.points.emplace_back(n, med);
      std::printf("fig2 %s-regular n=%d r=%d: median trials %g\n", fam.name.c_str(), n, r, med);
    }
    series.push_back(std::move(s));
  }
  if (config.wants("svg")) {
    bct::SvgChartSpec spec;
    spec.title = "SIS trials to converge, regular margins";
    spec.x_label = "n";
    spec.y_label = "median trials";
    std::ofstream out(fs::path(config.out_dir) / "fig2.svg");
    out << bct::render_line_chart(spec, series);
  }
  return 0;
}

int cmd_fig3(const CLI::App* cmd, CliState& st, std::string pairs_csv, int size_min,
             int size_max, int size_step) {
  bct::RunConfig config = resolve(cmd, st, /*require_instance=*/false);
  fs::create_directories(config.out_dir);
  if (!flag_given(cmd, "--variant")) config.sampler.variant = bct::Variant::feasible;
  config.run.stop_heuristic = true;
  const int runs = flag_given(cmd, "--runs") ? config.runs : 20;

  struct Pair {
    double beta, gamma;
    std::string color;
  };
  const char* colors[] = {"red", "blue", "green", "black", "orange", "purple"};
  std::vector<Pair> pairs;
  for (const auto& word : split_list(pairs_csv)) {
    const auto sep = word.find(':');
    if (sep == std::string::npos) throw bct::ConfigError("fig3 pairs look like 0.6:0.8");
    pairs.push_back({std::stod(word.substr(0, sep)), std::stod(word.substr(sep + 1)),
                     colors[pairs.size() % 6]});
  }

  // Smallest deviation from the target m+n (matrix is (m+1)x(n+1)).
  auto pick_m = [](double beta, double gamma, int size) -> std::optional<int> {
    std::optional<int> best;
    long long best_err = 1LL << 60;
    for (int m = 1; m <= 4 * size + 8; ++m) {
      const int dr = bct::scaled_floor(beta, m);
      const int dc = bct::scaled_floor(gamma, m);
      if (dr < 1 || dc < 1 || dc > m) continue;
      const long long n = static_cast<long long>(m) + dr - dc;
      if (n < dr) continue;
      const long long err = std::llabs(m + n - size);
      if (err < best_err) {
        best_err = err;
        best = m;
      }
    }
    return best;
  };

  std::ofstream csv(fs::path(config.out_dir) / "fig3.csv");
  csv << "beta,gamma,m,n,size,median_trials\n";
  std::vector<bct::SvgSeries> lin_series, log_series;
  for (const auto& pair : pairs) {
    char label[48];
    std::snprintf(label, sizeof(label), "b=%g g=%g", pair.beta, pair.gamma);
    bct::SvgSeries lin{label, pair.color, {}};
    bct::SvgSeries lg{label, pair.color, {}};
    for (int size = size_min; size <= size_max; size += size_step) {
      const auto m_opt = pick_m(pair.beta, pair.gamma, size);
      if (!m_opt) {
        std::fprintf(stderr, "fig3: no valid m for beta=%g gamma=%g size=%d; skipping\n",
                     pair.beta, pair.gamma, size);
        continue;
      }
      const int m = *m_opt;
      const int dr = bct::scaled_floor(pair.beta, m);
      const int dc = bct::scaled_floor(pair.gamma, m);
      const bct::Margins margins = bct::make_two_heavy(m, dr, dc);
      const int mn = m + (m + dr - dc);
      std::vector<double> counts;
      for (int run = 0; run < runs; ++run) {
        const std::uint64_t run_seed = bct::derive_seed(
            config.seed, static_cast<std::uint64_t>(run) * 1000003ull +
                             static_cast<std::uint64_t>(size) * 1013ull +
                             static_cast<std::uint64_t>(m));
        bct::RunParams params = config.run;
        params.keep_trace = false;
        const auto outcome = bct::run_estimate(margins, config.sampler, params, run_seed);
        counts.push_back(static_cast<double>(bct::trials_to_stop(outcome)));
      }
      const double med = bct::median(counts);
      csv << pair.beta << ',' << pair.gamma << ',' << m << ',' << (m + dr - dc) << ','
          << mn << ',' << med << '\n';
      lin.points.emplace_back(mn, med);
      lg.points.emplace_back(mn, std::log10(std::max(1.0, med)));
      std::printf("fig3 beta=%g gamma=%g m+n=%d: median trials %g\n", pair.beta, pair.gamma,
                  mn, med);
    }
    lin_series.push_back(std::move(lin));
    log_series.push_back(std::move(lg));
  }
  if (config.wants("svg")) {
    bct::SvgChartSpec lin_spec;
    lin_spec.title = "SIS trials to converge, two-heavy margins";
    lin_spec.x_label = "m + n";
    lin_spec.y_label = "median trials";
    std::ofstream lin_out(fs::path(config.out_dir) / "fig3_linear.svg");
    lin_out << bct::render_line_chart(lin_spec, lin_series);
    bct::SvgChartSpec log_spec = lin_spec;
    log_spec.y_label = "log10 median trials";
    std::ofstream log_out(fs::path(config.out_dir) / "fig3_log10.svg");
    log_out << bct::render_line_chart(log_spec, log_series);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential importance sampling toolkit for 0/1 tables with fixed margins"};
  app.require_subcommand(1);
  CliState st;

  auto* estimate = app.add_subcommand("estimate", "run SIS estimates with traces");
  add_instance_flags(estimate, st);
  add_sampler_flags(estimate, st);
  add_run_flags(estimate, st);

  auto* count = app.add_subcommand("count", "exact table counts");
  add_instance_flags(count, st);
  std::string method = "auto";
  count->add_option("--method", method, "auto | brute | dp | closed_form");

  auto* theory = app.add_subcommand("theory", "closed-form diagnostics for the heavy families");
  std::string th_family = "one-heavy";
  double th_beta = 1.0, th_gamma = -1.0;
  int th_m = 0;
  bool th_json = false;
  theory->add_option("--family", th_family, "one-heavy | two-heavy");
  theory->add_option("--beta", th_beta, "heavy row fraction");
  theory->add_option("--gamma", th_gamma, "heavy column fraction (two-heavy)");
  theory->add_option("--m", th_m, "evaluate constants at a concrete m");
  theory->add_flag("--json", th_json, "emit JSON instead of text");

  auto* fig1 = app.add_subcommand("fig1", "estimate trajectories with the exact count overlaid");
  add_instance_flags(fig1, st);
  add_sampler_flags(fig1, st);
  add_run_flags(fig1, st);

  auto* fig2 = app.add_subcommand("fig2", "trials-to-converge across regular instances");
  std::string families = "5,10,5logn,half";
  int n_min = 10, n_max = 40, n_step = 5;
  add_sampler_flags(fig2, st);
  fig2->add_option("--families", families, "subset of 5,10,5logn,half");
  fig2->add_option("--n-min", n_min, "");
  fig2->add_option("--n-max", n_max, "");
  fig2->add_option("--n-step", n_step, "");
  add_run_flags(fig2, st);

  auto* fig3 = app.add_subcommand("fig3", "trials-to-converge across two-heavy instances");
  std::string pairs = "0.1:0.5,0.5:0.5,0.2:0.8,0.6:0.8";
  int size_min = 20, size_max = 140, size_step = 20;
  add_sampler_flags(fig3, st);
  fig3->add_option("--pairs", pairs, "beta:gamma list");
  fig3->add_option("--size-min", size_min, "");
  fig3->add_option("--size-max", size_max, "");
  fig3->add_option("--size-step", size_step, "");
  add_run_flags(fig3, st);

  try {
    app.parse(argc, argv);
    if (estimate->parsed()) return cmd_estimate(estimate, st);
    if (count->parsed()) return cmd_count(count, st, method);
    if (theory->parsed()) return cmd_theory(th_family, th_beta, th_gamma, th_m, th_json);
    if (fig1->parsed()) return cmd_fig1(fig1, st);
    if (fig2->parsed()) return cmd_fig2(fig2, st, families, n_min, n_max, n_step);
    if (fig3->parsed()) return cmd_fig3(fig3, st, pairs, size_min, size_max, size_step);
    return 2;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const bct::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const bct::InfeasibleInstance& e) {
    std::fprintf(stderr, "infeasible instance: %s\n", e.what());
    return 3;
  } catch (const bct::InfeasibleFamily& e) {
    std::fprintf(stderr, "infeasible family: %s\n", e.what());
    return 3;
  } catch (const bct::TooLarge& e) {
    std::fprintf(stderr, "budget exceeded: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

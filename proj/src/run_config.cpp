#include "bct/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "bct/errors.hpp"

namespace bct {

using nlohmann::json;

Margins InstanceSpec::build() const {
  switch (kind) {
    case Kind::explicit_margins:
      return Margins::validated(rows, cols);
    case Kind::one_heavy:
      return make_one_heavy(m, d);
    case Kind::two_heavy: {
      const int dr = d_r ? *d_r : scaled_floor(beta, m);
      const int dc = d_c ? *d_c : scaled_floor(gamma, m);
      return make_two_heavy(m, dr, dc);
    }
    case Kind::regular:
      return make_regular(n, r);
  }
  throw ConfigError("unreachable instance kind");
}

std::string InstanceSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::explicit_margins:
      out << "margins " << rows.size() << "x" << cols.size();
      break;
    case Kind::one_heavy:
      out << "one_heavy(m=" << m << ", d=" << d << ")";
      break;
    case Kind::two_heavy:
      out << "two_heavy(m=" << m;
      if (d_r)
        out << ", d_r=" << *d_r;
      else
        out << ", beta=" << beta;
      if (d_c)
        out << ", d_c=" << *d_c;
      else
        out << ", gamma=" << gamma;
      out << ")";
      break;
    case Kind::regular:
      out << "regular(n=" << n << ", r=" << r << ")";
      break;
  }
  return out.str();
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const char* where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError(std::string("unknown field '") + key + "' in " + where);
    }
  }
}

InstanceSpec parse_instance(const json& obj) {
  InstanceSpec spec;
  if (obj.contains("rows") || obj.contains("cols")) {
    reject_unknown(obj, {"rows", "cols"}, "instance");
    spec.kind = InstanceSpec::Kind::explicit_margins;
    spec.rows = obj.at("rows").get<std::vector<int>>();
    spec.cols = obj.at("cols").get<std::vector<int>>();
    return spec;
  }
  const std::string family = obj.at("family").get<std::string>();
  if (family == "one_heavy") {
    reject_unknown(obj, {"family", "m", "d"}, "instance");
    spec.kind = InstanceSpec::Kind::one_heavy;
    spec.m = obj.at("m").get<int>();
    spec.d = obj.at("d").get<int>();
  } else if (family == "two_heavy") {
    reject_unknown(obj, {"family", "m", "beta", "gamma", "d_r", "d_c"}, "instance");
    spec.kind = InstanceSpec::Kind::two_heavy;
    spec.m = obj.at("m").get<int>();
    if (obj.contains("beta")) spec.beta = obj.at("beta").get<double>();
    if (obj.contains("gamma")) spec.gamma = obj.at("gamma").get<double>();
    if (obj.contains("d_r")) spec.d_r = obj.at("d_r").get<int>();
    if (obj.contains("d_c")) spec.d_c = obj.at("d_c").get<int>();
    if (!obj.contains("beta") && !obj.contains("d_r"))
      throw ConfigError("two_heavy instance needs beta or d_r");
    if (!obj.contains("gamma") && !obj.contains("d_c"))
      throw ConfigError("two_heavy instance needs gamma or d_c");
  } else if (family == "regular") {
    reject_unknown(obj, {"family", "n", "r"}, "instance");
    spec.kind = InstanceSpec::Kind::regular;
    spec.n = obj.at("n").get<int>();
    spec.r = obj.at("r").get<int>();
  } else {
    throw ConfigError("unknown instance family '" + family + "'");
  }
  return spec;
}

Variant parse_variant(const std::string& word) {
  if (word == "restart") return Variant::restart;
  if (word == "feasible") return Variant::feasible;
  throw ConfigError("variant must be 'restart' or 'feasible'");
}

Orientation parse_orientation(const std::string& word) {
  if (word == "col" || word == "column" || word == "column_wise") return Orientation::column_wise;
  if (word == "row" || word == "row_wise") return Orientation::row_wise;
  throw ConfigError("orientation must be 'col' or 'row'");
}

Ordering parse_ordering(const std::string& word) {
  if (word == "given" || word == "as_given") return Ordering::as_given;
  if (word == "desc" || word == "descending") return Ordering::descending_sum;
  if (word == "asc" || word == "ascending") return Ordering::ascending_sum;
  throw ConfigError("ordering must be 'given', 'desc' or 'asc'");
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    reject_unknown(root, {"version", "instance", "sampler", "estimator", "runs", "seed",
                          "out", "formats", "jobs"},
                   "config");
    if (!root.contains("version") || root.at("version").get<int>() != 1) {
      throw ConfigError("config requires \"version\": 1");
    }
    RunConfig config;
    config.instance = parse_instance(root.at("instance"));
    if (root.contains("sampler")) {
      const auto& samp = root.at("sampler");
      reject_unknown(samp, {"variant", "orientation", "ordering"}, "sampler");
      if (samp.contains("variant"))
        config.sampler.variant = parse_variant(samp.at("variant").get<std::string>());
      if (samp.contains("orientation"))
        config.sampler.orientation =
            parse_orientation(samp.at("orientation").get<std::string>());
      if (samp.contains("ordering"))
        config.sampler.ordering = parse_ordering(samp.at("ordering").get<std::string>());
    }
    if (root.contains("estimator")) {
      const auto& est = root.at("estimator");
      reject_unknown(est, {"epsilon", "k", "max_trials", "stop_heuristic"}, "estimator");
      if (est.contains("epsilon")) config.run.epsilon = est.at("epsilon").get<double>();
      if (est.contains("k")) config.run.k = est.at("k").get<int>();
      if (config.run.epsilon <= 0 || config.run.k < 1)
        throw ConfigError("estimator needs epsilon > 0 and k >= 1");
      if (est.contains("max_trials"))
        config.run.max_trials = est.at("max_trials").get<std::uint64_t>();
      if (est.contains("stop_heuristic"))
        config.run.stop_heuristic = est.at("stop_heuristic").get<bool>();
    }
    if (root.contains("runs")) config.runs = root.at("runs").get<int>();
    if (root.contains("seed")) config.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("out")) config.out_dir = root.at("out").get<std::string>();
    if (root.contains("formats"))
      config.formats = root.at("formats").get<std::vector<std::string>>();
    if (root.contains("jobs")) config.run.jobs = root.at("jobs").get<int>();
    config.sampler.seed = config.seed;
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

}  // namespace bct

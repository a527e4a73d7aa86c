#include "hdloc/harness.hpp"

#include "hdloc/errors.hpp"
#include "hdloc/max_test.hpp"
#include "hdloc/parallel.hpp"
#include "hdloc/sign_core.hpp"
#include "hdloc/stats_util.hpp"
#include "hdloc/csv_io.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

namespace hdloc {

namespace {

using nlohmann::json;

constexpr std::array<Method, 11> kAllMethods{Method::InMax, Method::InSum, Method::InCc,  Method::SsMax,
                                             Method::SsSum, Method::SsCc,  Method::Max,   Method::Sum,
                                             Method::Cc,    Method::InMinP, Method::SsMinP};

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

// Lazily computed value whose failure is remembered as a message.
template <typename T>
class Cached {
 public:
  template <typename F>
  const T* get(F&& compute) {
    if (!done_) {
      done_ = true;
      try {
        value_.emplace(compute());
      } catch (const Error& e) {
        error_ = e.what();
      }
    }
    return value_ ? &*value_ : nullptr;
  }
  const std::string& error() const { return error_; }

 private:
  bool done_ = false;
  std::optional<T> value_;
  std::string error_;
};

MethodOutcome from_result(const TestResult& r) {
  MethodOutcome o;
  o.ok = std::isfinite(r.p_value);
  o.p_value = r.p_value;
  o.reject = r.reject;
  if (!o.ok) o.error = "non-finite p-value";
  return o;
}

MethodOutcome failed(const std::string& message) {
  MethodOutcome o;
  o.error = message.empty() ? "unknown failure" : message;
  return o;
}

// Per-family state for one weight exponent.
struct Family {
  WeightExponent m;
  std::string prefix;
  Cached<HREstimate> estimate;
  Cached<TestResult> max_side;
  Cached<TestResult> sum_side;
};

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
  }
}

RadialLaw parse_law(const json& j) {
  check_keys(j, {"kind", "df", "gamma", "sigma"}, "law");
  const std::string kind = j.at("kind").get<std::string>();
  RadialLaw law;
  if (kind == "normal") {
    law = RadialLaw::normal();
  } else if (kind == "t") {
    law = RadialLaw::student_t(j.at("df").get<double>());
  } else if (kind == "mixture") {
    law = RadialLaw::mixture(j.at("gamma").get<double>(), j.at("sigma").get<double>());
  } else {
    throw InvalidInput("unknown law kind: " + kind);
  }
  law.validate();
  return law;
}

json law_json(const RadialLaw& law) {
  switch (law.kind) {
    case RadialLaw::Kind::Normal:
      return {{"kind", "normal"}};
    case RadialLaw::Kind::StudentT:
      return {{"kind", "t"}, {"df", law.df}};
    case RadialLaw::Kind::Mixture:
      return {{"kind", "mixture"}, {"gamma", law.gamma}, {"sigma", law.sigma}};
  }
  return {};
}

CovarianceSpec parse_covariance(const json& j, Eigen::Index p) {
  check_keys(j, {"kind", "rho", "matrix"}, "covariance");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return CovarianceSpec::identity(p);
  if (kind == "ar1") return CovarianceSpec::ar1(p, j.at("rho").get<double>());
  if (kind == "custom") {
    const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    const auto dim = static_cast<Eigen::Index>(rows.size());
    if (dim != p) throw InvalidInput("custom covariance must be p x p");
    Eigen::MatrixXd sigma(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != dim) throw InvalidInput("custom covariance must be square");
      for (Eigen::Index k = 0; k < dim; ++k) sigma(i, k) = rows[i][k];
    }
    return CovarianceSpec::from_matrix(std::move(sigma));
  }
  throw InvalidInput("unknown covariance kind: " + kind);
}

json covariance_json(const CovarianceSpec& c) {
  switch (c.kind) {
    case CovarianceSpec::Kind::Identity:
      return {{"kind", "identity"}};
    case CovarianceSpec::Kind::Ar1:
      return {{"kind", "ar1"}, {"rho", c.rho}};
    case CovarianceSpec::Kind::Custom: {
      json rows = json::array();
      for (Eigen::Index i = 0; i < c.custom.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < c.custom.cols(); ++k) row.push_back(c.custom(i, k));
        rows.push_back(row);
      }
      return {{"kind", "custom"}, {"matrix", rows}};
    }
  }
  return {};
}

template <typename T>
T positive_integer(const json& j, const char* name) {
  if (!j.is_number_integer()) throw InvalidInput(std::string(name) + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < 1) throw InvalidInput(std::string(name) + " must be >= 1");
  return static_cast<T>(v);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double mc_std_error(double rate, std::int64_t reps) {
  if (reps <= 0) return std::nan("");
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

struct GridPoint {
  double value;
  SignalSpec signal;
};

SimReport run_grid(const SimConfig& config, const std::vector<GridPoint>& grid, const std::string& kind) {
  const Design design = config.design();
  const Covariance cov = make_covariance(design.covariance);
  const auto reps = static_cast<std::size_t>(config.reps);
  const std::size_t tasks = grid.size() * reps;

  std::vector<std::vector<MethodOutcome>> outcomes(tasks);
  std::vector<double> seconds(tasks, 0.0);
  parallel_for(tasks, config.parallelism, [&](std::size_t t) {
    const std::size_t g = t / reps;
    const std::size_t r = t % reps;
    const auto start = std::chrono::steady_clock::now();
    // Every grid point reuses the noise of replication r.
    Rng rng(config.seed, r, 0);
    const Sample x = sample_panel(design.law, cov, config.n, grid[g].signal, rng);
    outcomes[t] = evaluate_methods(x, config.methods, config.alpha, config.scale_mode);
    seconds[t] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  SimReport report;
  report.config_hash = config_hash(config);
  report.seed = config.seed;
  report.scale_mode = config.scale_mode;
  report.grid_kind = kind;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    for (std::size_t r = 0; r < reps; ++r) total += seconds[g * reps + r];
    report.mean_runtime_seconds.push_back(total / static_cast<double>(reps));
  }
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      SimRow row;
      row.method = to_string(config.methods[k]);
      row.grid_value = grid[g].value;
      std::int64_t rejections = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const MethodOutcome& o = outcomes[g * reps + r][k];
        if (!o.ok) {
          ++row.errors;
          continue;
        }
        ++row.reps;
        rejections += o.reject ? 1 : 0;
      }
      row.reject_rate = row.reps > 0 ? static_cast<double>(rejections) / static_cast<double>(row.reps) : std::nan("");
      row.std_error = mc_std_error(row.reject_rate, row.reps);
      row.flagged = static_cast<double>(row.errors) > 0.01 * static_cast<double>(config.reps);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::InMax: return "IN-MAX";
    case Method::InSum: return "IN-SUM";
    case Method::InCc: return "IN-CC";
    case Method::SsMax: return "SS-MAX";
    case Method::SsSum: return "SS-SUM";
    case Method::SsCc: return "SS-CC";
    case Method::Max: return "MAX";
    case Method::Sum: return "SUM";
    case Method::Cc: return "CC";
    case Method::InMinP: return "IN-MINP";
    case Method::SsMinP: return "SS-MINP";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  const std::string tag = upper(text);
  for (Method m : kAllMethods) {
    if (to_string(m) == tag) return m;
  }
  throw InvalidInput("unknown method tag: " + text);
}

std::vector<Method> standard_methods() {
  return {Method::InMax, Method::InSum, Method::InCc, Method::SsMax, Method::SsSum,
          Method::SsCc,  Method::Max,   Method::Sum,  Method::Cc};
}

std::vector<MethodOutcome> evaluate_methods(const Sample& x, std::span<const Method> methods, double alpha,
                                            ScaleMode mode, const SolverOptions& solver) {
  check_alpha(alpha);
  Family in{WeightExponent::inverse_norm(), "IN", {}, {}, {}};
  Family ss{WeightExponent::sign(), "SS", {}, {}, {}};
  Cached<TestResult> mean_max;
  Cached<TestResult> mean_sum;
  Cached<ScaleFit> null_scale;

  const auto estimate = [&](Family& f) {
    return f.estimate.get([&] { return weighted_hr_estimate(x, f.m, solver); });
  };
  const auto max_side = [&](Family& f) -> const TestResult* {
    const HREstimate* est = estimate(f);
    if (!est) return nullptr;
    return f.max_side.get([&] { return max_test(x, f.m, *est, alpha); });
  };
  const auto sum_side = [&](Family& f) -> const TestResult* {
    return f.sum_side.get([&] {
      if (mode == ScaleMode::SharedScale) {
        const ScaleFit* shared = null_scale.get([&] { return null_scale_estimate(x, solver); });
        if (!shared) throw NumericalFailure("shared scale unavailable: " + null_scale.error());
        return sum_test(sum_components_shared(x, f.m, shared->d_hat), f.m, alpha);
      }
      SumOptions opts;
      opts.mode = ScaleMode::ExactLeaveTwoOut;
      opts.solver = solver;
      return sum_test(x, f.m, alpha, opts);
    });
  };
  const auto error_of = [&](Family& f) {
    if (!f.estimate.error().empty()) return f.estimate.error();
    if (!f.max_side.error().empty()) return f.max_side.error();
    return f.sum_side.error();
  };
  const auto combined = [&](const TestResult* a, const TestResult* b, const std::string& tag) {
    return from_result(combine_results(*a, *b, tag, alpha).combined);
  };
  const auto min_p = [&](const TestResult* a, const TestResult* b) {
    // Reject when min(p_M, p_S) < 1 - sqrt(1 - alpha); the matching p-value
    // under independence is 1 - (1 - min)^2.
    const double lo = std::min(a->p_value, b->p_value);
    MethodOutcome o;
    o.ok = std::isfinite(lo);
    o.p_value = 1.0 - (1.0 - lo) * (1.0 - lo);
    o.reject = o.ok && o.p_value < alpha;
    if (!o.ok) o.error = "non-finite p-value";
    return o;
  };

  std::vector<MethodOutcome> out;
  out.reserve(methods.size());
  for (Method method : methods) {
    Family* fam = nullptr;
    switch (method) {
      case Method::InMax: case Method::InSum: case Method::InCc: case Method::InMinP:
        fam = &in;
        break;
      case Method::SsMax: case Method::SsSum: case Method::SsCc: case Method::SsMinP:
        fam = &ss;
        break;
      default:
        break;
    }
    switch (method) {
      case Method::InMax:
      case Method::SsMax: {
        const TestResult* r = max_side(*fam);
        out.push_back(r ? from_result(*r) : failed(error_of(*fam)));
        break;
      }
      case Method::InSum:
      case Method::SsSum: {
        const TestResult* r = sum_side(*fam);
        out.push_back(r ? from_result(*r) : failed(fam->sum_side.error()));
        break;
      }
      case Method::InCc:
      case Method::SsCc:
      case Method::InMinP:
      case Method::SsMinP: {
        const TestResult* a = max_side(*fam);
        const TestResult* b = sum_side(*fam);
        if (!a || !b) {
          out.push_back(failed(error_of(*fam)));
        } else if (method == Method::InCc || method == Method::SsCc) {
          out.push_back(combined(a, b, fam->prefix + "-CC"));
        } else {
          out.push_back(min_p(a, b));
        }
        break;
      }
      case Method::Max: {
        const TestResult* r = mean_max.get([&] { return mean_max_test(x, alpha); });
        out.push_back(r ? from_result(*r) : failed(mean_max.error()));
        break;
      }
      case Method::Sum: {
        const TestResult* r = mean_sum.get([&] { return mean_sum_test(x, alpha); });
        out.push_back(r ? from_result(*r) : failed(mean_sum.error()));
        break;
      }
      case Method::Cc: {
        const TestResult* a = mean_max.get([&] { return mean_max_test(x, alpha); });
        const TestResult* b = mean_sum.get([&] { return mean_sum_test(x, alpha); });
        if (!a || !b) {
          out.push_back(failed(!a ? mean_max.error() : mean_sum.error()));
        } else {
          out.push_back(combined(a, b, "CC"));
        }
        break;
      }
    }
  }
  return out;
}

void SimConfig::validate() const {
  if (n < 4) throw InvalidInput("n must be >= 4");
  if (p < 3) throw InvalidInput("p must be >= 3");
  if (reps < 1) throw InvalidInput("reps must be >= 1");
  check_alpha(alpha);
  if (methods.empty()) throw InvalidInput("methods must be nonempty");
  if (parallelism < 1) throw InvalidInput("parallelism must be >= 1");
  (void)WeightExponent(weight_m);
  law.validate();
  if (sweep) {
    if (sweep->values.empty()) throw InvalidInput("sweep grid must be nonempty");
    for (double v : sweep->values) {
      SignalSpec probe = signal;
      if (sweep->kind == SweepSpec::Kind::Delta) {
        probe.delta = v;
      } else {
        if (v != std::floor(v)) throw InvalidInput("s grid must hold integers");
        probe.s = static_cast<Eigen::Index>(v);
      }
      probe.validate(p);
    }
  } else {
    signal.validate(p);
  }
  for (Eigen::Index m : n_grid) {
    if (m < 4) throw InvalidInput("n_grid entries must be >= 4");
  }
}

Design SimConfig::design() const {
  if (setting) return design_for(*setting, p);
  Design d;
  d.law = law;
  d.covariance = covariance ? *covariance : CovarianceSpec::identity(p);
  return d;
}

SimConfig parse_sim_config(const json& doc) {
  try {
    check_keys(doc,
               {"setting", "law", "covariance", "n", "p", "reps", "alpha", "methods", "signal", "sweep", "seed",
                "scale_mode", "parallelism", "weight_m", "n_grid"},
               "config");
    SimConfig c;
    if (doc.contains("n")) c.n = positive_integer<Eigen::Index>(doc["n"], "n");
    if (doc.contains("p")) c.p = positive_integer<Eigen::Index>(doc["p"], "p");
    if (doc.contains("setting")) {
      if (doc.contains("law") || doc.contains("covariance")) {
        throw InvalidInput("give either setting or an explicit law/covariance, not both");
      }
      c.setting = parse_setting(doc["setting"].get<std::string>());
    }
    if (doc.contains("law")) c.law = parse_law(doc["law"]);
    if (doc.contains("covariance")) c.covariance = parse_covariance(doc["covariance"], c.p);
    if (doc.contains("reps")) c.reps = positive_integer<std::int64_t>(doc["reps"], "reps");
    if (doc.contains("alpha")) c.alpha = doc["alpha"].get<double>();
    if (doc.contains("methods")) {
      for (const auto& tag : doc["methods"]) c.methods.push_back(parse_method(tag.get<std::string>()));
    } else {
      c.methods = standard_methods();
    }
    if (doc.contains("signal")) {
      const json& s = doc["signal"];
      check_keys(s, {"delta", "s"}, "signal");
      if (s.contains("delta")) c.signal.delta = s["delta"].get<double>();
      if (s.contains("s")) {
        if (!s["s"].is_number_integer()) throw InvalidInput("signal.s must be an integer");
        c.signal.s = s["s"].get<Eigen::Index>();
      }
    }
    if (doc.contains("sweep")) {
      const json& s = doc["sweep"];
      check_keys(s, {"delta", "s"}, "sweep");
      if (s.contains("delta") == s.contains("s")) throw InvalidInput("sweep needs exactly one of delta or s");
      SweepSpec sweep;
      sweep.kind = s.contains("delta") ? SweepSpec::Kind::Delta : SweepSpec::Kind::Sparsity;
      sweep.values = (s.contains("delta") ? s["delta"] : s["s"]).get<std::vector<double>>();
      c.sweep = std::move(sweep);
    }
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) throw InvalidInput("seed must be a non-negative integer");
      c.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("scale_mode")) c.scale_mode = parse_scale_mode(doc["scale_mode"].get<std::string>());
    if (doc.contains("parallelism")) c.parallelism = positive_integer<unsigned>(doc["parallelism"], "parallelism");
    if (doc.contains("weight_m")) c.weight_m = doc["weight_m"].get<double>();
    if (doc.contains("n_grid")) {
      for (const auto& v : doc["n_grid"]) c.n_grid.push_back(positive_integer<Eigen::Index>(v, "n_grid entry"));
      if (c.n_grid.empty()) throw InvalidInput("n_grid must be nonempty");
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed config: ") + e.what());
  }
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_sim_config(doc);
}

json canonical_json(const SimConfig& c) {
  json j;
  if (c.setting) {
    j["setting"] = to_string(*c.setting);
  } else {
    j["law"] = law_json(c.law);
    j["covariance"] = covariance_json(c.design().covariance);
  }
  j["n"] = c.n;
  j["p"] = c.p;
  j["reps"] = c.reps;
  j["alpha"] = c.alpha;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["signal"] = {{"delta", c.signal.delta}, {"s", c.signal.s}};
  if (c.sweep) {
    j["sweep"] = {{c.sweep->kind == SweepSpec::Kind::Delta ? "delta" : "s", c.sweep->values}};
  }
  j["seed"] = c.seed;
  j["scale_mode"] = to_string(c.scale_mode);
  j["weight_m"] = c.weight_m;
  if (!c.n_grid.empty()) j["n_grid"] = c.n_grid;
  return j;
}

std::string config_hash(const SimConfig& config) { return fnv1a_hex(canonical_json(config).dump()); }

const SimRow& SimReport::row(const std::string& method, double grid_value) const {
  for (const SimRow& r : rows) {
    if (r.method == method && r.grid_value == grid_value) return r;
  }
  throw InvalidInput("no report row for " + method);
}

SimReport run_size_experiment(const SimConfig& config) {
  config.validate();
  if (config.sweep) throw InvalidInput("size experiment takes no sweep");
  if (config.signal.delta != 0.0) throw InvalidInput("size experiment needs signal.delta = 0");
  return run_grid(config, {GridPoint{0.0, config.signal}}, "delta");
}

SimReport run_power_experiment(const SimConfig& config) {
  config.validate();
  if (!config.sweep) throw InvalidInput("power experiment needs a sweep");
  std::vector<GridPoint> grid;
  for (double v : config.sweep->values) {
    GridPoint g{v, config.signal};
    if (config.sweep->kind == SweepSpec::Kind::Delta) {
      g.signal.delta = v;
    } else {
      g.signal.s = static_cast<Eigen::Index>(v);
    }
    grid.push_back(g);
  }
  return run_grid(config, grid, config.sweep->kind == SweepSpec::Kind::Delta ? "delta" : "s");
}

SimReport run_experiment(const SimConfig& config) {
  return config.sweep ? run_power_experiment(config) : run_size_experiment(config);
}

void write_report_csv(std::ostream& out, const SimReport& report) {
  out << "# hdloc " << kVersion << " config_hash=" << report.config_hash << " seed=" << report.seed
      << " scale_mode=" << to_string(report.scale_mode) << " grid=" << report.grid_kind << "\n";
  out << "method,grid_value,reject_rate,stderr,reps,errors\n";
  for (const SimRow& r : report.rows) {
    out << r.method << ',' << format_double(r.grid_value) << ',' << format_double(r.reject_rate) << ','
        << format_double(r.std_error) << ',' << r.reps << ',' << r.errors << "\n";
  }
}

std::vector<BahadurRow> run_bahadur_diagnostic(const SimConfig& config) {
  config.validate();
  if (config.sweep) throw InvalidInput("bahadur diagnostic takes a fixed signal, not a sweep");
  const Design design = config.design();
  const Covariance cov = make_covariance(design.covariance);
  const WeightExponent m(config.weight_m);
  const Vector theta = config.signal.theta(config.p);
  const Vector d_true = cov.sigma.diagonal();
  const std::vector<Eigen::Index> grid = config.n_grid.empty() ? std::vector<Eigen::Index>{config.n} : config.n_grid;

  std::vector<BahadurRow> rows;
  for (Eigen::Index n : grid) {
    std::vector<std::optional<double>> sup(static_cast<std::size_t>(config.reps));
    parallel_for(sup.size(), config.parallelism, [&](std::size_t r) {
      try {
        Rng rng(config.seed, r, 0);
        const Sample x = sample_panel(design.law, cov, n, config.signal, rng);
        const HREstimate est = weighted_hr_estimate(x, m);
        // D is identified up to a common factor; align the generating D with
        // the estimate's scale before comparing.
        const double c = (est.d_hat.array() / d_true.array()).mean();
        const Vector d = c * d_true;
        const Vector inv_sqrt_d = d.array().rsqrt();
        Vector signs = Vector::Zero(x.p());
        double zeta = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Vector e = (x.values().row(i).transpose() - theta).cwiseProduct(inv_sqrt_d);
          const double radius = e.norm();
          if (radius == 0.0) throw DegenerateData("observation at the generating location");
          signs += m.weight(radius) * e / radius;
          zeta += std::pow(radius, m.value() - 1.0);
        }
        zeta /= static_cast<double>(n);
        const double sn = std::sqrt(static_cast<double>(n));
        const Vector cn = sn * (est.theta_hat - theta).cwiseProduct(est.d_hat.array().rsqrt().matrix()) -
                          signs / (sn * zeta);
        sup[r] = cn.cwiseAbs().maxCoeff();
      } catch (const Error&) {
        sup[r].reset();
      }
    });
    BahadurRow row;
    row.n = n;
    std::vector<double> values;
    for (const auto& v : sup) {
      if (v) values.push_back(*v);
      else ++row.errors;
    }
    row.reps = static_cast<std::int64_t>(values.size());
    if (values.empty()) throw NumericalFailure("bahadur diagnostic: every replication failed");
    row.median = median(values);
    row.p90 = quantile(values, 0.9);
    rows.push_back(row);
  }
  return rows;
}

void write_bahadur_csv(std::ostream& out, const std::vector<BahadurRow>& rows) {
  out << "n,median_sup_norm,p90_sup_norm,reps,errors\n";
  for (const BahadurRow& r : rows) {
    out << r.n << ',' << format_double(r.median) << ',' << format_double(r.p90) << ',' << r.reps << ','
        << r.errors << "\n";
  }
}

GumbelQQ run_gumbel_qq(const SimConfig& config) {
  config.validate();
  if (config.sweep || config.signal.delta != 0.0) throw InvalidInput("gumbel-qq needs delta = 0 and no sweep");
  const Design design = config.design();
  const Covariance cov = make_covariance(design.covariance);
  const WeightExponent m(config.weight_m);

  std::vector<std::optional<double>> stats(static_cast<std::size_t>(config.reps));
  parallel_for(stats.size(), config.parallelism, [&](std::size_t r) {
    try {
      Rng rng(config.seed, r, 0);
      const Sample x = sample_panel(design.law, cov, config.n, config.signal, rng);
      stats[r] = t_max_statistic(x, m);
    } catch (const Error&) {
      stats[r].reset();
    }
  });

  GumbelQQ qq;
  std::vector<double> values;
  for (const auto& s : stats) {
    if (s) values.push_back(*s);
    else ++qq.errors;
  }
  qq.reps = static_cast<std::int64_t>(values.size());
  if (values.empty()) throw NumericalFailure("gumbel-qq: every replication failed");
  qq.levels = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
  for (double u : qq.levels) {
    qq.empirical.push_back(quantile(values, u));
    qq.theoretical.push_back(gumbel_quantile(1.0 - u));
  }
  qq.max_cdf_gap = ks_distance(values, [](double t) { return gumbel_cdf(t); });
  return qq;
}

void write_gumbel_qq_csv(std::ostream& out, const GumbelQQ& qq) {
  out << "# max_cdf_gap=" << format_double(qq.max_cdf_gap) << " reps=" << qq.reps << " errors=" << qq.errors
      << "\n";
  out << "level,empirical,theoretical\n";
  for (std::size_t k = 0; k < qq.levels.size(); ++k) {
    out << format_double(qq.levels[k]) << ',' << format_double(qq.empirical[k]) << ','
        << format_double(qq.theoretical[k]) << "\n";
  }
}

IndependenceReport run_independence_diagnostic(const SimConfig& config) {
  config.validate();
  if (config.sweep) throw InvalidInput("independence diagnostic takes a fixed signal, not a sweep");
  return joint_independence_diagnostic(config.design(), config.n, WeightExponent(config.weight_m), config.reps,
                                       config.seed, config.signal, config.parallelism);
}

std::vector<Eigen::Index> draw_without_replacement(Eigen::Index t, Eigen::Index k, Rng& rng) {
  if (k < 0 || k > t) throw InvalidInput("cannot draw that many rows without replacement");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(t));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, t - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

SubsampleTable run_subsample_experiment(const Sample& panel, SubsampleOptions options) {
  check_alpha(options.alpha);
  if (options.reps < 1) throw InvalidInput("reps must be >= 1");
  if (options.sizes.empty()) {
    for (Eigen::Index k = 3; k <= 8; ++k) options.sizes.push_back(52 * k);
  }
  if (options.methods.empty()) options.methods = standard_methods();
  for (Eigen::Index s : options.sizes) {
    if (s < 4 || s > panel.n()) throw InvalidInput("subsample size must lie in [4, T]");
  }

  const auto reps = static_cast<std::size_t>(options.reps);
  const std::size_t tasks = options.sizes.size() * reps;
  std::vector<std::vector<MethodOutcome>> outcomes(tasks);
  parallel_for(tasks, options.workers, [&](std::size_t t) {
    const std::size_t k = t / reps;
    const std::size_t r = t % reps;
    Rng rng(options.seed, r, 1 + k);
    const auto rows = draw_without_replacement(panel.n(), options.sizes[k], rng);
    Panel sub(static_cast<Eigen::Index>(rows.size()), panel.p());
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = panel.values().row(rows[i]);
    outcomes[t] = evaluate_methods(Sample(std::move(sub)), options.methods, options.alpha, options.scale_mode);
  });

  SubsampleTable table;
  table.sizes = options.sizes;
  table.reps = options.reps;
  for (std::size_t j = 0; j < options.methods.size(); ++j) {
    table.methods.push_back(to_string(options.methods[j]));
    std::vector<double> rates;
    std::vector<std::int64_t> errs;
    for (std::size_t k = 0; k < options.sizes.size(); ++k) {
      std::int64_t valid = 0, rejected = 0, failed_reps = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const MethodOutcome& o = outcomes[k * reps + r][j];
        if (!o.ok) {
          ++failed_reps;
          continue;
        }
        ++valid;
        rejected += o.reject ? 1 : 0;
      }
      rates.push_back(valid > 0 ? static_cast<double>(rejected) / static_cast<double>(valid) : std::nan(""));
      errs.push_back(failed_reps);
    }
    table.rates.push_back(std::move(rates));
    table.errors.push_back(std::move(errs));
  }
  return table;
}

void write_subsample_csv(std::ostream& out, const SubsampleTable& table) {
  out << "method";
  for (Eigen::Index s : table.sizes) out << ",n=" << s;
  out << "\n";
  for (std::size_t j = 0; j < table.methods.size(); ++j) {
    out << table.methods[j];
    for (double r : table.rates[j]) out << ',' << format_double(r);
    out << "\n";
  }
}

}  // namespace hdloc

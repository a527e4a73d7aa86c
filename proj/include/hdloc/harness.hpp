#pragma once

#include "hdloc/combine.hpp"
#include "hdloc/distributions.hpp"
#include "hdloc/sample.hpp"
#include "hdloc/sum_test.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hdloc {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { InMax, InSum, InCc, SsMax, SsSum, SsCc, Max, Sum, Cc, InMinP, SsMinP };

std::string to_string(Method m);
// Accepts the tag in either case, e.g. "IN-CC" or "in-cc".
Method parse_method(const std::string& text);
// The nine tests of the comparison tables, in display order.
std::vector<Method> standard_methods();

struct MethodOutcome {
  bool ok = false;
  bool reject = false;
  double p_value = 1.0;
  std::string error;
};

// Runs the requested methods on one sample. HR estimates and sum-side
// components are computed once and shared between the methods that need
// them. Failures are captured per method and never thrown.
std::vector<MethodOutcome> evaluate_methods(const Sample& x, std::span<const Method> methods, double alpha,
                                            ScaleMode mode, const SolverOptions& solver = {});

struct SweepSpec {
  enum class Kind { Delta, Sparsity };
  Kind kind = Kind::Delta;
  std::vector<double> values;
};

struct SimConfig {
  std::optional<Setting> setting;
  RadialLaw law;
  std::optional<CovarianceSpec> covariance;  // identity when absent and no setting
  Eigen::Index n = 80;
  Eigen::Index p = 200;
  std::int64_t reps = 1000;
  double alpha = 0.05;
  std::vector<Method> methods;
  SignalSpec signal;
  std::optional<SweepSpec> sweep;
  std::uint64_t seed = 1;
  ScaleMode scale_mode = ScaleMode::SharedScale;
  unsigned parallelism = 1;
  double weight_m = -1.0;               // diagnostics only
  std::vector<Eigen::Index> n_grid;     // bahadur diagnostic; defaults to {n}

  void validate() const;
  Design design() const;
};

SimConfig parse_sim_config(const nlohmann::json& doc);
SimConfig load_sim_config(const std::filesystem::path& path);
// Canonical form used for hashing; parallelism is omitted so that the hash
// and the report do not depend on the worker count.
nlohmann::json canonical_json(const SimConfig& config);
std::string config_hash(const SimConfig& config);

struct SimRow {
  std::string method;
  double grid_value = 0.0;
  double reject_rate = 0.0;
  double std_error = 0.0;
  std::int64_t reps = 0;     // replications with a valid outcome
  std::int64_t errors = 0;
  bool flagged = false;      // more than 1% of replications errored
};

struct SimReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  ScaleMode scale_mode = ScaleMode::SharedScale;
  std::string grid_kind;  // "delta" or "s"
  std::vector<SimRow> rows;
  std::vector<double> mean_runtime_seconds;  // per grid point, not written to CSV

  const SimRow& row(const std::string& method, double grid_value) const;
};

// Size experiment; requires signal.delta == 0 and no sweep.
SimReport run_size_experiment(const SimConfig& config);
// Power curves over config.sweep.
SimReport run_power_experiment(const SimConfig& config);
// Dispatches on the presence of a sweep.
SimReport run_experiment(const SimConfig& config);

void write_report_csv(std::ostream& out, const SimReport& report);

struct BahadurRow {
  Eigen::Index n = 0;
  double median = 0.0;
  double p90 = 0.0;
  std::int64_t reps = 0;
  std::int64_t errors = 0;
};

// Sup-norm of C_n = sqrt(n) D^-1/2 (theta_hat - theta) - n^-1/2 zeta_{m-1}^-1 sum w(R_i) U_i,
// with R_i, U_i taken at the generating theta and D = diag(Sigma).
std::vector<BahadurRow> run_bahadur_diagnostic(const SimConfig& config);
void write_bahadur_csv(std::ostream& out, const std::vector<BahadurRow>& rows);

struct GumbelQQ {
  std::vector<double> levels;
  std::vector<double> empirical;
  std::vector<double> theoretical;
  double max_cdf_gap = 0.0;
  std::int64_t reps = 0;
  std::int64_t errors = 0;
};

GumbelQQ run_gumbel_qq(const SimConfig& config);
void write_gumbel_qq_csv(std::ostream& out, const GumbelQQ& qq);

IndependenceReport run_independence_diagnostic(const SimConfig& config);

struct SubsampleTable {
  std::vector<Eigen::Index> sizes;
  std::vector<std::string> methods;
  // rates[method][size]
  std::vector<std::vector<double>> rates;
  std::vector<std::vector<std::int64_t>> errors;
  std::int64_t reps = 0;
};

struct SubsampleOptions {
  std::vector<Eigen::Index> sizes;  // defaults to 52K, K = 3..8
  std::int64_t reps = 100;
  double alpha = 0.05;
  std::vector<Method> methods;      // defaults to the standard nine
  std::uint64_t seed = 1;
  ScaleMode scale_mode = ScaleMode::SharedScale;
  unsigned workers = 1;
};

// Row indices 0..t-1 drawn without replacement.
std::vector<Eigen::Index> draw_without_replacement(Eigen::Index t, Eigen::Index k, Rng& rng);

SubsampleTable run_subsample_experiment(const Sample& panel, SubsampleOptions options);
void write_subsample_csv(std::ostream& out, const SubsampleTable& table);

}  // namespace hdloc

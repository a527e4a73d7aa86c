#include "hdloc/are.hpp"
#include "hdloc/combine.hpp"
#include "hdloc/csv_io.hpp"
#include "hdloc/errors.hpp"
#include "hdloc/harness.hpp"
#include "hdloc/max_test.hpp"
#include "hdloc/sum_test.hpp"
#include "hdloc/timeseries.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hdloc::InvalidInput("cannot write " + path);
  return out;
}

// Writes to `path`, or stdout when it is empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
  } else {
    std::ofstream out = open_output(path);
    write(out);
  }
}

json result_json(const hdloc::TestResult& r) {
  return {{"method", r.method},   {"statistic", r.statistic}, {"p_value", r.p_value},
          {"alpha", r.alpha},     {"reject", r.reject},       {"warnings", r.warnings}};
}

struct TestArgs {
  std::string input;
  std::string method;
  double alpha = 0.05;
  std::optional<double> weight_m;
  bool exact = false;
  bool shared = false;
};

int run_test(const TestArgs& a) {
  std::string tag = a.method;
  std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::tolower(c); });
  std::string family = tag;
  std::optional<double> m;
  if (tag.rfind("in-", 0) == 0) {
    m = -1.0;
    family = tag.substr(3);
  } else if (tag.rfind("ss-", 0) == 0) {
    m = 0.0;
    family = tag.substr(3);
  }
  if (family != "max" && family != "sum" && family != "cc") throw hdloc::InvalidInput("unknown method: " + a.method);
  if (a.weight_m) {
    if (!m) throw hdloc::InvalidInput("--weight-m applies only to in-/ss- methods");
    m = *a.weight_m;
  }
  if (a.exact && a.shared) throw hdloc::InvalidInput("--exact and --shared-scale are exclusive");

  const hdloc::CsvTable table = hdloc::read_csv_table(a.input);
  const hdloc::Sample x(table.values, table.header);
  hdloc::SumOptions opts;
  opts.mode = a.shared ? hdloc::ScaleMode::SharedScale : hdloc::ScaleMode::ExactLeaveTwoOut;

  json out;
  if (!m) {
    if (family == "max") out = result_json(hdloc::mean_max_test(x, a.alpha));
    if (family == "sum") out = result_json(hdloc::mean_sum_test(x, a.alpha));
    if (family == "cc") {
      const hdloc::CombinedResult cc = hdloc::mean_cc_test(x, a.alpha);
      out = result_json(cc.combined);
      out["p_max"] = cc.p_max;
      out["p_sum"] = cc.p_sum;
    }
  } else {
    const hdloc::WeightExponent w(*m);
    if (family == "max") {
      out = result_json(hdloc::max_test(x, w, a.alpha));
    } else if (family == "sum") {
      out = result_json(hdloc::sum_test(x, w, a.alpha, opts));
      out["scale_mode"] = hdloc::to_string(opts.mode);
    } else {
      const hdloc::CombinedResult cc = hdloc::cc_test(x, w, a.alpha, opts);
      out = result_json(cc.combined);
      out["p_max"] = cc.p_max;
      out["p_sum"] = cc.p_sum;
      out["scale_mode"] = hdloc::to_string(opts.mode);
    }
    out["weight_m"] = *m;
  }
  out["n"] = x.n();
  out["p"] = x.p();
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  bool exact = false;
  std::optional<unsigned> workers;
};

int run_simulate(const SimulateArgs& a) {
  hdloc::SimConfig config = hdloc::load_sim_config(a.config);
  if (a.exact) config.scale_mode = hdloc::ScaleMode::ExactLeaveTwoOut;
  if (a.workers) config.parallelism = std::max(1u, *a.workers);
  const hdloc::SimReport report = hdloc::run_experiment(config);
  emit(a.out, [&](std::ostream& os) { hdloc::write_report_csv(os, report); });
  for (const hdloc::SimRow& r : report.rows) {
    if (r.flagged) {
      std::cerr << "warning: " << r.method << " at " << report.grid_kind << "=" << r.grid_value << " errored in "
                << r.errors << " replications\n";
    }
  }
  for (std::size_t g = 0; g < report.mean_runtime_seconds.size(); ++g) {
    std::cerr << "grid point " << g << ": mean replication time " << report.mean_runtime_seconds[g] << " s\n";
  }
  return 0;
}

struct AreArgs {
  std::string dist;
  double df = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;
  std::int64_t mc_draws = 0;
  std::uint64_t seed = 20240611;
  std::string format = "text";
};

int run_are(const AreArgs& a) {
  std::vector<hdloc::RadialLaw> laws;
  if (a.dist.empty()) {
    laws = hdloc::reference_laws();
  } else if (a.dist == "normal") {
    laws.push_back(hdloc::RadialLaw::normal());
  } else if (a.dist == "t") {
    laws.push_back(hdloc::RadialLaw::student_t(a.df));
  } else if (a.dist == "mixture") {
    laws.push_back(hdloc::RadialLaw::mixture(a.gamma, a.sigma));
  } else {
    throw hdloc::InvalidInput("unknown distribution: " + a.dist);
  }
  if (a.mc_draws < 0) throw hdloc::InvalidInput("--mc-draws must be >= 0");
  const auto reports = hdloc::are_table(laws, a.mc_draws, a.seed);
  if (a.format == "csv") {
    hdloc::write_are_csv(std::cout, reports);
  } else {
    hdloc::write_are_text(std::cout, reports);
  }
  return 0;
}

struct PrefilterArgs {
  std::string input;
  std::string out;
  std::string report;
  std::string rf_column;
  int lags = hdloc::kDefaultLjungBoxLags;
  double alpha = 0.05;
};

int run_prefilter(const PrefilterArgs& a) {
  hdloc::CsvTable table = hdloc::read_csv_table(a.input);
  hdloc::SeriesPanel panel;
  if (!a.rf_column.empty()) {
    const auto it = std::find(table.header.begin(), table.header.end(), a.rf_column);
    if (it == table.header.end()) throw hdloc::InvalidInput("no column named " + a.rf_column);
    const auto rf = static_cast<Eigen::Index>(it - table.header.begin());
    panel.risk_free = table.values.col(rf);
    hdloc::Panel rest(table.values.rows(), table.values.cols() - 1);
    for (Eigen::Index j = 0, k = 0; j < table.values.cols(); ++j) {
      if (j != rf) rest.col(k++) = table.values.col(j);
    }
    table.header.erase(it);
    table.values = std::move(rest);
  }
  panel.returns = std::move(table.values);
  panel.labels = std::move(table.header);

  const auto [retained, report] = hdloc::prefilter_panel(panel, a.lags, a.alpha);
  emit(a.out, [&](std::ostream& os) { hdloc::write_csv_table(os, retained.labels, retained.returns); });
  const auto write_report = [&](std::ostream& os) {
    os << "label,q,p_value,kept,degenerate\n";
    for (const auto& e : report.entries) {
      os << e.label << ',' << hdloc::format_double(e.q) << ',' << hdloc::format_double(e.p_value) << ','
         << (e.kept ? 1 : 0) << ',' << (e.degenerate ? 1 : 0) << "\n";
    }
  };
  if (!a.report.empty()) emit(a.report, write_report);
  std::cerr << "retained " << report.kept_count() << " of " << report.entries.size() << " series (lags "
            << report.lags << ", alpha " << report.alpha << ")\n";
  for (const auto& e : report.entries) {
    if (e.degenerate) std::cerr << "dropped constant series " << e.label << "\n";
  }
  return 0;
}

struct DiagnoseArgs {
  std::string kind;
  std::string config;
  std::string out;
};

int run_diagnose(const DiagnoseArgs& a) {
  const hdloc::SimConfig config = hdloc::load_sim_config(a.config);
  if (a.kind == "bahadur") {
    const auto rows = hdloc::run_bahadur_diagnostic(config);
    emit(a.out, [&](std::ostream& os) { hdloc::write_bahadur_csv(os, rows); });
  } else if (a.kind == "gumbel-qq") {
    const auto qq = hdloc::run_gumbel_qq(config);
    emit(a.out, [&](std::ostream& os) { hdloc::write_gumbel_qq_csv(os, qq); });
  } else {
    const auto r = hdloc::run_independence_diagnostic(config);
    emit(a.out, [&](std::ostream& os) {
      os << "reps,errors,correlation,ks_p_cc\n"
         << r.reps << ',' << r.errors << ',' << hdloc::format_double(r.correlation) << ','
         << hdloc::format_double(r.ks_p_cc) << "\n";
    });
  }
  return 0;
}

struct SubsampleArgs {
  std::string input;
  std::string out;
  std::vector<Eigen::Index> sizes;
  std::vector<std::string> methods;
  std::int64_t reps = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool exact = false;
};

int run_subsample(const SubsampleArgs& a) {
  const hdloc::CsvTable table = hdloc::read_csv_table(a.input);
  const hdloc::Sample panel(table.values, table.header);
  hdloc::SubsampleOptions opts;
  opts.sizes = a.sizes;
  opts.reps = a.reps;
  opts.alpha = a.alpha;
  opts.seed = a.seed;
  opts.workers = std::max(1u, a.workers);
  opts.scale_mode = a.exact ? hdloc::ScaleMode::ExactLeaveTwoOut : hdloc::ScaleMode::SharedScale;
  for (const auto& m : a.methods) opts.methods.push_back(hdloc::parse_method(m));
  const auto result = hdloc::run_subsample_experiment(panel, opts);
  emit(a.out, [&](std::ostream& os) {
    os << "# reps=" << result.reps << " seed=" << a.seed << " scale_mode=" << hdloc::to_string(opts.scale_mode)
       << "\n";
    hdloc::write_subsample_csv(os, result);
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted spatial-sign tests for high-dimensional location"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hdloc::kVersion);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Test H0: theta = 0 on a data CSV");
  test->add_option("--input", test_args.input, "CSV with a header row of variable names")->required();
  test->add_option("--method", test_args.method, "in-cc|in-max|in-sum|ss-max|ss-sum|ss-cc|max|sum|cc")->required();
  test->add_option("--alpha", test_args.alpha, "Significance level")->capture_default_str();
  test->add_option("--weight-m", test_args.weight_m, "Weight exponent m <= 1 for in-/ss- methods");
  test->add_flag("--exact", test_args.exact, "Leave-two-out scale for the sum side (default)");
  test->add_flag("--shared-scale", test_args.shared, "Full-sample scale for the sum side");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a size or power experiment");
  simulate->add_option("--config", sim_args.config, "JSON experiment description")->required();
  simulate->add_option("--out", sim_args.out, "Report CSV (stdout when omitted)");
  simulate->add_flag("--exact", sim_args.exact, "Leave-two-out scale for the sum tests");
  simulate->add_option("--workers", sim_args.workers, "Override the configured parallelism");

  AreArgs are_args;
  auto* are = app.add_subcommand("are", "Asymptotic relative efficiencies");
  are->add_option("--dist", are_args.dist, "normal|t|mixture (all tabulated laws when omitted)")
      ->check(CLI::IsMember({"normal", "t", "mixture"}));
  are->add_option("--df", are_args.df, "Degrees of freedom for t");
  are->add_option("--gamma", are_args.gamma, "Contamination weight for mixture");
  are->add_option("--sigma", are_args.sigma, "Contamination scale for mixture");
  are->add_option("--mc-draws", are_args.mc_draws, "Monte Carlo draws (0 = closed form)");
  are->add_option("--seed", are_args.seed, "Monte Carlo seed");
  are->add_option("--format", are_args.format, "text|csv")->check(CLI::IsMember({"text", "csv"}));

  PrefilterArgs pre_args;
  auto* prefilter = app.add_subcommand("prefilter", "Drop autocorrelated series by Ljung-Box");
  prefilter->add_option("--input", pre_args.input, "T x p returns CSV")->required();
  prefilter->add_option("--out", pre_args.out, "Retained excess-return CSV")->required();
  prefilter->add_option("--lags", pre_args.lags, "Ljung-Box lags")->capture_default_str();
  prefilter->add_option("--alpha", pre_args.alpha, "Level of the per-series test")->capture_default_str();
  prefilter->add_option("--rf-column", pre_args.rf_column, "Risk-free column subtracted from every series");
  prefilter->add_option("--report", pre_args.report, "Per-series statistics CSV");

  DiagnoseArgs diag_args;
  auto* diagnose = app.add_subcommand("diagnose", "Bahadur, Gumbel QQ and independence diagnostics");
  diagnose->add_option("kind", diag_args.kind, "bahadur|gumbel-qq|independence")
      ->required()
      ->check(CLI::IsMember({"bahadur", "gumbel-qq", "independence"}));
  diagnose->add_option("--config", diag_args.config, "JSON experiment description")->required();
  diagnose->add_option("--out", diag_args.out, "Output CSV (stdout when omitted)");

  SubsampleArgs sub_args;
  auto* subsample = app.add_subcommand("subsample", "Rejection rates on row subsamples of a panel");
  subsample->add_option("--input", sub_args.input, "Excess-return CSV, e.g. the prefilter output")->required();
  subsample->add_option("--out", sub_args.out, "Rate table CSV (stdout when omitted)");
  subsample->add_option("--sizes", sub_args.sizes, "Subsample sizes (default 52K, K = 3..8)");
  subsample->add_option("--methods", sub_args.methods, "Method tags (default: the nine standard tests)");
  subsample->add_option("--reps", sub_args.reps, "Draws per size")->capture_default_str();
  subsample->add_option("--alpha", sub_args.alpha, "Significance level")->capture_default_str();
  subsample->add_option("--seed", sub_args.seed, "Master seed")->capture_default_str();
  subsample->add_option("--workers", sub_args.workers, "Worker threads")->capture_default_str();
  subsample->add_flag("--exact", sub_args.exact, "Leave-two-out scale for the sum tests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*test) return run_test(test_args);
    if (*simulate) return run_simulate(sim_args);
    if (*are) return run_are(are_args);
    if (*prefilter) return run_prefilter(pre_args);
    if (*diagnose) return run_diagnose(diag_args);
    if (*subsample) return run_subsample(sub_args);
  } catch (const hdloc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

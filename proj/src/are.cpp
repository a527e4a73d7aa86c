#include "hdloc/are.hpp"

#include "hdloc/errors.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace hdloc {

namespace {

constexpr double kTableTolerance = 0.01;

bool same_law(const RadialLaw& a, const RadialLaw& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case RadialLaw::Kind::Normal:
      return true;
    case RadialLaw::Kind::StudentT:
      return a.df == b.df;
    case RadialLaw::Kind::Mixture:
      return a.gamma == b.gamma && a.sigma == b.sigma;
  }
  return false;
}

void flag_against_reference(AREReport& r) {
  r.reference = reference_are(r.law);
  if (!r.reference) return;
  const auto off = [&](double value, double ref, double se) {
    const double tol = r.mode == AreMode::ClosedForm ? kTableTolerance : std::max(kTableTolerance, 3.0 * se);
    return std::abs(value - ref) > tol;
  };
  const AreTriple se = r.mc_stderr.value_or(AreTriple{});
  r.discrepancy_in_vs_max = off(r.value.in_vs_max, r.reference->in_vs_max, se.in_vs_max);
  r.discrepancy_in_vs_ss = off(r.value.in_vs_ss, r.reference->in_vs_ss, se.in_vs_ss);
  r.discrepancy_ss_vs_max = off(r.value.ss_vs_max, r.reference->ss_vs_max, se.ss_vs_max);
}

std::string mode_name(AreMode mode) { return mode == AreMode::ClosedForm ? "closed-form" : "mc"; }

}  // namespace

double are_weighted_pair(const RadialLaw& law, WeightExponent m) {
  const double mv = m.value();
  const double lower = radial_moment(law, mv - 1.0);
  return radial_moment(law, -2.0) * radial_moment(law, 2.0 * mv) / (lower * lower);
}

AreTriple are_closed_form(const RadialLaw& law) {
  const double inv2 = radial_moment(law, -2.0);
  const double inv1 = radial_moment(law, -1.0);
  const double sq = radial_moment(law, 2.0);
  return {inv2 * sq, inv2 / (inv1 * inv1), sq * inv1 * inv1};
}

AREReport are_monte_carlo(const RadialLaw& law, std::int64_t draws, std::uint64_t seed) {
  law.validate();
  if (draws < 2) throw InvalidInput("Monte Carlo ARE needs at least 2 draws");
  radial_moment(law, 2.0);  // existence check

  // Running means and co-moments of (v^-2, v^-1, v^2).
  Rng rng(seed, 0, 2);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d comoment = Eigen::Matrix3d::Zero();
  for (std::int64_t i = 0; i < draws; ++i) {
    const double v = draw_mixing(law, rng);
    const double v2 = v * v;
    const Eigen::Vector3d y(1.0 / v2, 1.0 / v, v2);
    const Eigen::Vector3d delta = y - mean;
    mean += delta / static_cast<double>(i + 1);
    comoment += delta * (y - mean).transpose();
  }
  const double nd = static_cast<double>(draws);
  const Eigen::Matrix3d cov_of_mean = comoment / (nd - 1.0) / nd;

  const double a = mean[0], b = mean[1], c = mean[2];
  AREReport r;
  r.law = law;
  r.mode = AreMode::MonteCarlo;
  r.value = {a * c, a / (b * b), c * b * b};
  // Delta method with gradients in (a, b, c).
  const auto se = [&](const Eigen::Vector3d& grad) { return std::sqrt(grad.dot(cov_of_mean * grad)); };
  r.mc_stderr = AreTriple{se({c, 0.0, a}), se({1.0 / (b * b), -2.0 * a / (b * b * b), 0.0}),
                          se({0.0, 2.0 * b * c, b * b})};
  flag_against_reference(r);
  return r;
}

std::optional<AreTriple> reference_are(const RadialLaw& law) {
  struct Row {
    RadialLaw law;
    AreTriple values;
  };
  static const std::vector<Row> table = {
      {RadialLaw::student_t(3), {3.00, 1.18, 2.54}},
      {RadialLaw::student_t(4), {2.00, 1.13, 1.76}},
      {RadialLaw::student_t(5), {1.67, 1.11, 1.51}},
      {RadialLaw::student_t(6), {1.50, 1.09, 1.38}},
      {RadialLaw::normal(), {1.00, 1.00, 1.00}},
      {RadialLaw::mixture(0.2, 3), {2.25, 1.09, 2.06}},
      {RadialLaw::mixture(0.2, 10), {16.68, 1.19, 13.98}},
      {RadialLaw::mixture(0.5, 10), {25.50, 1.67, 15.27}},
  };
  for (const Row& row : table) {
    if (same_law(row.law, law)) return row.values;
  }
  return std::nullopt;
}

std::vector<RadialLaw> reference_laws() {
  return {RadialLaw::student_t(3), RadialLaw::student_t(4),     RadialLaw::student_t(5),
          RadialLaw::student_t(6), RadialLaw::normal(),         RadialLaw::mixture(0.2, 3),
          RadialLaw::mixture(0.2, 10), RadialLaw::mixture(0.5, 10)};
}

std::vector<AREReport> are_table(const std::vector<RadialLaw>& laws, std::int64_t mc_draws,
                                 std::uint64_t seed) {
  std::vector<AREReport> out;
  out.reserve(laws.size());
  for (std::size_t i = 0; i < laws.size(); ++i) {
    if (mc_draws > 0) {
      out.push_back(are_monte_carlo(laws[i], mc_draws, seed + i));
    } else {
      AREReport r;
      r.law = laws[i];
      r.value = are_closed_form(laws[i]);
      flag_against_reference(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_are_csv(std::ostream& os, const std::vector<AREReport>& reports) {
  os << "law,mode,comparison,value,stderr,reference,discrepancy\n";
  const auto cell = [](std::optional<double> v) {
    std::ostringstream s;
    if (v) s << std::setprecision(10) << *v;
    return s.str();
  };
  for (const AREReport& r : reports) {
    const std::array<std::pair<const char*, double AreTriple::*>, 3> rows{
        {{"IN-MAX,MAX", &AreTriple::in_vs_max},
         {"IN-MAX,SS-MAX", &AreTriple::in_vs_ss},
         {"SS-MAX,MAX", &AreTriple::ss_vs_max}}};
    const std::array<bool, 3> flags{r.discrepancy_in_vs_max, r.discrepancy_in_vs_ss,
                                    r.discrepancy_ss_vs_max};
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto member = rows[k].second;
      os << '"' << r.law.label() << "\"," << mode_name(r.mode) << ",\"ARE(" << rows[k].first << ")\","
         << cell(r.value.*member) << ','
         << cell(r.mc_stderr ? std::optional<double>((*r.mc_stderr).*member) : std::nullopt) << ','
         << cell(r.reference ? std::optional<double>((*r.reference).*member) : std::nullopt) << ','
         << (flags[k] ? "FLAG" : "") << '\n';
    }
  }
}

void write_are_text(std::ostream& os, const std::vector<AREReport>& reports) {
  os << std::left << std::setw(14) << "law" << std::setw(13) << "mode" << std::right << std::setw(18)
     << "ARE(IN-MAX,MAX)" << std::setw(20) << "ARE(IN-MAX,SS-MAX)" << std::setw(18) << "ARE(SS-MAX,MAX)"
     << '\n';
  os << std::fixed << std::setprecision(4);
  const auto entry = [](double value, std::optional<double> se) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << value;
    if (se) s << " +/- " << std::setprecision(4) << *se;
    return s.str();
  };
  for (const AREReport& r : reports) {
    const auto se = r.mc_stderr;
    os << std::left << std::setw(14) << r.law.label() << std::setw(13) << mode_name(r.mode) << std::right
       << std::setw(18) << entry(r.value.in_vs_max, se ? std::optional(se->in_vs_max) : std::nullopt)
       << std::setw(20) << entry(r.value.in_vs_ss, se ? std::optional(se->in_vs_ss) : std::nullopt)
       << std::setw(18) << entry(r.value.ss_vs_max, se ? std::optional(se->ss_vs_max) : std::nullopt)
       << '\n';
    if (r.reference) {
      os << std::left << std::setw(14) << "" << std::setw(13) << "reference" << std::right << std::setw(18)
         << r.reference->in_vs_max << std::setw(20) << r.reference->in_vs_ss << std::setw(18)
         << r.reference->ss_vs_max << '\n';
      if (r.any_discrepancy()) {
        os << "  ** discrepancy vs reference table:";
        if (r.discrepancy_in_vs_max) os << " ARE(IN-MAX,MAX)";
        if (r.discrepancy_in_vs_ss) os << " ARE(IN-MAX,SS-MAX)";
        if (r.discrepancy_ss_vs_max) os << " ARE(SS-MAX,MAX)";
        os << '\n';
      }
    }
  }
  os.unsetf(std::ios::fixed);
}

MonteCarloEstimate finite_p_are_in_vs_max(const RadialLaw& law, Eigen::Index p, std::int64_t draws,
                                          std::uint64_t seed) {
  law.validate();
  if (p < 3) throw InvalidInput("finite-p ARE needs p >= 3");
  if (draws < 2) throw InvalidInput("need at least 2 draws");
  Rng rng(seed, static_cast<std::uint64_t>(p), 3);
  std::normal_distribution<double> gauss;
  double mean_inv = 0.0, mean_sq = 0.0;
  double m2_inv = 0.0, m2_sq = 0.0, c_cross = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const double v = draw_mixing(law, rng);
    double ss = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double w = gauss(rng);
      ss += w * w;
    }
    const double r2 = v * v * ss;
    const double a = 1.0 / r2;
    const double da = a - mean_inv;
    const double db = r2 - mean_sq;
    const double k = static_cast<double>(i + 1);
    mean_inv += da / k;
    mean_sq += db / k;
    m2_inv += da * (a - mean_inv);
    m2_sq += db * (r2 - mean_sq);
    c_cross += da * (r2 - mean_sq);
  }
  const double nd = static_cast<double>(draws);
  const double var_a = m2_inv / (nd - 1.0) / nd;
  const double var_b = m2_sq / (nd - 1.0) / nd;
  const double cov_ab = c_cross / (nd - 1.0) / nd;
  MonteCarloEstimate out;
  out.value = mean_inv * mean_sq;
  out.std_error = std::sqrt(mean_sq * mean_sq * var_a + mean_inv * mean_inv * var_b +
                            2.0 * mean_inv * mean_sq * cov_ab);
  return out;
}

}  // namespace hdloc

#pragma once

#include "hdloc/distributions.hpp"
#include "hdloc/sample.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hdloc {

// ARE(T^(-1), T^(m)) = E(v^{-2}) E(v^{2m}) / E(v^{m-1})^2 in the large-p
// mixing limit R^2 / p -> v^2.
double are_weighted_pair(const RadialLaw& law, WeightExponent m);

struct AreTriple {
  double in_vs_max = 0.0;  // E(v^-2) E(v^2)
  double in_vs_ss = 0.0;   // E(v^-2) / E(v^-1)^2
  double ss_vs_max = 0.0;  // E(v^2) E(v^-1)^2
};

enum class AreMode { ClosedForm, MonteCarlo };

struct AREReport {
  RadialLaw law;
  AreMode mode = AreMode::ClosedForm;
  AreTriple value;
  std::optional<AreTriple> mc_stderr;  // delta-method standard errors (MC only)
  std::optional<AreTriple> reference;  // tabulated values, when the law has one
  // Per entry: |value - reference| > 0.01 (closed form) or > 3 stderr (MC).
  bool discrepancy_in_vs_max = false;
  bool discrepancy_in_vs_ss = false;
  bool discrepancy_ss_vs_max = false;

  bool any_discrepancy() const {
    return discrepancy_in_vs_max || discrepancy_in_vs_ss || discrepancy_ss_vs_max;
  }
};

AreTriple are_closed_form(const RadialLaw& law);

// Moments E(v^-2), E(v^-1), E(v^2) from one stream of `draws` mixing draws.
AREReport are_monte_carlo(const RadialLaw& law, std::int64_t draws, std::uint64_t seed);

// Tabulated reference values for t(3..6), normal, MN(0.2,3), MN(0.2,10), MN(0.5,10).
std::optional<AreTriple> reference_are(const RadialLaw& law);

// The eight laws of the reference table, in column order.
std::vector<RadialLaw> reference_laws();

// One report per law. mc_draws == 0 selects closed form.
std::vector<AREReport> are_table(const std::vector<RadialLaw>& laws, std::int64_t mc_draws = 0,
                                 std::uint64_t seed = 20240611);

void write_are_csv(std::ostream& os, const std::vector<AREReport>& reports);
void write_are_text(std::ostream& os, const std::vector<AREReport>& reports);

// E(R_p^-2) E(R_p^2) at finite p, drawing full p-vectors v * W with W ~ N(0, I_p).
MonteCarloEstimate finite_p_are_in_vs_max(const RadialLaw& law, Eigen::Index p, std::int64_t draws,
                                          std::uint64_t seed);

}  // namespace hdloc

#pragma once

#include "hdloc/sample.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hdloc {

inline constexpr int kDefaultLjungBoxLags = 10;

struct LjungBoxResult {
  double q = 0.0;
  double p_value = 1.0;
};

// Q = T(T+2) sum_{k=1}^{h} rho_k^2 / (T-k), calibrated against chi2_h.
LjungBoxResult ljung_box(std::span<const double> series, int lags = kDefaultLjungBoxLags);

// T x p matrix of returns. With a risk-free series, the tested panel is the
// excess return R_ij - rf_i.
struct SeriesPanel {
  Panel returns;
  std::vector<std::string> labels;
  std::optional<Vector> risk_free;

  void validate() const;
  Panel excess_returns() const;
};

struct PrefilterEntry {
  std::string label;
  double q = 0.0;
  double p_value = 1.0;
  bool kept = true;
  bool degenerate = false;
};

struct PrefilterReport {
  int lags = kDefaultLjungBoxLags;
  double alpha = 0.05;
  std::vector<PrefilterEntry> entries;

  std::size_t kept_count() const;
};

// Keeps the columns whose Ljung-Box p-value is >= alpha. Constant columns
// are dropped and flagged as degenerate. The retained panel carries excess
// returns (risk_free cleared).
std::pair<SeriesPanel, PrefilterReport> prefilter_panel(const SeriesPanel& panel,
                                                        int lags = kDefaultLjungBoxLags,
                                                        double alpha = 0.05);

}  // namespace hdloc

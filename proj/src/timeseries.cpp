#include "hdloc/timeseries.hpp"

#include "hdloc/errors.hpp"
#include "hdloc/stats_util.hpp"

#include <algorithm>
#include <cmath>

namespace hdloc {

LjungBoxResult ljung_box(std::span<const double> series, int lags) {
  const auto t = static_cast<std::ptrdiff_t>(series.size());
  if (lags < 1) throw InvalidInput("Ljung-Box needs lags >= 1");
  if (t <= lags) throw InvalidInput("Ljung-Box needs more observations than lags");
  for (double v : series) {
    if (!std::isfinite(v)) throw InvalidInput("series contains non-finite values");
  }
  if (std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); })) {
    throw DegenerateData("Ljung-Box on a constant series");
  }
  const double mu = mean(series);
  double denom = 0.0;
  for (double v : series) denom += (v - mu) * (v - mu);

  const double tt = static_cast<double>(t);
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::ptrdiff_t i = k; i < t; ++i) num += (series[i] - mu) * (series[i - k] - mu);
    const double rho = num / denom;
    q += rho * rho / (tt - k);
  }
  q *= tt * (tt + 2.0);
  return {q, chi_square_sf(q, lags)};
}

void SeriesPanel::validate() const {
  if (!returns.allFinite()) throw InvalidInput("series panel contains non-finite values");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != returns.cols()) {
    throw InvalidInput("label count does not match column count");
  }
  if (risk_free) {
    if (risk_free->size() != returns.rows()) throw InvalidInput("risk-free series has wrong length");
    if (!risk_free->allFinite()) throw InvalidInput("risk-free series contains non-finite values");
  }
}

Panel SeriesPanel::excess_returns() const {
  if (!risk_free) return returns;
  return returns.colwise() - *risk_free;
}

std::size_t PrefilterReport::kept_count() const {
  std::size_t k = 0;
  for (const auto& e : entries) k += e.kept ? 1 : 0;
  return k;
}

std::pair<SeriesPanel, PrefilterReport> prefilter_panel(const SeriesPanel& panel, int lags, double alpha) {
  panel.validate();
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidInput("prefilter alpha must lie in [0, 1)");
  if (panel.returns.rows() < 30) throw InvalidInput("prefilter needs at least 30 observations");
  const Panel excess = panel.excess_returns();

  PrefilterReport report;
  report.lags = lags;
  report.alpha = alpha;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < excess.cols(); ++j) {
    PrefilterEntry entry;
    entry.label = panel.labels.empty() ? "V" + std::to_string(j + 1) : panel.labels[j];
    const Vector column = excess.col(j);
    try {
      const LjungBoxResult lb = ljung_box(std::span<const double>(column.data(), column.size()), lags);
      entry.q = lb.q;
      entry.p_value = lb.p_value;
      entry.kept = lb.p_value >= alpha;
    } catch (const DegenerateData&) {
      entry.degenerate = true;
      entry.kept = false;
      entry.q = std::nan("");
      entry.p_value = std::nan("");
    }
    if (entry.kept) kept.push_back(j);
    report.entries.push_back(std::move(entry));
  }

  SeriesPanel retained;
  retained.returns.resize(excess.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    retained.returns.col(static_cast<Eigen::Index>(k)) = excess.col(kept[k]);
    retained.labels.push_back(report.entries[kept[k]].label);
  }
  return {std::move(retained), std::move(report)};
}

}  // namespace hdloc

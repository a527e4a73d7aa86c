#include "hdloc/sample.hpp"

#include "hdloc/errors.hpp"

#include <cmath>
#include <string>

namespace hdloc {

Sample::Sample(Panel values, std::vector<std::string> variable_names)
    : values_(std::move(values)), names_(std::move(variable_names)) {
  if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
    throw InvalidInput("variable name count " + std::to_string(names_.size()) +
                       " does not match column count " + std::to_string(values_.cols()));
  }
  if (!values_.allFinite()) throw InvalidInput("sample contains non-finite entries");
}

void Sample::require_testable() const {
  if (n() < 4) throw InvalidInput("need at least 4 observations, got " + std::to_string(n()));
  if (p() < 2) throw InvalidInput("need at least 2 variables, got " + std::to_string(p()));
}

Sample Sample::without_rows(Eigen::Index i, Eigen::Index j) const {
  if (i == j || i < 0 || j < 0 || i >= n() || j >= n()) {
    throw InvalidInput("excluded rows must be two distinct in-range indices");
  }
  Panel kept(n() - 2, p());
  Eigen::Index out = 0;
  for (Eigen::Index k = 0; k < n(); ++k) {
    if (k == i || k == j) continue;
    kept.row(out++) = values_.row(k);
  }
  return Sample(std::move(kept), names_);
}

WeightExponent::WeightExponent(double m) : m_(m) {
  if (!std::isfinite(m) || m > 1.0) {
    throw InvalidInput("weight exponent must be finite and <= 1, got " + std::to_string(m));
  }
}

double WeightExponent::weight(double r) const {
  if (m_ == 0.0) return 1.0;
  if (m_ == 1.0) return r;
  if (m_ == -1.0) return 1.0 / r;
  return std::pow(r, m_);
}

}  // namespace hdloc

#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace hdloc {

// Observations are rows, so most kernels walk contiguous memory.
using Panel = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// An n x p data panel with optional column labels. Construction only checks
// that every entry is finite; the size requirements of the tests are checked
// by require_testable().
class Sample {
 public:
  explicit Sample(Panel values, std::vector<std::string> variable_names = {});

  Eigen::Index n() const { return values_.rows(); }
  Eigen::Index p() const { return values_.cols(); }
  const Panel& values() const { return values_; }
  const std::vector<std::string>& variable_names() const { return names_; }

  // n >= 4 and p >= 2.
  void require_testable() const;

  // Copy without rows i and j.
  Sample without_rows(Eigen::Index i, Eigen::Index j) const;

 private:
  Panel values_;
  std::vector<std::string> names_;
};

// w(r) = r^m with m <= 1.
class WeightExponent {
 public:
  explicit WeightExponent(double m);

  static WeightExponent inverse_norm() { return WeightExponent(-1.0); }
  static WeightExponent sign() { return WeightExponent(0.0); }
  static WeightExponent identity() { return WeightExponent(1.0); }

  double value() const { return m_; }

  // r^m, with the three presets evaluated without pow().
  double weight(double r) const;

  friend bool operator==(WeightExponent a, WeightExponent b) { return a.m_ == b.m_; }

 private:
  double m_;
};

}  // namespace hdloc

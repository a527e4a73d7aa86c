#pragma once

#include <string>
#include <vector>

namespace hdloc {

// Uniform envelope for every test. reject is always p_value < alpha.
struct TestResult {
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  std::vector<std::string> warnings;
};

// Throws InvalidInput unless 0 < alpha < 1.
void check_alpha(double alpha);

// Tag for a weighted spatial-sign test family ("MAX", "SUM", "CC"):
// m = -1 -> "IN-<family>", m = 0 -> "SS-<family>", otherwise "W(m)-<family>".
std::string weighted_tag(double m, const std::string& family);

}  // namespace hdloc

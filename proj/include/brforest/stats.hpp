#pragma once

#include <span>
#include <vector>

namespace brf {

struct TestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// One-sided paired t-test, H1: mean(a) > mean(b). Degenerate zero-variance
// differences map to p = 0 (positive mean), p = 1 (negative) or p = 0.5
// (all-zero), so repeated-CV vectors that coincide never crash the pipeline.
TestResult paired_t_greater(std::span<const double> a, std::span<const double> b);

// Spearman rank-order correlation, ties handled by average ranks. Throws on
// constant input.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Upper tail P(T > t) of Student's t via the regularized incomplete beta
// function (continued fraction).
double student_t_sf(double t, int dof);

// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> v);

}  // namespace brf

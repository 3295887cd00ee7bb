#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fss {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);
double median(std::vector<double> values);

/// Adjusted Fisher-Pearson skewness G1 = g1 sqrt(n (n - 1)) / (n - 2).
/// Throws degenerate_geometry for zero variance, arity for n < 3.
double skewness(std::span<const double> x);

/// (mean - median) / |median|; the normality diagnostic reported beside skewness.
double median_mean_gap(std::span<const double> x);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution.
double student_t_cdf(double t, double df);

/// Two-tailed p-value P(|T| >= |t|).
double student_t_two_tailed(double t, double df);

/// Inverse of student_t_cdf.
double student_t_quantile(double p, double df);

struct TTest {
  double t = 0.0;
  int df = 0;
  std::optional<double> p;  ///< empty for the degenerate zero-variance case
  bool degenerate = false;
};

/// Two-tailed paired t-test on a - b.
TTest t_paired(std::span<const double> a, std::span<const double> b);

/// Two-tailed one-sample t-test of mean(x) against mu0.
TTest t_one_sample(std::span<const double> x, double mu0);

struct BlandAltmanCase {
  double mean = 0.0;
  double diff = 0.0;
};

struct BlandAltman {
  double mean_diff = 0.0;   ///< mean(a) - mean(b)
  double sd_diff = 0.0;     ///< sample sd of a - b
  double loa_low = 0.0;     ///< mean_diff - 1.96 sd_diff
  double loa_high = 0.0;
  double ci_low = 0.0;      ///< 95% t interval of the mean difference
  double ci_high = 0.0;
  std::vector<BlandAltmanCase> cases;
};

BlandAltman bland_altman(std::span<const double> a, std::span<const double> b);

struct PercentDiff {
  double value = 0.0;         ///< mean of 100 (a - b) / b over usable cases
  std::size_t excluded = 0;   ///< cases with b == 0
};

PercentDiff percent_diff(std::span<const double> a, std::span<const double> b);

}  // namespace fss

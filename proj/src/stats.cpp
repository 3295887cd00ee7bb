#include "fss/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fss/error.hpp"

namespace fss {

namespace {

void require_paired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::arity, "paired samples differ in length");
  if (a.size() < 2) throw Error(ErrorKind::arity, "paired samples need at least two cases");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw Error(ErrorKind::degenerate_geometry, "paired samples contain a non-finite value");
    }
  }
}

TTest t_from_differences(std::span<const double> d) {
  TTest out;
  out.df = static_cast<int>(d.size()) - 1;
  const double m = mean(d);
  const double sd = sample_sd(d);
  if (sd == 0.0) {
    if (m == 0.0) {
      out.t = 0.0;
      out.p = 1.0;
    } else {
      out.t = std::copysign(std::numeric_limits<double>::infinity(), m);
      out.degenerate = true;
    }
    return out;
  }
  out.t = m / (sd / std::sqrt(static_cast<double>(d.size())));
  out.p = student_t_two_tailed(out.t, out.df);
  return out;
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::arity, "mean of an empty list");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::arity, "standard deviation needs at least two values");
  const double m = mean(x);
  double sq = 0.0;
  for (double v : x) sq += (v - m) * (v - m);
  return std::sqrt(sq / static_cast<double>(x.size() - 1));
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::arity, "median of an empty list");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double skewness(std::span<const double> x) {
  if (x.size() < 3) throw Error(ErrorKind::arity, "skewness needs at least three values");
  const double n = static_cast<double>(x.size());
  const double m = mean(x);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 == 0.0) throw Error(ErrorKind::degenerate_geometry, "skewness of a constant sample");
  const double g1 = m3 / std::pow(m2, 1.5);
  return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

double median_mean_gap(std::span<const double> x) {
  const double med = median(std::vector<double>(x.begin(), x.end()));
  if (med == 0.0) throw Error(ErrorKind::degenerate_geometry, "median is zero");
  return (mean(x) - med) / std::abs(med);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorKind::degenerate_geometry, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorKind::degenerate_geometry, "t distribution needs df > 0");
  if (std::isnan(t)) throw Error(ErrorKind::degenerate_geometry, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // Evaluate at whichever of x and 1 - x is formed without cancellation.
  if (t2 < df) return std::clamp(1.0 - incomplete_beta(0.5, 0.5 * df, t2 / (df + t2)), 0.0, 1.0);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t2)), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_tailed(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::degenerate_geometry, "quantile probability must lie in (0, 1)");
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TTest t_paired(std::span<const double> a, std::span<const double> b) {
  require_paired(a, b);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return t_from_differences(d);
}

TTest t_one_sample(std::span<const double> x, double mu0) {
  if (x.size() < 2) throw Error(ErrorKind::arity, "one-sample t-test needs at least two values");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - mu0;
  return t_from_differences(d);
}

BlandAltman bland_altman(std::span<const double> a, std::span<const double> b) {
  require_paired(a, b);
  BlandAltman out;
  std::vector<double> d(a.size());
  out.cases.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
    out.cases.push_back({0.5 * (a[i] + b[i]), d[i]});
  }
  out.mean_diff = mean(a) - mean(b);
  out.sd_diff = sample_sd(d);
  out.loa_low = out.mean_diff - 1.96 * out.sd_diff;
  out.loa_high = out.mean_diff + 1.96 * out.sd_diff;
  const double half = student_t_quantile(0.975, static_cast<double>(a.size() - 1)) * out.sd_diff /
                      std::sqrt(static_cast<double>(a.size()));
  out.ci_low = out.mean_diff - half;
  out.ci_high = out.mean_diff + half;
  return out;
}

PercentDiff percent_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::arity, "paired samples differ in length");
  PercentDiff out;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] == 0.0) {
      ++out.excluded;
      continue;
    }
    sum += 100.0 * (a[i] - b[i]) / b[i];
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::degenerate_geometry, "no usable cases for percent difference");
  out.value = sum / static_cast<double>(used);
  return out;
}

}  // namespace fss

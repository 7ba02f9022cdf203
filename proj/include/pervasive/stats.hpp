#pragma once

#include <vector>

// Small numeric helpers shared by the experiment harness and the tests.
namespace pervasive::stats {

double mean(const std::vector<double>& x);

// Unbiased (n-1) standard deviation.
double sample_sd(const std::vector<double>& x);

// Unbiased sample variance.
double sample_variance(const std::vector<double>& x);

// Quantile with linear interpolation on the sorted sample, q in [0, 1].
double quantile(std::vector<double> x, double q);

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise.
double gamma_p(double a, double x);

// CDF of the chi-squared distribution with df degrees of freedom.
double chi2_cdf(double x, int df);

// Two-sided Kolmogorov-Smirnov distance between the sample and the
// chi-squared(df) distribution.
double ks_statistic_chi2(std::vector<double> sample, int df);

// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pervasive::stats

#pragma once

namespace elsaa::stats {

/// Upper-beta quantile of the chi-square distribution with `df` degrees of
/// freedom, i.e. the q with P(X <= q) = 1 - beta. Throws std::domain_error
/// for df < 1 or beta outside (0, 1).
double chi2_quantile(int df, double beta);

/// P(X <= q) for X ~ chi-square(df).
double chi2_cdf(int df, double q);

/// Inverse of the standard normal CDF. Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

double normal_cdf(double x);
double normal_pdf(double x);

} // namespace elsaa::stats

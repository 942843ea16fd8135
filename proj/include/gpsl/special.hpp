#pragma once

namespace gpsl {

/// Error function, implemented in-repo so results are bit-stable across
/// platforms. Absolute error <= 1e-14 over all reals; odd; erf(+-inf) = +-1.
double erf(double x);

/// Complementary error function 1 - erf(x), computed without cancellation
/// for large positive x.
double erfc(double x);

/// Modified Bessel function of the first kind, order zero. Relative error
/// <= 1e-12. Overflows to +inf (signaled via i0_overflows) for x > ~713.
double bessel_i0(double x);

/// True when bessel_i0(x) would overflow double range.
bool i0_overflows(double x);

/// Exponentially scaled modified Bessel function e^{-|x|} I0(x);
/// finite for all representable x.
double bessel_i0e(double x);

/// Inverse of the standard normal CDF. Domain (0, 1); p = 0.5 -> 0 exactly.
/// Implemented via an asymptotic initial guess refined by Newton iterations
/// on the in-repo erfc, so sampling built on it is bit-stable.
double inv_normal_cdf(double p);

/// Regularized lower incomplete gamma function P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Upper tail probability of the chi-squared distribution with k degrees of
/// freedom: P(X >= x).
double chi_squared_pvalue(double x, double k);

/// Kolmogorov distribution upper tail Q(lambda) = 2 sum_j (-1)^{j-1}
/// exp(-2 j^2 lambda^2); the asymptotic p-value of the KS statistic.
double kolmogorov_q(double lambda);

}  // namespace gpsl

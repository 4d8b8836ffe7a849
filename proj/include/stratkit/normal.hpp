#pragma once

namespace stratkit::normal {

/// Standard normal density.
double pdf(double x);

/// Standard normal CDF via erfc; accurate over the full double range.
double cdf(double x);

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
/// Requires p in (0, 1).
double quantile(double p);

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation rho.
/// rho is clamped to [-1, 1]; infinities in x/y marginalize. Absolute error
/// is far below the 1e-7 contract (Drezner-Wesolowsky / Genz hybrid).
double bvn_cdf(double x, double y, double rho);

}  // namespace stratkit::normal

#include "stratkit/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stratkit/errors.hpp"

namespace stratkit::normal {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kTwoPi = 6.2831853071795864769;
}  // namespace

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double cdf(double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// AS 241 PPND16 (Wichura 1988), relative error ~1e-16.
double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DataError("normal::quantile: p must be in (0,1), got " +
                    std::to_string(p));
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

namespace {

// Gauss-Legendre nodes (offsets around 1) and weights for the Drezner-
// Wesolowsky integral, three precision tiers keyed on |rho|.
constexpr double kW6[] = {0.1713244923791705, 0.3607615730481384,
                          0.4679139345726904};
constexpr double kX6[] = {0.9324695142031522, 0.6612093864662647,
                          0.2386191860831970};
constexpr double kW12[] = {0.04717533638651177, 0.1069393259953183,
                           0.1600783285433464,  0.2031674267230659,
                           0.2334925365383547,  0.2491470458134029};
constexpr double kX12[] = {0.9815606342467191, 0.9041172563704750,
                           0.7699026741943050, 0.5873179542866171,
                           0.3678314989981802, 0.1252334085114692};
constexpr double kW20[] = {0.01761400713915212, 0.04060142980038694,
                           0.06267204833410906, 0.08327674157670475,
                           0.1019301198172404,  0.1181945319615184,
                           0.1316886384491766,  0.1420961093183821,
                           0.1491729864726037,  0.1527533871307259};
constexpr double kX20[] = {0.9931285991850949,  0.9639719272779138,
                           0.9122344282513259,  0.8391169718222188,
                           0.7463319064601508,  0.6360536807265150,
                           0.5108670019508271,  0.3737060887154196,
                           0.2277858511416451,  0.07652652113349733};

// Upper-orthant probability P(X > h, Y > k), Genz's rendition of
// Drezner & Wesolowsky (1990). Finite h, k only.
double bvn_upper(double h, double k, double r) {
  const double* w;
  const double* xo;
  int np;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    w = kW6; xo = kX6; np = 3;
  } else if (ar < 0.75) {
    w = kW12; xo = kX12; np = 6;
  } else {
    w = kW20; xo = kX20; np = 10;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (int i = 0; i < np; ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (1.0 + sign * xo[i]));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / kTwoPi + cdf(-h) * cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      const double asr = -(bs / as + hk) / 2.0;
      if (asr > -100.0) {
        bvn = a * std::exp(asr) *
              (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(kTwoPi) * cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      for (int i = 0; i < np; ++i) {
        for (double sign : {-1.0, 1.0}) {
          const double x = a * (1.0 + sign * xo[i]);
          const double xs = x * x;
          const double asr2 = -(bs / xs + hk) / 2.0;
          if (asr2 > -100.0) {
            const double rs = std::sqrt(1.0 - xs);
            const double sp2 = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
            const double ep =
                std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
            bvn += a * w[i] * std::exp(asr2) * (ep - sp2);
          }
        }
      }
      bvn = -bvn / kTwoPi;
    }
    if (r > 0.0) {
      bvn += cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l =
          h < 0.0 ? cdf(k) - cdf(h) : cdf(-h) - cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bvn_cdf(double x, double y, double rho) {
  rho = std::clamp(rho, -1.0, 1.0);
  if (std::isnan(x) || std::isnan(y)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  // Marginalize infinite limits.
  if (x == -std::numeric_limits<double>::infinity() ||
      y == -std::numeric_limits<double>::infinity()) {
    return 0.0;
  }
  if (x == std::numeric_limits<double>::infinity()) return cdf(y);
  if (y == std::numeric_limits<double>::infinity()) return cdf(x);
  if (rho == 1.0) return cdf(std::min(x, y));
  if (rho == -1.0) {
    const double p = cdf(x) + cdf(y) - 1.0;
    return p > 0.0 ? p : 0.0;
  }
  return bvn_upper(-x, -y, rho);
}

}  // namespace stratkit::normal

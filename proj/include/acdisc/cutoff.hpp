#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "acdisc/common.hpp"

namespace acdisc {

// Nondecreasing smooth cutoff: identity below 1/3, constant 1 above 2/3.
// The log-barrier construction only needs values and two derivatives.
struct CutoffTheta {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

namespace detail {
// Smoothstep weight sigma(s) = e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}) written as
// a logistic in g(s) = 1/s - 1/(1-s); all derivatives vanish at s=0 and s=1.
inline double blend_sigma(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double g = 1.0 / s - 1.0 / (1.0 - s);
  return 1.0 / (1.0 + std::exp(g));
}
inline double blend_sigma_d1(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double sig = blend_sigma(s);
  double gp = -1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s));
  return -sig * (1.0 - sig) * gp;
}
inline double blend_sigma_d2(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double sig = blend_sigma(s);
  double gp = -1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s));
  double gpp = 2.0 / (s * s * s) - 2.0 / ((1.0 - s) * (1.0 - s) * (1.0 - s));
  double sp = -sig * (1.0 - sig) * gp;
  // d/ds [-sig(1-sig)gp] = -(sp(1-2 sig)gp + sig(1-sig)gpp)
  return -(sp * (1.0 - 2.0 * sig) * gp + sig * (1.0 - sig) * gpp);
}
}  // namespace detail

inline CutoffTheta default_cutoff() {
  CutoffTheta t;
  t.name = "default-blend-v1";
  t.value = [](double x) {
    if (x <= 1.0 / 3.0) return x;
    if (x >= 2.0 / 3.0) return 1.0;
    double s = 3.0 * (x - 1.0 / 3.0);
    double sig = detail::blend_sigma(s);
    return (1.0 - sig) * x + sig;
  };
  t.d1 = [](double x) {
    if (x <= 1.0 / 3.0) return 1.0;
    if (x >= 2.0 / 3.0) return 0.0;
    double s = 3.0 * (x - 1.0 / 3.0);
    double sig = detail::blend_sigma(s);
    double sigp = detail::blend_sigma_d1(s);
    return (1.0 - sig) + 3.0 * sigp * (1.0 - x);
  };
  t.d2 = [](double x) {
    if (x <= 1.0 / 3.0 || x >= 2.0 / 3.0) return 0.0;
    double s = 3.0 * (x - 1.0 / 3.0);
    double sigp = detail::blend_sigma_d1(s);
    double sigpp = detail::blend_sigma_d2(s);
    return 9.0 * sigpp * (1.0 - x) - 6.0 * sigp;
  };
  return t;
}

// Rejects cutoffs that are not identity-below-1/3 / one-above-2/3 /
// nondecreasing; the barrier certificate depends on all three.
inline void validate_cutoff(const CutoffTheta& t, int samples = 4096) {
  double prev = -1e300;
  for (int i = 0; i <= samples; ++i) {
    double x = 1.2 * i / samples;  // probe a bit past 1
    double v = t.value(x);
    if (x <= 1.0 / 3.0 && std::abs(v - x) > 1e-12)
      fail(ErrorKind::InvalidCutoff, "theta must equal x on [0,1/3]");
    if (x >= 2.0 / 3.0 && std::abs(v - 1.0) > 1e-12)
      fail(ErrorKind::InvalidCutoff, "theta must equal 1 on [2/3,inf)");
    if (v < prev - 1e-12) fail(ErrorKind::InvalidCutoff, "theta must be nondecreasing");
    prev = std::max(prev, v);
  }
}

// k = 4 * max( sup |theta'/theta| , sup |(theta'' theta - theta'^2)/theta^2| ),
// suprema over [1/3, 1], taken on a dense sample.
inline double k_constant(const CutoffTheta& t, int samples = 20000) {
  validate_cutoff(t);
  double sup1 = 0, sup2 = 0;
  for (int i = 0; i <= samples; ++i) {
    double x = 1.0 / 3.0 + (2.0 / 3.0) * i / samples;
    double th = t.value(x);
    require(th > 0.0, ErrorKind::InvalidCutoff, "theta must stay positive on [1/3,1]");
    double d1 = t.d1(x), d2 = t.d2(x);
    sup1 = std::max(sup1, std::abs(d1 / th));
    sup2 = std::max(sup2, std::abs((d2 * th - d1 * d1) / (th * th)));
  }
  return 4.0 * std::max(sup1, sup2);
}

// Admissible C^1 distance from the standard structure on a domain bounded by m.
inline double epsilon_m(double m) {
  require(m > 0.0, ErrorKind::NonPositive, "domain bound must be positive");
  return std::min(1.0 / (32.0 * (1.0 + m)), 1.0 / (32.0 * m * (1.0 + m)));
}

}  // namespace acdisc

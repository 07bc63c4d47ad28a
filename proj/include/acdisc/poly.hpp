#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "acdisc/linalg.hpp"

namespace acdisc {

// Multivariate polynomial with exact differentiation. Exponent vectors are
// dense over the variable count; term lists stay short in practice.
class Poly {
 public:
  struct Term {
    std::vector<int> pow;
    double c;
  };

  Poly() : nvars_(0) {}
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, double c) {
    Poly p(nvars);
    if (c != 0.0) p.terms_.push_back({std::vector<int>(nvars, 0), c});
    return p;
  }
  static Poly variable(int nvars, int k, double c = 1.0) {
    Poly p(nvars);
    std::vector<int> e(nvars, 0);
    e[k] = 1;
    p.terms_.push_back({e, c});
    return p;
  }

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool zero() const { return terms_.empty(); }

  void add_term(const std::vector<int>& pow, double c) {
    if (c == 0.0) return;
    terms_.push_back({pow, c});
    normalize();
  }

  double eval(const Vec& x) const {
    double s = 0;
    for (const auto& t : terms_) {
      double v = t.c;
      for (int k = 0; k < nvars_; ++k)
        for (int e = 0; e < t.pow[k]; ++e) v *= x[k];
      s += v;
    }
    return s;
  }

  Poly derivative(int k) const {
    Poly d(nvars_);
    for (const auto& t : terms_) {
      if (t.pow[k] == 0) continue;
      Term nt = t;
      nt.c *= t.pow[k];
      nt.pow[k] -= 1;
      d.terms_.push_back(nt);
    }
    d.normalize();
    return d;
  }

  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (const auto& t : o.terms_) r.terms_.push_back(t);
    r.normalize();
    return r;
  }
  Poly operator*(double s) const {
    Poly r = *this;
    for (auto& t : r.terms_) t.c *= s;
    r.normalize();
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r(nvars_);
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        Term t;
        t.pow.resize(nvars_);
        for (int k = 0; k < nvars_; ++k) t.pow[k] = a.pow[k] + b.pow[k];
        t.c = a.c * b.c;
        r.terms_.push_back(t);
      }
    r.normalize();
    return r;
  }

 private:
  void normalize() {
    std::map<std::vector<int>, double> acc;
    for (const auto& t : terms_) acc[t.pow] += t.c;
    terms_.clear();
    for (const auto& [pow, c] : acc)
      if (std::abs(c) > 0.0) terms_.push_back({pow, c});
  }

  int nvars_;
  std::vector<Term> terms_;
};

}  // namespace acdisc

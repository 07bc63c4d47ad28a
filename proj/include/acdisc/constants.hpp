#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "acdisc/common.hpp"
#include "acdisc/cutoff.hpp"
#include "json.hpp"

namespace acdisc {

// Build-wide constant chain, all derived from the cutoff's curvature bound k.
// Reports embed the manifest hash so any emitted number can be traced to the
// exact constants that produced it.
struct ConstantsManifest {
  std::string theta = "default-blend-v1";
  double k = 0;
  double c_prime = 0;             // (1/4) sqrt(2/(9k))
  double c_double_prime = 0;      // 2 e^2 sqrt(2) / c_prime
  double c_tilde_effective = 0;   // c'' sqrt(pi) / (1 - 2^{-1/2})

  double c_m(double m) const { return std::sqrt(2.0 / (9.0 * k * std::exp(2.0 * m))); }

  std::string canonical_json() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"theta\":\"%s\",\"k\":%.17g,\"c_prime\":%.17g,\"c_double_prime\":%.17g,"
                  "\"c_tilde_effective\":%.17g}",
                  theta.c_str(), k, c_prime, c_double_prime, c_tilde_effective);
    return buf;
  }

  std::uint64_t hash() const { return fnv1a(canonical_json()); }
};

inline ConstantsManifest compute_constants(const CutoffTheta& theta = default_cutoff()) {
  ConstantsManifest c;
  c.theta = theta.name;
  c.k = k_constant(theta);
  c.c_prime = 0.25 * std::sqrt(2.0 / (9.0 * c.k));
  c.c_double_prime = 2.0 * std::exp(2.0) * std::sqrt(2.0) / c.c_prime;
  c.c_tilde_effective = c.c_double_prime * std::sqrt(M_PI) / (1.0 - std::pow(2.0, -0.5));
  return c;
}

inline ConstantsManifest load_constants(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::BadInput, "cannot open constants manifest: " + path);
  nlohmann::json j;
  in >> j;
  ConstantsManifest c;
  c.theta = j.at("theta").get<std::string>();
  c.k = j.at("k").get<double>();
  c.c_prime = j.at("c_prime").get<double>();
  c.c_double_prime = j.at("c_double_prime").get<double>();
  c.c_tilde_effective = j.at("c_tilde_effective").get<double>();
  require(c.k > 0, ErrorKind::BadInput, "constants manifest has nonpositive k");
  return c;
}

// Process-wide manifest; ACDISC_CONSTANTS points at a JSON override.
inline const ConstantsManifest& constants() {
  static ConstantsManifest m = [] {
    if (const char* env = std::getenv("ACDISC_CONSTANTS"); env && *env) return load_constants(env);
    return compute_constants();
  }();
  return m;
}

}  // namespace acdisc

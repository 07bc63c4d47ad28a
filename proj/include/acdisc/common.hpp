#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace acdisc {

// Failure taxonomy shared across the library. Precondition-class failures map
// to CLI exit code 2; everything else is an internal error (exit 1).
enum class ErrorKind {
  SingularBlock,
  TooLarge,
  NonPositive,
  InvalidCutoff,
  PreconditionFailed,
  DeltaTooLarge,
  EmptyAtlas,
  DegenerateDefiningFunctions,
  CannotTame,
  SingularLeadingMatrix,
  SingularMatrix,
  NoDerivatives,
  NoContraction,
  MaxIter,
  NotAttached,
  RegionTooSmall,
  EpsilonPrimeViolated,
  NotCertified,
  BadInput,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::SingularBlock: return "SingularBlock";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::InvalidCutoff: return "InvalidCutoff";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorKind::EmptyAtlas: return "EmptyAtlas";
    case ErrorKind::DegenerateDefiningFunctions: return "DegenerateDefiningFunctions";
    case ErrorKind::CannotTame: return "CannotTame";
    case ErrorKind::SingularLeadingMatrix: return "SingularLeadingMatrix";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NoDerivatives: return "NoDerivatives";
    case ErrorKind::NoContraction: return "NoContraction";
    case ErrorKind::MaxIter: return "MaxIter";
    case ErrorKind::NotAttached: return "NotAttached";
    case ErrorKind::RegionTooSmall: return "RegionTooSmall";
    case ErrorKind::EpsilonPrimeViolated: return "EpsilonPrimeViolated";
    case ErrorKind::NotCertified: return "NotCertified";
    case ErrorKind::BadInput: return "BadInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // Input/contract violations; a caller handed us data outside the contract.
  bool precondition_class() const {
    switch (kind_) {
      case ErrorKind::SingularBlock:
      case ErrorKind::TooLarge:
      case ErrorKind::NonPositive:
      case ErrorKind::InvalidCutoff:
      case ErrorKind::PreconditionFailed:
      case ErrorKind::DeltaTooLarge:
      case ErrorKind::EmptyAtlas:
      case ErrorKind::DegenerateDefiningFunctions:
      case ErrorKind::SingularLeadingMatrix:
      case ErrorKind::SingularMatrix:
      case ErrorKind::NoDerivatives:
      case ErrorKind::NotAttached:
      case ErrorKind::RegionTooSmall:
      case ErrorKind::EpsilonPrimeViolated:
      case ErrorKind::BadInput:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

namespace runtime {
inline int& job_cap_ref() {
  static int cap = 0;  // 0 = hardware default
  return cap;
}
inline void set_max_jobs(int j) { job_cap_ref() = j; }
inline int max_jobs() {
  int cap = job_cap_ref();
  if (cap > 0) return cap;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 4;
}
}  // namespace runtime

// Deterministic parallel map: results are written into per-index slots, so the
// outcome is independent of scheduling.
template <typename F>
inline void parallel_for(std::size_t count, F&& body, int jobs = 0) {
  if (jobs <= 0) jobs = runtime::max_jobs();
  if (jobs <= 1 || count < 64) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    const std::size_t chunk = 32;
    for (;;) {
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= count) return;
      std::size_t end = std::min(begin + chunk, count);
      for (std::size_t i = begin; i < end; ++i) body(i);
    }
  };
  std::vector<std::thread> pool;
  int nthreads = static_cast<int>(std::min<std::size_t>(jobs, count));
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// FNV-1a, used to fingerprint the constants manifest in reports.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace acdisc

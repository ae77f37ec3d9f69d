#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace striate {

enum class Errc {
  usage,
  malformed_code,
  out_of_fragment,
  unassigned_variable,
  missing_relation,
  different_orders,
  not_seamless,
  precondition,
  unsupported_family,
  unsupported_theory,
  oracle_reject,
  not_realization,
  bound_exceeded,
  inconclusive,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

// Deterministic splitmix64 stream. All randomness in the project flows from
// one of these, seeded explicitly; std:: distributions are avoided because
// their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool chance(unsigned percent) { return below(100) < percent; }

  std::uint64_t fork() { return next(); }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xffu;
    h *= 1099511628211ULL;
  }
  return h;
}
inline std::uint64_t fnv1a_init() { return 14695981039346656037ULL; }

}  // namespace striate

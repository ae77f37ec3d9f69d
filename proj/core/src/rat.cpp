#include "striate/rat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "striate/common.hpp"

namespace striate {

bool is_dyadic(const Rat& r) {
  long long d = r.denominator();
  return (d & (d - 1)) == 0;
}

std::string rat_to_string(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::optional<Rat> rat_from_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      std::size_t pos = 0;
      long long n = std::stoll(s, &pos);
      if (pos != s.size()) return std::nullopt;
      return Rat(n);
    }
    std::size_t pos = 0;
    long long n = std::stoll(s.substr(0, slash), &pos);
    if (pos != slash) return std::nullopt;
    long long d = std::stoll(s.substr(slash + 1), &pos);
    if (pos != s.size() - slash - 1 || d == 0) return std::nullopt;
    return Rat(n, d);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Rat rat_enum(std::size_t index) {
  if (index == 0) return Rat(0);
  std::size_t k = (index - 1) / 2;  // k-th positive rational, Calkin-Wilf
  Rat q(1);
  for (std::size_t i = 0; i < k; ++i) {
    long long fl = q.numerator() / q.denominator();
    if (q.numerator() < 0 && q.numerator() % q.denominator() != 0) --fl;  // not reached: q > 0
    q = Rat(1) / (Rat(2 * fl + 1) - q);
  }
  return (index % 2 == 1) ? q : -q;
}

namespace {

long long floor_div(long long a, long long b) {
  long long q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

// floor(r * mult) for positive integer mult
long long floor_scaled(const Rat& r, long long mult) {
  return floor_div(r.numerator() * mult, r.denominator());
}

bool in_avoid(const Rat& r, const std::vector<Rat>& avoid) {
  return std::find(avoid.begin(), avoid.end(), r) != avoid.end();
}

}  // namespace

Rat pick_dyadic(const RatBound& lo, const RatBound& hi, const std::vector<Rat>& avoid) {
  for (long long den = 1;; den *= 2) {
    long long m_lo, m_hi;
    if (lo && hi) {
      m_lo = floor_scaled(*lo, den) + 1;
      m_hi = -floor_scaled(-*hi, den) - 1;  // ceil(hi*den) - 1
    } else if (lo) {
      m_lo = floor_scaled(*lo, den) + 1;
      m_hi = m_lo + 4 * den;
    } else if (hi) {
      m_hi = -floor_scaled(-*hi, den) - 1;
      m_lo = m_hi - 4 * den;
    } else {
      m_lo = 0;
      m_hi = 4 * den;
    }
    for (long long m = m_lo; m <= m_hi; ++m) {
      Rat cand(m, den);
      if (!is_dyadic(cand)) continue;  // reduced den must stay a power of two (it does)
      if (lo && !(cand > *lo)) continue;
      if (hi && !(cand < *hi)) continue;
      if (in_avoid(cand, avoid)) continue;
      return cand;
    }
    require(den < (1LL << 40), Errc::internal, "pick_dyadic: no candidate found");
  }
}

Rat pick_nondyadic(const RatBound& lo, const RatBound& hi, const std::vector<Rat>& avoid) {
  for (long long den = 3;; den *= 3) {
    long long m_lo, m_hi;
    if (lo && hi) {
      m_lo = floor_scaled(*lo, den) + 1;
      m_hi = -floor_scaled(-*hi, den) - 1;
    } else if (lo) {
      m_lo = floor_scaled(*lo, den) + 1;
      m_hi = m_lo + 4 * den;
    } else if (hi) {
      m_hi = -floor_scaled(-*hi, den) - 1;
      m_lo = m_hi - 4 * den;
    } else {
      m_lo = 1;
      m_hi = 4 * den;
    }
    for (long long m = m_lo; m <= m_hi; ++m) {
      if (m % 3 == 0) continue;
      Rat cand(m, den);
      if (lo && !(cand > *lo)) continue;
      if (hi && !(cand < *hi)) continue;
      if (in_avoid(cand, avoid)) continue;
      return cand;
    }
    require(den < (1LL << 40), Errc::internal, "pick_nondyadic: no candidate found");
  }
}

Rat pick_rational(const RatBound& lo, const RatBound& hi, const std::vector<Rat>& avoid) {
  return pick_dyadic(lo, hi, avoid);
}

}  // namespace striate

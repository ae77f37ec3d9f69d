#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace striate {

using Rat = boost::rational<long long>;

bool is_dyadic(const Rat& r);                 // denominator a power of two
std::string rat_to_string(const Rat& r);      // "p/q", or "p" when q == 1
std::optional<Rat> rat_from_string(const std::string& s);

// Canonical enumeration of Q: 0, 1, -1, 1/2, -1/2, 2, -2, ... (Calkin-Wilf
// positives interleaved with their negatives). Used wherever a construction
// needs "the least unused rational" for reproducibility.
Rat rat_enum(std::size_t index);

// Bounds for open intervals; nullopt = unbounded on that side.
using RatBound = std::optional<Rat>;

// Least dyadic (by denominator 2^k, then numerator) strictly inside
// (lo, hi) and not in `avoid`.
Rat pick_dyadic(const RatBound& lo, const RatBound& hi, const std::vector<Rat>& avoid = {});

// Least fraction m/3^j (3 does not divide m) strictly inside (lo, hi) and not
// in `avoid`. Such values are never dyadic.
Rat pick_nondyadic(const RatBound& lo, const RatBound& hi, const std::vector<Rat>& avoid = {});

Rat pick_rational(const RatBound& lo, const RatBound& hi, const std::vector<Rat>& avoid = {});

}  // namespace striate

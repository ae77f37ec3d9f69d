#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "striate/common.hpp"

namespace striate::club {

// Desk-scale club/stationary system: a finite carrier 0..size-1 standing in
// for the uncountable cardinal of an ambient model. Clubs are designated
// subsets closed under intersection; stationarity is the oracle "meets every
// designated club". The Fodor step picks a constant-value stationary subset
// of a regressive function's domain.
using SubsetMask = std::uint64_t;

struct ClubSystem {
  int size = 0;            // carrier 0..size-1
  int omega = 0;           // the finite/infinite threshold used by normalization
  std::vector<SubsetMask> clubs;

  bool stationary(SubsetMask a) const;
  bool club_closed_under_intersection() const;
  // Fodor oracle: a stationary, f regressive; returns (a' subset of a, beta)
  // with f constant = beta on a' and a' stationary.
  std::pair<SubsetMask, int> fodor(SubsetMask a, const std::vector<int>& f) const;
};

std::string mask_to_string(SubsetMask m, int size);
bool is_regressive_on(const std::vector<int>& f, SubsetMask a);
bool is_regressive_everywhere(const std::vector<int>& f);

struct RefinementLevel {
  SubsetMask set = 0;
  std::optional<int> beta;  // constant value of the matching function
};

// The nested Fodor chain: A_0 = a, and A_{k+1} is a stationary subset of A_k
// on which f_k is constant.
std::vector<RefinementLevel> refinement_chain(SubsetMask a,
                                              const std::vector<std::vector<int>>& fs,
                                              const ClubSystem& cs);

// Finite-intersection property of {clubs} + {chain levels}, checked over all
// subfamilies.
bool has_fip(const ClubSystem& cs, const std::vector<RefinementLevel>& chain);

struct Normalized {
  std::vector<int> g;     // total, regressive at every nonzero point
  SubsetMask domain = 0;  // the trimmed A (above the omega threshold)
};

// Three-case totalization of a function regressive on a: values >= omega
// pass through, small values shift by one, points off a go to 0.
Normalized regressive_normalize(const std::vector<int>& f, SubsetMask a, const ClubSystem& cs);

// Recover the f-constant candidates from a g-constant: beta = 0 never occurs
// on the domain; small beta means f = beta - 1, large beta means f = beta. At
// the finite omega surrogate itself both cases are possible, so both
// candidates are reported.
std::vector<int> recover_constant(const ClubSystem& cs, int g_constant);

// Seeded systems for the property suites: tail-generated clubs (closed under
// intersection by construction) with every designated club stationary.
ClubSystem seeded_system(std::uint64_t seed, int size, int n_clubs);
std::vector<int> seeded_regressive(std::uint64_t seed, int size);
SubsetMask seeded_stationary(std::uint64_t seed, const ClubSystem& cs);

}  // namespace striate::club

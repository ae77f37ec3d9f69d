#include "striate/club.hpp"

#include <algorithm>

namespace striate::club {

bool ClubSystem::stationary(SubsetMask a) const {
  for (SubsetMask c : clubs)
    if ((a & c) == 0) return false;
  return a != 0;
}

bool ClubSystem::club_closed_under_intersection() const {
  for (SubsetMask c1 : clubs)
    for (SubsetMask c2 : clubs) {
      SubsetMask meet = c1 & c2;
      if (std::find(clubs.begin(), clubs.end(), meet) == clubs.end()) return false;
    }
  return true;
}

std::pair<SubsetMask, int> ClubSystem::fodor(SubsetMask a, const std::vector<int>& f) const {
  require(stationary(a), Errc::precondition, "Fodor steps need a stationary set");
  require(is_regressive_everywhere(f), Errc::precondition, "Fodor steps need a regressive map");
  for (int beta = 0; beta < size; ++beta) {
    SubsetMask fiber = 0;
    for (int x = 0; x < size; ++x)
      if (((a >> x) & 1) && f[static_cast<std::size_t>(x)] == beta) fiber |= SubsetMask{1} << x;
    if (stationary(fiber)) return {fiber, beta};
  }
  fail(Errc::oracle_reject, "no stationary fiber found");
}

std::string mask_to_string(SubsetMask m, int size) {
  std::string out = "{";
  bool first = true;
  for (int x = 0; x < size; ++x)
    if ((m >> x) & 1) {
      if (!first) out += ',';
      out += std::to_string(x);
      first = false;
    }
  return out + "}";
}

bool is_regressive_on(const std::vector<int>& f, SubsetMask a) {
  for (int x = 0; x < static_cast<int>(f.size()); ++x) {
    if (!((a >> x) & 1)) continue;
    if (x == 0) {
      if (f[0] != 0) return false;
    } else if (f[static_cast<std::size_t>(x)] >= x) {
      return false;
    }
  }
  return true;
}

bool is_regressive_everywhere(const std::vector<int>& f) {
  SubsetMask all = f.size() >= 64 ? ~SubsetMask{0} : (SubsetMask{1} << f.size()) - 1;
  return is_regressive_on(f, all);
}

std::vector<RefinementLevel> refinement_chain(SubsetMask a,
                                              const std::vector<std::vector<int>>& fs,
                                              const ClubSystem& cs) {
  require(cs.stationary(a), Errc::precondition, "the seed set must be stationary");
  std::vector<RefinementLevel> chain;
  chain.push_back(RefinementLevel{a, std::nullopt});
  SubsetMask cur = a;
  for (const auto& f : fs) {
    require(is_regressive_everywhere(f), Errc::precondition, "functions must be regressive");
    auto [next, beta] = cs.fodor(cur, f);
    chain.push_back(RefinementLevel{next, beta});
    cur = next;
  }
  return chain;
}

bool has_fip(const ClubSystem& cs, const std::vector<RefinementLevel>& chain) {
  // the chain is nested, so a subfamily's meet is (meet of clubs) & (deepest level)
  std::vector<SubsetMask> family = cs.clubs;
  for (const auto& lvl : chain) family.push_back(lvl.set);
  int k = static_cast<int>(family.size());
  require(k <= 20, Errc::bound_exceeded, "family too large for exhaustive intersection");
  for (std::uint64_t mask = 1; mask < (1ULL << k); ++mask) {
    SubsetMask meet = ~SubsetMask{0};
    for (int i = 0; i < k; ++i)
      if ((mask >> i) & 1) meet &= family[static_cast<std::size_t>(i)];
    if (cs.size < 64) meet &= (SubsetMask{1} << cs.size) - 1;
    if (meet == 0) return false;
  }
  return true;
}

Normalized regressive_normalize(const std::vector<int>& f, SubsetMask a, const ClubSystem& cs) {
  require(is_regressive_on(f, a), Errc::precondition, "f must be regressive on a");
  Normalized out;
  // trim to the tail club above the omega threshold
  out.domain = 0;
  for (int x = cs.omega + 1; x < cs.size; ++x)
    if ((a >> x) & 1) out.domain |= SubsetMask{1} << x;
  out.g.assign(static_cast<std::size_t>(cs.size), 0);
  for (int x = 0; x < cs.size; ++x) {
    if (!((out.domain >> x) & 1)) {
      out.g[static_cast<std::size_t>(x)] = 0;
    } else if (f[static_cast<std::size_t>(x)] >= cs.omega) {
      out.g[static_cast<std::size_t>(x)] = f[static_cast<std::size_t>(x)];
    } else {
      out.g[static_cast<std::size_t>(x)] = f[static_cast<std::size_t>(x)] + 1;
    }
  }
  // regressive at every nonzero point
  for (int x = 0; x < cs.size; ++x)
    require(out.g[static_cast<std::size_t>(x)] == 0 || out.g[static_cast<std::size_t>(x)] < x,
            Errc::internal, "normalization failed to be regressive");
  return out;
}

int recover_constant(const ClubSystem& cs, int g_constant) {
  require(g_constant != 0, Errc::precondition, "zero marks the complement of the domain");
  return g_constant >= cs.omega ? g_constant : g_constant - 1;
}

ClubSystem seeded_system(std::uint64_t seed, int size, int n_clubs) {
  require(size >= 8 && size <= 63, Errc::usage, "carrier size out of range");
  Rng rng(seed);
  ClubSystem cs;
  cs.size = size;
  cs.omega = 2 + static_cast<int>(rng.below(3));
  SubsetMask all = (SubsetMask{1} << size) - 1;
  std::vector<SubsetMask> base{all};
  for (int i = 0; i < n_clubs; ++i) {
    int cut = static_cast<int>(rng.below(static_cast<std::uint64_t>(size / 2))) + 1;
    SubsetMask tail = 0;
    for (int x = cut; x < size; ++x) tail |= SubsetMask{1} << x;
    // sprinkle a few low points; tails keep the family intersection-closed
    for (int k = 0; k < 2; ++k) {
      int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(cut)));
      if (rng.chance(50)) tail |= SubsetMask{1} << x;
    }
    base.push_back(tail);
  }
  // close under intersections
  cs.clubs = base;
  bool grew = true;
  while (grew) {
    grew = false;
    std::size_t k = cs.clubs.size();
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        SubsetMask meet = cs.clubs[i] & cs.clubs[j];
        if (std::find(cs.clubs.begin(), cs.clubs.end(), meet) == cs.clubs.end()) {
          cs.clubs.push_back(meet);
          grew = true;
        }
      }
    require(cs.clubs.size() <= 12, Errc::internal, "club closure ran away");
  }
  // every designated club must itself be stationary
  for (SubsetMask c : cs.clubs) require(cs.stationary(c), Errc::internal, "non-stationary club");
  return cs;
}

std::vector<int> seeded_regressive(std::uint64_t seed, int size) {
  Rng rng(seed);
  std::vector<int> f(static_cast<std::size_t>(size), 0);
  for (int x = 1; x < size; ++x) {
    switch (rng.below(3)) {
      case 0: f[static_cast<std::size_t>(x)] = 0; break;
      case 1: f[static_cast<std::size_t>(x)] = static_cast<int>(rng.below(3)); break;
      default:
        f[static_cast<std::size_t>(x)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(x)));
        break;
    }
    if (f[static_cast<std::size_t>(x)] >= x) f[static_cast<std::size_t>(x)] = x - 1;
  }
  return f;
}

SubsetMask seeded_stationary(std::uint64_t seed, const ClubSystem& cs) {
  Rng rng(seed);
  SubsetMask a = 0;
  for (int x = 0; x < cs.size; ++x)
    if (rng.chance(70)) a |= SubsetMask{1} << x;
  // force the top tail in so that every tail club is met
  for (int x = cs.size - 2; x < cs.size; ++x) a |= SubsetMask{1} << x;
  require(cs.stationary(a), Errc::internal, "seeded set failed stationarity");
  return a;
}

}  // namespace striate::club

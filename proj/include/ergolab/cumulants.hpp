#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace ergolab::correlations {

// Subsets of {0, ..., k} as bitmasks; bit i stands for index i.
using SubsetMask = std::uint32_t;
using SubsetValues = std::map<SubsetMask, double>;

inline constexpr int kMaxCumulantIndex = 10;

struct CumulantTable {
  int k = 0;  // indices 0..k
  // Indexed by mask, entry 0 unused.
  std::vector<double> moment;
  std::vector<double> cumulant;

  double moment_of(SubsetMask s) const { return moment.at(s); }
  double cumulant_of(SubsetMask s) const { return cumulant.at(s); }
  SubsetMask full() const { return (SubsetMask{1} << (k + 1)) - 1; }
};

// Joint cumulants from joint moments by the recursion
//   kappa(S) = m(S) - sum_{T subset S, T != S, min S in T} kappa(T) m(S \ T).
// Throws SubsetMissing or KTooLarge (k > 10).
CumulantTable moments_to_cumulants(int k, const SubsetValues& moments);

// m(S) = sum over set partitions P of S of prod_{B in P} kappa(B).
SubsetValues cumulants_to_moments(int k, const SubsetValues& cumulants);

// Calls fn(block_of) for every set partition of {0, ..., n-1}, encoded as a
// restricted growth string: block_of[0] = 0, block_of[i] <= 1 + max(block_of[<i]).
void for_each_partition(int n, const std::function<void(std::span<const int>)>& fn);

std::uint64_t count_partitions(int n);

}  // namespace ergolab::correlations

#include "ergolab/cumulants.hpp"

#include <bit>
#include <string>

#include "ergolab/error.hpp"

namespace ergolab::correlations {

namespace {

void check_k(int k) {
  if (k < 0) throw Error(Errc::SubsetMissing, "negative index count");
  if (k > kMaxCumulantIndex)
    throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " exceeds " + std::to_string(kMaxCumulantIndex));
}

std::vector<double> dense(int k, const SubsetValues& values) {
  const SubsetMask full = (SubsetMask{1} << (k + 1)) - 1;
  std::vector<double> out(static_cast<std::size_t>(full) + 1, 0.0);
  for (SubsetMask s = 1; s <= full; ++s) {
    auto it = values.find(s);
    if (it == values.end()) throw Error(Errc::SubsetMissing, "no value for subset mask " + std::to_string(s));
    out[s] = it->second;
  }
  return out;
}

}  // namespace

void for_each_partition(int n, const std::function<void(std::span<const int>)>& fn) {
  if (n <= 0) {
    fn({});
    return;
  }
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
  for (;;) {
    fn(a);
    // Rightmost position that can still be incremented.
    int i = n - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) return;
    ++a[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] =
        std::max(prefix_max[static_cast<std::size_t>(i - 1)], a[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < n; ++j) {
      a[static_cast<std::size_t>(j)] = 0;
      prefix_max[static_cast<std::size_t>(j)] = prefix_max[static_cast<std::size_t>(i)];
    }
  }
}

std::uint64_t count_partitions(int n) {
  std::uint64_t count = 0;
  for_each_partition(n, [&](std::span<const int>) { ++count; });
  return count;
}

CumulantTable moments_to_cumulants(int k, const SubsetValues& moments) {
  check_k(k);
  CumulantTable t;
  t.k = k;
  t.moment = dense(k, moments);
  t.cumulant.assign(t.moment.size(), 0.0);
  const SubsetMask full = t.full();
  // Masks in increasing order visit every proper subset before its superset.
  for (SubsetMask s = 1; s <= full; ++s) {
    const SubsetMask lead = s & (~s + 1);
    const SubsetMask rest = s ^ lead;
    double acc = t.moment[s];
    // T = lead | sub for proper subsets sub of rest.
    for (SubsetMask sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
      if (sub != rest) acc -= t.cumulant[lead | sub] * t.moment[rest ^ sub];
      if (sub == 0) break;
    }
    t.cumulant[s] = acc;
  }
  return t;
}

SubsetValues cumulants_to_moments(int k, const SubsetValues& cumulants) {
  check_k(k);
  const std::vector<double> kappa = dense(k, cumulants);
  const SubsetMask full = (SubsetMask{1} << (k + 1)) - 1;
  SubsetValues out;
  std::vector<int> members;
  std::vector<SubsetMask> blocks;
  for (SubsetMask s = 1; s <= full; ++s) {
    members.clear();
    for (int i = 0; i <= k; ++i)
      if (s >> i & 1U) members.push_back(i);
    double total = 0.0;
    for_each_partition(static_cast<int>(members.size()), [&](std::span<const int> block_of) {
      blocks.assign(members.size(), 0);
      for (std::size_t j = 0; j < members.size(); ++j)
        blocks[static_cast<std::size_t>(block_of[j])] |= SubsetMask{1} << members[j];
      double prod = 1.0;
      for (SubsetMask b : blocks)
        if (b != 0) prod *= kappa[b];
      total += prod;
    });
    out[s] = total;
  }
  return out;
}

}  // namespace ergolab::correlations

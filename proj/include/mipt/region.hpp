#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace mipt {

// A subset of chain sites (sorted, unique, not necessarily contiguous).
struct Region {
  std::vector<int> sites;

  static Region of(std::vector<int> s) {
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw std::invalid_argument("region has duplicate sites");
    return Region{std::move(s)};
  }

  // half-open range [first, last)
  static Region range(int first, int last) {
    if (last < first) throw std::invalid_argument("region range reversed");
    std::vector<int> s;
    s.reserve(last - first);
    for (int i = first; i < last; ++i) s.push_back(i);
    return Region{std::move(s)};
  }

  // length sites starting at start, wrapping modulo n_sites
  static Region contiguous(int start, int length, int n_sites) {
    if (length < 0 || length > n_sites)
      throw std::invalid_argument("region length out of range");
    std::vector<int> s;
    s.reserve(length);
    for (int k = 0; k < length; ++k) s.push_back((start + k) % n_sites);
    return of(std::move(s));
  }

  int size() const { return static_cast<int>(sites.size()); }
  bool empty() const { return sites.empty(); }
};

inline void validate(const Region& region, int n_sites) {
  for (std::size_t i = 0; i < region.sites.size(); ++i) {
    if (region.sites[i] < 0 || region.sites[i] >= n_sites)
      throw std::invalid_argument("region site out of range");
    if (i > 0 && region.sites[i] <= region.sites[i - 1])
      throw std::invalid_argument("region sites must be sorted and unique");
  }
}

inline Region region_union(const Region& a, const Region& b) {
  std::vector<int> s;
  s.reserve(a.sites.size() + b.sites.size());
  std::set_union(a.sites.begin(), a.sites.end(), b.sites.begin(), b.sites.end(),
                 std::back_inserter(s));
  return Region{std::move(s)};
}

inline bool regions_disjoint(const Region& a, const Region& b) {
  std::vector<int> s;
  std::set_intersection(a.sites.begin(), a.sites.end(), b.sites.begin(), b.sites.end(),
                        std::back_inserter(s));
  return s.empty();
}

} // namespace mipt

#pragma once

// Brute-force reference computations. They share no code with the library
// beyond its public types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

inline std::vector<std::vector<unsigned>> permutations(unsigned k) {
  std::vector<unsigned> p(k);
  std::iota(p.begin(), p.end(), 0u);
  std::vector<std::vector<unsigned>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline double dcg(std::size_t rank) { return 1.0 / std::log2(1.0 + static_cast<double>(rank)); }

// A ranking is valid for a score vector when no document sits above a
// strictly higher-scored one.
inline bool consistent(const std::vector<unsigned>& y, const std::vector<double>& s) {
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    for (std::size_t j = i + 1; j < y.size(); ++j) {
      if (s[y[i]] < s[y[j]]) return false;
    }
  }
  return true;
}

inline std::vector<std::vector<unsigned>> valid_rankings(const std::vector<double>& s) {
  std::vector<std::vector<unsigned>> out;
  for (auto& y : permutations(static_cast<unsigned>(s.size()))) {
    if (consistent(y, s)) out.push_back(y);
  }
  return out;
}

// E[lambda(rank d)] under the uniform distribution over valid rankings.
inline std::vector<double> expected_weights(const std::vector<double>& s,
                                            const std::function<double(std::size_t)>& lambda) {
  const auto valid = valid_rankings(s);
  std::vector<double> out(s.size(), 0.0);
  for (const auto& y : valid) {
    for (std::size_t pos = 0; pos < y.size(); ++pos) out[y[pos]] += lambda(pos + 1);
  }
  for (double& v : out) v /= static_cast<double>(valid.size());
  return out;
}

struct Bound {
  double mean, nu, cb;
};

// Concentration bound over an explicit list of terms with range constant b.
inline Bound bound(const std::vector<double>& x, double k, double b, double epsilon) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double l = std::log(2.0 / (1.0 - epsilon));
  const double nu = 2.0 * n * l / (n - 1.0) * ss;
  return {mean, nu, 7.0 * k * b * l / (3.0 * (n - 1.0)) + std::sqrt(nu) / n};
}

}  // namespace oracle

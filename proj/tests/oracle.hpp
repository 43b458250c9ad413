#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_100;

/// P(X >= r) for X ~ Bin(n, q) by direct summation in 100-digit arithmetic.
inline Big binom_tail(int n, int r, double q_in) {
  const Big q(q_in);
  const Big one_minus = Big(1) - q;
  Big total = 0;
  Big coeff = 1;  // C(n, k)
  for (int k = 0; k <= n; ++k) {
    if (k > 0) coeff = coeff * Big(n - k + 1) / Big(k);
    if (k >= r) total += coeff * pow(q, k) * pow(one_minus, n - k);
  }
  return total;
}

inline double log10_binom_tail(int n, int r, double q) {
  return static_cast<double>(log10(binom_tail(n, r, q)));
}

}  // namespace oracle

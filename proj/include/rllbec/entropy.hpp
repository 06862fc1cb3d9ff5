#pragma once

#include <cmath>
#include <span>

namespace rllbec {

// 0*log2(0) = 0 convention throughout.
inline double xlog2x(double p) {
  return p > 0.0 ? p * std::log2(p) : 0.0;
}

/// Binary entropy h_b(p) in bits.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Shannon entropy of a (sub)distribution in bits. Entries must be >= 0.
inline double entropy_bits(std::span<const double> dist) {
  double h = 0.0;
  for (double p : dist) h -= xlog2x(p);
  return h;
}

}  // namespace rllbec

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace mspec {

// A perturbed frequency n + offset kept as an exact (integer, fraction) pair.
//
// Canonical form has offset in (-1/2, 1/2]. Storing the parts separately
// matters: for |n| ~ 1e9 the sum n + offset would round away the low bits of
// the offset, and those bits are exactly what downstream phase computations
// and equality tests depend on.
struct Frequency {
  std::int64_t n = 0;
  double offset = 0.0;

  // Renormalizes an arbitrary (integer, fraction) pair into canonical form.
  // The shift is exact in floating point: when |offset| > 1/2 the subtracted
  // integer k is within a factor of two of offset, so offset - k incurs no
  // rounding.
  static Frequency canonical(std::int64_t n, double offset) {
    if (!std::isfinite(offset)) {
      throw std::invalid_argument("frequency offset must be finite");
    }
    if (offset > 0.5 || offset <= -0.5) {
      const double k = std::ceil(offset - 0.5);
      n += static_cast<std::int64_t>(k);
      offset -= k;
    }
    return Frequency{n, offset};
  }

  static Frequency integer(std::int64_t n) { return Frequency{n, 0.0}; }

  double value() const { return static_cast<double>(n) + offset; }
  double abs_value() const { return std::fabs(value()); }
  bool is_integer() const { return offset == 0.0; }

  // For canonical forms, lexicographic comparison on (n, offset) agrees with
  // comparison of the real values, with no rounding involved.
  friend bool operator==(const Frequency& a, const Frequency& b) {
    return a.n == b.n && a.offset == b.offset;
  }
  friend bool operator<(const Frequency& a, const Frequency& b) {
    if (a.n != b.n) return a.n < b.n;
    return a.offset < b.offset;
  }
};

}  // namespace mspec

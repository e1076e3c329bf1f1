#include "mspec/trigpoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "mspec/parallel.hpp"

namespace mspec {

namespace {

constexpr long double kTwoPiL = 6.283185307179586476925286766559L;

struct Pt {
  double x, y;
};

double sq_dist(const Pt& a, const Pt& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double orientation(const Pt& o, const Pt& a, const Pt& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Squared diameter of a point set: monotone-chain hulls, then an antipodal
// two-pointer walk over the two chains.
double hull_sq_diameter(std::vector<Pt>& pts) {
  if (pts.size() < 2) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Pt& a, const Pt& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n == 1) return 0.0;
  if (n == 2) return sq_dist(pts[0], pts[1]);

  std::vector<Pt> U, L;
  U.reserve(n);
  L.reserve(n);
  for (const Pt& p : pts) {
    std::size_t usz = U.size();
    while (usz > 1 && orientation(U[usz - 2], U[usz - 1], p) <= 0.0) {
      U.pop_back();
      --usz;
    }
    U.push_back(p);
    std::size_t lsz = L.size();
    while (lsz > 1 && orientation(L[lsz - 2], L[lsz - 1], p) >= 0.0) {
      L.pop_back();
      --lsz;
    }
    L.push_back(p);
  }

  const std::size_t usz = U.size(), lsz = L.size();
  std::size_t i = 0, j = lsz - 1;
  double best = 0.0;
  while (i < usz - 1 || j > 0) {
    best = std::max(best, sq_dist(U[i], L[j]));
    if (i == usz - 1) {
      --j;
    } else if (j == 0) {
      ++i;
    } else if ((U[i + 1].y - U[i].y) * (L[j].x - L[j - 1].x) >
               (L[j].y - L[j - 1].y) * (U[i + 1].x - U[i].x)) {
      ++i;
    } else {
      --j;
    }
  }
  best = std::max(best, sq_dist(U[i], L[j]));
  return best;
}

double prefix_sq_diameter(const std::vector<Complex>& prefix, bool brute) {
  if (brute) {
    double best = 0.0;
    for (std::size_t a = 0; a + 1 < prefix.size(); ++a) {
      for (std::size_t b = a + 1; b < prefix.size(); ++b) {
        const double dx = prefix[a].real() - prefix[b].real();
        const double dy = prefix[a].imag() - prefix[b].imag();
        best = std::max(best, dx * dx + dy * dy);
      }
    }
    return best;
  }
  std::vector<Pt> pts;
  pts.reserve(prefix.size());
  for (const Complex& z : prefix) pts.push_back(Pt{z.real(), z.imag()});
  return hull_sq_diameter(pts);
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  const __int128 wide = static_cast<__int128>(a) * b;
  if (wide > std::numeric_limits<std::int64_t>::max() ||
      wide < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("frequency overflow in contraction");
  }
  return static_cast<std::int64_t>(wide);
}

// Per-term rotator state for grid evaluation. Values are refreshed from
// exact phases every kRefresh steps so multiplicative drift stays bounded by
// a few dozen ulps between refreshes.
constexpr std::size_t kRefresh = 32;

}  // namespace

double term_phase(const Frequency& freq, double x) {
  long double ph = static_cast<long double>(freq.n) * x;
  ph = std::fmod(ph, kTwoPiL);
  ph += static_cast<long double>(freq.offset) * x;
  ph = std::fmod(ph, kTwoPiL);
  return static_cast<double>(ph);
}

TrigPoly TrigPoly::from_terms(std::vector<Term> terms) {
  for (Term& t : terms) t.freq = Frequency::canonical(t.freq.n, t.freq.offset);
  // Stable sort keeps input order among equal frequencies, so merged
  // coefficients accumulate in a reproducible order.
  std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return a.freq < b.freq;
  });
  TrigPoly out;
  out.terms_.reserve(terms.size());
  for (const Term& t : terms) {
    if (!out.terms_.empty() && out.terms_.back().freq == t.freq) {
      out.terms_.back().coeff += t.coeff;
    } else {
      out.terms_.push_back(t);
    }
  }
  out.terms_.erase(std::remove_if(out.terms_.begin(), out.terms_.end(),
                                  [](const Term& t) {
                                    return t.coeff == Complex(0.0, 0.0);
                                  }),
                   out.terms_.end());
  return out;
}

CoeffNorms TrigPoly::coeff_norms() const {
  CoeffNorms out;
  for (const Term& t : terms_) {
    const double m = std::abs(t.coeff);
    out.norm1 += m;
    out.norm_inf = std::max(out.norm_inf, m);
  }
  out.degree = degree();
  return out;
}

double TrigPoly::degree() const {
  if (terms_.empty()) return 0.0;
  return std::max(terms_.front().freq.abs_value(),
                  terms_.back().freq.abs_value());
}

Complex TrigPoly::evaluate(double x) const {
  Complex acc(0.0, 0.0);
  for (const Term& t : terms_) {
    acc += t.coeff * std::polar(1.0, term_phase(t.freq, x));
  }
  return acc;
}

std::vector<Complex> TrigPoly::evaluate_grid(double x0, double step,
                                             std::size_t count) const {
  std::vector<Complex> out(count, Complex(0.0, 0.0));
  if (terms_.empty() || count == 0) return out;
  const std::size_t t = terms_.size();
  parallel_chunks(count, 256, [&](std::size_t, std::size_t begin,
                                  std::size_t end) {
    std::vector<Complex> rot(t), stepf(t);
    for (std::size_t k = 0; k < t; ++k) {
      stepf[k] = std::polar(1.0, term_phase(terms_[k].freq, step));
    }
    for (std::size_t g = begin; g < end; ++g) {
      if ((g - begin) % kRefresh == 0) {
        const double x = x0 + static_cast<double>(g) * step;
        for (std::size_t k = 0; k < t; ++k) {
          rot[k] = std::polar(1.0, term_phase(terms_[k].freq, x));
        }
      }
      Complex acc(0.0, 0.0);
      for (std::size_t k = 0; k < t; ++k) acc += terms_[k].coeff * rot[k];
      out[g] = acc;
      for (std::size_t k = 0; k < t; ++k) rot[k] *= stepf[k];
    }
  });
  return out;
}

Complex TrigPoly::window_sum(double a, double b, double x) const {
  Complex acc(0.0, 0.0);
  for (const Term& t : terms_) {
    const double v = t.freq.value();
    if (v >= a && v <= b) acc += t.coeff * std::polar(1.0, term_phase(t.freq, x));
  }
  return acc;
}

double TrigPoly::majorant_bruteforce(double x) const {
  std::vector<Complex> prefix(terms_.size() + 1, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    prefix[k + 1] =
        prefix[k] + terms_[k].coeff * std::polar(1.0, term_phase(terms_[k].freq, x));
  }
  return std::sqrt(prefix_sq_diameter(prefix, /*brute=*/true));
}

double TrigPoly::majorant(double x) const {
  std::vector<Complex> prefix(terms_.size() + 1, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    prefix[k + 1] =
        prefix[k] + terms_[k].coeff * std::polar(1.0, term_phase(terms_[k].freq, x));
  }
  return std::sqrt(prefix_sq_diameter(prefix, /*brute=*/false));
}

std::vector<double> TrigPoly::majorant_grid(double x0, double step,
                                            std::size_t count) const {
  std::vector<double> out(count, 0.0);
  if (terms_.empty() || count == 0) return out;
  const std::size_t t = terms_.size();
  parallel_chunks(count, 64, [&](std::size_t, std::size_t begin,
                                 std::size_t end) {
    std::vector<Complex> rot(t), stepf(t);
    std::vector<Complex> prefix(t + 1);
    std::vector<Pt> pts;
    for (std::size_t k = 0; k < t; ++k) {
      stepf[k] = std::polar(1.0, term_phase(terms_[k].freq, step));
    }
    for (std::size_t g = begin; g < end; ++g) {
      if ((g - begin) % kRefresh == 0) {
        const double x = x0 + static_cast<double>(g) * step;
        for (std::size_t k = 0; k < t; ++k) {
          rot[k] = std::polar(1.0, term_phase(terms_[k].freq, x));
        }
      }
      prefix[0] = Complex(0.0, 0.0);
      for (std::size_t k = 0; k < t; ++k) {
        prefix[k + 1] = prefix[k] + terms_[k].coeff * rot[k];
      }
      pts.clear();
      pts.reserve(t + 1);
      for (const Complex& z : prefix) pts.push_back(Pt{z.real(), z.imag()});
      out[g] = std::sqrt(hull_sq_diameter(pts));
      for (std::size_t k = 0; k < t; ++k) rot[k] *= stepf[k];
    }
  });
  return out;
}

TrigPoly TrigPoly::contract(std::int64_t l) const {
  if (l < 1) throw std::invalid_argument("contraction scale must be >= 1");
  std::vector<Term> terms;
  terms.reserve(terms_.size());
  for (const Term& t : terms_) {
    terms.push_back(Term{
        Frequency::canonical(checked_mul(t.freq.n, l),
                             t.freq.offset * static_cast<double>(l)),
        t.coeff});
  }
  return from_terms(std::move(terms));
}

TrigPoly TrigPoly::multiply(const TrigPoly& a, const TrigPoly& b) {
  std::vector<Term> terms;
  terms.reserve(a.size() * b.size());
  for (const Term& ta : a.terms_) {
    for (const Term& tb : b.terms_) {
      terms.push_back(Term{
          Frequency::canonical(ta.freq.n + tb.freq.n,
                               ta.freq.offset + tb.freq.offset),
          ta.coeff * tb.coeff});
    }
  }
  return from_terms(std::move(terms));
}

TrigPoly TrigPoly::add(const TrigPoly& a, const TrigPoly& b) {
  std::vector<Term> terms;
  terms.reserve(a.size() + b.size());
  terms.insert(terms.end(), a.terms_.begin(), a.terms_.end());
  terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
  return from_terms(std::move(terms));
}

TrigPoly TrigPoly::scaled(Complex factor) const {
  std::vector<Term> terms = terms_;
  for (Term& t : terms) t.coeff *= factor;
  return from_terms(std::move(terms));
}

TrigPoly TrigPoly::symmetric_cutoff(double cutoff) const {
  TrigPoly out;
  for (const Term& t : terms_) {
    if (t.freq.abs_value() <= cutoff) out.terms_.push_back(t);
  }
  return out;
}

BlockProduct::BlockProduct(TrigPoly modulator, TrigPoly base, std::int64_t scale)
    : modulator_(std::move(modulator)),
      base_(std::move(base)),
      scale_(scale) {
  for (const Term& t : modulator_.terms()) {
    if (!t.freq.is_integer()) {
      throw std::invalid_argument("block product needs an integer-spectrum modulator");
    }
  }
  if (base_.empty() || modulator_.empty()) {
    throw std::invalid_argument("block product needs nonempty factors");
  }
  const double base_deg = base_.degree();
  if (!(static_cast<double>(scale_) > 2.0 * base_deg)) {
    throw std::invalid_argument(
        "block product needs scale > 2 * base degree, got scale " +
        std::to_string(scale_) + " vs degree " + std::to_string(base_deg));
  }

  product_ = TrigPoly::multiply(modulator_.contract(scale_), base_);

  // Verify the disjoint-block structure: term (j_idx, p_idx) in lexicographic
  // order must be exactly the product term in storage (frequency) order, with
  // the coefficient equal to the one complex product of the factors.
  const auto& q = modulator_.terms();
  const auto& p = base_.terms();
  if (product_.size() != q.size() * p.size()) {
    throw std::runtime_error("block product lost terms (collision or underflow)");
  }
  factor_index_.reserve(product_.size());
  std::size_t idx = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (std::size_t m = 0; m < p.size(); ++m, ++idx) {
      const Term& got = product_.terms()[idx];
      const std::int64_t want_n = checked_mul(q[j].freq.n, scale_) + p[m].freq.n;
      const Complex want_c = q[j].coeff * p[m].coeff;
      if (got.freq.n != want_n || got.freq.offset != p[m].freq.offset ||
          got.coeff != want_c) {
        throw std::runtime_error("block product structure check failed");
      }
      factor_index_.emplace_back(j, m);
    }
  }
}

BlockProduct::NormIdentity BlockProduct::norm1_identity() const {
  const auto& q = modulator_.terms();
  const auto& p = base_.terms();
  std::vector<double> qmag(q.size()), pmag(p.size());
  for (std::size_t j = 0; j < q.size(); ++j) qmag[j] = std::abs(q[j].coeff);
  for (std::size_t m = 0; m < p.size(); ++m) pmag[m] = std::abs(p[m].coeff);

  NormIdentity out;
  for (std::size_t i = 0; i < product_.size(); ++i) {
    const auto [j, m] = factor_index_[i];
    out.from_product += qmag[j] * pmag[m];
  }
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (std::size_t m = 0; m < p.size(); ++m) {
      out.from_factors += qmag[j] * pmag[m];
    }
  }
  return out;
}

BlockProduct::TransferBound BlockProduct::transfer_bound(
    double x, double modulator_majorant_sup) const {
  TransferBound out;
  out.lhs = product_.majorant(x);
  const double px = std::abs(base_.evaluate(x));
  const double pstar = base_.majorant(x);
  const double qinf = modulator_.coeff_norms().norm_inf;
  out.rhs = px * modulator_majorant_sup + 2.0 * pstar * qinf;
  out.slack = out.rhs - out.lhs;
  return out;
}

double BlockProduct::modulator_majorant_sup(const std::vector<double>& xs,
                                            std::size_t scan_points) const {
  double sup = 0.0;
  if (scan_points > 0) {
    const double h = 2.0 * M_PI / static_cast<double>(scan_points);
    const std::vector<double> scan =
        modulator_.majorant_grid(-M_PI, h, scan_points);
    for (double v : scan) sup = std::max(sup, v);
  }
  // The mapped points l*x mod 2pi are where the whole-block windows of the
  // product actually sample the modulator majorant; including them makes the
  // transfer bound hold pointwise at each x, not only up to grid resolution.
  for (double x : xs) {
    const long double y = std::fmod(
        static_cast<long double>(scale_) * static_cast<long double>(x), kTwoPiL);
    sup = std::max(sup, modulator_.majorant(static_cast<double>(y)));
  }
  return sup;
}

}  // namespace mspec

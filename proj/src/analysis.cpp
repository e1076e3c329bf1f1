#include "mspec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mspec::analysis {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

}  // namespace

ExceedanceReport measure_exceedance(const GridFunction& g,
                                    const GridFunction& h, double threshold) {
  if (g.half_length() != h.half_length() || g.step() != h.step() ||
      g.count() != h.count())
    throw std::invalid_argument("measure_exceedance: grid mismatch");
  if (!(threshold >= 0.0))
    throw std::invalid_argument("measure_exceedance: negative threshold");

  ExceedanceReport rep;
  rep.sample_count = g.count();
  bool prev = false;
  std::size_t flips = 0;
  for (std::size_t j = 0; j < g.count(); ++j) {
    const bool exceed = std::abs(g.samples()[j] - h.samples()[j]) > threshold;
    if (exceed) ++rep.exceed_count;
    if (j > 0 && exceed != prev) ++flips;
    prev = exceed;
  }
  rep.measure = g.step() * static_cast<double>(rep.exceed_count);
  rep.uncertainty = g.step() * static_cast<double>(flips);
  return rep;
}

ProductBoundReport check_special_product_bound(const BlockProduct& product,
                                               double x0, double step,
                                               std::size_t count) {
  ProductBoundReport rep;
  rep.grid_count = count;
  if (count == 0) return rep;
  std::vector<double> xs(count);
  for (std::size_t j = 0; j < count; ++j)
    xs[j] = x0 + static_cast<double>(j) * step;
  rep.modulator_majorant_sup = product.modulator_majorant_sup(xs);
  double min_slack = std::numeric_limits<double>::infinity();
  for (double x : xs) {
    const auto bound = product.transfer_bound(x, rep.modulator_majorant_sup);
    min_slack = std::min(min_slack, bound.slack);
  }
  rep.min_slack = min_slack;
  return rep;
}

std::complex<double> delta_multiplier(const Frequency& freq, int k) {
  if (k < 1) throw std::invalid_argument("delta_multiplier: k must be >= 1");
  const std::complex<double> base =
      freq.offset == 0.0
          ? std::complex<double>(0.0, 0.0)
          : std::complex<double>(1.0, 0.0) -
                std::polar(1.0, -kTwoPi * freq.offset);
  std::complex<double> z(1.0, 0.0);
  for (int i = 0; i < k; ++i) z *= base;
  return z;
}

ObstructionReport smoothing_obstruction(double beta, double alpha, int k,
                                        double c,
                                        std::int64_t tail_start) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("smoothing_obstruction: alpha must be > 0");
  if (k < 1)
    throw std::invalid_argument("smoothing_obstruction: k must be >= 1");
  if (!(c > 0.0))
    throw std::invalid_argument("smoothing_obstruction: c must be > 0");
  if (tail_start < 1)
    throw std::invalid_argument("smoothing_obstruction: tail_start must be >= 1");

  ObstructionReport rep;
  rep.beta = beta;
  rep.alpha = alpha;
  rep.c = c;
  rep.k = k;
  rep.tail_start = tail_start;
  rep.converges = alpha * static_cast<double>(k) > beta + 1.0;
  const double ratio = (beta + 1.0) / alpha;
  rep.k_min = static_cast<int>(std::floor(ratio)) + 1;
  if (rep.converges) {
    const double n0 = static_cast<double>(tail_start);
    const double expo = beta - alpha * static_cast<double>(k) + 1.0;
    rep.tail_bound = std::pow(kTwoPi * c, static_cast<double>(k)) *
                     std::pow(n0, expo) /
                     (alpha * static_cast<double>(k) - beta - 1.0);
  }
  return rep;
}

std::vector<CutoffDeviation> symmetric_convergence(
    const std::vector<TrigPoly>& stage_blocks,
    const std::vector<double>& cutoffs, const std::vector<double>& xs) {
  // Absolute frequency range of each block.
  struct Range {
    double lo = 0.0, hi = 0.0;
  };
  std::vector<Range> ranges;
  ranges.reserve(stage_blocks.size());
  for (const TrigPoly& block : stage_blocks) {
    Range r;
    bool first = true;
    for (const Term& t : block.terms()) {
      const double a = t.freq.abs_value();
      if (first || a < r.lo) r.lo = a;
      if (first || a > r.hi) r.hi = a;
      first = false;
    }
    ranges.push_back(r);
  }

  std::vector<CutoffDeviation> out;
  out.reserve(cutoffs.size());
  for (double cutoff : cutoffs) {
    CutoffDeviation dev;
    dev.cutoff = cutoff;
    int below = 0;
    int inside = -1;
    for (std::size_t b = 0; b < ranges.size(); ++b) {
      if (stage_blocks[b].empty()) {
        // An empty block is below every cutoff by convention.
        ++below;
      } else if (ranges[b].hi <= cutoff) {
        ++below;
      } else if (ranges[b].lo <= cutoff) {
        inside = static_cast<int>(b);
      }
    }
    dev.blocks_below = below;
    dev.splits_block = inside >= 0;

    // Deviation from the reference partial sum equals the excluded tail of
    // the split block; with no split block the tail is empty and the
    // deviation is exactly zero.
    if (inside >= 0) {
      std::vector<Term> tail;
      for (const Term& t :
           stage_blocks[static_cast<std::size_t>(inside)].terms())
        if (t.freq.abs_value() > cutoff) tail.push_back(t);
      const TrigPoly tail_poly = TrigPoly::from_terms(std::move(tail));
      double sup = 0.0;
      for (double x : xs) sup = std::max(sup, std::abs(tail_poly.evaluate(x)));
      dev.sup_dev = sup;
    }
    out.push_back(dev);
  }
  return out;
}

}  // namespace mspec::analysis

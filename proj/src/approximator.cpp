#include "mspec/approximator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "mspec/parallel.hpp"

namespace mspec::approximator {
namespace {

constexpr double kPi = std::numbers::pi_v<double>;
constexpr std::size_t kRowChunk = 256;
constexpr std::size_t kRefresh = 32;
constexpr int kReweightRounds = 5;

struct Accumulated {
  Eigen::MatrixXcd normal;
  Eigen::VectorXcd rhs;
};

// Weighted normal equations sum_j w_j e(x_j)^H e(x_j) and
// sum_j w_j e(x_j)^H y_j for the row system e(x) = (e^{i f_q x})_q,
// accumulated over a fixed chunk partition and combined in chunk order, so
// the result does not depend on the thread count. Per-frequency rotators are
// refreshed from exact phases every few steps, as in grid evaluation.
Accumulated assemble(const GridFunction& target,
                     const std::vector<Frequency>& freqs,
                     const std::vector<double>& weights) {
  const auto m = static_cast<Eigen::Index>(freqs.size());
  Accumulated zero{Eigen::MatrixXcd::Zero(m, m), Eigen::VectorXcd::Zero(m)};
  return parallel_reduce<Accumulated>(
      target.count(), std::move(zero),
      [&](std::size_t begin, std::size_t end) {
        Accumulated part{Eigen::MatrixXcd::Zero(m, m),
                         Eigen::VectorXcd::Zero(m)};
        Eigen::VectorXcd row(m);
        std::vector<std::complex<double>> stepf(freqs.size());
        for (std::size_t q = 0; q < freqs.size(); ++q)
          stepf[q] = std::polar(1.0, term_phase(freqs[q], target.step()));
        for (std::size_t j = begin; j < end; ++j) {
          if ((j - begin) % kRefresh == 0) {
            for (std::size_t q = 0; q < freqs.size(); ++q)
              row[static_cast<Eigen::Index>(q)] =
                  std::polar(1.0, term_phase(freqs[q], target.x(j)));
          } else {
            for (Eigen::Index q = 0; q < m; ++q)
              row[q] *= stepf[static_cast<std::size_t>(q)];
          }
          const double w = weights[j];
          if (w == 0.0) continue;
          part.normal.noalias() += w * (row.conjugate() * row.transpose());
          part.rhs.noalias() += (w * target.samples()[j]) * row.conjugate();
        }
        return part;
      },
      [](Accumulated acc, const Accumulated& part) {
        acc.normal += part.normal;
        acc.rhs += part.rhs;
        return acc;
      },
      kRowChunk);
}

struct Iterate {
  TrigPoly poly;
  FitReport report;
};

// Independent quality pass: everything here is recomputed from the
// polynomial and the grid, never taken from least-squares internals.
FitReport measure_fit(const TrigPoly& poly, const GridFunction& target,
                      double eta) {
  FitReport rep;
  rep.eta = eta;
  const std::vector<std::complex<double>> vals =
      poly.evaluate_grid(-target.half_length(), target.step(), target.count());
  const double h = target.step();
  std::size_t bad = 0;
  double good_sup = 0.0;
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < target.count(); ++j) {
    const double err = std::abs(vals[j] - target.samples()[j]);
    sum_sq += err * err;
    if (err > eta) {
      ++bad;
    } else {
      good_sup = std::max(good_sup, err);
    }
  }
  rep.bad_measure =
      std::min(h * static_cast<double>(bad), 2.0 * target.half_length());
  rep.good_sup = good_sup;
  rep.residual_l2 = std::sqrt(h * sum_sq);
  rep.coeff_norm1 = poly.coeff_norms().norm1;
  return rep;
}

bool better_iterate(const Iterate& a, const Iterate& b) {
  if (a.report.bad_measure != b.report.bad_measure)
    return a.report.bad_measure < b.report.bad_measure;
  return a.report.good_sup < b.report.good_sup;
}

// Shifted frequencies q + sigma(q) for |q| <= degree, canonical and exact,
// thinned to the lowest |q| when the profile collides.
std::vector<Frequency> system_frequencies(const ShiftProfile& profile,
                                          std::int64_t degree) {
  std::vector<Frequency> freqs;
  freqs.reserve(static_cast<std::size_t>(2 * degree + 1));
  for (std::int64_t q = -degree; q <= degree; ++q) {
    const Frequency f = Frequency::canonical(q, profile.sigma(q));
    bool seen = false;
    for (const Frequency& g : freqs)
      if (g == f) seen = true;
    if (!seen) freqs.push_back(f);
  }
  return freqs;
}

}  // namespace

std::pair<TrigPoly, FitReport> fit_in_measure(const GridFunction& target,
                                              double eta, double mu,
                                              const ShiftProfile& profile,
                                              std::int64_t max_degree) {
  if (!(eta > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("fit: eta and mu must be positive");
  if (max_degree < 0)
    throw std::invalid_argument("fit: max_degree must be non-negative");
  if (target.count() == 0)
    throw std::invalid_argument("fit: empty target grid");
  for (const auto& v : target.samples())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("fit: non-finite target samples");

  // Aliasing guard: never fit frequencies the grid cannot resolve
  // (step <= pi / (4 (D + 1))).
  const auto alias_cap =
      static_cast<std::int64_t>(std::floor(kPi / (4.0 * target.step()))) - 1;
  const std::int64_t cap =
      std::max<std::int64_t>(0, std::min(max_degree, alias_cap));

  const double regularization = 1e-10 * static_cast<double>(target.count());
  std::vector<std::pair<std::int64_t, double>> trace;

  Iterate best;
  best.report = measure_fit(TrigPoly(), target, eta);
  best.report.degree_used = 0;
  trace.emplace_back(0, best.report.bad_measure);

  std::int64_t degree = std::min<std::int64_t>(6, cap);
  bool done = best.report.bad_measure < mu;
  while (!done) {
    const std::vector<Frequency> freqs = system_frequencies(profile, degree);
    std::vector<double> weights(target.count(), 1.0);
    for (int round = 0; round < kReweightRounds; ++round) {
      Accumulated acc = assemble(target, freqs, weights);
      for (Eigen::Index d = 0; d < acc.normal.rows(); ++d)
        acc.normal(d, d) += regularization;
      const Eigen::VectorXcd coeff = acc.normal.ldlt().solve(acc.rhs);

      std::vector<Term> terms;
      terms.reserve(freqs.size());
      for (std::size_t q = 0; q < freqs.size(); ++q) {
        const std::complex<double> c = coeff[static_cast<Eigen::Index>(q)];
        if (std::abs(c) < 1e-12) continue;
        terms.push_back({freqs[q], c});
      }
      Iterate it;
      it.poly = TrigPoly::from_terms(std::move(terms));
      it.report = measure_fit(it.poly, target, eta);
      it.report.degree_used = degree;

      // Reweight from this round's residuals before the iterate is possibly
      // moved into `best`: settled points get light weight, hopeless spikes
      // are abandoned, the contested band keeps full weight.
      if (round + 1 < kReweightRounds) {
        const std::vector<std::complex<double>> vals = it.poly.evaluate_grid(
            -target.half_length(), target.step(), target.count());
        for (std::size_t j = 0; j < target.count(); ++j) {
          const double err = std::abs(vals[j] - target.samples()[j]);
          if (err <= 0.5 * eta) {
            weights[j] = 0.1;
          } else if (err > 4.0 * eta) {
            const double ratio = 4.0 * eta / err;
            weights[j] = std::min(1.0, ratio * ratio);
          } else {
            weights[j] = 1.0;
          }
        }
      }

      if (better_iterate(it, best)) {
        trace.emplace_back(degree, it.report.bad_measure);
        best = std::move(it);
        if (best.report.bad_measure < mu) {
          done = true;
          break;
        }
      }
    }
    if (degree >= cap) break;
    degree = std::min(cap, 2 * degree);
  }

  best.report.success = best.report.bad_measure < mu;
  best.report.mu = mu;
  best.report.regularization = regularization;
  best.report.trace = std::move(trace);
  return {best.poly, best.report};
}

GridFunction residual(const GridFunction& target, const TrigPoly& S) {
  GridFunction out = target;
  const std::vector<std::complex<double>> vals =
      S.evaluate_grid(-target.half_length(), target.step(), target.count());
  for (std::size_t j = 0; j < target.count(); ++j)
    out.samples()[j] = target.samples()[j] - vals[j];
  return out;
}

}  // namespace mspec::approximator

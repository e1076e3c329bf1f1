#include "mspec/representer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "mspec/parallel.hpp"

namespace mspec::representer {
namespace {

constexpr double kPi = std::numbers::pi_v<double>;

double stage_pow(int stage, int power) {
  double v = 1.0;
  for (int i = 0; i < power; ++i) v *= static_cast<double>(stage);
  return v;
}

void require_stage(int stage) {
  if (stage < 1) throw std::invalid_argument("stages are numbered from 1");
}

// Largest |lambda| of the polynomial's terms as an exact-ish double; used to
// order terms for the symmetric-tail majorant deterministically.
struct TailOrderEntry {
  double abs_freq = 0.0;
  std::size_t index = 0;
};

std::vector<TailOrderEntry> tail_order(const TrigPoly& poly) {
  std::vector<TailOrderEntry> order(poly.size());
  for (std::size_t t = 0; t < poly.size(); ++t) {
    const Frequency& f = poly.terms()[t].freq;
    order[t].abs_freq = f.abs_value();
    order[t].index = t;
  }
  std::sort(order.begin(), order.end(),
            [](const TailOrderEntry& a, const TailOrderEntry& b) {
              if (a.abs_freq != b.abs_freq) return a.abs_freq > b.abs_freq;
              return a.index < b.index;
            });
  return order;
}

// max over cut positions of |sum of the terms with |lambda| beyond the cut|,
// evaluated at x: prefix maxima over terms in descending-|lambda| order.
double symmetric_tail_majorant(const TrigPoly& poly,
                               const std::vector<TailOrderEntry>& order,
                               double x) {
  Complex sum = 0.0;
  double best = 0.0;
  for (const TailOrderEntry& e : order) {
    const Term& t = poly.terms()[e.index];
    sum += t.coeff * std::polar(1.0, term_phase(t.freq, x));
    best = std::max(best, std::abs(sum));
  }
  return best;
}

}  // namespace

double Schedule::eta(int stage) const {
  require_stage(stage);
  if (name == "paper") return 1.0 / stage_pow(stage, 4);
  return eta0 / stage_pow(stage, 2);
}

double Schedule::mu(int stage) const {
  require_stage(stage);
  if (name == "paper") return 1.0 / stage_pow(stage, 2);
  return mu0 / static_cast<double>(stage);
}

double Schedule::eps(int stage) const {
  require_stage(stage);
  if (name == "paper") return 1.0 / stage_pow(stage, 3);
  return eps0 * std::pow(eps_shrink, stage - 1);
}

double Schedule::delta(int stage, double coeff_norm1) const {
  require_stage(stage);
  if (name == "paper") {
    // 1 / (N^4 ||F^||_1), kept inside the valid coefficient-cap range for
    // tiny targets.
    const double raw = 1.0 / (stage_pow(stage, 4) * coeff_norm1);
    return std::min(0.9, raw);
  }
  return delta0 * std::pow(delta_shrink, stage - 1) / std::max(1.0, coeff_norm1);
}

Schedule Schedule::desk() { return Schedule{}; }

Schedule Schedule::paper() {
  Schedule s;
  s.name = "paper";
  return s;
}

std::int64_t KConstraints::resolve() const {
  const std::int64_t floor_bound = std::max(
      std::max(above_prev_k, above_deg_f),
      std::max(above_norm_ratio, above_deg_q));
  return std::max<std::int64_t>(2, floor_bound + 1);
}

StageParameters choose_parameters(const TrigPoly& f, int stage,
                                  std::int64_t prev_k,
                                  const Schedule& schedule) {
  require_stage(stage);
  StageParameters p;
  p.delta_n = schedule.delta(stage, f.coeff_norms().norm1);
  p.eps_n = schedule.eps(stage);
  p.k_constraints.above_prev_k = std::max<std::int64_t>(1, prev_k);
  p.k_constraints.above_deg_f =
      static_cast<std::int64_t>(std::floor(3.0 * f.degree()));
  return p;
}

RepresentationState::RepresentationState(PerturbedSpectrum spectrum,
                                         ShiftProfile profile, TargetFn target,
                                         std::string target_name,
                                         Schedule schedule)
    : spectrum_(std::move(spectrum)),
      profile_(std::move(profile)),
      target_(std::move(target)),
      target_name_(std::move(target_name)),
      schedule_(std::move(schedule)) {
  if (!target_) throw std::invalid_argument("representation needs a target");
  if (schedule_.fit_degree_max < 1) {
    throw std::invalid_argument("fit degree cap must be >= 1");
  }
  if (schedule_.core_grid_cells < 16) {
    throw std::invalid_argument("core grid needs >= 16 cells");
  }
  if (!(schedule_.jitter_scale >= 0.0) || !(schedule_.jitter_scale < 1.0)) {
    throw std::invalid_argument("jitter scale must lie in [0, 1)");
  }

  // Stage grids use the finest power-of-two fraction of pi that is still
  // aliasing-safe for the fit degree cap: step <= pi / (4 (D_max + 1)).
  const double needed = 4.0 * static_cast<double>(schedule_.fit_degree_max + 1);
  int p = 1;
  while (std::ldexp(1.0, p) < needed) ++p;
  stage_step_ = kPi / std::ldexp(1.0, p);

  const std::size_t cells = schedule_.core_grid_cells;
  const double h = 2.0 * kPi / static_cast<double>(cells);
  core_points_.resize(cells);
  core_target_.resize(cells);
  core_bad_.assign(cells, false);
  for (std::size_t j = 0; j < cells; ++j) {
    const double x = -kPi + (static_cast<double>(j) + 0.5) * h;
    core_points_[j] = x;
    const Complex v = target_(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("target is not finite on the core grid");
    }
    core_target_[j] = v;
  }

  partial_sums_.emplace_back();  // S_0 = 0
}

GridFunction RepresentationState::sample_target(double half_length,
                                                double step) const {
  GridFunction g(half_length, step);
  for (std::size_t j = 0; j < g.count(); ++j) g.samples()[j] = target_(g.x(j));
  return g;
}

const TrigPoly& RepresentationState::partial_sum(std::size_t n) const {
  if (n >= partial_sums_.size()) {
    throw std::out_of_range("partial sum index exceeds completed stages");
  }
  return partial_sums_[n];
}

std::optional<StageFailure> RepresentationState::run_stage() {
  const int stage = static_cast<int>(stages_.size()) + 1;
  const double eta_n = schedule_.eta(stage);
  const double mu_n = schedule_.mu(stage);

  // ---- residual of the previous partial sum on this stage's grid
  const GridFunction target_grid =
      sample_target(static_cast<double>(stage) * kPi, stage_step_);
  const GridFunction resid =
      approximator::residual(target_grid, partial_sums_.back());

  // ---- fit the residual in measure
  auto [f, fit] = approximator::fit_in_measure(resid, eta_n, mu_n, profile_,
                                               schedule_.fit_degree_max);
  if (!fit.success) {
    std::ostringstream msg;
    msg << "fit stalled at degree " << fit.degree_used << " with bad measure "
        << fit.bad_measure << " (budget mu_N = " << fit.mu << ")";
    return StageFailure{"fit", msg.str()};
  }

  StageRecord rec;
  rec.stage = stage;
  rec.diagnostics.fit = fit;
  rec.f = f;

  std::int64_t prev_k = 0;
  for (const StageRecord& r : stages_) prev_k = std::max(prev_k, r.k);

  const double f_norm1 = f.coeff_norms().norm1;
  StageParameters params = choose_parameters(f, stage, prev_k, schedule_);
  rec.delta_n = params.delta_n;
  rec.eps_n = params.eps_n;

  std::optional<BlockProduct> product;
  if (!f.empty()) {
    // ---- correction polynomial for this stage's targets
    correction::BuildParams cp;
    cp.eps = params.eps_n;
    cp.delta = params.delta_n;
    cp.strategy = schedule_.correction_strategy;
    const double plan =
        std::ceil(1.35 * 2.5 / (params.eps_n * params.delta_n));
    cp.degree_budget = static_cast<std::size_t>(std::clamp(
        plan, 32.0, static_cast<double>(schedule_.correction_budget_cap)));
    cp.max_rounds = schedule_.correction_rounds;
    correction::BuildResult built = correction::build_correction(cp);
    if (!built.success) {
      return StageFailure{"correction", built.diagnostics};
    }
    rec.q = std::move(built.correction);

    // ---- resolve k_N against every recorded lower bound
    const CoeffNorms q_norms = rec.q.poly.coeff_norms();
    params.k_constraints.above_norm_ratio =
        static_cast<std::int64_t>(std::floor(q_norms.norm1 / params.delta_n));
    params.k_constraints.above_deg_q =
        static_cast<std::int64_t>(std::floor(q_norms.degree));
    rec.k = params.k_constraints.resolve();

    // Scanned (unplanted) witnesses never enter the spectrum's own records,
    // so the disjointness floor also covers the stage history.
    std::int64_t prior_reach = spectrum_.max_witness_reach();
    for (const StageRecord& r : stages_) {
      if (r.witness.k > 0) prior_reach = std::max(prior_reach, r.witness.reach());
    }
    const std::int64_t l_min = std::max(
        {static_cast<std::int64_t>(std::floor(2.0 * f.degree())) + 1,
         2 * rec.k - 1, prior_reach + rec.k});
    const double tolerance =
        1.0 / (static_cast<double>(rec.k) * static_cast<double>(rec.k));
    const double jitter = schedule_.jitter_scale * tolerance;

    // ---- block product structure check before any state mutation
    try {
      product.emplace(rec.q.poly, f, l_min);
    } catch (const std::exception& e) {
      return StageFailure{"product", e.what()};
    }

    // ---- acquire the witness block (the only state mutation that can fail)
    if (schedule_.witness_scan) {
      const auto found =
          spectrum_.scan_l(rec.k, l_min, l_min + schedule_.witness_scan_range,
                           profile_, tolerance, prior_reach);
      if (!found) {
        std::ostringstream msg;
        msg << "no natural block with k = " << rec.k << " in l range ["
            << l_min << ", " << l_min + schedule_.witness_scan_range << "]";
        return StageFailure{"witness", msg.str()};
      }
      if (*found != l_min) {
        // rebuild the product at the scanned l
        try {
          product.emplace(rec.q.poly, f, *found);
        } catch (const std::exception& e) {
          return StageFailure{"product", e.what()};
        }
      }
      rec.witness =
          BlockWitness{rec.k, *found, tolerance, 0.0, profile_};
    } else {
      try {
        rec.witness = spectrum_.plant_witness(rec.k, l_min, profile_, jitter,
                                              tolerance);
      } catch (const std::exception& e) {
        return StageFailure{"witness", e.what()};
      }
    }

    const ConditionReport cond = spectrum_.check_condition(
        rec.witness.k, rec.witness.l, profile_, rec.witness.tolerance);
    if (!cond.satisfied) {
      throw std::logic_error("acquired witness block fails its own condition");
    }

    // ---- transplant the block product onto the perturbed spectrum
    rec.h = product->product();
    std::vector<Term> a_terms;
    a_terms.reserve(rec.h.size());
    for (const Term& ht : rec.h.terms()) {
      a_terms.push_back(Term{spectrum_.lambda(ht.freq.n), ht.coeff});
    }
    rec.a = TrigPoly::from_terms(std::move(a_terms));
    if (rec.a.size() != rec.h.size()) {
      throw std::logic_error("spectrum transplant collided frequencies");
    }
  } else {
    rec.no_op = true;  // residual already within threshold: A_N = 0
  }

  // ---- stage-grid diagnostics
  StageDiagnostics& d = rec.diagnostics;
  const double offset_bound =
      schedule_.witness_scan ? rec.witness.tolerance : rec.witness.jitter;
  if (!rec.no_op) {
    const double x0 = target_grid.x(0);
    const std::size_t count = target_grid.count();
    GridFunction h_vals(target_grid.half_length(), target_grid.step());
    h_vals.samples() = rec.h.evaluate_grid(x0, stage_step_, count);
    GridFunction f_vals(target_grid.half_length(), target_grid.step());
    f_vals.samples() = f.evaluate_grid(x0, stage_step_, count);
    const analysis::ExceedanceReport ex = analysis::measure_exceedance(
        h_vals, f_vals, params.delta_n * f_norm1);
    d.h_minus_f_bad_measure = ex.measure;
    d.h_minus_f_bad_target = static_cast<double>(stage) * params.eps_n;

    const std::vector<Complex> a_vals =
        rec.a.evaluate_grid(x0, stage_step_, count);
    double sup = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      sup = std::max(sup, std::abs(a_vals[j] - h_vals.samples()[j]));
    }
    d.a_minus_h_sup = sup;
    const double h_norm1 = rec.h.coeff_norms().norm1;
    d.a_minus_h_target =
        h_norm1 * offset_bound * static_cast<double>(stage) * kPi;
    d.a_coeff_norm1 = rec.a.coeff_norms().norm1;
    d.a_coeff_norm1_target =
        static_cast<double>(rec.k) * f_norm1 * params.delta_n;
  }

  // ---- core-grid accounting: fresh exceptional mass and tail majorant
  const std::size_t cells = core_points_.size();
  const double cell = 2.0 * kPi / static_cast<double>(cells);
  const double core_x0 = core_points_.front();
  const std::vector<Complex> s_prev_core =
      partial_sums_.back().evaluate_grid(core_x0, cell, cells);
  const std::vector<Complex> a_core =
      rec.no_op ? std::vector<Complex>(cells, Complex{0.0, 0.0})
                : rec.a.evaluate_grid(core_x0, cell, cells);

  d.residual_threshold =
      eta_n + params.delta_n * f_norm1 + d.a_minus_h_target;
  std::vector<std::size_t> fresh;
  for (std::size_t j = 0; j < cells; ++j) {
    if (core_bad_[j]) continue;
    const Complex residual_j = core_target_[j] - s_prev_core[j];
    if (std::abs(a_core[j] - residual_j) > d.residual_threshold) {
      fresh.push_back(j);
    }
  }
  d.bad_measure_rn = cell * static_cast<double>(fresh.size());
  for (const std::size_t j : fresh) core_bad_[j] = true;

  if (!rec.no_op) {
    const std::vector<TailOrderEntry> order = tail_order(rec.a);
    std::vector<double> majorant(cells, 0.0);
    parallel_chunks(cells, 64,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                      for (std::size_t j = begin; j < end; ++j) {
                        if (core_bad_[j]) continue;
                        majorant[j] = symmetric_tail_majorant(
                            rec.a, order, core_points_[j]);
                      }
                    });
    d.a_majorant_sup = *std::max_element(majorant.begin(), majorant.end());
  }

  // ---- commit
  TrigPoly next_sum = TrigPoly::add(partial_sums_.back(), rec.a);
  stages_.push_back(std::move(rec));
  partial_sums_.push_back(std::move(next_sum));
  return std::nullopt;
}

analysis::ConvergenceTrace RepresentationState::trace() const {
  analysis::ConvergenceTrace trace;
  std::vector<TrigPoly> blocks;
  std::vector<double> xs;
  for (std::size_t j = 0; j < core_points_.size(); ++j) {
    if (!core_bad_[j]) xs.push_back(core_points_[j]);
  }
  for (const StageRecord& r : stages_) {
    analysis::TraceRow row;
    row.stage = r.stage;
    row.bad_measure_rn = r.diagnostics.bad_measure_rn;
    row.a_majorant_sup = r.diagnostics.a_majorant_sup;
    if (!r.a.empty()) {
      blocks.push_back(r.a);
      // Probe cutoff through the middle of this stage's block: the worst
      // case for a symmetric partial sum truncated mid-block.
      std::vector<double> abs_freqs;
      abs_freqs.reserve(r.a.size());
      for (const Term& t : r.a.terms()) {
        abs_freqs.push_back(t.freq.abs_value());
      }
      std::sort(abs_freqs.begin(), abs_freqs.end());
      const double mid = abs_freqs[abs_freqs.size() / 2];
      const auto devs =
          analysis::symmetric_convergence(blocks, {mid}, xs);
      row.sym_sup_dev = devs.front().sup_dev;
    }
    trace.rows.push_back(row);
  }
  return trace;
}

std::vector<analysis::CutoffDeviation> RepresentationState::cutoff_deviations(
    const std::vector<double>& cutoffs) const {
  std::vector<TrigPoly> blocks;
  for (const StageRecord& r : stages_) {
    if (!r.a.empty()) blocks.push_back(r.a);
  }
  std::vector<double> xs;
  for (std::size_t j = 0; j < core_points_.size(); ++j) {
    if (!core_bad_[j]) xs.push_back(core_points_[j]);
  }
  return analysis::symmetric_convergence(blocks, cutoffs, xs);
}

std::vector<RepresentationState::CoefficientRow>
RepresentationState::export_coefficients() const {
  std::vector<CoefficientRow> rows;
  for (const StageRecord& r : stages_) {
    for (const Term& t : r.a.terms()) {
      rows.push_back(CoefficientRow{t.freq.n, t.freq.offset, t.coeff, r.stage});
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const CoefficientRow& a, const CoefficientRow& b) {
              return a.n < b.n;
            });
  return rows;
}

RepresentationState::TargetFn interpolated_target(GridFunction samples) {
  if (samples.count() < 2) {
    throw std::invalid_argument("interpolation needs at least two samples");
  }
  for (const Complex& v : samples.samples()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("sampled target contains non-finite values");
    }
  }
  auto shared = std::make_shared<const GridFunction>(std::move(samples));
  return [shared](double x) -> Complex {
    const GridFunction& g = *shared;
    const double t = (x - g.x(0)) / g.step();
    const double last = static_cast<double>(g.count() - 1);
    if (t < -1e-9 || t > last + 1e-9) {
      throw std::out_of_range(
          "target sampled on a shorter interval than the run needs");
    }
    const double clamped = std::clamp(t, 0.0, last);
    const std::size_t j = static_cast<std::size_t>(
        std::min(clamped, last - 1.0));
    const double frac = clamped - static_cast<double>(j);
    return g.samples()[j] * (1.0 - frac) + g.samples()[j + 1] * frac;
  };
}

}  // namespace mspec::representer

#include "mspec/correction.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "mspec/lp.hpp"

namespace mspec::correction {
namespace {

constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
// cos(pi/8): an octagon of half-width r around the origin contains the disk
// of radius r*cos(pi/8), so capping eight direction projections at
// delta*cos(pi/8) caps the modulus at delta.
const double kOctagonInner = std::cos(kPi / 8.0);

void validate_targets(double eps, double delta) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("correction: eps must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("correction: delta must lie in (0, 1)");
}

bool has_integer_spectrum(const TrigPoly& poly) {
  for (const auto& term : poly.terms())
    if (!term.freq.is_integer()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Minimax builder: coefficients of a real polynomial with slots +-1..+-n and
// no constant term, chosen by a linear program that minimizes a sampled
// partial-sum majorant subject to per-coefficient caps and closeness to 1 on
// every non-exceptional grid cell.
//
// Variables: [a_1..a_n | b_1..b_n | t], coefficient at +j is a_j + i b_j and
// at -j its conjugate, so P is real and P(x) = sum_j 2(a_j cos jx - b_j sin jx).
// ---------------------------------------------------------------------------

struct MinimaxGeometry {
  std::size_t n = 0;        // slot count (degree)
  std::size_t cells = 0;    // closeness grid cells on [-pi, pi)
  double h = 0.0;           // cell width
  std::size_t budget = 0;   // exceptional cells allowed
  double close_radius = 0.0;
  double cap_radius = 0.0;
  std::vector<double> x;    // cell centers
};

MinimaxGeometry make_geometry(std::size_t n, double eps, double delta,
                              double margin) {
  MinimaxGeometry g;
  g.n = n;
  g.cells = std::clamp<std::size_t>(8 * (2 * n + 1), 256, 6144);
  g.h = kTwoPi / static_cast<double>(g.cells);
  g.budget = static_cast<std::size_t>(
      std::floor(eps * (1.0 - margin) / g.h));
  g.close_radius = delta * (1.0 - margin);
  g.cap_radius = delta * (1.0 - margin) * kOctagonInner;
  g.x.resize(g.cells);
  for (std::size_t c = 0; c < g.cells; ++c)
    g.x[c] = -kPi + (static_cast<double>(c) + 0.5) * g.h;
  return g;
}

// Hard lower bound on the feasible degree. A mean-zero polynomial has
// integral(P - 1) = -2pi, and |P - 1| <= close off an exceptional set of
// measure at most eps_eff, so the exceptional set carries integral at least
// 2pi - close*(2pi - eps_eff). Cauchy-Schwarz turns that into a floor on
// integral (P-1)^2, Parseval converts the floor into
// sum_{j>=1} |\hat P(j)|^2 >= l2/(4pi), and the per-coefficient cap bounds
// the same sum by n*cap^2. No placement of the exceptional set can make a
// smaller degree feasible.
std::size_t l2_floor_degree(double eps_eff, double close, double cap) {
  const double good = kTwoPi - eps_eff;
  const double mass = kTwoPi - close * good;
  if (mass <= 0.0 || eps_eff <= 0.0) return 1;
  const double l2 =
      mass * mass / eps_eff + close * close * good - kTwoPi;
  if (l2 <= 0.0) return 1;
  const double coeff_sum = l2 / (4.0 * kPi);
  return static_cast<std::size_t>(std::ceil(coeff_sum / (cap * cap)));
}

// Spreading the exceptional mass over separated wells is what lets every
// |\hat P(j)| stay under the cap: S point masses keep their largest
// exponential sum near mass/sqrt(S) at best, so S must be at least about
// (1/cap)^2, with a modest allowance for the off-well pedestal.
std::size_t well_count(double cap) {
  const double flat = std::pow(1.15 / cap, 2.0);
  return static_cast<std::size_t>(std::clamp(std::ceil(flat), 5.0, 40.0));
}

// Second hard floor: each well must host the main lobe and shoulders of a
// degree-n kernel, whose width scales like 2pi/n, so the measure budget
// forces roughly wells * c * 2pi / n <= eps_eff. The constant is kept below
// the empirically observed feasibility edge (c ~ 2.8-3.4) so the bound stays
// a true lower bound.
constexpr double kWidthLawC = 2.2;
std::size_t width_floor_degree(double eps_eff, double cap) {
  if (eps_eff <= 0.0) return 1;
  const auto wells = static_cast<double>(well_count(cap));
  return static_cast<std::size_t>(
      std::ceil(kWidthLawC * kTwoPi * wells / eps_eff));
}

// Slot s in [0, 2n) carries frequency s - n for s < n and s - n + 1 otherwise
// (all of -n..-1, 1..n in ascending order).
std::int64_t freq_of_slot(std::size_t s, std::size_t n) {
  const auto i = static_cast<std::int64_t>(s);
  const auto nn = static_cast<std::int64_t>(n);
  return i < nn ? i - nn : i - nn + 1;
}

std::size_t slot_of_freq(std::int64_t f, std::size_t n) {
  const auto nn = static_cast<std::int64_t>(n);
  return static_cast<std::size_t>(f < 0 ? f + nn : nn + f - 1);
}

struct WindowKey {
  std::size_t lo = 0;  // slot range, inclusive
  std::size_t hi = 0;
  double x = 0.0;
  bool operator<(const WindowKey& o) const {
    return std::tie(lo, hi, x) < std::tie(o.lo, o.hi, o.x);
  }
};

// One inequality row per direction d: Re(e^{-i theta_d} W(x)) - t <= 0 where
// W is the windowed sum over the slot range.
void append_window_rows(lp::Problem& problem, const WindowKey& w,
                        std::size_t n) {
  for (int d = 0; d < 8; ++d) {
    const double theta = kPi * static_cast<double>(d) / 4.0;
    std::vector<double> row(problem.num_vars, 0.0);
    for (std::size_t s = w.lo; s <= w.hi; ++s) {
      const std::int64_t f = freq_of_slot(s, n);
      const double phase = static_cast<double>(f) * w.x - theta;
      const std::size_t j = static_cast<std::size_t>(std::llabs(f));
      row[j - 1] += std::cos(phase);
      row[n + j - 1] += (f < 0 ? 1.0 : -1.0) * std::sin(phase);
    }
    row[2 * n] = -1.0;
    problem.rows.push_back(std::move(row));
    problem.rhs.push_back(0.0);
  }
}

lp::Problem assemble_lp(const MinimaxGeometry& g,
                        const std::vector<bool>& exceptional,
                        const std::vector<WindowKey>& windows,
                        double close_radius) {
  const std::size_t n = g.n;
  lp::Problem problem;
  problem.num_vars = 2 * n + 1;
  problem.objective.assign(problem.num_vars, 0.0);
  problem.objective[2 * n] = 1.0;

  // Coefficient caps: eight direction projections per slot pair.
  for (std::size_t j = 1; j <= n; ++j) {
    for (int d = 0; d < 8; ++d) {
      const double theta = kPi * static_cast<double>(d) / 4.0;
      std::vector<double> row(problem.num_vars, 0.0);
      row[j - 1] = std::cos(theta);
      row[n + j - 1] = std::sin(theta);
      problem.rows.push_back(std::move(row));
      problem.rhs.push_back(g.cap_radius);
    }
  }

  // Closeness: +-(P(x) - 1) <= close_radius on non-exceptional cells.
  // The radius is a parameter rather than g.close_radius because the round
  // loop walks it down from a relaxed start to the target.
  for (std::size_t c = 0; c < g.cells; ++c) {
    if (exceptional[c]) continue;
    for (int sign = 0; sign < 2; ++sign) {
      const double s = sign == 0 ? 1.0 : -1.0;
      std::vector<double> row(problem.num_vars, 0.0);
      for (std::size_t j = 1; j <= n; ++j) {
        const double jx = static_cast<double>(j) * g.x[c];
        row[j - 1] = s * 2.0 * std::cos(jx);
        row[n + j - 1] = -s * 2.0 * std::sin(jx);
      }
      problem.rows.push_back(std::move(row));
      problem.rhs.push_back(close_radius + s);
    }
  }

  for (const WindowKey& w : windows) append_window_rows(problem, w, n);
  return problem;
}

TrigPoly candidate_from_solution(const std::vector<double>& vars,
                                 std::size_t n) {
  std::vector<Term> terms;
  terms.reserve(2 * n);
  for (std::size_t j = 1; j <= n; ++j) {
    const Complex c(vars[j - 1], vars[n + j - 1]);
    if (std::abs(c) < 1e-13) continue;
    terms.push_back({Frequency{static_cast<std::int64_t>(j), 0.0}, c});
    terms.push_back(
        {Frequency{-static_cast<std::int64_t>(j), 0.0}, std::conj(c)});
  }
  return TrigPoly::from_terms(std::move(terms));
}

// Slot window [lo, hi] maximizing the prefix-sum diameter of `poly` at x,
// mapped back through the candidate's (possibly thinned) term list.
WindowKey argmax_window(const TrigPoly& poly, double x, std::size_t n) {
  const auto& terms = poly.terms();
  std::vector<Complex> prefix(terms.size() + 1, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    prefix[k + 1] =
        prefix[k] + terms[k].coeff *
                        std::polar(1.0, term_phase(terms[k].freq, x));
  }
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i + 1 < prefix.size(); ++i) {
    for (std::size_t j = i + 1; j < prefix.size(); ++j) {
      const double d = std::abs(prefix[j] - prefix[i]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  WindowKey w;
  w.lo = slot_of_freq(terms[bi].freq.n, n);
  w.hi = slot_of_freq(terms[bj - 1].freq.n, n);
  w.x = x;
  return w;
}

struct MinimaxCandidate {
  TrigPoly poly;
  double quick_bad = kTwoPi;  // build-grid estimate of the bad measure
  double coeff_inf = 1.0;
  double scan_majorant = 0.0;
  bool feasible = false;      // quick_bad and coeff_inf within targets
};

bool better_candidate(const MinimaxCandidate& a, const MinimaxCandidate& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.scan_majorant < b.scan_majorant;
  return a.quick_bad < b.quick_bad;
}

struct MinimaxAttempt {
  MinimaxCandidate best;
  int rounds = 0;
  std::size_t lp_iterations = 0;
  std::string note;
};

MinimaxAttempt run_minimax_at_degree(std::size_t n, const BuildParams& p) {
  MinimaxAttempt attempt;
  MinimaxGeometry g = make_geometry(n, p.eps, p.delta, p.margin);
  if (g.budget == 0) {
    attempt.note = "exceptional budget below one grid cell";
    return attempt;
  }
  {
    const double eps_eff = p.eps * (1.0 - p.margin);
    const std::size_t floor_n =
        std::max(l2_floor_degree(eps_eff, g.close_radius, g.cap_radius),
                 width_floor_degree(eps_eff, g.cap_radius));
    if (n < floor_n) {
      attempt.note =
          "degree below the feasibility floor " + std::to_string(floor_n);
      return attempt;
    }
  }

  // The mean-zero constraint forces the exceptional set to carry signed mass
  // -2pi, split over enough well sites that every |\hat P(j)| can stay under
  // the cap (a Fejer-kernel positivity bound forces at least
  // (n+1)/(1 + n cap^2) sites), at positions free of coherent exponential
  // sums up to frequency n. Regular or golden-ratio spacings resonate at
  // lattice or Fibonacci frequencies, so the seed jitters each well off a
  // uniform grid by a fixed hash; the seed only has to keep the early,
  // relaxed rounds feasible, after which the exchange re-derives the set
  // from the solver's own violations.
  std::vector<bool> exceptional(g.cells, false);
  {
    // Well count comes from the cap (see well_count); the width floor has
    // already guaranteed each well can be at least a kernel lobe wide.
    const std::size_t wells = std::clamp<std::size_t>(
        well_count(g.cap_radius), 1, std::max<std::size_t>(1, g.budget / 4));
    const std::size_t share = g.budget / wells;
    std::size_t marked = 0;
    auto jitter01 = [](std::uint64_t b) {
      std::uint64_t z = b + 0x9E3779B97F4A7C15ull;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      z ^= z >> 31;
      return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    for (std::size_t b = 0; b < wells && marked < g.budget; ++b) {
      const double frac = (static_cast<double>(b) + 0.5 +
                           0.8 * (jitter01(b) - 0.5)) /
                          static_cast<double>(wells);
      const std::size_t center =
          static_cast<std::size_t>(frac * static_cast<double>(g.cells)) %
          g.cells;
      const std::size_t width = b + 1 == wells ? g.budget - marked : share;
      for (std::size_t i = 0; i < width && marked < g.budget; ++i) {
        const std::size_t c = (center + g.cells - width / 2 + i) % g.cells;
        if (!exceptional[c]) {
          exceptional[c] = true;
          ++marked;
        }
      }
    }
  }

  std::vector<WindowKey> windows;
  std::set<WindowKey> seen;
  auto add_window = [&](WindowKey w) {
    if (seen.insert(w).second) windows.push_back(w);
  };
  {
    std::vector<std::size_t> half_spans = {n, (n + 1) / 2, (n + 3) / 4,
                                           std::max<std::size_t>(1, n / 8)};
    for (std::size_t i = 0; i < 17; ++i) {
      const double x = -kPi + (static_cast<double>(i) + 0.5) * kTwoPi / 17.0;
      add_window({0, 2 * n - 1, x});
      add_window({0, n - 1, x});
      add_window({n, 2 * n - 1, x});
      for (std::size_t span : half_spans)
        add_window({n - span, n + span - 1, x});
    }
  }

  const std::size_t scan_count = 1024;
  const double scan_step = kTwoPi / static_cast<double>(scan_count);

  // Closeness continuation: the radius walks geometrically from a relaxed
  // start down to the target over the first `ramp` rounds, so each round's
  // LP starts near the previous round's solution and the exceptional set
  // tracks the wells the solver itself digs. A jump that turns out
  // infeasible retries once at the geometric midpoint before giving up.
  const int ramp = std::max(3, p.max_rounds - 2);
  double close_prev = 1.0;
  std::vector<bool> exceptional_prev = exceptional;
  int reverts = 0;
  for (int round = 1; round <= p.max_rounds; ++round) {
    attempt.rounds = round;
    double close_now =
        round >= ramp
            ? g.close_radius
            : std::pow(g.close_radius,
                       static_cast<double>(round) / static_cast<double>(ramp));
    lp::Problem problem = assemble_lp(g, exceptional, windows, close_now);
    lp::Solution sol = lp::solve_inequality_form(problem);
    attempt.lp_iterations += sol.iterations;
    if (sol.status != lp::Solution::Status::kOptimal &&
        close_now < close_prev) {
      close_now = std::sqrt(close_now * close_prev);
      problem = assemble_lp(g, exceptional, windows, close_now);
      sol = lp::solve_inequality_form(problem);
      attempt.lp_iterations += sol.iterations;
    }
    if (sol.status != lp::Solution::Status::kOptimal) {
      if (reverts < 2 && exceptional != exceptional_prev) {
        // The exchanged set lost whatever structure kept the caps
        // satisfiable; fall back to the previous set and let the next
        // round re-approach the target through the midpoint retry.
        exceptional = exceptional_prev;
        ++reverts;
        continue;
      }
      attempt.note = sol.status == lp::Solution::Status::kInfeasible
                         ? "LP infeasible at this degree"
                         : "LP did not converge";
      return attempt;
    }
    close_prev = close_now;

    MinimaxCandidate cand;
    cand.poly = candidate_from_solution(sol.x, n);
    if (cand.poly.empty()) {
      attempt.note = "LP returned the zero polynomial";
      return attempt;
    }
    cand.coeff_inf = cand.poly.coeff_norms().norm_inf;

    const std::vector<Complex> vals =
        cand.poly.evaluate_grid(g.x[0], g.h, g.cells);
    std::size_t bad_cells = 0;
    for (const Complex& v : vals)
      if (std::abs(v - 1.0) > p.delta) ++bad_cells;
    cand.quick_bad = g.h * static_cast<double>(bad_cells);

    const std::vector<double> scan =
        cand.poly.majorant_grid(-kPi, scan_step, scan_count);
    cand.scan_majorant = *std::max_element(scan.begin(), scan.end());
    cand.feasible = cand.quick_bad < p.eps && cand.coeff_inf < p.delta;
    if (better_candidate(cand, attempt.best)) attempt.best = cand;

    if (round == p.max_rounds) break;

    // Exceptional-set exchange: hand the budget to the worst cells.
    std::vector<std::size_t> order(g.cells);
    for (std::size_t c = 0; c < g.cells; ++c) order[c] = c;
    std::vector<double> viol(g.cells);
    for (std::size_t c = 0; c < g.cells; ++c) viol[c] = std::abs(vals[c] - 1.0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return viol[a] > viol[b];
                     });
    std::vector<bool> next(g.cells, false);
    for (std::size_t i = 0; i < g.budget; ++i) next[order[i]] = true;

    // Window exchange: sample the true majorant, add the argmax windows at
    // the worst scan points.
    std::vector<std::size_t> top(scan_count);
    for (std::size_t i = 0; i < scan_count; ++i) top[i] = i;
    std::stable_sort(top.begin(), top.end(), [&](std::size_t a, std::size_t b) {
      return scan[a] > scan[b];
    });
    for (std::size_t i = 0; i < 8 && i < top.size(); ++i) {
      const double x = -kPi + static_cast<double>(top[i]) * scan_step;
      add_window(argmax_window(cand.poly, x, n));
    }

    if (next == exceptional && cand.feasible && round >= 3 &&
        close_now <= g.close_radius)
      break;
    exceptional_prev = exceptional;
    exceptional = std::move(next);
  }
  return attempt;
}

BuildResult build_minimax(const BuildParams& p) {
  BuildResult result;
  std::ostringstream diag;

  // Degree ladder: rungs fan out upward from the larger of the two hard
  // floors (mean-zero L2 and well-width), below which no degree can be
  // feasible. A budget under the floor has nothing worth attempting, so it
  // fails immediately with both floors on record.
  std::vector<std::size_t> ladder;
  {
    const MinimaxGeometry probe = make_geometry(8, p.eps, p.delta, p.margin);
    const double eps_eff = p.eps * (1.0 - p.margin);
    const std::size_t l2_floor =
        l2_floor_degree(eps_eff, probe.close_radius, probe.cap_radius);
    const std::size_t width_floor =
        width_floor_degree(eps_eff, probe.cap_radius);
    const std::size_t floor_n = std::max(l2_floor, width_floor);
    if (floor_n > p.degree_budget) {
      result.correction.target_eps = p.eps;
      result.correction.target_delta = p.delta;
      result.correction.certificate = verify_correction(
          result.correction.poly, p.eps, p.delta, p.oversample);
      diag << "degree budget " << p.degree_budget
           << " lies below the feasibility floor " << floor_n
           << " (mean-zero L2 floor " << l2_floor << ", well-width floor "
           << width_floor << ") for these radii; no feasible degree exists.";
      result.diagnostics = diag.str();
      return result;
    }
    for (double stretch : {1.0, 1.3, 1.7, 2.2}) {
      const auto rung = static_cast<std::size_t>(
          std::ceil(static_cast<double>(floor_n) * stretch));
      ladder.push_back(std::min<std::size_t>(p.degree_budget, rung));
    }
    ladder.push_back(p.degree_budget);
    std::sort(ladder.begin(), ladder.end());
    ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
  }

  MinimaxCandidate best;
  for (std::size_t n : ladder) {
    MinimaxAttempt attempt = run_minimax_at_degree(n, p);
    result.rounds += attempt.rounds;
    result.lp_iterations += attempt.lp_iterations;
    diag << "degree " << n << ": ";
    if (!attempt.note.empty()) diag << attempt.note << "; ";
    diag << "rounds " << attempt.rounds << ", quick bad "
         << attempt.best.quick_bad << ", coeff inf " << attempt.best.coeff_inf
         << ". ";
    if (better_candidate(attempt.best, best)) best = attempt.best;
    if (attempt.best.feasible) {
      Certificate cert =
          verify_correction(attempt.best.poly, p.eps, p.delta, p.oversample);
      if (cert.pass) {
        result.success = true;
        result.correction = {attempt.best.poly, p.eps, p.delta, cert};
        result.diagnostics = diag.str();
        return result;
      }
      diag << "verification failed at degree " << n << " (bad measure "
           << cert.bad_measure << "); ";
    }
  }

  result.correction.poly = best.poly;
  result.correction.target_eps = p.eps;
  result.correction.target_delta = p.delta;
  result.correction.certificate =
      verify_correction(best.poly, p.eps, p.delta, p.oversample);
  result.success = result.correction.certificate.pass;
  diag << "no certified candidate within degree budget " << p.degree_budget
       << ".";
  result.diagnostics = diag.str();
  return result;
}

// ---------------------------------------------------------------------------
// Analytic builder: P = 1 - F with F a mean-one sum of Fejer kernels centered
// at jittered spike positions,
//   F(x) = (1/S) sum_b K_m(x - x_b),
// so F >= 0, F^(0) = 1 exactly (the constant term of P cancels structurally),
// F^(j) = K^_m(j) W(j) with W(j) = (1/S) sum_b e^{-i j x_b}. Full-cell jitter
// of the spike positions breaks the lattice resonance that would otherwise
// put coefficients of size ~1 at multiples of S, leaving |W(j)| ~ sqrt(ln m/S).
// Off the spike neighborhoods F decays like the Fejer tail, which sizes the
// kernel degree from eps and delta.
// ---------------------------------------------------------------------------

double spike_jitter(std::uint64_t beta) {
  std::uint64_t z = beta + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

BuildResult build_analytic(const BuildParams& p) {
  BuildResult result;
  std::ostringstream diag;
  const double delta_target = p.delta * (1.0 - p.margin);
  const double eps_target = p.eps * (1.0 - p.margin);

  // Spike count from the coefficient bound, kernel degree from the tail
  // bound; the two feed each other, so iterate the pair a few times.
  std::size_t m_needed = 4096;
  std::size_t spikes = 16;
  for (int it = 0; it < 3; ++it) {
    const double lg = std::log(2.0 * static_cast<double>(m_needed) + 1.0);
    spikes = static_cast<std::size_t>(std::ceil(
        std::max(16.0, 2.0 * lg / (delta_target * delta_target))));
    m_needed = static_cast<std::size_t>(std::ceil(
        8.0 * kPi * kPi * static_cast<double>(spikes) /
        (delta_target * eps_target * eps_target)));
  }
  const std::size_t m =
      std::min({m_needed, p.degree_budget, p.analytic_degree_cap});
  diag << "spikes " << spikes << ", kernel degree " << m;
  if (m < m_needed)
    diag << " (clipped from required " << m_needed
         << " by budget/cap; certificate decides)";
  diag << ". ";

  std::vector<double> centers(spikes);
  for (std::size_t b = 0; b < spikes; ++b) {
    centers[b] = -kPi + (static_cast<double>(b) + spike_jitter(b)) * kTwoPi /
                            static_cast<double>(spikes);
  }

  // W(j) for j = 1..m via per-spike rotators; F real makes W(-j) = conj W(j).
  std::vector<Complex> w(m + 1, Complex(0.0, 0.0));
  for (std::size_t b = 0; b < spikes; ++b) {
    const Complex step = std::polar(1.0, -centers[b]);
    Complex rot = step;
    for (std::size_t j = 1; j <= m; ++j) {
      if (j % 32 == 0)
        rot = std::polar(1.0, -std::fmod(static_cast<double>(j) * centers[b],
                                         kTwoPi));
      w[j] += rot;
      rot *= step;
    }
  }

  std::vector<Term> terms;
  terms.reserve(2 * m);
  const double inv_s = 1.0 / static_cast<double>(spikes);
  for (std::size_t j = 1; j <= m; ++j) {
    const double fejer =
        1.0 - static_cast<double>(j) / (static_cast<double>(m) + 1.0);
    const Complex c = -fejer * inv_s * w[j];
    if (std::abs(c) < 1e-15) continue;
    terms.push_back({Frequency{static_cast<std::int64_t>(j), 0.0}, c});
    terms.push_back(
        {Frequency{-static_cast<std::int64_t>(j), 0.0}, std::conj(c)});
  }
  TrigPoly poly = TrigPoly::from_terms(std::move(terms));

  Certificate cert = verify_correction(poly, p.eps, p.delta, p.oversample);
  result.success = cert.pass;
  result.correction = {std::move(poly), p.eps, p.delta, cert};
  if (!cert.pass)
    diag << "certificate failed (coeff inf " << cert.coeff_inf
         << ", bad measure " << cert.bad_measure << "). ";
  result.diagnostics = diag.str();
  return result;
}

BuildResult build_zero(const BuildParams& p) {
  BuildResult result;
  result.correction.target_eps = p.eps;
  result.correction.target_delta = p.delta;
  result.correction.certificate =
      verify_correction(TrigPoly(), p.eps, p.delta, p.oversample);
  result.success = result.correction.certificate.pass;
  result.diagnostics = "eps exceeds the full circle; zero polynomial";
  return result;
}

}  // namespace

const char* strategy_name(Strategy strategy) {
  return strategy == Strategy::kAnalytic ? "analytic" : "minimax";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "analytic") return Strategy::kAnalytic;
  if (name == "minimax") return Strategy::kMinimax;
  throw std::invalid_argument("correction: unknown strategy '" + name + "'");
}

Certificate verify_correction(const TrigPoly& poly, double eps, double delta,
                              std::size_t oversample) {
  validate_targets(eps, delta);
  if (oversample == 0)
    throw std::invalid_argument("correction: oversample must be positive");
  if (!has_integer_spectrum(poly))
    throw std::invalid_argument("correction: spectrum must be integer");

  Certificate cert;
  cert.dc_absent = true;
  for (const auto& term : poly.terms())
    if (term.freq.n == 0) cert.dc_absent = false;
  cert.coeff_inf = poly.coeff_norms().norm_inf;

  const double deg = poly.degree();
  const std::size_t count = std::max<std::size_t>(
      256, oversample * (2 * static_cast<std::size_t>(std::ceil(deg)) + 1));
  const double h = kTwoPi / static_cast<double>(count);
  cert.grid_count = count;
  cert.grid_step = h;

  const std::vector<Complex> vals =
      poly.evaluate_grid(-kPi + 0.5 * h, h, count);
  std::size_t bad = 0;
  std::size_t flips = 0;
  bool prev_bad = false;
  for (std::size_t g = 0; g < count; ++g) {
    const bool is_bad = std::abs(vals[g] - 1.0) > delta;
    if (is_bad) ++bad;
    if (g > 0 && is_bad != prev_bad) ++flips;
    prev_bad = is_bad;
  }
  cert.bad_measure = h * static_cast<double>(bad);
  cert.bad_measure_uncertainty = h * static_cast<double>(flips);

  const std::size_t mcount = std::min<std::size_t>(count, 4096);
  const double mh = kTwoPi / static_cast<double>(mcount);
  cert.majorant_grid_count = mcount;
  const std::vector<double> maj =
      poly.majorant_grid(-kPi + 0.5 * mh, mh, mcount);
  cert.majorant_sup = maj.empty() ? 0.0 : *std::max_element(maj.begin(),
                                                            maj.end());
  cert.c_achieved = cert.majorant_sup * eps;
  cert.pass =
      cert.dc_absent && cert.coeff_inf < delta && cert.bad_measure < eps;
  return cert;
}

BuildResult build_correction(const BuildParams& params) {
  validate_targets(params.eps, params.delta);
  if (params.degree_budget == 0)
    throw std::invalid_argument("correction: degree budget must be positive");
  if (!(params.margin >= 0.0) || !(params.margin < 0.5))
    throw std::invalid_argument("correction: margin must lie in [0, 0.5)");
  if (params.max_rounds < 1)
    throw std::invalid_argument("correction: max_rounds must be positive");

  if (params.eps > kTwoPi) return build_zero(params);
  return params.strategy == Strategy::kMinimax ? build_minimax(params)
                                               : build_analytic(params);
}

}  // namespace mspec::correction

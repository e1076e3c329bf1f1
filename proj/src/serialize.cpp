#include "mspec/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

namespace mspec::serialize {
namespace {

using nlohmann::json;

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::logic_error("number formatting failed");
  return std::string(buf, res.ptr);
}

json poly_to_value(const TrigPoly& poly) {
  json terms = json::array();
  for (const Term& t : poly.terms()) {
    terms.push_back(json{{"im", t.coeff.imag()},
                         {"n", t.freq.n},
                         {"offset", t.freq.offset},
                         {"re", t.coeff.real()}});
  }
  return json{{"terms", std::move(terms)}};
}

TrigPoly poly_from_value(const json& j) {
  std::vector<Term> terms;
  for (const json& t : j.at("terms")) {
    terms.push_back(Term{
        Frequency{t.at("n").get<std::int64_t>(), t.at("offset").get<double>()},
        Complex{t.at("re").get<double>(), t.at("im").get<double>()}});
  }
  return TrigPoly::from_terms(std::move(terms));
}

json law_to_value(const PerturbationLaw& law) {
  return json{{"alpha", law.alpha},
              {"d", law.d},
              {"kind", law.kind == PerturbationLaw::Kind::kConstant
                           ? "constant"
                           : "power"}};
}

PerturbationLaw law_from_value(const json& j) {
  PerturbationLaw law;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    law.kind = PerturbationLaw::Kind::kConstant;
  } else if (kind == "power") {
    law.kind = PerturbationLaw::Kind::kPower;
  } else {
    throw std::invalid_argument("unknown perturbation law kind '" + kind + "'");
  }
  law.d = j.at("d").get<double>();
  law.alpha = j.at("alpha").get<double>();
  return law;
}

json profile_to_value(const ShiftProfile& profile) {
  return json{{"exponent_offset", profile.exponent_offset},
              {"name", profile.name}};
}

ShiftProfile profile_from_value(const json& j) {
  ShiftProfile p;
  p.name = j.at("name").get<std::string>();
  p.exponent_offset = j.at("exponent_offset").get<int>();
  return p;
}

json witness_to_value(const BlockWitness& w) {
  return json{{"jitter", w.jitter},
              {"k", w.k},
              {"l", w.l},
              {"profile", profile_to_value(w.profile)},
              {"tolerance", w.tolerance}};
}

BlockWitness witness_from_value(const json& j) {
  BlockWitness w;
  w.k = j.at("k").get<std::int64_t>();
  w.l = j.at("l").get<std::int64_t>();
  w.tolerance = j.at("tolerance").get<double>();
  w.jitter = j.at("jitter").get<double>();
  w.profile = profile_from_value(j.at("profile"));
  return w;
}

json certificate_to_value(const correction::Certificate& c) {
  return json{{"bad_measure", c.bad_measure},
              {"bad_measure_uncertainty", c.bad_measure_uncertainty},
              {"c_achieved", c.c_achieved},
              {"coeff_inf", c.coeff_inf},
              {"dc_absent", c.dc_absent},
              {"grid_count", c.grid_count},
              {"grid_step", c.grid_step},
              {"majorant_grid_count", c.majorant_grid_count},
              {"majorant_sup", c.majorant_sup},
              {"pass", c.pass}};
}

correction::Certificate certificate_from_value(const json& j) {
  correction::Certificate c;
  c.dc_absent = j.at("dc_absent").get<bool>();
  c.coeff_inf = j.at("coeff_inf").get<double>();
  c.bad_measure = j.at("bad_measure").get<double>();
  c.bad_measure_uncertainty = j.at("bad_measure_uncertainty").get<double>();
  c.majorant_sup = j.at("majorant_sup").get<double>();
  c.c_achieved = j.at("c_achieved").get<double>();
  c.grid_step = j.at("grid_step").get<double>();
  c.grid_count = j.at("grid_count").get<std::size_t>();
  c.majorant_grid_count = j.at("majorant_grid_count").get<std::size_t>();
  c.pass = j.at("pass").get<bool>();
  return c;
}

json correction_to_value(const correction::CorrectionPoly& c) {
  return json{{"certificate", certificate_to_value(c.certificate)},
              {"poly", poly_to_value(c.poly)},
              {"target_delta", c.target_delta},
              {"target_eps", c.target_eps}};
}

correction::CorrectionPoly correction_from_value(const json& j) {
  correction::CorrectionPoly c;
  c.poly = poly_from_value(j.at("poly"));
  c.target_eps = j.at("target_eps").get<double>();
  c.target_delta = j.at("target_delta").get<double>();
  c.certificate = certificate_from_value(j.at("certificate"));
  return c;
}

json fit_to_value(const approximator::FitReport& r) {
  json trace = json::array();
  for (const auto& [degree, bad] : r.trace) {
    trace.push_back(json{{"bad_measure", bad}, {"degree", degree}});
  }
  return json{{"bad_measure", r.bad_measure},
              {"coeff_norm1", r.coeff_norm1},
              {"degree_used", r.degree_used},
              {"eta", r.eta},
              {"good_sup", r.good_sup},
              {"mu", r.mu},
              {"regularization", r.regularization},
              {"residual_l2", r.residual_l2},
              {"success", r.success},
              {"trace", std::move(trace)}};
}

json schedule_to_value(const representer::Schedule& s) {
  return json{
      {"core_grid_cells", s.core_grid_cells},
      {"correction_budget_cap", s.correction_budget_cap},
      {"correction_rounds", s.correction_rounds},
      {"correction_strategy",
       correction::strategy_name(s.correction_strategy)},
      {"delta0", s.delta0},
      {"delta_shrink", s.delta_shrink},
      {"eps0", s.eps0},
      {"eps_shrink", s.eps_shrink},
      {"eta0", s.eta0},
      {"fit_degree_max", s.fit_degree_max},
      {"jitter_scale", s.jitter_scale},
      {"mu0", s.mu0},
      {"name", s.name},
      {"witness_scan", s.witness_scan},
      {"witness_scan_range", s.witness_scan_range}};
}

json diagnostics_to_value(const representer::StageDiagnostics& d) {
  return json{{"a_coeff_norm1", d.a_coeff_norm1},
              {"a_coeff_norm1_target", d.a_coeff_norm1_target},
              {"a_majorant_sup", d.a_majorant_sup},
              {"a_minus_h_sup", d.a_minus_h_sup},
              {"a_minus_h_target", d.a_minus_h_target},
              {"bad_measure_rn", d.bad_measure_rn},
              {"fit", fit_to_value(d.fit)},
              {"h_minus_f_bad_measure", d.h_minus_f_bad_measure},
              {"h_minus_f_bad_target", d.h_minus_f_bad_target},
              {"residual_threshold", d.residual_threshold}};
}

}  // namespace

std::string poly_to_json(const TrigPoly& poly) {
  return poly_to_value(poly).dump(2);
}

TrigPoly poly_from_json(const std::string& text) {
  return poly_from_value(json::parse(text));
}

std::string spectrum_to_json(const PerturbedSpectrum& spectrum) {
  json plants = json::array();
  for (const auto& [n, offset] : spectrum.plants()) {
    plants.push_back(json{{"n", n}, {"offset", offset}});
  }
  json witnesses = json::array();
  for (const BlockWitness& w : spectrum.witnesses()) {
    witnesses.push_back(witness_to_value(w));
  }
  const json j{{"law", law_to_value(spectrum.law())},
               {"plants", std::move(plants)},
               {"seed", spectrum.seed()},
               {"witnesses", std::move(witnesses)}};
  return j.dump(2);
}

PerturbedSpectrum spectrum_from_json(const std::string& text) {
  const json j = json::parse(text);
  PerturbedSpectrum spectrum(j.at("seed").get<std::uint64_t>(),
                             law_from_value(j.at("law")));
  std::map<std::int64_t, double> plants;
  for (const json& p : j.at("plants")) {
    plants[p.at("n").get<std::int64_t>()] = p.at("offset").get<double>();
  }
  std::vector<BlockWitness> witnesses;
  for (const json& w : j.at("witnesses")) {
    witnesses.push_back(witness_from_value(w));
  }
  spectrum.restore(std::move(plants), std::move(witnesses));
  return spectrum;
}

std::string certificate_to_json(const correction::Certificate& cert) {
  return certificate_to_value(cert).dump(2);
}

std::string correction_to_json(const correction::CorrectionPoly& correction) {
  return correction_to_value(correction).dump(2);
}

correction::CorrectionPoly correction_from_json(const std::string& text) {
  return correction_from_value(json::parse(text));
}

std::string fit_to_json(const approximator::FitReport& report,
                        const TrigPoly& poly) {
  const json j{{"poly", poly_to_value(poly)}, {"report", fit_to_value(report)}};
  return j.dump(2);
}

std::string state_to_json(const representer::RepresentationState& state) {
  json stages = json::array();
  for (const representer::StageRecord& r : state.stages()) {
    json stage{{"a", poly_to_value(r.a)},
               {"delta_n", r.delta_n},
               {"diagnostics", diagnostics_to_value(r.diagnostics)},
               {"eps_n", r.eps_n},
               {"f", poly_to_value(r.f)},
               {"k", r.k},
               {"no_op", r.no_op},
               {"stage", r.stage}};
    if (!r.no_op) {
      stage["q"] = correction_to_value(r.q);
      stage["witness"] = witness_to_value(r.witness);
    }
    stages.push_back(std::move(stage));
  }
  std::string mask(state.core_bad_mask().size(), '0');
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (state.core_bad_mask()[i]) mask[i] = '1';
  }
  const json core{{"bad_mask", std::move(mask)},
                  {"cells", state.core_bad_mask().size()}};
  const json j{{"core_grid", core},
               {"profile", profile_to_value(state.profile())},
               {"schedule", schedule_to_value(state.schedule())},
               {"spectrum", json::parse(spectrum_to_json(state.spectrum()))},
               {"stages", std::move(stages)},
               {"target", state.target_name()}};
  return j.dump(2);
}

std::string coefficients_csv(const representer::RepresentationState& state) {
  std::string out = "n,offset,re,im,stage\n";
  for (const auto& row : state.export_coefficients()) {
    out += std::to_string(row.n);
    out += ',';
    out += shortest(row.offset);
    out += ',';
    out += shortest(row.value.real());
    out += ',';
    out += shortest(row.value.imag());
    out += ',';
    out += std::to_string(row.stage);
    out += '\n';
  }
  return out;
}

std::string trace_csv(const analysis::ConvergenceTrace& trace) {
  std::string out = "stage,bad_measure_rn,a_majorant_sup,sym_sup_dev\n";
  for (const analysis::TraceRow& row : trace.rows) {
    out += std::to_string(row.stage);
    out += ',';
    out += shortest(row.bad_measure_rn);
    out += ',';
    out += shortest(row.a_majorant_sup);
    out += ',';
    out += shortest(row.sym_sup_dev);
    out += '\n';
  }
  return out;
}

std::string witness_to_json(const BlockWitness& witness) {
  return witness_to_value(witness).dump(2);
}

std::string condition_to_json(const ConditionReport& report) {
  const json j{{"fail_q", report.fail_q},
               {"fail_s", report.fail_s},
               {"max_abs_deviation", report.max_abs_deviation},
               {"pairs_checked", report.pairs_checked},
               {"satisfied", report.satisfied}};
  return j.dump(2);
}

std::string probability_to_json(const BlockProbabilityReport& report) {
  const json j{{"d", report.d},
               {"k", report.k},
               {"p_analytic", report.p_analytic},
               {"p_hat", report.p_hat},
               {"profile", report.profile_name},
               {"successes", report.successes},
               {"tolerance", report.tolerance},
               {"trials", report.trials},
               {"wilson_high", report.wilson_high},
               {"wilson_low", report.wilson_low}};
  return j.dump(2);
}

std::string obstruction_to_json(const analysis::ObstructionReport& report) {
  const json j{{"alpha", report.alpha},
               {"beta", report.beta},
               {"c", report.c},
               {"converges", report.converges},
               {"k", report.k},
               {"k_min", report.k_min},
               {"tail_bound", report.tail_bound},
               {"tail_start", report.tail_start}};
  return j.dump(2);
}

std::string schedule_to_json(const representer::Schedule& schedule) {
  return schedule_to_value(schedule).dump(2);
}

representer::Schedule schedule_from_json(const std::string& text) {
  const json j = json::parse(text);
  representer::Schedule s;
  if (j.contains("name") && j.at("name").get<std::string>() == "paper") {
    s = representer::Schedule::paper();
  }
  if (j.contains("eta0")) s.eta0 = j.at("eta0").get<double>();
  if (j.contains("mu0")) s.mu0 = j.at("mu0").get<double>();
  if (j.contains("eps0")) s.eps0 = j.at("eps0").get<double>();
  if (j.contains("eps_shrink")) s.eps_shrink = j.at("eps_shrink").get<double>();
  if (j.contains("delta0")) s.delta0 = j.at("delta0").get<double>();
  if (j.contains("delta_shrink")) {
    s.delta_shrink = j.at("delta_shrink").get<double>();
  }
  if (j.contains("fit_degree_max")) {
    s.fit_degree_max = j.at("fit_degree_max").get<std::int64_t>();
  }
  if (j.contains("correction_budget_cap")) {
    s.correction_budget_cap = j.at("correction_budget_cap").get<std::size_t>();
  }
  if (j.contains("correction_rounds")) {
    s.correction_rounds = j.at("correction_rounds").get<int>();
  }
  if (j.contains("correction_strategy")) {
    s.correction_strategy = correction::strategy_from_name(
        j.at("correction_strategy").get<std::string>());
  }
  if (j.contains("jitter_scale")) {
    s.jitter_scale = j.at("jitter_scale").get<double>();
  }
  if (j.contains("core_grid_cells")) {
    s.core_grid_cells = j.at("core_grid_cells").get<std::size_t>();
  }
  if (j.contains("witness_scan")) {
    s.witness_scan = j.at("witness_scan").get<bool>();
  }
  if (j.contains("witness_scan_range")) {
    s.witness_scan_range = j.at("witness_scan_range").get<std::int64_t>();
  }
  return s;
}

namespace {

bool same_terms(const TrigPoly& x, const TrigPoly& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Term& a = x.terms()[i];
    const Term& b = y.terms()[i];
    if (a.freq.n != b.freq.n || a.freq.offset != b.freq.offset ||
        a.coeff != b.coeff) {
      return false;
    }
  }
  return true;
}

}  // namespace

StateVerification verify_state(const std::string& state_json) {
  const json j = json::parse(state_json);

  // Evaluation points: unmasked cell centers of the recorded core grid.
  const json& core = j.at("core_grid");
  const std::size_t cells = core.at("cells").get<std::size_t>();
  const std::string mask = core.at("bad_mask").get<std::string>();
  if (mask.size() != cells) {
    throw std::invalid_argument("core grid mask length mismatch");
  }
  constexpr double kPi = 3.141592653589793238462643383279502884;
  const double cell = 2.0 * kPi / static_cast<double>(cells);
  std::vector<double> xs;
  for (std::size_t i = 0; i < cells; ++i) {
    if (mask[i] == '0') xs.push_back(-kPi + (static_cast<double>(i) + 0.5) * cell);
  }

  struct StageData {
    int stage = 0;
    bool no_op = false;
    TrigPoly a;
    double majorant = 0.0;
    double bad_rn = 0.0;
  };
  std::vector<StageData> data;
  json stage_reports = json::array();
  bool pass = true;

  for (const json& stage : j.at("stages")) {
    StageData sd;
    sd.stage = stage.at("stage").get<int>();
    sd.no_op = stage.at("no_op").get<bool>();
    sd.a = poly_from_value(stage.at("a"));
    const json& diag = stage.at("diagnostics");
    sd.majorant = diag.at("a_majorant_sup").get<double>();
    sd.bad_rn = diag.at("bad_measure_rn").get<double>();

    json report{{"stage", sd.stage}};
    if (!sd.no_op) {
      const correction::CorrectionPoly q =
          correction_from_value(stage.at("q"));
      const correction::Certificate fresh = correction::verify_correction(
          q.poly, q.target_eps, q.target_delta, 8);
      report["correction_certified"] = fresh.pass;
      pass = pass && fresh.pass;

      const BlockWitness w = witness_from_value(stage.at("witness"));
      bool contained = true;
      for (const Term& t : sd.a.terms()) {
        std::int64_t s = 0, qq = 0;
        if (!w.decompose(t.freq.n, &s, &qq)) {
          contained = false;
          break;
        }
      }
      report["spectrum_contained"] = contained;
      pass = pass && contained;

      const TrigPoly f = poly_from_value(stage.at("f"));
      const double bound = static_cast<double>(stage.at("k").get<std::int64_t>()) *
                           f.coeff_norms().norm1 *
                           stage.at("delta_n").get<double>();
      const bool norm_ok = sd.a.coeff_norms().norm1 < bound;
      report["coeff_norm_bounded"] = norm_ok;
      pass = pass && norm_ok;
    }
    stage_reports.push_back(std::move(report));
    data.push_back(std::move(sd));
  }

  // Symmetric cutoffs: between consecutive blocks the truncated merged sum
  // must reproduce the exact stage sum term for term; inside a block the
  // deviation is bounded by that stage's recorded majorant.
  std::vector<TrigPoly> blocks;
  TrigPoly merged;
  json cutoff_reports = json::array();
  std::vector<double> mids;  // per-block probe cutoffs, for the trace
  for (const StageData& sd : data) {
    if (sd.a.empty()) {
      mids.push_back(0.0);
      continue;
    }
    blocks.push_back(sd.a);
    std::vector<double> abs_freqs;
    abs_freqs.reserve(sd.a.size());
    for (const Term& t : sd.a.terms()) abs_freqs.push_back(t.freq.abs_value());
    std::sort(abs_freqs.begin(), abs_freqs.end());
    mids.push_back(abs_freqs[abs_freqs.size() / 2]);
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    merged = TrigPoly::add(merged, blocks[b]);
    double lo_next = 0.0;
    bool has_next = false;
    if (b + 1 < blocks.size()) {
      has_next = true;
      lo_next = blocks[b + 1].terms().front().freq.abs_value();
      for (const Term& t : blocks[b + 1].terms()) {
        lo_next = std::min(lo_next, t.freq.abs_value());
      }
    }
    double hi = 0.0;
    for (const Term& t : blocks[b].terms()) {
      hi = std::max(hi, t.freq.abs_value());
    }
    if (has_next) {
      const double between = hi + (lo_next - hi) / 2.0;
      TrigPoly full = blocks[b + 1];
      for (std::size_t c = b + 2; c < blocks.size(); ++c) {
        full = TrigPoly::add(full, blocks[c]);
      }
      full = TrigPoly::add(full, merged);
      const bool exact = same_terms(full.symmetric_cutoff(between), merged);
      cutoff_reports.push_back(json{{"block", b + 1},
                                    {"cutoff", between},
                                    {"kind", "between"},
                                    {"exact", exact}});
      pass = pass && exact;
    }
  }
  // Within-block probes vs recorded majorants.
  std::size_t block_index = 0;
  for (const StageData& sd : data) {
    if (sd.a.empty()) continue;
    const std::vector<TrigPoly> upto(blocks.begin(),
                                     blocks.begin() + block_index + 1);
    const auto devs = analysis::symmetric_convergence(
        upto, {mids[static_cast<std::size_t>(sd.stage - 1)]}, xs);
    const double dev = devs.front().sup_dev;
    const bool bounded = dev <= sd.majorant + 1e-12;
    cutoff_reports.push_back(json{{"block", block_index + 1},
                                  {"cutoff", devs.front().cutoff},
                                  {"deviation", dev},
                                  {"kind", "within"},
                                  {"majorant", sd.majorant},
                                  {"bounded", bounded}});
    pass = pass && bounded;
    ++block_index;
  }

  // Re-rendered convergence trace.
  analysis::ConvergenceTrace trace;
  block_index = 0;
  for (const StageData& sd : data) {
    analysis::TraceRow row;
    row.stage = sd.stage;
    row.bad_measure_rn = sd.bad_rn;
    row.a_majorant_sup = sd.majorant;
    if (!sd.a.empty()) {
      const std::vector<TrigPoly> upto(blocks.begin(),
                                       blocks.begin() + block_index + 1);
      const auto devs = analysis::symmetric_convergence(
          upto, {mids[static_cast<std::size_t>(sd.stage - 1)]}, xs);
      row.sym_sup_dev = devs.front().sup_dev;
      ++block_index;
    }
    trace.rows.push_back(row);
  }

  StateVerification out;
  out.pass = pass;
  out.trace_csv = trace_csv(trace);
  const json report{{"cutoffs", std::move(cutoff_reports)},
                    {"pass", pass},
                    {"stages", std::move(stage_reports)}};
  out.report_json = report.dump(2);
  return out;
}

std::string manifest_to_json(const RunManifest& manifest) {
  json options = json::object();
  for (const auto& [key, value] : manifest.options) options[key] = value;
  const json j{{"command", manifest.command},
               {"library_version", manifest.library_version},
               {"options", std::move(options)},
               {"outputs", manifest.outputs},
               {"wall_ms", manifest.wall_ms}};
  return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.library_version = j.at("library_version").get<std::string>();
  for (const auto& [key, value] : j.at("options").items()) {
    m.options[key] = value.get<std::string>();
  }
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.wall_ms = j.at("wall_ms").get<std::int64_t>();
  return m;
}

std::string manifest_comparison_form(const std::string& manifest_json) {
  json j = json::parse(manifest_json);
  j.erase("wall_ms");
  return j.dump(2);
}

}  // namespace mspec::serialize

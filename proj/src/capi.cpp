#include "mspec.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mspec/analysis.hpp"
#include "mspec/approximator.hpp"
#include "mspec/correction.hpp"
#include "mspec/gridfn.hpp"
#include "mspec/parallel.hpp"
#include "mspec/representer.hpp"
#include "mspec/serialize.hpp"
#include "mspec/spectrum.hpp"
#include "mspec/targets.hpp"
#include "mspec/trigpoly.hpp"

struct mspec_spectrum {
  mspec::PerturbedSpectrum impl;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_out(char** out, const std::string& value);

mspec_status fail(mspec_status code, const char* what) {
  g_last_error = what == nullptr ? "unknown error" : what;
  return code;
}

// Runs fn, translating exceptions into status codes: invalid_argument (and
// json parse errors, which derive from it via nlohmann's exceptions being
// runtime-ish) map to INVALID_ARGUMENT, everything else to RUNTIME.
template <typename Fn>
mspec_status guarded(Fn&& fn) {
  try {
    fn();
    return MSPEC_OK;
  } catch (const std::invalid_argument& e) {
    return fail(MSPEC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(MSPEC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const json::exception& e) {
    return fail(MSPEC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MSPEC_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(MSPEC_ERR_RUNTIME, "unknown error");
  }
}

void write_out(char** out, const std::string& value) {
  if (out == nullptr) throw std::invalid_argument("out is null");
  *out = dup_string(value);
}

const char* require(const char* s, const char* what) {
  if (s == nullptr) throw std::invalid_argument(std::string(what) + " is null");
  return s;
}

mspec::ShiftProfile profile_by_name(const char* name) {
  const std::string n = require(name, "profile");
  if (n == "default") return mspec::ShiftProfile::defaults();
  if (n == "paper") return mspec::ShiftProfile::paper();
  throw std::invalid_argument("unknown shift profile '" + n +
                              "' (expected \"default\" or \"paper\")");
}

mspec::PerturbationLaw law_from_parts(const char* kind, double d,
                                      double alpha) {
  const std::string k = require(kind, "law kind");
  mspec::PerturbationLaw law;
  if (k == "constant") {
    law.kind = mspec::PerturbationLaw::Kind::kConstant;
  } else if (k == "power") {
    law.kind = mspec::PerturbationLaw::Kind::kPower;
  } else {
    throw std::invalid_argument("unknown perturbation law '" + k +
                                "' (expected \"constant\" or \"power\")");
  }
  law.d = d;
  law.alpha = alpha;
  law.validate();
  return law;
}

mspec::representer::RepresentationState state_from_config(const json& cfg) {
  using mspec::representer::RepresentationState;
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
  mspec::PerturbationLaw law;
  if (cfg.contains("law")) {
    const json& lj = cfg.at("law");
    law = law_from_parts(lj.value("kind", "constant").c_str(),
                         lj.value("d", 0.5), lj.value("alpha", 0.0));
  }
  const mspec::ShiftProfile profile =
      profile_by_name(cfg.value("profile", "default").c_str());
  mspec::representer::Schedule schedule;
  if (cfg.contains("schedule")) {
    schedule = mspec::serialize::schedule_from_json(cfg.at("schedule").dump());
  }

  const json& target = cfg.at("target");
  RepresentationState::TargetFn fn;
  std::string name;
  if (target.contains("preset")) {
    name = target.at("preset").get<std::string>();
    if (!mspec::targets::is_preset(name)) {
      throw std::invalid_argument("unknown target preset '" + name + "'");
    }
    fn = [name, profile](double x) {
      return mspec::targets::evaluate_preset(name, x, profile);
    };
  } else if (target.contains("samples_csv")) {
    name = "samples";
    fn = mspec::representer::interpolated_target(
        mspec::GridFunction::from_csv(target.at("samples_csv").get<std::string>()));
  } else {
    throw std::invalid_argument(
        "target needs either \"preset\" or \"samples_csv\"");
  }

  return RepresentationState(mspec::PerturbedSpectrum(seed, law), profile,
                             std::move(fn), std::move(name),
                             std::move(schedule));
}

}  // namespace

extern "C" {

const char* mspec_version(void) { return mspec::serialize::kLibraryVersion; }

const char* mspec_last_error(void) { return g_last_error.c_str(); }

void mspec_string_free(char* s) { std::free(s); }

void mspec_set_threads(int threads) {
  mspec::set_thread_count(threads);
}

mspec_status mspec_spectrum_create(uint64_t seed, const char* law_kind,
                                   double d, double alpha,
                                   mspec_spectrum** out) {
  return guarded([&] {
    if (out == nullptr) throw std::invalid_argument("out is null");
    const mspec::PerturbationLaw law = law_from_parts(law_kind, d, alpha);
    *out = new mspec_spectrum{mspec::PerturbedSpectrum(seed, law)};
  });
}

mspec_status mspec_spectrum_from_json(const char* text, mspec_spectrum** out) {
  return guarded([&] {
    if (out == nullptr) throw std::invalid_argument("out is null");
    *out = new mspec_spectrum{
        mspec::serialize::spectrum_from_json(require(text, "spectrum json"))};
  });
}

mspec_status mspec_spectrum_to_json(const mspec_spectrum* spectrum,
                                    char** out_json) {
  return guarded([&] {
    if (spectrum == nullptr) throw std::invalid_argument("spectrum is null");
    write_out(out_json, mspec::serialize::spectrum_to_json(spectrum->impl));
  });
}

void mspec_spectrum_free(mspec_spectrum* spectrum) { delete spectrum; }

mspec_status mspec_spectrum_offset(const mspec_spectrum* spectrum, int64_t n,
                                   double* out_offset) {
  return guarded([&] {
    if (spectrum == nullptr) throw std::invalid_argument("spectrum is null");
    if (out_offset == nullptr) throw std::invalid_argument("out is null");
    *out_offset = spectrum->impl.r(n);
  });
}

mspec_status mspec_spectrum_scan(const mspec_spectrum* spectrum, int64_t k,
                                 int64_t l_min, int64_t l_max,
                                 const char* profile, double tolerance,
                                 int64_t exclude_reach, char** out_json) {
  return guarded([&] {
    if (spectrum == nullptr) throw std::invalid_argument("spectrum is null");
    const mspec::ShiftProfile p = profile_by_name(profile);
    const auto found = spectrum->impl.scan_l(k, l_min, l_max, p, tolerance,
                                             exclude_reach);
    json j{{"found", found.has_value()}, {"l", found.value_or(0)}};
    if (found) {
      j["condition"] = json::parse(mspec::serialize::condition_to_json(
          spectrum->impl.check_condition(k, *found, p, tolerance)));
    }
    write_out(out_json, j.dump(2));
  });
}

mspec_status mspec_spectrum_plant(mspec_spectrum* spectrum, int64_t k,
                                  int64_t l, const char* profile,
                                  double jitter, double tolerance,
                                  char** out_json) {
  return guarded([&] {
    if (spectrum == nullptr) throw std::invalid_argument("spectrum is null");
    const mspec::BlockWitness& w = spectrum->impl.plant_witness(
        k, l, profile_by_name(profile), jitter, tolerance);
    write_out(out_json, mspec::serialize::witness_to_json(w));
  });
}

mspec_status mspec_estimate_block_probability(int64_t k, const char* profile,
                                              double tolerance, double d,
                                              uint64_t trials, uint64_t seed,
                                              char** out_json) {
  return guarded([&] {
    const mspec::BlockProbabilityReport report =
        mspec::estimate_block_probability(k, profile_by_name(profile),
                                          tolerance, d, trials, seed);
    write_out(out_json, mspec::serialize::probability_to_json(report));
  });
}

mspec_status mspec_build_correction(double eps, double delta,
                                    const char* strategy, size_t degree_budget,
                                    double margin, int max_rounds,
                                    size_t oversample,
                                    size_t analytic_degree_cap,
                                    char** out_json) {
  return guarded([&] {
    mspec::correction::BuildParams params;
    params.eps = eps;
    params.delta = delta;
    params.strategy =
        mspec::correction::strategy_from_name(require(strategy, "strategy"));
    params.degree_budget = degree_budget;
    params.margin = margin;
    params.max_rounds = max_rounds;
    params.oversample = oversample;
    params.analytic_degree_cap = analytic_degree_cap;
    const mspec::correction::BuildResult result =
        mspec::correction::build_correction(params);
    const json j{
        {"correction", json::parse(mspec::serialize::correction_to_json(
                           result.correction))},
        {"diagnostics", result.diagnostics},
        {"lp_iterations", result.lp_iterations},
        {"rounds", result.rounds},
        {"success", result.success}};
    write_out(out_json, j.dump(2));
  });
}

mspec_status mspec_verify_correction(const char* poly_json, double eps,
                                     double delta, size_t oversample,
                                     char** out_json) {
  return guarded([&] {
    const mspec::TrigPoly poly =
        mspec::serialize::poly_from_json(require(poly_json, "poly json"));
    const mspec::correction::Certificate cert =
        mspec::correction::verify_correction(poly, eps, delta, oversample);
    write_out(out_json, mspec::serialize::certificate_to_json(cert));
  });
}

mspec_status mspec_sample_preset(const char* name, double half_length,
                                 double step, const char* profile,
                                 char** out_csv) {
  return guarded([&] {
    const mspec::GridFunction grid = mspec::targets::sample_preset(
        require(name, "preset name"), half_length, step,
        profile_by_name(profile));
    write_out(out_csv, grid.to_csv());
  });
}

mspec_status mspec_fit(const char* target_csv, double eta, double mu,
                       const char* profile, int64_t max_degree,
                       char** out_json) {
  return guarded([&] {
    const mspec::GridFunction target =
        mspec::GridFunction::from_csv(require(target_csv, "target csv"));
    const auto [poly, report] = mspec::approximator::fit_in_measure(
        target, eta, mu, profile_by_name(profile), max_degree);
    write_out(out_json, mspec::serialize::fit_to_json(report, poly));
  });
}

mspec_status mspec_represent(const char* config_json, char** out_json) {
  return guarded([&] {
    const json cfg = json::parse(require(config_json, "config json"));
    const int stages = cfg.value("stages", 4);
    if (stages < 1) throw std::invalid_argument("stages must be >= 1");

    mspec::representer::RepresentationState state = state_from_config(cfg);
    json failure;  // null unless a stage aborts
    for (int n = 0; n < stages; ++n) {
      const auto fail_info = state.run_stage();
      if (fail_info) {
        failure = json{{"message", fail_info->message},
                       {"phase", fail_info->phase}};
        break;
      }
    }

    const json j{
        {"coefficients_csv", mspec::serialize::coefficients_csv(state)},
        {"failure", std::move(failure)},
        {"stages_completed", state.stages().size()},
        {"state", json::parse(mspec::serialize::state_to_json(state))},
        {"success", failure.is_null()},
        {"trace_csv", mspec::serialize::trace_csv(state.trace())}};
    write_out(out_json, j.dump(2));
  });
}

mspec_status mspec_verify_state(const char* state_json, char** out_json) {
  return guarded([&] {
    const mspec::serialize::StateVerification v =
        mspec::serialize::verify_state(require(state_json, "state json"));
    const json j{{"pass", v.pass},
                 {"report", json::parse(v.report_json)},
                 {"trace_csv", v.trace_csv}};
    write_out(out_json, j.dump(2));
  });
}

mspec_status mspec_counterexample(double beta, double alpha, int k_max,
                                  double c, int64_t tail_start,
                                  char** out_json) {
  return guarded([&] {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    json reports = json::array();
    int k_min = 0;
    for (int k = 1; k <= k_max; ++k) {
      const mspec::analysis::ObstructionReport r =
          mspec::analysis::smoothing_obstruction(beta, alpha, k, c,
                                                 tail_start);
      k_min = r.k_min;
      reports.push_back(
          json::parse(mspec::serialize::obstruction_to_json(r)));
    }
    const json j{{"k_min", k_min}, {"reports", std::move(reports)}};
    write_out(out_json, j.dump(2));
  });
}

}  // extern "C"

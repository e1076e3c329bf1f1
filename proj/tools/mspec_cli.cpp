// Command-line front end for the shifted-spectrum representation library.
//
// Talks to the core exclusively through the C API in mspec.h.  Every
// subcommand writes its artifacts into one output directory together with a
// manifest.json recording the command, the full effective option set, the
// library version, and the produced files.  `replay` re-runs a recorded
// manifest into a scratch directory and byte-compares the artifacts.
//
// Exit codes: 0 success, 1 usage / invalid input, 2 structured algorithmic
// failure (fit did not reach the target, no admissible block scale, a
// representation stage failed, verification rejected, replay mismatch).
// Errors are reported as a single JSON object on stderr.

#include "mspec.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Options = std::map<std::string, std::string>;

struct CliError {
  int exit_code;
  std::string code;
  std::string message;
};

struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::string> outputs;  // relative file names, in write order
  std::string stdout_text;           // main artifact echoed under --stdout
  std::string failure_code;
  std::string failure_message;
};

[[noreturn]] void throw_api_error(mspec_status status) {
  const char* message = mspec_last_error();
  const bool usage = status == MSPEC_ERR_INVALID_ARGUMENT;
  throw CliError{usage ? 1 : 2, usage ? "invalid_argument" : "runtime_error",
                 message != nullptr ? message : "unknown error"};
}

// Takes ownership of an output string from the C API.
std::string api_call(mspec_status status, char* owned) {
  if (status != MSPEC_OK) {
    mspec_string_free(owned);
    throw_api_error(status);
  }
  std::string text = owned != nullptr ? owned : "";
  mspec_string_free(owned);
  return text;
}

std::string fmt_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw CliError{2, "runtime_error", "number format"};
  return std::string(buffer, end);
}

bool has_option(const Options& options, const std::string& key) {
  return options.find(key) != options.end();
}

std::string opt_str(const Options& options, const std::string& key,
                    const std::string& fallback) {
  auto it = options.find(key);
  return it != options.end() ? it->second : fallback;
}

std::string require_str(const Options& options, const std::string& key) {
  auto it = options.find(key);
  if (it == options.end() || it->second.empty())
    throw CliError{1, "invalid_argument", "missing required option --" + key};
  return it->second;
}

double opt_double(const Options& options, const std::string& key,
                  double fallback) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw CliError{1, "invalid_argument", "option --" + key + " is not a number"};
  }
}

std::int64_t opt_i64(const Options& options, const std::string& key,
                     std::int64_t fallback) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw CliError{1, "invalid_argument", "option --" + key + " is not an integer"};
  }
}

std::uint64_t opt_u64(const Options& options, const std::string& key,
                      std::uint64_t fallback) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw CliError{1, "invalid_argument", "option --" + key + " is not an integer"};
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{1, "io_error", "cannot read " + path.string()};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{2, "io_error", "cannot open " + path.string()};
  out << content;
  out.flush();
  if (!out) throw CliError{2, "io_error", "cannot write " + path.string()};
}

std::string with_newline(std::string text) {
  if (text.empty() || text.back() != '\n') text.push_back('\n');
  return text;
}

// Writes one artifact and records it in the outcome's output list.
void emit(CommandOutcome& outcome, const fs::path& outdir,
          const std::string& name, const std::string& content) {
  write_file(outdir / name, with_newline(content));
  outcome.outputs.push_back(name);
}

void emit_error(const std::string& code, const std::string& message) {
  json error;
  error["error"]["code"] = code;
  error["error"]["message"] = message;
  std::cerr << error.dump() << "\n";
}

struct SpectrumHandle {
  mspec_spectrum* ptr = nullptr;
  ~SpectrumHandle() { mspec_spectrum_free(ptr); }
  SpectrumHandle() = default;
  SpectrumHandle(SpectrumHandle&& other) noexcept : ptr(other.ptr) {
    other.ptr = nullptr;
  }
  SpectrumHandle(const SpectrumHandle&) = delete;
  SpectrumHandle& operator=(const SpectrumHandle&) = delete;
  SpectrumHandle& operator=(SpectrumHandle&&) = delete;
};

SpectrumHandle load_spectrum(const std::string& path) {
  const std::string text = read_file(path);
  SpectrumHandle handle;
  const mspec_status status = mspec_spectrum_from_json(text.c_str(), &handle.ptr);
  if (status != MSPEC_OK) throw_api_error(status);
  return handle;
}

/* ---- subcommand runners -------------------------------------------------- */

CommandOutcome run_gen_spectrum(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  SpectrumHandle handle;
  mspec_status status = mspec_spectrum_create(
      opt_u64(options, "seed", 1), opt_str(options, "law", "constant").c_str(),
      opt_double(options, "d", 0.5), opt_double(options, "alpha", 0.0),
      &handle.ptr);
  if (status != MSPEC_OK) throw_api_error(status);
  char* out_json = nullptr;
  status = mspec_spectrum_to_json(handle.ptr, &out_json);
  const std::string text = api_call(status, out_json);
  emit(outcome, outdir, "spectrum.json", text);
  outcome.stdout_text = with_newline(text);
  return outcome;
}

CommandOutcome run_scan_l(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  SpectrumHandle handle = load_spectrum(require_str(options, "spectrum"));
  char* out_json = nullptr;
  const mspec_status status = mspec_spectrum_scan(
      handle.ptr, opt_i64(options, "k", 2), opt_i64(options, "l-min", 0),
      opt_i64(options, "l-max", 0), opt_str(options, "profile", "default").c_str(),
      opt_double(options, "tol", 0.25), opt_i64(options, "exclude-reach", 0),
      &out_json);
  const std::string text = api_call(status, out_json);
  emit(outcome, outdir, "scan.json", text);
  outcome.stdout_text = with_newline(text);
  const json result = json::parse(text);
  if (!result.value("found", false)) {
    outcome.exit_code = 2;
    outcome.failure_code = "scan_failed";
    outcome.failure_message = "no block scale in the requested range satisfies the condition";
  }
  return outcome;
}

CommandOutcome run_plant(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  SpectrumHandle handle = load_spectrum(require_str(options, "spectrum"));
  char* witness_json = nullptr;
  mspec_status status = mspec_spectrum_plant(
      handle.ptr, opt_i64(options, "k", 2), opt_i64(options, "l", 0),
      opt_str(options, "profile", "default").c_str(),
      opt_double(options, "jitter", 0.0), opt_double(options, "tol", 0.25),
      &witness_json);
  const std::string witness = api_call(status, witness_json);
  char* spectrum_json = nullptr;
  status = mspec_spectrum_to_json(handle.ptr, &spectrum_json);
  const std::string spectrum = api_call(status, spectrum_json);
  emit(outcome, outdir, "witness.json", witness);
  emit(outcome, outdir, "spectrum.json", spectrum);
  outcome.stdout_text = with_newline(witness);
  return outcome;
}

CommandOutcome run_estimate_prob(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  char* out_json = nullptr;
  const mspec_status status = mspec_estimate_block_probability(
      opt_i64(options, "k", 2), opt_str(options, "profile", "default").c_str(),
      opt_double(options, "tol", 0.25), opt_double(options, "d", 0.5),
      opt_u64(options, "trials", 1000000), opt_u64(options, "seed", 1),
      &out_json);
  const std::string text = api_call(status, out_json);
  emit(outcome, outdir, "probability.json", text);
  outcome.stdout_text = with_newline(text);
  return outcome;
}

CommandOutcome run_build_correction(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  char* out_json = nullptr;
  const mspec_status status = mspec_build_correction(
      opt_double(options, "eps", 0.5), opt_double(options, "delta", 0.2),
      opt_str(options, "strategy", "minimax").c_str(),
      static_cast<size_t>(opt_u64(options, "degree-budget", 512)),
      opt_double(options, "margin", 0.05),
      static_cast<int>(opt_i64(options, "rounds", 10)),
      static_cast<size_t>(opt_u64(options, "oversample", 8)),
      static_cast<size_t>(opt_u64(options, "analytic-cap", 20000)), &out_json);
  const std::string text = api_call(status, out_json);
  emit(outcome, outdir, "correction.json", text);
  outcome.stdout_text = with_newline(text);
  const json result = json::parse(text);
  if (!result.value("success", false)) {
    outcome.exit_code = 2;
    outcome.failure_code = "correction_failed";
    outcome.failure_message = result.value("diagnostics", std::string{"correction build failed"});
  }
  return outcome;
}

std::string target_samples_csv(const Options& options) {
  if (has_option(options, "samples")) return read_file(require_str(options, "samples"));
  char* out_csv = nullptr;
  const mspec_status status = mspec_sample_preset(
      opt_str(options, "target", "step").c_str(),
      opt_double(options, "half-length", 3.141592653589793),
      opt_double(options, "step", 0.012271846303085130),
      opt_str(options, "profile", "default").c_str(), &out_csv);
  return api_call(status, out_csv);
}

CommandOutcome run_fit(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  const std::string csv = target_samples_csv(options);
  char* out_json = nullptr;
  const mspec_status status = mspec_fit(
      csv.c_str(), opt_double(options, "eta", 0.05),
      opt_double(options, "mu", 0.5),
      opt_str(options, "profile", "default").c_str(),
      opt_i64(options, "degree-max", 48), &out_json);
  const std::string text = api_call(status, out_json);
  emit(outcome, outdir, "target.csv", csv);
  emit(outcome, outdir, "fit.json", text);
  outcome.stdout_text = with_newline(text);
  const json result = json::parse(text);
  if (!result.at("report").value("success", false)) {
    outcome.exit_code = 2;
    outcome.failure_code = "fit_failed";
    outcome.failure_message = "fit did not reach the requested accuracy";
  }
  return outcome;
}

CommandOutcome run_represent(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  json config;
  config["seed"] = opt_u64(options, "seed", 1);
  config["law"] = {{"kind", opt_str(options, "law", "constant")},
                   {"d", opt_double(options, "d", 0.5)},
                   {"alpha", opt_double(options, "alpha", 0.0)}};
  config["profile"] = opt_str(options, "profile", "default");
  config["stages"] = opt_i64(options, "stages", 4);
  if (has_option(options, "samples")) {
    config["target"] = {{"samples_csv", read_file(require_str(options, "samples"))}};
  } else {
    config["target"] = {{"preset", opt_str(options, "target", "step")}};
  }
  if (has_option(options, "schedule-json")) {
    config["schedule"] = json::parse(options.at("schedule-json"));
  } else {
    json schedule;
    schedule["name"] = opt_str(options, "schedule", "desk");
    static const std::pair<const char*, const char*> kNumericKnobs[] = {
        {"eta0", "eta0"},           {"mu0", "mu0"},
        {"eps0", "eps0"},           {"eps-shrink", "eps_shrink"},
        {"delta0", "delta0"},       {"delta-shrink", "delta_shrink"},
        {"jitter-scale", "jitter_scale"},
    };
    for (const auto& [flag, key] : kNumericKnobs)
      if (has_option(options, flag)) schedule[key] = opt_double(options, flag, 0.0);
    static const std::pair<const char*, const char*> kIntegerKnobs[] = {
        {"fit-degree-max", "fit_degree_max"},
        {"budget-cap", "correction_budget_cap"},
        {"correction-rounds", "correction_rounds"},
        {"core-cells", "core_grid_cells"},
        {"scan-range", "witness_scan_range"},
    };
    for (const auto& [flag, key] : kIntegerKnobs)
      if (has_option(options, flag)) schedule[key] = opt_i64(options, flag, 0);
    if (has_option(options, "strategy"))
      schedule["strategy"] = opt_str(options, "strategy", "minimax");
    if (has_option(options, "witness-scan"))
      schedule["witness_scan"] = opt_str(options, "witness-scan", "false") == "true";
    config["schedule"] = schedule;
  }

  char* out_json = nullptr;
  const mspec_status status = mspec_represent(config.dump().c_str(), &out_json);
  const std::string text = api_call(status, out_json);
  const json result = json::parse(text);

  // Canonicalize the fully resolved schedule into the manifest so a replay
  // reproduces the run even if library defaults evolve.
  options["schedule-json"] = result.at("state").at("schedule").dump();

  emit(outcome, outdir, "state.json", result.at("state").dump(2));
  for (const json& stage : result.at("state").at("stages")) {
    const std::int64_t number = stage.at("stage").get<std::int64_t>();
    emit(outcome, outdir, "stage_" + std::to_string(number) + ".json", stage.dump(2));
  }
  emit(outcome, outdir, "trace.csv", result.at("trace_csv").get<std::string>());
  emit(outcome, outdir, "coefficients.csv", result.at("coefficients_csv").get<std::string>());

  json summary;
  summary["success"] = result.at("success");
  summary["stages_completed"] = result.at("stages_completed");
  summary["failure"] = result.at("failure");
  outcome.stdout_text = with_newline(summary.dump(2));

  if (!result.value("success", false)) {
    outcome.exit_code = 2;
    outcome.failure_code = "stage_failed";
    std::string message = "representation stage failed";
    if (result.contains("failure") && result.at("failure").is_object()) {
      message = result.at("failure").value("phase", std::string{"stage"}) + ": " +
                result.at("failure").value("message", std::string{});
    }
    outcome.failure_message = message;
  }
  return outcome;
}

CommandOutcome run_verify(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  fs::path state_path{require_str(options, "state")};
  if (fs::is_directory(state_path)) state_path /= "state.json";
  const std::string state_text = read_file(state_path);
  char* out_json = nullptr;
  const mspec_status status = mspec_verify_state(state_text.c_str(), &out_json);
  const std::string text = api_call(status, out_json);
  const json result = json::parse(text);
  json report;
  report["pass"] = result.at("pass");
  report["report"] = result.at("report");
  emit(outcome, outdir, "verify.json", report.dump(2));
  emit(outcome, outdir, "trace.csv", result.at("trace_csv").get<std::string>());
  outcome.stdout_text = with_newline(report.dump(2));
  if (!result.value("pass", false)) {
    outcome.exit_code = 2;
    outcome.failure_code = "verify_failed";
    outcome.failure_message = "state verification rejected the run";
  }
  return outcome;
}

CommandOutcome run_counterexample(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  char* out_json = nullptr;
  const mspec_status status = mspec_counterexample(
      opt_double(options, "beta", 0.0), opt_double(options, "alpha", 1.0),
      static_cast<int>(opt_i64(options, "k-max", 6)),
      opt_double(options, "c", 1.0), opt_i64(options, "tail-start", 10),
      &out_json);
  const std::string text = api_call(status, out_json);
  emit(outcome, outdir, "counterexample.json", text);
  outcome.stdout_text = with_newline(text);
  return outcome;
}

CommandOutcome execute(const std::string& command, Options& options,
                       const fs::path& outdir);

CommandOutcome run_replay(Options& options, const fs::path& outdir) {
  CommandOutcome outcome;
  const fs::path source{require_str(options, "dir")};
  const json manifest = json::parse(read_file(source / "manifest.json"));
  const std::string command = manifest.at("command").get<std::string>();
  if (command == "replay")
    throw CliError{1, "invalid_argument", "cannot replay a replay run"};

  Options recorded;
  for (const auto& [key, value] : manifest.at("options").items())
    recorded[key] = value.get<std::string>();

  const fs::path rerun = outdir / "rerun";
  execute(command, recorded, rerun);  // outputs + manifest; exit code immaterial

  bool all_identical = true;
  json files = json::array();
  auto compare = [&](const std::string& name, bool strip_wall_ms) {
    bool identical = false;
    try {
      const std::string original = read_file(source / name);
      const std::string replayed = read_file(rerun / name);
      if (strip_wall_ms) {
        json a = json::parse(original);
        json b = json::parse(replayed);
        a.erase("wall_ms");
        b.erase("wall_ms");
        identical = a == b;
      } else {
        identical = original == replayed;
      }
    } catch (const CliError&) {
      identical = false;
    }
    all_identical = all_identical && identical;
    files.push_back({{"file", name}, {"identical", identical}});
  };
  for (const json& name : manifest.at("outputs"))
    compare(name.get<std::string>(), false);
  compare("manifest.json", true);

  json report;
  report["command"] = command;
  report["files"] = files;
  report["identical"] = all_identical;
  emit(outcome, outdir, "replay.json", report.dump(2));
  outcome.stdout_text = with_newline(report.dump(2));
  if (!all_identical) {
    outcome.exit_code = 2;
    outcome.failure_code = "replay_mismatch";
    outcome.failure_message = "replayed artifacts differ from the recorded run";
  }
  return outcome;
}

CommandOutcome execute(const std::string& command, Options& options,
                       const fs::path& outdir) {
  const auto started = std::chrono::steady_clock::now();
  CommandOutcome outcome;
  if (command == "gen-spectrum") outcome = run_gen_spectrum(options, outdir);
  else if (command == "scan-l") outcome = run_scan_l(options, outdir);
  else if (command == "plant") outcome = run_plant(options, outdir);
  else if (command == "estimate-prob") outcome = run_estimate_prob(options, outdir);
  else if (command == "build-correction") outcome = run_build_correction(options, outdir);
  else if (command == "fit") outcome = run_fit(options, outdir);
  else if (command == "represent") outcome = run_represent(options, outdir);
  else if (command == "verify") outcome = run_verify(options, outdir);
  else if (command == "counterexample") outcome = run_counterexample(options, outdir);
  else if (command == "replay") outcome = run_replay(options, outdir);
  else throw CliError{1, "invalid_argument", "unknown command " + command};

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  json manifest;
  manifest["command"] = command;
  manifest["library_version"] = mspec_version();
  manifest["options"] = json::object();
  for (const auto& [key, value] : options) manifest["options"][key] = value;
  manifest["outputs"] = outcome.outputs;
  manifest["wall_ms"] = wall_ms;
  write_file(outdir / "manifest.json", with_newline(manifest.dump(2)));
  return outcome;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shifted-spectrum representation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value configuration file");
  app.set_version_flag("--version", mspec_version());

  int threads = 0;
  std::string out_dir;
  bool echo = false;
  app.add_option("--threads", threads, "cap on worker threads (0 = hardware)");
  app.add_option("--out", out_dir,
                 "output directory (default: $MSPEC_OUT_ROOT/<command>)");
  app.add_flag("--stdout", echo, "echo the main JSON artifact to stdout");

  int exit_code = 0;
  auto invoke = [&](const std::string& name, Options options) {
    fs::path outdir;
    if (!out_dir.empty()) {
      outdir = out_dir;
    } else {
      const char* root = std::getenv("MSPEC_OUT_ROOT");
      outdir = fs::path(root != nullptr && *root != '\0' ? root : ".") / name;
    }
    try {
      mspec_set_threads(threads);
      CommandOutcome outcome = execute(name, options, outdir);
      if (echo && !outcome.stdout_text.empty()) std::cout << outcome.stdout_text;
      if (outcome.exit_code != 0)
        emit_error(outcome.failure_code, outcome.failure_message);
      exit_code = outcome.exit_code;
    } catch (const CliError& error) {
      emit_error(error.code, error.message);
      exit_code = error.exit_code;
    } catch (const std::exception& error) {
      emit_error("runtime_error", error.what());
      exit_code = 2;
    }
  };

  // gen-spectrum ------------------------------------------------------------
  struct {
    std::uint64_t seed = 1;
    std::string law = "constant";
    double d = 0.5, alpha = 0.0;
  } gen;
  {
    CLI::App* sub = app.add_subcommand(
        "gen-spectrum", "create a randomly perturbed integer spectrum");
    sub->fallthrough();
    sub->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    sub->add_option("--law", gen.law, "half-width law: constant or power")
        ->capture_default_str();
    sub->add_option("--d", gen.d, "half-width scale")->capture_default_str();
    sub->add_option("--alpha", gen.alpha, "power-law decay exponent")
        ->capture_default_str();
    sub->callback([&] {
      invoke("gen-spectrum", Options{{"seed", std::to_string(gen.seed)},
                                     {"law", gen.law},
                                     {"d", fmt_double(gen.d)},
                                     {"alpha", fmt_double(gen.alpha)}});
    });
  }

  // scan-l ------------------------------------------------------------------
  struct {
    std::string spectrum;
    std::int64_t k = 2, l_min = 0, l_max = 0, exclude = 0;
    std::string profile = "default";
    double tol = 0.25;
  } scan;
  {
    CLI::App* sub = app.add_subcommand(
        "scan-l", "find the first block scale satisfying the condition");
    sub->fallthrough();
    sub->add_option("--spectrum", scan.spectrum, "spectrum.json path")->required();
    sub->add_option("--k", scan.k, "block size")->required();
    sub->add_option("--l-min", scan.l_min, "smallest scale to test")->required();
    sub->add_option("--l-max", scan.l_max, "largest scale to test")->required();
    sub->add_option("--profile", scan.profile, "shift profile name")
        ->capture_default_str();
    sub->add_option("--tol", scan.tol, "offset tolerance")->capture_default_str();
    sub->add_option("--exclude-reach", scan.exclude,
                    "skip scales whose block starts inside this reach")
        ->capture_default_str();
    sub->callback([&] {
      invoke("scan-l", Options{{"spectrum", scan.spectrum},
                               {"k", std::to_string(scan.k)},
                               {"l-min", std::to_string(scan.l_min)},
                               {"l-max", std::to_string(scan.l_max)},
                               {"profile", scan.profile},
                               {"tol", fmt_double(scan.tol)},
                               {"exclude-reach", std::to_string(scan.exclude)}});
    });
  }

  // plant -------------------------------------------------------------------
  struct {
    std::string spectrum;
    std::int64_t k = 2, l = 0;
    std::string profile = "default";
    double jitter = 0.0, tol = 0.25;
  } plant;
  {
    CLI::App* sub = app.add_subcommand(
        "plant", "plant a witness block into a spectrum");
    sub->fallthrough();
    sub->add_option("--spectrum", plant.spectrum, "spectrum.json path")->required();
    sub->add_option("--k", plant.k, "block size")->required();
    sub->add_option("--l", plant.l, "block scale")->required();
    sub->add_option("--profile", plant.profile, "shift profile name")
        ->capture_default_str();
    sub->add_option("--jitter", plant.jitter, "jitter half-width inside the block")
        ->capture_default_str();
    sub->add_option("--tol", plant.tol, "offset tolerance the block guarantees")
        ->capture_default_str();
    sub->callback([&] {
      invoke("plant", Options{{"spectrum", plant.spectrum},
                              {"k", std::to_string(plant.k)},
                              {"l", std::to_string(plant.l)},
                              {"profile", plant.profile},
                              {"jitter", fmt_double(plant.jitter)},
                              {"tol", fmt_double(plant.tol)}});
    });
  }

  // estimate-prob -----------------------------------------------------------
  struct {
    std::int64_t k = 2;
    std::string profile = "default";
    double tol = 0.25, d = 0.5;
    std::uint64_t trials = 1000000, seed = 1;
  } prob;
  {
    CLI::App* sub = app.add_subcommand(
        "estimate-prob", "estimate the probability that a fresh block satisfies the condition");
    sub->fallthrough();
    sub->add_option("--k", prob.k, "block size")->capture_default_str();
    sub->add_option("--profile", prob.profile, "shift profile name")
        ->capture_default_str();
    sub->add_option("--tol", prob.tol, "offset tolerance")->capture_default_str();
    sub->add_option("--d", prob.d, "uniform half-width of the offsets")
        ->capture_default_str();
    sub->add_option("--trials", prob.trials, "Monte Carlo trials")
        ->capture_default_str();
    sub->add_option("--seed", prob.seed, "trial stream seed")->capture_default_str();
    sub->callback([&] {
      invoke("estimate-prob", Options{{"k", std::to_string(prob.k)},
                                      {"profile", prob.profile},
                                      {"tol", fmt_double(prob.tol)},
                                      {"d", fmt_double(prob.d)},
                                      {"trials", std::to_string(prob.trials)},
                                      {"seed", std::to_string(prob.seed)}});
    });
  }

  // build-correction ----------------------------------------------------------
  struct {
    double eps = 0.5, delta = 0.2, margin = 0.05;
    std::string strategy = "minimax";
    std::uint64_t budget = 512, oversample = 8, analytic_cap = 20000;
    std::int64_t rounds = 10;
  } corr;
  {
    CLI::App* sub = app.add_subcommand(
        "build-correction",
        "build a correction polynomial (mean-free, small coefficients, close to 1 off a small set)");
    sub->fallthrough();
    sub->add_option("--eps", corr.eps, "measure bound for the exceptional set")
        ->required();
    sub->add_option("--delta", corr.delta, "coefficient sup bound")->required();
    sub->add_option("--strategy", corr.strategy, "minimax or analytic")
        ->capture_default_str();
    sub->add_option("--degree-budget", corr.budget, "maximum polynomial degree")
        ->capture_default_str();
    sub->add_option("--margin", corr.margin, "safety margin on the measure budget")
        ->capture_default_str();
    sub->add_option("--rounds", corr.rounds, "maximum exchange rounds")
        ->capture_default_str();
    sub->add_option("--oversample", corr.oversample, "verification grid oversampling")
        ->capture_default_str();
    sub->add_option("--analytic-cap", corr.analytic_cap,
                    "degree cap for the analytic strategy")
        ->capture_default_str();
    sub->callback([&] {
      invoke("build-correction",
             Options{{"eps", fmt_double(corr.eps)},
                     {"delta", fmt_double(corr.delta)},
                     {"strategy", corr.strategy},
                     {"degree-budget", std::to_string(corr.budget)},
                     {"margin", fmt_double(corr.margin)},
                     {"rounds", std::to_string(corr.rounds)},
                     {"oversample", std::to_string(corr.oversample)},
                     {"analytic-cap", std::to_string(corr.analytic_cap)}});
    });
  }

  // fit -----------------------------------------------------------------------
  struct {
    std::string target = "step", samples, profile = "default";
    double half_length = 3.141592653589793;
    double step = 0.012271846303085130;  // pi / 256
    double eta = 0.05, mu = 0.5;
    std::int64_t degree_max = 48;
  } fit;
  {
    CLI::App* sub = app.add_subcommand(
        "fit", "fit a sampled target in measure by shifted-integer exponentials");
    sub->fallthrough();
    CLI::Option* target_opt =
        sub->add_option("--target", fit.target,
                        "preset target: zero, step, sawtooth, single-exponential")
            ->capture_default_str();
    CLI::Option* samples_opt =
        sub->add_option("--samples", fit.samples, "CSV file of x,re,im samples");
    samples_opt->excludes(target_opt);
    sub->add_option("--half-length", fit.half_length, "preset sampling half-length")
        ->capture_default_str();
    sub->add_option("--step", fit.step, "preset sampling step")->capture_default_str();
    sub->add_option("--eta", fit.eta, "good-set residual bound")->capture_default_str();
    sub->add_option("--mu", fit.mu, "bad-set measure bound")->capture_default_str();
    sub->add_option("--profile", fit.profile, "shift profile name")
        ->capture_default_str();
    sub->add_option("--degree-max", fit.degree_max, "frequency cutoff for the fit")
        ->capture_default_str();
    sub->callback([&] {
      Options options{{"eta", fmt_double(fit.eta)},
                      {"mu", fmt_double(fit.mu)},
                      {"profile", fit.profile},
                      {"degree-max", std::to_string(fit.degree_max)}};
      if (!fit.samples.empty()) {
        options["samples"] = fit.samples;
      } else {
        options["target"] = fit.target;
        options["half-length"] = fmt_double(fit.half_length);
        options["step"] = fmt_double(fit.step);
      }
      invoke("fit", std::move(options));
    });
  }

  // represent -------------------------------------------------------------------
  struct {
    std::string target = "step", samples, schedule = "desk", law = "constant";
    std::string profile = "default", strategy;
    std::int64_t stages = 4;
    std::uint64_t seed = 1;
    double d = 0.5, alpha = 0.0;
    double eta0 = 0, mu0 = 0, eps0 = 0, eps_shrink = 0, delta0 = 0, delta_shrink = 0;
    double jitter_scale = 0;
    std::int64_t fit_degree_max = 0, budget_cap = 0, correction_rounds = 0;
    std::int64_t core_cells = 0, scan_range = 0;
    bool witness_scan = false;
  } rep;
  {
    CLI::App* sub = app.add_subcommand(
        "represent", "run the staged representation of a target function");
    sub->fallthrough();
    CLI::Option* target_opt =
        sub->add_option("--target", rep.target,
                        "preset target: zero, step, sawtooth, single-exponential")
            ->capture_default_str();
    CLI::Option* samples_opt =
        sub->add_option("--samples", rep.samples, "CSV file of x,re,im samples");
    samples_opt->excludes(target_opt);
    sub->add_option("--stages", rep.stages, "number of stages")->capture_default_str();
    sub->add_option("--schedule", rep.schedule, "parameter schedule: desk or paper")
        ->capture_default_str();
    sub->add_option("--seed", rep.seed, "spectrum seed")->capture_default_str();
    sub->add_option("--law", rep.law, "half-width law: constant or power")
        ->capture_default_str();
    sub->add_option("--d", rep.d, "half-width scale")->capture_default_str();
    sub->add_option("--alpha", rep.alpha, "power-law decay exponent")
        ->capture_default_str();
    sub->add_option("--profile", rep.profile, "shift profile name")
        ->capture_default_str();
    CLI::Option* o_eta0 = sub->add_option("--eta0", rep.eta0, "schedule: stage-1 good-set residual");
    CLI::Option* o_mu0 = sub->add_option("--mu0", rep.mu0, "schedule: stage-1 bad-set measure");
    CLI::Option* o_eps0 = sub->add_option("--eps0", rep.eps0, "schedule: stage-1 exceptional measure");
    CLI::Option* o_epss = sub->add_option("--eps-shrink", rep.eps_shrink, "schedule: exceptional-measure shrink factor");
    CLI::Option* o_del0 = sub->add_option("--delta0", rep.delta0, "schedule: stage-1 coefficient bound");
    CLI::Option* o_dels = sub->add_option("--delta-shrink", rep.delta_shrink, "schedule: coefficient-bound shrink factor");
    CLI::Option* o_jit = sub->add_option("--jitter-scale", rep.jitter_scale, "schedule: witness jitter scale");
    CLI::Option* o_fdm = sub->add_option("--fit-degree-max", rep.fit_degree_max, "schedule: fit frequency cutoff");
    CLI::Option* o_cap = sub->add_option("--budget-cap", rep.budget_cap, "schedule: correction degree cap");
    CLI::Option* o_crd = sub->add_option("--correction-rounds", rep.correction_rounds, "schedule: correction exchange rounds");
    CLI::Option* o_cgc = sub->add_option("--core-cells", rep.core_cells, "schedule: diagnostic grid cells");
    CLI::Option* o_rng = sub->add_option("--scan-range", rep.scan_range, "schedule: witness scan range");
    CLI::Option* o_str = sub->add_option("--strategy", rep.strategy, "schedule: correction strategy");
    CLI::Option* o_ws = sub->add_flag("--witness-scan", rep.witness_scan, "schedule: scan for natural witnesses instead of planting");
    sub->callback([&] {
      Options options{{"stages", std::to_string(rep.stages)},
                      {"schedule", rep.schedule},
                      {"seed", std::to_string(rep.seed)},
                      {"law", rep.law},
                      {"d", fmt_double(rep.d)},
                      {"alpha", fmt_double(rep.alpha)},
                      {"profile", rep.profile}};
      if (!rep.samples.empty()) options["samples"] = rep.samples;
      else options["target"] = rep.target;
      if (o_eta0->count() > 0) options["eta0"] = fmt_double(rep.eta0);
      if (o_mu0->count() > 0) options["mu0"] = fmt_double(rep.mu0);
      if (o_eps0->count() > 0) options["eps0"] = fmt_double(rep.eps0);
      if (o_epss->count() > 0) options["eps-shrink"] = fmt_double(rep.eps_shrink);
      if (o_del0->count() > 0) options["delta0"] = fmt_double(rep.delta0);
      if (o_dels->count() > 0) options["delta-shrink"] = fmt_double(rep.delta_shrink);
      if (o_jit->count() > 0) options["jitter-scale"] = fmt_double(rep.jitter_scale);
      if (o_fdm->count() > 0) options["fit-degree-max"] = std::to_string(rep.fit_degree_max);
      if (o_cap->count() > 0) options["budget-cap"] = std::to_string(rep.budget_cap);
      if (o_crd->count() > 0) options["correction-rounds"] = std::to_string(rep.correction_rounds);
      if (o_cgc->count() > 0) options["core-cells"] = std::to_string(rep.core_cells);
      if (o_rng->count() > 0) options["scan-range"] = std::to_string(rep.scan_range);
      if (o_str->count() > 0) options["strategy"] = rep.strategy;
      if (o_ws->count() > 0) options["witness-scan"] = rep.witness_scan ? "true" : "false";
      invoke("represent", std::move(options));
    });
  }

  // verify ------------------------------------------------------------------
  struct {
    std::string state;
  } ver;
  {
    CLI::App* sub = app.add_subcommand(
        "verify", "re-derive a completed run's guarantees from its state document");
    sub->fallthrough();
    sub->add_option("--state", ver.state, "state.json path or run directory")
        ->required();
    sub->callback([&] { invoke("verify", Options{{"state", ver.state}}); });
  }

  // counterexample ------------------------------------------------------------
  struct {
    double beta = 0.0, alpha = 1.0, c = 1.0;
    std::int64_t k_max = 6, tail_start = 10;
  } cex;
  {
    CLI::App* sub = app.add_subcommand(
        "counterexample",
        "convergence orders of difference-smoothed series under decaying offsets");
    sub->fallthrough();
    sub->add_option("--beta", cex.beta, "coefficient growth exponent")
        ->capture_default_str();
    sub->add_option("--alpha", cex.alpha, "offset decay exponent")
        ->capture_default_str();
    sub->add_option("--k-max", cex.k_max, "largest smoothing order to test")
        ->capture_default_str();
    sub->add_option("--c", cex.c, "offset scale")->capture_default_str();
    sub->add_option("--tail-start", cex.tail_start, "tail start index")
        ->capture_default_str();
    sub->callback([&] {
      invoke("counterexample", Options{{"beta", fmt_double(cex.beta)},
                                       {"alpha", fmt_double(cex.alpha)},
                                       {"k-max", std::to_string(cex.k_max)},
                                       {"c", fmt_double(cex.c)},
                                       {"tail-start", std::to_string(cex.tail_start)}});
    });
  }

  // replay ----------------------------------------------------------------------
  struct {
    std::string dir;
  } rpl;
  {
    CLI::App* sub = app.add_subcommand(
        "replay", "re-run a recorded manifest and byte-compare the artifacts");
    sub->fallthrough();
    sub->add_option("--dir", rpl.dir, "directory holding manifest.json")->required();
    sub->callback([&] { invoke("replay", Options{{"dir", rpl.dir}}); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForVersion& version) {
    return app.exit(version);
  } catch (const CLI::ParseError& error) {
    emit_error("usage", error.what());
    return 1;
  }
  return exit_code;
}

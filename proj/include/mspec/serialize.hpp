#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mspec/analysis.hpp"
#include "mspec/approximator.hpp"
#include "mspec/correction.hpp"
#include "mspec/representer.hpp"
#include "mspec/spectrum.hpp"
#include "mspec/trigpoly.hpp"

namespace mspec::serialize {

inline constexpr const char* kLibraryVersion = "0.1.0";

// All JSON output uses sorted keys and shortest round-trip numbers, so
// re-encoding a decoded document reproduces it byte for byte, and identical
// runs produce identical files.

std::string poly_to_json(const TrigPoly& poly);
TrigPoly poly_from_json(const std::string& text);

std::string spectrum_to_json(const PerturbedSpectrum& spectrum);
PerturbedSpectrum spectrum_from_json(const std::string& text);

std::string certificate_to_json(const correction::Certificate& cert);

std::string witness_to_json(const BlockWitness& witness);
std::string condition_to_json(const ConditionReport& report);
std::string probability_to_json(const BlockProbabilityReport& report);
std::string obstruction_to_json(const analysis::ObstructionReport& report);

std::string schedule_to_json(const representer::Schedule& schedule);
// Partial documents are allowed: absent keys keep the named schedule's
// defaults ("name" switches between desk and paper before overrides apply).
representer::Schedule schedule_from_json(const std::string& text);

std::string correction_to_json(const correction::CorrectionPoly& correction);
correction::CorrectionPoly correction_from_json(const std::string& text);

std::string fit_to_json(const approximator::FitReport& report,
                        const TrigPoly& poly);

// Full run record: target, schedule, spectrum, per-stage pieces and
// diagnostics. Block products are omitted (they are reconstructible from the
// stage's correction, fitted piece, and witness scale).
std::string state_to_json(const representer::RepresentationState& state);

// CSV exports (header row + shortest round-trip decimals).
std::string coefficients_csv(const representer::RepresentationState& state);
std::string trace_csv(const analysis::ConvergenceTrace& trace);

// Re-derives a completed run's guarantees from its serialized state alone:
// re-certifies every stage's correction, re-checks spectrum containment and
// the coefficient-norm bound, re-compares symmetric cutoffs between blocks
// (term-for-term) and within blocks (against the recorded majorants), and
// re-renders the convergence trace.
struct StateVerification {
  bool pass = false;
  std::string trace_csv;
  std::string report_json;
};
StateVerification verify_state(const std::string& state_json);

// Record of one CLI invocation, written next to its outputs.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> options;  // effective, canonicalized
  std::string library_version = kLibraryVersion;
  std::vector<std::string> outputs;  // paths relative to the manifest
  std::int64_t wall_ms = 0;          // informational; excluded from replay
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

// The manifest with volatile fields (wall clock) removed; replay compares
// these forms instead of raw bytes.
std::string manifest_comparison_form(const std::string& manifest_json);

}  // namespace mspec::serialize

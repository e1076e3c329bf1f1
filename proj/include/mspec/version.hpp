#pragma once

namespace mspec {

// Per-module version strings recorded in run manifests.
inline constexpr const char* kVersionCore = "1.0.0";
inline constexpr const char* kVersionTrigpoly = "1.0.0";
inline constexpr const char* kVersionSpectrum = "1.0.0";
inline constexpr const char* kVersionCorrection = "1.0.0";
inline constexpr const char* kVersionApproximator = "1.0.0";
inline constexpr const char* kVersionRepresenter = "1.0.0";
inline constexpr const char* kVersionAnalysis = "1.0.0";
inline constexpr const char* kVersionCli = "1.0.0";

}  // namespace mspec

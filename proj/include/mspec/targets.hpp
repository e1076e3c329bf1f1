#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mspec/gridfn.hpp"
#include "mspec/spectrum.hpp"

namespace mspec::targets {

// Built-in targets: "zero", "step" (indicator of [0, 1]), "sawtooth"
// (2pi-periodic, odd, range [-1, 1)), "single-exponential"
// (e^{i (q0 + sigma(q0)) x} with q0 = 3 under the given profile).
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);

std::complex<double> evaluate_preset(const std::string& name, double x,
                                     const ShiftProfile& profile);

GridFunction sample_preset(const std::string& name, double half_length,
                           double step, const ShiftProfile& profile);

}  // namespace mspec::targets

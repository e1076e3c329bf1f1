#include "mspec/targets.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "mspec/trigpoly.hpp"

namespace mspec::targets {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
constexpr std::int64_t kSingleExponentialQ = 3;

}  // namespace

std::vector<std::string> preset_names() {
  return {"zero", "step", "sawtooth", "single-exponential"};
}

bool is_preset(const std::string& name) {
  for (const std::string& p : preset_names())
    if (p == name) return true;
  return false;
}

std::complex<double> evaluate_preset(const std::string& name, double x,
                                     const ShiftProfile& profile) {
  if (name == "zero") return 0.0;
  if (name == "step") return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
  if (name == "sawtooth") {
    const double t = x / kTwoPi;
    return 2.0 * (t - std::floor(t + 0.5));
  }
  if (name == "single-exponential") {
    const Frequency f = Frequency::canonical(
        kSingleExponentialQ, profile.sigma(kSingleExponentialQ));
    return std::polar(1.0, term_phase(f, x));
  }
  throw std::invalid_argument("unknown target preset '" + name + "'");
}

GridFunction sample_preset(const std::string& name, double half_length,
                           double step, const ShiftProfile& profile) {
  if (!is_preset(name)) {
    throw std::invalid_argument("unknown target preset '" + name + "'");
  }
  GridFunction grid(half_length, step);
  for (std::size_t j = 0; j < grid.count(); ++j) {
    grid.samples()[j] = evaluate_preset(name, grid.x(j), profile);
  }
  return grid;
}

}  // namespace mspec::targets

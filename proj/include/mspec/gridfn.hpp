#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace mspec {

// Complex samples on the uniform grid x_j = -half_length + j * step,
// j = 0 .. count-1, covering [-L, L] with 2L/step an integer.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(double half_length, double step);

  double half_length() const { return half_length_; }
  double step() const { return step_; }
  std::size_t count() const { return samples_.size(); }
  double x(std::size_t j) const {
    return -half_length_ + static_cast<double>(j) * step_;
  }

  std::vector<std::complex<double>>& samples() { return samples_; }
  const std::vector<std::complex<double>>& samples() const { return samples_; }

  // CSV with header "x,re,im", one row per sample; numbers are shortest
  // round-trip decimals, so save/load/save is byte-stable.
  std::string to_csv() const;
  static GridFunction from_csv(const std::string& text);

 private:
  double half_length_ = 0.0;
  double step_ = 1.0;
  std::vector<std::complex<double>> samples_;
};

}  // namespace mspec

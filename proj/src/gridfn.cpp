#include "mspec/gridfn.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace mspec {

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(const char* begin, const char* end) {
  double v = 0.0;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("bad numeric field in CSV: " +
                                std::string(begin, end));
  }
  return v;
}

}  // namespace

GridFunction::GridFunction(double half_length, double step)
    : half_length_(half_length), step_(step) {
  if (!(half_length > 0.0) || !(step > 0.0)) {
    throw std::invalid_argument("grid needs half_length > 0 and step > 0");
  }
  const double spans = 2.0 * half_length / step;
  const double rounded = std::round(spans);
  if (!(std::fabs(spans - rounded) < 1e-9 * (1.0 + rounded))) {
    throw std::invalid_argument("grid length must be an integer number of steps");
  }
  samples_.assign(static_cast<std::size_t>(rounded) + 1,
                  std::complex<double>(0.0, 0.0));
}

std::string GridFunction::to_csv() const {
  std::string out = "x,re,im\n";
  out.reserve(out.size() + samples_.size() * 40);
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    append_double(out, x(j));
    out.push_back(',');
    append_double(out, samples_[j].real());
    out.push_back(',');
    append_double(out, samples_[j].imag());
    out.push_back('\n');
  }
  return out;
}

GridFunction GridFunction::from_csv(const std::string& text) {
  std::vector<double> xs;
  std::vector<std::complex<double>> vals;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) {
      const std::string_view line(text.data() + pos, eol - pos);
      if (!header_seen) {
        if (line != "x,re,im") {
          throw std::invalid_argument("CSV header must be x,re,im");
        }
        header_seen = true;
      } else {
        const std::size_t c1 = line.find(',');
        const std::size_t c2 =
            c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos) {
          throw std::invalid_argument("CSV row needs three fields");
        }
        xs.push_back(parse_double(line.data(), line.data() + c1));
        vals.emplace_back(
            parse_double(line.data() + c1 + 1, line.data() + c2),
            parse_double(line.data() + c2 + 1, line.data() + line.size()));
      }
    }
    pos = eol + 1;
  }
  if (xs.size() < 2) {
    throw std::invalid_argument("CSV needs at least two sample rows");
  }
  const double L = -xs.front();
  const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  GridFunction out(L, h);
  if (out.count() != xs.size()) {
    throw std::invalid_argument("CSV grid is not uniform");
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (std::fabs(xs[j] - out.x(j)) > 1e-9 * (1.0 + std::fabs(xs[j]))) {
      throw std::invalid_argument("CSV grid is not uniform");
    }
    out.samples()[j] = vals[j];
  }
  return out;
}

}  // namespace mspec

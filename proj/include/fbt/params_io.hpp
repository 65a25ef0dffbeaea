#pragma once

// ModelParams as a key = value document:
//
//   theta[1] = 0.90000000000000002
//   ...
//   mu_T = 0.5
//
// Values are written with 17 significant digits and parse back bit-exactly.
// Keys absent from the document keep their defaults; unknown keys are errors.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fbt/text.hpp"
#include "fbt/types.hpp"

namespace fbt {

inline void write_params(std::ostream& os, const ModelParams& p) {
  using text::format_double;
  for (std::size_t j = 0; j < p.theta.size(); ++j)
    os << "theta[" << j + 1 << "] = " << format_double(p.theta[j]) << '\n';
  os << "mu_T = " << format_double(p.mu_T) << '\n';
  os << "mu_O = " << format_double(p.mu_O) << '\n';
  os << "mu_P = " << format_double(p.mu_P) << '\n';
  os << "p_stay = " << format_double(p.p_stay) << '\n';
}

inline std::string params_to_string(const ModelParams& p) {
  std::ostringstream os;
  write_params(os, p);
  return os.str();
}

inline ModelParams read_params(std::istream& is) {
  ModelParams p;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto body = std::string_view(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = text::trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw input_error("expected 'key = value'", line_no);
    const auto key = text::trim(body.substr(0, eq));
    const double value = text::parse_double(body.substr(eq + 1), line_no);

    if (key.substr(0, 6) == "theta[" && key.back() == ']') {
      const auto j = text::parse_int(key.substr(6, key.size() - 7), line_no);
      if (j < 1 || j > 8) throw input_error("theta index must be 1..8", line_no);
      p.theta[static_cast<std::size_t>(j - 1)] = value;
    } else if (key == "mu_T") {
      p.mu_T = value;
    } else if (key == "mu_O") {
      p.mu_O = value;
    } else if (key == "mu_P") {
      p.mu_P = value;
    } else if (key == "p_stay") {
      p.p_stay = value;
    } else {
      throw input_error("unknown parameter '" + std::string(key) + "'", line_no);
    }
  }
  p.validate();
  return p;
}

inline ModelParams params_from_string(const std::string& s) {
  std::istringstream is(s);
  return read_params(is);
}

}  // namespace fbt

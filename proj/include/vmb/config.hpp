#pragma once

#include <cstdint>
#include <string>

#include "vmb/velocity.hpp"

namespace vmb {

// Configuration problems exit with code 2; computation failures with 1.
struct ConfigError : Error {
  using Error::Error;
};

struct RunConfig {
  // [grid] collision/coefficient resolution
  int n_per_axis = 12;
  double scale = 1.0;
  int refine_n = 16;  // refinement column of cmd_coeffs

  // [spectral] working grid for mode spectra, dispersion and decay
  int spectral_n = 8;

  // [branch]
  std::string species = "two";  // two | one
  std::string branch = "low";   // low | detm | d0 | high
  double s_min = 1e-3, s_max = 0.1;
  int steps = 16;

  // [gap]
  double gap_s_min = 0.5, gap_s_max = 5.0;
  int gap_steps = 4;

  // [spectrum]
  double spectrum_s = 0.05;

  // [decay]
  std::string scenario = "two_species_field";
  double xi_min = 1e-3, xi_max = 8.0;
  int radial_nodes = 48;
  int directions = 14;
  double t_max = 500.0;
  int time_samples = 40;
  double d0 = 1.0, r0 = 0.5;
  double fit_lo = 50.0, fit_hi = 500.0;
  // the exponentially decaying P_d channel is fitted early, above the
  // eigendecomposition noise floor
  double pd_fit_lo = 8.0, pd_fit_hi = 80.0;

  // [run]
  int threads = 0;  // 0 = hardware default
  std::uint64_t seed = 1234;
  std::string out_dir = ".";

  // [validate]
  int validate_n = 8;
  std::string inject_fault;  // test fixture hook, e.g. "maxwell_sign_flip"

  std::string canonical_text() const;
  std::uint64_t hash() const;
};

RunConfig parse_config_file(const std::string& path);
void validate_ranges(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace vmb

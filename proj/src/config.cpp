#include "vmb/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vmb/semigroup.hpp"

namespace vmb {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "grid.n_per_axis=" << n_per_axis << "\ngrid.scale=" << scale
     << "\ngrid.refine_n=" << refine_n << "\nspectral.n=" << spectral_n
     << "\nbranch.species=" << species << "\nbranch.branch=" << branch
     << "\nbranch.s_min=" << s_min << "\nbranch.s_max=" << s_max << "\nbranch.steps=" << steps
     << "\ngap.s_min=" << gap_s_min << "\ngap.s_max=" << gap_s_max
     << "\ngap.steps=" << gap_steps << "\nspectrum.s=" << spectrum_s
     << "\ndecay.scenario=" << scenario << "\ndecay.xi_min=" << xi_min
     << "\ndecay.xi_max=" << xi_max << "\ndecay.radial_nodes=" << radial_nodes
     << "\ndecay.directions=" << directions << "\ndecay.t_max=" << t_max
     << "\ndecay.time_samples=" << time_samples << "\ndecay.d0=" << d0 << "\ndecay.r0=" << r0
     << "\ndecay.fit_lo=" << fit_lo << "\ndecay.fit_hi=" << fit_hi
     << "\ndecay.pd_fit_lo=" << pd_fit_lo << "\ndecay.pd_fit_hi=" << pd_fit_hi
     << "\nrun.threads=" << threads << "\nrun.seed=" << seed
     << "\nvalidate.n=" << validate_n << "\nvalidate.inject_fault=" << inject_fault << "\n";
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Setter {
  std::function<void(RunConfig&, const std::string&, const std::string&)> fn;
};

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

double to_num(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) bad(where, "trailing characters in number '" + v + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad(where, "expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& v, const std::string& where) {
  double x = to_num(v, where);
  if (x != static_cast<int>(x)) bad(where, "expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string where = path + ":" + std::to_string(lineno);
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad(where, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) bad(where, "expected key = value");
    std::string key = section + "." + trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));

    if (key == "grid.n_per_axis") cfg.n_per_axis = to_int(val, where);
    else if (key == "grid.scale") cfg.scale = to_num(val, where);
    else if (key == "grid.refine_n") cfg.refine_n = to_int(val, where);
    else if (key == "spectral.n") cfg.spectral_n = to_int(val, where);
    else if (key == "branch.species") cfg.species = val;
    else if (key == "branch.branch") cfg.branch = val;
    else if (key == "branch.s_min") cfg.s_min = to_num(val, where);
    else if (key == "branch.s_max") cfg.s_max = to_num(val, where);
    else if (key == "branch.steps") cfg.steps = to_int(val, where);
    else if (key == "gap.s_min") cfg.gap_s_min = to_num(val, where);
    else if (key == "gap.s_max") cfg.gap_s_max = to_num(val, where);
    else if (key == "gap.steps") cfg.gap_steps = to_int(val, where);
    else if (key == "spectrum.s") cfg.spectrum_s = to_num(val, where);
    else if (key == "decay.scenario") cfg.scenario = val;
    else if (key == "decay.xi_min") cfg.xi_min = to_num(val, where);
    else if (key == "decay.xi_max") cfg.xi_max = to_num(val, where);
    else if (key == "decay.radial_nodes") cfg.radial_nodes = to_int(val, where);
    else if (key == "decay.directions") cfg.directions = to_int(val, where);
    else if (key == "decay.t_max") cfg.t_max = to_num(val, where);
    else if (key == "decay.time_samples") cfg.time_samples = to_int(val, where);
    else if (key == "decay.d0") cfg.d0 = to_num(val, where);
    else if (key == "decay.r0") cfg.r0 = to_num(val, where);
    else if (key == "decay.fit_lo") cfg.fit_lo = to_num(val, where);
    else if (key == "decay.fit_hi") cfg.fit_hi = to_num(val, where);
    else if (key == "decay.pd_fit_lo") cfg.pd_fit_lo = to_num(val, where);
    else if (key == "decay.pd_fit_hi") cfg.pd_fit_hi = to_num(val, where);
    else if (key == "run.threads") cfg.threads = to_int(val, where);
    else if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(to_num(val, where));
    else if (key == "run.out_dir") cfg.out_dir = val;
    else if (key == "validate.n") cfg.validate_n = to_int(val, where);
    else if (key == "validate.inject_fault") cfg.inject_fault = val;
    else bad(where, "unknown key '" + key + "'");
  }
  validate_ranges(cfg);
  return cfg;
}

void validate_ranges(const RunConfig& c) {
  auto req = [&](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  req(c.n_per_axis >= 4 && c.n_per_axis <= 24, "grid.n_per_axis must be in [4,24]");
  req(c.scale > 0 && c.scale <= 4, "grid.scale must be in (0,4]");
  req(c.refine_n >= 4 && c.refine_n <= 24, "grid.refine_n must be in [4,24]");
  req(c.spectral_n >= 4 && c.spectral_n <= 16, "spectral.n must be in [4,16]");
  req(c.species == "two" || c.species == "one", "branch.species must be two|one");
  req(c.branch == "low" || c.branch == "detm" || c.branch == "d0" || c.branch == "high",
      "branch.branch must be low|detm|d0|high");
  req(c.s_min > 0 && c.s_max > c.s_min, "branch s range invalid");
  req(c.steps >= 1 && c.steps <= 10000, "branch.steps must be in [1,10000]");
  req(c.gap_s_min > 0 && c.gap_s_max >= c.gap_s_min, "gap s range invalid");
  req(c.gap_steps >= 1 && c.gap_steps <= 1000, "gap.steps must be in [1,1000]");
  req(c.spectrum_s > 0, "spectrum.s must be positive");
  try {
    scenario_from_name(c.scenario);
  } catch (const Error&) {
    throw ConfigError("config: unknown decay.scenario '" + c.scenario + "'");
  }
  req(c.xi_min > 0 && c.xi_max > c.xi_min, "decay xi range invalid");
  req(c.radial_nodes >= 4 && c.radial_nodes <= 512, "decay.radial_nodes must be in [4,512]");
  req(c.directions == 14, "decay.directions: only the 14-point set is supported");
  req(c.t_max > 1 && c.t_max <= 1e4, "decay.t_max must be in (1,1e4]");
  req(c.time_samples >= 8 && c.time_samples <= 2000, "decay.time_samples must be in [8,2000]");
  req(c.d0 > 0 && c.r0 > 0 && c.r0 <= 3, "decay.d0/r0 out of range");
  req(c.fit_lo > 0 && c.fit_hi > c.fit_lo, "decay fit window invalid");
  req(c.pd_fit_lo > 0 && c.pd_fit_hi > c.pd_fit_lo, "decay pd fit window invalid");
  req(c.threads >= 0 && c.threads <= 256, "run.threads must be in [0,256]");
  req(c.validate_n >= 4 && c.validate_n <= 16, "validate.n must be in [4,16]");
  req(c.inject_fault.empty() || c.inject_fault == "maxwell_sign_flip",
      "validate.inject_fault: unknown fault");
}

}  // namespace vmb

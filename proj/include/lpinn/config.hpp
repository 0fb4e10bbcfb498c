#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "problems.hpp"
#include "trainer.hpp"

namespace lpinn {

inline constexpr const char* kCodeVersion = "lpinn 0.1.0";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything needed to reproduce one run. Problem-dependent fields are
/// optional; unset means the problem's default.
struct RunConfig {
  std::string problem = "lorenz";
  std::string scheme = "lyapunov";
  double lambda = 10.0;
  std::vector<double> epsilons{0.01, 0.1, 1.0, 10.0, 100.0};
  std::size_t iters_per_epsilon = 2000;
  bool smooth_lambda = false;
  double smoothing_decay = 0.9;
  std::size_t iters = 2000;
  double lr = 0.01;
  std::uint64_t seed = 0;
  std::size_t snapshot_every = 10;
  std::string shift = "additive";
  std::optional<std::size_t> nt, nx, width, depth;
  std::optional<double> horizon, sigma, rho, beta, nu;
  std::string out = "out";

  bool operator==(const RunConfig&) const = default;

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k{
        "problem", "scheme", "lambda", "epsilons", "iters_per_epsilon", "smooth_lambda", "smoothing_decay",
        "iters",   "lr",     "seed",   "snapshot_every", "shift", "nt", "nx", "width", "depth",
        "T",       "sigma",  "rho",    "beta", "nu", "out"};
    return k;
  }

  void set(const std::string& key, const std::string& value) {
    try {
      set_unchecked(key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
    }
  }

  void validate() const {
    if (problem != "lorenz" && problem != "burgers") throw ConfigError("problem must be lorenz or burgers");
    try {
      parse_scheme(scheme);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
    if (shift != "additive" && shift != "time_scaled") throw ConfigError("shift must be additive or time_scaled");
    if (!(lr > 0)) throw ConfigError("lr must be positive");
    if (epsilons.empty()) throw ConfigError("epsilons must not be empty");
    for (double e : epsilons)
      if (e < 0) throw ConfigError("epsilons must be nonnegative");
    if (iters_per_epsilon == 0) throw ConfigError("iters_per_epsilon must be positive");
    if (!(smoothing_decay >= 0 && smoothing_decay < 1)) throw ConfigError("smoothing_decay must be in [0, 1)");
    if (snapshot_every == 0) throw ConfigError("snapshot_every must be positive");
    auto positive = [](const auto& o, const char* name) {
      if (o && !(*o > 0)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(nt, "nt");
    positive(nx, "nx");
    positive(width, "width");
    positive(depth, "depth");
    positive(horizon, "T");
    positive(sigma, "sigma");
    positive(rho, "rho");
    positive(beta, "beta");
    positive(nu, "nu");
  }

  /// key=value lines in keys() order; doubles with 17 significant digits.
  std::string emit() const {
    std::ostringstream os;
    os.precision(17);
    auto line = [&os](const char* k, const auto& v) { os << k << '=' << v << '\n'; };
    line("problem", problem);
    line("scheme", scheme);
    line("lambda", lambda);
    os << "epsilons=";
    for (std::size_t i = 0; i < epsilons.size(); ++i) os << (i ? "," : "") << epsilons[i];
    os << '\n';
    line("iters_per_epsilon", iters_per_epsilon);
    line("smooth_lambda", smooth_lambda ? "true" : "false");
    line("smoothing_decay", smoothing_decay);
    line("iters", iters);
    line("lr", lr);
    line("seed", seed);
    line("snapshot_every", snapshot_every);
    line("shift", shift);
    if (nt) line("nt", *nt);
    if (nx) line("nx", *nx);
    if (width) line("width", *width);
    if (depth) line("depth", *depth);
    if (horizon) line("T", *horizon);
    if (sigma) line("sigma", *sigma);
    if (rho) line("rho", *rho);
    if (beta) line("beta", *beta);
    if (nu) line("nu", *nu);
    line("out", out);
    return os.str();
  }

  /// Applies key=value lines on top of the current values. Blank lines and
  /// lines starting with '#' are ignored; unknown keys are rejected.
  void merge_text(const std::string& text) {
    std::istringstream is(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
      ++lineno;
      const std::string ln = trim(raw);
      if (ln.empty() || ln[0] == '#') continue;
      const auto eq = ln.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + ln + "'");
      set(trim(ln.substr(0, eq)), trim(ln.substr(eq + 1)));
    }
  }

  static RunConfig parse(const std::string& text) {
    RunConfig c;
    c.merge_text(text);
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  LorenzProblem lorenz() const {
    LorenzProblem p;
    if (horizon) p.T = *horizon;
    if (sigma) p.sigma = *sigma;
    if (rho) p.rho = *rho;
    if (beta) p.beta = *beta;
    if (nt) p.n_t = *nt;
    return p;
  }

  BurgersProblem burgers() const {
    BurgersProblem p;
    if (horizon) p.T = *horizon;
    if (nu) p.nu = *nu;
    if (nt) p.n_t = *nt;
    if (nx) p.n_x = *nx;
    return p;
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.scheme.kind = parse_scheme(scheme);
    t.scheme.exponential_rate = lambda;
    t.scheme.epsilons = epsilons;
    t.scheme.iters_per_epsilon = iters_per_epsilon;
    t.scheme.smooth_lambda = smooth_lambda;
    t.scheme.smoothing_decay = smoothing_decay;
    t.iters = iters;
    t.adam.lr = lr;
    t.seed = seed;
    t.snapshot_every = snapshot_every;
    t.shift = shift == "time_scaled" ? ShiftKind::time_scaled : ShiftKind::additive;
    if (width || depth) {
      const bool lorenz_problem = problem == "lorenz";
      t.layers = lorenz_problem ? mlp_layers(1, width.value_or(20), depth.value_or(5), 3)
                                : mlp_layers(2, width.value_or(20), depth.value_or(8), 1);
    }
    return t;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::size_t to_size(const std::string& v) {
    if (v.empty() || v[0] == '-') throw std::invalid_argument("negative");
    std::size_t pos = 0;
    const auto r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::size_t>(r);
  }
  static double to_double(const std::string& v) {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return r;
  }
  static bool to_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("not a boolean");
  }

  void set_unchecked(const std::string& key, const std::string& v) {
    if (key == "problem") problem = v;
    else if (key == "scheme") scheme = v;
    else if (key == "lambda") lambda = to_double(v);
    else if (key == "epsilons") {
      std::vector<double> e;
      std::stringstream ss(v);
      std::string tok;
      while (std::getline(ss, tok, ',')) e.push_back(to_double(trim(tok)));
      epsilons = std::move(e);
    }
    else if (key == "iters_per_epsilon") iters_per_epsilon = to_size(v);
    else if (key == "smooth_lambda") smooth_lambda = to_bool(v);
    else if (key == "smoothing_decay") smoothing_decay = to_double(v);
    else if (key == "iters") iters = to_size(v);
    else if (key == "lr") lr = to_double(v);
    else if (key == "seed") seed = to_size(v);
    else if (key == "snapshot_every") snapshot_every = to_size(v);
    else if (key == "shift") shift = v;
    else if (key == "nt") nt = to_size(v);
    else if (key == "nx") nx = to_size(v);
    else if (key == "width") width = to_size(v);
    else if (key == "depth") depth = to_size(v);
    else if (key == "T") horizon = to_double(v);
    else if (key == "sigma") sigma = to_double(v);
    else if (key == "rho") rho = to_double(v);
    else if (key == "beta") beta = to_double(v);
    else if (key == "nu") nu = to_double(v);
    else if (key == "out") out = v;
    else throw ConfigError("unknown configuration key '" + key + "'");
  }
};

}  // namespace lpinn

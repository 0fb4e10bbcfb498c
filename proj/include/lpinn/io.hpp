#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "reference.hpp"
#include "trainer.hpp"

namespace lpinn {

namespace fs = std::filesystem;

/// Shortest round-trip-safe rendering with 17 significant digits.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `content` to a sibling temporary file, then renames it over `path`.
inline void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Comma-separated rows under a header, LF endings.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) { row_strings(header); }

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return fmt17(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  std::ostringstream os_;
};

inline std::string loss_csv(const RunRecord& r) {
  CsvBuilder c({"iteration", "loss"});
  for (std::size_t k = 0; k < r.loss.size(); ++k) c.row(k, r.loss[k]);
  return c.str();
}

inline std::string weights_csv(const RunRecord& r) {
  CsvBuilder c({"iteration", "t", "rho", "lambda"});
  for (const auto& s : r.snapshots)
    for (std::size_t i = 0; i < r.times.size(); ++i) c.row(s.iteration, r.times[i], s.rho[i], s.lambda[i]);
  return c.str();
}

inline std::string lambda_csv(const RunRecord& r) {
  CsvBuilder c({"iteration", "t", "lambda", "cumulative", "lambda_ideal"});
  for (const auto& s : r.snapshots)
    for (std::size_t i = 0; i < r.times.size(); ++i)
      c.row(s.iteration, r.times[i], s.lambda[i], s.cumulative[i],
            s.lambda_ideal.empty() ? std::string() : fmt17(s.lambda_ideal[i]));
  return c.str();
}

inline std::string final_error_csv(const RunRecord& r) {
  CsvBuilder c({"iteration", "final_error"});
  for (const auto& s : r.snapshots) c.row(s.iteration, s.final_error);
  return c.str();
}

/// Config echo plus provenance; parseable back by RunConfig after stripping
/// the `#` lines.
inline std::string manifest(const RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  std::string m = std::string("# ") + kCodeVersion + "\n";
  for (const auto& [k, v] : extra) m += "# " + k + "=" + v + "\n";
  return m + cfg.emit();
}

/// Writes the four run CSVs, the final parameters and the manifest into `dir`.
inline void write_run(const fs::path& dir, const RunConfig& cfg, const RunRecord& r) {
  atomic_write(dir / "loss_history.csv", loss_csv(r));
  atomic_write(dir / "weights_history.csv", weights_csv(r));
  atomic_write(dir / "lambda_history.csv", lambda_csv(r));
  atomic_write(dir / "final_error.csv", final_error_csv(r));
  std::ostringstream ps;
  write_params(ps, r.final_params);
  atomic_write(dir / "params.txt", ps.str());
  atomic_write(dir / "manifest.txt", manifest(cfg));
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Cache directory: $LPINN_CACHE_DIR, else .lpinn-cache in the working directory.
inline fs::path cache_dir() {
  if (const char* env = std::getenv("LPINN_CACHE_DIR"); env && *env) return env;
  return ".lpinn-cache";
}

inline std::string lorenz_reference_csv(const LorenzProblem& p) {
  const auto times = p.time_grid().points();
  const auto traj = solve_lorenz_reference(p, times);
  CsvBuilder c({"t", "x", "y", "z"});
  for (std::size_t i = 0; i < times.size(); ++i) c.row(times[i], traj[i][0], traj[i][1], traj[i][2]);
  return c.str();
}

inline std::string burgers_reference_csv(const BurgersField& f) {
  CsvBuilder c({"t", "x", "u"});
  for (std::size_t i = 0; i < f.t_grid.size; ++i)
    for (std::size_t j = 0; j < f.x_grid.size; ++j) c.row(f.t_grid[i], f.x_grid[j], f.at(i, j));
  return c.str();
}

/// Returns the cached bytes for `key`, producing and storing them on a miss.
template <class Produce>
std::string cached(const std::string& stem, const std::string& key, Produce&& produce) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  const fs::path path = cache_dir() / (stem + "-" + hex + ".csv");
  if (fs::exists(path)) return read_file(path);
  std::string bytes = produce();
  atomic_write(path, bytes);
  return bytes;
}

}  // namespace lpinn

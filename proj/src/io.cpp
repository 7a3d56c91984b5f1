#include "fgle/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgle/error.hpp"

namespace fgle {

namespace {

void append_row(std::string& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
}

std::string component_header(const char* base, std::size_t dims) {
  if (dims == 1) return base;
  std::string h;
  for (std::size_t d = 0; d < dims; ++d) {
    if (d) h += ',';
    h += std::string(base) + "_" + std::to_string(d);
  }
  return h;
}

}  // namespace

const char* tool_version() noexcept { return "0.1.0"; }

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string fbm_csv(const std::vector<std::vector<double>>& paths, double step) {
  std::string out = "path,index,t,value\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (std::size_t n = 0; n < paths[p].size(); ++n) {
      append_row(out, {std::to_string(p), std::to_string(n), format_number(static_cast<double>(n) * step),
                       format_number(paths[p][n])});
      out += '\n';
    }
  }
  return out;
}

std::string trajectories_csv(const std::vector<Trajectory>& trajectories) {
  const std::size_t dims = trajectories.empty() ? 1 : trajectories.front().dim;
  std::string out = "path,index,t," + component_header("x", dims) + "\n";
  for (std::size_t p = 0; p < trajectories.size(); ++p) {
    const auto& tr = trajectories[p];
    for (std::size_t n = 0; n <= tr.steps; ++n) {
      out += std::to_string(p) + ',' + std::to_string(n) + ',' + format_number(tr.time(n));
      for (std::size_t d = 0; d < tr.dim; ++d) out += ',' + format_number(tr.at(n, d));
      out += '\n';
    }
  }
  return out;
}

std::string noise_csv(const std::vector<GPath>& noise) {
  const std::size_t dims = noise.empty() ? 1 : noise.front().dims;
  std::string out = "path,index,t," + component_header("G", dims) + "\n";
  for (std::size_t p = 0; p < noise.size(); ++p) {
    const auto& g = noise[p];
    for (std::size_t n = 0; n <= g.steps(); ++n) {
      out += std::to_string(p) + ',' + std::to_string(n) + ',' + format_number(g.grid.time(n));
      for (std::size_t d = 0; d < g.dims; ++d) out += ',' + format_number(g.at(d, n));
      out += '\n';
    }
  }
  return out;
}

std::string snapshots_csv(std::span<const double> states, std::size_t paths, std::span<const double> times,
                          std::size_t dims) {
  if (states.size() != paths * times.size() * dims) throw MismatchError("snapshot array has the wrong shape");
  std::string out = "path_id,t," + component_header("x", dims) + "\n";
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t t = 0; t < times.size(); ++t) {
      out += std::to_string(p) + ',' + format_number(times[t]);
      for (std::size_t d = 0; d < dims; ++d) out += ',' + format_number(states[(p * times.size() + t) * dims + d]);
      out += '\n';
    }
  }
  return out;
}

std::string error_table_csv(const ConvergenceResult& result) {
  std::string out = "H,scheme,k,rms_error,sup_error,n_paths,seed\n";
  for (const auto& row : result.rows) {
    append_row(out, {format_number(row.hurst), scheme_name(row.scheme), format_number(row.step),
                     format_number(row.final_error), format_number(row.sup_error), std::to_string(row.paths),
                     std::to_string(result.config.seed)});
    out += '\n';
  }
  return out;
}

std::string histograms_csv(const ErgodicityResult& result) {
  if (result.snapshots.empty()) return "";
  const auto& first = result.snapshots.front().histogram;
  const std::size_t dims = first.dims;
  std::string out = "t," + component_header("bin", dims) + "," + component_header("center", dims) + ",mass";
  if (result.has_gibbs) out += ",gibbs_mass";
  out += '\n';
  for (const auto& s : result.snapshots) {
    const auto& h = s.histogram;
    for (std::size_t c = 0; c < h.masses.size(); ++c) {
      std::vector<std::size_t> idx(dims);
      std::size_t rest = c;
      for (std::size_t d = dims; d-- > 0;) {
        idx[d] = rest % h.bins[d];
        rest /= h.bins[d];
      }
      out += format_number(s.time);
      for (std::size_t d = 0; d < dims; ++d) out += ',' + std::to_string(idx[d]);
      for (std::size_t d = 0; d < dims; ++d) {
        out += ',' + format_number(h.lo[d] + (static_cast<double>(idx[d]) + 0.5) * h.bin_width(d));
      }
      out += ',' + format_number(h.masses[c]);
      if (result.has_gibbs) out += ',' + format_number(result.gibbs.masses[c]);
      out += '\n';
    }
  }
  return out;
}

std::string moments_csv(const ErgodicityResult& result) {
  const std::size_t dims = result.config.x0.size();
  std::string out = "t,msd,msd_stderr," + component_header("var", dims) + ",l1_gibbs,asymmetry\n";
  for (const auto& s : result.snapshots) {
    out += format_number(s.time) + ',' + format_number(s.msd) + ',' + format_number(s.msd_stderr);
    for (std::size_t d = 0; d < dims; ++d) out += ',' + format_number(s.variance[d]);
    out += ',' + (s.l1 >= 0.0 ? format_number(s.l1) : std::string());
    out += ',' + (s.asymmetry >= 0.0 ? format_number(s.asymmetry) : std::string());
    out += '\n';
  }
  return out;
}

nlohmann::json make_manifest(const std::string& subcommand, std::uint64_t seed, const nlohmann::json& config,
                             const std::vector<std::string>& outputs) {
  return {{"tool", "fgle"},
          {"version", tool_version()},
          {"subcommand", subcommand},
          {"seed", seed},
          {"config", config},
          {"outputs", outputs}};
}

}  // namespace fgle

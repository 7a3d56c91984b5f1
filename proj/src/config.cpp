#include "fgle/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fgle/error.hpp"
#include "fgle/fbm.hpp"

namespace fgle {

namespace {

using nlohmann::json;

void check_keys(const json& doc, std::initializer_list<const char*> allowed) {
  if (!doc.is_object()) throw ConfigError("(root)", "config must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items()) {
    if (!keys.count(key)) throw ConfigError(key, "unknown key");
  }
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(field, "must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(field, "expected a non-negative integer");
}

std::string string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

// Accepts a scalar as a one-element list.
std::vector<double> numbers(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(field, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> sizes(const json& v, const std::string& field) {
  if (v.is_number()) return {static_cast<std::size_t>(unsigned_int(v, field))};
  if (!v.is_array()) throw ConfigError(field, "expected an integer or an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<std::size_t>(unsigned_int(v[i], field + "[" + std::to_string(i) + "]")));
  }
  return out;
}

void read_problem(const json& v, std::string& force, std::vector<double>& params) {
  if (v.is_string()) {
    force = v.get<std::string>();
    params.clear();
    return;
  }
  if (!v.is_object()) throw ConfigError("problem", "expected a force name or {\"force\": ..., \"params\": [...]}");
  for (const auto& [key, value] : v.items()) {
    if (key != "force" && key != "params") throw ConfigError("problem." + key, "unknown key");
  }
  if (v.contains("force")) force = string(v["force"], "problem.force");
  params = v.contains("params") ? numbers(v["params"], "problem.params") : std::vector<double>{};
  try {
    make_force(force, params);
  } catch (const ConfigError& e) {
    throw ConfigError("problem", e.what());
  }
}

}  // namespace

Scheme parse_scheme(const std::string& name, const std::string& field) {
  if (name == "direct") return Scheme::direct;
  if (name == "fast") return Scheme::fast;
  throw ConfigError(field, "scheme must be \"direct\" or \"fast\", got \"" + name + "\"");
}

SchemeSelection parse_scheme_selection(const std::string& name, const std::string& field) {
  if (name == "direct") return SchemeSelection::direct;
  if (name == "fast") return SchemeSelection::fast;
  if (name == "both") return SchemeSelection::both;
  throw ConfigError(field, "scheme must be \"direct\", \"fast\" or \"both\", got \"" + name + "\"");
}

json load_config_file(const std::filesystem::path& path, const std::string& subcommand) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n');
    const auto last_nl = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    const std::size_t column = last_nl == std::string::npos || byte == 0 ? byte + 1 : byte - last_nl;
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column),
                      "JSON syntax error");
  }
  if (doc.is_object() && doc.contains("subcommand") && doc.contains("config")) {
    if (!doc["subcommand"].is_string() || doc["subcommand"].get<std::string>() != subcommand) {
      throw ConfigError("subcommand", "manifest was written by a different subcommand");
    }
    return doc["config"];
  }
  return doc;
}

void SoeRunConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps", "must lie in (0, 1)");
  if (!(delta > 0.0)) throw ConfigError("delta", "must be positive");
  if (!(delta < horizon)) throw ConfigError("delta", "must be below T");
  if (node_budget == 0) throw ConfigError("node_budget", "must be positive");
}

void FbmRunConfig::validate() const {
  if (steps < 2) throw ConfigError("N", "needs at least two steps");
  if (!(step > 0.0)) throw ConfigError("k", "must be positive");
  if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("H", "must lie in (0, 1)");
  if (paths == 0) throw ConfigError("n_paths", "must be positive");
}

FgleProblem SolveRunConfig::problem() const {
  ForceField f = make_force(force, force_params);
  FgleProblem p = FgleProblem::physical(hurst, std::move(f), x0);
  if (alpha_override) p.alpha = *alpha_override;
  return p;
}

void SolveRunConfig::validate() const {
  const ForceField f = make_force(force, force_params);
  if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("H", "must lie in (0, 1)");
  if (x0.size() != f.dim) throw ConfigError("x0", "needs one value per dimension of the force");
  if (alpha_override) {
    if (!(*alpha_override > 0.0 && *alpha_override <= 1.0)) throw ConfigError("alpha_override", "must lie in (0, 1]");
    if (physical_noise && std::abs(*alpha_override - (2.0 - 2.0 * hurst)) > 1e-12) {
      throw ConfigError("alpha_override", "noise can only be sampled for alpha = 2 - 2H; set noise to \"none\"");
    }
  }
  const double alpha = alpha_override.value_or(2.0 - 2.0 * hurst);
  if (scheme == Scheme::fast && !(alpha < 1.0)) throw ConfigError("scheme", "the fast scheme needs alpha < 1");
  if (scheme == Scheme::fast && eps == 0.0 && !(hurst > 0.5 && hurst < 1.0)) {
    throw ConfigError("eps", "the automatic tolerance needs 1/2 < H < 1; give eps explicitly");
  }
  if (!(step > 0.0)) throw ConfigError("k", "must be positive");
  const double r = horizon / step;
  if (!(r >= 2.0) || std::abs(r - std::round(r)) > 1e-9 * r) throw ConfigError("T", "must be a multiple (>= 2) of k");
  if (paths == 0) throw ConfigError("n_paths", "must be positive");
  if (eps < 0.0 || eps >= 1.0) throw ConfigError("eps", "must lie in [0, 1)");
}

void apply_config(const json& doc, SoeRunConfig& c) {
  check_keys(doc, {"alpha", "eps", "delta", "T", "node_budget"});
  if (doc.contains("alpha")) c.alpha = number(doc["alpha"], "alpha");
  if (doc.contains("eps")) c.eps = number(doc["eps"], "eps");
  if (doc.contains("delta")) c.delta = number(doc["delta"], "delta");
  if (doc.contains("T")) c.horizon = number(doc["T"], "T");
  if (doc.contains("node_budget")) c.node_budget = unsigned_int(doc["node_budget"], "node_budget");
}

void apply_config(const json& doc, FbmRunConfig& c) {
  check_keys(doc, {"N", "k", "H", "n_paths", "seed"});
  if (doc.contains("N")) c.steps = unsigned_int(doc["N"], "N");
  if (doc.contains("k")) c.step = number(doc["k"], "k");
  if (doc.contains("H")) c.hurst = number(doc["H"], "H");
  if (doc.contains("n_paths")) c.paths = unsigned_int(doc["n_paths"], "n_paths");
  if (doc.contains("seed")) c.seed = unsigned_int(doc["seed"], "seed");
}

void apply_config(const json& doc, SolveRunConfig& c) {
  check_keys(doc, {"problem", "H", "alpha_override", "x0", "k", "T", "n_paths", "scheme", "eps", "noise", "seed"});
  if (doc.contains("problem")) read_problem(doc["problem"], c.force, c.force_params);
  if (doc.contains("H")) c.hurst = number(doc["H"], "H");
  if (doc.contains("alpha_override")) {
    if (doc["alpha_override"].is_null()) {
      c.alpha_override.reset();
    } else {
      c.alpha_override = number(doc["alpha_override"], "alpha_override");
    }
  }
  if (doc.contains("x0")) c.x0 = numbers(doc["x0"], "x0");
  if (doc.contains("k")) c.step = number(doc["k"], "k");
  if (doc.contains("T")) c.horizon = number(doc["T"], "T");
  if (doc.contains("n_paths")) c.paths = unsigned_int(doc["n_paths"], "n_paths");
  if (doc.contains("scheme")) c.scheme = parse_scheme(string(doc["scheme"], "scheme"), "scheme");
  if (doc.contains("eps")) c.eps = number(doc["eps"], "eps");
  if (doc.contains("noise")) {
    const std::string n = string(doc["noise"], "noise");
    if (n != "physical" && n != "none") throw ConfigError("noise", "must be \"physical\" or \"none\"");
    c.physical_noise = n == "physical";
  }
  if (doc.contains("seed")) c.seed = unsigned_int(doc["seed"], "seed");
}

void apply_config(const json& doc, ConvergenceConfig& c) {
  check_keys(doc, {"H", "k", "k_ref", "T", "n_paths", "scheme", "eps", "x0", "seed", "chunk"});
  if (doc.contains("H")) c.hursts = numbers(doc["H"], "H");
  if (doc.contains("k")) c.steps = numbers(doc["k"], "k");
  if (doc.contains("k_ref")) c.reference_step = number(doc["k_ref"], "k_ref");
  if (doc.contains("T")) c.horizon = number(doc["T"], "T");
  if (doc.contains("n_paths")) c.paths = unsigned_int(doc["n_paths"], "n_paths");
  if (doc.contains("scheme")) c.scheme = parse_scheme_selection(string(doc["scheme"], "scheme"), "scheme");
  if (doc.contains("eps")) c.eps = number(doc["eps"], "eps");
  if (doc.contains("x0")) c.x0 = number(doc["x0"], "x0");
  if (doc.contains("seed")) c.seed = unsigned_int(doc["seed"], "seed");
  if (doc.contains("chunk")) c.chunk = unsigned_int(doc["chunk"], "chunk");
}

void apply_config(const json& doc, ErgodicityConfig& c) {
  check_keys(doc, {"problem", "H", "x0", "k", "T", "n_paths", "scheme", "eps", "snapshots", "bins", "box",
                   "tail_start", "seed", "chunk"});
  if (doc.contains("problem")) read_problem(doc["problem"], c.force, c.force_params);
  if (doc.contains("H")) c.hurst = number(doc["H"], "H");
  if (doc.contains("x0")) c.x0 = numbers(doc["x0"], "x0");
  if (doc.contains("k")) c.step = number(doc["k"], "k");
  if (doc.contains("T")) c.horizon = number(doc["T"], "T");
  if (doc.contains("n_paths")) c.paths = unsigned_int(doc["n_paths"], "n_paths");
  if (doc.contains("scheme")) c.scheme = parse_scheme(string(doc["scheme"], "scheme"), "scheme");
  if (doc.contains("eps")) c.eps = number(doc["eps"], "eps");
  if (doc.contains("snapshots")) {
    c.snapshots = doc["snapshots"].is_null() ? std::vector<double>{} : numbers(doc["snapshots"], "snapshots");
  }
  if (doc.contains("bins")) c.bins = sizes(doc["bins"], "bins");
  if (doc.contains("box")) {
    const json& box = doc["box"];
    if (!box.is_object()) throw ConfigError("box", "expected {\"lo\": [...], \"hi\": [...]}");
    for (const auto& [key, value] : box.items()) {
      if (key != "lo" && key != "hi") throw ConfigError("box." + key, "unknown key");
    }
    if (box.contains("lo")) c.box_lo = numbers(box["lo"], "box.lo");
    if (box.contains("hi")) c.box_hi = numbers(box["hi"], "box.hi");
  }
  if (doc.contains("tail_start")) c.tail_start = number(doc["tail_start"], "tail_start");
  if (doc.contains("seed")) c.seed = unsigned_int(doc["seed"], "seed");
  if (doc.contains("chunk")) c.chunk = unsigned_int(doc["chunk"], "chunk");
}

json to_json(const SoeRunConfig& c) {
  return {{"alpha", c.alpha}, {"eps", c.eps}, {"delta", c.delta}, {"T", c.horizon}, {"node_budget", c.node_budget}};
}

json to_json(const FbmRunConfig& c) {
  return {{"N", c.steps}, {"k", c.step}, {"H", c.hurst}, {"n_paths", c.paths}, {"seed", c.seed}};
}

json to_json(const SolveRunConfig& c) {
  json j = {{"problem", {{"force", c.force}, {"params", c.force_params}}},
            {"H", c.hurst},
            {"x0", c.x0},
            {"k", c.step},
            {"T", c.horizon},
            {"n_paths", c.paths},
            {"scheme", scheme_name(c.scheme)},
            {"eps", c.eps},
            {"noise", c.physical_noise ? "physical" : "none"},
            {"seed", c.seed}};
  j["alpha_override"] = c.alpha_override ? json(*c.alpha_override) : json(nullptr);
  return j;
}

}  // namespace fgle

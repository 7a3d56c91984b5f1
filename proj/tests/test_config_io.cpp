#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>

#include "fgle/config.hpp"
#include "fgle/error.hpp"
#include "fgle/io.hpp"

using namespace fgle;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fgle_config_io_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string field_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(ApplyConfig, OverridesOnlyGivenKeys) {
  SoeRunConfig soe;
  apply_config(json::parse(R"({"alpha": 0.7, "T": 10})"), soe);
  EXPECT_EQ(soe.alpha, 0.7);
  EXPECT_EQ(soe.horizon, 10.0);
  EXPECT_EQ(soe.eps, 1e-9);

  ConvergenceConfig conv;
  apply_config(json::parse(R"({"H": 0.7, "k": [0.25, 0.125], "scheme": "both", "n_paths": 10})"), conv);
  EXPECT_EQ(conv.hursts, std::vector<double>{0.7});
  EXPECT_EQ(conv.steps, (std::vector<double>{0.25, 0.125}));
  EXPECT_EQ(conv.scheme, SchemeSelection::both);
  EXPECT_EQ(conv.paths, 10u);

  ErgodicityConfig erg;
  apply_config(json::parse(R"({"problem": {"force": "double_well_2d"}, "x0": [0, 0.2], "bins": [12, 12],
                               "box": {"lo": [-3, -3], "hi": [3, 3]}})"),
               erg);
  EXPECT_EQ(erg.force, "double_well_2d");
  EXPECT_EQ(erg.bins, (std::vector<std::size_t>{12, 12}));
  EXPECT_EQ(erg.box_hi, (std::vector<double>{3.0, 3.0}));
  EXPECT_NO_THROW(erg.validate());

  SolveRunConfig solve;
  apply_config(json::parse(R"({"problem": "zero", "x0": 2, "noise": "none", "alpha_override": 0.3})"), solve);
  EXPECT_EQ(solve.force, "zero");
  EXPECT_EQ(solve.x0, std::vector<double>{2.0});
  EXPECT_FALSE(solve.physical_noise);
  EXPECT_NO_THROW(solve.validate());
  EXPECT_EQ(solve.problem().alpha, 0.3);
}

TEST(ApplyConfig, RejectsUnknownKeysAndBadValues) {
  SoeRunConfig soe;
  FbmRunConfig fbm;
  SolveRunConfig solve;
  ErgodicityConfig erg;
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"alpha": 0.5, "beta": 1})"), soe); }), "beta");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"alpha": "x"})"), soe); }), "alpha");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"N": -4})"), fbm); }), "N");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"N": 2.5})"), fbm); }), "N");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"scheme": "implicit"})"), solve); }), "scheme");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"noise": "white"})"), solve); }), "noise");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"problem": {"force": "morse"}})"), solve); }), "problem");
  EXPECT_EQ(field_of([&] { apply_config(json::parse(R"({"box": {"lo": [0], "mid": 1}})"), erg); }), "box.mid");
  EXPECT_EQ(field_of([&] { apply_config(json::parse("[1, 2]"), soe); }), "(root)");
}

TEST(Validate, RunConfigs) {
  SoeRunConfig soe;
  soe.delta = 2.0;
  EXPECT_EQ(field_of([&] { soe.validate(); }), "delta");
  SolveRunConfig solve;
  solve.alpha_override = 0.3;
  EXPECT_EQ(field_of([&] { solve.validate(); }), "alpha_override");
  solve = SolveRunConfig{};
  solve.hurst = 0.5;
  solve.scheme = Scheme::fast;
  EXPECT_EQ(field_of([&] { solve.validate(); }), "scheme");
  solve = SolveRunConfig{};
  solve.horizon = 0.3;
  EXPECT_EQ(field_of([&] { solve.validate(); }), "T");
  solve = SolveRunConfig{};
  solve.x0 = {1.0, 2.0};
  EXPECT_EQ(field_of([&] { solve.validate(); }), "x0");
  FbmRunConfig fbm;
  fbm.hurst = 1.0;
  EXPECT_EQ(field_of([&] { fbm.validate(); }), "H");
}

TEST(ConfigJson, RoundTrips) {
  SolveRunConfig solve;
  solve.force = "constant";
  solve.force_params = {0.5, 1.0};
  solve.x0 = {0.0, 1.0};
  solve.scheme = Scheme::fast;
  SolveRunConfig back;
  apply_config(to_json(solve), back);
  EXPECT_EQ(to_json(back), to_json(solve));

  ErgodicityConfig erg;
  erg.snapshots = {0.0, 1.0};
  ErgodicityConfig erg_back;
  apply_config(to_json(erg), erg_back);
  EXPECT_EQ(to_json(erg_back), to_json(erg));

  ConvergenceConfig conv;
  conv.scheme = SchemeSelection::fast;
  ConvergenceConfig conv_back;
  apply_config(to_json(conv), conv_back);
  EXPECT_EQ(to_json(conv_back), to_json(conv));

  FbmRunConfig fbm;
  fbm.seed = 0xffffffffffffffffULL;
  FbmRunConfig fbm_back;
  apply_config(json::parse(to_json(fbm).dump()), fbm_back);
  EXPECT_EQ(fbm_back.seed, fbm.seed);
}

TEST(LoadConfigFile, SyntaxErrorsCarryLineAndColumn) {
  const auto path = scratch("bad.json");
  {
    std::ofstream out(path);
    out << "{\n  \"alpha\": 0.5,\n  \"eps\": ,\n}\n";
  }
  const std::string field = field_of([&] { load_config_file(path, "soe"); });
  EXPECT_EQ(field, path.string() + ":3:10");
  EXPECT_EQ(field_of([&] { load_config_file(scratch("missing.json"), "soe"); }), "--config");
}

TEST(LoadConfigFile, AcceptsManifests) {
  const auto path = scratch("manifest.json");
  write_json(path, make_manifest("soe", 1, {{"alpha", 0.6}}, {"kernel.json"}));
  const json cfg = load_config_file(path, "soe");
  EXPECT_EQ(cfg["alpha"], 0.6);
  EXPECT_EQ(field_of([&] { load_config_file(path, "fbm"); }), "subcommand");
  const json m = json::parse(read_file(path));
  EXPECT_EQ(m["tool"], "fgle");
  EXPECT_EQ(m["version"], tool_version());
  EXPECT_EQ(m["outputs"], json::array({"kernel.json"}));
}

TEST(Io, NumbersUseSeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324}) EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
}

TEST(Io, CsvLayouts) {
  EXPECT_EQ(fbm_csv({{0.0, 0.5}}, 0.25), "path,index,t,value\n0,0,0,0\n0,1,0.25,0.5\n");
  Trajectory t{0.5, 1, 2, Scheme::direct, {1.0, 2.0, 3.0, 4.0}};
  EXPECT_EQ(trajectories_csv({t}), "path,index,t,x_0,x_1\n0,0,0,1,2\n0,1,0.5,3,4\n");
  const std::vector<double> states{1.0, 2.0, 3.0, 4.0}, times{0.0, 1.0};
  EXPECT_EQ(snapshots_csv(states, 2, times, 1), "path_id,t,x\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n");
}

TEST(Io, WriteTextCreatesDirectories) {
  const auto path = scratch("nested/deeper/out.txt");
  write_text(path, "abc");
  EXPECT_EQ(read_file(path), "abc");
  write_json(path, json{{"a", 1}});
  EXPECT_EQ(read_file(path), "{\n  \"a\": 1\n}\n");
}

TEST(SchemeNames, Parse) {
  EXPECT_EQ(parse_scheme("fast", "scheme"), Scheme::fast);
  EXPECT_THROW(parse_scheme("both", "scheme"), ConfigError);
  EXPECT_EQ(parse_scheme_selection("both", "scheme"), SchemeSelection::both);
}

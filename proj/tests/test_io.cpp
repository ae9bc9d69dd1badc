#include "esrlab/cli.hpp"
#include "esrlab/config.hpp"
#include "esrlab/error.hpp"
#include "esrlab/io.hpp"
#include "esrlab/synthetic.hpp"

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace esrlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("esrlab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& contents) const {
    io::write_file_atomic(path / name, contents);
    return path / name;
  }
};

double rel(double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); }

std::string without_timestamp(const std::string& manifest) {
  std::istringstream in(manifest);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("timestamp = ", 0) != 0) out += line + "\n";
  return out;
}

int run_cli(const std::string& command, const fs::path& config, const fs::path& out, std::string* err_text = nullptr,
            std::optional<std::uint64_t> seed = std::nullopt) {
  std::ostringstream log, err;
  const int code = cli::run({command, config, seed, out}, log, err);
  if (err_text) *err_text = err.str();
  return code;
}

const char* crossing_generator = R"([run]
seed = 3

[generate]
kind = crossing
output = crossing.csv
b_min_tesla = 0.4999316
b_max_tesla = 0.5000684
field_points = 20
b0_tesla = 0.5
slope_ghz_per_tesla = 27.9924898
f_wgm_ghz = 14
g_cs_khz = 239.2
q_spin = 15600
q_wgm = 4.4e6
noise_ghz = 1e-6
q_relative_noise = 0.01
)";

}  // namespace

TEST_CASE("interaction points round trip exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-3, 40.0);
  std::vector<InteractionPoint> pts;
  for (int k = 0; k < 50; ++k) {
    InteractionPoint p;
    p.field_tesla = u(rng) / 40.0;
    p.frequency_ghz = u(rng);
    p.sigma_f_ghz = u(rng) * 1e-3;
    p.snr_class = static_cast<SnrClass>(k % 3);
    pts.push_back(p);
  }
  std::stringstream ss;
  io::write_interaction_points(ss, pts);
  const auto back = io::read_interaction_points(ss);
  REQUIRE(back.value.size() == pts.size());
  CHECK(back.warnings.empty());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    CHECK(rel(back.value[k].field_tesla, pts[k].field_tesla) <= 1e-12);
    CHECK(rel(back.value[k].frequency_ghz, pts[k].frequency_ghz) <= 1e-12);
    CHECK(rel(back.value[k].sigma_f_ghz, pts[k].sigma_f_ghz) <= 1e-12);
    CHECK(back.value[k].snr_class == pts[k].snr_class);
  }
}

TEST_CASE("crossing data and traces round trip exactly") {
  const auto model = TwoModeModel::crossing(0.5, 1.7588e11, 8.796e10, 1.7e-5);
  CrossingNoise noise;
  noise.with_q = true;
  noise.noise_ghz = 1e-6;
  auto data = crossing_points([&] {
    auto m = model;
    m.q1 = 1.56e4;
    m.q2 = 4.4e6;
    return m;
  }(), {0.49999, 0.5, 0.50001}, noise);
  data.points[1].q.reset();
  std::stringstream ss;
  io::write_crossing_data(ss, data);
  const auto back = io::read_crossing_data(ss);
  REQUIRE(back.value.points.size() == data.points.size());
  for (std::size_t k = 0; k < data.points.size(); ++k) {
    const auto &a = back.value.points[k], &b = data.points[k];
    CHECK(rel(a.field_tesla, b.field_tesla) <= 1e-12);
    CHECK(rel(a.frequency_ghz, b.frequency_ghz) <= 1e-12);
    CHECK(a.branch == b.branch);
    REQUIRE(a.q.has_value() == b.q.has_value());
    if (a.q) CHECK(rel(*a.q, *b.q) <= 1e-12);
  }

  const auto trace = lorentzian_trace(14.0, 4.4e6, 1.0, 0.01, 41, 8.0, 0.001, 2);
  std::stringstream ts;
  io::write_trace(ts, trace);
  const auto tb = io::read_trace(ts);
  REQUIRE(tb.value.size() == trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    CHECK(rel(tb.value[k].frequency_ghz, trace[k].frequency_ghz) <= 1e-12);
    CHECK(rel(tb.value[k].magnitude, trace[k].magnitude) <= 1e-12);
  }
}

TEST_CASE("loading a small points file") {
  TempDir dir;
  const std::string text = "B_tesla,f_GHz,snr_class\n0.5,14.0,high_broad\n0.6,15.5,low_narrow\n\n0.7,16.0,high_narrow\n";
  const auto path = dir.write("pts.csv", text);
  const auto loaded = io::load_interaction_points(path);
  CHECK(loaded.value.size() == 3u);
  CHECK(loaded.provenance.rows == 3u);
  CHECK(loaded.provenance.source == path.string());
  CHECK(loaded.provenance.checksum == io::fnv1a64(text));
  CHECK(loaded.value[1].snr_class == SnrClass::low_narrow);
  CHECK(loaded.value[0].sigma_f_ghz == default_sigma_f_ghz);
}

TEST_CASE("row errors name the line and column") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      io::read_interaction_points(in, "pts.csv");
    } catch (const DataError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("B_tesla,f_GHz,snr_class\n0.5,14,high_broad\n0.6,15,medium\n", "pts.csv:3:3:"));
  CHECK(fails_with("B_tesla,f_GHz,snr_class\n0.5,14,high_broad\n0.6,15,medium\n", "medium"));
  CHECK(fails_with("B_tesla,f_GHz,snr_class\n0.5,abc,high_broad\n", "pts.csv:2:2:"));
  CHECK(fails_with("B_tesla,f_GHz,snr_class\n0.5,14\n", "pts.csv:2:"));
  CHECK(fails_with("B_tesla,f_GHz,snr_class\n0.5,nan,high_broad\n", "not finite"));
  CHECK(fails_with("0.5,14,high_broad\n", "expected header column 'B_tesla'"));
  CHECK(fails_with("", "missing header"));
  CHECK(fails_with("B_tesla,f_GHz,snr_class,extra\n", "unexpected header column 'extra'"));

  std::istringstream bad_branch("B_tesla,f_GHz,branch,Q\n0.5,14,sideways,\n");
  CHECK_THROWS_AS(io::read_crossing_data(bad_branch), DataError);
}

TEST_CASE("header-only file gives an empty list and a warning") {
  std::istringstream in("B_tesla,f_GHz,snr_class\n");
  const auto loaded = io::read_interaction_points(in, "empty.csv");
  CHECK(loaded.value.empty());
  REQUIRE(loaded.warnings.size() == 1u);
  CHECK(loaded.warnings[0].find("header only") != std::string::npos);
}

TEST_CASE("atomic write leaves no temporary behind") {
  TempDir dir;
  const auto p = dir.write("a.txt", "one");
  io::write_file_atomic(p, "two");
  CHECK(io::read_file(p) == "two");
  CHECK_FALSE(fs::exists(dir.path / "a.txt.tmp"));
  CHECK_THROWS_AS(io::read_file(dir.path / "missing.txt"), DataError);
}

TEST_CASE("config parsing") {
  const auto cfg = RunConfig::parse("# comment\n[system]\ns = 3/2\ng = 2.09  # inline\nlabel = V2+\n\n[fit]\nfree = g, d_ghz\n",
                                    "t.cfg");
  CHECK(cfg.get_half_integer("system", "s").twice() == 3);
  CHECK(cfg.get_double("system", "g") == 2.09);
  CHECK(cfg.get_string("system", "label") == "V2+");
  CHECK(cfg.get_list("fit", "free") == std::vector<std::string>{"g", "d_ghz"});
  CHECK(cfg.get_double("fit", "missing_tesla", 1.5) == 1.5);
  CHECK_NOTHROW(cfg.reject_unread());
  CHECK(cfg.echo() == "[system]\ns = 3/2\ng = 2.09\nlabel = V2+\n[fit]\nfree = g, d_ghz\n");
}

TEST_CASE("config errors") {
  auto message = [](const std::string& text) -> std::string {
    try {
      const auto cfg = RunConfig::parse(text, "t.cfg");
      cfg.get_double("a", "x_ghz", 0.0);
      cfg.reject_unread();
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("[a]\nx_ghz = 1\ny = 2\n").find("t.cfg:3: unknown key 'y'") != std::string::npos);
  CHECK(message("[a]\nx_ghz = 1\n[b]\n").find("unknown section [b]") != std::string::npos);
  CHECK(message("x_ghz = 1\n").find("outside") != std::string::npos);
  CHECK(message("[a]\nx_ghz = 1\nx_ghz = 2\n").find("duplicate key") != std::string::npos);
  CHECK(message("[a]\nx_ghz = fast\n").find("not a number") != std::string::npos);
  CHECK(message("[a]\n[a]\n").find("duplicate section") != std::string::npos);
  CHECK(message("[a\n").find("unterminated") != std::string::npos);
  CHECK(message("[a]\nnot a pair\n").find("expected 'key = value'") != std::string::npos);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/esrlab.cfg"), ConfigError);
}

TEST_CASE("cli: unknown subcommand prints usage and fails") {
  std::string err;
  TempDir dir;
  CHECK(run_cli("transmogrify", dir.path / "none.cfg", dir.path, &err) != 0);
  CHECK(err.find("usage: esrlab") != std::string::npos);
  CHECK(err.find("\"error\":\"config\"") != std::string::npos);
}

TEST_CASE("cli: exit codes for config, data and fit failures") {
  TempDir dir;
  std::string err;
  const auto bad_key = dir.write("bad.cfg", "[data]\ncrossing = c.csv\nbogus = 1\n");
  dir.write("c.csv", "B_tesla,f_GHz,branch\n");
  CHECK(run_cli("fit-crossing", bad_key, dir.path / "o1", &err) == 2);
  CHECK(err.find("unknown key 'bogus'") != std::string::npos);

  CHECK(run_cli("fit-crossing", dir.path / "missing.cfg", dir.path / "o0", &err) == 2);

  const auto no_data = dir.write("nodata.cfg", "[data]\ncrossing = absent.csv\n");
  CHECK(run_cli("fit-crossing", no_data, dir.path / "o2", &err) == 3);
  CHECK(err.find("\"exit_code\":3") != std::string::npos);

  std::string flat = "B_tesla,f_GHz,branch\n";
  for (const char* b : {"0.4", "0.45", "0.5", "0.55", "0.6"})
    flat += std::string(b) + ",13.9,lower\n" + b + ",14.1,upper\n";
  dir.write("flat.csv", flat);
  const auto flat_cfg = dir.write("flat.cfg", "[data]\ncrossing = flat.csv\n");
  CHECK(run_cli("fit-crossing", flat_cfg, dir.path / "o3", &err) == 4);
  CHECK(err.find("\"error\":\"fit\"") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "o3" / "manifest.txt"));
}

TEST_CASE("cli: generate then fit is byte-identical across runs") {
  TempDir dir;
  const auto gen = dir.write("gen.cfg", crossing_generator);
  REQUIRE(run_cli("generate", gen, dir.path / "g1") == 0);
  REQUIRE(run_cli("generate", gen, dir.path / "g2") == 0);
  const auto first = io::read_file(dir.path / "g1" / "crossing.csv");
  CHECK(first == io::read_file(dir.path / "g2" / "crossing.csv"));
  CHECK(without_timestamp(io::read_file(dir.path / "g1" / "manifest.txt")) ==
        without_timestamp(io::read_file(dir.path / "g2" / "manifest.txt")));

  REQUIRE(run_cli("generate", gen, dir.path / "g3", nullptr, 99) == 0);
  CHECK(first != io::read_file(dir.path / "g3" / "crossing.csv"));
  CHECK(io::read_file(dir.path / "g3" / "manifest.txt").find("seed = 99") != std::string::npos);

  const auto fit = dir.write("g1/fit.cfg", "[data]\ncrossing = crossing.csv\n");
  REQUIRE(run_cli("fit-crossing", fit, dir.path / "f1") == 0);
  REQUIRE(run_cli("fit-crossing", fit, dir.path / "f2") == 0);
  const auto report = io::read_file(dir.path / "f1" / "crossing_report.txt");
  CHECK(report == io::read_file(dir.path / "f2" / "crossing_report.txt"));
  const auto at = report.find("\ng_cs_khz = ");
  REQUIRE(at != std::string::npos);
  CHECK(std::abs(std::stod(report.substr(at + 12)) - 239.2) <= 4.0);

  const auto manifest = io::read_file(dir.path / "f1" / "manifest.txt");
  CHECK(manifest.find("input.crossing = ") != std::string::npos);
  CHECK(manifest.find("output = crossing_report.txt fnv1a64=" + io::hex64(io::fnv1a64(report))) != std::string::npos);
  CHECK(manifest.find("[config]\n[data]\ncrossing = crossing.csv\n") != std::string::npos);
}

TEST_CASE("cli: resonances for the free electron") {
  TempDir dir;
  const auto cfg = dir.write("r.cfg",
                             "[system]\ns = 1/2\ni = 0\ng = 2.0\n\n[search]\nfrequency_ghz = 13.9962449\n"
                             "b_min_tesla = 0\nb_max_tesla = 1\nscan_points = 101\n");
  REQUIRE(run_cli("resonances", cfg, dir.path / "out") == 0);
  std::istringstream in(io::read_file(dir.path / "out" / "resonances.csv"));
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "B_tesla,m,n,f_residual_GHz");
  CHECK(std::abs(std::stod(row.substr(0, row.find(','))) - 0.5) <= 1e-6);
  CHECK_FALSE(static_cast<bool>(std::getline(in, extra) && !extra.empty()));
}

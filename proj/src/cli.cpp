#include "esrlab/cli.hpp"

#include "esrlab/config.hpp"
#include "esrlab/constants.hpp"
#include "esrlab/error.hpp"
#include "esrlab/fitting.hpp"
#include "esrlab/hybridization.hpp"
#include "esrlab/io.hpp"
#include "esrlab/spectra.hpp"
#include "esrlab/synthetic.hpp"
#include "esrlab/text_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <ostream>
#include <sstream>

namespace esrlab::cli {

namespace fs = std::filesystem;
using text::format_double;

namespace {

struct Artifact {
  std::string name;
  std::string contents;
};

struct Context {
  const RunConfig& cfg;
  std::uint64_t seed;
  std::ostream& log;
  std::ostream& err;
  std::vector<std::string> inputs;
  std::vector<Artifact> outputs;

  template <typename T>
  const T& take(const io::Loaded<T>& loaded, const std::string& role) {
    for (const auto& w : loaded.warnings) err << nlohmann::json{{"warning", w}}.dump() << '\n';
    inputs.push_back(role + " = " + loaded.provenance.source + " rows=" + std::to_string(loaded.provenance.rows) +
                     " fnv1a64=" + io::hex64(loaded.provenance.checksum));
    return loaded.value;
  }
};

class Report {
 public:
  void add(const std::string& key, const std::string& value) { out_ << key << " = " << value << '\n'; }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, long long value) { add(key, std::to_string(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add_sigma(const std::string& key, const std::optional<double>& sigma) {
    add(key, sigma ? format_double(*sigma) : std::string("not estimable"));
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string half_text(int twice) {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

SpinSystem read_system(const RunConfig& cfg) {
  SpinSystem sys;
  sys.label = cfg.get_string("system", "label", "");
  sys.s = cfg.get_half_integer("system", "s");
  if (cfg.has("system", "i")) sys.i = cfg.get_half_integer("system", "i");
  sys.g = cfg.get_double("system", "g", 2.0);
  sys.d_ghz = cfg.get_double("system", "d_ghz", 0.0);
  sys.e_ghz = cfg.get_double("system", "e_ghz", 0.0);
  sys.a_ghz = cfg.get_double("system", "a_ghz", 0.0);
  try {
    sys.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": [system]: " + e.what());
  }
  return sys;
}

void report_system(Report& r, const SpinSystem& sys) {
  r.add("label", sys.label);
  r.add("s", sys.s.to_string());
  r.add("i", sys.i.to_string());
}

std::string bound_key(SpinParameter p, const char* which) {
  switch (p) {
    case SpinParameter::g: return std::string("g_") + which;
    case SpinParameter::d: return std::string("d_") + which + "_ghz";
    case SpinParameter::e: return std::string("e_") + which + "_ghz";
    case SpinParameter::a: return std::string("a_") + which + "_ghz";
  }
  return {};
}

struct SpinFitSetup {
  SpinFitProblem problem;
  MultiStartOptions options;
};

SpinFitSetup read_spin_fit(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  SpinFitSetup s;
  s.problem.base = read_system(cfg);
  s.problem.points = ctx.take(io::load_interaction_points(cfg.resolve_path("data", "points")), "points");
  for (const auto& name : cfg.get_list("fit", "free")) {
    const auto p = parse_spin_parameter(name);
    if (!p) throw ConfigError(cfg.source() + ": [fit] free: unknown parameter '" + name + "'");
    FreeParameter fp = default_bounds(*p);
    fp.lower = cfg.get_double("fit", bound_key(*p, "min"), fp.lower);
    fp.upper = cfg.get_double("fit", bound_key(*p, "max"), fp.upper);
    s.problem.free.push_back(fp);
  }
  const std::string lines = cfg.get_string("fit", "lines", "allowed");
  if (lines == "allowed") s.problem.lines = LineSelection::allowed;
  else if (lines == "principal") s.problem.lines = LineSelection::principal;
  else throw ConfigError(cfg.source() + ": [fit] lines must be 'allowed' or 'principal'");
  s.options.starts = static_cast<int>(cfg.get_int("fit", "starts", s.options.starts));
  s.options.annealing.initial_tau_ghz = cfg.get_double("fit", "initial_tau_ghz", s.options.annealing.initial_tau_ghz);
  s.options.annealing.final_tau_ghz = cfg.get_double("fit", "final_tau_ghz", s.options.annealing.final_tau_ghz);
  s.options.seed = ctx.seed;
  if (s.options.starts < 1) throw ConfigError(cfg.source() + ": [fit] starts must be >= 1");
  try {
    s.problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  if (s.problem.points.empty()) throw DataError("no interaction points to fit");
  return s;
}

void report_spin_fit(Report& r, const SpinFitProblem& problem, const SpinFitResult& fit) {
  report_system(r, problem.base);
  r.add("points", problem.points.size());
  r.add("lines", std::string(problem.lines == LineSelection::principal ? "principal" : "allowed"));
  r.add("objective", fit.objective);
  r.add("best_start", fit.best_start);
  for (std::size_t k = 0; k < fit.free_parameters.size(); ++k) {
    const std::string name = to_string(fit.free_parameters[k]);
    r.add("fit." + name, get(fit.best, fit.free_parameters[k]));
    r.add_sigma("fit." + name + ".sigma_1", fit.uncertainties[k]);
  }
  for (SpinParameter p : {SpinParameter::g, SpinParameter::d, SpinParameter::e, SpinParameter::a}) {
    if (std::find(fit.free_parameters.begin(), fit.free_parameters.end(), p) == fit.free_parameters.end())
      r.add("fixed." + to_string(p), get(fit.best, p));
  }
  r.add("sign_note", std::string("D and E are fitted as magnitudes; line positions do not fix their signs"));
  for (std::size_t k = 0; k < fit.per_point_residuals.size(); ++k)
    r.add("residual_ghz." + std::to_string(k), fit.per_point_residuals[k]);
}

void cmd_simulate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SpinSystem sys = read_system(cfg);
  const double b0 = cfg.get_double("sweep", "b_min_tesla");
  const double b1 = cfg.get_double("sweep", "b_max_tesla");
  const auto n = cfg.get_int("sweep", "points");
  Populations pops = Populations::uniform();
  if (const auto t = cfg.find_double("sweep", "temperature_kelvin")) {
    if (!(*t > 0.0)) throw ConfigError(cfg.source() + ": [sweep] temperature_kelvin must be > 0");
    pops = Populations::at_temperature(*t);
  }
  cfg.reject_unread();
  if (n < 2 || !(b1 > b0)) throw ConfigError(cfg.source() + ": [sweep] needs points >= 2 and b_max_tesla > b_min_tesla");

  const SpectrumSweep sw = sweep(sys, linear_grid(b0, b1, static_cast<int>(n)), pops);
  std::ostringstream spectrum;
  write_spectrum(spectrum, sw);
  ctx.outputs.push_back({"spectrum.csv", spectrum.str()});

  const auto lines = principal_lines(sys, b1);
  std::ostringstream pl;
  pl << "m,n,f_GHz,intensity,ms_lower,ms_upper,mi\n";
  for (const auto& l : lines)
    pl << l.transition.lower << ',' << l.transition.upper << ',' << format_double(l.transition.frequency_ghz) << ','
       << format_double(l.transition.intensity) << ',' << half_text(l.twice_ms_lower) << ','
       << half_text(l.twice_ms_lower + 2) << ',' << half_text(l.twice_mi) << '\n';
  ctx.outputs.push_back({"principal_lines.csv", pl.str()});

  std::size_t allowed_high = 0;
  for (const auto& c : sw.curves) allowed_high += c.allowed.back() ? 1 : 0;
  Report r;
  report_system(r, sys);
  r.add("dimension", sys.dimension());
  r.add("grid_points", sw.field_grid.size());
  r.add("curves", sw.curves.size());
  r.add("high_field_tesla", b1);
  r.add("allowed_curves_at_high_field", allowed_high);
  r.add("principal_lines_at_high_field", lines.size());
  const auto groups = group_by_electron_transition(lines);
  r.add("principal_groups", groups.size());
  for (const auto& [twice_ms, members] : groups)
    r.add("group.ms_" + half_text(twice_ms) + "_to_" + half_text(twice_ms + 2), members.size());
  ctx.outputs.push_back({"summary.txt", r.str()});
  ctx.log << "simulate: " << sw.curves.size() << " curves, " << lines.size() << " principal lines in "
          << groups.size() << " groups at " << format_double(b1) << " T\n";
}

void cmd_resonances(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SpinSystem sys = read_system(cfg);
  const double f = cfg.get_double("search", "frequency_ghz");
  const double b0 = cfg.get_double("search", "b_min_tesla");
  const double b1 = cfg.get_double("search", "b_max_tesla");
  const auto n = cfg.get_int("search", "scan_points", 2001);
  ResonanceOptions opts;
  opts.include_forbidden = cfg.get_bool("search", "include_forbidden", false);
  cfg.reject_unread();
  if (n < 2 || !(b1 > b0)) throw ConfigError(cfg.source() + ": [search] needs scan_points >= 2 and b_max_tesla > b_min_tesla");

  const auto hits = resonance_fields(sys, f, b0, b1, static_cast<int>(n), opts);
  std::ostringstream out;
  io::write_resonances(out, hits);
  ctx.outputs.push_back({"resonances.csv", out.str()});
  ctx.log << "resonances: " << hits.size() << " fields match " << format_double(f) << " GHz\n";
}

void cmd_fit_spin(Context& ctx) {
  SpinFitSetup s = read_spin_fit(ctx);
  ctx.cfg.reject_unread();
  const SpinFitResult fit = fit_spin_parameters(s.problem, s.options);
  Report r;
  report_spin_fit(r, s.problem, fit);
  ctx.outputs.push_back({"fit_report.txt", r.str()});
  ctx.log << "fit-spin: objective " << format_double(fit.objective) << " from " << s.options.starts << " starts\n";
}

void cmd_bound_d(Context& ctx) {
  SpinFitSetup s = read_spin_fit(ctx);
  DBoundOptions opts;
  opts.threshold_factor = ctx.cfg.get_double("bound", "threshold_factor", opts.threshold_factor);
  opts.scan_points = static_cast<int>(ctx.cfg.get_int("bound", "scan_points", opts.scan_points));
  ctx.cfg.reject_unread();
  const auto d_free = std::find_if(s.problem.free.begin(), s.problem.free.end(),
                                   [](const FreeParameter& fp) { return fp.parameter == SpinParameter::d; });
  if (d_free == s.problem.free.end()) throw ConfigError(ctx.cfg.source() + ": [fit] free must include d_ghz for bound-d");
  const SpinFitResult fit = fit_spin_parameters(s.problem, s.options);
  DBoundResult bound;
  try {
    bound = d_upper_bound_scan(s.problem, fit, opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ctx.cfg.source() + ": " + e.what());
  }
  Report r;
  report_spin_fit(r, s.problem, fit);
  r.add("threshold_factor", opts.threshold_factor);
  r.add("minimum_objective", bound.minimum_objective);
  r.add("d_upper_bound_ghz", bound.bounded ? format_double(bound.bound_ghz) : std::string("unbounded within box"));
  r.add("d_box_upper_ghz", d_free->upper);
  ctx.outputs.push_back({"bound_report.txt", r.str()});
  std::ostringstream scan;
  scan << "d_GHz,objective\n";
  for (std::size_t k = 0; k < bound.scan_d.size(); ++k)
    scan << format_double(bound.scan_d[k]) << ',' << format_double(bound.scan_objective[k]) << '\n';
  ctx.outputs.push_back({"bound_scan.csv", scan.str()});
  ctx.log << "bound-d: " << (bound.bounded ? "D < " + format_double(bound.bound_ghz) + " GHz" : "unbounded within box")
          << '\n';
}

void report_crossing(Report& r, const CrossingFit& fit) {
  const double to_ghz = 1.0 / (constants::two_pi * 1e9);
  r.add("b0_tesla", fit.model.b0);
  r.add_sigma("b0_tesla.sigma_1", fit.sigmas[0]);
  r.add("slope_ghz_per_tesla", fit.model.slope * to_ghz);
  r.add_sigma("slope_ghz_per_tesla.sigma_1",
              fit.sigmas[1] ? std::optional<double>(*fit.sigmas[1] * to_ghz) : std::nullopt);
  r.add("f_wgm_ghz", fit.model.omega2 * to_ghz);
  r.add_sigma("f_wgm_ghz.sigma_1", fit.sigmas[2] ? std::optional<double>(*fit.sigmas[2] * to_ghz) : std::nullopt);
  r.add("delta12", fit.model.delta12);
  r.add_sigma("delta12.sigma_1", fit.sigmas[3]);
  r.add("g_cs_khz", fit.g_cs_hz * 1e-3);
  r.add_sigma("g_cs_khz.sigma_1", fit.g_cs_sigma_hz ? std::optional<double>(*fit.g_cs_sigma_hz * 1e-3) : std::nullopt);
  r.add("rms_residual_ghz", fit.rms_ghz);
}

CrossingFitOptions read_crossing_options(Context& ctx) {
  CrossingFitOptions o;
  o.restarts = static_cast<int>(ctx.cfg.get_int("fit", "restarts", o.restarts));
  o.fixed_slope_ghz_per_tesla = ctx.cfg.find_double("fit", "fixed_slope_ghz_per_tesla");
  o.seed = ctx.seed;
  if (o.restarts < 0) throw ConfigError(ctx.cfg.source() + ": [fit] restarts must be >= 0");
  return o;
}

void cmd_fit_crossing(Context& ctx) {
  const CrossingData data = ctx.take(io::load_crossing_data(ctx.cfg.resolve_path("data", "crossing")), "crossing");
  const CrossingFitOptions opts = read_crossing_options(ctx);
  ctx.cfg.reject_unread();
  const CrossingFit fit = fit_avoided_crossing(data, opts);
  Report r;
  r.add("points", data.points.size());
  report_crossing(r, fit);
  ctx.outputs.push_back({"crossing_report.txt", r.str()});
  ctx.log << "fit-crossing: g_CS = " << format_double(fit.g_cs_hz * 1e-3) << " kHz\n";
}

void cmd_fit_q(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const CrossingData data = ctx.take(io::load_crossing_data(cfg.resolve_path("data", "crossing")), "crossing");
  const bool given = cfg.has_section("model");
  TwoModeModel model;
  Report r;
  r.add("points", data.points.size());
  QProfileOptions qopts;
  qopts.seed = ctx.seed;
  qopts.restarts = static_cast<int>(cfg.get_int("fit", "restarts", qopts.restarts));
  if (given) {
    const double b0 = cfg.get_double("model", "b0_tesla");
    const double slope = cfg.get_double("model", "slope_ghz_per_tesla");
    const double f2 = cfg.get_double("model", "f_wgm_ghz");
    const double delta = cfg.get_double("model", "delta12");
    cfg.reject_unread();
    model = TwoModeModel::crossing(b0, constants::two_pi * 1e9 * slope, constants::two_pi * 1e9 * f2, delta);
    try {
      model.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(cfg.source() + ": [model] " + e.what());
    }
    r.add("crossing_model", std::string("config"));
  } else {
    CrossingFitOptions copts = read_crossing_options(ctx);
    cfg.reject_unread();
    const CrossingFit fit = fit_avoided_crossing(data, copts);
    model = fit.model;
    r.add("crossing_model", std::string("fitted"));
    report_crossing(r, fit);
  }
  const QProfileFit q = fit_q_profile(data, model, qopts);
  const double f2_ghz = model.omega2 / (constants::two_pi * 1e9);
  r.add("q_spin", q.q_spin);
  r.add_sigma("q_spin.sigma_1", q.q_spin_sigma);
  r.add("q_wgm", q.q_wgm);
  r.add_sigma("q_wgm.sigma_1", q.q_wgm_sigma);
  r.add("linewidth_spin_mhz", f2_ghz / q.q_spin * 1e3);
  r.add("linewidth_wgm_khz", f2_ghz / q.q_wgm * 1e6);
  double rr = 0.0;
  for (double v : q.relative_residuals) rr += v * v;
  r.add("rms_relative_residual", std::sqrt(rr / static_cast<double>(q.relative_residuals.size())));
  ctx.outputs.push_back({"q_report.txt", r.str()});
  ctx.log << "fit-q: Q_spin = " << format_double(q.q_spin) << ", Q_WGM = " << format_double(q.q_wgm) << '\n';
}

void cmd_lorentzian(Context& ctx) {
  const auto trace = ctx.take(io::load_trace(ctx.cfg.resolve_path("data", "trace")), "trace");
  ctx.cfg.reject_unread();
  const LorentzianFit fit = fit_lorentzian(trace);
  Report r;
  r.add("samples", trace.size());
  r.add("f0_ghz", fit.f0_ghz);
  r.add("q", fit.q);
  r.add("amplitude", fit.amplitude);
  r.add("baseline", fit.baseline);
  r.add("linewidth_khz", fit.f0_ghz / fit.q * 1e6);
  r.add("rms_residual", fit.rms);
  ctx.outputs.push_back({"lorentzian_report.txt", r.str()});
  ctx.log << "lorentzian: f0 = " << format_double(fit.f0_ghz) << " GHz, Q = " << format_double(fit.q) << '\n';
}

std::vector<double> read_fields(const RunConfig& cfg) {
  if (cfg.has("generate", "fields_tesla")) return cfg.get_double_list("generate", "fields_tesla");
  const double b0 = cfg.get_double("generate", "b_min_tesla");
  const double b1 = cfg.get_double("generate", "b_max_tesla");
  const auto n = cfg.get_int("generate", "field_points");
  if (n < 2 || !(b1 > b0)) throw ConfigError(cfg.source() + ": [generate] needs field_points >= 2 and b_max_tesla > b_min_tesla");
  return linear_grid(b0, b1, static_cast<int>(n));
}

void cmd_generate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string kind = cfg.get_string("generate", "kind");
  const std::string output = cfg.get_string("generate", "output");
  if (output.empty() || fs::path(output).has_parent_path())
    throw ConfigError(cfg.source() + ": [generate] output must be a bare file name");
  std::ostringstream out;
  if (kind == "interaction_points") {
    const SpinSystem sys = read_system(cfg);
    const auto fields = read_fields(cfg);
    PointNoise noise;
    noise.seed = ctx.seed;
    noise.noise_ghz = cfg.get_double("generate", "noise_ghz", 0.0);
    noise.sigma_f_ghz = cfg.get_double("generate", "sigma_f_ghz", default_sigma_f_ghz);
    const auto cls = parse_snr_class(cfg.get_string("generate", "snr_class", "high_narrow"));
    if (!cls) throw ConfigError(cfg.source() + ": [generate] unknown snr_class");
    noise.snr_class = *cls;
    const std::string lines = cfg.get_string("generate", "lines", "principal");
    std::vector<InteractionPoint> pts;
    if (lines == "principal") {
      cfg.reject_unread();
      pts = points_on_principal_lines(sys, fields, noise);
    } else if (lines == "curve") {
      const auto lo = cfg.get_int("generate", "curve_lower");
      const auto hi = cfg.get_int("generate", "curve_upper");
      cfg.reject_unread();
      try {
        pts = points_on_curve(sys, fields, static_cast<int>(lo), static_cast<int>(hi), noise);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.source() + ": [generate] " + e.what());
      }
    } else {
      throw ConfigError(cfg.source() + ": [generate] lines must be 'principal' or 'curve'");
    }
    io::write_interaction_points(out, pts);
  } else if (kind == "crossing") {
    const double b0 = cfg.get_double("generate", "b0_tesla");
    const double slope = cfg.get_double("generate", "slope_ghz_per_tesla");
    const double f2 = cfg.get_double("generate", "f_wgm_ghz");
    const double gcs = cfg.get_double("generate", "g_cs_khz");
    const auto q_spin = cfg.find_double("generate", "q_spin");
    const auto q_wgm = cfg.find_double("generate", "q_wgm");
    CrossingNoise noise;
    noise.seed = ctx.seed;
    noise.noise_ghz = cfg.get_double("generate", "noise_ghz", 0.0);
    noise.q_relative_noise = cfg.get_double("generate", "q_relative_noise", 0.0);
    noise.with_q = q_spin && q_wgm;
    const auto fields = read_fields(cfg);
    cfg.reject_unread();
    TwoModeModel model =
        TwoModeModel::crossing(b0, constants::two_pi * 1e9 * slope, constants::two_pi * 1e9 * f2, gcs * 1e-6 / f2);
    if (noise.with_q) {
      model.q1 = *q_spin;
      model.q2 = *q_wgm;
    }
    try {
      io::write_crossing_data(out, crossing_points(model, fields, noise));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(cfg.source() + ": [generate] " + e.what());
    }
  } else if (kind == "trace") {
    const double f0 = cfg.get_double("generate", "f0_ghz");
    const double q = cfg.get_double("generate", "q");
    const double amp = cfg.get_double("generate", "amplitude", 1.0);
    const double base = cfg.get_double("generate", "baseline", 0.0);
    const auto n = cfg.get_int("generate", "samples", 201);
    const double span = cfg.get_double("generate", "span_halfwidths", 10.0);
    const double noise = cfg.get_double("generate", "noise", 0.0);
    cfg.reject_unread();
    if (!(f0 > 0.0) || !(q > 0.0) || n < 2) throw ConfigError(cfg.source() + ": [generate] needs f0_ghz, q > 0 and samples >= 2");
    io::write_trace(out, lorentzian_trace(f0, q, amp, base, static_cast<int>(n), span, noise, ctx.seed));
  } else {
    throw ConfigError(cfg.source() + ": [generate] kind must be interaction_points, crossing or trace");
  }
  ctx.outputs.push_back({output, out.str()});
  ctx.log << "generate: wrote " << output << '\n';
}

using Handler = std::function<void(Context&)>;

const std::vector<std::pair<std::string, Handler>>& table() {
  static const std::vector<std::pair<std::string, Handler>> t = {
      {"simulate", cmd_simulate},         {"resonances", cmd_resonances}, {"fit-spin", cmd_fit_spin},
      {"bound-d", cmd_bound_d},           {"fit-crossing", cmd_fit_crossing}, {"fit-q", cmd_fit_q},
      {"lorentzian", cmd_lorentzian},     {"generate", cmd_generate},
  };
  return t;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest(const Request& req, const Context& ctx) {
  std::ostringstream m;
  m << "command = " << req.command << '\n';
  m << "version = " << ESRLAB_VERSION << '\n';
  m << "seed = " << ctx.seed << '\n';
  m << "config = " << req.config.string() << '\n';
  m << "timestamp = " << utc_timestamp() << '\n';
  for (const auto& in : ctx.inputs) m << "input." << in << '\n';
  for (const auto& out : ctx.outputs)
    m << "output = " << out.name << " fnv1a64=" << io::hex64(io::fnv1a64(out.contents)) << '\n';
  m << "[config]\n" << ctx.cfg.echo();
  return m.str();
}

int emit_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, h] : table()) n.push_back(name);
    return n;
  }();
  return names;
}

std::string usage() {
  std::string u = "usage: esrlab <subcommand> --config <path> [--seed N] [--out DIR]\nsubcommands:";
  for (const auto& c : commands()) u += " " + c;
  return u + "\n";
}

int run(const Request& request, std::ostream& log, std::ostream& err) {
  const auto it = std::find_if(table().begin(), table().end(), [&](const auto& e) { return e.first == request.command; });
  if (it == table().end()) {
    err << usage();
    return emit_error(err, "config", 2, "unknown subcommand '" + request.command + "'");
  }
  try {
    const RunConfig cfg = RunConfig::load(request.config);
    std::uint64_t seed = 1;
    if (cfg.has("run", "seed")) {
      const long long s = cfg.get_int("run", "seed");
      if (s < 0) throw ConfigError(cfg.source() + ": [run] seed must be >= 0");
      seed = static_cast<std::uint64_t>(s);
    }
    if (request.seed) seed = *request.seed;
    Context ctx{cfg, seed, log, err, {}, {}};
    it->second(ctx);

    std::error_code ec;
    fs::create_directories(request.out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + request.out_dir.string() + "'");
    for (const auto& a : ctx.outputs) io::write_file_atomic(request.out_dir / a.name, a.contents);
    io::write_file_atomic(request.out_dir / "manifest.txt", manifest(request, ctx));
    return 0;
  } catch (const Error& e) {
    const char* kind = e.kind() == ErrorKind::config ? "config" : e.kind() == ErrorKind::data ? "data" : "fit";
    return emit_error(err, kind, static_cast<int>(e.kind()), e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error(err, "config", 2, e.what());
  } catch (const std::exception& e) {
    return emit_error(err, "data", 3, e.what());
  }
}

}  // namespace esrlab::cli

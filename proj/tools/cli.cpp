#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "biphoton/channels.hpp"
#include "biphoton/detection.hpp"
#include "biphoton/ensembles.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/qpt.hpp"
#include "biphoton/serialize.hpp"
#include "svg.hpp"

#ifndef BIPHOTON_VERSION
#define BIPHOTON_VERSION "dev"
#endif

namespace biphoton::cli {

namespace fs = std::filesystem;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

void check_unit_interval(const std::vector<double>& xs, const char* name) {
  for (double x : xs) require(x >= 0.0 && x <= 1.0, std::string(name) + " values must lie in [0,1]");
}

void check_globals(const GlobalOptions& g) {
  require(g.shots >= 1, "--shots must be >= 1");
  require(g.threads >= 1, "--threads must be >= 1");
  require(g.format == "csv" || g.format == "csv+svg", "--format must be csv or csv+svg");
}

fs::path prepare_out_dir(const GlobalOptions& g) {
  const fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

std::string comment(const std::string& cmd, const GlobalOptions& g, const json& config) {
  return std::string("biphoton ") + BIPHOTON_VERSION + " cmd=" + cmd + " seed=" + std::to_string(g.seed) +
         " shots=" + std::to_string(g.shots) + " config=" + config.dump();
}

bool want_svg(const GlobalOptions& g) { return g.format == "csv+svg"; }

void save(CommandResult& r, const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  r.files.push_back(path.string());
}

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

}  // namespace

// --- purity-curve ------------------------------------------------------------------

CommandResult cmd_purity_curve(const GlobalOptions& g, const PurityOptions& o) {
  check_globals(g);
  check_unit_interval(o.x, "--x");
  require(o.gamma_max >= 0.0, "--gamma-max must be >= 0");
  require(o.gamma_steps >= 2, "--gamma-steps must be >= 2");
  require(o.epsilon >= 0.0 && o.epsilon <= 1.0, "--epsilon must lie in [0,1]");
  const fs::path dir = prepare_out_dir(g);
  const json config = {{"x", o.x}, {"gamma_max", o.gamma_max}, {"gamma_steps", o.gamma_steps}, {"epsilon", o.epsilon}};
  const auto gammas = linspace(0.0, o.gamma_max, o.gamma_steps);

  CommandResult r;
  CsvWriter csv({"x", "gamma", "purity"}, comment("purity-curve", g, config));
  std::vector<svg::Series> series;
  for (double x : o.x) {
    const auto p = purity_curve(x, gammas, ImpurityModel{o.epsilon});
    for (std::size_t i = 0; i < gammas.size(); ++i) csv.add_row({x, gammas[i], p[i]});
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[i - 1] + 1e-12) {
        r.ok = false;
        r.summary.push_back("purity increases with gamma for x=" + fmt(x) + " near gamma=" + fmt(gammas[i]));
      }
    series.push_back({"x=" + fmt(x, 4), gammas, p});
    r.summary.push_back("x=" + fmt(x) + ": purity(0)=" + fmt(p.front(), 10) + " purity(" + fmt(o.gamma_max) +
                        ")=" + fmt(p.back(), 10));
  }
  save(r, dir / "purity_curve.csv", csv.str());
  if (want_svg(g)) save(r, dir / "purity_curve.svg", svg::line_plot("Purity under SU(2) jitter", "gamma", "purity", series));
  return r;
}

// --- detect -----------------------------------------------------------------------------

CommandResult cmd_detect(const GlobalOptions& g, const DetectOptions& o) {
  check_globals(g);
  check_unit_interval(o.x, "--x");
  require(o.gamma_max > 0.0, "--gamma-max must be > 0");
  require(o.gamma_steps >= 3, "--gamma-steps must be >= 3");
  require(o.ratio_gamma >= 0.0, "--ratio-gamma must be >= 0");
  const fs::path dir = prepare_out_dir(g);
  const json config = {{"x", o.x}, {"gamma_max", o.gamma_max}, {"gamma_steps", o.gamma_steps},
                       {"ratio_gamma", o.ratio_gamma}, {"trials", g.shots}};
  const auto gammas = linspace(0.0, o.gamma_max, o.gamma_steps);
  const double trials = static_cast<double>(g.shots);

  CommandResult r;
  CsvWriter csv({"x", "gamma", "P_exact", "p_hat", "sensitivity_scaled", "ratio_to_noon"}, comment("detect", g, config));
  CsvWriter fit({"x", "A_fit", "B_fit", "C_fit", "A", "B", "C"}, comment("detect", g, config));
  std::vector<svg::Series> p_series, s_series;
  std::uint64_t row = 0;
  for (double x : o.x) {
    std::vector<double> p_hat, p_exact, sens;
    for (double gm : gammas) {
      const double p = nondetection_probability(x, gm);
      const auto outcome = simulate_detection(x, gm, g.shots, derive_seed(g.seed, row++));
      const double s = sensitivity(x, gm, 1.0);
      csv.add_row({x, gm, p, outcome.p_hat(), s, s / sensitivity(0.5, gm, 1.0)});
      if (gm == 0.0 && outcome.nondetections != outcome.trials) {
        r.ok = false;
        r.summary.push_back("detection reported at gamma=0 for x=" + fmt(x));
      }
      p_hat.push_back(outcome.p_hat());
      p_exact.push_back(p);
      sens.push_back(s);
    }
    const auto k = coefficients(x);
    const auto f = fit_detection_curve(gammas, p_hat);
    fit.add_row({x, f.A, f.B, f.C, k.A, k.B, k.C});
    p_series.push_back({"x=" + fmt(x, 4), gammas, p_exact});
    p_series.push_back({"x=" + fmt(x, 4) + " sim", gammas, p_hat});
    s_series.push_back({"x=" + fmt(x, 4), gammas, sens});
  }
  CsvWriter summary({"quantity", "value"}, comment("detect", g, config));
  const double ratio = sensitivity(0.0, o.ratio_gamma, trials) / sensitivity(0.5, o.ratio_gamma, trials);
  summary.add_row(std::vector<std::string>{"sensitivity_ratio_coherent_over_noon", format_number(ratio)});
  summary.add_row(std::vector<std::string>{"ratio_gamma", format_number(o.ratio_gamma)});
  r.summary.push_back("sensitivity ratio coherent/N00N at gamma=" + fmt(o.ratio_gamma) + ": " + fmt(ratio, 8));
  try {
    const double crossing = sensitivity_crossing(0.5, 0.0, 0.7, 1.3);
    summary.add_row(std::vector<std::string>{"crossing_gamma_x0.5_x0", format_number(crossing)});
    r.summary.push_back("sensitivity crossing (x=0.5 vs x=0): gamma=" + fmt(crossing, 8));
  } catch (const NotFoundError&) {
    summary.add_row(std::vector<std::string>{"crossing_gamma_x0.5_x0", "none"});
    r.summary.push_back("no sensitivity crossing in [0.7, 1.3]");
  }
  save(r, dir / "detect.csv", csv.str());
  save(r, dir / "detect_fit.csv", fit.str());
  save(r, dir / "detect_summary.csv", summary.str());
  if (want_svg(g)) {
    save(r, dir / "detect_probability.svg", svg::line_plot("Nondetection probability", "gamma", "P", p_series));
    save(r, dir / "detect_sensitivity.svg",
         svg::line_plot("Sensitivity", "gamma", "delta gamma * sqrt(N)", s_series));
  }
  return r;
}

// --- gram ---------------------------------------------------------------------------------

CommandResult cmd_gram(const GlobalOptions& g, const GramOptions& o) {
  check_globals(g);
  require(o.x_step > 0.0 && o.x_step <= 0.5, "--x-step must lie in (0, 0.5]");
  const fs::path dir = prepare_out_dir(g);
  const json config = {{"x_step", o.x_step}};
  std::vector<double> xs;
  const int n = static_cast<int>(std::floor(1.0 / o.x_step + 1e-9));
  for (int i = 0; i <= n; ++i) xs.push_back(std::min(1.0, i * o.x_step));
  if (xs.back() < 1.0) xs.push_back(1.0);
  // exact 2-design row alongside the regular grid
  xs.push_back(two_design_fiducial_x());
  std::sort(xs.begin(), xs.end());

  CommandResult r;
  const auto curve = det_curve(xs, g.threads);
  CsvWriter csv({"x", "det_norm", "min_eig", "rank", "is_2design"}, comment("gram", g, config));
  std::vector<double> dets, mins;
  double best_x = 0.0, best = -1.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto m = gram_continuous(xs[i]);
    const auto rep = uniformity_report(m);
    const bool design = is_2design(m).is_design;
    if (std::abs(rep.identity_component - 1.0 / 3.0) > 1e-10) r.ok = false;
    csv.add_row(std::vector<std::string>{format_number(xs[i]), format_number(curve[i].det_norm),
                                         format_number(curve[i].min_eig), std::to_string(rep.rank),
                                         design ? "true" : "false"});
    dets.push_back(curve[i].det_norm);
    mins.push_back(curve[i].min_eig);
    if (xs[i] <= 0.5 && curve[i].det_norm > best) {
      best = curve[i].det_norm;
      best_x = xs[i];
    }
  }
  r.summary.push_back("det argmax on grid over [0, 0.5]: x=" + fmt(best_x, 6));

  json cases = json::array();
  const std::pair<const char*, double> refs[] = {
      {"2-design fiducial", two_design_fiducial_x()}, {"N00N", 0.5}, {"spin-coherent", 0.0}};
  for (const auto& [name, x] : refs) {
    const auto m = gram_continuous(x);
    const auto ev = m.eigenvalues();
    const auto d2 = is_2design(m);
    std::string line = std::string(name) + " (x=" + fmt(x, 6) + "): spectrum {";
    for (int i = 8; i >= 0; --i) line += fmt(ev(i), 6) + (i ? ", " : "}");
    line += d2.is_design ? "  2-design: yes" : "  2-design: no";
    r.summary.push_back(line);
    json j = to_json(m);
    j["label"] = name;
    j["x"] = x;
    j["is_2design"] = d2.is_design;
    j["max_deviation_from_2design"] = d2.max_deviation;
    cases.push_back(j);
  }
  save(r, dir / "gram.csv", csv.str());
  save(r, dir / "gram_cases.json", cases.dump(2) + "\n");
  if (want_svg(g)) {
    save(r, dir / "gram_det.svg", svg::line_plot("Gram determinant (normalized)", "x", "det / max", {{"det_norm", xs, dets}}));
    save(r, dir / "gram_min_eig.svg", svg::line_plot("Gram minimum eigenvalue", "x", "min eig", {{"min_eig", xs, mins}}));
  }
  return r;
}

// --- qpt ---------------------------------------------------------------------------------

namespace {

CommandResult qpt_ingest(const GlobalOptions& g, const QptOptions& o) {
  const fs::path dir = prepare_out_dir(g);
  const ExperimentData data = experiment_data_from_json(json::parse(read_text_file(o.ingest)));
  const ProcessEstimate est = mle_qpt(data, data.probes.states);
  const CptpReport rep = is_cptp(est.choi, 1e-6);
  CommandResult r;
  r.ok = rep.ok();
  json out = {{"type", "process_estimate"},
              {"method", est.method},
              {"source", o.ingest},
              {"loglikelihood", est.loglikelihood},
              {"iterations", est.iterations},
              {"converged", est.converged},
              {"identifiability_deficit", est.identifiability_deficit},
              {"cptp", {{"cp", rep.cp}, {"tp", rep.tp}, {"min_choi_eig", rep.min_choi_eig}, {"tp_residual", rep.tp_residual}}},
              {"choi", to_json(est.choi)},
              {"superoperator", to_json(est.superoperator())}};
  save(r, dir / "qpt_estimate.json", out.dump(2) + "\n");
  r.summary.push_back("MLE: " + std::to_string(est.iterations) + " iterations" +
                      (est.converged ? "" : " (iteration cap reached)") + ", log-likelihood " +
                      fmt(est.loglikelihood, 12) + ", identifiability deficit " +
                      std::to_string(est.identifiability_deficit));
  return r;
}

}  // namespace

CommandResult cmd_qpt(const GlobalOptions& g, const QptOptions& o) {
  check_globals(g);
  if (!o.ingest.empty()) return qpt_ingest(g, o);
  ApiSweepConfig c;
  c.x_list = o.x.empty() ? default_api_x_grid() : o.x;
  check_unit_interval(c.x_list, "--x");
  c.gamma_list = o.gamma;
  for (double gm : c.gamma_list) require(gm >= 0.0, "--gamma values must be >= 0");
  require(o.seeds >= 1 && o.states >= 1 && o.probes >= 1, "--seeds, --states and --probes must be >= 1");
  c.shots = g.shots;
  c.n_states = o.states;
  c.n_seeds = o.seeds;
  c.n_probes = o.probes;
  c.master_seed = g.seed;
  c.threads = g.threads;
  c.scheme = parse_scheme(o.scheme);
  const fs::path dir = prepare_out_dir(g);
  const json config = {{"x", c.x_list}, {"gamma", c.gamma_list}, {"seeds", o.seeds}, {"states", o.states},
                       {"probes", o.probes}, {"scheme", o.scheme}, {"shots", g.shots}};

  const auto res = api_sweep(c);
  CommandResult r;
  CsvWriter csv({"x", "gamma", "api_mean", "api_se", "seeds"}, comment("qpt", g, config));
  for (const auto& s : res.summary) csv.add_row({s.x, s.gamma, s.api_mean, s.api_se, static_cast<double>(s.seeds)});
  CsvWriter runs({"x", "gamma", "seed", "api", "api_se", "mle_iterations", "probe_min_eig"}, comment("qpt", g, config));
  for (const auto& run : res.runs)
    runs.add_row({run.x, run.gamma, static_cast<double>(run.seed_index), run.api, run.api_se,
                  static_cast<double>(run.mle_iterations), run.min_eig});

  std::vector<svg::Series> series;
  const std::size_t nx = c.x_list.size(), ns = static_cast<std::size_t>(c.n_seeds);
  auto find_x = [&](double x) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < nx; ++i)
      if (std::abs(c.x_list[i] - x) < 1e-9) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  for (std::size_t gi = 0; gi < c.gamma_list.size(); ++gi) {
    std::vector<double> xs, means;
    std::size_t best = 0;
    for (std::size_t xi = 0; xi < nx; ++xi) {
      const auto& s = res.summary[gi * nx + xi];
      xs.push_back(s.x);
      means.push_back(s.api_mean);
      if (s.api_mean < res.summary[gi * nx + best].api_mean) best = xi;
    }
    series.push_back({"gamma=" + fmt(c.gamma_list[gi], 3), xs, means});
    std::string line = "gamma=" + fmt(c.gamma_list[gi]) + ": argmin x=" + fmt(c.x_list[best], 6);
    const auto i_star = find_x(two_design_fiducial_x()), i0 = find_x(0.0), i5 = find_x(0.5);
    if (i_star >= 0 && i0 >= 0 && i5 >= 0) {
      int hits = 0;
      for (std::size_t si = 0; si < ns; ++si) {
        auto api = [&](std::ptrdiff_t xi) { return res.runs[(gi * nx + static_cast<std::size_t>(xi)) * ns + si].api; };
        hits += (api(i_star) < api(i0) && api(i0) < api(i5)) ? 1 : 0;
      }
      line += "; API(x*) < API(0) < API(0.5) in " + std::to_string(hits) + "/" + std::to_string(ns) + " seeds";
      line += hits * 10 >= static_cast<int>(ns) * 9 ? " [ordering holds]" : " [ordering does not hold]";
    }
    r.summary.push_back(line);
  }
  save(r, dir / "qpt.csv", csv.str());
  save(r, dir / "qpt_runs.csv", runs.str());
  if (want_svg(g)) save(r, dir / "qpt_api.svg", svg::line_plot("Average process infidelity", "x", "API", series));
  return r;
}

// --- wigner ---------------------------------------------------------------------------

CommandResult cmd_wigner(const GlobalOptions& g, const WignerOptions& o) {
  check_globals(g);
  require(o.x >= 0.0 && o.x <= 1.0, "--x must lie in [0,1]");
  require(o.n_theta >= 2 && o.n_phi >= 2, "--n-theta and --n-phi must be >= 2");
  require(o.epsilon >= 0.0 && o.epsilon <= 1.0, "--epsilon must lie in [0,1]");
  require(o.input == "fiducial" || o.input == "mixed", "--input must be fiducial or mixed");
  for (double gm : o.gamma) require(gm >= 0.0, "--gamma values must be >= 0");
  const fs::path dir = prepare_out_dir(g);
  const json config = {{"x", o.x}, {"gamma", o.gamma}, {"n_theta", o.n_theta}, {"n_phi", o.n_phi},
                       {"epsilon", o.epsilon}, {"input", o.input}};
  const DensityMatrix rho_in =
      o.input == "mixed" ? DensityMatrix::maximally_mixed() : depolarize_fiducial(o.x, ImpurityModel{o.epsilon});

  CommandResult r;
  CsvWriter csv({"gamma", "theta", "phi", "W"}, comment("wigner", g, config));
  for (double gm : o.gamma) {
    const auto grid = wigner_sphere(apply(jitter_exact(gm), rho_in), o.n_theta, o.n_phi);
    for (int i = 0; i < grid.n_theta; ++i)
      for (int j = 0; j < grid.n_phi; ++j) csv.add_row({gm, grid.theta[i], grid.phi[j], grid.at(i, j)});
    const double integral = integrate_sphere(grid);
    const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
    if (std::abs(integral - 1.0) > 1e-3) {
      r.ok = false;
      r.summary.push_back("grid integral " + fmt(integral, 8) + " deviates from 1 by more than 1e-3");
    }
    r.summary.push_back("gamma=" + fmt(gm) + ": integral=" + fmt(integral, 8) + " max-min=" + fmt(*hi - *lo, 8));
    if (want_svg(g)) {
      char name[64];
      std::snprintf(name, sizeof name, "wigner_gamma%.3g.svg", gm);
      save(r, dir / name, svg::heatmap("W(theta, phi), gamma=" + fmt(gm, 3), grid.values, grid.n_theta, grid.n_phi));
    }
  }
  save(r, dir / "wigner.csv", csv.str());
  return r;
}

// --- channel-export ----------------------------------------------------------------------

CommandResult cmd_channel_export(const GlobalOptions& g, const ChannelExportOptions& o) {
  check_globals(g);
  require(o.gamma >= 0.0, "--gamma must be >= 0");
  const fs::path dir = prepare_out_dir(g);
  Superoperator e;
  json extra = json::object();
  if (o.kind == "jitter-exact") {
    e = jitter_exact(o.gamma);
  } else if (o.kind == "jitter-mc") {
    require(o.samples >= 1, "--samples must be >= 1");
    const auto mc = jitter_mc_stats(o.gamma, o.samples, g.seed, g.threads);
    e = mc.mean;
    json se_re = json::array(), se_im = json::array();
    for (int i = 0; i < 9; ++i) {
      json a = json::array(), b = json::array();
      for (int j = 0; j < 9; ++j) {
        a.push_back(mc.se_real(i, j));
        b.push_back(mc.se_imag(i, j));
      }
      se_re.push_back(a);
      se_im.push_back(b);
    }
    extra = {{"samples", o.samples}, {"standard_error_real", se_re}, {"standard_error_imag", se_im}};
  } else if (o.kind == "jitter-discrete") {
    require(o.k >= 1, "--k must be >= 1");
    e = jitter_discrete({o.gamma, o.k, g.seed});
    extra = {{"K", o.k}};
  } else if (o.kind == "identity") {
    e = Superoperator::identity();
  } else if (o.kind == "depolarizer") {
    e = complete_depolarizer();
  } else {
    throw ValidationError("unknown --kind '" + o.kind + "'");
  }
  CommandResult r;
  const auto rep = is_cptp(e);
  r.ok = rep.ok();
  json out = {{"kind", o.kind},
              {"gamma", o.gamma},
              {"seed", g.seed},
              {"version", BIPHOTON_VERSION},
              {"cptp", {{"cp", rep.cp}, {"tp", rep.tp}, {"min_choi_eig", rep.min_choi_eig}, {"tp_residual", rep.tp_residual}}},
              {"superoperator", to_json(e)},
              {"choi", to_json(to_choi(e))}};
  out.update(extra);
  save(r, dir / "channel.json", out.dump(2) + "\n");
  r.summary.push_back(o.kind + ": cp=" + (rep.cp ? "true" : "false") + " tp=" + (rep.tp ? "true" : "false") +
                      " min_choi_eig=" + fmt(rep.min_choi_eig, 6));
  if (o.data_x >= 0.0) {
    require(o.data_x <= 1.0, "--data-x must lie in [0,1]");
    const ProbeSet probes = make_probe_set(o.data_x, probe_rotations(10, ProbeScheme::design));
    const auto data = simulate_process_data(e, probes, default_measurement_set(), g.shots, g.seed);
    save(r, dir / "experiment_data.json", to_json(data).dump(2) + "\n");
  }
  return r;
}

// --- argv front end ---------------------------------------------------------------------

namespace {

void error_record(std::ostream& err, const std::string& kind, const std::string& message, const std::string& command) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"command", command}}}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spin-1 biphoton decoherence, ensemble and process tomography toolkit", "biphoton"};
  app.set_config("--config", "", "Config file (TOML/INI: top-level keys and [subcommand] sections); flags win");
  app.set_version_flag("--version", BIPHOTON_VERSION);
  app.require_subcommand(1, 1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--shots", g.shots, "Shots per probe / detection trials")
      ->capture_default_str()
      ->check(CLI::Range(1.0, 1e15));
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1, 1024));
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "csv or csv+svg")->capture_default_str()->check(CLI::IsMember({"csv", "csv+svg"}));

  PurityOptions po;
  auto* purity = app.add_subcommand("purity-curve", "Purity of decohered fiducials vs gamma");
  purity->add_option("--x", po.x, "Fiducial parameters")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  purity->add_option("--gamma-max", po.gamma_max)->capture_default_str()->check(CLI::Range(0.0, 100.0));
  purity->add_option("--gamma-steps", po.gamma_steps)->capture_default_str()->check(CLI::Range(2, 1000000));
  purity->add_option("--epsilon", po.epsilon, "Input depolarizing weight")->capture_default_str()->check(CLI::Range(0.0, 1.0));

  DetectOptions dopt;
  auto* detect = app.add_subcommand("detect", "Nondetection probability, simulated outcomes and sensitivity");
  detect->add_option("--x", dopt.x)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  detect->add_option("--gamma-max", dopt.gamma_max)->capture_default_str()->check(CLI::Range(1e-9, 100.0));
  detect->add_option("--gamma-steps", dopt.gamma_steps)->capture_default_str()->check(CLI::Range(3, 1000000));
  detect->add_option("--ratio-gamma", dopt.ratio_gamma)->capture_default_str()->check(CLI::Range(0.0, 100.0));

  GramOptions gopt;
  auto* gram = app.add_subcommand("gram", "Covariant Gram matrices, determinant curve, 2-design check");
  gram->add_option("--x-step", gopt.x_step)->capture_default_str()->check(CLI::Range(1e-6, 0.5));

  QptOptions qopt;
  auto* qpt = app.add_subcommand("qpt", "Simulated process tomography sweep (API vs x)");
  qpt->add_option("--x", qopt.x, "Fiducial grid (default 0..0.5 step 0.05 plus 0.1464)")->check(CLI::Range(0.0, 1.0));
  qpt->add_option("--gamma", qopt.gamma)->capture_default_str()->check(CLI::Range(0.0, 100.0));
  qpt->add_option("--seeds", qopt.seeds)->capture_default_str()->check(CLI::Range(1, 100000));
  qpt->add_option("--states", qopt.states, "Haar evaluation states")->capture_default_str()->check(CLI::Range(1, 1000000));
  qpt->add_option("--probes", qopt.probes)->capture_default_str()->check(CLI::Range(1, 10000));
  qpt->add_option("--scheme", qopt.scheme)->capture_default_str()->check(CLI::IsMember({"design", "fibonacci", "haar"}));
  qpt->add_option("--ingest", qopt.ingest, "Reconstruct an ExperimentData JSON file instead of sweeping");

  WignerOptions wopt;
  auto* wigner = app.add_subcommand("wigner", "Wigner function on the sphere");
  wigner->add_option("--x", wopt.x)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  wigner->add_option("--gamma", wopt.gamma)->capture_default_str()->check(CLI::Range(0.0, 100.0));
  wigner->add_option("--n-theta", wopt.n_theta)->capture_default_str()->check(CLI::Range(2, 100000));
  wigner->add_option("--n-phi", wopt.n_phi)->capture_default_str()->check(CLI::Range(2, 100000));
  wigner->add_option("--epsilon", wopt.epsilon)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  wigner->add_option("--input", wopt.input)->capture_default_str()->check(CLI::IsMember({"fiducial", "mixed"}));

  ChannelExportOptions copt;
  auto* channel = app.add_subcommand("channel-export", "Write a channel as superoperator + Choi JSON");
  channel->add_option("--kind", copt.kind)
      ->capture_default_str()
      ->check(CLI::IsMember({"jitter-exact", "jitter-mc", "jitter-discrete", "identity", "depolarizer"}));
  channel->add_option("--gamma", copt.gamma)->capture_default_str()->check(CLI::Range(0.0, 100.0));
  channel->add_option("--samples", copt.samples)->capture_default_str()->check(CLI::Range(1.0, 1e12));
  channel->add_option("--k", copt.k, "Rotations in the discrete approximation")->capture_default_str()->check(CLI::Range(1, 10000000));
  channel->add_option("--data-x", copt.data_x, "Also simulate ExperimentData with probes of this x");

  std::string command = "";
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, "usage", e.what(), command);
    return 2;
  }

  try {
    CommandResult r;
    if (*purity) {
      command = "purity-curve";
      r = cmd_purity_curve(g, po);
    } else if (*detect) {
      command = "detect";
      r = cmd_detect(g, dopt);
    } else if (*gram) {
      command = "gram";
      r = cmd_gram(g, gopt);
    } else if (*qpt) {
      command = "qpt";
      r = cmd_qpt(g, qopt);
    } else if (*wigner) {
      command = "wigner";
      r = cmd_wigner(g, wopt);
    } else if (*channel) {
      command = "channel-export";
      r = cmd_channel_export(g, copt);
    }
    for (const auto& line : r.summary) out << line << "\n";
    for (const auto& f : r.files) out << "wrote " << f << "\n";
    if (!r.ok) {
      error_record(err, "validation", "internal validation assertion failed", command);
      return 1;
    }
    return 0;
  } catch (const ValidationError& e) {
    error_record(err, "invalid_input", e.what(), command);
    return 2;
  } catch (const DomainError& e) {
    error_record(err, "invalid_input", e.what(), command);
    return 2;
  } catch (const json::exception& e) {
    error_record(err, "invalid_input", e.what(), command);
    return 2;
  } catch (const IoError& e) {
    error_record(err, "io", e.what(), command);
    return 3;
  } catch (const std::exception& e) {
    error_record(err, "internal", e.what(), command);
    return 1;
  }
}

}  // namespace biphoton::cli

#include "cli.hpp"

#include "tflab/dynamics.hpp"
#include "tflab/equilibria.hpp"
#include "tflab/error.hpp"
#include "tflab/metrics.hpp"
#include "tflab/parallel.hpp"
#include "tflab/random.hpp"
#include "tflab/spectral.hpp"
#include "tflab/steering.hpp"
#include "tflab/version.hpp"
#include "tflab/weights.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace tflab::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t at = 0;
  while (at <= text.size()) {
    const std::size_t comma = std::min(text.find(',', at), text.size());
    double v = 0;
    const char* first = text.data() + at;
    const char* last = text.data() + comma;
    const auto res = std::from_chars(first, last, v);
    if (first == last || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
      throw UsageError(std::string("malformed ") + what + " '" + text + "'");
    }
    out.push_back(v);
    at = comma + 1;
  }
  return out;
}

using Config = std::vector<std::pair<std::string, std::string>>;

json config_json(const Config& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg) j[k] = v;
  return j;
}

std::string csv_header(const std::string& command, const Config& cfg) {
  std::ostringstream s;
  s << "# tflab " << kVersion << "\n# command " << command << "\n";
  for (const auto& [k, v] : cfg) s << "# " << k << " " << v << "\n";
  return s.str();
}

json json_envelope(const std::string& command, const Config& cfg) {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config_json(cfg);
  return j;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path);
}

// Errors that can only come from what the user typed.
bool usage_kind(ErrorKind k) {
  return k == ErrorKind::InvalidArgument || k == ErrorKind::InvalidSpectrum ||
         k == ErrorKind::ShapeMismatch || k == ErrorKind::OrthogonalPair;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

// Options shared by commands that run dynamics.
struct RunOptions {
  std::string weights;
  std::string out;
  std::uint64_t seed = 0;
  double eta = 1.0;
  std::string mask = "full";
  bool unscaled = false;
  long long t_extra = 0;
  int threads = 0;

  void add(CLI::App* app, bool needs_dynamics = true) {
    app->add_option("--weights", weights, "weight container directory")->required();
    app->add_option("--out", out, "output file (default stdout)");
    if (!needs_dynamics) return;
    app->add_option("--seed", seed, "token seed");
    app->add_option("--eta", eta, "step size");
    app->add_option("--mask", mask, "full, causal or uniform");
    app->add_flag("--unscaled", unscaled, "drop the 1/sqrt(d_k) score factor");
    app->add_option("--threads", threads, "worker threads (TFLAB_THREADS overrides)");
  }

  int workers() const {
    if (std::getenv("TFLAB_THREADS")) return default_workers();
    return threads > 0 ? threads : default_workers();
  }

  void describe(Config& cfg) const {
    cfg.emplace_back("weights", weights);
    cfg.emplace_back("seed", std::to_string(seed));
    cfg.emplace_back("eta", num(eta));
    cfg.emplace_back("mask", mask);
    cfg.emplace_back("scaled", unscaled ? "false" : "true");
  }
};

// ---------------------------------------------------------------------------

struct GenWeights {
  bool symmetric = false, random = false, shared = false;
  long long d = 0, heads = 1, layers = 1;
  std::string spectrum;
  std::uint64_t seed = 0;
  double scale = 1.0, qk_scale = 1.0;
  std::string out = "tflab-weights";

  void add(CLI::App* app) {
    auto* kind = app->add_option_group("kind");
    kind->add_flag("--symmetric", symmetric, "single-head layer with symmetric value matrix");
    kind->add_flag("--random", random, "Gaussian weights");
    kind->require_option(1);
    app->add_option("--d", d, "model dimension")->required();
    app->add_option("--heads", heads, "heads (random)");
    app->add_option("--layers", layers, "layers");
    app->add_flag("--shared", shared, "repeat one layer (random)");
    app->add_option("--spectrum", spectrum, "comma-separated eigenvalues (symmetric)");
    app->add_option("--seed", seed, "seed");
    app->add_option("--scale", scale, "entry scale: std = scale/sqrt(d) (random)");
    app->add_option("--qk-scale", qk_scale, "query/key scale (symmetric)");
    app->add_option("--out", out, "container directory");
  }

  int exec(std::ostream& out_stream) const {
    if (d < 1 || layers < 1) throw UsageError("--d and --layers must be positive");
    ModelWeights m;
    if (symmetric) {
      if (spectrum.empty()) throw UsageError("--symmetric needs --spectrum");
      const auto s = parse_list(spectrum, "spectrum");
      m = replicate_layer(synthesize_symmetric(d, s, seed, qk_scale), layers);
    } else {
      m = synthesize_random(d, heads, layers, seed, scale, shared);
    }
    save_model(m, out);
    out_stream << "wrote " << out << " (d=" << m.d << " heads=" << m.heads << " layers=" << m.num_layers()
               << " shared=" << (m.shared ? 1 : 0) << ")\n";
    return 0;
  }
};

struct Simulate {
  RunOptions run;
  long long n = 16;
  std::string system = "multihead";
  double tol_cons = 1e-6, tol_plane = 1e-3;

  void add(CLI::App* app) {
    run.add(app);
    app->add_option("--n", n, "number of tokens");
    app->add_option("--system", system, "oja, single-head or multihead");
    app->add_option("--t-extra", run.t_extra, "extra repeats of a shared layer");
    app->add_option("--tol-cons", tol_cons, "consensus tolerance");
    app->add_option("--tol-plane", tol_plane, "planar alignment tolerance");
  }

  int exec(std::ostream& out) const {
    if (n < 2) throw UsageError("--n must be at least 2");
    const ModelWeights model = load_model(run.weights);
    StepConfig cfg{run.eta, parse_mask(run.mask), !run.unscaled, parse_system(system)};
    const Trajectory traj = run_dynamics(model, cfg);

    std::vector<SpectralClassification> specs;
    for (const auto& layer : model.layers) specs.push_back(classify(assemble_layer_matrix(layer)));
    const LimitBehavior lb = detect_limit_behavior(traj, specs.back(), tol_cons, tol_plane);

    Config c;
    run.describe(c);
    c.emplace_back("system", system);
    c.emplace_back("n", std::to_string(n));
    c.emplace_back("t_extra", std::to_string(run.t_extra));
    c.emplace_back("tol_cons", num(tol_cons));
    c.emplace_back("tol_plane", num(tol_plane));
    c.emplace_back("limit", std::string(to_string(lb.kind)));

    std::ostringstream s;
    s << csv_header("simulate", c) << "step,diameter,gamma\n";
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
      const std::size_t layer = std::min(t == 0 ? 0 : t - 1, specs.size() - 1);
      const Matrix& q = specs[layer].basis.orthonormal();
      const Matrix& x = traj.states[t];
      double g = 0;
      for (Eigen::Index i = 0; i < x.cols(); ++i) g += projected_corr(x.col(i), q);
      s << t << "," << num(intertoken_diameter(x)) << "," << num(g / static_cast<double>(x.cols())) << "\n";
    }
    emit(s.str(), run.out, out);
    return 0;
  }

  Trajectory run_dynamics(const ModelWeights& model, const StepConfig& cfg) const {
    const Matrix x0 = random_tokens(model.d, n, run.seed);
    return tflab::run(x0, model, cfg, run.t_extra);
  }
};

struct Spectrum {
  RunOptions run;
  long long k = 0;
  double rel_tol = 1e-6, corr_tol = 0.95;

  void add(CLI::App* app) {
    run.add(app, false);
    app->add_option("--k", k, "eigenvalues per layer (default d)");
    app->add_option("--rel-tol", rel_tol, "relative gap tolerance");
    app->add_option("--corr-tol", corr_tol, "v1/v2 correlation threshold");
  }

  int exec(std::ostream& out) const {
    const ModelWeights model = load_model(run.weights);
    const Eigen::Index kk = k > 0 ? std::min<Eigen::Index>(k, model.d) : model.d;
    Config c{{"weights", run.weights}, {"k", std::to_string(kk)}, {"rel_tol", num(rel_tol)},
             {"corr_tol", num(corr_tol)}};
    json j = json_envelope("spectrum", c);
    j["d"] = model.d;
    j["heads"] = model.heads;
    j["shared"] = model.shared;
    json layers = json::array();
    for (const auto& layer : model.layers) {
      const LayerMatrix lm = assemble_layer_matrix(layer);
      const SpectralClassification sc = classify(lm, rel_tol, corr_tol);
      json l;
      l["layer"] = layer.index;
      l["case"] = std::string(to_string(sc.label));
      l["lambda1"] = complex_json(sc.lambda1);
      l["gap"] = sc.gap;
      l["near_degenerate"] = sc.near_degenerate;
      l["corr_v1_v2"] = sc.corr_v1_v2;
      l["basis_rank"] = sc.basis.rank();
      json ev = json::array();
      for (Eigen::Index i = 0; i < kk; ++i) ev.push_back(complex_json(lm.eigen.values[i]));
      l["eigenvalues"] = ev;
      layers.push_back(l);
    }
    j["layers"] = layers;
    emit(j.dump(2) + "\n", run.out, out);
    return 0;
  }
};

struct Metrics {
  RunOptions run;
  long long ensemble = 10000, sequence_length = 64;

  void add(CLI::App* app) {
    run.add(app);
    app->add_option("--ensemble", ensemble, "tokens in the ensemble");
    app->add_option("--sequence-length", sequence_length, "tokens per simulated sequence");
    app->add_option("--t-extra", run.t_extra, "extra repeats of a shared layer");
  }

  SweepConfig sweep() const {
    SweepConfig s;
    s.ensemble_size = ensemble;
    s.seed = run.seed;
    s.mask = parse_mask(run.mask);
    s.eta = run.eta;
    s.scaled = !run.unscaled;
    s.sequence_length = sequence_length;
    s.t_extra = run.t_extra;
    s.workers = run.workers();
    return s;
  }

  Config describe() const {
    Config c;
    run.describe(c);
    c.emplace_back("ensemble", std::to_string(ensemble));
    c.emplace_back("sequence_length", std::to_string(sequence_length));
    c.emplace_back("t_extra", std::to_string(run.t_extra));
    return c;
  }

  int exec(std::ostream& out) const {
    const ModelWeights model = load_model(run.weights);
    const MetricSeries ms = layer_sweep(model, sweep());
    std::ostringstream s;
    s << csv_header("metrics", describe())
      << "layer,case,variant,gap,psi,psi_mean,rho,rho_mean,gamma,gamma_mean,psi_std,gamma_std\n";
    for (const auto& r : ms.records) {
      s << r.layer << "," << to_string(r.label) << "," << to_string(r.variant) << "," << num(r.gap) << ","
        << num(r.psi) << "," << num(r.psi_mean) << "," << num(r.rho) << "," << num(r.rho_mean) << ","
        << num(r.gamma) << "," << num(r.gamma_mean) << "," << num(r.psi_std) << "," << num(r.gamma_std)
        << "\n";
    }
    emit(s.str(), run.out, out);
    return 0;
  }
};

struct Cumulative {
  Metrics m;

  void add(CLI::App* app) {
    m.run.add(app);
    app->add_option("--ensemble", m.ensemble, "tokens in the ensemble");
    app->add_option("--sequence-length", m.sequence_length, "tokens per simulated sequence");
  }

  int exec(std::ostream& out) const {
    const ModelWeights model = load_model(m.run.weights);
    const auto products = cumulative_products(model);
    const auto rows = cumulative_alignment(model, m.sweep());
    std::ostringstream s;
    s << csv_header("cumulative", m.describe())
      << "layer,log_scale,lambda1_re,lambda1_im,gap,gamma_cum,gamma_cum_mean\n";
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const auto& p = products[t];
      s << t << "," << num(p.log_scale) << "," << num(p.layer.eigen.values[0].real()) << ","
        << num(p.layer.eigen.values[0].imag()) << "," << num(p.layer.spectral_gap) << ","
        << num(rows[t].gamma_cum) << "," << num(rows[t].gamma_cum_mean) << "\n";
    }
    emit(s.str(), m.run.out, out);
    return 0;
  }
};

json classes_json(const std::vector<EigenClass>& classes) {
  json a = json::array();
  for (const auto& c : classes) {
    a.push_back({{"class", c.label},
                  {"value", complex_json(c.value)},
                  {"multiplicity", c.multiplicity},
                  {"extrinsic", c.extrinsic}});
  }
  return a;
}

struct Stability {
  RunOptions run;
  long long layer = 0, n = 6, lyapunov_runs = 20, lyapunov_steps = 300;
  bool no_oracle = false;

  void add(CLI::App* app) {
    app->add_option("--weights", run.weights, "weight container directory")->required();
    app->add_option("--out", run.out, "output file (default stdout)");
    app->add_option("--layer", layer, "layer index");
    app->add_option("--eta", run.eta, "step size");
    app->add_option("--n", n, "number of tokens");
    app->add_option("--seed", run.seed, "seed for the Lyapunov audit");
    app->add_option("--lyapunov-runs", lyapunov_runs, "Oja runs in the Lyapunov audit");
    app->add_option("--lyapunov-steps", lyapunov_steps, "steps per Lyapunov run");
    app->add_flag("--no-oracle", no_oracle, "skip finite-difference Jacobians");
  }

  int exec(std::ostream& out) const {
    const ModelWeights model = load_model(run.weights);
    if (layer < 0 || layer >= model.num_layers()) throw UsageError("--layer out of range");
    if (n < 2) throw UsageError("--n must be at least 2");
    const LayerWeights& lw = model.layers[static_cast<std::size_t>(layer)];
    if (lw.num_heads() != 1) throw UsageError("stability analysis needs a single-head layer");
    const Matrix f = assemble_layer_matrix(lw).f;
    const HeadWeights head{lw.heads[0].query, lw.heads[0].key, f};
    const EigenSystem es = eig(f);
    const Eigen::Index d = es.size();

    Config c{{"weights", run.weights}, {"layer", std::to_string(layer)}, {"eta", num(run.eta)},
             {"n", std::to_string(n)}, {"seed", std::to_string(run.seed)},
             {"lyapunov_runs", std::to_string(lyapunov_runs)},
             {"lyapunov_steps", std::to_string(lyapunov_steps)}, {"oracle", no_oracle ? "false" : "true"}};
    json j = json_envelope("stability", c);

    const UpdateMap oja = UpdateMap::oja(f);
    const UpdateMap self = UpdateMap::single_head(head, Mask::Full, false);
    json cons = json::array();
    for (Eigen::Index k = 0; k < d; ++k) {
      json e;
      e["k"] = k;
      e["lambda"] = es.values[k].real();
      try {
        const EquilibriumReport r = consensus_stability(f, k, run.eta, n, no_oracle ? nullptr : &oja);
        e["classes"] = classes_json(r.classes);
        e["stable"] = r.stable;
        e["reason"] = r.reason;
        e["eta_bounds"] = r.eta_bounds;
        if (!no_oracle) {
          e["oracle_distance_oja"] = r.oracle_distance;
          const EquilibriumReport s = consensus_stability(f, k, run.eta, n, &self);
          e["oracle_distance_self_attention"] = s.oracle_distance;
        }
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::SingularDenominator) throw;
        e["error"] = err.what();
      }
      cons.push_back(e);
    }
    j["consensus"] = cons;

    json bip = json::array();
    for (Eigen::Index k = 0; k < d; ++k) {
      for (long long n2 = 1; 2 * n2 <= n; ++n2) {
        const BipartitePattern p{k, n - n2, n2};
        json e;
        e["k"] = k;
        e["n1"] = p.n1;
        e["n2"] = p.n2;
        e["oja_certificate"] = oja_bipartite_instability_certificate(f, p, run.eta);
        try {
          const EquilibriumReport r = bipartite_stability(f, head, p, run.eta, !no_oracle);
          e["constants"] = {{"alpha1", r.constants.alpha1}, {"alpha2", r.constants.alpha2},
                            {"beta1", r.constants.beta1},   {"beta2", r.constants.beta2},
                            {"gamma1", r.constants.gamma1}, {"gamma2", r.constants.gamma2}};
          e["classes"] = classes_json(r.classes);
          e["stable"] = r.stable;
          e["reason"] = r.reason;
          if (!no_oracle) e["oracle_distance"] = r.oracle_distance;
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::EtaOutOfRange) throw;
          e["error"] = err.what();
        }
        bip.push_back(e);
      }
    }
    j["bipartite"] = bip;

    // Lyapunov audit at eta = 1/(2 ||F||), where W is known to descend.
    const double eta_l = 1.0 / (2.0 * f.operatorNorm());
    double worst = -std::numeric_limits<double>::infinity();
    for (long long r = 0; r < lyapunov_runs; ++r) {
      Matrix x = random_tokens(d, n, mix_seed(run.seed, static_cast<std::uint64_t>(r)));
      double w = lyapunov_W(x, f);
      for (long long t = 0; t < lyapunov_steps; ++t) {
        x = oja.step(x, eta_l);
        const double w2 = lyapunov_W(x, f);
        worst = std::max(worst, w2 - w);
        w = w2;
      }
    }
    j["lyapunov"] = {{"eta", eta_l}, {"max_increment", worst}, {"nonincreasing", worst <= 1e-12}};
    emit(j.dump(2) + "\n", run.out, out);
    return 0;
  }
};

struct Steer {
  RunOptions run;
  std::string direction, left, out_weights;
  std::uint64_t direction_seed = 0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double gap_factor = 50.0;
  long long ensemble = 1000, sequence_length = 64;

  void add(CLI::App* app) {
    run.add(app);
    app->add_option("--direction", direction, "comma-separated w_r (default: random unit vector)");
    app->add_option("--direction-seed", direction_seed, "seed for a random w_r");
    app->add_option("--left", left, "comma-separated w_l (default w_r)");
    app->add_option("--sigma", sigma, "gain (overrides --gap-factor)");
    app->add_option("--gap-factor", gap_factor, "sigma = factor * |lambda_1| of the last layer");
    app->add_option("--ensemble", ensemble, "tokens used for verification");
    app->add_option("--sequence-length", sequence_length, "tokens per simulated sequence");
    app->add_option("--out-weights", out_weights, "write the steered container here");
  }

  int exec(std::ostream& out) const {
    const ModelWeights model = load_model(run.weights);
    SteeringSpec spec;
    if (direction.empty()) {
      spec.w_r = random_tokens(model.d, 1, direction_seed).col(0);
    } else {
      const auto v = parse_list(direction, "direction");
      spec.w_r = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (!left.empty()) {
      const auto v = parse_list(left, "left vector");
      spec.w_l = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (spec.w_r.size() != model.d || (spec.w_l.size() != 0 && spec.w_l.size() != model.d)) {
      throw UsageError("steering vectors must have d entries");
    }
    const double l1 = std::abs(assemble_layer_matrix(model.layers.back()).eigen.values[0]);
    spec.sigma = std::isnan(sigma) ? gap_factor * l1 : sigma;

    VerifyConfig vc;
    vc.ensemble_size = ensemble;
    vc.seed = run.seed;
    vc.mask = parse_mask(run.mask);
    vc.eta = run.eta;
    vc.scaled = !run.unscaled;
    vc.sequence_length = sequence_length;
    vc.workers = run.workers();
    const AlignmentReport r = steer_and_verify(model, spec, vc);
    if (!out_weights.empty()) save_model(steer_model(model, spec, nullptr), out_weights);

    Config c;
    run.describe(c);
    c.emplace_back("direction", direction.empty() ? "random:" + std::to_string(direction_seed) : direction);
    c.emplace_back("left", left.empty() ? "w_r" : left);
    c.emplace_back("sigma", num(spec.sigma));
    c.emplace_back("ensemble", std::to_string(ensemble));
    c.emplace_back("sequence_length", std::to_string(sequence_length));
    json j = json_envelope("steer", c);
    j["sigma"] = spec.sigma;
    j["lambda1_unmodified_abs"] = l1;
    j["lambda1_mod"] = complex_json(r.steering.lambda1);
    j["gap"] = r.steering.gap;
    j["corr_v1_wr"] = r.steering.corr_v1_wr;
    j["pseudo_inverse"] = r.steering.pseudo_inverse;
    if (!r.steering.warning.empty()) j["warning"] = r.steering.warning;
    j["gamma_mod"] = r.gamma_mod;
    j["gamma_wr"] = r.gamma_wr;
    j["gamma_unmodified"] = r.gamma_unmodified;
    j["gamma_unmodified_wr"] = r.gamma_unmodified_wr;
    emit(j.dump(2) + "\n", run.out, out);
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Token dynamics laboratory: spectra, equilibria, metrics and steering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenWeights gen;
  Simulate sim;
  Spectrum spec;
  Metrics met;
  Stability stab;
  Steer steer;
  Cumulative cum;
  auto* c_gen = app.add_subcommand("gen-weights", "synthesize and save a weight container");
  gen.add(c_gen);
  auto* c_sim = app.add_subcommand("simulate", "run one trajectory; CSV of diameter and gamma");
  sim.add(c_sim);
  auto* c_spec = app.add_subcommand("spectrum", "per-layer eigenvalues and classification (JSON)");
  spec.add(c_spec);
  auto* c_met = app.add_subcommand("metrics", "per-layer psi/rho/gamma (CSV)");
  met.add(c_met);
  auto* c_stab = app.add_subcommand("stability", "equilibrium spectra and verdicts (JSON)");
  stab.add(c_stab);
  auto* c_steer = app.add_subcommand("steer", "rank-1 steering of the last layer (JSON)");
  steer.add(c_steer);
  auto* c_cum = app.add_subcommand("cumulative", "alignment with cumulative products (CSV)");
  cum.add(c_cum);

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (c_gen->parsed()) return gen.exec(out);
    if (c_sim->parsed()) return sim.exec(out);
    if (c_spec->parsed()) return spec.exec(out);
    if (c_met->parsed()) return met.exec(out);
    if (c_stab->parsed()) return stab.exec(out);
    if (c_steer->parsed()) return steer.exec(out);
    if (c_cum->parsed()) return cum.exec(out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return usage_kind(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace tflab::cli

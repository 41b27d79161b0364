// Batch front end: spectra, single-point quantifier evaluation, phase-diagram
// sweeps, and a built-in verification battery. All quantities are in units of
// omega unless overridden. Exit codes: 0 success, 1 usage error, 2 numerical
// failure, 3 validation failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aqrm/dissipator.hpp"
#include "aqrm/io.hpp"
#include "aqrm/model.hpp"
#include "aqrm/quantifiers.hpp"
#include "aqrm/spectrum.hpp"
#include "aqrm/sweep.hpp"
#include "aqrm/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitValidation = 3;

int default_workers() {
  const char* env = std::getenv("AQRM_WORKERS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

int parse_cutoff(const std::string& text) {
  if (text == "auto") return 0;
  size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("--cutoff expects 'auto' or an integer >= 2");
  }
  if (pos != text.size() || value < 2)
    throw std::invalid_argument("--cutoff expects 'auto' or an integer >= 2");
  return value;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    aqrm::io::write_text_file(out_path, content);
  }
}

struct CommonFlags {
  double omega = 1.0;
  double delta = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double temp = 0.1;
  double alpha = 0.01;
  double omega_c = 0.0;  // 0 means 50 * omega
  std::string cutoff = "auto";
  std::string format = "csv";
  std::string out;
  int workers = default_workers();
  unsigned seed = 0;

  double resolved_omega_c() const { return omega_c > 0 ? omega_c : 50.0 * omega; }

  aqrm::ModelParams model() const {
    aqrm::ModelParams p;
    p.omega = omega;
    p.delta = delta;
    p.lambda1 = lambda1;
    p.lambda2 = lambda2;
    p.cutoff = parse_cutoff(cutoff);
    return p;
  }
};

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--omega", f.omega, "Cavity frequency (sets the unit scale)")
      ->capture_default_str();
  cmd->add_option("--delta", f.delta, "Qubit splitting")->capture_default_str();
  cmd->add_option("--cutoff", f.cutoff, "Fock cutoff: 'auto' for the rule, or an integer >= 2")
      ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, CommonFlags& f, bool with_json) {
  if (with_json) {
    cmd->add_option("--format", f.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }
  cmd->add_option("--out", f.out, "Output path (default: stdout)");
}

int cmd_spectrum(const CommonFlags& f, double ratio, const std::string& swept, double start,
                 double stop, int points, int levels) {
  aqrm::SweepSpec spec;
  spec.mode = aqrm::SweepMode::spectrum;
  spec.swept = swept == "l2" ? aqrm::Coupling::lambda2 : aqrm::Coupling::lambda1;
  spec.ratios = {ratio};
  spec.coupling_grid = aqrm::linspace(start, stop, points);
  spec.levels = levels;
  spec.model = f.model();
  spec.bath = aqrm::BathParams::symmetric(0.0, f.resolved_omega_c(), f.temp);
  const aqrm::SweepResult res = aqrm::run_sweep(spec, f.workers);
  emit(f.out, aqrm::io::spectrum_csv(res));
  return kExitOk;
}

int cmd_quantify(const CommonFlags& f, const std::string& dump_state) {
  const aqrm::ModelParams params = f.model();
  params.validate();
  if (!(f.temp > 0)) throw std::invalid_argument("--temp must be positive");

  aqrm::QuantifierSelection sel;  // all six
  aqrm::QuantifyRow row;
  {
    aqrm::ModelParams p = params;
    p.cutoff = params.resolved_cutoff();
    const aqrm::SpectralData s = aqrm::eigensolve(p);
    const aqrm::Operator rho = aqrm::gibbs_state(s, f.temp);
    if (!dump_state.empty()) aqrm::io::write_density_json(dump_state, rho);

    row.lambda1 = p.lambda1;
    row.lambda2 = p.lambda2;
    row.temperature = f.temp;
    row.cutoff = p.cutoff;
    aqrm::QuantifierOptions opt;
    opt.discord_options.seed = f.seed;
    row.report = aqrm::evaluate_quantifiers(rho, s, opt);
    std::vector<std::string> flags;
    if (!row.report.g2_bare.has_value()) flags.emplace_back("g2_bare_undefined");
    if (!row.report.g2_dressed.has_value()) flags.emplace_back("g2_dressed_undefined");
    for (size_t i = 0; i < flags.size(); ++i) {
      if (i > 0) row.flags += ';';
      row.flags += flags[i];
    }
    row.ok = true;
  }

  if (f.format == "json") {
    emit(f.out, aqrm::io::quantify_row_json(row, sel).dump(2) + "\n");
  } else {
    emit(f.out, aqrm::io::quantify_csv_header() + aqrm::io::quantify_csv_row(row, sel));
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::string& spec_path, double ratio,
              const std::string& swept, double start, double stop, int points) {
  aqrm::SweepSpec spec;
  if (!spec_path.empty()) {
    spec = aqrm::io::load_sweep_spec(spec_path);
  } else {
    spec.mode = aqrm::SweepMode::quantify_1d;
    spec.swept = swept == "l2" ? aqrm::Coupling::lambda2 : aqrm::Coupling::lambda1;
    spec.ratios = {ratio};
    spec.coupling_grid = aqrm::linspace(start, stop, points);
    spec.temperature_grid = {f.temp};
    spec.model = f.model();
    spec.bath = aqrm::BathParams::symmetric(f.alpha, f.resolved_omega_c(), f.temp);
    spec.seed = f.seed;
  }

  const aqrm::SweepResult res = aqrm::run_sweep(spec, f.workers);
  const bool all_failed = !res.rows.empty() && res.failed_count() == res.rows.size();

  if (f.format == "json") {
    nlohmann::ordered_json j;
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(res.rows.size());
    for (const auto& row : res.rows)
      rows.push_back(aqrm::io::quantify_row_json(row, spec.selection));
    j["rows"] = rows;
    j["provenance"] = aqrm::io::provenance_json(res);
    emit(f.out, j.dump(2) + "\n");
  } else {
    const std::string body = spec.mode == aqrm::SweepMode::spectrum
                                 ? aqrm::io::spectrum_csv(res)
                                 : aqrm::io::quantify_csv(res);
    emit(f.out, body);
    if (!f.out.empty())
      aqrm::io::write_text_file(f.out + ".provenance.json",
                                aqrm::io::provenance_json(res).dump(2) + "\n");
  }
  if (all_failed) {
    std::cerr << "sweep: every row failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

struct CheckLine {
  std::string name;
  std::string status;  // pass, fail, skipped, expected-fail
  std::string detail;
};

int cmd_validate(const CommonFlags& f, double temp_qubit) {
  std::vector<CheckLine> checks;
  const aqrm::ModelParams params = f.model();
  params.validate();
  if (!(f.temp > 0)) throw std::invalid_argument("--temp must be positive");
  const bool unequal = temp_qubit > 0 && temp_qubit != f.temp;
  const bool dissipative = f.alpha > 0;

  aqrm::ModelParams p = params;
  p.cutoff = params.resolved_cutoff();

  // Parity symmetry of the Hamiltonian.
  {
    const aqrm::Operator h = aqrm::build_hamiltonian(p);
    const aqrm::Operator parity = aqrm::parity_operator(aqrm::HilbertConfig{p.cutoff});
    const double comm = aqrm::max_abs(aqrm::Operator(h * parity - parity * h));
    checks.push_back({"parity-commutator", comm <= 1e-12 ? "pass" : "fail",
                      "max |[H, P]| = " + aqrm::io::format_full(comm)});
  }

  const aqrm::SpectralData s = aqrm::eigensolve(p);
  const aqrm::Operator rho_gibbs = aqrm::gibbs_state(s, f.temp);

  if (!dissipative) {
    checks.push_back({"gibbs-fixed-point", "skipped", "alpha = 0, no dissipator"});
    checks.push_back({"steady-state-match", "skipped", "alpha = 0, no dissipator"});
    checks.push_back({"relaxation", "skipped", "alpha = 0, no dissipator"});
  } else {
    aqrm::BathParams bath =
        aqrm::BathParams::symmetric(f.alpha, f.resolved_omega_c(), f.temp);
    if (unequal) bath.temp_qubit = temp_qubit;
    const aqrm::LindbladGenerator gen(s, bath);
    const double max_rate = gen.rates().max_rate;
    const double residual = aqrm::max_abs(gen.apply(rho_gibbs));
    const double bound = 1e-8 * std::max(1e-300, max_rate);

    if (!unequal) {
      checks.push_back({"gibbs-fixed-point", residual <= bound ? "pass" : "fail",
                        "max |L(rho_gibbs)| = " + aqrm::io::format_full(residual) +
                            ", bound = " + aqrm::io::format_full(bound)});
    } else {
      // With unequal bath temperatures the Gibbs state must NOT be
      // stationary; seeing a small residual here would be the failure.
      checks.push_back({"gibbs-fixed-point",
                        residual > bound ? "expected-fail" : "fail",
                        "nonequilibrium baths, max |L(rho_gibbs)| = " +
                            aqrm::io::format_full(residual)});
    }

    const aqrm::Operator rho_ss = aqrm::steady_state(gen);
    const double dist = aqrm::trace_distance(rho_ss, rho_gibbs);
    if (!unequal) {
      checks.push_back({"steady-state-match", dist <= 1e-8 ? "pass" : "fail",
                        "trace distance to Gibbs = " + aqrm::io::format_full(dist)});
    } else {
      checks.push_back({"steady-state-match", dist > 1e-8 ? "expected-fail" : "fail",
                        "nonequilibrium steady state, trace distance to Gibbs = " +
                            aqrm::io::format_full(dist)});
    }

    // Relaxation toward the steady state from the dressed ground state. The
    // horizon comes from the slowest population eigenmode.
    {
      Eigen::EigenSolver<aqrm::RealMatrix> es(gen.population_rates());
      double slow = std::numeric_limits<double>::infinity();
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double re = -es.eigenvalues()[i].real();
        if (re > 1e-10 * std::max(1.0, max_rate)) slow = std::min(slow, re);
      }
      const double horizon = std::isfinite(slow) ? 25.0 / slow : 0.0;
      if (horizon <= 0) {
        checks.push_back({"relaxation", "fail", "no relaxing population mode found"});
      } else {
        const aqrm::Operator start =
            s.states.col(0) * s.states.col(0).adjoint();
        const aqrm::Operator evolved = aqrm::evolve(gen, start, horizon);
        const double d = aqrm::trace_distance(evolved, rho_ss);
        checks.push_back({"relaxation", d <= 1e-6 ? "pass" : "fail",
                          "trace distance after t = " + aqrm::io::format_full(horizon) +
                              " is " + aqrm::io::format_full(d)});
      }
    }
  }

  // Oracle cross-checks on closed-form states.
  {
    bool ok = true;
    std::string detail;
    {
      const aqrm::HilbertConfig cfg{40};
      const double nbar = 0.5;
      aqrm::Operator thermal = aqrm::Operator::Zero(40, 40);
      double z = 0;
      for (int n = 0; n < 40; ++n) z += std::pow(nbar / (1 + nbar), n);
      for (int n = 0; n < 40; ++n)
        thermal(n, n) = std::pow(nbar / (1 + nbar), n) / z;
      aqrm::Operator joint = aqrm::Operator::Zero(80, 80);
      joint.block(40, 40, 40, 40) = thermal;  // qubit ground x thermal boson
      const auto g2 = aqrm::g2_bare(joint, cfg);
      if (!g2 || std::abs(*g2 - 2.0) > 1e-9) {
        ok = false;
        detail += "thermal g2 != 2; ";
      }
      const double mac2 = aqrm::macroscopicity([&] {
        aqrm::Operator fock2 = aqrm::Operator::Zero(8, 8);
        fock2(2, 2) = 1.0;
        return fock2;
      }());
      if (std::abs(mac2 - 2.0) > 1e-9) {
        ok = false;
        detail += "Fock-2 interference measure != 2; ";
      }
      aqrm::Operator bell = aqrm::Operator::Zero(4, 4);
      const aqrm::HilbertConfig cfg2{2};
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
      v[aqrm::composite_index(aqrm::kExcited, 0, cfg2)] = 1.0 / std::sqrt(2.0);
      v[aqrm::composite_index(aqrm::kGround, 1, cfg2)] = 1.0 / std::sqrt(2.0);
      bell = v * v.adjoint();
      if (std::abs(aqrm::negativity(bell, cfg2) - 0.5) > 1e-9) {
        ok = false;
        detail += "Bell negativity != 1/2; ";
      }
      const double disc = aqrm::discord(bell, cfg2).value;
      if (std::abs(disc - std::log(2.0)) > 1e-6) {
        ok = false;
        detail += "Bell discord != ln 2; ";
      }
    }
    if (detail.empty()) detail = "thermal g2, Fock interference, Bell negativity and discord";
    checks.push_back({"oracle-battery", ok ? "pass" : "fail", detail});
  }

  bool any_fail = false;
  for (const auto& c : checks) {
    std::cout << c.name << ": " << c.status << " (" << c.detail << ")\n";
    if (c.status == "fail") any_fail = true;
  }
  std::cout << (any_fail ? "validate: FAIL\n" : "validate: OK\n");
  return any_fail ? kExitValidation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic quantum Rabi model: spectra, thermal steady states, and "
               "quantum correlation measures"};
  app.require_subcommand(1);

  CommonFlags spectrum_flags, quantify_flags, sweep_flags, validate_flags;

  // spectrum
  double sp_ratio = 0.5;
  std::string sp_swept = "l1";
  double sp_start = 0.0, sp_stop = 4.0;
  int sp_points = 201, sp_levels = 6;
  CLI::App* sp = app.add_subcommand(
      "spectrum", "Tabulate energy gaps E_k - E_0 and parities along a coupling sweep");
  add_model_flags(sp, spectrum_flags);
  sp->add_option("--ratio", sp_ratio, "Fixed ratio of the other coupling to the swept one")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sp->add_option("--swept", sp_swept, "Which coupling the grid drives")
      ->check(CLI::IsMember({"l1", "l2"}))
      ->capture_default_str();
  sp->add_option("--grid-start", sp_start, "First coupling value")->capture_default_str();
  sp->add_option("--grid-stop", sp_stop, "Last coupling value")->capture_default_str();
  sp->add_option("--grid-points", sp_points, "Number of grid points")->capture_default_str();
  sp->add_option("--levels", sp_levels, "Levels per row")->capture_default_str();
  sp->add_option("--workers", spectrum_flags.workers, "Parallel workers")
      ->check(CLI::PositiveNumber);
  add_output_flags(sp, spectrum_flags, false);

  // quantify
  std::string q_dump_state;
  CLI::App* q = app.add_subcommand(
      "quantify", "Evaluate all quantifiers on the thermal state of one parameter point");
  add_model_flags(q, quantify_flags);
  q->add_option("--lambda1", quantify_flags.lambda1, "Rotating coupling")
      ->capture_default_str();
  q->add_option("--lambda2", quantify_flags.lambda2, "Counter-rotating coupling")
      ->capture_default_str();
  q->add_option("--temp", quantify_flags.temp, "Temperature")->capture_default_str();
  q->add_option("--seed", quantify_flags.seed, "Discord optimizer restart seed")
      ->capture_default_str();
  q->add_option("--dump-state", q_dump_state, "Also write the thermal state as JSON");
  add_output_flags(q, quantify_flags, true);

  // sweep
  std::string sw_spec_path;
  double sw_ratio = 0.5;
  std::string sw_swept = "l1";
  double sw_start = 0.0, sw_stop = 4.0;
  int sw_points = 201;
  CLI::App* sw = app.add_subcommand(
      "sweep", "Run a phase-diagram sweep from flags or a JSON specification");
  add_model_flags(sw, sweep_flags);
  CLI::Option* spec_opt =
      sw->add_option("--spec", sw_spec_path, "JSON sweep specification path");
  sw->add_option("--ratio", sw_ratio, "Fixed ratio of the other coupling to the swept one")
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--swept", sw_swept, "Which coupling the grid drives")
      ->check(CLI::IsMember({"l1", "l2"}))
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--grid-start", sw_start, "First coupling value")
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--grid-stop", sw_stop, "Last coupling value")
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--grid-points", sw_points, "Number of grid points")
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--temp", sweep_flags.temp, "Temperature of the 1D sweep")
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--alpha", sweep_flags.alpha, "Bath coupling strength")
      ->capture_default_str();
  sw->add_option("--omega-c", sweep_flags.omega_c, "Bath cutoff frequency (default 50 omega)");
  sw->add_option("--seed", sweep_flags.seed, "Discord optimizer restart seed")
      ->excludes(spec_opt)
      ->capture_default_str();
  sw->add_option("--workers", sweep_flags.workers, "Parallel workers")
      ->check(CLI::PositiveNumber);
  add_output_flags(sw, sweep_flags, true);

  // validate
  double v_temp_qubit = 0.0;
  CLI::App* vd = app.add_subcommand(
      "validate", "Run the built-in verification battery at one parameter point");
  add_model_flags(vd, validate_flags);
  validate_flags.lambda1 = 0.5;
  validate_flags.lambda2 = 0.25;
  vd->add_option("--lambda1", validate_flags.lambda1, "Rotating coupling")
      ->capture_default_str();
  vd->add_option("--lambda2", validate_flags.lambda2, "Counter-rotating coupling")
      ->capture_default_str();
  vd->add_option("--temp", validate_flags.temp, "Bath temperature")->capture_default_str();
  vd->add_option("--temp-qubit", v_temp_qubit,
                 "Qubit bath temperature (differs: nonequilibrium expected-fail case)");
  vd->add_option("--alpha", validate_flags.alpha, "Bath coupling strength (0 skips dissipative checks)")
      ->capture_default_str();
  vd->add_option("--omega-c", validate_flags.omega_c, "Bath cutoff frequency (default 50 omega)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sp->parsed())
      return cmd_spectrum(spectrum_flags, sp_ratio, sp_swept, sp_start, sp_stop, sp_points,
                          sp_levels);
    if (q->parsed()) return cmd_quantify(quantify_flags, q_dump_state);
    if (sw->parsed())
      return cmd_sweep(sweep_flags, sw_spec_path, sw_ratio, sw_swept, sw_start, sw_stop,
                       sw_points);
    if (vd->parsed()) return cmd_validate(validate_flags, v_temp_qubit);
  } catch (const aqrm::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

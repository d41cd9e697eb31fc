// rwalk: command-line front end for first-return computations.
//
// Exit codes: 0 success, 1 tolerance failure, 2 input error or refusal.

#include "returnwalk/errors.hpp"
#include "returnwalk/report_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace rw;
using ojson = nlohmann::ordered_json;

namespace {

struct RunConfig {
  std::string model;
  long n_max = 0;
  std::string grid;
  std::string mode = "float";
  std::uint64_t seed = 1;
  std::string out;
  std::optional<double> tolerance;
  std::uint64_t trials = 100000;
};

GridSpec parse_grid(const std::string& text, int dim) {
  GridSpec g;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      const long m = std::stol(part, &used);
      if (used != part.size() || m < 3) throw std::invalid_argument(part);
      g.sizes.push_back(m);
    } catch (const std::exception&) {
      throw InputError("--grid: '" + text + "' is not of the form M or M1xM2x... with M >= 3");
    }
  }
  if (g.sizes.size() == 1 && dim > 1) g.sizes.assign(static_cast<std::size_t>(dim), g.sizes[0]);
  if (static_cast<int>(g.sizes.size()) != dim)
    throw InputError("--grid: " + std::to_string(g.sizes.size()) + " sizes for a " + std::to_string(dim) + "-d law");
  return g;
}

Arithmetic parse_mode(const std::string& m) {
  if (m == "rational") return Arithmetic::Rational;
  if (m == "float") return Arithmetic::Float;
  throw InputError("--mode: expected 'rational' or 'float'");
}

fs::path out_dir(const RunConfig& cfg) {
  fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("--out: cannot create " + dir.string());
  return dir;
}

RunMeta meta_for(const std::string& command, const StepLaw& law, const RunConfig& cfg) {
  return {command, law.fingerprint(), cfg.mode, cfg.seed};
}

ComputeOptions options_for(const RunConfig& cfg, const StepLaw& law) {
  if (cfg.n_max < 1) throw InputError("--n-max: horizon ≥ 1 required");
  ComputeOptions opt;
  opt.horizon = cfg.n_max;
  opt.mode = parse_mode(cfg.mode);
  if (!cfg.grid.empty()) opt.grid = parse_grid(cfg.grid, law.dim());
  return opt;
}

int cmd_model_validate(const RunConfig& cfg) {
  const StepLaw law = load_law(cfg.model);
  const WalkClass cls = classify(law);
  ojson j = meta_json(meta_for("model validate", law, cfg));
  j["class"] = class_json(law, cls);
  j["law"] = law_to_json(law);
  const auto refusals = theorem_refusals(law, cls);
  j["theorem_applies"] = refusals.empty();
  j["hints"] = refusals;
  std::cout << "aperiodic: " << (cls.aperiodic ? "true" : "false") << "\n"
            << "transient: " << (cls.transient ? "true" : "false") << "\n"
            << "drift_free: " << (cls.drift_free ? "true" : "false") << "\n"
            << "eta: " << cls.eta << "\n";
  for (const auto& h : refusals) std::cout << "note: " << h << "\n";
  if (!cfg.out.empty()) write_json(out_dir(cfg) / "model.json", j);
  return 0;
}

int cmd_compute(const RunConfig& cfg) {
  const StepLaw law = load_law(cfg.model);
  const ComputeResult res = compute_pipeline(law, options_for(cfg, law));
  const RunMeta meta = meta_for("compute", law, cfg);
  const fs::path dir = out_dir(cfg);
  write_u_csv(dir / "u.csv", res.u, meta);
  write_p_csv(dir / "p.csv", res.tau, meta);
  write_json(dir / "summary.json", summary_json(res, meta));
  std::cout << "method: " << to_string(res.choice.method) << " (" << res.choice.reason << ")\n";
  if (res.p) std::cout << "p = " << format_double(res.p->p) << " in [" << res.p->lo << ", " << res.p->hi << "]\n";
  for (const auto& n : res.notes) std::cout << "note: " << n << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const StepLaw law = load_law(cfg.model);
  Tolerances tol;
  if (!law.is_finite()) tol = {0.05, 0.05};
  if (cfg.tolerance) tol = {*cfg.tolerance, *cfg.tolerance};
  const VerifyResult v = verify_theorem(law, options_for(cfg, law), tol);
  const RunMeta meta = meta_for("verify", law, cfg);
  const fs::path dir = out_dir(cfg);
  write_json(dir / "report.json", verify_json(v, tol, meta));
  write_plot_csv(dir / "plot.csv", v, meta);
  std::cout << "ratio limit " << v.report.ratio.limit << " vs (1-p)^2 = " << v.report.target << ", gap "
            << 100 * v.report.ratio_gap << "%\n"
            << "g0 empirical " << v.report.g0_empirical->g0 << " vs predicted " << v.report.g0_theory << ", gap "
            << 100 * v.report.g0_gap << "%\n";
  for (const auto& w : v.warnings) std::cout << "warning: " << w << "\n";
  std::cout << (v.pass() ? "PASS" : "FAIL") << "\n";
  return v.pass() ? 0 : 1;
}

int cmd_oracle(const RunConfig& cfg) {
  const StepLaw law = load_law(cfg.model);
  if (cfg.n_max < 1) throw InputError("--n-max: horizon ≥ 1 required");
  const Arithmetic mode = parse_mode(cfg.mode);
  const long n_max = cfg.n_max;
  const RunMeta meta = meta_for("oracle", law, cfg);

  const TabooTable taboo = taboo_dp(law, n_max, mode);
  const USeq u = mode == Arithmetic::Rational ? u_rational(law, n_max) : u_exact(law, n_max);
  const TauDist tau = invert_renewal(u);
  const MCEstimate mc = mc_paths(law, n_max, cfg.trials, cfg.seed);

  long enum_max = 0;
  if (law.exact())
    while (enum_max < n_max &&
           std::pow(static_cast<double>(law.atoms().size()), static_cast<double>(enum_max + 1)) <= kEnumerationCap)
      ++enum_max;

  bool exact_ok = true;
  long inside = 0, checked = 0;
  ojson rows = ojson::array();
  for (long n = 1; n <= n_max; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    ojson row{{"n", n}};
    if (mode == Arithmetic::Rational) {
      const Rational& pr = (*tau.exact)[nn];
      const Rational& pt = (*taboo.first_return_exact)[nn];
      row["u_renewal"] = format_rational((*u.exact)[nn]);
      row["p_renewal"] = format_rational(pr);
      row["p_taboo"] = format_rational(pt);
      bool eq = pr == pt;
      if (n <= enum_max) {
        const Enumerated e = exact_enumeration(law, n);
        row["u_enum"] = format_rational(e.u);
        row["p_enum"] = format_rational(e.p);
        eq = eq && e.u == (*u.exact)[nn] && e.p == pr;
      }
      row["exact_equal"] = eq;
      exact_ok = exact_ok && eq;
    } else {
      const double diff = std::abs(tau[n] - taboo.first_return[nn]);
      row["u_renewal"] = u[n];
      row["p_renewal"] = tau[n];
      row["p_taboo"] = taboo.first_return[nn];
      row["abs_diff"] = diff;
      row["exact_equal"] = diff <= 1e-12;
      exact_ok = exact_ok && diff <= 1e-12;
    }
    const bool u_in = mc.u_ci[nn].lo <= u[n] && u[n] <= mc.u_ci[nn].hi;
    const bool p_in = mc.p_ci[nn].lo <= tau[n] && tau[n] <= mc.p_ci[nn].hi;
    inside += u_in + p_in;
    checked += 2;
    row["mc_u"] = {{"hits", mc.hits_u[nn]}, {"lo", mc.u_ci[nn].lo}, {"hi", mc.u_ci[nn].hi}, {"contains", u_in}};
    row["mc_p"] = {{"hits", mc.hits_p[nn]}, {"lo", mc.p_ci[nn].lo}, {"hi", mc.p_ci[nn].hi}, {"contains", p_in}};
    rows.push_back(row);
  }
  const double coverage = static_cast<double>(inside) / static_cast<double>(checked);
  const bool mc_ok = coverage >= 0.95;
  ojson j = meta_json(meta);
  j["n_max"] = n_max;
  j["enumeration_max"] = enum_max;
  j["mc"] = mc_json(mc, meta);
  j["rows"] = rows;
  j["exact_chains_agree"] = exact_ok;
  j["mc_coverage"] = coverage;
  j["mc_ok"] = mc_ok;
  write_json(out_dir(cfg) / "oracle.json", j);
  std::cout << "exact chains agree: " << (exact_ok ? "yes" : "no") << "\nMC coverage: " << coverage << "\n";
  return exact_ok && mc_ok ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg) {
  const StepLaw law = load_law(cfg.model);
  if (cfg.n_max < 1) throw InputError("--n-max: horizon ≥ 1 required");
  if (cfg.trials < 1) throw InputError("--trials: must be >= 1");
  const MCEstimate mc = mc_paths(law, cfg.n_max, cfg.trials, cfg.seed);
  const RunMeta meta = meta_for("simulate", law, cfg);
  const fs::path dir = out_dir(cfg);
  write_mc_csv(dir / "mc.csv", mc, meta);
  write_json(dir / "mc.json", mc_json(mc, meta));
  return 0;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool horizon) {
  sub->add_option("--model", cfg.model, "model file (JSON)")->required();
  sub->add_option("--out", cfg.out, "output directory");
  sub->add_option("--seed", cfg.seed, "random seed");
  sub->add_option("--mode", cfg.mode, "rational or float");
  if (horizon) sub->add_option("--n-max", cfg.n_max, "horizon N")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-return distributions of lattice random walks"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* model = app.add_subcommand("model", "model file utilities");
  model->require_subcommand(1);
  auto* validate = model->add_subcommand("validate", "check a model and classify the walk");
  add_common(validate, cfg, false);

  auto* compute = app.add_subcommand("compute", "occupation sequence, first-return law and p");
  add_common(compute, cfg, true);
  compute->add_option("--grid", cfg.grid, "torus size M or M1xM2x...");

  auto* verify = app.add_subcommand("verify", "check the first-return asymptote");
  add_common(verify, cfg, true);
  verify->add_option("--grid", cfg.grid, "torus size M or M1xM2x...");
  verify->add_option("--tolerance", cfg.tolerance, "relative gap allowed for ratio and g0");

  auto* oracle = app.add_subcommand("oracle", "compare exact chains and Monte Carlo");
  add_common(oracle, cfg, true);
  oracle->add_option("--trials", cfg.trials, "Monte Carlo trials");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates of u_n and p_n");
  add_common(simulate, cfg, true);
  simulate->add_option("--trials", cfg.trials, "Monte Carlo trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_model_validate(cfg);
    if (*compute) return cmd_compute(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*oracle) return cmd_oracle(cfg);
    if (*simulate) return cmd_simulate(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

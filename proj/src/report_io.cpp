#include "returnwalk/report_io.hpp"

#include "returnwalk/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rw {

using ojson = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void csv_header(std::ostream& out, const RunMeta& meta) {
  out << "# tool=rwalk " << kToolVersion << "\n# command=" << meta.command << "\n# fingerprint=" << meta.fingerprint
      << "\n# mode=" << meta.mode << "\n# seed=" << meta.seed << "\n";
}

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ojson meta_json(const RunMeta& meta) {
  return {{"tool", "rwalk"},
          {"version", kToolVersion},
          {"command", meta.command},
          {"fingerprint", meta.fingerprint},
          {"mode", meta.mode},
          {"seed", meta.seed}};
}

ojson class_json(const StepLaw& law, const WalkClass& cls) {
  ojson j;
  j["dim"] = law.dim();
  j["family"] = to_string(law.family());
  j["exact"] = law.exact();
  j["aperiodic"] = cls.aperiodic;
  if (cls.mean) j["mean"] = std::vector<double>(cls.mean->data(), cls.mean->data() + cls.mean->size());
  if (cls.covariance) {
    ojson rows = ojson::array();
    for (int r = 0; r < cls.covariance->rows(); ++r) {
      std::vector<double> row;
      for (int c = 0; c < cls.covariance->cols(); ++c) row.push_back((*cls.covariance)(r, c));
      rows.push_back(row);
    }
    j["covariance"] = rows;
  }
  j["alpha"] = cls.alpha;
  j["eta"] = cls.eta;
  j["transient"] = cls.transient;
  j["drift_free"] = cls.drift_free;
  j["nondegenerate"] = cls.nondegenerate;
  return j;
}

ojson extrapolation_json(const Extrapolation& ex) {
  ojson ladder = ojson::array();
  for (std::size_t i = 0; i < ex.ladder.size(); ++i) {
    ojson row{{"n", ex.ladder[i].n}, {"value", ex.ladder[i].value}};
    row["aitken"] = i < ex.trend.size() ? number_or_null(ex.trend[i]) : ojson(nullptr);
    ladder.push_back(row);
  }
  return {{"ladder", ladder},
          {"limit", ex.limit},
          {"top", ex.top},
          {"accelerated", ex.accelerated},
          {"degenerate", ex.degenerate}};
}

ojson summary_json(const ComputeResult& res, const RunMeta& meta) {
  ojson j = meta_json(meta);
  j["horizon"] = res.u.horizon();
  j["method"] = to_string(res.choice.method);
  j["method_reason"] = res.choice.reason;
  if (!res.choice.grid.sizes.empty()) j["grid"] = res.choice.grid.describe();
  double worst = 0.0;
  for (double e : res.u.error) worst = std::max(worst, e);
  j["max_u_error"] = worst;
  j["partial_mass"] = res.tau.partial_mass();
  if (res.sum) {
    j["U"] = {{"total", res.sum->total}, {"tail", res.sum->tail}, {"bound", res.sum->bound}};
    const char* kind = res.tail.kind == TailModel::Kind::Geometric ? "geometric" : "regularly-varying";
    j["tail_model"] = kind;
  }
  if (res.p) j["p"] = {{"value", res.p->p}, {"lo", res.p->lo}, {"hi", res.p->hi}};
  if (res.g0_theory) j["g0_theory"] = *res.g0_theory;
  if (res.plan) j["eta"] = res.plan->eta;
  j["notes"] = res.notes;
  return j;
}

ojson verify_json(const VerifyResult& v, const Tolerances& tol, const RunMeta& meta) {
  ojson j = summary_json(v.compute, meta);
  const auto& r = v.report;
  j["verdicts"] = {{"aperiodic", r.verdicts.aperiodic},
                   {"transient", r.verdicts.transient},
                   {"drift_free", r.verdicts.drift_free},
                   {"nondegenerate", r.verdicts.nondegenerate}};
  j["ratio"] = extrapolation_json(r.ratio);
  j["target"] = r.target;
  j["ratio_gap"] = r.ratio_gap;
  if (r.g0_empirical) j["g0_empirical"] = extrapolation_json(r.g0_empirical->extrapolation);
  j["g0_theory"] = r.g0_theory;
  j["g0_formula"] = v.compute.plan && v.compute.plan->alpha[0] < 2.0
                        ? "Gamma(1+1/alpha)/(pi sigma), sigma^alpha = pi c / (Gamma(1+alpha) sin(pi alpha/2))"
                        : "(2 pi)^(-d/2) det(B)^(-1/2)";
  j["g0_gap"] = r.g0_gap;
  j["corollary_sup"] = r.corollary_sup;
  j["smoothness"] = {{"from", v.smoothness.from},
                     {"to", v.smoothness.to},
                     {"deviation", number_or_null(v.smoothness.deviation)},
                     {"skipped", v.smoothness.skipped}};
  j["tolerance"] = {{"ratio", tol.ratio}, {"g0", tol.g0}};
  j["pass"] = v.pass();
  j["warnings"] = v.warnings;
  return j;
}

ojson mc_json(const MCEstimate& mc, const RunMeta& meta) {
  ojson j = meta_json(meta);
  j["trials"] = mc.trials;
  j["n_max"] = mc.n_max;
  j["interval"] = "wilson-99";
  j["block"] = kTrialBlock;
  return j;
}

void write_u_csv(const std::filesystem::path& path, const USeq& u, const RunMeta& meta) {
  auto out = open_out(path);
  csv_header(out, meta);
  out << "# method=" << to_string(u.method) << "\n";
  out << (u.exact ? "n,u_n,e_n,u_n_exact\n" : "n,u_n,e_n\n");
  for (long n = 0; n <= u.horizon(); ++n) {
    out << n << ',' << format_double(u[n]) << ',' << format_double(u.error[static_cast<std::size_t>(n)]);
    if (u.exact) out << ',' << format_rational((*u.exact)[static_cast<std::size_t>(n)]);
    out << '\n';
  }
}

void write_p_csv(const std::filesystem::path& path, const TauDist& tau, const RunMeta& meta) {
  auto out = open_out(path);
  csv_header(out, meta);
  out << (tau.exact ? "n,p_n,P_n,p_n_exact\n" : "n,p_n,P_n\n");
  const auto cum = tau.cumulative();
  for (long n = 1; n <= tau.horizon(); ++n) {
    out << n << ',' << format_double(tau[n]) << ',' << format_double(cum[static_cast<std::size_t>(n)]);
    if (tau.exact) out << ',' << format_rational((*tau.exact)[static_cast<std::size_t>(n)]);
    out << '\n';
  }
}

void write_plot_csv(const std::filesystem::path& path, const VerifyResult& v, const RunMeta& meta) {
  auto out = open_out(path);
  csv_header(out, meta);
  out << "n,u_n,p_n,C_n_u_n,rho_n,predicted_p_n\n";
  const auto& c = v.compute;
  for (long n = 1; n <= c.u.horizon(); ++n) {
    const double u = c.u[n], p = c.tau[n];
    out << n << ',' << format_double(u) << ',' << format_double(p) << ',' << format_double(c.plan->C(n) * u) << ','
        << (u > 0.0 ? format_double(p / u) : std::string()) << ','
        << format_double(predict_pn(c.p->p, v.report.g0_theory, *c.plan, n)) << '\n';
  }
}

void write_mc_csv(const std::filesystem::path& path, const MCEstimate& mc, const RunMeta& meta) {
  auto out = open_out(path);
  csv_header(out, meta);
  out << "# trials=" << mc.trials << "\n# interval=wilson-99\n";
  out << "n,u_hits,u_hat,u_lo,u_hi,p_hits,p_hat,p_lo,p_hi\n";
  for (long n = 1; n <= mc.n_max; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    out << n << ',' << mc.hits_u[nn] << ',' << format_double(mc.u(n)) << ',' << format_double(mc.u_ci[nn].lo) << ','
        << format_double(mc.u_ci[nn].hi) << ',' << mc.hits_p[nn] << ',' << format_double(mc.p(n)) << ','
        << format_double(mc.p_ci[nn].lo) << ',' << format_double(mc.p_ci[nn].hi) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const ojson& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace rw

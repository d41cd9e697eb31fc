#include "returnwalk/lattice_model.hpp"

#include "returnwalk/asymptotics.hpp"
#include "returnwalk/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace rw {

std::string to_string(Family f) {
  return f == Family::FiniteAtoms ? "finite-atoms" : "symmetric-power-tail";
}

// ---------------------------------------------------------------------------
// Power-tail characteristic function

PowerTailSeries::PowerTailSeries(double alpha) : alpha_(alpha) {
  using std::numbers::pi;
  const double s = 1.0 + alpha;
  c_ = 0.5 / boost::math::zeta(s);
  leading_ = -pi / (2.0 * boost::math::tgamma(1.0 + alpha) * std::sin(pi * alpha / 2.0));
  // Even-power coefficients; with t <= pi each term shrinks roughly by 1/4.
  double fact = 1.0;  // (2j)!
  double pi_pow = 1.0;
  for (int j = 0; j < 80; ++j) {
    if (j > 0) fact *= (2.0 * j - 1.0) * (2.0 * j);
    const double z = boost::math::zeta(s - 2.0 * j);
    const double cj = (j % 2 == 0 ? 1.0 : -1.0) * z / fact;
    coef_.push_back(cj);
    const double term = std::abs(cj) * pi_pow;
    pi_pow *= pi * pi;
    if (j > 4 && term < 1e-20) {
      // Remaining terms are dominated by a geometric series of ratio 1/4 + o(1).
      truncation_bound_ = 2.0 * c_ * term * 2.0;
      break;
    }
  }
}

double PowerTailSeries::operator()(double t) const {
  t = std::abs(t);
  const double x = t * t;
  double acc = 0.0;
  for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) acc = acc * x + *it;
  const double lead = t > 0.0 ? leading_ * std::pow(t, alpha_) : 0.0;
  return 2.0 * c_ * (lead + acc);
}

// ---------------------------------------------------------------------------
// StepLaw

long StepLaw::radius(int r) const {
  if (!is_finite()) throw PreconditionError("power-tail law has unbounded support");
  long a = 0;
  for (const auto& at : atoms_) a = std::max(a, std::labs(at.x[static_cast<std::size_t>(r)]));
  return a;
}

long StepLaw::radius() const {
  long a = 0;
  for (int r = 0; r < dim_; ++r) a = std::max(a, radius(r));
  return a;
}

double StepLaw::prob_at(std::span<const long> x) const {
  if (!is_finite()) {
    const long k = std::labs(x[0]);
    return k == 0 ? 0.0 : tail_c_ * std::pow(static_cast<double>(k), -1.0 - alpha_);
  }
  for (const auto& at : atoms_)
    if (std::equal(at.x.begin(), at.x.end(), x.begin(), x.end())) return at.prob;
  return 0.0;
}

BigInt StepLaw::common_denominator() const {
  if (!exact_) throw PreconditionError("law is not in rational mode");
  BigInt d = 1;
  for (const auto& at : atoms_) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), at.exact->get_den_mpz_t());
  return d;
}

std::string StepLaw::fingerprint() const {
  std::ostringstream os;
  os << "dim=" << dim_ << ";family=" << to_string(family_) << ";";
  char buf[64];
  if (is_finite()) {
    for (const auto& at : atoms_) {
      for (long v : at.x) os << v << ",";
      if (at.exact) {
        os << format_rational(*at.exact);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", at.prob);
        os << buf;
      }
      os << ";";
    }
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", alpha_);
    os << "alpha=" << buf;
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StepLaw validate_law(const RawLaw& raw) {
  if (raw.dim < 1) throw InputError("dim: must be >= 1");
  StepLaw law;
  law.dim_ = raw.dim;
  law.family_ = raw.family;

  if (raw.family == Family::SymmetricPowerTail) {
    if (raw.dim != 1) throw InputError("dim: symmetric-power-tail requires dim = 1");
    if (!(raw.alpha > 0.0 && raw.alpha < 2.0)) throw InputError("alpha: must lie in (0, 2)");
    return make_power_tail(raw.alpha);
  }

  if (raw.atoms.empty()) throw InputError("atoms: empty support");
  bool exact = true;
  for (const auto& a : raw.atoms) exact = exact && std::holds_alternative<Rational>(a.prob);

  std::map<Point, Rational> exact_mass;
  std::map<Point, double> float_mass;
  for (std::size_t i = 0; i < raw.atoms.size(); ++i) {
    const auto& a = raw.atoms[i];
    const std::string where = "atoms[" + std::to_string(i) + "]";
    if (static_cast<int>(a.x.size()) != raw.dim)
      throw InputError(where + ": expected " + std::to_string(raw.dim) + " coordinates");
    if (exact) {
      const Rational& q = std::get<Rational>(a.prob);
      if (q < 0) throw InputError(where + ": negative probability " + format_rational(q));
      exact_mass[a.x] += q;
    } else {
      const double p = std::holds_alternative<double>(a.prob) ? std::get<double>(a.prob)
                                                               : to_double(std::get<Rational>(a.prob));
      if (!(p >= 0.0) || !std::isfinite(p)) throw InputError(where + ": negative or non-finite probability");
      float_mass[a.x] += p;
    }
  }

  if (exact) {
    Rational total = 0;
    for (const auto& [x, q] : exact_mass) total += q;
    if (total != 1) {
      std::ostringstream os;
      os << "atoms: total mass " << format_rational(total) << " (" << to_double(total) << ") is not 1";
      throw InputError(os.str());
    }
    for (const auto& [x, q] : exact_mass)
      if (q > 0) law.atoms_.push_back(Atom{x, to_double(q), q});
  } else {
    double total = 0.0;
    for (const auto& [x, p] : float_mass) total += p;
    if (std::abs(total - 1.0) > 1e-15) {
      std::ostringstream os;
      os.precision(17);
      os << "atoms: total mass " << total << " differs from 1 beyond 1e-15";
      throw InputError(os.str());
    }
    for (const auto& [x, p] : float_mass)
      if (p > 0) law.atoms_.push_back(Atom{x, p / total, std::nullopt});
  }
  if (law.atoms_.empty()) throw InputError("atoms: empty support");
  law.exact_ = exact;
  return law;
}

StepLaw make_power_tail(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InputError("alpha: must lie in (0, 2)");
  StepLaw law;
  law.dim_ = 1;
  law.family_ = Family::SymmetricPowerTail;
  law.alpha_ = alpha;
  law.series_ = std::make_shared<const PowerTailSeries>(alpha);
  law.tail_c_ = law.series_->tail_constant();
  return law;
}

StepLaw simple_walk(int dim) {
  RawLaw raw{dim, Family::FiniteAtoms, {}, 0.0};
  for (int j = 0; j < dim; ++j) {
    for (long s : {1L, -1L}) {
      Point x(static_cast<std::size_t>(dim), 0);
      x[static_cast<std::size_t>(j)] = s;
      raw.atoms.push_back({x, Rational(1, 2 * dim)});
    }
  }
  return validate_law(raw);
}

StepLaw lazy_simple_walk(int dim) { return lazify(simple_walk(dim), Rational(1, 2)); }

StepLaw drifted_walk(const Rational& up) {
  RawLaw raw{1, Family::FiniteAtoms, {{{1}, up}, {{-1}, Rational(1 - up)}}, 0.0};
  return validate_law(raw);
}

std::complex<double> char_fn(const StepLaw& law, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != law.dim())
    throw PreconditionError("char_fn: lambda dimension mismatch");
  if (!law.is_finite()) return {(*law.power_tail())(lambda[0]), 0.0};
  std::complex<double> acc = 0.0;
  for (const auto& at : law.atoms()) {
    double phase = 0.0;
    for (std::size_t r = 0; r < lambda.size(); ++r) phase += lambda[r] * static_cast<double>(at.x[r]);
    acc += at.prob * std::polar(1.0, phase);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Aperiodicity

std::vector<Point> hermite_basis(std::vector<Point> rows, int dim) {
  std::size_t pivot_row = 0;
  for (int col = 0; col < dim && pivot_row < rows.size(); ++col) {
    const auto c = static_cast<std::size_t>(col);
    // Euclid on column entries until at most one nonzero remains below pivot_row.
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t i = pivot_row; i < rows.size(); ++i)
        if (rows[i][c] != 0 && (best == rows.size() || std::labs(rows[i][c]) < std::labs(rows[best][c])))
          best = i;
      if (best == rows.size()) break;
      std::swap(rows[pivot_row], rows[best]);
      bool done = true;
      for (std::size_t i = pivot_row + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        const long q = rows[i][c] / rows[pivot_row][c];
        for (int k = 0; k < dim; ++k) rows[i][static_cast<std::size_t>(k)] -= q * rows[pivot_row][static_cast<std::size_t>(k)];
        if (rows[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (rows[pivot_row][c] == 0) continue;
    if (rows[pivot_row][c] < 0)
      for (auto& v : rows[pivot_row]) v = -v;
    // Reduce entries above the pivot into [0, pivot).
    for (std::size_t i = 0; i < pivot_row; ++i) {
      long q = rows[i][c] / rows[pivot_row][c];
      if (rows[i][c] - q * rows[pivot_row][c] < 0) --q;
      for (int k = 0; k < dim; ++k) rows[i][static_cast<std::size_t>(k)] -= q * rows[pivot_row][static_cast<std::size_t>(k)];
    }
    ++pivot_row;
  }
  rows.resize(pivot_row);
  return rows;
}

bool is_aperiodic(const StepLaw& law) {
  if (!law.is_finite()) return true;  // support contains 1 and 2
  const auto& atoms = law.atoms();
  std::vector<Point> diffs;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    Point d(atoms[i].x.size());
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = atoms[i].x[r] - atoms[0].x[r];
    diffs.push_back(std::move(d));
  }
  const auto basis = hermite_basis(std::move(diffs), law.dim());
  if (static_cast<int>(basis.size()) != law.dim()) return false;
  for (int r = 0; r < law.dim(); ++r)
    if (basis[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)] != 1) return false;
  return true;
}

bool origin_reachable(const StepLaw& law, long n, std::span<const long> modulus) {
  if (n == 0 || !law.is_finite()) return true;
  const auto& atoms = law.atoms();
  std::vector<Point> diffs;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    Point d(atoms[i].x.size());
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = atoms[i].x[r] - atoms[0].x[r];
    diffs.push_back(std::move(d));
  }
  for (std::size_t r = 0; r < modulus.size(); ++r) {
    Point e(atoms[0].x.size(), 0);
    e[r] = modulus[r];
    diffs.push_back(std::move(e));
  }
  const auto basis = hermite_basis(std::move(diffs), law.dim());
  Point v(atoms[0].x.size());
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = n * atoms[0].x[r];
  for (const auto& row : basis) {
    std::size_t c = 0;
    while (row[c] == 0) ++c;
    for (std::size_t k = 0; k < c; ++k)
      if (v[k] != 0) return false;
    if (v[c] % row[c] != 0) return false;
    const long q = v[c] / row[c];
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= q * row[k];
  }
  return std::all_of(v.begin(), v.end(), [](long t) { return t == 0; });
}

// ---------------------------------------------------------------------------
// Classification

std::vector<double> default_indices(const StepLaw& law) {
  if (law.is_finite()) return std::vector<double>(static_cast<std::size_t>(law.dim()), 2.0);
  return {law.alpha()};
}

WalkClass classify(const StepLaw& law) {
  WalkClass cls;
  const int d = law.dim();
  cls.aperiodic = is_aperiodic(law);
  cls.alpha = default_indices(law);
  cls.eta = 0.0;
  for (double a : cls.alpha) cls.eta += 1.0 / a;

  if (law.is_finite()) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    bool zero_mean = true;
    if (law.exact()) {
      for (int r = 0; r < d; ++r) {
        Rational m = 0;
        for (const auto& at : law.atoms()) m += *at.exact * at.x[static_cast<std::size_t>(r)];
        mean[r] = to_double(m);
        zero_mean = zero_mean && m == 0;
      }
    } else {
      for (const auto& at : law.atoms())
        for (int r = 0; r < d; ++r) mean[r] += at.prob * static_cast<double>(at.x[static_cast<std::size_t>(r)]);
      zero_mean = mean.cwiseAbs().maxCoeff() <= 1e-15;
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& at : law.atoms()) {
      Eigen::VectorXd x(d);
      for (int r = 0; r < d; ++r) x[r] = static_cast<double>(at.x[static_cast<std::size_t>(r)]) - mean[r];
      cov += at.prob * x * x.transpose();
    }
    cls.mean = mean;
    cls.covariance = cov;
    cls.drift_free = zero_mean;
    cls.nondegenerate = cov.determinant() > 1e-14;
  } else {
    if (law.alpha() > 1.0) cls.mean = Eigen::VectorXd::Zero(1);
    cls.drift_free = true;
    cls.nondegenerate = true;
  }
  // A nonzero finite mean makes the walk transient by the strong law.
  cls.transient = d >= 3 || !cls.drift_free || cls.eta > 1.0;
  return cls;
}

WalkClass classify(const StepLaw& law, const NormingPlan& plan) {
  const auto natural = default_indices(law);
  if (plan.alpha.size() != natural.size())
    throw PreconditionError("norming plan dimension does not match the law");
  for (std::size_t r = 0; r < natural.size(); ++r)
    if (std::abs(plan.alpha[r] - natural[r]) > 1e-12)
      throw PreconditionError("norming plan index alpha_" + std::to_string(r + 1) +
                              " does not match the " + to_string(law.family()) + " family");
  return classify(law);
}

StepLaw lazify(const StepLaw& law, const Rational& hold) {
  if (!(hold > 0 && hold < 1)) throw PreconditionError("lazify: hold must lie in (0, 1)");
  if (!law.is_finite()) throw PreconditionError("lazify: only finite-atoms laws can be lazified");
  RawLaw raw{law.dim(), Family::FiniteAtoms, {}, 0.0};
  raw.atoms.push_back({Point(static_cast<std::size_t>(law.dim()), 0), hold});
  for (const auto& at : law.atoms()) {
    if (law.exact())
      raw.atoms.push_back({at.x, Rational(*at.exact * (1 - hold))});
    else
      raw.atoms.push_back({at.x, at.prob * (1.0 - to_double(hold))});
  }
  if (!law.exact()) raw.atoms.front().prob = to_double(hold);
  return validate_law(raw);
}

StepLaw lazify(const StepLaw& law, double hold) {
  if (!(hold > 0.0 && hold < 1.0)) throw PreconditionError("lazify: hold must lie in (0, 1)");
  if (law.exact()) return lazify(law, rational_from_double(hold));
  return lazify(law, Rational(hold));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::variant<Rational, double> prob_from_json(const nlohmann::json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_number()) return rational_from_double(v.get<double>());
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
  throw InputError(where + ": probability must be a string or number");
}

}  // namespace

RawLaw law_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("model: top level must be an object");
  RawLaw raw;
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) throw InputError("dim: missing or not an integer");
  raw.dim = doc["dim"].get<int>();
  if (raw.dim < 1) throw InputError("dim: must be >= 1");
  if (!doc.contains("family") || !doc["family"].is_string()) throw InputError("family: missing or not a string");
  const auto fam = doc["family"].get<std::string>();
  if (fam == "finite-atoms") {
    raw.family = Family::FiniteAtoms;
    if (!doc.contains("atoms") || !doc["atoms"].is_array()) throw InputError("atoms: missing or not an array");
    const auto& atoms = doc["atoms"];
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string where = "atoms[" + std::to_string(i) + "]";
      const auto& a = atoms[i];
      if (!a.is_array() || a.size() != static_cast<std::size_t>(raw.dim) + 1)
        throw InputError(where + ": expected " + std::to_string(raw.dim + 1) + " entries (coordinates then probability)");
      RawAtom atom;
      for (int r = 0; r < raw.dim; ++r) {
        const auto& c = a[static_cast<std::size_t>(r)];
        if (!c.is_number_integer()) throw InputError(where + ": coordinate " + std::to_string(r) + " is not an integer");
        atom.x.push_back(c.get<long>());
      }
      atom.prob = prob_from_json(a[static_cast<std::size_t>(raw.dim)], where);
      raw.atoms.push_back(std::move(atom));
    }
  } else if (fam == "symmetric-power-tail") {
    raw.family = Family::SymmetricPowerTail;
    const nlohmann::json* src = &doc;
    if (doc.contains("tail")) src = &doc["tail"];
    if (!src->contains("alpha") || !(*src)["alpha"].is_number()) throw InputError("alpha: missing or not a number");
    raw.alpha = (*src)["alpha"].get<double>();
  } else {
    throw InputError("family: unknown family '" + fam + "'");
  }
  return raw;
}

nlohmann::json law_to_json(const StepLaw& law) {
  nlohmann::json doc;
  doc["dim"] = law.dim();
  doc["family"] = to_string(law.family());
  if (law.is_finite()) {
    auto atoms = nlohmann::json::array();
    for (const auto& at : law.atoms()) {
      auto row = nlohmann::json::array();
      for (long v : at.x) row.push_back(v);
      if (at.exact)
        row.push_back(format_rational(*at.exact));
      else
        row.push_back(at.prob);
      atoms.push_back(std::move(row));
    }
    doc["atoms"] = std::move(atoms);
  } else {
    doc["alpha"] = law.alpha();
  }
  return doc;
}

StepLaw load_law(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("model: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model: parse error: ") + e.what());
  }
  return validate_law(law_from_json(doc));
}

}  // namespace rw

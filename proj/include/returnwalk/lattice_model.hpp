#pragma once

// Step distributions on Z^d and their classification.

#include "returnwalk/rational.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rw {

using Point = std::vector<long>;

enum class Family { FiniteAtoms, SymmetricPowerTail };

std::string to_string(Family f);

struct Atom {
  Point x;
  double prob = 0.0;
  std::optional<Rational> exact;  // set iff the law is in rational mode
};

// Unvalidated description of a law, as read from a model file or built in code.
struct RawAtom {
  Point x;
  std::variant<Rational, double> prob;
};

struct RawLaw {
  int dim = 0;
  Family family = Family::FiniteAtoms;
  std::vector<RawAtom> atoms;
  double alpha = 0.0;  // symmetric-power-tail only
};

class PowerTailSeries;

// A validated probability law for the steps of the walk.
//
// Finite-atoms laws hold a nonempty list of distinct support points sorted
// lexicographically. Symmetric-power-tail laws live on Z (dim 1) with
// P{xi = +-k} = c k^(-1-alpha), k >= 1, and c = 1 / (2 zeta(1+alpha)).
class StepLaw {
 public:
  int dim() const { return dim_; }
  Family family() const { return family_; }
  bool is_finite() const { return family_ == Family::FiniteAtoms; }
  // True when every atom carries an exact rational probability.
  bool exact() const { return exact_; }

  const std::vector<Atom>& atoms() const { return atoms_; }
  double alpha() const { return alpha_; }
  double tail_constant() const { return tail_c_; }

  // max |x_r| over the support; unbounded laws throw PreconditionError.
  long radius(int r) const;
  long radius() const;

  double prob_at(std::span<const long> x) const;

  // Least common denominator of the exact atom probabilities.
  BigInt common_denominator() const;

  // 16 hex digits identifying the law (canonical form hashed with FNV-1a).
  std::string fingerprint() const;

  const PowerTailSeries* power_tail() const { return series_.get(); }

 private:
  friend StepLaw validate_law(const RawLaw& raw);
  friend StepLaw make_power_tail(double alpha);

  int dim_ = 0;
  Family family_ = Family::FiniteAtoms;
  bool exact_ = false;
  std::vector<Atom> atoms_;
  double alpha_ = 0.0;
  double tail_c_ = 0.0;
  std::shared_ptr<const PowerTailSeries> series_;
};

// Small-angle expansion of the power-tail characteristic function
//   phi(t) = 2c Re Li_{1+alpha}(e^{it})
//          = 2c [ A |t|^alpha + sum_j (-1)^j zeta(1+alpha-2j) t^{2j} / (2j)! ],
// with A = -pi / (2 Gamma(1+alpha) sin(pi alpha/2)). Converges for |t| < 2 pi.
class PowerTailSeries {
 public:
  explicit PowerTailSeries(double alpha);

  double operator()(double t) const;
  // Bound on the truncation error of operator() over |t| <= pi.
  double truncation_bound() const { return truncation_bound_; }
  double tail_constant() const { return c_; }
  // sigma^alpha such that 1 - phi(t) ~ sigma^alpha |t|^alpha as t -> 0.
  double scale_power() const { return -2.0 * c_ * leading_; }

 private:
  double alpha_;
  double c_;
  double leading_;
  std::vector<double> coef_;
  double truncation_bound_ = 0.0;
};

StepLaw validate_law(const RawLaw& raw);
StepLaw make_power_tail(double alpha);

// Convenience constructors used throughout tests and the CLI.
StepLaw simple_walk(int dim);           // +-e_j with 1/(2d) each
StepLaw lazy_simple_walk(int dim);      // hold 1/2, +-e_j with 1/(4d) each
StepLaw drifted_walk(const Rational& up);  // d=1, +1 w.p. up, -1 otherwise

std::complex<double> char_fn(const StepLaw& law, std::span<const double> lambda);

bool is_aperiodic(const StepLaw& law);

// False when S_n = 0 is impossible for lattice reasons: S_n always lies in
// n x_0 + L, with L the lattice generated by support differences. With a
// modulus M, the question is asked on the torus (L extended by M_r e_r).
bool origin_reachable(const StepLaw& law, long n, std::span<const long> modulus = {});

// Hermite normal form (row-style, upper triangular, positive pivots) of the
// lattice spanned by the given integer vectors. Rows of zeros are dropped.
std::vector<Point> hermite_basis(std::vector<Point> vectors, int dim);

struct NormingPlan;

struct WalkClass {
  bool aperiodic = false;
  std::optional<Eigen::VectorXd> mean;
  std::optional<Eigen::MatrixXd> covariance;
  std::vector<double> alpha;
  double eta = 0.0;
  bool transient = false;
  bool drift_free = false;
  // det B > 0 for finite variance; always true for the stable family.
  bool nondegenerate = false;
};

// Natural stable indices of the family: 2 per component for finite atoms,
// alpha for the power tail.
std::vector<double> default_indices(const StepLaw& law);

WalkClass classify(const StepLaw& law);
// Throws PreconditionError when the plan's indices do not belong to the law.
WalkClass classify(const StepLaw& law, const NormingPlan& plan);

StepLaw lazify(const StepLaw& law, const Rational& hold);
StepLaw lazify(const StepLaw& law, double hold);

// Model file IO. Errors name the offending field and are InputError.
RawLaw law_from_json(const nlohmann::json& doc);
nlohmann::json law_to_json(const StepLaw& law);
StepLaw load_law(const std::string& path);

}  // namespace rw

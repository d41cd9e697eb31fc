#include "returnwalk/renewal.hpp"

#include "parallel.hpp"
#include "returnwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rw {

double TauDist::partial_mass() const {
  detail::CompensatedSum acc;
  for (std::size_t n = 1; n < values.size(); ++n) acc.add(values[n]);
  return acc.value();
}

std::vector<double> TauDist::cumulative() const {
  std::vector<double> out(values.size(), 0.0);
  detail::CompensatedSum acc;
  for (std::size_t n = 1; n < values.size(); ++n) {
    acc.add(values[n]);
    out[n] = acc.value();
  }
  return out;
}

TauDist make_tau(std::vector<double> p) {
  TauDist t;
  t.values.push_back(0.0);
  t.values.insert(t.values.end(), p.begin(), p.end());
  t.error.assign(t.values.size(), 0.0);
  return t;
}

TauDist make_tau(std::vector<Rational> p) {
  TauDist t;
  std::vector<Rational> exact{Rational(0)};
  exact.insert(exact.end(), p.begin(), p.end());
  for (const auto& q : exact) t.values.push_back(to_double(q));
  t.error.assign(t.values.size(), 0.0);
  t.exact = std::move(exact);
  return t;
}

USeq forward_renewal(const TauDist& p, long horizon) {
  if (horizon < 0) throw PreconditionError("horizon must be >= 0");
  const long avail = p.horizon();
  auto pk = [&](long k) { return k <= avail ? p[k] : 0.0; };
  for (long k = 1; k <= avail; ++k)
    if (p[k] < 0.0) throw PreconditionError("forward_renewal: negative mass p_" + std::to_string(k));
  if (p.partial_mass() > 1.0 + 1e-12) throw PreconditionError("forward_renewal: total mass exceeds 1");

  const auto width = static_cast<std::size_t>(horizon + 1);
  USeq u;
  u.method = UMethod::Convolution;
  u.values.assign(width, 0.0);
  u.error.assign(width, 0.0);
  u.values[0] = 1.0;
  for (long n = 1; n <= horizon; ++n) {
    detail::CompensatedSum acc;
    for (long k = 1; k <= std::min(n, avail); ++k) acc.add(pk(k) * u[n - k]);
    u.values[static_cast<std::size_t>(n)] = acc.value();
  }
  if (p.exact) {
    std::vector<Rational> ex(width, Rational(0));
    ex[0] = 1;
    for (long n = 1; n <= horizon; ++n) {
      Rational s = 0;
      for (long k = 1; k <= std::min(n, avail); ++k)
        s += (*p.exact)[static_cast<std::size_t>(k)] * ex[static_cast<std::size_t>(n - k)];
      ex[static_cast<std::size_t>(n)] = s;
    }
    for (std::size_t n = 0; n < width; ++n) u.values[n] = to_double(ex[n]);
    u.exact = std::move(ex);
    u.method = UMethod::RationalDp;
  }
  return u;
}

TauDist invert_renewal(const USeq& u) {
  if (u.values.empty() || u.values[0] != 1.0) throw PreconditionError("invert_renewal: u_0 must equal 1");
  const long horizon = u.horizon();
  const auto width = static_cast<std::size_t>(horizon + 1);
  TauDist t;
  t.values.assign(width, 0.0);
  t.error.assign(width, 0.0);

  if (u.exact) {
    const auto& ue = *u.exact;
    if (ue[0] != 1) throw PreconditionError("invert_renewal: u_0 must equal 1");
    std::vector<Rational> p(width, Rational(0));
    for (long n = 1; n <= horizon; ++n) {
      Rational s = ue[static_cast<std::size_t>(n)];
      for (long k = 1; k < n; ++k) s -= p[static_cast<std::size_t>(k)] * ue[static_cast<std::size_t>(n - k)];
      if (s < 0) throw InconsistentSequence("invert_renewal: p_" + std::to_string(n) + " < 0 in exact arithmetic");
      p[static_cast<std::size_t>(n)] = s;
      t.values[static_cast<std::size_t>(n)] = to_double(s);
    }
    t.exact = std::move(p);
    return t;
  }

  for (long n = 1; n <= horizon; ++n) {
    detail::CompensatedSum acc;
    acc.add(u[n]);
    double err = u.error[static_cast<std::size_t>(n)];
    for (long k = 1; k < n; ++k) {
      acc.add(-t[k] * u[n - k]);
      err += std::abs(t[k]) * u.error[static_cast<std::size_t>(n - k)] + t.error[static_cast<std::size_t>(k)] * u[n - k];
    }
    double v = acc.value();
    const double tol = 1e-12 + 10.0 * err;
    if (v < -tol)
      throw InconsistentSequence("invert_renewal: p_" + std::to_string(n) + " = " + std::to_string(v) +
                                 " is negative beyond tolerance; u is not a renewal sequence");
    t.values[static_cast<std::size_t>(n)] = std::max(v, 0.0);
    t.error[static_cast<std::size_t>(n)] = err;
  }
  return t;
}

PEstimate estimate_p(const USum& sum) {
  auto map = [](double x) { return x / (1.0 + x); };
  PEstimate e;
  e.p = map(sum.total);
  e.lo = map(std::max(0.0, sum.total - sum.bound));
  e.hi = map(sum.total + sum.bound);
  return e;
}

namespace {

std::vector<double> convolve_truncated(const std::vector<double>& a, const std::vector<double>& b, std::size_t width) {
  std::vector<double> out(width, 0.0);
  for (std::size_t n = 1; n < width; ++n) {
    detail::CompensatedSum acc;
    for (std::size_t k = 1; k < n; ++k) acc.add(a[k] * b[n - k]);
    out[n] = acc.value();
  }
  return out;
}

std::vector<double> shifted(const USeq& u) {
  std::vector<double> base(u.values);
  base[0] = 0.0;
  return base;
}

}  // namespace

std::vector<double> selfconv_power(const USeq& u, int k) {
  if (k < 1) throw PreconditionError("selfconv_power: k must be >= 1");
  const std::vector<double> base = shifted(u);
  std::vector<double> acc = base;
  for (int i = 1; i < k; ++i) acc = convolve_truncated(acc, base, base.size());
  return acc;
}

AlternatingSeries alternating_series_pn(const USeq& u, long n, int max_terms, std::optional<double> total_mass) {
  if (n < 1 || n > u.horizon()) throw PreconditionError("alternating_series_pn: index outside the horizon");
  if (max_terms < 1) throw PreconditionError("alternating_series_pn: need at least one term");
  const auto width = static_cast<std::size_t>(n + 1);
  std::vector<double> base(u.values.begin(), u.values.begin() + static_cast<std::ptrdiff_t>(width));
  base[0] = 0.0;

  AlternatingSeries out;
  double partial_u = 0.0;
  for (std::size_t m = 1; m < width; ++m) partial_u += base[m];
  const double mass = total_mass.value_or(partial_u);
  out.applicable = mass < 1.0;

  const long terms = std::min<long>(n, max_terms);
  std::vector<double> power = base;
  detail::CompensatedSum acc;
  for (long k = 1; k <= terms; ++k) {
    if (k > 1) power = convolve_truncated(power, base, width);
    acc.add((k % 2 == 1 ? 1.0 : -1.0) * power[static_cast<std::size_t>(n)]);
    out.partial.push_back(acc.value());
  }
  out.value = acc.value();
  if (terms < n) {
    power = convolve_truncated(power, base, width);
    out.omitted_term = power[static_cast<std::size_t>(n)];
    out.remainder_bound = partial_u < 1.0 ? std::pow(partial_u, static_cast<double>(terms + 1)) / (1.0 - partial_u)
                                          : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace rw

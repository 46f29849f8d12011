#pragma once

// Model monodromy maps in the log chart y = -ln x.
//
//   PowerMap               x -> C x^nu
//   PerturbedPowerFamily   x -> C x^{L(eps)} + eps (1 + psi(x^{L(eps)}, eps)),
//                          L(eps) = Lambda0 + Lambda1 eps

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "polylab/numerics.hpp"

namespace polylab {

struct PowerMap {
  Real C;
  Real nu;

  PowerMap(Real c, Real n) : C(std::move(c)), nu(std::move(n)) {
    if (!(C > 0)) fail(ErrorKind::precondition, "power map needs C > 0");
    if (!(nu > 0)) fail(ErrorKind::precondition, "power map needs nu > 0");
  }

  /// Attracting fixed point of y -> nu*y - ln C (nu != 1).
  Real fixed_point_log() const {
    if (nu == 1) fail(ErrorKind::precondition, "fixed point undefined for nu = 1");
    return -boost::multiprecision::log(C) / (1 - nu);
  }
};

/// x -> C x^nu as y -> nu*y - ln C.
inline LogValue apply_log(const PowerMap& map, const LogValue& v) {
  if (v.is_zero()) return v;
  return {map.nu * v.y - boost::multiprecision::log(map.C)};
}

/// n-th iterate in closed form: y -> nu^n y - (1-nu^n)/(1-nu) ln C.
/// Negative n gives the inverse iterates.
inline LogValue closed_iterate(const PowerMap& map, const LogValue& v, long n) {
  if (map.nu == 1) fail(ErrorKind::precondition, "closed iterate is degenerate for nu = 1");
  if (n == 0 || v.is_zero()) return v;
  Real nun = boost::multiprecision::pow(map.nu, n);
  return {nun * v.y - (1 - nun) / (1 - map.nu) * boost::multiprecision::log(map.C)};
}

/// Pluggable correction psi(u, eps) with psi(0,0) = 0 and a user-declared
/// uniform bound (not verified).
struct Correction {
  std::string name = "zero";
  std::function<Real(const Real& u, const Real& eps)> eval;  // empty = identically 0
  Real bound = 0;

  bool is_zero() const { return !eval; }
  Real operator()(const Real& u, const Real& eps) const { return eval ? eval(u, eps) : Real(0); }

  static Correction zero() { return {}; }

  /// psi(u, eps) = a u + b eps.
  static Correction linear(Real a, Real b) {
    using boost::multiprecision::abs;
    Correction c;
    c.name = "linear";
    c.bound = abs(a) + abs(b);
    c.eval = [a = std::move(a), b = std::move(b)](const Real& u, const Real& eps) -> Real {
      return a * u + b * eps;
    };
    return c;
  }
};

struct PerturbedPowerFamily {
  Real C;
  Real Lambda0;
  Real Lambda1 = 0;
  Correction psi;

  PerturbedPowerFamily(Real c, Real l0, Real l1 = 0, Correction p = Correction::zero())
      : C(std::move(c)), Lambda0(std::move(l0)), Lambda1(std::move(l1)), psi(std::move(p)) {
    if (!(C > 0)) fail(ErrorKind::precondition, "family needs C > 0");
    if (!(Lambda0 > 0 && Lambda0 < 1)) fail(ErrorKind::precondition, "family needs Lambda0 in (0,1)");
  }

  Real Lambda(const Real& eps) const { return Lambda0 + Lambda1 * eps; }

  bool is_model_case() const { return psi.is_zero() && Lambda1 == 0; }
};

namespace detail {

inline Real correction_at(const PerturbedPowerFamily& fam, const Real& u, const Real& eps) {
  if (fam.psi.is_zero()) return 0;
  Real v = fam.psi(u, eps);
  if (!(v > -1)) fail(ErrorKind::model_violation, "psi <= -1 makes the eps-term nonpositive");
  return v;
}

}  // namespace detail

/// One step of f_eps in the log chart, via neg_log_add of the two terms.
inline LogValue apply_family_log(const PerturbedPowerFamily& fam, const DoubleLogValue& eps_z,
                                 const LogValue& v) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::log1p;
  const Real eps = eps_z.eps();
  const Real lam = fam.Lambda(eps);
  if (!(lam > 0)) fail(ErrorKind::model_violation, "Lambda(eps) must stay positive");

  LogValue power = v.is_zero() ? LogValue::zero() : LogValue{lam * v.y - log(fam.C)};
  if (eps_z.is_unperturbed()) return power;

  Real u = v.is_zero() ? Real(0) : Real(exp(-lam * v.y));
  Real corr = detail::correction_at(fam, u, eps);
  LogValue shift{eps_z.neg_log_eps() - log1p(corr)};
  return neg_log_add(power, shift);
}

/// f_eps at one fixed eps with the eps-dependent constants evaluated once;
/// same results as apply_family_log, for long orbits.
class FamilyAtEps {
 public:
  FamilyAtEps(const PerturbedPowerFamily& fam, const DoubleLogValue& eps_z)
      : fam_(fam), unperturbed_(eps_z.is_unperturbed()) {
    using boost::multiprecision::exp;
    using boost::multiprecision::log;
    neg_log_eps_ = eps_z.neg_log_eps();
    eps_ = unperturbed_ ? Real(0) : Real(exp(-neg_log_eps_));
    lam_ = fam.Lambda(eps_);
    if (!(lam_ > 0)) fail(ErrorKind::model_violation, "Lambda(eps) must stay positive");
    lnC_ = log(fam.C);
  }

  LogValue operator()(const LogValue& v) const {
    using boost::multiprecision::exp;
    using boost::multiprecision::log1p;
    LogValue power = v.is_zero() ? LogValue::zero() : LogValue{lam_ * v.y - lnC_};
    if (unperturbed_) return power;
    if (fam_.psi.is_zero()) return neg_log_add(power, {neg_log_eps_});
    Real u = v.is_zero() ? Real(0) : Real(exp(-lam_ * v.y));
    Real corr = detail::correction_at(fam_, u, eps_);
    return neg_log_add(power, {neg_log_eps_ - log1p(corr)});
  }

 private:
  const PerturbedPowerFamily& fam_;
  bool unperturbed_;
  Real neg_log_eps_, eps_, lam_, lnC_;
};

/// ln( f_eps(x) / (C x^Lambda0) ) evaluated without cancellation, so that
/// sandwich ratios stay resolvable when eps^(1-Lambda) is far below the
/// working epsilon.
inline Real relative_excess(const PerturbedPowerFamily& fam, const DoubleLogValue& eps_z,
                            const LogValue& v) {
  using boost::multiprecision::exp;
  using boost::multiprecision::expm1;
  using boost::multiprecision::log;
  using boost::multiprecision::log1p;
  if (!is_finite(v.y)) fail(ErrorKind::precondition, "relative excess needs x > 0");
  if (eps_z.is_unperturbed()) return 0;
  const Real eps = eps_z.eps();
  const Real lam = fam.Lambda(eps);
  if (!(lam > 0)) fail(ErrorKind::model_violation, "Lambda(eps) must stay positive");
  Real drift = fam.Lambda1 == 0 ? Real(0) : Real(expm1(-fam.Lambda1 * eps * v.y));
  Real corr = detail::correction_at(fam, exp(-lam * v.y), eps);
  Real lift = exp(-eps_z.neg_log_eps() + log1p(corr) - log(fam.C) + fam.Lambda0 * v.y);
  return log1p(drift + lift);
}

struct SandwichBounds {
  Real k;
  Real x0;

  SandwichBounds(Real kk, Real x) : k(std::move(kk)), x0(std::move(x)) {
    if (!(k > 0)) fail(ErrorKind::precondition, "sandwich needs k > 0");
    if (!(x0 > 0 && x0 < 1)) fail(ErrorKind::precondition, "sandwich needs x0 in (0,1)");
  }
};

/// Sampling plan: for each eps, `points` x values strictly inside (eps, x_hi),
/// or (eps/2, x_hi) with `half_eps_domain`, log-spaced and refined near the
/// small-x end.
struct SandwichGrid {
  std::vector<DoubleLogValue> eps;
  std::size_t points = 64;
  Real x_hi;
  bool half_eps_domain = false;
};

/// eps log-spaced over [lo, hi] (both in (0,1)), returned in the double-log chart.
inline std::vector<DoubleLogValue> log_spaced_eps(const Real& lo, const Real& hi, std::size_t count) {
  using boost::multiprecision::log;
  std::vector<DoubleLogValue> out;
  Real a = log(lo), b = log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    Real t = count == 1 ? Real(0) : Real(Real(i) / Real(count - 1));
    out.push_back({log(-(a + (b - a) * t))});
  }
  return out;
}

struct SandwichRow {
  DoubleLogValue eps;
  Real k_fit;         // max_x |f/x^L - C|
  Real k_normalized;  // k_fit / eps^(1-L)
  Real max_excess;    // max_x |f/x^L - C| / (k eps^(1-L))
};

struct SandwichReport {
  std::vector<SandwichRow> rows;
  Real k_empirical;               // max over eps of k_normalized
  Real k_ratio;                   // max/min of k_normalized over eps
  Real max_normalized_violation;  // max over points; >= 1 means a violation
  std::size_t violations = 0;
  bool passed = false;
};

namespace detail {

// Half the samples are evenly spaced in y on (y_top, y_end); the rest sit at
// geometrically growing offsets from y_end, so the region next to the small-x
// end stays resolved even when the span is astronomically wide.
inline std::vector<Real> sample_logs(const Real& y_top, const Real& y_end, std::size_t points) {
  using boost::multiprecision::pow;
  std::vector<Real> ys;
  const Real span = y_end - y_top;
  const std::size_t even = (points + 1) / 2;
  for (std::size_t i = 0; i < even; ++i) ys.push_back(y_top + span * (Real(i + 1) / Real(even + 1)));
  const std::size_t geo = points - even;
  const Real first = Real(1) / 1024;
  if (geo > 0 && first < span) {
    Real ratio = geo == 1 ? Real(1) : Real(pow(span / 2 / first, Real(1) / Real(geo - 1)));
    Real off = first;
    for (std::size_t i = 0; i < geo; ++i, off *= ratio) {
      if (off >= span) break;
      ys.push_back(y_end - off);
    }
  }
  return ys;
}

}  // namespace detail

/// Checks (C - k eps^(1-L)) x^L < f_eps(x) < (C + k eps^(1-L)) x^L on the grid,
/// with L = Lambda0, and fits the smallest k per eps.
inline SandwichReport sandwich_check(const PerturbedPowerFamily& fam, const SandwichBounds& bounds,
                                     const SandwichGrid& grid) {
  using boost::multiprecision::abs;
  using boost::multiprecision::exp;
  using boost::multiprecision::expm1;
  using boost::multiprecision::log;
  if (grid.eps.empty() || grid.points == 0) fail(ErrorKind::precondition, "empty sandwich grid");
  if (!(grid.x_hi > 0 && grid.x_hi <= bounds.x0))
    fail(ErrorKind::precondition, "grid x_hi must lie in (0, x0]");

  const Real y_top = -log(grid.x_hi);
  const Real one_minus = 1 - fam.Lambda0;
  SandwichReport rep;
  rep.max_normalized_violation = 0;
  Real k_min, k_max;
  bool first = true;

  for (const auto& ez : grid.eps) {
    if (ez.is_unperturbed()) fail(ErrorKind::precondition, "sandwich needs eps > 0");
    Real y_eps = ez.neg_log_eps();
    if (grid.half_eps_domain) y_eps += ln2();
    if (!(y_eps > y_top)) fail(ErrorKind::precondition, "grid lower end must lie below x_hi");

    // ln eps^(1-L)
    const Real ln_scale = -one_minus * ez.neg_log_eps();
    Real worst = 0;
    for (const Real& yv : detail::sample_logs(y_top, y_eps, grid.points)) {
      LogValue y{yv};
      Real excess = relative_excess(fam, ez, y);
      Real dev = abs(fam.C * expm1(excess));  // |f/x^L - C|
      if (dev > 0) {
        Real normalized = exp(log(dev) - ln_scale);
        if (normalized > worst) worst = normalized;
      }
    }
    SandwichRow row{ez, worst * exp(ln_scale), worst, worst / bounds.k};
    if (row.max_excess >= 1) ++rep.violations;
    if (row.max_excess > rep.max_normalized_violation) rep.max_normalized_violation = row.max_excess;
    if (first || worst > k_max) k_max = worst;
    if (first || worst < k_min) k_min = worst;
    first = false;
    rep.rows.push_back(std::move(row));
  }
  rep.k_empirical = k_max;
  rep.k_ratio = k_min > 0 ? Real(k_max / k_min) : infinity();
  rep.passed = rep.violations == 0;
  return rep;
}

}  // namespace polylab

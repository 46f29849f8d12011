#pragma once

// Separatrix connections f_eps^{n+1}(0) = B(eps) and their double-log asymptotics
//
//   z_n = -n ln Lambda + beta + theta Lambda^n + o(Lambda^n).

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polylab/monodromy.hpp"

namespace polylab {

struct ConnectionProblem {
  PerturbedPowerFamily family;
  Real B0;
  Real B1 = 0;

  ConnectionProblem(PerturbedPowerFamily f, Real b0, Real b1 = 0)
      : family(std::move(f)), B0(std::move(b0)), B1(std::move(b1)) {
    if (!(B0 > 0 && B0 < 1)) fail(ErrorKind::precondition, "connection needs B0 in (0,1)");
  }

  /// -ln B(eps), B(eps) = B0 + B1 eps.
  Real neg_log_B(const DoubleLogValue& eps_z) const {
    using boost::multiprecision::log;
    using boost::multiprecision::log1p;
    if (eps_z.is_unperturbed() || B1 == 0) return -log(B0);
    Real rel = B1 * eps_z.eps() / B0;
    if (!(rel > -1)) fail(ErrorKind::model_violation, "B(eps) must stay positive");
    return -log(B0) - log1p(rel);
  }
};

/// -n ln Lambda + beta + theta Lambda^n.
struct AsymptoticModel {
  Real Lambda;
  Real beta;
  Real theta;

  Real predict(long n) const {
    using boost::multiprecision::log;
    using boost::multiprecision::pow;
    return -Real(n) * log(Lambda) + beta + theta * pow(Lambda, n);
  }
};

/// beta = ln( ln C/(1-nu) - ln B ).
inline Real beta(const Real& C, const Real& nu, const Real& B) {
  using boost::multiprecision::log;
  if (nu == 1) fail(ErrorKind::precondition, "beta needs nu != 1");
  if (!(C > 0) || !(B > 0)) fail(ErrorKind::precondition, "beta needs C, B > 0");
  Real arg = log(C) / (1 - nu) - log(B);
  if (!(arg > 0)) fail(ErrorKind::domain, "ln C/(1-nu) - ln B must be positive");
  return log(arg);
}

/// theta = -e^{-beta} ln C / (1 - Lambda).
inline Real theta(const Real& C, const Real& Lambda, const Real& B) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  return -exp(-beta(C, Lambda, B)) * log(C) / (1 - Lambda);
}

/// The same coefficient written through c = ln C/(1-Lambda): -c / (c - ln B).
inline Real theta_from_mark(const Real& C, const Real& Lambda, const Real& B) {
  using boost::multiprecision::log;
  beta(C, Lambda, B);  // domain check
  Real c = log(C) / (1 - Lambda);
  return -c / (c - log(B));
}

inline AsymptoticModel model_for(const ConnectionProblem& p) {
  const Real& L = p.family.Lambda0;
  return {L, beta(p.family.C, L, p.B0), theta(p.family.C, L, p.B0)};
}

struct SolverConfig {
  std::optional<Real> tol;  // default: working tolerance
  Real initial_half_width = 1;
  unsigned max_doublings = 60;
  unsigned max_iterations = 4096;
};

struct ConnectionRoot {
  long n = 0;
  DoubleLogValue z;
  Real bracket_width;
  Real residual;
  unsigned iterations = 0;
};

/// y_n(w) + ln B(eps): log-chart offset of f^{n+1}(0) from B at z = w.
/// Increasing in w for an admissible family.
inline Real connection_residual(const ConnectionProblem& p, long n, const Real& w) {
  DoubleLogValue ez{w};
  FamilyAtEps step(p.family, ez);
  LogValue y = step(LogValue::zero());
  for (long j = 0; j < n; ++j) y = step(y);
  return y.y - p.neg_log_B(ez);
}

/// Bisection in the double-log chart, bracketed around the asymptotic prediction.
inline ConnectionRoot solve_connection(const ConnectionProblem& p, long n, const SolverConfig& cfg = {}) {
  if (n < 0) fail(ErrorKind::precondition, "connection index must be nonnegative");
  const Real tol = cfg.tol ? *cfg.tol : working_tol();
  const Real centre = model_for(p).predict(n);
  Real h = cfg.initial_half_width;
  Real lo = centre - h, hi = centre + h;
  Real r_lo = connection_residual(p, n, lo);
  Real r_hi = connection_residual(p, n, hi);
  unsigned doublings = 0;
  while (!(r_lo <= 0 && r_hi >= 0)) {
    if (r_lo > r_hi) fail(ErrorKind::model_violation, "connection residual is not increasing");
    if (++doublings > cfg.max_doublings) fail(ErrorKind::bracket, "no sign change around the prediction");
    h *= 2;
    if (r_lo > 0) {
      lo = centre - h;
      r_lo = connection_residual(p, n, lo);
    }
    if (r_hi < 0) {
      hi = centre + h;
      r_hi = connection_residual(p, n, hi);
    }
  }

  ConnectionRoot root;
  root.n = n;
  unsigned it = 0;
  while (hi - lo > tol && r_lo != 0 && r_hi != 0) {
    if (++it > cfg.max_iterations) fail(ErrorKind::bracket, "bisection iteration cap reached");
    Real mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    Real r = connection_residual(p, n, mid);
    if (r < r_lo || r > r_hi) fail(ErrorKind::model_violation, "connection residual is not monotone");
    if (r < 0) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
      r_hi = r;
    }
  }
  if (r_lo == 0) hi = lo;
  if (r_hi == 0) lo = hi;
  root.z = {(lo + hi) / 2};
  root.bracket_width = hi - lo;
  root.residual = connection_residual(p, n, root.z.z);
  root.iterations = it;
  return root;
}

struct ConnectionSequence {
  std::vector<ConnectionRoot> entries;  // consecutive n from n_first
};

/// Roots for n = n_first .. n_last, checked to increase strictly.
inline ConnectionSequence generate_sequence(const ConnectionProblem& p, long n_first, long n_last,
                                            const SolverConfig& cfg = {}) {
  if (n_first < 0 || n_last < n_first) fail(ErrorKind::precondition, "bad connection index range");
  ConnectionSequence seq;
  for (long n = n_first; n <= n_last; ++n) {
    seq.entries.push_back(solve_connection(p, n, cfg));
    if (seq.entries.size() > 1 && !(seq.entries.back().z.z > seq.entries[seq.entries.size() - 2].z.z))
      fail(ErrorKind::model_violation, "connection sequence is not increasing");
  }
  return seq;
}

struct ResidualRow {
  long n;
  Real z;
  Real predicted;
  Real residual;             // z - predicted
  Real normalized_residual;  // residual / Lambda^n
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  bool consistent = false;
  std::string reason;
};

/// Compares a sequence with the asymptotic model.  The verdict requires the
/// normalized residual to shrink over the last third of the indices, or the
/// residual to sit at the solver floor (64 tol |z|) there.
inline ResidualReport residual_analysis(const std::vector<std::pair<long, Real>>& seq, const AsymptoticModel& m) {
  using boost::multiprecision::abs;
  using boost::multiprecision::pow;
  if (seq.size() < 8) fail(ErrorKind::insufficient_data, "residual analysis needs at least 8 terms");
  ResidualReport rep;
  std::vector<bool> at_floor;
  for (const auto& [n, z] : seq) {
    Real pred = m.predict(n);
    Real ln = pow(m.Lambda, n);
    ResidualRow row{n, z, pred, z - pred, (z - pred) / ln};
    Real zmax = abs(z) > 1 ? Real(abs(z)) : Real(1);
    at_floor.push_back(abs(row.residual) <= 64 * working_tol() * zmax);
    rep.rows.push_back(std::move(row));
  }
  const std::size_t start = rep.rows.size() - std::max<std::size_t>(3, rep.rows.size() / 3);
  bool all_floor = true;
  for (std::size_t i = start; i < rep.rows.size(); ++i) all_floor = all_floor && at_floor[i];
  if (all_floor) {
    rep.consistent = true;
    rep.reason = "residuals at rounding floor";
    return rep;
  }
  for (std::size_t i = start + 1; i < rep.rows.size(); ++i) {
    if (at_floor[i]) continue;
    if (abs(rep.rows[i].normalized_residual) > abs(rep.rows[i - 1].normalized_residual)) {
      rep.consistent = false;
      rep.reason = "normalized residual grows at n = " + std::to_string(rep.rows[i].n);
      return rep;
    }
  }
  rep.consistent = true;
  rep.reason = "normalized residual decreasing";
  return rep;
}

inline std::vector<std::pair<long, Real>> as_pairs(const ConnectionSequence& s) {
  std::vector<std::pair<long, Real>> out;
  for (const auto& e : s.entries) out.emplace_back(e.n, e.z.z);
  return out;
}

struct RecoveredModel {
  AsymptoticModel model;
  bool theta_estimated = false;  // false: fit failure, theta unknown
  bool theta_zero = false;       // second differences below the noise floor
  std::string note;
};

/// Recovers (Lambda, beta, theta) from consecutive terms z_n.  Lambda comes
/// from the ratio of successive second differences, then beta and theta from
/// a least-squares fit of z_n + n ln Lambda against Lambda^n on the tail half.
inline RecoveredModel recover_parameters(const std::vector<std::pair<long, Real>>& seq) {
  using boost::multiprecision::abs;
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::pow;
  if (seq.size() < 10) fail(ErrorKind::insufficient_data, "parameter recovery needs at least 10 terms");
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (seq[i].first != seq[i - 1].first + 1) fail(ErrorKind::precondition, "indices must be consecutive");

  const std::size_t N = seq.size();
  Real zmax = 1;
  for (const auto& e : seq)
    if (abs(e.second) > zmax) zmax = abs(e.second);
  const Real noise = 64 * working_tol() * zmax;

  std::vector<Real> d, e;
  for (std::size_t i = 0; i + 1 < N; ++i) d.push_back(seq[i + 1].second - seq[i].second);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) e.push_back(d[i + 1] - d[i]);

  RecoveredModel out;
  auto fit_line = [&](const Real& slope) {
    Real acc = 0;
    std::size_t from = N / 2;
    for (std::size_t i = from; i < N; ++i) acc += seq[i].second - slope * seq[i].first;
    return Real(acc / Real(N - from));
  };

  // Ratios where both second differences carry signal well above the floor.
  std::vector<Real> ratios;
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    if (abs(e[i]) > 1024 * noise && abs(e[i + 1]) > 1024 * noise) ratios.push_back(e[i + 1] / e[i]);

  bool tail_flat = true;
  for (std::size_t i = e.size() / 2; i < e.size(); ++i) tail_flat = tail_flat && abs(e[i]) <= 1024 * noise;

  if (ratios.size() < 2 || tail_flat) {
    Real slope = d.back();
    out.model = {exp(-slope), fit_line(slope), Real(0)};
    out.theta_zero = true;
    out.theta_estimated = true;
    out.note = "second differences at noise floor; theta = 0";
    return out;
  }

  const Real& r_last = ratios.back();
  const Real& r_prev = ratios[ratios.size() - 2];
  bool geometric = r_last > 0 && r_last < 1 && r_prev > 0 && r_prev < 1 && abs(r_last - r_prev) <= r_last / 10;
  if (!geometric) {
    Real slope = d.back();
    out.model = {exp(-slope), fit_line(slope), Real(0)};
    out.theta_estimated = false;
    out.note = "second differences are not geometric; fit failure";
    return out;
  }

  const Real L = r_last;
  const Real a = -log(L);
  // least squares v = beta + theta t on the tail half, v = z_n + n ln L, t = L^n
  std::size_t from = N / 2;
  Real st = 0, sv = 0, stt = 0, stv = 0;
  for (std::size_t i = from; i < N; ++i) {
    Real t = pow(L, seq[i].first);
    Real v = seq[i].second - a * seq[i].first;
    st += t;
    sv += v;
    stt += t * t;
    stv += t * v;
  }
  Real cnt = Real(N - from);
  Real den = cnt * stt - st * st;
  Real th = (cnt * stv - st * sv) / den;
  Real be = (sv - th * st) / cnt;
  out.model = {L, be, th};
  out.theta_estimated = true;
  out.note = "geometric second differences";
  return out;
}

struct StraddleRow {
  long n = 0;
  Real z;
  Real z_delta;           // ln(-ln delta_n)
  Real z_mu;              // ln(-ln mu_n)
  Real margin_lower;      // z - z_delta
  Real margin_upper;      // z_mu - z
  Real width;             // z_mu - z_delta
  Real normalized_margin; // min(margin) / width
  Real k_fit;
  Real identity_gap;      // |z - reconstruction from the orbit identity|
  bool strict = false;
};

struct StraddleConfig {
  std::size_t sandwich_points = 96;
  Real k_slack = 1;  // multiplies the fitted k
};

namespace detail {

// Orbit data at eps = e^{-e^w}: y_0 and P = sum_j Lambda^{n-1-j} t_j with
// t_j = ln(f(x_j) / (C x_j^Lambda)); exact relation
//   Lambda^n y_0 = y_n + S_n ln C + P,   S_n = (1 - Lambda^n)/(1 - Lambda).
struct OrbitDecomposition {
  Real y0;
  Real yn;
  Real P;
};

inline OrbitDecomposition decompose_orbit(const ConnectionProblem& p, long n, const DoubleLogValue& ez) {
  const PerturbedPowerFamily& fam = p.family;
  OrbitDecomposition out;
  LogValue y = apply_family_log(fam, ez, LogValue::zero());
  out.y0 = y.y;
  out.P = 0;
  for (long j = 0; j < n; ++j) {
    out.P = fam.Lambda0 * out.P + relative_excess(fam, ez, y);
    y = apply_family_log(fam, ez, y);
  }
  out.yn = y.y;
  return out;
}

}  // namespace detail

/// Verifies ln(-ln delta_n) < z_n < ln(-ln mu_n) for the sandwich bounds with
/// k fitted on (eps/2, B0).  Margins use the orbit relation above, so they are
/// relative quantities independent of the solver tolerance.
inline StraddleRow straddle_check(const ConnectionProblem& p, const ConnectionRoot& root,
                                  const StraddleConfig& cfg = {}) {
  using boost::multiprecision::abs;
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::log1p;
  using boost::multiprecision::pow;
  const PerturbedPowerFamily& fam = p.family;
  const Real& L = fam.Lambda0;
  const long n = root.n;
  const DoubleLogValue& ez = root.z;

  SandwichGrid grid;
  grid.eps = {ez};
  grid.points = cfg.sandwich_points;
  grid.x_hi = p.B0;
  grid.half_eps_domain = true;
  SandwichReport sw = sandwich_check(fam, SandwichBounds(Real(1), p.B0), grid);
  Real k = sw.k_empirical * cfg.k_slack;

  const Real lnC = log(fam.C);
  const Real Ln = pow(L, n);
  const Real S = (1 - Ln) / (1 - L);
  const Real e1 = exp(log(k) - (1 - L) * ez.neg_log_eps() - lnC);  // k eps^(1-L) / C
  if (!(e1 < 1)) fail(ErrorKind::domain, "sandwich lower bound C - k eps^(1-L) is not positive");
  const Real G = S * log1p(-e1);
  const Real H = S * log1p(e1);
  const Real a = p.neg_log_B(ez) + S * lnC;
  const auto orbit = detail::decompose_orbit(p, n, ez);
  const Real nlL = -Real(n) * log(L);

  StraddleRow row;
  row.n = n;
  row.z = log(orbit.y0);
  row.k_fit = k;
  row.z_delta = nlL + log(a + G);
  row.z_mu = nlL + log(a + H);
  row.margin_lower = log1p((orbit.P - G) / (a + G));
  row.margin_upper = log1p((H - orbit.P) / (a + orbit.P));
  row.width = log1p((H - G) / (a + G));
  Real m = row.margin_lower < row.margin_upper ? row.margin_lower : row.margin_upper;
  row.normalized_margin = m / row.width;
  row.identity_gap = abs(row.z - (nlL + log(a + orbit.P)));
  row.strict = row.margin_lower > 0 && row.margin_upper > 0;
  return row;
}

}  // namespace polylab

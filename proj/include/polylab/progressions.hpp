#pragma once

// Pairs of (perturbed) arithmetic progressions and the interleaving words
// they generate.  For a pair x_n = s1 n + f1, y_m = s2 n + f2 the invariants
// are the density A = s1/s2 and the offset tau = (f1 - f2)/s2.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polylab/numerics.hpp"

namespace polylab {

struct ArithmeticProgression {
  Real step;
  Real free;

  Real value(long n) const { return step * n + free; }
};

/// step n + free + coeff base^n + remainder(n).
struct PerturbedProgression {
  Real step;
  Real free;
  Real coeff = 0;
  Real base = 0;
  std::function<Real(long)> remainder;  // empty = 0

  Real value(long n) const {
    Real v = step * n + free;
    if (coeff != 0) v += coeff * boost::multiprecision::pow(base, n);
    if (remainder) v += remainder(n);
    return v;
  }

  /// value(n) - (step n + free)
  Real perturbation(long n) const {
    Real v = 0;
    if (coeff != 0) v += coeff * boost::multiprecision::pow(base, n);
    if (remainder) v += remainder(n);
    return v;
  }

  ArithmeticProgression linear_part() const { return {step, free}; }
};

struct PairInvariants {
  Real A;
  Real tau;
};

template <class P1, class P2>
PairInvariants pair_invariants(const P1& x, const P2& y) {
  if (!(x.step > 0) || !(y.step > 0)) fail(ErrorKind::precondition, "progression steps must be positive");
  return {x.step / y.step, (x.free - y.free) / y.step};
}

/// tau1 - tau2 = A s + p; the order-preserving reindexing is
/// x_n <-> x~_{n+s}, y_m <-> y~_{m-p}.
struct ShiftPair {
  long s = 0;
  long p = 0;
};

struct EquivalenceSearch {
  long max_shift = 64;
  std::optional<Real> tol;  // default: working tolerance
  std::int64_t q_max = 1000000;
};

struct EquivalenceResult {
  std::optional<ShiftPair> shift;
  Real density_gap;    // |A1 - A2|
  Real best_residual;  // min over s of |tau1 - tau2 - A s - p|
  bool A_irrational = false;
};

/// Operational irrationality: no continued-fraction convergent with
/// denominator <= q_max approximates A to within tol.
inline bool operationally_irrational(const Real& A, std::int64_t q_max, const Real& tol) {
  using boost::multiprecision::abs;
  using boost::multiprecision::floor;
  Real x = A;
  // convergents h/k
  Real h_prev = 1, h = floor(x);
  Real k_prev = 0, k = 1;
  Real frac = x - floor(x);
  for (int it = 0; it < 200; ++it) {
    if (abs(A - h / k) <= tol) return false;
    if (frac == 0) return false;
    x = 1 / frac;
    Real a = floor(x);
    frac = x - a;
    Real h_next = a * h + h_prev, k_next = a * k + k_prev;
    if (k_next > Real(q_max)) return true;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return true;
}

/// Finds the unique (s, p) with |s| <= max_shift and tau1 - tau2 = A s + p.
inline EquivalenceResult equivalent_pairs(const PairInvariants& a, const PairInvariants& b,
                                          const EquivalenceSearch& cfg = {}) {
  using boost::multiprecision::abs;
  using boost::multiprecision::round;
  const Real tol = cfg.tol ? *cfg.tol : working_tol();
  EquivalenceResult out;
  out.density_gap = abs(a.A - b.A);
  out.A_irrational = operationally_irrational(a.A, cfg.q_max, tol);
  out.best_residual = infinity();
  if (!(out.density_gap < tol)) return out;

  const Real dt = a.tau - b.tau;
  std::vector<ShiftPair> hits;
  for (long s = -cfg.max_shift; s <= cfg.max_shift; ++s) {
    Real rest = dt - a.A * s;
    Real p = round(rest);
    Real res = abs(rest - p);
    if (res < out.best_residual) out.best_residual = res;
    if (res < tol) hits.push_back({s, p.convert_to<long>()});
  }
  if (hits.size() > 1)
    fail(ErrorKind::ambiguity, "several shifts match; A is numerically rational at this tolerance");
  if (!hits.empty()) out.shift = hits.front();
  return out;
}

/// psi nu2^tau - xi.
inline Real relative_scale_from_progressions(const Real& xi, const Real& psi, const Real& nu2, const Real& tau) {
  return psi * boost::multiprecision::pow(nu2, tau) - xi;
}

/// Letters in merged order: 'X' for x_n, 'Y' for y_m, indices from x_start
/// and y_start.
struct Word {
  std::string letters;
  long x_start = 1;
  long y_start = 1;
};

template <class P1, class P2>
Word interleaving_word(const P1& x, const P2& y, std::size_t length, long x_start = 1, long y_start = 1,
                       std::optional<Real> tie_tol = std::nullopt) {
  using boost::multiprecision::abs;
  const Real tol = tie_tol ? *tie_tol : working_tol();
  Word w;
  w.x_start = x_start;
  w.y_start = y_start;
  w.letters.reserve(length);
  long n = x_start, m = y_start;
  Real xv = x.value(n), yv = y.value(m);
  while (w.letters.size() < length) {
    Real scale = abs(xv) > 1 ? Real(abs(xv)) : Real(1);
    if (abs(xv - yv) <= tol * scale)
      fail(ErrorKind::tie, "tie between x_" + std::to_string(n) + " and y_" + std::to_string(m));
    if (xv < yv) {
      w.letters.push_back('X');
      xv = x.value(++n);
    } else {
      w.letters.push_back('Y');
      yv = y.value(++m);
    }
  }
  return w;
}

namespace detail {

// For each X letter: its index n and the number of Y letters before it.
struct OrderData {
  std::vector<long> n;
  std::vector<long> before;
  long y_total = 0;
};

inline OrderData order_data(const Word& w) {
  OrderData d;
  long n = w.x_start, ys = 0;
  for (char c : w.letters) {
    if (c == 'X') {
      d.n.push_back(n++);
      d.before.push_back(ys);
    } else if (c == 'Y') {
      ++ys;
    } else {
      fail(ErrorKind::precondition, "word letters must be X or Y");
    }
  }
  d.y_total = ys;
  return d;
}

}  // namespace detail

/// (n, m) where x_n and y_m are ordered differently in the two words.
struct OrderWitness {
  long n = 0;
  long m = 0;
  bool x_first_in_first = false;  // x_n < y_m in the first word
};

struct WordComparison {
  bool equivalent = false;
  std::optional<OrderWitness> witness;
  std::size_t overlap = 0;  // X letters compared
};

/// Compares y_m < x_n in `a` with y~_{m-p} < x~_{n+s} in `b` for every X letter
/// present in both words.  Beyond the last letter of a word nothing is known
/// about its X letters, but an X letter fixes its order against every Y index.
inline WordComparison words_equivalent_up_to_shift(const Word& a, const Word& b, const ShiftPair& shift,
                                                   std::size_t min_overlap = 10) {
  const auto da = detail::order_data(a);
  const auto db = detail::order_data(b);
  const long m_lo = std::max(a.y_start, b.y_start + shift.p);

  auto clamp_lo = [m_lo](long v) { return std::max(v, m_lo - 1); };

  WordComparison out;
  for (std::size_t i = 0; i < da.n.size(); ++i) {
    const long n = da.n[i];
    const long nb = n + shift.s;
    if (nb < b.x_start) continue;
    std::size_t jb = static_cast<std::size_t>(nb - b.x_start);
    if (jb >= db.n.size()) break;
    long ma = clamp_lo(a.y_start + da.before[i] - 1);
    long mb = clamp_lo(b.y_start + db.before[jb] - 1 + shift.p);
    ++out.overlap;
    if (ma != mb && !out.witness) {
      OrderWitness w;
      w.n = n;
      w.m = std::min(ma, mb) + 1;
      w.x_first_in_first = ma < mb;
      out.witness = w;
    }
  }
  if (out.overlap < min_overlap)
    fail(ErrorKind::insufficient_data, "word overlap has fewer than " + std::to_string(min_overlap) + " letters");
  out.equivalent = !out.witness.has_value();
  return out;
}

struct Reconstruction {
  Real A;       // midpoint of the feasible A interval
  Real A_lo, A_hi;
  Real tau;     // midpoint of the feasible tau interval
  Real tau_lo, tau_hi;
  Real A_frequency;  // #Y / #X
  std::size_t constraints = 0;
};

namespace detail {

struct Line {
  long n;
  long c;  // L_n or U_n
};

inline bool cross_turn(const Line& o, const Line& a, const Line& b, bool upper) {
  // orientation of (a-o) x (b-o); upper hull keeps clockwise turns
  __int128 v = static_cast<__int128>(a.n - o.n) * (b.c - o.c) - static_cast<__int128>(a.c - o.c) * (b.n - o.n);
  return upper ? v >= 0 : v <= 0;
}

inline std::vector<Line> hull(const std::vector<Line>& pts, bool upper) {
  std::vector<Line> h;
  for (const auto& p : pts) {
    while (h.size() >= 2 && cross_turn(h[h.size() - 2], h.back(), p, upper)) h.pop_back();
    h.push_back(p);
  }
  return h;
}

inline Real max_lines(const std::vector<Line>& h, const Real& A) {
  Real best = -infinity();
  for (const auto& l : h) {
    Real v = Real(l.c) - A * l.n;
    if (v > best) best = v;
  }
  return best;
}

inline Real min_lines(const std::vector<Line>& h, const Real& A) {
  Real best = infinity();
  for (const auto& l : h) {
    Real v = Real(l.c) - A * l.n;
    if (v < best) best = v;
  }
  return best;
}

}  // namespace detail

/// Feasible region {(A, tau): c(n) - 1 + m0 < A n + tau < c(n) + m0} from the
/// word's order data, with m0 the first Y index.
inline Reconstruction reconstruct_invariants(const Word& w, std::size_t min_letters = 100) {
  if (w.letters.size() < min_letters)
    fail(ErrorKind::insufficient_data, "reconstruction needs at least " + std::to_string(min_letters) + " letters");
  const auto d = detail::order_data(w);
  if (d.n.empty() || d.y_total == 0) fail(ErrorKind::insufficient_data, "word needs both letters");

  std::vector<detail::Line> lower, upper;
  for (std::size_t i = 0; i < d.n.size(); ++i) {
    if (d.before[i] >= 1) lower.push_back({d.n[i], w.y_start + d.before[i] - 1});
    if (d.y_total > d.before[i]) upper.push_back({d.n[i], w.y_start + d.before[i]});
  }
  if (lower.empty() || upper.empty()) fail(ErrorKind::insufficient_data, "word constrains only one side");
  const auto F = detail::hull(lower, true);
  const auto G = detail::hull(upper, false);
  auto gap = [&](const Real& A) { return Real(detail::min_lines(G, A) - detail::max_lines(F, A)); };

  // The gap is concave and piecewise linear; its maximum sits at a breakpoint.
  std::vector<Real> cand;
  auto add_breaks = [&](const std::vector<detail::Line>& h) {
    for (std::size_t i = 0; i + 1 < h.size(); ++i)
      cand.push_back(Real(h[i + 1].c - h[i].c) / Real(h[i + 1].n - h[i].n));
  };
  add_breaks(F);
  add_breaks(G);
  for (const auto& f : F)
    for (const auto& g : G)
      if (f.n != g.n) cand.push_back(Real(g.c - f.c) / Real(g.n - f.n));
  Real best_A = 0, best_gap = -infinity();
  for (const auto& A : cand) {
    if (!(A > 0)) continue;
    Real g = gap(A);
    if (g > best_gap) {
      best_gap = g;
      best_A = A;
    }
  }
  if (!(best_gap > 0)) fail(ErrorKind::reconstruction, "word is not realized by any arithmetic pair");

  Reconstruction r;
  r.constraints = lower.size() + upper.size();
  r.A_frequency = Real(d.y_total) / Real(d.n.size());
  const Real tol = ldexp(Real(1), -static_cast<int>(working_bits()) + 8);

  auto edge = [&](Real inside, Real step) {
    Real outside = inside + step;
    for (int i = 0; i < 200 && gap(outside) > 0; ++i) {
      step *= 2;
      outside = inside + step;
      if (!(outside > 0)) {
        outside = 0;
        break;
      }
    }
    if (gap(outside) > 0) fail(ErrorKind::insufficient_data, "feasible density interval is unbounded");
    for (int i = 0; i < 4 * static_cast<int>(working_bits()) && boost::multiprecision::abs(outside - inside) > tol; ++i) {
      Real mid = (inside + outside) / 2;
      if (gap(mid) > 0)
        inside = mid;
      else
        outside = mid;
    }
    return Real((inside + outside) / 2);
  };
  const Real step0 = best_A / Real(4 * static_cast<long>(w.letters.size()));
  r.A_lo = edge(best_A, -step0);
  r.A_hi = edge(best_A, step0);
  r.A = (r.A_lo + r.A_hi) / 2;
  r.tau_lo = detail::max_lines(F, r.A_hi);
  r.tau_hi = detail::max_lines(F, r.A_lo);
  r.tau = (r.tau_lo + r.tau_hi) / 2;
  return r;
}

}  // namespace polylab

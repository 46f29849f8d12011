#pragma once

// JSON and CSV schemas for the command-line tool.  Numbers are accepted as
// JSON numbers or decimal strings; output always uses decimal strings with
// bits/3 significant digits.

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "polylab/heart.hpp"

namespace polylab::io {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  unsigned bits = 256;
  long terms = 20;
  std::string tol;  // empty: 2^-(bits/2)
  long max_shift = 64;
  std::vector<Rational> q_grid{{1, 2}, {2, 3}, {3, 4}, {4, 3}, {3, 2}, {2, 1}};
  std::uint64_t seed = 0;
  long depth = 1;
  std::string filter;
  std::string source = "model";
  int polycycle = 1;

  Real tolerance() const { return tol.empty() ? working_tol() : real_from_string(tol); }
};

inline std::string num(const Real& v) {
  if (is_inf(v)) return v > 0 ? "inf" : "-inf";
  return to_decimal(v);
}

inline json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["bits"] = c.bits;
  j["terms"] = c.terms;
  j["tol"] = c.tol.empty() ? "2^-" + std::to_string(c.bits / 2) : c.tol;
  j["max_shift"] = c.max_shift;
  json q = json::array();
  for (const auto& r : c.q_grid) q.push_back(r.str());
  j["q_grid"] = q;
  j["seed"] = c.seed;
  j["depth"] = c.depth;
  if (!c.filter.empty()) j["filter"] = c.filter;
  j["source"] = c.source;
  j["polycycle"] = c.polycycle;
  return j;
}

inline Real read_real(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::schema, "missing field '" + key + "'");
  const json& v = j.at(key);
  if (v.is_string()) return real_from_string(v.get<std::string>());
  if (v.is_number()) return real_from_string(v.dump());
  fail(ErrorKind::schema, "field '" + key + "' must be a number or decimal string");
}

inline Real read_real_or(const json& j, const std::string& key, const Real& fallback) {
  return j.contains(key) ? read_real(j, key) : fallback;
}

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) fail(ErrorKind::schema, what + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) fail(ErrorKind::schema, "unknown field '" + k + "' in " + what);
  }
}

inline bool is_family_json(const json& j) { return j.is_object() && j.contains("lambda"); }

inline HeartFamily family_from_json(const json& j) {
  require_keys(j, {"lambda", "mu", "C1", "C2", "B1", "B2"}, "family");
  HeartFamily f{read_real(j, "lambda"), read_real(j, "mu"), read_real(j, "C1"),
                read_real(j, "C2"),     read_real(j, "B1"), read_real(j, "B2")};
  try {
    f.validate();
  } catch (const Error& e) {
    fail(ErrorKind::schema, e.what());
  }
  return f;
}

inline json to_json(const HeartFamily& f) {
  return json{{"lambda", num(f.lambda)}, {"mu", num(f.mu)}, {"C1", num(f.C1)},
              {"C2", num(f.C2)},         {"B1", num(f.B1)}, {"B2", num(f.B2)}};
}

inline ConnectionProblem model_from_json(const json& j) {
  require_keys(j, {"C", "Lambda0", "Lambda1", "B0", "B1", "psi"}, "model");
  Correction psi = Correction::zero();
  if (j.contains("psi")) {
    const json& p = j.at("psi");
    if (p.is_string() && p.get<std::string>() == "zero") {
    } else if (p.is_object() && p.value("type", "") == "linear") {
      psi = Correction::linear(read_real(p, "a"), read_real(p, "b"));
    } else {
      fail(ErrorKind::schema, "psi must be \"zero\" or {\"type\": \"linear\", \"a\", \"b\"}");
    }
  }
  try {
    return ConnectionProblem(
        PerturbedPowerFamily(read_real(j, "C"), read_real(j, "Lambda0"), read_real_or(j, "Lambda1", Real(0)), psi),
        read_real(j, "B0"), read_real_or(j, "B1", Real(0)));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::precondition) fail(ErrorKind::schema, e.what());
    throw;
  }
}

inline LiouvilleSpec liouville_from_json(const json& j) {
  require_keys(j, {"gamma", "u", "Xi", "lambda", "q_list", "N_schedule", "start"}, "liouville spec");
  LiouvilleSpec s;
  s.gamma = read_real(j, "gamma");
  s.u = read_real(j, "u");
  s.Xi = read_real(j, "Xi");
  s.lambda = read_real(j, "lambda");
  if (!j.contains("q_list") || !j["q_list"].is_array()) fail(ErrorKind::schema, "q_list must be an array");
  for (const auto& q : j["q_list"]) {
    if (q.is_string()) s.q_list.push_back(Rational::parse(q.get<std::string>()));
    else if (q.is_number_integer()) s.q_list.push_back({q.get<long long>(), 1});
    else fail(ErrorKind::schema, "q_list entries must be integers or \"p/q\" strings");
  }
  if (!j.contains("N_schedule") || !j["N_schedule"].is_array()) fail(ErrorKind::schema, "N_schedule must be an array");
  for (const auto& n : j["N_schedule"]) {
    if (!n.is_number_integer()) fail(ErrorKind::schema, "N_schedule entries must be integers");
    s.N_schedule.push_back(n.get<long>());
  }
  if (j.contains("start")) {
    const json& st = j["start"];
    if (!st.is_array() || st.size() != 2) fail(ErrorKind::schema, "start must be [lo, hi]");
    json wrap{{"lo", st[0]}, {"hi", st[1]}};
    s.start = {read_real(wrap, "lo"), read_real(wrap, "hi")};
  }
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorKind::schema, e.what());
  }
  return s;
}

inline json to_json(const InvariantReport& r) {
  json j;
  j["A"] = num(r.A);
  j["nu1"] = num(r.nu1);
  j["nu2"] = num(r.nu2);
  j["alpha"] = num(r.alpha);
  j["gamma"] = num(r.gamma);
  j["beta1"] = num(r.beta1);
  j["beta2"] = num(r.beta2);
  j["tau"] = num(r.tau);
  j["tau_prog"] = num(r.tau_prog);
  j["Xi"] = num(r.Xi);
  j["Theta"] = num(r.Theta);
  j["generic"] = r.generic;
  j["identity_gap"] = num(r.identity_gap);
  j["lnXi_mod_lnNu2"] = r.lnXi_mod_lnNu2 ? json(num(*r.lnXi_mod_lnNu2)) : json(nullptr);
  j["lnXi_mod_lnNu1"] = r.lnXi_mod_lnNu1 ? json(num(*r.lnXi_mod_lnNu1)) : json(nullptr);
  if (r.lnXi_mod_lattice)
    j["lnXi_mod_lattice"] = {{"residue", num(r.lnXi_mod_lattice->residue)},
                             {"s", r.lnXi_mod_lattice->s},
                             {"k", r.lnXi_mod_lattice->k}};
  else
    j["lnXi_mod_lattice"] = nullptr;
  return j;
}

inline json to_json(const ObstructionReport& r) {
  json j;
  j["verdict"] = r.verdict == Verdict::inequivalent ? "inequivalent" : "possibly-equivalent";
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["shift"] = r.shift ? json{{"s", r.shift->s}, {"p", r.shift->p}} : json(nullptr);
  if (r.good_pair) {
    const auto& w = *r.good_pair;
    json q = json::array();
    for (const auto& x : w.q_hits) q.push_back(x.str());
    j["good_pair_witness"] = {{"n", w.n},         {"m", w.m},
                              {"D", num(w.D)},    {"w1", num(w.w1)},
                              {"w2", num(w.w2)},  {"first_i_before_e", w.first_i_before_e},
                              {"q_windows", q}};
  }
  if (r.word_witness)
    j["word_witness"] = {{"n", r.word_witness->n},
                         {"m", r.word_witness->m},
                         {"x_first_in_first", r.word_witness->x_first_in_first}};
  json m;
  m["density_gap"] = num(r.density_gap);
  m["offset_residual"] = num(r.offset_residual);
  m["base_gap"] = num(r.base_gap);
  m["Xi_ratio"] = num(r.Xi_ratio);
  m["lnXi_gap_mod_lnNu2"] = r.lnXi_gap_mod_lnNu2 ? json(num(*r.lnXi_gap_mod_lnNu2)) : json(nullptr);
  m["lnXi_gap_mod_lnNu1"] = r.lnXi_gap_mod_lnNu1 ? json(num(*r.lnXi_gap_mod_lnNu1)) : json(nullptr);
  m["good_pairs"] = r.good_pairs;
  m["word_overlap"] = r.word_overlap;
  j["margins"] = m;
  return j;
}

inline json to_json(const Witness& w) {
  return json{{"n", w.n},
              {"m", w.m},
              {"q", w.q.str()},
              {"step", w.step},
              {"threshold", w.threshold},
              {"interval", json::array({num(w.window.lo), num(w.window.hi)})}};
}

inline std::vector<Witness> witnesses_from_json(const json& j) {
  std::vector<Witness> out;
  if (!j.is_array()) fail(ErrorKind::schema, "witnesses must be an array");
  for (const auto& w : j) {
    Witness x;
    x.n = w.at("n").get<long>();
    x.m = w.at("m").get<long>();
    x.q = Rational::parse(w.at("q").get<std::string>());
    x.step = w.value("step", std::size_t{0});
    x.threshold = w.value("threshold", 0L);
    out.push_back(x);
  }
  return out;
}

/// Sequence rows for one connection problem, n = 0..terms.
inline void write_sequence_csv(std::ostream& os, const RunConfig& cfg, const ConnectionProblem& p,
                               const std::string& label) {
  AsymptoticModel m = model_for(p);
  os << "# polylab " << cfg.command << " " << label << "\n";
  os << "# config " << to_json(cfg).dump() << "\n";
  os << "# Lambda=" << num(m.Lambda) << " beta=" << num(m.beta) << " theta=" << num(m.theta) << "\n";
  os << "n,z_n,predicted,residual,normalized_residual\n";
  ConnectionSequence s = generate_sequence(p, 0, cfg.terms);
  for (const auto& e : s.entries) {
    Real pred = m.predict(e.n);
    Real r = e.z.z - pred;
    os << e.n << "," << num(e.z.z) << "," << num(pred) << "," << num(r) << ","
       << num(r / boost::multiprecision::pow(m.Lambda, e.n)) << "\n";
  }
}

}  // namespace polylab::io

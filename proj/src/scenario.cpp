#include "ivt/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "ivt/avoidance.hpp"
#include "ivt/errors.hpp"
#include "ivt/frobenius.hpp"
#include "ivt/quadrature.hpp"
#include "ivt/regularize.hpp"
#include "ivt/solve.hpp"

#ifndef IVT_DEFAULT_SCENARIO_DIR
#define IVT_DEFAULT_SCENARIO_DIR ""
#endif

namespace ivt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ContractError(path + ": " + message);
}

const json& require_field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path + "/" + key, "missing required field");
  return j.at(key);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd require_vector(const json& j, int n, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    fail(path, "expected an array of " + std::to_string(n) + " numbers");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = require_number(j[i], path + "/" + std::to_string(i));
  return v;
}

Expr parse_expr_field(const json& j, int n, const std::string& path, bool allow_t, bool allow_s,
                      bool allow_x) {
  const std::string src = require_string(j, path);
  Expr e;
  try {
    e = Expr::parse(src, allow_x ? n : 0);
  } catch (const ParseError& pe) {
    fail(path, pe.what());
  }
  if (!allow_t && e.uses_t()) fail(path, "expression must not reference t");
  if (!allow_s && e.uses_s()) fail(path, "expression must not reference s");
  return e;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& content,
                RunOutcome& outcome) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw ContractError("cannot write " + file.string());
  os << content;
  outcome.outputs.push_back(file.filename().string());
}

void write_json(const std::filesystem::path& file, const json& doc, RunOutcome& outcome) {
  write_text(file, doc.dump(2) + "\n", outcome);
}

}  // namespace

Shape parse_shape_spec(const json& spec, const std::string& path) {
  if (spec.is_string()) {
    const auto preset = shape_preset(spec.get<std::string>());
    if (!preset) fail(path, "unknown shape preset '" + spec.get<std::string>() + "'");
    return *preset;
  }
  if (spec.is_object() && spec.contains("expr")) {
    Expr e = parse_expr_field(spec.at("expr"), 0, path + "/expr", false, true, false);
    Shape shape([e](double s) { return e.eval(0.0, Eigen::VectorXd(), s); });
    const auto report = validate_shape(shape);
    if (!report.pass)
      fail(path, "shape integral " + format_value(report.integral) + " is not 1 within 1e-8");
    return shape;
  }
  if (spec.is_object() && spec.contains("samples")) {
    const json& arr = spec.at("samples");
    if (!arr.is_array() || arr.size() < 16) fail(path + "/samples", "need at least 16 samples");
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i)
      v(static_cast<Eigen::Index>(i)) =
          require_number(arr[i], path + "/samples/" + std::to_string(i));
    Shape shape(v);
    const auto report = validate_shape(shape);
    if (!report.pass)
      fail(path, "shape integral " + format_value(report.integral) + " is not 1 within 1e-8");
    return shape;
  }
  fail(path, "expected a preset name, {\"expr\": ...} or {\"samples\": [...]}");
}

Scenario parse_scenario(const json& doc, const std::string& source_name) {
  Scenario sc;
  sc.raw = doc;
  sc.name = doc.value("name", source_name);
  sc.notes = doc.value("notes", "");

  const json& nj = require_field(doc, "n", "");
  if (!nj.is_number_integer() || nj.get<int>() < 1) fail("/n", "expected a positive integer");
  sc.n = nj.get<int>();
  const int n = sc.n;

  // fields of the right-hand side
  const json& fj = require_field(doc, "f", "");
  if (!fj.is_array() || static_cast<int>(fj.size()) != n)
    fail("/f", "expected " + std::to_string(n) + " expressions");
  std::vector<Expr> f_exprs;
  for (int i = 0; i < n; ++i)
    f_exprs.push_back(parse_expr_field(fj[i], n, "/f/" + std::to_string(i), true, false, true));

  const json& gj = require_field(doc, "g", "");
  if (!gj.is_array() || static_cast<int>(gj.size()) != n)
    fail("/g", "expected " + std::to_string(n) + " rows");
  std::vector<std::vector<Expr>> g_exprs(n);
  bool g_uses_s = false;
  for (int i = 0; i < n; ++i) {
    const json& row = gj[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      fail("/g/" + std::to_string(i), "expected " + std::to_string(n) + " expressions");
    for (int j = 0; j < n; ++j) {
      Expr e = parse_expr_field(row[j], n, "/g/" + std::to_string(i) + "/" + std::to_string(j),
                                true, true, true);
      g_uses_s = g_uses_s || e.uses_s();
      g_exprs[i].push_back(std::move(e));
    }
  }

  std::vector<Expr> w_exprs;
  if (doc.contains("w")) {
    const json& wj = doc.at("w");
    if (!wj.is_array() || static_cast<int>(wj.size()) != n)
      fail("/w", "expected " + std::to_string(n) + " expressions");
    for (int i = 0; i < n; ++i)
      w_exprs.push_back(parse_expr_field(wj[i], n, "/w/" + std::to_string(i), true, false, false));
  }

  // domain box
  const json& dj = require_field(doc, "domain", "");
  const json& dtj = require_field(dj, "t", "/domain");
  if (!dtj.is_array() || dtj.size() != 2) fail("/domain/t", "expected [lo, hi]");
  sc.system.domain.t_lo = require_number(dtj[0], "/domain/t/0");
  sc.system.domain.t_hi = require_number(dtj[1], "/domain/t/1");
  const json& dxj = require_field(dj, "x", "/domain");
  if (!dxj.is_array() || static_cast<int>(dxj.size()) != n)
    fail("/domain/x", "expected " + std::to_string(n) + " [lo, hi] pairs");
  sc.system.domain.x_lo.resize(n);
  sc.system.domain.x_hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const json& pair = dxj[i];
    const std::string p = "/domain/x/" + std::to_string(i);
    if (!pair.is_array() || pair.size() != 2) fail(p, "expected [lo, hi]");
    sc.system.domain.x_lo(i) = require_number(pair[0], p + "/0");
    sc.system.domain.x_hi(i) = require_number(pair[1], p + "/1");
    if (!(sc.system.domain.x_lo(i) < sc.system.domain.x_hi(i))) fail(p, "lo must be below hi");
  }

  if (doc.contains("lipschitz")) {
    const json& lj = doc.at("lipschitz");
    if (lj.contains("f")) sc.system.lipschitz.f = require_number(lj.at("f"), "/lipschitz/f");
    if (lj.contains("g")) sc.system.lipschitz.g = require_number(lj.at("g"), "/lipschitz/g");
  }

  sc.system.n = n;
  sc.system.g_fast_time = g_uses_s;
  sc.system.f = [f_exprs, n](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = f_exprs[static_cast<size_t>(i)].eval(t, x);
    return out;
  };
  sc.system.g = [g_exprs, n](double t, const Eigen::VectorXd& x, std::optional<double> s) {
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Expr& e = g_exprs[static_cast<size_t>(i)][static_cast<size_t>(j)];
        G(i, j) = s ? e.eval(t, x, *s) : e.eval(t, x);
      }
    }
    return G;
  };

  // atoms
  std::vector<ImpulseAtom> atoms;
  if (doc.contains("atoms")) {
    const json& aj = doc.at("atoms");
    if (!aj.is_array()) fail("/atoms", "expected an array");
    for (size_t k = 0; k < aj.size(); ++k) {
      const std::string p = "/atoms/" + std::to_string(k);
      const json& a = aj[k];
      const double tau = require_number(require_field(a, "tau", p), p + "/tau");
      const Eigen::VectorXd c = require_vector(require_field(a, "c", p), n, p + "/c");
      std::vector<Shape> shapes;
      if (a.contains("shapes")) {
        const json& sj = a.at("shapes");
        if (!sj.is_array() || static_cast<int>(sj.size()) != n)
          fail(p + "/shapes", "expected " + std::to_string(n) + " shape specs");
        for (int i = 0; i < n; ++i)
          shapes.push_back(parse_shape_spec(sj[i], p + "/shapes/" + std::to_string(i)));
      } else {
        const json& one = require_field(a, "shape", p);
        const Shape shared = parse_shape_spec(one, p + "/shape");
        shapes.assign(static_cast<size_t>(n), shared);
      }
      try {
        atoms.emplace_back(tau, c, std::move(shapes));
      } catch (const Error& e) {
        fail(p, e.what());
      }
    }
  }

  try {
    if (!w_exprs.empty()) {
      auto w_fn = [w_exprs, n](double t) {
        Eigen::VectorXd out(n);
        const Eigen::VectorXd empty(n);
        for (int i = 0; i < n; ++i) out(i) = w_exprs[static_cast<size_t>(i)].eval(t, empty);
        return out;
      };
      sc.control = ImpulseControl(n, w_fn, std::move(atoms));
    } else {
      sc.control = ImpulseControl(n, std::move(atoms));
    }
  } catch (const Error& e) {
    fail("/atoms", e.what());
  }

  // constraints
  if (doc.contains("constraints")) {
    const json& cj = doc.at("constraints");
    if (!cj.is_array()) fail("/constraints", "expected an array");
    std::vector<std::function<double(const Eigen::VectorXd&)>> etas;
    std::vector<std::function<Eigen::VectorXd(const Eigen::VectorXd&)>> grads;
    for (size_t i = 0; i < cj.size(); ++i) {
      const std::string p = "/constraints/" + std::to_string(i);
      const json& c = cj[i];
      Expr eta = parse_expr_field(require_field(c, "eta", p), n, p + "/eta", false, false, true);
      etas.push_back([eta](const Eigen::VectorXd& x) { return eta.eval(0.0, x); });
      if (c.contains("grad")) {
        const json& gr = c.at("grad");
        if (!gr.is_array() || static_cast<int>(gr.size()) != n)
          fail(p + "/grad", "expected " + std::to_string(n) + " expressions");
        std::vector<Expr> comps;
        for (int j = 0; j < n; ++j)
          comps.push_back(parse_expr_field(gr[j], n, p + "/grad/" + std::to_string(j), false,
                                           false, true));
        grads.push_back([comps, n](const Eigen::VectorXd& x) {
          Eigen::VectorXd out(n);
          for (int j = 0; j < n; ++j) out(j) = comps[static_cast<size_t>(j)].eval(0.0, x);
          return out;
        });
      } else {
        grads.push_back(nullptr);
      }
    }
    sc.constraints = ConstraintSet::build(n, std::move(etas), std::move(grads));
  }

  sc.x0 = require_vector(require_field(doc, "x0", ""), n, "/x0");
  const json& hj = require_field(doc, "horizon", "");
  if (!hj.is_array() || hj.size() != 2) fail("/horizon", "expected [t0, T]");
  sc.t0 = require_number(hj[0], "/horizon/0");
  sc.T = require_number(hj[1], "/horizon/1");
  if (!(sc.t0 < sc.T)) fail("/horizon", "t0 must be below T");
  sc.tol = doc.value("tol", 1e-8);

  const json& tj = require_field(doc, "task", "");
  const std::string type = require_string(require_field(tj, "type", "/task"), "/task/type");
  if (type == "solve")
    sc.task = TaskType::solve;
  else if (type == "regularize")
    sc.task = TaskType::regularize;
  else if (type == "frobenius")
    sc.task = TaskType::frobenius;
  else if (type == "viability")
    sc.task = TaskType::viability;
  else if (type == "stability")
    sc.task = TaskType::stability;
  else if (type == "avoid")
    sc.task = TaskType::avoid;
  else
    fail("/task/type", "unknown task '" + type + "'");
  sc.task_params = tj;
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ContractError("cannot open scenario file " + file.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ContractError(file.string() + ": invalid JSON: " + e.what());
  }
  return parse_scenario(doc, file.stem().string());
}

namespace {

void write_trajectory_artifacts(const DynamicTrajectory& traj,
                                const std::filesystem::path& out_dir, RunOutcome& outcome) {
  std::ostringstream csv;
  traj.write_csv(csv);
  write_text(out_dir / "trajectory.csv", csv.str(), outcome);
  for (size_t k = 0; k < traj.jumps.size(); ++k) {
    std::ostringstream fcsv;
    traj.write_fast_csv(fcsv, static_cast<int>(k));
    write_text(out_dir / ("fast_" + std::to_string(k) + ".csv"), fcsv.str(), outcome);
  }
}

json exit_to_json(const std::optional<ExitRecord>& exit) {
  if (!exit) return nullptr;
  json e;
  e["fast"] = exit->fast;
  e["t"] = exit->t;
  if (exit->fast) e["s"] = exit->s;
  e["x"] = vec_to_json(exit->x);
  e["reason"] = exit->reason;
  return e;
}

json counterexample_to_json(const std::optional<Counterexample>& ce) {
  if (!ce) return nullptr;
  json c;
  c["x"] = vec_to_json(ce->x);
  c["constraint"] = ce->constraint;
  if (ce->t) c["t"] = *ce->t;
  if (ce->s) c["s"] = *ce->s;
  if (ce->atom) c["atom"] = *ce->atom;
  c["inner"] = ce->inner;
  return c;
}

RunOutcome run_solve_task(const Scenario& sc, const std::filesystem::path& out_dir,
                          const SolveOptions& opts) {
  RunOutcome outcome;
  const DynamicTrajectory traj = solve_ivp(sc.system, sc.control, sc.t0, sc.x0, sc.T, opts);
  write_trajectory_artifacts(traj, out_dir, outcome);

  json report;
  report["name"] = sc.name;
  report["terminal_t"] = traj.back_time();
  report["terminal_state"] = vec_to_json(traj.samples.back().x);
  report["samples"] = traj.samples.size();
  report["jumps"] = traj.jumps.size();
  report["representation_defect"] = representation_defect(sc.system, sc.control, traj, sc.x0);
  report["exit"] = exit_to_json(traj.exit);
  if (!sc.notes.empty()) report["notes"] = sc.notes;
  write_json(out_dir / "report.json", report, outcome);
  outcome.message = "solved to t = " + format_value(traj.back_time());
  return outcome;
}

RunOutcome run_regularize_task(const Scenario& sc, const std::filesystem::path& out_dir,
                               const SolveOptions& opts) {
  RunOutcome outcome;
  const json& p = sc.task_params;
  std::vector<int> n_list;
  for (const auto& v : p.value("n_list", json::array({10, 40, 160, 640})))
    n_list.push_back(v.get<int>());
  std::vector<double> probes;
  if (!p.contains("probes")) fail("/task/probes", "missing probe times");
  for (const auto& v : p.at("probes")) probes.push_back(v.get<double>());

  const ConvergenceReport rep =
      convergence_report(sc.system, sc.control, sc.t0, sc.x0, sc.T, n_list, probes, opts);

  std::ostringstream csv;
  csv << "n,probe_t,distance\n";
  for (const auto& row : rep.rows)
    csv << row.n << ',' << format_value(row.probe_t) << ',' << format_value(row.distance) << "\n";
  write_text(out_dir / "convergence.csv", csv.str(), outcome);

  json report;
  report["name"] = sc.name;
  report["converged"] = rep.converged;
  report["n_list"] = n_list;
  report["sup_distance_per_n"] = rep.sup_per_n;
  if (!sc.notes.empty()) report["notes"] = sc.notes;
  write_json(out_dir / "report.json", report, outcome);
  outcome.message = rep.converged ? "regularized solutions converge" : "no convergence detected";
  return outcome;
}

RunOutcome run_frobenius_task(const Scenario& sc, const std::filesystem::path& out_dir,
                              const SolveOptions& opts) {
  RunOutcome outcome;
  const json& p = sc.task_params;
  const int samples = p.value("samples", 200);
  const double tol = p.value("tol", 1e-5);
  const FrobeniusReport rep = frobenius_check(sc.system, samples, tol);

  json report;
  report["pass"] = rep.pass;
  report["tol"] = rep.tol;
  report["max_norm"] = rep.max_norm;
  json arg;
  arg["t"] = rep.t_at;
  arg["x"] = vec_to_json(rep.x_at);
  if (rep.s_at) arg["s"] = *rep.s_at;
  report["argmax_point"] = arg;
  report["samples"] = rep.samples;

  if (p.contains("sensitivity")) {
    const json& sj = p.at("sensitivity");
    const double tau = sj.value("tau", sc.t0);
    const Eigen::VectorXd c =
        require_vector(require_field(sj, "c", "/task/sensitivity"), sc.n, "/task/sensitivity/c");
    Eigen::VectorXd x_minus = sc.x0;
    if (sj.contains("x_minus"))
      x_minus = require_vector(sj.at("x_minus"), sc.n, "/task/sensitivity/x_minus");
    // family members are either one shared profile or one profile per component
    std::vector<std::vector<Shape>> family;
    json names = json::array();
    for (const auto& spec : require_field(sj, "shapes", "/task/sensitivity")) {
      const std::string path = "/task/sensitivity/shapes";
      if (spec.is_array()) {
        if (static_cast<int>(spec.size()) != sc.n)
          fail(path, "expected " + std::to_string(sc.n) + " per-component shapes");
        std::vector<Shape> tuple;
        json tuple_names = json::array();
        for (const auto& component : spec) {
          tuple.push_back(parse_shape_spec(component, path));
          tuple_names.push_back(component.is_string() ? component.get<std::string>()
                                                      : std::string("custom"));
        }
        family.push_back(std::move(tuple));
        names.push_back(tuple_names);
      } else {
        const Shape shared = parse_shape_spec(spec, path);
        family.push_back(std::vector<Shape>(static_cast<size_t>(sc.n), shared));
        names.push_back(spec.is_string() ? spec.get<std::string>() : std::string("custom"));
      }
    }
    report["shape_sensitivity"] =
        shape_sensitivity(sc.system, tau, x_minus, c, family, opts.fast_steps);
    report["shape_family"] = names;
  }
  if (!sc.notes.empty()) report["notes"] = sc.notes;
  write_json(out_dir / "frobenius.json", report, outcome);
  outcome.message = rep.pass ? "bracket flat within tolerance" : "nonzero bracket detected";
  return outcome;
}

Shape random_nonnegative_shape(std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(0.1, 2.0);
  Eigen::VectorXd samples(33);
  for (Eigen::Index i = 0; i < samples.size(); ++i) samples(i) = dist(rng);
  samples /= trapezoid_uniform(samples, kFastLo, kFastHi);
  return Shape(samples);
}

CertificateOptions certificate_options(const json& p) {
  CertificateOptions copts;
  copts.boundary_count = p.value("boundary_samples", 0);
  copts.t_samples = p.value("t_samples", 33);
  copts.s_samples = p.value("s_grid", 65);
  copts.active_eps = p.value("active_eps", 1e-7);
  copts.slack = p.value("slack", 1e-9);
  return copts;
}

RunOutcome run_viability_task(const Scenario& sc, const std::filesystem::path& out_dir,
                              const SolveOptions& opts) {
  RunOutcome outcome;
  if (!sc.constraints) fail("/constraints", "viability task needs a constraint set");
  const json& p = sc.task_params;
  const std::string mode = p.value("mode", "impulse");
  const CertificateOptions copts = certificate_options(p);

  ViabilityCertificate cert =
      mode == "nagumo" ? nagumo_check(sc.system, *sc.constraints, sc.t0, sc.T, copts)
                       : impulse_viability_check(sc.system, sc.control, *sc.constraints, sc.t0,
                                                 sc.T, copts);

  double worst = -1e300;
  for (const auto& s : cert.samples) worst = std::max(worst, s.worst_inner);

  json report;
  report["mode"] = mode;
  report["pass"] = cert.pass;
  report["slack"] = cert.slack;
  report["boundary_samples"] = cert.samples.size();
  report["worst_inner"] = worst;
  report["counterexample"] = counterexample_to_json(cert.counterexample);
  report["hypothesis_issues"] = cert.hypothesis_issues;
  if (!cert.note.empty()) report["note"] = cert.note;

  bool sims_ok = true;
  if (p.contains("simulate")) {
    const json& simj = p.at("simulate");
    const int count = simj.value("count", 200);
    const double tol = simj.value("tol", 1e-6);
    std::mt19937 rng(simj.value("seed", 20250817u));
    int failures = 0;
    json first_failure = nullptr;
    for (int i = 0; i < count; ++i) {
      // random start inside M, random nonnegative normalized shapes
      Eigen::VectorXd x0(sc.n);
      bool found = false;
      for (int tries = 0; tries < 1000 && !found; ++tries) {
        for (int d = 0; d < sc.n; ++d) {
          std::uniform_real_distribution<double> dist(sc.system.domain.x_lo(d),
                                                      sc.system.domain.x_hi(d));
          x0(d) = dist(rng);
        }
        found = sc.constraints->max_eta(x0) <= 0.0;
      }
      if (!found) fail("/task/simulate", "could not sample a start inside the constraint set");
      std::vector<ImpulseAtom> atoms;
      for (const auto& atom : sc.control.atoms()) {
        std::vector<Shape> shapes;
        for (int d = 0; d < sc.n; ++d) shapes.push_back(random_nonnegative_shape(rng));
        atoms.emplace_back(atom.tau, atom.c, std::move(shapes));
      }
      ImpulseControl control = sc.control.has_density()
                                   ? ImpulseControl(sc.n,
                                                    [c = sc.control](double t) {
                                                      return c.density(t);
                                                    },
                                                    std::move(atoms))
                                   : ImpulseControl(sc.n, std::move(atoms));
      const DynamicTrajectory traj = solve_ivp(sc.system, control, sc.t0, x0, sc.T, opts);
      const AuditResult audit = trajectory_viability_audit(traj, *sc.constraints, tol);
      if (!audit.viable) {
        ++failures;
        if (first_failure.is_null()) {
          first_failure = json{{"x0", vec_to_json(x0)},
                               {"t", audit.exit->t},
                               {"fast", audit.exit->fast},
                               {"constraint", audit.exit->constraint}};
        }
      }
    }
    sims_ok = failures == 0;
    report["simulations"] =
        json{{"count", count}, {"failures", failures}, {"tol", tol},
             {"first_failure", first_failure}};
  }
  if (!sc.notes.empty()) report["notes"] = sc.notes;
  write_json(out_dir / "certificate.json", report, outcome);
  outcome.exit_code = (cert.pass && sims_ok) ? 0 : 2;
  outcome.message = outcome.exit_code == 0 ? "viability certificate holds"
                                           : "viability certificate FAILED";
  return outcome;
}

RunOutcome run_stability_task(const Scenario& sc, const std::filesystem::path& out_dir,
                              const SolveOptions& opts) {
  RunOutcome outcome;
  const json& p = sc.task_params;
  const Eigen::VectorXd x_star =
      require_vector(require_field(p, "x_star", "/task"), sc.n, "/task/x_star");
  std::vector<int> l_list;
  for (const auto& v : p.value("l_list", json::array({1, 2, 3, 4, 5, 6})))
    l_list.push_back(v.get<int>());
  const CertificateOptions copts = certificate_options(p);

  const StabilityReport rep =
      stability_check(sc.system, x_star, sc.control, l_list, sc.t0, sc.T, copts);

  json radii = json::array();
  for (const auto& r : rep.radii) {
    radii.push_back(json{{"l", r.l},
                         {"radius", 1.0 / r.l},
                         {"pass", r.pass},
                         {"worst_inner", r.worst_inner},
                         {"counterexample", counterexample_to_json(r.counterexample)}});
  }

  bool sims_ok = true;
  json sims = nullptr;
  if (p.contains("simulate")) {
    const json& simj = p.at("simulate");
    const int per_l = simj.value("per_radius", 20);
    std::mt19937 rng(simj.value("seed", 20250817u));
    int failures = 0;
    for (int l : l_list) {
      const double r = 1.0 / l;
      for (int i = 0; i < per_l; ++i) {
        Eigen::VectorXd x0(sc.n);
        std::uniform_real_distribution<double> dist(-0.5 * r, 0.5 * r);
        for (int d = 0; d < sc.n; ++d) x0(d) = x_star(d) + dist(rng);
        if ((x0 - x_star).norm() > 0.5 * r) {
          x0 = x_star + 0.5 * r * (x0 - x_star).normalized();
        }
        const DynamicTrajectory traj = solve_ivp(sc.system, sc.control, sc.t0, x0, sc.T, opts);
        double worst = 0.0;
        for (const auto& sample : traj.samples)
          worst = std::max(worst, (sample.x - x_star).norm());
        for (const auto& jump : traj.jumps) {
          for (Eigen::Index cix = 0; cix < jump.s.size(); ++cix)
            worst = std::max(worst, (jump.states.col(cix) - x_star).norm());
        }
        if (worst > r + 1e-12) ++failures;
      }
    }
    sims_ok = failures == 0;
    sims = json{{"per_radius", per_l}, {"failures", failures}};
  }

  json report;
  report["pass"] = rep.pass && sims_ok;
  report["x_star"] = vec_to_json(rep.x_star);
  report["slack"] = rep.slack;
  report["radii"] = radii;
  report["simulations"] = sims;
  if (!sc.notes.empty()) report["notes"] = sc.notes;
  write_json(out_dir / "stability.json", report, outcome);
  outcome.exit_code = (rep.pass && sims_ok) ? 0 : 2;
  outcome.message =
      outcome.exit_code == 0 ? "uniform stability certificate holds" : "stability FAILED";
  return outcome;
}

RunOutcome run_avoid_task(const Scenario& sc, const std::filesystem::path& out_dir,
                          const SolveOptions& opts) {
  RunOutcome outcome;
  if (!sc.constraints) fail("/constraints", "avoid task needs a constraint set");
  const json& p = sc.task_params;
  const double budget = require_number(require_field(p, "V", "/task"), "/task/V");
  const double T_max = p.value("T_max", sc.T);

  std::vector<double> tau_grid;
  for (const auto& v : require_field(p, "tau_grid", "/task")) tau_grid.push_back(v.get<double>());
  std::vector<Eigen::VectorXd> c_grid;
  for (const auto& v : require_field(p, "c_grid", "/task")) {
    if (v.is_number()) {
      c_grid.push_back(Eigen::VectorXd::Constant(sc.n, v.get<double>()));
    } else {
      c_grid.push_back(require_vector(v, sc.n, "/task/c_grid"));
    }
  }
  const Shape shape = p.contains("shape") ? parse_shape_spec(p.at("shape"), "/task/shape")
                                          : shape_flat();

  const SingleAtomSearch search = search_single_atom(sc.system, sc.t0, sc.x0, *sc.constraints,
                                                     budget, tau_grid, c_grid, shape, T_max, opts);

  std::ostringstream csv;
  csv << "tau";
  for (int i = 1; i <= sc.n; ++i) csv << ",c_" << i;
  csv << ",T,admissible\n";
  for (const auto& row : search.table) {
    csv << format_value(row.tau);
    for (int i = 0; i < sc.n; ++i) csv << ',' << format_value(row.c(i));
    csv << ',' << format_value(row.T) << ',' << (row.admissible ? 1 : 0) << "\n";
  }
  write_text(out_dir / "search.csv", csv.str(), outcome);

  json best;
  best["impulse"] = json{{"tau", search.best.tau},
                         {"c", vec_to_json(search.best.c)},
                         {"T", search.best.T},
                         {"baseline", search.best_is_baseline}};
  best["baseline_T"] = search.baseline_T;

  if (!sc.control.atoms().empty() || sc.control.has_density()) {
    const ViabilityTime declared = viability_time(sc.system, sc.control, sc.t0, sc.x0,
                                                  *sc.constraints, T_max, 1e-6, 1e-9, opts);
    best["declared_control_T"] = declared.T;
  }

  const int max_atoms = p.value("max_atoms", 1);
  if (max_atoms > 1) {
    const MultiAtomSearch multi =
        search_multi_atom(sc.system, sc.t0, sc.x0, *sc.constraints, budget, tau_grid, c_grid,
                          shape, max_atoms, T_max, opts);
    json taus = json::array(), cs = json::array();
    for (double tau : multi.best.taus) taus.push_back(tau);
    for (const auto& c : multi.best.cs) cs.push_back(vec_to_json(c));
    best["multi_atom"] = json{{"taus", taus},
                              {"cs", cs},
                              {"T", multi.best.T},
                              {"baseline", multi.best_is_baseline},
                              {"evaluated", multi.evaluated},
                              {"admissible", multi.admissible}};
  }

  if (p.contains("regular")) {
    const json& rj = p.at("regular");
    const int bins = rj.value("bins", 4);
    const int levels = rj.value("levels", 4);
    const double window_end = rj.value("window_end", T_max);
    const RegularSearch regular = search_regular_controls(
        sc.system, sc.t0, sc.x0, *sc.constraints, budget, bins, levels, window_end, T_max, opts);
    best["regular"] = json{{"masses", regular.best.masses},
                           {"T", regular.best.T},
                           {"bin_edges", regular.bin_edges},
                           {"candidates", regular.table.size()}};
    best["impulse_gap"] = search.best.T - regular.best.T;
  }
  if (!sc.notes.empty()) best["notes"] = sc.notes;
  write_json(out_dir / "best.json", best, outcome);
  outcome.message = "best viability time " + format_value(search.best.T);
  return outcome;
}

}  // namespace

RunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                        const RunOverrides& overrides) {
  RunOutcome outcome;
  const auto started = std::chrono::steady_clock::now();
  try {
    std::filesystem::create_directories(out_dir);

    const SystemValidation sys_check = validate_system(scenario.system);
    if (!sys_check.ok()) {
      outcome.exit_code = 1;
      outcome.message = "system validation failed: " +
                        (sys_check.issues.empty() ? std::string("unknown") : sys_check.issues[0]);
      return outcome;
    }

    SolveOptions opts;
    opts.tol = overrides.tol.value_or(scenario.tol);
    if (overrides.fast_steps) opts.fast_steps = *overrides.fast_steps;

    switch (scenario.task) {
      case TaskType::solve: outcome = run_solve_task(scenario, out_dir, opts); break;
      case TaskType::regularize: outcome = run_regularize_task(scenario, out_dir, opts); break;
      case TaskType::frobenius: outcome = run_frobenius_task(scenario, out_dir, opts); break;
      case TaskType::viability: outcome = run_viability_task(scenario, out_dir, opts); break;
      case TaskType::stability: outcome = run_stability_task(scenario, out_dir, opts); break;
      case TaskType::avoid: outcome = run_avoid_task(scenario, out_dir, opts); break;
    }

    const auto wall =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              started);
    json manifest;
    manifest["scenario"] = scenario.name;
    manifest["hash"] = content_hash_hex(scenario.raw.dump());
    manifest["tool"] = "ivt 0.1.0";
    manifest["tol"] = opts.tol;
    manifest["fast_steps"] = opts.fast_steps;
    manifest["wall_ms"] = wall.count();
    manifest["exit_code"] = outcome.exit_code;
    manifest["outputs"] = outcome.outputs;
    write_json(out_dir / "manifest.json", manifest, outcome);
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.message = e.what();
  } catch (const json::exception& e) {
    outcome.exit_code = 1;
    outcome.message = std::string("malformed task parameters: ") + e.what();
  }
  return outcome;
}

RunOutcome run_scenario_file(const std::filesystem::path& file,
                             const std::filesystem::path& out_dir,
                             const RunOverrides& overrides) {
  try {
    const Scenario sc = load_scenario(file);
    return run_scenario(sc, out_dir, overrides);
  } catch (const Error& e) {
    RunOutcome outcome;
    outcome.exit_code = 1;
    outcome.message = e.what();
    return outcome;
  }
}

std::filesystem::path default_scenario_dir() {
  if (const char* env = std::getenv("IVT_SCENARIO_DIR")) return env;
  return IVT_DEFAULT_SCENARIO_DIR;
}

std::vector<std::filesystem::path> gallery_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (dir.empty() || !std::filesystem::exists(dir)) return files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string content_hash_hex(const std::string& bytes) {
  // FNV-1a, 64 bit
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

}  // namespace ivt

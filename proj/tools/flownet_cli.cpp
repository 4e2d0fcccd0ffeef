// Command-line front end: simulate, analyze, structural, atfm, selftest.
//
// Exit codes: 0 success / controllable, 1 input error, 2 negative verdict,
// 3 inconclusive, 4 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "flownet/controllability.hpp"
#include "flownet/freq.hpp"
#include "flownet/graph_format.hpp"
#include "flownet/report.hpp"
#include "flownet/selftest.hpp"
#include "flownet/solver.hpp"
#include "flownet/structural.hpp"

namespace {

using namespace flownet;

constexpr const char* kVersion = "flownet 1.0.0";

std::string out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FLOWNET_OUT")) return env;
  return ".";
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void add_provenance(ReportTree& rep, const std::string& config_text,
                    std::uint64_t seed) {
  rep.set("provenance.version", std::string(kVersion));
  rep.set("provenance.config_hash", hash_hex(config_text));
  rep.set("provenance.seed", static_cast<std::size_t>(seed));
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Controllable: return 0;
    case Verdict::NotControllable: return 2;
    default: return 3;
  }
}

void write_report(const ReportTree& rep, const std::string& dir,
                  const std::string& name) {
  std::filesystem::create_directories(dir);
  rep.save(dir + "/" + name);
}

int cmd_simulate(const std::string& path, double dt, std::size_t nx, double T,
                 const std::vector<double>& snaps, int depth,
                 const std::string& out) {
  if (dt < 0.0) throw ValidationError("Config", "dt must be positive");
  if (nx == 1) throw ValidationError("Config", "nx must be at least 2");
  ParsedScenario parsed = parse_graph_file(path, depth);
  Scenario sc;
  sc.graph = parsed.graph;
  sc.delays = parsed.delays;
  sc.nx = nx ? nx : parsed.nx;
  sc.dt = dt > 0.0 ? dt : parsed.dt;
  sc.horizon = T > 0.0 ? T : (parsed.horizon > 0.0 ? parsed.horizon : 1.0);
  sc.snapshot_times = snaps;
  if (parsed.control) sc.control = *parsed.control;
  if (!parsed.initial.empty()) {
    sc.initial = zero_profiles(sc.graph.edge_count(), sc.nx);
    for (const auto& [id, pc] : parsed.initial) {
      auto j = sc.graph.edge_index(id);
      if (!j) throw ValidationError("Initial", "unknown edge '" + id + "'");
      for (std::size_t i = 0; i < sc.nx; ++i)
        sc.initial[*j][i] = pc(sc.initial[*j].node(i));
    }
  }

  SolutionRecord rec = solve(sc);

  const std::string dir = out_dir(out);
  std::filesystem::create_directories(dir);
  const std::string stem = stem_of(path);

  CsvWriter traces(dir + "/" + stem + "_traces.csv");
  traces.row({"t", "edge", "inflow", "outflow"});
  for (std::size_t n = 0; n < rec.times.size(); ++n)
    for (std::size_t j = 0; j < sc.graph.edge_count(); ++j)
      traces.row({CsvWriter::num(rec.times[n]), sc.graph.edge(j).id,
                  CsvWriter::num(rec.inflow(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(j))),
                  CsvWriter::num(rec.outflow(static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(j)))});

  if (!rec.snapshots.empty()) {
    CsvWriter snap(dir + "/" + stem + "_profiles.csv");
    snap.row({"t", "edge", "x", "z"});
    for (const auto& [t, state] : rec.snapshots)
      for (std::size_t j = 0; j < state.size(); ++j)
        for (std::size_t i = 0; i < state[j].size(); ++i)
          snap.row({CsvWriter::num(t), sc.graph.edge(j).id,
                    CsvWriter::num(state[j].node(i)),
                    CsvWriter::num(state[j][i])});
  }

  ReportTree rep;
  rep.set("command", std::string("simulate"));
  rep.set("input", path);
  rep.set("edges", sc.graph.edge_count());
  rep.set("nx", rec.nx);
  rep.set("dt", rec.dt);
  rep.set("horizon", sc.horizon);
  rep.set("tau0", sc.graph.tau0());
  rep.set("delay_horizon", sc.delays.horizon());
  rep.set("truncation_depth", rec.truncation_depth);
  rep.set("boundary_residual_t0", rec.boundary_residual_t0);
  rep.set("trace_sup_final", rec.trace_sup.back());
  double mass0 = 0.0, mass1 = 0.0;
  for (std::size_t j = 0; j < sc.graph.edge_count(); ++j) {
    if (!sc.initial.empty()) mass0 += sc.initial[j].integral();
    mass1 += rec.final_state[j].integral();
  }
  rep.set("mass_initial", mass0);
  rep.set("mass_final", mass1);
  add_provenance(rep, write_graph_text(parsed), parsed.seed);
  write_report(rep, dir, stem + ".report");
  std::printf("%s", rep.to_text().c_str());
  return 0;
}

int cmd_analyze(const std::string& path, const std::vector<double>& lambdas,
                double rank_tol, std::size_t krylov, int depth, bool allow_low,
                const std::string& out) {
  ParsedScenario parsed = parse_graph_file(path, depth);
  ControllabilityOptions opt;
  opt.rank_threshold = rank_tol;
  opt.kalman_depth = krylov;
  opt.allow_low_frequency = allow_low;
  for (double l : lambdas) opt.lambda_samples.emplace_back(l, 0.0);

  ControllabilityReport crep =
      approx_controllability(parsed.graph, parsed.delays, opt);
  crep = annotate_history_controllability(crep, parsed.delays);

  const std::string dir = out_dir(out);
  std::filesystem::create_directories(dir);
  const std::string stem = stem_of(path);

  CsvWriter sv(dir + "/" + stem + "_singular_values.csv");
  sv.row({"lambda_re", "lambda_im", "index", "sigma"});
  for (const auto& s : crep.samples)
    for (Eigen::Index i = 0; i < s.singular_values.size(); ++i)
      sv.row({CsvWriter::num(s.lambda.real()), CsvWriter::num(s.lambda.imag()),
              std::to_string(i), CsvWriter::num(s.singular_values[i])});

  ReportTree rep;
  rep.set("command", std::string("analyze"));
  rep.set("input", path);
  rep.set("verdict", std::string(to_string(crep.verdict)));
  rep.set("state_dim", crep.state_dim);
  rep.set("kalman_depth", crep.kalman_depth);
  rep.set("rank_threshold", crep.rank_threshold);
  rep.set("mu0", crep.mu0);
  rep.set("truncation_depth", parsed.graph.truncation_depth());
  for (std::size_t i = 0; i < crep.samples.size(); ++i) {
    const auto& s = crep.samples[i];
    const std::string k = "sample." + std::to_string(i);
    rep.set(k + ".lambda_re", s.lambda.real());
    rep.set(k + ".lambda_im", s.lambda.imag());
    rep.set(k + ".norm1", s.operator_norm1);
    rep.set(k + ".rank", s.rank);
    if (s.skipped_singular) rep.set(k + ".skipped", std::string("singular"));
  }
  if (crep.witness) {
    for (Eigen::Index i = 0; i < crep.witness->size(); ++i) {
      rep.set("witness." + std::to_string(i) + ".re", (*crep.witness)[i].real());
      rep.set("witness." + std::to_string(i) + ".im", (*crep.witness)[i].imag());
    }
    rep.set("witness.lambda_re", crep.witness_lambda->real());
    rep.set("witness.lambda_im", crep.witness_lambda->imag());
  }
  if (parsed.graph.truncation_depth() > 0)
    rep.set("note.section",
            std::string("verdict holds for the depth-") +
                std::to_string(parsed.graph.truncation_depth()) +
                " finite section; no claim is made about the full graph");
  rep.set("note.state_space", crep.state_space_note);
  rep.set("note.history_space", crep.history_space_note);
  rep.set("note.product_space", crep.product_space_note);
  for (std::size_t i = 0; i < crep.notes.size(); ++i)
    rep.set("note." + std::to_string(i), crep.notes[i]);
  add_provenance(rep, write_graph_text(parsed), parsed.seed);
  write_report(rep, dir, stem + ".report");
  std::printf("%s", rep.to_text().c_str());
  return verdict_exit(crep.verdict);
}

int cmd_structural(const std::string& path, int form_t, int trials,
                   std::uint64_t seed, const std::string& out) {
  PatternFile pf = parse_pattern_file(path);
  ReportTree rep;
  rep.set("command", std::string("structural"));
  rep.set("input", path);
  int code = 0;

  if (pf.single) {
    const StructuredMatrix& s = *pf.single;
    rep.set("rows", s.rows());
    rep.set("cols", s.cols());
    const int rank = generic_rank(s);
    rep.set("generic_rank", rank);
    if (form_t > 0) {
      const FormTResult f = has_form_t(s, form_t);
      rep.set("form_t.t", form_t);
      rep.set("form_t.holds", std::string(f.has_form ? "yes" : "no"));
      if (f.has_form) {
        rep.set("form_t.k", f.k);
        std::string rows, cols;
        for (auto r : f.zero_rows) rows += std::to_string(r) + " ";
        for (auto c : f.zero_cols) cols += std::to_string(c) + " ";
        rep.set("form_t.zero_rows", rows);
        rep.set("form_t.zero_cols", cols);
      }
      const CertificateCheck chk = certificate_consistency(s, form_t, trials, seed);
      rep.set("monte_carlo.trials", chk.trials);
      rep.set("monte_carlo.max_rank", chk.max_sampled_rank);
      rep.set("monte_carlo.consistent", std::string(chk.consistent ? "yes" : "no"));
      if (!chk.consistent) code = 4;
    }
  } else {
    StructuralVerdict v = structural_controllability(*pf.a, *pf.k, trials, seed);
    rep.set("state_dim", pf.a->rows());
    rep.set("input_dim", pf.k->cols());
    rep.set("verdict", std::string(v.controllable ? "structurally-controllable"
                                                  : "structurally-uncontrollable"));
    rep.set("generic_rank", v.generic_rank);
    rep.set("target_rank", v.target_rank);
    rep.set("oracle.max_kalman_rank", v.oracle_max_kalman_rank);
    rep.set("oracle.trials", v.oracle_trials);
    rep.set("oracle.agrees", std::string(v.oracle_agrees ? "yes" : "no"));
    if (!v.controllable && v.form.has_form) {
      rep.set("witness.k", v.form.k);
      std::string rows, cols;
      for (auto r : v.form.zero_rows) rows += std::to_string(r) + " ";
      for (auto c : v.form.zero_cols) cols += std::to_string(c) + " ";
      rep.set("witness.zero_rows", rows);
      rep.set("witness.zero_cols", cols);
    }
    if (!v.controllable) code = 2;
    if (!v.oracle_agrees) code = 4;
  }
  add_provenance(rep, read_file(path), seed);
  const std::string dir = out_dir(out);
  write_report(rep, dir, stem_of(path) + ".report");
  std::printf("%s", rep.to_text().c_str());
  return code;
}

int cmd_atfm(const std::string& path, double r, const std::vector<double>& mus,
             double rank_tol, int depth, const std::string& out) {
  ParsedScenario parsed = parse_graph_file(path, depth);
  const MetricGraph& g = parsed.graph;

  ReportTree rep;
  rep.set("command", std::string("atfm"));
  rep.set("input", path);
  rep.set("edges", g.edge_count());
  rep.set("delay", r);

  // contraction abscissa with the discrete kernel at -r on every edge
  std::vector<DelayMeasure> ms;
  for (std::size_t j = 0; j < g.edge_count(); ++j)
    ms.push_back(r > 0.0 ? DelayMeasure::single_atom(r, 1.0)
                         : DelayMeasure::zero());
  const Matrix H = g.allocation() ? *g.allocation() : g.adjacency_B();
  Mu0Estimate mu0 = estimate_mu0(g, DelayBank(ms), H);
  rep.set("mu0", mu0.mu0);

  std::vector<double> samples = mus;
  if (samples.empty())
    samples = {mu0.mu0 + 0.5, mu0.mu0 + 1.0, mu0.mu0 + 2.0};

  const ComplexMatrix K = effective_input(g);
  const auto m = static_cast<int>(g.edge_count());
  bool all_full = true, any_deficient = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    FreqOperator op = atfm_operator(g, r, Complex(samples[i], 0.0));
    const ComplexMatrix km = kalman_matrix(op.matrix, K, g.edge_count());
    const RankResult rr = rank_with_tolerance(km, rank_tol);
    const std::string key = "sample." + std::to_string(i);
    rep.set(key + ".mu", samples[i]);
    rep.set(key + ".norm1", op.norm1());
    rep.set(key + ".rank", rr.rank);
    if (rr.rank != m) {
      all_full = false;
      any_deficient = true;
    }
  }
  Verdict verdict = all_full ? Verdict::Controllable
                             : (any_deficient ? Verdict::NotControllable
                                              : Verdict::Inconclusive);
  rep.set("rank_verdict", std::string(to_string(verdict)));

  // structural test from the allocation and input patterns
  StructuredMatrix a_pat(g.edge_count(), g.edge_count());
  for (std::size_t j = 0; j < g.edge_count(); ++j)
    for (std::size_t k = 0; k < g.edge_count(); ++k)
      if (H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != 0.0)
        a_pat.add_free(j, k);
  StructuredMatrix k_pat(g.edge_count(), g.control_count());
  for (std::size_t j = 0; j < g.edge_count(); ++j)
    for (std::size_t l = 0; l < g.control_count(); ++l)
      if (g.control()(static_cast<Eigen::Index>(j),
                      static_cast<Eigen::Index>(l)) != 0.0)
        k_pat.add_free(j, l);
  StructuralVerdict sv = structural_controllability(a_pat, k_pat, 100);
  rep.set("structural.verdict",
          std::string(sv.controllable ? "structurally-controllable"
                                      : "structurally-uncontrollable"));
  rep.set("structural.generic_rank", sv.generic_rank);
  rep.set("structural.target_rank", sv.target_rank);
  rep.set("structural.oracle_agrees", std::string(sv.oracle_agrees ? "yes" : "no"));

  add_provenance(rep, write_graph_text(parsed), parsed.seed);
  const std::string dir = out_dir(out);
  write_report(rep, dir, stem_of(path) + "_atfm.report");
  std::printf("%s", rep.to_text().c_str());
  return verdict_exit(verdict);
}

int cmd_selftest(const std::string& filter) {
  const auto results = run_selftest(filter);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-4s %-24s %6.1fs  %s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.seconds, r.detail.c_str());
    ok = ok && r.pass;
  }
  if (results.empty()) {
    std::printf("no criterion matches filter '%s'\n", filter.c_str());
    return 1;
  }
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport flows on metric graphs: simulation and "
               "controllability analysis"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string input, out;
  double dt = 0.0, T = 0.0, rank_tol = 1e-8, delay_r = 0.0;
  std::size_t nx = 0, krylov = 0;
  int form_t = 0, trials = 200, depth = -1;
  std::uint64_t seed = 20240601;
  std::vector<double> lambdas, snaps, mus;
  std::string filter;
  bool allow_low = false;

  auto* sim = app.add_subcommand("simulate", "run the time-domain solver");
  sim->add_option("input", input, "graph file")->required();
  sim->add_option("--dt", dt, "time step (default: min(tau0, r)/32)");
  sim->add_option("--nx", nx, "grid points per edge");
  sim->add_option("--T", T, "horizon (overrides the file)");
  sim->add_option("--snap", snaps, "profile snapshot times");
  sim->add_option("--depth", depth, "truncation depth override");
  sim->add_option("--out", out, "output directory (or FLOWNET_OUT)");

  auto* ana = app.add_subcommand("analyze", "approximate controllability");
  ana->add_option("input", input, "graph file")->required();
  ana->add_option("--lambda", lambdas, "real frequency samples");
  ana->add_option("--rank-tol", rank_tol, "relative singular value cutoff");
  ana->add_option("--krylov", krylov, "Krylov depth (default: edge count)");
  ana->add_flag("--force-lambda", allow_low,
                "permit samples at or below the contraction abscissa");
  ana->add_option("--depth", depth, "truncation depth override");
  ana->add_option("--out", out, "output directory");

  auto* str = app.add_subcommand("structural", "generic-rank analysis");
  str->add_option("input", input, "pattern file")->required();
  str->add_option("--t", form_t, "test for form (t)");
  str->add_option("--trials", trials, "Monte-Carlo trials");
  str->add_option("--seed", seed, "Monte-Carlo seed");
  str->add_option("--out", out, "output directory");

  auto* atfm = app.add_subcommand("atfm", "junction model closed form");
  atfm->add_option("input", input, "graph file with [allocation]")->required();
  atfm->add_option("--r", delay_r, "airborne delay")->required();
  atfm->add_option("--lambda", mus, "real frequency samples");
  atfm->add_option("--rank-tol", rank_tol, "relative singular value cutoff");
  atfm->add_option("--depth", depth, "truncation depth override");
  atfm->add_option("--out", out, "output directory");

  auto* self = app.add_subcommand("selftest", "run the acceptance suite");
  self->add_option("--filter", filter, "criterion name substring");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(input, dt, nx, T, snaps, depth, out);
    if (ana->parsed())
      return cmd_analyze(input, lambdas, rank_tol, krylov, depth, allow_low,
                         out);
    if (str->parsed()) return cmd_structural(input, form_t, trials, seed, out);
    if (atfm->parsed())
      return cmd_atfm(input, delay_r, mus, rank_tol, depth, out);
    if (self->parsed()) return cmd_selftest(filter);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.rule().c_str(), e.what());
    return 1;
  } catch (const NonFiniteState& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.rule().c_str(), e.what());
    return e.rule() == "IO" ? 1 : 4;
  }
  return 1;
}

#include "sparsetw/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sparsetw/edge_stats.hpp"
#include "sparsetw/ensembles.hpp"
#include "sparsetw/flow.hpp"
#include "sparsetw/io.hpp"
#include "sparsetw/refined_law.hpp"
#include "sparsetw/spectral.hpp"

namespace sparsetw::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Options {
  int n = 1000;
  double p = 0.0;
  double q = 0.0;
  double s4 = 1.0;
  double t = 0.0;
  int samples = 400;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  int which = 1;
  std::string center = "shifted";
  std::string mode = "strict";
  std::string ensemble = "centered-er";
  int grid = 2001;
  std::string graph;
  std::string reference;
};

// One output file, held in memory until the whole command has succeeded.
struct OutputFile {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<OutputFile> files;
  std::optional<std::uint64_t> master_seed;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::UnsupportedK:
    case ErrorKind::EmptyInput:
    case ErrorKind::ParseError:
    case ErrorKind::DegenerateP:
    case ErrorKind::EmptyGraph:
    case ErrorKind::SizeLimitExceeded:
    case ErrorKind::MissingVectors:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

RootMode parse_mode(const std::string& mode) {
  if (mode == "strict") return RootMode::Strict;
  if (mode == "permissive") return RootMode::Permissive;
  throw ValidationError("--mode must be strict or permissive");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// Numbers stay numbers in meta.json; everything else is kept as text.
json typed_value(const std::string& text) {
  if (text.empty()) return text;
  std::size_t used = 0;
  try {
    if (text.find_first_of(".eE") == std::string::npos) {
      if (text.front() != '-') {
        const unsigned long long v = std::stoull(text, &used);
        if (used == text.size()) return v;
      } else {
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
      }
    }
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

json collect_params(const CLI::App* sub) {
  json params = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    std::string text;
    if (opt->count() > 0) {
      text = opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      text = opt->get_default_str();
    } else {
      continue;
    }
    params[name] = typed_value(text);
  }
  return params;
}

// --p and --q describe the same sparsity; when both are given they must agree.
struct Sparsity {
  std::optional<double> p;
  std::optional<double> q;
};

Sparsity resolve_sparsity(const Options& o, const CLI::Option* p_opt, const CLI::Option* q_opt) {
  Sparsity s;
  if (p_opt->count()) s.p = o.p;
  if (q_opt->count()) s.q = o.q;
  if (s.p && s.q) {
    const double np = o.n * *s.p;
    if (std::abs(*s.q * *s.q - np) > 1e-12 * np)
      throw ValidationError(fmt::format("--p {} and --q {} disagree: q² must equal N·p", *s.p, *s.q));
  }
  return s;
}

/// s4 of the law matching an ensemble's entry distribution.
double ensemble_s4(EnsembleKind kind, const Sparsity& s, double s4_flag) {
  switch (kind) {
    case EnsembleKind::CenteredEr:
    case EnsembleKind::Adjacency:
      return exact_s_k(*s.p, 4);
    case EnsembleKind::DilutedWigner:
      return 1.0 - 3.0 * *s.p;
    case EnsembleKind::SparseGeneric:
      return s4_flag;
    case EnsembleKind::GoeZeroDiag:
      return 0.0;
    case EnsembleKind::Flow:
      break;
  }
  throw ValidationError("flow is not a sampling ensemble");
}

McConfig make_config(const Options& o, EnsembleKind kind, const Sparsity& s) {
  McConfig c;
  c.kind = kind;
  c.n = o.n;
  c.p = s.p;
  c.q = s.q;
  if (kind == EnsembleKind::SparseGeneric && !s.q && s.p) c.q = std::sqrt(o.n * *s.p);
  c.s4 = o.s4;
  c.samples = o.samples;
  c.master_seed = o.seed;
  c.workers = o.workers;
  c.eigen_index = o.which;
  c.centering = parse_centering(o.center);
  c.validate();
  return c;
}

std::string csv_text(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream ss;
  writer(ss);
  return ss.str();
}

RunResult run_density(const Options& o, std::ostream& out) {
  if (o.grid < 2) throw ValidationError("--grid must be >= 2");
  const auto mode = parse_mode(o.mode);
  const auto law = edge(LawParams::make(o.s4, o.q, o.t));
  std::string csv = "E,density\n";
  const int g = o.grid;
  for (int i = 0; i < g; ++i) {
    const double e = 3.0 * static_cast<double>(2 * i - (g - 1)) / static_cast<double>(g - 1);
    csv += fmt::format("{:.17g},{:.17g}\n", e, density(law, e, mode));
  }
  out << fmt::format("density: {} points on [-3, 3], L = {:.12g}\n", g, law.L);
  return {{{"density.csv", std::move(csv)}}, std::nullopt};
}

RunResult run_edge(const Options& o, std::ostream& out) {
  const auto r = edge(LawParams::make(o.s4, o.q, o.t));
  out << fmt::format("L = {:.15g}\ntau = {:.15g}\n", r.L, r.tau);
  std::string csv = "s4,q,t,qt,c4,L,tau,Ldot\n";
  csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", o.s4, o.q, o.t,
                     r.params.qt(), r.params.c4(), r.L, r.tau, l_dot(r));
  return {{{"edge.csv", std::move(csv)}}, std::nullopt};
}

RunResult run_local_law(const Options& o, const Sparsity& s, std::ostream& out) {
  const auto mode = parse_mode(o.mode);
  const auto kind = parse_ensemble_kind(o.ensemble);
  if (kind == EnsembleKind::Adjacency || kind == EnsembleKind::Flow)
    throw ValidationError("local-law supports centered-er, diluted-wigner, sparse-generic and goe");
  McConfig c = make_config(o, kind, s);
  const auto law = LawParams::make(ensemble_s4(kind, s, o.s4), c.resolved_q(), o.t);
  const auto h = draw_sample(c, 0);
  const auto grid = default_scan_grid(o.n);
  const auto report = local_law_scan(eigen(h, false), law, grid, mode);
  const double threshold = std::pow(static_cast<double>(o.n), 0.15);
  out << fmt::format("local-law: {} grid points, fraction with ratio <= N^0.15: {:.4f}\n",
                     report.rows.size(), report.fraction_within(threshold));
  return {{{"local_law.csv", csv_text([&](std::ostream& os) { write_local_law_csv(report, os); })}},
          o.seed};
}

RunResult run_tw(const Options& o, const Sparsity& s, std::ostream& out) {
  const auto kind = parse_ensemble_kind(o.ensemble);
  if (kind == EnsembleKind::Flow) throw ValidationError("tw does not sample the flow ensemble");
  const McConfig c = make_config(o, kind, s);
  const auto law = LawParams::make(ensemble_s4(kind, s, o.s4), c.resolved_q(), 0.0);
  std::optional<ReferenceCdf> ref;
  if (!o.reference.empty()) ref = ReferenceCdf::load(o.reference);

  const auto set = mc_extreme(c, law);
  std::vector<double> comparison;
  if (ref) {
    comparison = ref->values();
  } else {
    McConfig g = c;
    g.kind = EnsembleKind::GoeZeroDiag;
    g.p.reset();
    g.q.reset();
    g.centering = Centering::Unshifted2;
    g.master_seed = splitmix64(o.seed);
    comparison = mc_extreme(g, LawParams::make(0.0, 1.0)).values;
  }
  const auto ks = two_sample_ks(set.values, comparison);
  const double mean = std::accumulate(set.values.begin(), set.values.end(), 0.0) / set.values.size();
  json summary = {{"center_used", set.center_used}, {"mean_rescaled", mean}, {"ks_statistic", ks.statistic},
                  {"ks_p_value", ks.p_value}, {"n1", ks.n1}, {"n2", ks.n2},
                  {"comparison", ref ? "reference_cdf" : "goe_monte_carlo"}};
  out << fmt::format("tw: center = {:.10g}, mean rescaled = {:.4f}, KS D = {:.4f}, p = {:.4g}\n",
                     set.center_used, mean, ks.statistic, ks.p_value);
  return {{{"edge_samples.csv", csv_text([&](std::ostream& os) { write_edge_samples_csv(set, os); })},
           {"ks.json", summary.dump(2) + "\n"}},
          o.seed};
}

RunResult run_flow(const Options& o, std::ostream& out) {
  const auto law0 = LawParams::make(o.s4, o.q, 0.0);
  const auto grid = default_t_grid(o.n);
  const auto traj = trajectory(law0, grid);
  out << fmt::format("flow: {} rows, L_0 = {:.12g}, L_end = {:.12g}\n", traj.rows.size(),
                     traj.rows.front().Lt, traj.rows.back().Lt);
  return {{{"flow_trajectory.csv", csv_text([&](std::ostream& os) { write_trajectory_csv(traj, os); })}},
          std::nullopt};
}

RunResult run_community(const Options& o, std::ostream& out) {
  if (o.graph.empty()) throw ValidationError("--graph is required");
  if (o.reference.empty()) throw ValidationError("--reference is required");
  const auto g = ingest_graph(o.graph);
  const auto ref = ReferenceCdf::load(o.reference);
  const auto law = community_law(g.n, g.p_hat);
  const auto r = community_statistic(g.adjacency, law, ref);
  json summary = {{"n", g.n}, {"edges", g.edges}, {"p_hat", g.p_hat}, {"lambda2", r.lambda2},
                  {"center", r.center}, {"statistic", r.statistic}, {"p_value", r.p_value},
                  {"regime_warning", r.regime_warning}};
  out << fmt::format("community: N = {}, p_hat = {:.6g}, T = {:.6g}, p-value = {:.4g}\n", g.n, g.p_hat,
                     r.statistic, r.p_value);
  return {{{"community.json", summary.dump(2) + "\n"}}, std::nullopt};
}

RunResult run_build_reference(const Options& o, std::ostream& out) {
  const auto ref = build_reference_cdf(o.n, o.samples, o.seed, o.workers);
  out << fmt::format("reference: N_ref = {}, M_ref = {}, median = {:.6g}\n", ref.n_ref(), ref.m_ref(),
                     ref.quantile(0.5));
  return {{{"reference_cdf.csv", ref.serialize()}}, o.seed};
}

void write_outputs(const RunResult& result, const fs::path& dir, const std::string& command,
                   const json& params, double elapsed) {
  for (const auto& f : result.files) write_file_atomic(dir / f.name, f.content);
  json meta = {{"command", command},
               {"params", params},
               {"master_seed", result.master_seed ? json(*result.master_seed) : json(nullptr)},
               {"version", std::string(kVersion)},
               {"timestamp", utc_timestamp()},
               {"elapsed_s", elapsed}};
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.workers = std::max(1, omp_get_num_procs());

  CLI::App app{"Refined spectral law and edge statistics of sparse random matrices", "sparsetw"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::map<std::string, CLI::Option*> p_opts, q_opts;
  auto add_sparsity = [&](CLI::App* sub) {
    p_opts[sub->get_name()] = sub->add_option("--p", o.p, "edge probability (q² = N p)");
    q_opts[sub->get_name()] = sub->add_option("--q", o.q, "sparsity parameter");
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "root selection: strict|permissive")
        ->check(CLI::IsMember({"strict", "permissive"}))
        ->capture_default_str();
  };
  auto add_out = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--out", o.out, "output directory");
    if (required) opt->required();
  };

  auto* density_cmd = app.add_subcommand("density", "refined density on a symmetric grid over [-3, 3]");
  density_cmd->add_option("--s4", o.s4, "normalized fourth cumulant")->required();
  density_cmd->add_option("--q", o.q, "sparsity parameter")->required();
  density_cmd->add_option("--t", o.t, "flow time")->capture_default_str();
  density_cmd->add_option("--grid", o.grid, "number of grid points")->capture_default_str();
  add_mode(density_cmd);
  add_out(density_cmd, true);

  auto* edge_cmd = app.add_subcommand("edge", "upper edge L and stationary point tau");
  edge_cmd->add_option("--s4", o.s4, "normalized fourth cumulant")->required();
  edge_cmd->add_option("--q", o.q, "sparsity parameter")->required();
  edge_cmd->add_option("--t", o.t, "flow time")->capture_default_str();
  add_out(edge_cmd, false);

  auto* local_cmd = app.add_subcommand("local-law", "empirical vs refined Stieltjes transform on the default grid");
  local_cmd->add_option("--ensemble", o.ensemble, "centered-er|diluted-wigner|sparse-generic|goe")
      ->capture_default_str();
  local_cmd->add_option("--n", o.n, "matrix dimension")->capture_default_str();
  add_sparsity(local_cmd);
  local_cmd->add_option("--s4", o.s4, "fourth cumulant (sparse-generic)")->capture_default_str();
  local_cmd->add_option("--t", o.t, "flow time of the law")->capture_default_str();
  local_cmd->add_option("--seed", o.seed, "master seed")->required();
  add_mode(local_cmd);
  add_out(local_cmd, true);

  auto* tw_cmd = app.add_subcommand("tw", "Monte Carlo extreme eigenvalues and KS comparison with GOE");
  tw_cmd->add_option("--ensemble", o.ensemble, "sampling ensemble")->capture_default_str();
  tw_cmd->add_option("--n", o.n, "matrix dimension")->capture_default_str();
  add_sparsity(tw_cmd);
  tw_cmd->add_option("--s4", o.s4, "fourth cumulant (sparse-generic)")->capture_default_str();
  tw_cmd->add_option("--samples", o.samples, "Monte Carlo samples")->capture_default_str();
  tw_cmd->add_option("--seed", o.seed, "master seed")->required();
  tw_cmd->add_option("--workers", o.workers, "worker threads");
  tw_cmd->add_option("--which", o.which, "eigenvalue index, 1 = largest")->capture_default_str();
  tw_cmd->add_option("--center", o.center, "shifted|unshifted|adjacency")
      ->check(CLI::IsMember({"shifted", "unshifted", "adjacency"}))
      ->capture_default_str();
  tw_cmd->add_option("--reference", o.reference, "reference_cdf.csv to compare against");
  add_out(tw_cmd, true);

  auto* flow_cmd = app.add_subcommand("flow", "edge trajectory along the Dyson matrix flow");
  flow_cmd->add_option("--s4", o.s4, "normalized fourth cumulant")->required();
  flow_cmd->add_option("--q", o.q, "sparsity parameter")->required();
  flow_cmd->add_option("--n", o.n, "dimension setting the final time 6 log N")->capture_default_str();
  add_out(flow_cmd, true);

  auto* community_cmd = app.add_subcommand("community", "second-eigenvalue test statistic for a graph");
  community_cmd->add_option("--graph", o.graph, "edge list file")->required();
  community_cmd->add_option("--reference", o.reference, "reference_cdf.csv")->required();
  add_out(community_cmd, false);

  auto* ref_cmd = app.add_subcommand("build-reference", "GOE edge reference distribution");
  ref_cmd->add_option("--n", o.n, "N_ref (>= 1000)")->capture_default_str();
  ref_cmd->add_option("--samples", o.samples, "M_ref (>= 1000)")->capture_default_str();
  ref_cmd->add_option("--seed", o.seed, "master seed")->required();
  ref_cmd->add_option("--workers", o.workers, "worker threads");
  add_out(ref_cmd, true);

  auto* self_cmd = app.add_subcommand("selftest", "exact identity suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    if (sub == self_cmd) return run_selftest(out) ? kExitOk : kExitRuntime;
    if (o.workers < 1) throw ValidationError("--workers must be >= 1");
    if (o.samples < 1) throw ValidationError("--samples must be >= 1");

    RunResult result;
    if (sub == density_cmd) result = run_density(o, out);
    else if (sub == edge_cmd) result = run_edge(o, out);
    else if (sub == local_cmd) result = run_local_law(o, resolve_sparsity(o, p_opts[name], q_opts[name]), out);
    else if (sub == tw_cmd) result = run_tw(o, resolve_sparsity(o, p_opts[name], q_opts[name]), out);
    else if (sub == flow_cmd) result = run_flow(o, out);
    else if (sub == community_cmd) result = run_community(o, out);
    else if (sub == ref_cmd) result = run_build_reference(o, out);

    if (!o.out.empty()) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_outputs(result, o.out, name, collect_params(sub), elapsed);
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

bool run_selftest(std::ostream& out) {
  bool all_ok = true;
  auto report = [&](const std::string& label, double value, double limit) {
    const bool ok = value <= limit;
    all_ok = all_ok && ok;
    out << fmt::format("[{}] {:<40} max = {:.3e} (limit {:.0e})\n", ok ? "PASS" : "FAIL", label, value, limit);
  };

  std::vector<ComplexUpper> zs;
  for (double e : {-2.5, -1.0, 0.0, 0.7, 2.0, 2.9})
    for (double eta : {1e-3, 1e-1, 1.0, 3.0}) zs.emplace_back(e, eta);

  double msc_res = 0.0, law_res = 0.0;
  const auto law = LawParams::make(1.0, std::sqrt(1000.0));
  for (const auto& z : zs) {
    const cdouble m = msc(z);
    msc_res = std::max(msc_res, std::abs(1.0 + z.value() * m + m * m));
    const cdouble w = solve_w(law, z);
    law_res = std::max(law_res, std::abs(eval_P(law, z.value(), w)) / (1.0 + std::abs(z.value())));
  }
  report("semicircle equation 1 + z m + m^2", msc_res, 1e-14);
  report("refined law P(w)/(1+|z|)", law_res, 1e-12);

  double ward = 0.0, resolvent = 0.0, smoothed = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto h = sample_centered_er(100, 0.1, RngStream{seed, 0});
    const auto spec = eigen(h, false);
    for (const ComplexUpper z : {ComplexUpper(0.5, 0.1), ComplexUpper(-1.9, 0.01), ComplexUpper(2.2, 1.0)}) {
      const auto g = green_matrix(h, z);
      ward = std::max(ward, ward_residual(g));
      resolvent = std::max(resolvent, resolvent_identity_residual(h, g));
      smoothed = std::max(smoothed, std::abs(smoothed_count(spec, z.re(), z.im()) - empirical_m(spec, z).imag() / M_PI));
    }
  }
  report("Ward identity", ward, 1e-10);
  report("resolvent identity", resolvent, 1e-10);
  report("smoothed count vs Im m / pi", smoothed, 1e-12);
  out << (all_ok ? "selftest passed\n" : "selftest FAILED\n");
  return all_ok;
}

}  // namespace sparsetw::cli

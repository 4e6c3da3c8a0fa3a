#include "sparsetw/edge_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "sparsetw/io.hpp"
#include "sparsetw/spectral.hpp"

namespace sparsetw {

std::string_view to_string(Centering c) {
  switch (c) {
    case Centering::ShiftedL: return "shifted";
    case Centering::Unshifted2: return "unshifted";
    case Centering::Adjacency: return "adjacency";
  }
  return "unknown";
}

Centering parse_centering(std::string_view tag) {
  for (auto c : {Centering::ShiftedL, Centering::Unshifted2, Centering::Adjacency})
    if (to_string(c) == tag) return c;
  throw Error(ErrorKind::InvalidParameter, "unknown centering '" + std::string(tag) + "'");
}

void McConfig::validate() const {
  require(n >= 2, ErrorKind::InvalidParameter, "N must be >= 2");
  require(samples >= 1, ErrorKind::InvalidParameter, "need at least one sample");
  require(workers >= 1, ErrorKind::InvalidParameter, "need at least one worker");
  require(eigen_index >= 1 && eigen_index <= n, ErrorKind::InvalidParameter,
          "eigenvalue index must lie in [1, N]");
  require(!flow_time || *flow_time >= 0.0, ErrorKind::InvalidParameter, "flow time must be >= 0");
  switch (kind) {
    case EnsembleKind::Adjacency:
    case EnsembleKind::CenteredEr:
    case EnsembleKind::DilutedWigner:
      require(p.has_value(), ErrorKind::InvalidParameter,
              std::string(to_string(kind)) + " needs p");
      require(*p > 0.0 && *p < 1.0, ErrorKind::InvalidParameter, "p must lie in (0,1)");
      if (q) {
        const double np = n * *p;
        require(std::abs(*q * *q - np) <= 1e-12 * np, ErrorKind::InvalidParameter,
                "q and p disagree (q² != N p)");
      }
      break;
    case EnsembleKind::SparseGeneric:
      require(q.has_value() || p.has_value(), ErrorKind::InvalidParameter, "sparse-generic needs q");
      break;
    case EnsembleKind::GoeZeroDiag:
      break;
    case EnsembleKind::Flow:
      throw Error(ErrorKind::InvalidParameter,
                  "use flow_time with a base ensemble instead of kind = flow");
  }
}

double McConfig::resolved_q() const {
  if (q) return *q;
  if (p) return std::sqrt(n * *p);
  return std::sqrt(static_cast<double>(n));
}

namespace {

MatrixSample draw_base(const McConfig& c, const RngStream& stream) {
  switch (c.kind) {
    case EnsembleKind::Adjacency: return sample_adjacency(c.n, *c.p, stream);
    case EnsembleKind::CenteredEr: return sample_centered_er(c.n, *c.p, stream);
    case EnsembleKind::DilutedWigner: return sample_diluted_wigner(c.n, *c.p, stream);
    case EnsembleKind::SparseGeneric:
      return sample_sparse_generic(SparsityProfile::from_q(c.n, c.resolved_q(), c.s3, c.s4), stream);
    case EnsembleKind::GoeZeroDiag: return sample_goe_zero_diag(c.n, stream);
    case EnsembleKind::Flow: break;
  }
  throw Error(ErrorKind::InvalidParameter, "cannot draw a base sample of kind flow");
}

struct Draw {
  double lambda;
  std::uint64_t seed;
};

Draw run_sample(const McConfig& c, std::uint64_t j) {
  const MatrixSample h = draw_sample(c, j);
  const auto spec = eigen(h, false);
  return {spec.eigenvalues[c.eigen_index - 1], RngStream{c.master_seed, j}.derived_seed()};
}

EdgeSampleSet assemble(const McConfig& c, double center, std::vector<Draw> draws) {
  EdgeSampleSet set;
  set.config = c;
  set.center_used = center;
  const double scale = std::cbrt(static_cast<double>(c.n) * c.n);
  for (const auto& d : draws) {
    set.raw.push_back(d.lambda);
    set.seeds.push_back(d.seed);
    set.values.push_back(scale * (d.lambda - center));
  }
  return set;
}

[[noreturn]] void rethrow_tagged(std::exception_ptr e, std::size_t j) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    throw Error(err.kind(), "sample " + std::to_string(j) + ": " + err.what());
  }
}

}  // namespace

MatrixSample draw_sample(const McConfig& c, std::uint64_t j) {
  const RngStream stream{c.master_seed, j};
  if (!c.flow_time) return draw_base(c, stream);
  const MatrixSample h0 = draw_base(c, stream.child(0));
  const MatrixSample w = sample_goe_zero_diag(c.n, stream.child(1));
  return dyson_flow(h0, w, *c.flow_time);
}

double resolve_center(const McConfig& c, const LawParams& law) {
  switch (c.centering) {
    case Centering::Unshifted2: return 2.0;
    case Centering::ShiftedL: return edge(law).L;
    case Centering::Adjacency: return edge(law).L - adjacency_shift(c.n, c.resolved_q()).a;
  }
  return 2.0;
}

EdgeSampleSet mc_extreme_serial(const McConfig& c, const LawParams& law) {
  c.validate();
  const double center = resolve_center(c, law);
  std::vector<Draw> draws;
  draws.reserve(c.samples);
  for (int j = 0; j < c.samples; ++j) {
    try {
      draws.push_back(run_sample(c, static_cast<std::uint64_t>(j)));
    } catch (const Error&) {
      rethrow_tagged(std::current_exception(), j);
    }
  }
  return assemble(c, center, std::move(draws));
}

EdgeSampleSet mc_extreme(const McConfig& c, const LawParams& law) {
  c.validate();
  const double center = resolve_center(c, law);
  std::vector<Draw> draws(c.samples);
  std::vector<std::exception_ptr> errors(c.samples);
#pragma omp parallel for schedule(dynamic, 1) num_threads(c.workers)
  for (int j = 0; j < c.samples; ++j) {
    try {
      draws[j] = run_sample(c, static_cast<std::uint64_t>(j));
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (int j = 0; j < c.samples; ++j)
    if (errors[j]) rethrow_tagged(errors[j], j);
  return assemble(c, center, std::move(draws));
}

void write_edge_samples_csv(const EdgeSampleSet& set, std::ostream& os) {
  os << "sample_index,seed,lambda_raw,rescaled\n";
  for (std::size_t j = 0; j < set.values.size(); ++j) {
    os << fmt::format("{},{},{:.17g},{:.17g}\n", j, set.seeds[j], set.raw[j], set.values[j]);
  }
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult two_sample_ks(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::EmptyInput, "KS needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Step through the merged set of jump points, consuming ties on both sides.
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / n1 - j / n2));
  }
  KsResult r{d, x.size(), y.size(), 1.0};
  const double ne = n1 * n2 / (n1 + n2);
  const double root = std::sqrt(ne);
  r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return r;
}

KsResult two_sample_ks(const EdgeSampleSet& a, const EdgeSampleSet& b) {
  return two_sample_ks(std::span<const double>(a.values), std::span<const double>(b.values));
}

ReferenceCdf::ReferenceCdf(std::vector<double> values, int n_ref, std::uint64_t seed)
    : values_(std::move(values)), n_ref_(n_ref), seed_(seed) {
  require(!values_.empty(), ErrorKind::EmptyInput, "reference CDF needs samples");
  std::sort(values_.begin(), values_.end());
}

double ReferenceCdf::cdf(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double ReferenceCdf::quantile(double u) const {
  require(u >= 0.0 && u <= 1.0, ErrorKind::InvalidParameter, "quantile level must lie in [0,1]");
  const double pos = u * static_cast<double>(values_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values_.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

std::string ReferenceCdf::serialize() const {
  std::string out = fmt::format("# version={} N_ref={} M_ref={} seed={}\n", kFormatVersion, n_ref_,
                                values_.size(), seed_);
  for (double v : values_) out += fmt::format("{:.17g}\n", v);
  return out;
}

ReferenceCdf ReferenceCdf::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  std::getline(in, header);
  int version = 0, n_ref = 0;
  std::size_t m_ref = 0;
  unsigned long long seed = 0;
  require(std::sscanf(header.c_str(), "# version=%d N_ref=%d M_ref=%zu seed=%llu", &version, &n_ref,
                      &m_ref, &seed) == 4,
          ErrorKind::ParseError, "reference CDF header is malformed: '" + header + "'");
  require(version == kFormatVersion, ErrorKind::ParseError,
          "unsupported reference CDF version " + std::to_string(version));
  std::vector<double> values;
  values.reserve(m_ref);
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    require(res.ec == std::errc() && res.ptr == line.data() + line.size(), ErrorKind::ParseError,
            "line " + std::to_string(lineno) + ": not a number");
    values.push_back(v);
  }
  require(values.size() == m_ref, ErrorKind::ParseError, "M_ref does not match the number of values");
  require(std::is_sorted(values.begin(), values.end()), ErrorKind::ParseError,
          "reference values are not sorted");
  return ReferenceCdf(std::move(values), n_ref, seed);
}

void ReferenceCdf::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

ReferenceCdf ReferenceCdf::load(const std::filesystem::path& path) { return parse(read_file(path)); }

ReferenceCdf build_reference_cdf(int n_ref, int m_ref, std::uint64_t seed, int workers) {
  require(n_ref >= 1000 && m_ref >= 1000, ErrorKind::InvalidParameter,
          "reference CDF needs N_ref >= 1000 and M_ref >= 1000");
  McConfig c;
  c.kind = EnsembleKind::GoeZeroDiag;
  c.n = n_ref;
  c.samples = m_ref;
  c.master_seed = seed;
  c.workers = workers;
  c.centering = Centering::Unshifted2;
  auto set = mc_extreme(c, LawParams::make(0.0, std::sqrt(static_cast<double>(n_ref))));
  return ReferenceCdf(std::move(set.values), n_ref, seed);
}

AdjacencyShift adjacency_shift(int n, double q) {
  require(n >= 1 && q >= 0.0 && q * q < n, ErrorKind::InvalidParameter, "adjacency shift needs q² < N");
  const double f = q / std::sqrt(1.0 - q * q / n);
  return {f, f / n};
}

OutlierSummary adjacency_outlier_check(const McConfig& config) {
  require(config.kind == EnsembleKind::Adjacency && !config.flow_time, ErrorKind::InvalidParameter,
          "outlier check needs the adjacency ensemble");
  McConfig c = config;
  c.eigen_index = 1;
  c.centering = Centering::Unshifted2;
  const auto set = mc_extreme(c, LawParams::make(0.0, 1.0));
  const double m = static_cast<double>(set.raw.size());
  OutlierSummary s;
  s.samples = static_cast<int>(set.raw.size());
  s.mean = std::accumulate(set.raw.begin(), set.raw.end(), 0.0) / m;
  double ss = 0.0;
  for (double x : set.raw) ss += (x - s.mean) * (x - s.mean);
  const double var = s.samples > 1 ? ss / (m - 1.0) : 0.0;
  s.stderr_mean = std::sqrt(var / m);
  s.rescaled_variance = 0.5 * c.n * var;
  const auto shift = adjacency_shift(c.n, c.resolved_q());
  s.predicted = shift.f - shift.a + 1.0 / shift.f;
  return s;
}

IngestedGraph normalize_graph(const Eigen::MatrixXd& raw, std::uint64_t seed) {
  const auto n = static_cast<int>(raw.rows());
  require(n >= 2 && raw.cols() == n, ErrorKind::EmptyGraph, "graph needs at least two vertices");
  std::size_t edges = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (raw(i, j) != 0.0) ++edges;
  require(edges > 0, ErrorKind::EmptyGraph, "graph has no edges");
  const double p_hat = 2.0 * static_cast<double>(edges) / (static_cast<double>(n) * (n - 1));
  require(p_hat < 1.0, ErrorKind::DegenerateP, "complete graph: estimated p = 1");
  const double scale = 1.0 / std::sqrt(n * p_hat * (1.0 - p_hat));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (raw(i, j) != 0.0) a(i, j) = a(j, i) = scale;
  return IngestedGraph{MatrixSample(std::move(a), EnsembleKind::Adjacency, seed), n, edges, p_hat};
}

IngestedGraph ingest_graph_text(std::string_view text) {
  std::vector<std::pair<long long, long long>> pairs;
  long long max_id = -1;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) {
      if (end == text.size()) break;
      continue;
    }
    std::string second, extra;
    long long u = 0, v = 0;
    auto parse_id = [&](const std::string& tok, long long& out) {
      const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), out);
      return r.ec == std::errc() && r.ptr == tok.data() + tok.size() && out >= 0;
    };
    require(static_cast<bool>(ls >> second) && !(ls >> extra) && parse_id(first, u) && parse_id(second, v),
            ErrorKind::ParseError,
            "line " + std::to_string(lineno) + ": expected two non-negative vertex ids");
    pairs.emplace_back(u, v);
    max_id = std::max({max_id, u, v});
    if (end == text.size()) break;
  }
  require(!pairs.empty(), ErrorKind::EmptyGraph, "edge list is empty");
  require(max_id < 100000, ErrorKind::InvalidParameter, "vertex ids beyond dense-storage range");
  const int n = static_cast<int>(max_id + 1);
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : pairs) {
    if (u == v) continue;
    raw(u, v) = raw(v, u) = 1.0;
  }
  return normalize_graph(raw);
}

IngestedGraph ingest_graph(const std::filesystem::path& path) { return ingest_graph_text(read_file(path)); }

std::string edge_list_text(const Eigen::MatrixXd& raw) {
  std::string out;
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index j = i + 1; j < raw.cols(); ++j)
      if (raw(i, j) != 0.0) out += fmt::format("{} {}\n", i, j);
  return out;
}

LawParams community_law(int n, double p_hat) {
  return LawParams::make(exact_s_k(p_hat, 4), std::sqrt(n * p_hat), 0.0);
}

CommunityResult community_statistic(const MatrixSample& adjacency, const LawParams& law,
                                    const ReferenceCdf& ref) {
  const int n = adjacency.n();
  require(n >= 2, ErrorKind::InvalidParameter, "community statistic needs N >= 2");
  CommunityResult r;
  const auto shift = adjacency_shift(n, law.q());
  r.center = edge(law).L - shift.a;
  r.lambda2 = eigen(adjacency, false).eigenvalues[1];
  r.statistic = std::cbrt(static_cast<double>(n) * n) * (r.lambda2 - r.center);
  r.p_value = 1.0 - ref.cdf(r.statistic);
  if (law.q() <= std::pow(static_cast<double>(n), 1.0 / 6.0)) {
    r.regime_warning = true;
    warn(fmt::format("q = {:.4g} <= N^(1/6) = {:.4g}: edge universality may fail in this regime",
                     law.q(), std::pow(static_cast<double>(n), 1.0 / 6.0)));
  }
  return r;
}

}  // namespace sparsetw

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sparsetw/ensembles.hpp"
#include "sparsetw/refined_law.hpp"

namespace sparsetw {

/// Where the rescaled statistic N^{2/3}(λ_k - center) is centered.
///  ShiftedL   - the refined edge L
///  Unshifted2 - the semicircle edge 2
///  Adjacency  - L - a, the bulk edge of the non-centered adjacency matrix
enum class Centering { ShiftedL, Unshifted2, Adjacency };

std::string_view to_string(Centering c);
/// Accepts "shifted", "unshifted", "adjacency".
Centering parse_centering(std::string_view tag);

struct McConfig {
  EnsembleKind kind = EnsembleKind::CenteredEr;
  int n = 0;
  std::optional<double> p;
  std::optional<double> q;
  double s3 = 0.0;  // sparse-generic only
  double s4 = 1.0;  // sparse-generic only
  int samples = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  int eigen_index = 1;  // 1 = largest
  Centering centering = Centering::ShiftedL;
  /// When set, each sample is H_t = flow(H0, W, t) with H0 drawn from `kind`
  /// and W a zero-diagonal GOE drawn from an independent sub-stream.
  std::optional<double> flow_time;

  void validate() const;
  /// q from p (q² = Np) when only p is given.
  double resolved_q() const;
};

/// Matrix draw j of a Monte Carlo run; a pure function of (config, j).
MatrixSample draw_sample(const McConfig& config, std::uint64_t j);

struct EdgeSampleSet {
  std::vector<double> values;  // N^{2/3}(λ_k - center)
  std::vector<double> raw;     // λ_k
  std::vector<std::uint64_t> seeds;
  McConfig config;
  double center_used = 0.0;
};

double resolve_center(const McConfig& config, const LawParams& law);

/// Sample j runs on stream (master_seed, j) and lands in slot j, so results do not
/// depend on the worker count. Failures are rethrown tagged with the sample index.
EdgeSampleSet mc_extreme(const McConfig& config, const LawParams& law);
/// Single-threaded reference for mc_extreme.
EdgeSampleSet mc_extreme_serial(const McConfig& config, const LawParams& law);

/// CSV: sample_index,seed,lambda_raw,rescaled
void write_edge_samples_csv(const EdgeSampleSet& set, std::ostream& os);

struct KsResult {
  double statistic = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double p_value = 1.0;
};

/// Two-sided Kolmogorov tail Q(λ) = 2 Σ_{j>=1} (-1)^{j-1} exp(-2 j² λ²).
double kolmogorov_survival(double lambda);

/// Exact sup distance of the two empirical CDFs; asymptotic p-value with the
/// Stephens effective-size correction.
KsResult two_sample_ks(std::span<const double> a, std::span<const double> b);
KsResult two_sample_ks(const EdgeSampleSet& a, const EdgeSampleSet& b);

/// Empirical stand-in for the GOE Tracy–Widom law: sorted N^{2/3}(λ₁ - 2) of
/// zero-diagonal GOE draws.
class ReferenceCdf {
 public:
  static constexpr int kFormatVersion = 1;

  ReferenceCdf(std::vector<double> values, int n_ref, std::uint64_t seed);

  double cdf(double x) const;
  double quantile(double u) const;
  const std::vector<double>& values() const { return values_; }
  int n_ref() const { return n_ref_; }
  int m_ref() const { return static_cast<int>(values_.size()); }
  std::uint64_t seed() const { return seed_; }

  /// Header "# version=1 N_ref=... M_ref=... seed=..." then one value per line.
  std::string serialize() const;
  static ReferenceCdf parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static ReferenceCdf load(const std::filesystem::path& path);

 private:
  std::vector<double> values_;
  int n_ref_;
  std::uint64_t seed_;
};

/// N_ref >= 1000 and M_ref >= 1000.
ReferenceCdf build_reference_cdf(int n_ref, int m_ref, std::uint64_t seed, int workers = 1);

struct AdjacencyShift {
  double f;
  double a;
};

/// f = q (1 - q²/N)^{-1/2}, a = f/N, from A = Ã + f|e><e| - a·I.
AdjacencyShift adjacency_shift(int n, double q);

struct OutlierSummary {
  double mean = 0.0;
  double stderr_mean = 0.0;
  double predicted = 0.0;          // f - a + 1/f
  double rescaled_variance = 0.0;  // sample variance of sqrt(N/2)(λ₁ - mean)
  int samples = 0;
};

OutlierSummary adjacency_outlier_check(const McConfig& config);

struct IngestedGraph {
  MatrixSample adjacency;  // 0/1 entries scaled by 1/sqrt(N p̂ (1 - p̂))
  int n = 0;
  std::size_t edges = 0;
  double p_hat = 0.0;
};

/// Whitespace-separated undirected edge list, 0-based ids; '#' starts a comment.
/// Self-loops and duplicate edges are dropped.
IngestedGraph ingest_graph(const std::filesystem::path& path);
IngestedGraph ingest_graph_text(std::string_view text);
/// Rescales a raw 0/1 symmetric adjacency by the edge-density estimate.
IngestedGraph normalize_graph(const Eigen::MatrixXd& raw, std::uint64_t seed = 0);
std::string edge_list_text(const Eigen::MatrixXd& raw);

/// Law used for the community test: s4 from the centered Erdős–Rényi formula at p̂,
/// q = sqrt(N p̂), t = 0.
LawParams community_law(int n, double p_hat);

struct CommunityResult {
  double statistic = 0.0;  // N^{2/3}(λ₂ - (L - a))
  double p_value = 1.0;    // 1 - F_ref(statistic)
  double lambda2 = 0.0;
  double center = 0.0;
  bool regime_warning = false;  // q <= N^{1/6}
};

CommunityResult community_statistic(const MatrixSample& adjacency, const LawParams& law,
                                    const ReferenceCdf& ref);

}  // namespace sparsetw

#include "sparsetw/ensembles.hpp"

#include <string>

namespace sparsetw {

namespace {

void check_n_p(int n, double p) {
  require(n >= 2, ErrorKind::InvalidParameter, "N must be >= 2, got " + std::to_string(n));
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameter,
          "p must lie in (0,1), got " + std::to_string(p));
}

}  // namespace

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::Adjacency: return "adjacency";
    case EnsembleKind::CenteredEr: return "centered-er";
    case EnsembleKind::DilutedWigner: return "diluted-wigner";
    case EnsembleKind::SparseGeneric: return "sparse-generic";
    case EnsembleKind::GoeZeroDiag: return "goe-zero-diag";
    case EnsembleKind::Flow: return "flow";
  }
  return "unknown";
}

EnsembleKind parse_ensemble_kind(std::string_view tag) {
  for (auto k : {EnsembleKind::Adjacency, EnsembleKind::CenteredEr, EnsembleKind::DilutedWigner,
                 EnsembleKind::SparseGeneric, EnsembleKind::GoeZeroDiag, EnsembleKind::Flow}) {
    if (to_string(k) == tag) return k;
  }
  if (tag == "goe") return EnsembleKind::GoeZeroDiag;
  throw Error(ErrorKind::InvalidParameter, "unknown ensemble '" + std::string(tag) + "'");
}

SparsityProfile SparsityProfile::from_p(int n, double p, double s3, double s4) {
  check_n_p(n, p);
  SparsityProfile sp{n, std::sqrt(n * p), p, s3, s4};
  sp.validate();
  return sp;
}

SparsityProfile SparsityProfile::from_q(int n, double q, double s3, double s4) {
  SparsityProfile sp{n, q, std::nullopt, s3, s4};
  sp.validate();
  return sp;
}

void SparsityProfile::validate() const {
  require(n >= 2, ErrorKind::InvalidParameter, "N must be >= 2");
  require(q > 0.0 && std::isfinite(q), ErrorKind::InvalidParameter, "q must be positive");
  require(q <= std::sqrt(static_cast<double>(n)) * (1.0 + 1e-15), ErrorKind::InvalidParameter,
          "q must not exceed sqrt(N)");
  if (p) {
    const double np = n * *p;
    require(std::abs(q * q - np) <= 1e-12 * np, ErrorKind::InvalidParameter,
            "q^2 and N p disagree");
  }
}

MatrixSample::MatrixSample(Eigen::MatrixXd entries, EnsembleKind kind, std::uint64_t seed, double t)
    : entries_(std::move(entries)), kind_(kind), seed_(seed), t_(t) {
  require(entries_.rows() == entries_.cols() && entries_.rows() >= 1, ErrorKind::DimensionMismatch,
          "matrix sample must be square and nonempty");
  const Eigen::Index n = entries_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    require(entries_(i, i) == 0.0, ErrorKind::InvalidParameter, "nonzero diagonal entry");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      require(entries_(i, j) == entries_(j, i), ErrorKind::InvalidParameter, "matrix is not symmetric");
    }
  }
}

AdjacencyEntry::AdjacencyEntry(int n, double p) : value(0.0), p(p) {
  check_n_p(n, p);
  value = 1.0 / std::sqrt(n * p * (1.0 - p));
}

CenteredErEntry::CenteredErEntry(int n, double p) : hi(0.0), lo(0.0), p(p) {
  check_n_p(n, p);
  const double scale = std::sqrt(n * p * (1.0 - p));
  hi = (1.0 - p) / scale;
  lo = -p / scale;
}

DilutedWignerEntry::DilutedWignerEntry(int n, double p) : magnitude(0.0), p(p) {
  check_n_p(n, p);
  magnitude = 1.0 / std::sqrt(n * p);
}

ThreePointEntry ThreePointEntry::match(int n, double q, double s3, double s4) {
  SparsityProfile::from_q(n, q, s3, s4);
  const double m2 = 1.0 / n;
  const double m3 = s3 / (n * q);
  const double m4 = s4 / (n * q * q) + 3.0 * m2 * m2;
  // With u = p_upper·upper = p_lower·lower the moment equations reduce to
  // upper - lower = m3/m2 and upper² - upper·lower + lower² = m4/m2.
  const double d = m3 / m2;
  const double e = m4 / m2;
  require(e > d * d, ErrorKind::InvalidParameter,
          "no three-point law with these cumulants (need m4·m2 > m3²)");
  const double root = std::sqrt(4.0 * e - 3.0 * d * d);
  ThreePointEntry law;
  law.upper = 0.5 * (d + root);
  law.lower = 0.5 * (-d + root);
  const double u = m2 / (law.upper + law.lower);
  law.p_upper = u / law.upper;
  law.p_lower = u / law.lower;
  require(law.p_upper + law.p_lower <= 1.0, ErrorKind::InvalidParameter,
          "three-point law needs total mass above one; s4 too small for this q");
  return law;
}

std::vector<double> upper_entries(const MatrixSample& h) {
  const int n = h.n();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(h.entries()(i, j));
  return out;
}

MatrixSample sample_adjacency(int n, double p, const RngStream& stream) {
  const AdjacencyEntry law(n, p);
  Engine eng = stream.engine();
  return MatrixSample(fill_symmetric(n, law, eng), EnsembleKind::Adjacency, stream.derived_seed());
}

MatrixSample sample_centered_er(int n, double p, const RngStream& stream) {
  const CenteredErEntry law(n, p);
  Engine eng = stream.engine();
  return MatrixSample(fill_symmetric(n, law, eng), EnsembleKind::CenteredEr, stream.derived_seed());
}

MatrixSample sample_diluted_wigner(int n, double p, const RngStream& stream) {
  const DilutedWignerEntry law(n, p);
  Engine eng = stream.engine();
  return MatrixSample(fill_symmetric(n, law, eng), EnsembleKind::DilutedWigner,
                      stream.derived_seed());
}

MatrixSample sample_goe_zero_diag(int n, const RngStream& stream) {
  require(n >= 2, ErrorKind::InvalidParameter, "N must be >= 2");
  const GaussianEntry law(n);
  Engine eng = stream.engine();
  return MatrixSample(fill_symmetric(n, law, eng), EnsembleKind::GoeZeroDiag, stream.derived_seed());
}

MatrixSample sample_sparse_generic(const SparsityProfile& profile, const RngStream& stream) {
  profile.validate();
  const auto law = ThreePointEntry::match(profile.n, profile.q, profile.s3, profile.s4);
  Engine eng = stream.engine();
  return MatrixSample(fill_symmetric(profile.n, law, eng), EnsembleKind::SparseGeneric,
                      stream.derived_seed());
}

Eigen::MatrixXd sample_er_graph(int n, double p, const RngStream& stream) {
  check_n_p(n, p);
  Engine eng = stream.engine();
  return fill_symmetric(n, [p](Engine& e) { return uniform01(e) < p ? 1.0 : 0.0; }, eng);
}

Eigen::MatrixXd sample_two_block_sbm(int n, double p_in, double p_out, const RngStream& stream) {
  check_n_p(n, p_in);
  check_n_p(n, p_out);
  Engine eng = stream.engine();
  const int half = n / 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = ((i < half) == (j < half)) ? p_in : p_out;
      const double x = uniform01(eng) < p ? 1.0 : 0.0;
      a(i, j) = x;
      a(j, i) = x;
    }
  }
  return a;
}

MatrixSample dyson_flow(const MatrixSample& h0, const MatrixSample& w, double t) {
  require(h0.n() == w.n(), ErrorKind::DimensionMismatch,
          "flow needs H0 and W of equal size (" + std::to_string(h0.n()) + " vs " +
              std::to_string(w.n()) + ")");
  require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidParameter, "flow time must be >= 0");
  const double a = std::exp(-0.5 * t);
  const double b = std::sqrt(-std::expm1(-t));
  Eigen::MatrixXd ht = a * h0.entries() + b * w.entries();
  return MatrixSample(std::move(ht), EnsembleKind::Flow, h0.seed(), t);
}

double exact_s_k(double p, int k) {
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameter, "p must lie in (0,1)");
  // Two-point law (1-p)/σ w.p. p, -p/σ w.p. 1-p with σ² = Np(1-p), q² = Np.
  switch (k) {
    case 3: return (1.0 - 2.0 * p) / std::sqrt(1.0 - p);
    case 4: return (1.0 - 6.0 * p + 6.0 * p * p) / (1.0 - p);
    default:
      throw Error(ErrorKind::UnsupportedK, "s_k is available for k in {3,4}, got " + std::to_string(k));
  }
}

double empirical_s_k(std::span<const double> draws, int k, int n, double q) {
  require(!draws.empty(), ErrorKind::EmptyInput, "no draws");
  require(k == 3 || k == 4, ErrorKind::UnsupportedK, "k must be 3 or 4");
  const double count = static_cast<double>(draws.size());
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= count;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : draws) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;
  const double kappa = (k == 3) ? m3 : m4 - 3.0 * m2 * m2;
  return n * std::pow(q, k - 2) * kappa;
}

}  // namespace sparsetw

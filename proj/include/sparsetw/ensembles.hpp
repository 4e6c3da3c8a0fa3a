#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "sparsetw/error.hpp"
#include "sparsetw/rng.hpp"

namespace sparsetw {

enum class EnsembleKind {
  Adjacency,
  CenteredEr,
  DilutedWigner,
  SparseGeneric,
  GoeZeroDiag,
  Flow,
};

std::string_view to_string(EnsembleKind kind);
/// Parses the hyphenated tag ("centered-er", "goe-zero-diag", ...). Throws InvalidParameter.
EnsembleKind parse_ensemble_kind(std::string_view tag);

/// Sparsity data of an ensemble: N, q and (for Erdős–Rényi type laws) p = q²/N,
/// together with the normalized third and fourth cumulants of the entries.
struct SparsityProfile {
  int n = 0;
  double q = 0.0;
  std::optional<double> p;
  double s3 = 0.0;
  double s4 = 0.0;

  static SparsityProfile from_p(int n, double p, double s3, double s4);
  static SparsityProfile from_q(int n, double q, double s3, double s4);
  void validate() const;
};

/// Real symmetric matrix with zero diagonal, tagged with how it was produced.
/// The constructor checks both structural invariants bitwise.
class MatrixSample {
 public:
  MatrixSample(Eigen::MatrixXd entries, EnsembleKind kind, std::uint64_t seed, double t = 0.0);

  int n() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  EnsembleKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  double t() const { return t_; }

 private:
  Eigen::MatrixXd entries_;
  EnsembleKind kind_;
  std::uint64_t seed_;
  double t_;
};

// Entry laws. Each is a callable drawing one off-diagonal entry.

struct AdjacencyEntry {
  double value;  // 1/sqrt(Np(1-p))
  double p;
  AdjacencyEntry(int n, double p);
  double operator()(Engine& eng) const { return uniform01(eng) < p ? value : 0.0; }
};

struct CenteredErEntry {
  double hi;  // (1-p)/sqrt(Np(1-p)), taken with probability p
  double lo;  // -p/sqrt(Np(1-p))
  double p;
  CenteredErEntry(int n, double p);
  double operator()(Engine& eng) const { return uniform01(eng) < p ? hi : lo; }
};

/// B·V with B ∈ {1/sqrt(Np), 0} and V = ±1 symmetric.
struct DilutedWignerEntry {
  double magnitude;
  double p;
  DilutedWignerEntry(int n, double p);
  double operator()(Engine& eng) const {
    const double u = uniform01(eng);
    if (u >= p) return 0.0;
    return u < 0.5 * p ? magnitude : -magnitude;
  }
};

struct GaussianEntry {
  double sigma;
  explicit GaussianEntry(int n) : sigma(1.0 / std::sqrt(static_cast<double>(n))) {}
  double operator()(Engine& eng) const {
    std::normal_distribution<double> normal(0.0, sigma);
    return normal(eng);
  }
};

/// Three-point law {upper, 0, -lower} matched to mean 0, variance 1/N and the
/// cumulants κ3 = s3/(N q), κ4 = s4/(N q²).
struct ThreePointEntry {
  double upper = 0.0;
  double lower = 0.0;
  double p_upper = 0.0;
  double p_lower = 0.0;

  static ThreePointEntry match(int n, double q, double s3, double s4);
  double operator()(Engine& eng) const {
    const double u = uniform01(eng);
    if (u < p_upper) return upper;
    if (u < p_upper + p_lower) return -lower;
    return 0.0;
  }
};

/// Fills the strict upper triangle row by row from `draw`, mirrors it, zero diagonal.
template <class Law>
Eigen::MatrixXd fill_symmetric(int n, const Law& draw, Engine& eng) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double x = draw(eng);
      h(i, j) = x;
      h(j, i) = x;
    }
  }
  return h;
}

template <class Law>
std::vector<double> draw_entries(const Law& draw, std::size_t count, const RngStream& stream) {
  Engine eng = stream.engine();
  std::vector<double> out(count);
  for (auto& x : out) x = draw(eng);
  return out;
}

/// Strict upper-triangle entries of a sample, row-major.
std::vector<double> upper_entries(const MatrixSample& h);

MatrixSample sample_adjacency(int n, double p, const RngStream& stream);
MatrixSample sample_centered_er(int n, double p, const RngStream& stream);
MatrixSample sample_diluted_wigner(int n, double p, const RngStream& stream);
MatrixSample sample_goe_zero_diag(int n, const RngStream& stream);
MatrixSample sample_sparse_generic(const SparsityProfile& profile, const RngStream& stream);

/// Raw 0/1 adjacency of G(N, p) and of a two-block stochastic block model
/// (first n/2 vertices in block one).
Eigen::MatrixXd sample_er_graph(int n, double p, const RngStream& stream);
Eigen::MatrixXd sample_two_block_sbm(int n, double p_in, double p_out, const RngStream& stream);

/// H_t = e^{-t/2} H0 + sqrt(1 - e^{-t}) W.
MatrixSample dyson_flow(const MatrixSample& h0, const MatrixSample& w, double t);

/// Normalized cumulant s^(k) = N q^{k-2} κ_k of the centered Erdős–Rényi entry law
/// with q² = Np. Independent of N. k ∈ {3, 4}.
double exact_s_k(double p, int k);

/// Sample cumulant of `draws` scaled by N q^{k-2}. k ∈ {3, 4}.
double empirical_s_k(std::span<const double> draws, int k, int n, double q);

}  // namespace sparsetw

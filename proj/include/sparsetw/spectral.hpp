#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sparsetw/ensembles.hpp"
#include "sparsetw/refined_law.hpp"

namespace sparsetw {

/// Eigenvalues sorted descending; column a of `eigenvectors` belongs to eigenvalues[a].
struct SpectralSample {
  int n = 0;
  std::vector<double> eigenvalues;
  std::optional<Eigen::MatrixXd> eigenvectors;
};

SpectralSample eigen(const MatrixSample& h, bool want_vectors = false);
SpectralSample eigen(const Eigen::MatrixXd& h, bool want_vectors = false);

/// (1/N) Σ 1/(λ_i - z).
cdouble empirical_m(const SpectralSample& spec, ComplexUpper z);

/// G = (H - z)^{-1} and m = tr(G)/N for identity checks. N is capped at 500.
struct GreenMatrix {
  ComplexUpper z;
  Eigen::MatrixXcd entries;
  cdouble m;
};

inline constexpr int kGreenMatrixMaxN = 500;

GreenMatrix green_matrix(const MatrixSample& h, ComplexUpper z);

/// max_k |(1/N) Σ_i |G_ik|² - Im G_kk / (Nη)|
double ward_residual(const GreenMatrix& g);

/// max_i |1 + z G_ii - Σ_k H_ik G_ki|
double resolvent_identity_residual(const MatrixSample& h, const GreenMatrix& g);

struct GridPoint {
  double e;
  double eta;
};

/// 50 uniform energies on [-3 + 1e-3, 3 - 1e-3] times 20 geometric η on [1/N, 3].
std::vector<GridPoint> default_scan_grid(int n);
std::vector<double> geometric_grid(double lo, double hi, int count);

struct LocalLawRow {
  double e;
  double eta;
  cdouble m;
  cdouble mtilde;
  double lambda_err;  // |m - mtilde|
  double bound;       // q_t^{-2} + (Nη)^{-1}
  double ratio;       // lambda_err / bound
};

struct LocalLawReport {
  std::vector<LocalLawRow> rows;

  /// Fraction of rows with ratio <= threshold.
  double fraction_within(double threshold) const;
};

/// Compares the empirical Stieltjes transform against the refined law at each
/// grid point. Grid points are independent and run in parallel; the serial
/// variant is the reference the parallel kernel is tested against.
LocalLawReport local_law_scan(const SpectralSample& spec, const LawParams& law,
                              std::span<const GridPoint> grid, RootMode mode = RootMode::Strict);
LocalLawReport local_law_scan_serial(const SpectralSample& spec, const LawParams& law,
                                     std::span<const GridPoint> grid,
                                     RootMode mode = RootMode::Strict);

/// CSV with header E,eta,re_m,im_m,re_mtilde,im_mtilde,lambda_err,bound,ratio.
void write_local_law_csv(const LocalLawReport& report, std::ostream& os);

/// |{i : E1 < λ_i <= E2}| / N
double eigenvalue_counting(const SpectralSample& spec, double e1, double e2);

/// (1/N) Σ θ_η(λ_i - E) with the Poisson kernel θ_η(y) = η / (π (y² + η²)).
double smoothed_count(const SpectralSample& spec, double e, double eta);

/// 1 + z m + m² + c4 m⁴ for the law's c4.
cdouble eval_P(const LawParams& law, cdouble z, cdouble m);

/// max_{a,i} |u_a(i)|
double delocalization_stat(const SpectralSample& spec);

}  // namespace sparsetw

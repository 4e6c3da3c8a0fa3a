#include "sparsetw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>

#include <fmt/format.h>

namespace sparsetw {

SpectralSample eigen(const Eigen::MatrixXd& h, bool want_vectors) {
  require(h.rows() == h.cols(), ErrorKind::DimensionMismatch, "eigen needs a square matrix");
  const int n = static_cast<int>(h.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorKind::SolverFailure,
          "symmetric eigensolver did not converge (N = " + std::to_string(n) + ")");

  SpectralSample out;
  out.n = n;
  out.eigenvalues.resize(n);
  // Eigen returns ascending order.
  for (int i = 0; i < n; ++i) out.eigenvalues[i] = solver.eigenvalues()(n - 1 - i);
  if (want_vectors) out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

SpectralSample eigen(const MatrixSample& h, bool want_vectors) { return eigen(h.entries(), want_vectors); }

cdouble empirical_m(const SpectralSample& spec, ComplexUpper z) {
  const cdouble zv = z.value();
  cdouble sum = 0.0;
  for (double lambda : spec.eigenvalues) sum += 1.0 / (lambda - zv);
  return sum / static_cast<double>(spec.n);
}

GreenMatrix green_matrix(const MatrixSample& h, ComplexUpper z) {
  require(h.n() <= kGreenMatrixMaxN, ErrorKind::SizeLimitExceeded,
          "green_matrix is limited to N <= 500, got " + std::to_string(h.n()));
  const auto spec = eigen(h, true);
  const Eigen::MatrixXd& u = *spec.eigenvectors;
  Eigen::VectorXcd inv(spec.n);
  for (int a = 0; a < spec.n; ++a) inv(a) = 1.0 / (spec.eigenvalues[a] - z.value());
  const Eigen::MatrixXcd uc = u.cast<cdouble>();
  Eigen::MatrixXcd g = uc * inv.asDiagonal() * uc.transpose();
  return GreenMatrix{z, std::move(g), empirical_m(spec, z)};
}

double ward_residual(const GreenMatrix& g) {
  const auto n = g.entries.rows();
  const double eta = g.z.im();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lhs = g.entries.col(k).squaredNorm() / static_cast<double>(n);
    const double rhs = g.entries(k, k).imag() / (static_cast<double>(n) * eta);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double resolvent_identity_residual(const MatrixSample& h, const GreenMatrix& g) {
  require(h.n() == g.entries.rows(), ErrorKind::DimensionMismatch,
          "H and G differ in size");
  const Eigen::MatrixXcd hg = h.entries().cast<cdouble>() * g.entries;
  const cdouble z = g.z.value();
  double worst = 0.0;
  for (int i = 0; i < h.n(); ++i) {
    worst = std::max(worst, std::abs(1.0 + z * g.entries(i, i) - hg(i, i)));
  }
  return worst;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  require(lo > 0.0 && hi >= lo && count >= 1, ErrorKind::InvalidParameter, "bad geometric grid");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

std::vector<GridPoint> default_scan_grid(int n) {
  constexpr int kEnergies = 50;
  constexpr int kEtas = 20;
  const double e_lo = -3.0 + 1e-3;
  const double e_hi = 3.0 - 1e-3;
  const auto etas = geometric_grid(1.0 / n, 3.0, kEtas);
  std::vector<GridPoint> grid;
  grid.reserve(kEnergies * kEtas);
  for (int i = 0; i < kEnergies; ++i) {
    const double e = e_lo + (e_hi - e_lo) * i / (kEnergies - 1);
    for (double eta : etas) grid.push_back({e, eta});
  }
  return grid;
}

double LocalLawReport::fraction_within(double threshold) const {
  if (rows.empty()) return 1.0;
  const auto ok = std::count_if(rows.begin(), rows.end(),
                                [threshold](const LocalLawRow& r) { return r.ratio <= threshold; });
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

namespace {

LocalLawRow scan_point(const SpectralSample& spec, const LawParams& law, GridPoint p, RootMode mode) {
  const ComplexUpper z(p.e, p.eta);
  LocalLawRow row{p.e, p.eta, empirical_m(spec, z), solve_w(law, z, mode), 0.0, 0.0, 0.0};
  row.lambda_err = std::abs(row.m - row.mtilde);
  row.bound = 1.0 / (law.qt() * law.qt()) + 1.0 / (spec.n * p.eta);
  row.ratio = row.lambda_err / row.bound;
  return row;
}

}  // namespace

LocalLawReport local_law_scan_serial(const SpectralSample& spec, const LawParams& law,
                                     std::span<const GridPoint> grid, RootMode mode) {
  LocalLawReport report;
  report.rows.reserve(grid.size());
  for (const auto& p : grid) report.rows.push_back(scan_point(spec, law, p, mode));
  return report;
}

LocalLawReport local_law_scan(const SpectralSample& spec, const LawParams& law,
                              std::span<const GridPoint> grid, RootMode mode) {
  LocalLawReport report;
  report.rows.resize(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  const auto count = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      report.rows[i] = scan_point(spec, law, grid[i], mode);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return report;
}

void write_local_law_csv(const LocalLawReport& report, std::ostream& os) {
  os << "E,eta,re_m,im_m,re_mtilde,im_mtilde,lambda_err,bound,ratio\n";
  for (const auto& r : report.rows) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.e,
                      r.eta, r.m.real(), r.m.imag(), r.mtilde.real(), r.mtilde.imag(), r.lambda_err,
                      r.bound, r.ratio);
  }
}

double eigenvalue_counting(const SpectralSample& spec, double e1, double e2) {
  require(e1 < e2, ErrorKind::InvalidParameter, "counting window needs E1 < E2");
  const auto inside = std::count_if(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                                    [&](double l) { return e1 < l && l <= e2; });
  return static_cast<double>(inside) / spec.n;
}

double smoothed_count(const SpectralSample& spec, double e, double eta) {
  require(eta > 0.0, ErrorKind::InvalidParameter, "eta must be positive");
  double sum = 0.0;
  for (double l : spec.eigenvalues) {
    const double y = l - e;
    sum += eta / (M_PI * (y * y + eta * eta));
  }
  return sum / spec.n;
}

cdouble eval_P(const LawParams& law, cdouble z, cdouble m) { return law_polynomial(law.c4(), z, m); }

double delocalization_stat(const SpectralSample& spec) {
  require(spec.eigenvectors.has_value(), ErrorKind::MissingVectors,
          "delocalization needs eigenvectors");
  return spec.eigenvectors->cwiseAbs().maxCoeff();
}

}  // namespace sparsetw

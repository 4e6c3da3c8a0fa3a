#include "sparsetw/flow.hpp"

#include <cmath>
#include <exception>
#include <ostream>

#include <fmt/format.h>

namespace sparsetw {

std::vector<double> default_t_grid(int n) {
  require(n >= 2, ErrorKind::InvalidParameter, "N must be >= 2");
  std::vector<double> grid{0.0};
  const auto tail = geometric_grid(1e-3, 6.0 * std::log(static_cast<double>(n)), 25);
  grid.insert(grid.end(), tail.begin(), tail.end());
  return grid;
}

namespace {

void check_t_grid(std::span<const double> t_grid) {
  require(!t_grid.empty() && t_grid.front() == 0.0, ErrorKind::InvalidParameter,
          "time grid must start at t = 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    require(t_grid[i] > t_grid[i - 1], ErrorKind::InvalidParameter, "time grid must be ascending");
}

LocalLawReport scan_at(const MatrixSample& h0, const MatrixSample& w, double t, const LawParams& law0,
                       std::span<const GridPoint> grid, RootMode mode) {
  const MatrixSample ht = dyson_flow(h0, w, t);
  return local_law_scan_serial(eigen(ht, false), law0.at_time(t), grid, mode);
}

}  // namespace

FlowTrajectory trajectory(const LawParams& law0, std::span<const double> t_grid) {
  check_t_grid(t_grid);
  FlowTrajectory traj;
  traj.rows.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto r = edge(law0.at_time(t));
    traj.rows.push_back({t, r.params.qt(), r.L, l_dot(r)});
  }
  return traj;
}

void write_trajectory_csv(const FlowTrajectory& traj, std::ostream& os) {
  os << "t,qt,Lt,Ldot\n";
  for (const auto& r : traj.rows) os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t, r.qt, r.Lt, r.Ldot);
}

std::vector<LocalLawReport> flow_local_law_check_serial(const MatrixSample& h0, const MatrixSample& w,
                                                        std::span<const double> t_grid,
                                                        const LawParams& law0,
                                                        std::span<const GridPoint> grid, RootMode mode) {
  check_t_grid(t_grid);
  require(h0.n() == w.n(), ErrorKind::DimensionMismatch, "H0 and W differ in size");
  std::vector<LocalLawReport> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(scan_at(h0, w, t, law0, grid, mode));
  return out;
}

std::vector<LocalLawReport> flow_local_law_check(const MatrixSample& h0, const MatrixSample& w,
                                                 std::span<const double> t_grid, const LawParams& law0,
                                                 std::span<const GridPoint> grid, RootMode mode) {
  check_t_grid(t_grid);
  require(h0.n() == w.n(), ErrorKind::DimensionMismatch, "H0 and W differ in size");
  const auto count = static_cast<std::ptrdiff_t>(t_grid.size());
  std::vector<LocalLawReport> out(t_grid.size());
  std::vector<std::exception_ptr> errors(t_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[i] = scan_at(h0, w, t_grid[i], law0, grid, mode);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace sparsetw

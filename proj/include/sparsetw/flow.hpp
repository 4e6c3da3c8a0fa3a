#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "sparsetw/ensembles.hpp"
#include "sparsetw/refined_law.hpp"
#include "sparsetw/spectral.hpp"

namespace sparsetw {

struct FlowRow {
  double t;
  double qt;
  double Lt;
  double Ldot;
};

struct FlowTrajectory {
  std::vector<FlowRow> rows;
};

/// t = 0 followed by 25 geometric points on [1e-3, 6 log N].
std::vector<double> default_t_grid(int n);

/// Edge data of the law moved to each t (s4 and q fixed, q_t = q e^{t/2}).
/// The grid must be ascending and start at 0.
FlowTrajectory trajectory(const LawParams& law0, std::span<const double> t_grid);

/// CSV: t,qt,Lt,Ldot
void write_trajectory_csv(const FlowTrajectory& traj, std::ostream& os);

/// One local-law scan per t of H_t = flow(H0, W, t) against the time-t law.
/// W is shared by all t. Times run in parallel; the serial variant is the reference.
std::vector<LocalLawReport> flow_local_law_check(const MatrixSample& h0, const MatrixSample& w,
                                                 std::span<const double> t_grid, const LawParams& law0,
                                                 std::span<const GridPoint> grid,
                                                 RootMode mode = RootMode::Strict);
std::vector<LocalLawReport> flow_local_law_check_serial(const MatrixSample& h0, const MatrixSample& w,
                                                        std::span<const double> t_grid,
                                                        const LawParams& law0,
                                                        std::span<const GridPoint> grid,
                                                        RootMode mode = RootMode::Strict);

}  // namespace sparsetw

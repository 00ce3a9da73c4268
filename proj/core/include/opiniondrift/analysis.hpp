#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "opiniondrift/input.hpp"
#include "opiniondrift/measure.hpp"
#include "opiniondrift/simulate.hpp"

namespace opiniondrift {

/// Interval of initial opinions whose trajectories end within tol of the
/// input mean, together with the initial mass it carries.
struct AttractionRangeResult {
    double y = 0.0;  ///< left end (an initial partition edge)
    double z = 0.0;  ///< right end
    double attracted_mass = 0.0;
    double converged_center = 0.0;
    double tol_used = 0.0;
    long steps = 0;

    double length() const { return z - y; }
};

/// Runs the dynamics under a constant input to convergence and reads the
/// basin of the input mean off the edge transport: every final edge position
/// within tol of the mean marks its initial edge as attracted, and the basin
/// is the (contiguous, by order preservation) interval between the outermost
/// attracted initial edges. Resolution is one initial cell width.
///
/// tol <= 0 resolves to 10 * eps_cluster. Requires the input mean inside
/// supp(mu0). Throws NotConverged when max_steps is hit first and NoBasin
/// when no edge lands within tol.
AttractionRangeResult attraction_range(const OpinionPartition& mu0,
                                       const TruncatedGaussianInput& u,
                                       const SimulationConfig& cfg, double tol);

/// attraction_range with local grid refinement: after each pass the two
/// cells straddling the basin boundary are split into `subdivisions` equal
/// subcells (exact for piecewise-constant density) and the run repeats, so
/// the boundary resolution improves by that factor per round.
AttractionRangeResult attraction_range_refined(const OpinionPartition& mu0,
                                               const TruncatedGaussianInput& u,
                                               const SimulationConfig& cfg,
                                               double tol, int rounds,
                                               int subdivisions);

struct LinearFit {
    double a = 0.0;  ///< sigma coefficient (0 when sigma is constant in the grid)
    double b = 0.0;  ///< r coefficient (0 when r is constant in the grid)
    double c = 0.0;  ///< intercept
    double r_squared = 0.0;
    std::size_t n_points = 0;
    std::size_t filtered_out = 0;
    bool a_active = false;
    bool b_active = false;
};

struct SweepPoint {
    double sigma = 0.0;
    double r = 0.0;
    double range_length = 0.0;
    double attracted_mass = 0.0;
    bool converged = false;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    LinearFit fit;
};

/// Family of uniform initial distributions for sweeps.
struct UniformFamily {
    double lo = -1.0;
    double hi = 1.0;
    double mass = 1.0;
    std::size_t n_cells = 2000;
};

struct SweepOptions {
    double input_mean = 0.0;
    double input_weight = 1.0;
    double tol = 0.0;              ///< per-point attraction tolerance (0 = default)
    double filter_fraction = 0.6;  ///< keep points with |R| < fraction * |supp mu0|
    int refine_rounds = 1;
    int refine_subdivisions = 16;
    unsigned jobs = 1;             ///< sweep points run concurrently
};

/// Ordinary least squares for range_length = a*sigma + b*r + c over the
/// given points (no filtering). Constant regressors fold into the intercept;
/// if sigma and r are collinear across the points the r column is dropped
/// and the slope is reported on sigma. Throws InsufficientPoints for fewer
/// than three points or a degenerate design.
LinearFit fit_range_law(const std::vector<SweepPoint>& points);

/// Runs attraction_range over a grid of (sigma, r) pairs and fits the
/// retained points with fit_range_law. A point is retained when its run
/// converged and range_length < filter_fraction * |supp mu0|. Throws
/// InsufficientPoints when fewer than three points survive.
SweepResult sweep_fit(const UniformFamily& family,
                      const std::vector<std::pair<double, double>>& sigma_r_grid,
                      const SimulationConfig& cfg, const SweepOptions& opts);

/// mu([0, 1]): the mass holding a positive opinion (capped at 1).
double positive_mass(const OpinionPartition& part);

struct StrategyArm {
    std::string name;
    Trajectory trajectory;
    double objective = 0.0;           ///< positive_mass of the final state
    double attracted_to_center = 0.0; ///< mass near the final input mean
    double final_input_mean = 0.0;
};

struct StrategyReport {
    StrategyArm direct;
    StrategyArm distracting;
    std::string winner;  ///< "direct" | "distracting" | "tie"
};

/// Runs both schedules over the same horizon and scores them with
/// positive_mass at the end; also reports the mass attracted to the final
/// input mean (window of half-width max(eps_consensus, 1e-3 * |supp mu0|)
/// around it). Requires both schedules to share sigma, with
/// sigma < |supp mu0| / 12.
StrategyReport compare_strategies(const OpinionPartition& mu0,
                                  const SimulationConfig& cfg,
                                  const InputSchedule& direct,
                                  const InputSchedule& distracting);

}  // namespace opiniondrift

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opiniondrift/flow.hpp"
#include "opiniondrift/input.hpp"
#include "opiniondrift/measure.hpp"

namespace opiniondrift {

/// Run parameters. Tolerances left at zero resolve against the initial
/// support width w0:
///   eps_cluster   = 1e-6  * w0   (cluster width tolerance)
///   eps_consensus = 1e-9  * w0   (single-cluster classification)
///   eps_merge     = 1e-12 * w0   (edge fusion, pinned for the whole run)
struct SimulationConfig {
    double r = 0.0;
    std::size_t n_cells = 0;  ///< initial grid resolution (used by builders)
    long max_steps = 1000;
    double eps_cluster = 0.0;
    double eps_consensus = 0.0;
    long record_every = 1;
    bool stop_on_convergence = true;
    bool diag_bilipschitz = false;
    std::size_t bilipschitz_samples = 64;
    std::uint64_t rng_seed = 0;  ///< bilipschitz sampling only; dynamics are deterministic
};

/// Per-step health report emitted by step(); stored for every step of a run.
struct StepDiagnostics {
    long step = 0;
    double support_lo = 0.0;
    double support_hi = 0.0;
    double support_width = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    bool all_atomic = false;
    bool has_atoms = false;
    bool input_present = false;
    double input_mean = 0.0;
    bool input_contained = true;  ///< input support inside supp(mu); true if no input
    /// |supp| > 2r and measure+input supports form one interval; the regime
    /// in which order preservation and support shrinking are guaranteed.
    bool order_regime = false;
    bool monotonic_ok = true;
    std::size_t fused_edges = 0;
    bool support_shrank = false;
    double endpoint_map_error = 0.0;  ///< max |new extreme - image of old extreme|
    double max_edge_displacement = 0.0;  ///< max |new edge - old edge| this step
    double delta_z = 0.0;    ///< |d/dt of integral z  d mu| this step
    double delta_z2 = 0.0;   ///< same for z^2
    double delta_sin = 0.0;  ///< same for sin z
    std::optional<BiLipschitzEstimate> bilipschitz;
};

enum class Termination { converged, max_steps, error };

const char* to_string(Termination t);

/// Recorded run: snapshots at record_every intervals (plus first and last)
/// and diagnostics for every step.
struct Trajectory {
    std::vector<std::pair<long, OpinionPartition>> snapshots;
    std::vector<StepDiagnostics> diagnostics;
    Termination termination = Termination::max_steps;
    long steps = 0;
    std::string error_message;
    ClusterSet final_clusters;

    const OpinionPartition& final_state() const { return snapshots.back().second; }
};

/// One update: resolves the schedule at step t, pushes the measure forward,
/// and reports diagnostics. Standalone spelling; run() pins tolerances from
/// the initial state instead of re-deriving them per step.
std::pair<OpinionPartition, StepDiagnostics> step(const OpinionPartition& part,
                                                  const SimulationConfig& cfg,
                                                  const InputSchedule& sched,
                                                  long t);

/// Iterates step() until the structural convergence test fires or max_steps
/// is reached. Engine errors are captured in the trajectory (termination =
/// error, message carries the failing step). Two guards keep the structural
/// test from firing on states that are still in motion: for phased schedules
/// the convergence stop is suppressed until the final phase, and while an
/// input is active the stop also requires the last step's edge displacement
/// to be small (a tight cluster being dragged by the input is structurally
/// "converged" every step of its flight).
Trajectory run(const OpinionPartition& mu0, const SimulationConfig& cfg,
               const InputSchedule& sched);

/// True iff extract_clusters(part, eps_cluster, r) reports a converged
/// cluster structure.
bool is_converged(const OpinionPartition& part, const SimulationConfig& cfg);

/// Sufficient condition for finite-time consensus: |supp mu0| < 2r, mu0
/// mirror-symmetric about its support center, and the schedule either none
/// or every phase symmetric about that center with support inside supp mu0.
/// A true result predicts consensus; false predicts nothing.
bool consensus_sufficient(const OpinionPartition& mu0, const InputSchedule& sched,
                          double r);

struct TestFunction {
    std::string name;
    std::function<double(double)> fn;
};

/// z, z^2, sin z.
std::vector<TestFunction> default_test_functions();

/// integral of eta d(mu) with the midpoint rule per cell (exact on atoms).
double integrate(const OpinionPartition& part,
                 const std::function<double(double)>& eta);

struct WeakStarDelta {
    long step_from = 0;
    long step_to = 0;
    std::vector<double> deltas;  ///< one per test function
};

/// |integral eta d mu_{t+1} - integral eta d mu_t| between consecutive
/// recorded snapshots. Record with record_every = 1 for true per-step deltas;
/// the run loop also maintains per-step deltas for the default functions in
/// StepDiagnostics.
std::vector<WeakStarDelta> weak_star_deltas(const Trajectory& traj,
                                            const std::vector<TestFunction>& fns);

}  // namespace opiniondrift

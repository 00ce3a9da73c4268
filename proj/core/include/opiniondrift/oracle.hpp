#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "opiniondrift/input.hpp"
#include "opiniondrift/measure.hpp"

namespace opiniondrift {

/// Finite agent population: sorted opinions, each carrying the same mass.
/// Independent discretization of the same dynamics, used to cross-check the
/// cell-based engine.
struct AgentPopulation {
    std::vector<double> opinions;  ///< sorted ascending
    double agent_mass = 0.0;

    double total_mass() const {
        return agent_mass * static_cast<double>(opinions.size());
    }
};

/// Deterministic quantile sampling: agent i sits at the (i - 1/2)/n mass
/// quantile of mu0 and carries total_mass / n. Rejects n == 0.
AgentPopulation sample_agents(const OpinionPartition& mu0, std::size_t n);

/// Synchronous update: every agent moves to the weighted average of the
/// agents within distance r plus the input moments over the same window
/// (the same analytic moments the cell engine uses, so the two engines
/// differ only in how mu is discretized). Output re-sorted. Linear time via
/// prefix sums and a sliding window.
AgentPopulation agent_step(const AgentPopulation& pop,
                           const std::optional<TruncatedGaussianInput>& u,
                           double r);

struct AgentRunResult {
    AgentPopulation final_population;
    std::vector<ClusterMass> clusters;  ///< split where neighbor gaps exceed r
    long steps = 0;
};

/// Iterates agent_step with the schedule until the largest per-agent
/// displacement falls below 1e-12 or max_steps is hit (NotConverged).
AgentRunResult agent_run(AgentPopulation pop, const InputSchedule& sched,
                         double r, long max_steps);

/// Groups sorted agents into clusters split where the gap between
/// neighbors exceeds r; each cluster reports its mean opinion and mass.
std::vector<ClusterMass> cluster_agents(const AgentPopulation& pop, double r);

}  // namespace opiniondrift

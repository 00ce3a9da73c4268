#include "opiniondrift/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

AgentPopulation sample_agents(const OpinionPartition& mu0, std::size_t n) {
    if (n == 0) throw InvalidArgument("sample_agents: requires n >= 1");

    AgentPopulation pop;
    pop.agent_mass = mu0.total_mass() / static_cast<double>(n);
    pop.opinions.reserve(n);

    // Walk cells and quantile targets together; both are increasing.
    double cum = 0.0;
    std::size_t cell_idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target =
            mu0.total_mass() * ((static_cast<double>(i) + 0.5) / static_cast<double>(n));
        while (cell_idx + 1 < mu0.n_cells() &&
               cum + mu0.cell(cell_idx).mass < target) {
            cum += mu0.cell(cell_idx).mass;
            ++cell_idx;
        }
        const Cell c = mu0.cell(cell_idx);
        if (c.is_atom() || c.mass <= 0.0) {
            pop.opinions.push_back(c.left);
        } else {
            const double frac = std::clamp((target - cum) / c.mass, 0.0, 1.0);
            pop.opinions.push_back(c.left + frac * c.width());
        }
    }
    return pop;
}

AgentPopulation agent_step(const AgentPopulation& pop,
                           const std::optional<TruncatedGaussianInput>& u,
                           double r) {
    if (!(r > 0.0)) throw InvalidArgument("agent_step: requires r > 0");
    const std::vector<double>& x = pop.opinions;
    const std::size_t n = x.size();

    std::vector<double> prefix_pos(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix_pos[i + 1] = prefix_pos[i] + x[i];

    AgentPopulation next;
    next.agent_mass = pop.agent_mass;
    next.opinions.resize(n);

    // Quantile sampling puts agents at exact lattice spacings, so pairs at
    // distance exactly r are common and rounding must not decide their
    // window membership; distances within snap of r count as inside.
    const double snap = 1e-12 * std::max(1.0, std::abs(x.front()) + std::abs(x.back()) + r);

    std::size_t lo = 0, hi = 0;  // window [x_i - r, x_i + r] as index range [lo, hi)
    for (std::size_t i = 0; i < n; ++i) {
        while (lo < n && x[lo] < x[i] - r - snap) ++lo;
        if (hi < lo) hi = lo;
        while (hi < n && x[hi] <= x[i] + r + snap) ++hi;

        double mass = pop.agent_mass * static_cast<double>(hi - lo);
        double moment = pop.agent_mass * (prefix_pos[hi] - prefix_pos[lo]);
        if (u) {
            const WindowMoments wm = input_window_moments(*u, x[i] - r, x[i] + r);
            mass += wm.mass;
            moment += wm.first_moment;
        }
        next.opinions[i] = moment / mass;  // agent i is always its own neighbor
    }
    std::sort(next.opinions.begin(), next.opinions.end());
    return next;
}

std::vector<ClusterMass> cluster_agents(const AgentPopulation& pop, double r) {
    std::vector<ClusterMass> out;
    const std::vector<double>& x = pop.opinions;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        if (i == x.size() || x[i] - x[i - 1] > r) {
            double sum = 0.0;
            for (std::size_t j = begin; j < i; ++j) sum += x[j];
            out.push_back({sum / static_cast<double>(i - begin),
                           pop.agent_mass * static_cast<double>(i - begin)});
            begin = i;
        }
    }
    return out;
}

AgentRunResult agent_run(AgentPopulation pop, const InputSchedule& sched,
                         double r, long max_steps) {
    if (max_steps < 1) throw InvalidArgument("agent_run: requires max_steps >= 1");
    for (long t = 1; t <= max_steps; ++t) {
        const Support sup{pop.opinions.front(), pop.opinions.back()};
        const AgentPopulation next = agent_step(pop, sched.at(t, sup), r);
        double max_disp = 0.0;
        for (std::size_t i = 0; i < pop.opinions.size(); ++i) {
            max_disp = std::max(max_disp,
                                std::abs(next.opinions[i] - pop.opinions[i]));
        }
        pop = next;
        if (max_disp < 1e-12) {
            std::vector<ClusterMass> clusters = cluster_agents(pop, r);
            return {std::move(pop), std::move(clusters), t};
        }
    }
    throw NotConverged("agent_run: displacement above 1e-12 after " +
                       std::to_string(max_steps) + " steps");
}

}  // namespace opiniondrift

#include "opiniondrift/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

namespace {

struct ResolvedTolerances {
    double eps_cluster;
    double eps_consensus;
    double eps_merge;
};

ResolvedTolerances resolve(const SimulationConfig& cfg, const OpinionPartition& mu0) {
    // A zero-width (single atom) initial support must still yield positive
    // tolerances; any positive value classifies that state correctly.
    const double w0 = std::max(mu0.support().width(), 1e-300);
    return {
        cfg.eps_cluster > 0.0 ? cfg.eps_cluster : 1e-6 * w0,
        cfg.eps_consensus > 0.0 ? cfg.eps_consensus : 1e-9 * w0,
        1e-12 * w0,
    };
}

void validate(const SimulationConfig& cfg) {
    if (!(cfg.r > 0.0)) throw InvalidArgument("config: requires r > 0");
    if (cfg.max_steps < 1) throw InvalidArgument("config: requires max_steps >= 1");
    if (cfg.record_every < 1) {
        throw InvalidArgument("config: requires record_every >= 1");
    }
    if (cfg.eps_cluster < 0.0 || cfg.eps_consensus < 0.0) {
        throw InvalidArgument("config: tolerances must be >= 0");
    }
}

std::size_t count_coincident_edges(const std::vector<double>& edges) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i] == edges[i - 1]) ++n;
    }
    return n;
}

struct Integrals {
    double z = 0.0;
    double z2 = 0.0;
    double sin_z = 0.0;
};

Integrals default_integrals(const OpinionPartition& part) {
    Integrals out;
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        if (c.mass <= 0.0) continue;
        const double m = c.midpoint();
        out.z += c.mass * m;
        out.z2 += c.mass * m * m;
        out.sin_z += c.mass * std::sin(m);
    }
    return out;
}

// Advances part by one step with pinned tolerances. gamma images of the old
// extremes are taken before the push so the endpoint check is independent of
// fusion bookkeeping.
std::pair<OpinionPartition, StepDiagnostics> advance(
    const OpinionPartition& part, const SimulationConfig& cfg,
    const InputSchedule& sched, long t, const ResolvedTolerances& tol) {
    StepDiagnostics diag;
    diag.step = t;

    const Support before = part.support();
    const std::optional<TruncatedGaussianInput> u = sched.at(t, before);
    diag.input_present = u.has_value();
    if (u) {
        diag.input_mean = u->mean;
        diag.input_contained = input_support_contained(*u, part);
    }

    bool union_interval = true;
    if (u) {
        union_interval = std::max(before.lo, u->support_lo()) <=
                         std::min(before.hi, u->support_hi());
    }
    diag.order_regime = before.width() > 2.0 * cfg.r && union_interval;

    FlowContext ctx(part, u, cfg.r);
    ctx.eps_merge = tol.eps_merge;

    const double lo_image = flow_map(ctx, before.lo);
    const double hi_image = flow_map(ctx, before.hi);

    OpinionPartition next = push_forward(ctx);
    diag.monotonic_ok = true;  // push_forward throws otherwise
    const std::size_t coincident_before = count_coincident_edges(part.edges());
    const std::size_t coincident_after = count_coincident_edges(next.edges());
    diag.fused_edges =
        coincident_after > coincident_before ? coincident_after - coincident_before : 0;

    const Support after = next.support();
    diag.support_lo = after.lo;
    diag.support_hi = after.hi;
    diag.support_width = after.width();
    diag.support_shrank = after.lo > before.lo && after.hi < before.hi;
    diag.endpoint_map_error =
        std::max(std::abs(after.lo - lo_image), std::abs(after.hi - hi_image));
    // Edge counts match unless a zero-mass gap cell collapsed and was
    // normalized away; pair up as far as the shorter vector allows.
    const std::size_t paired = std::min(next.edges().size(), part.edges().size());
    for (std::size_t i = 0; i < paired; ++i) {
        diag.max_edge_displacement =
            std::max(diag.max_edge_displacement,
                     std::abs(next.edges()[i] - part.edges()[i]));
    }

    try {
        const DensityBounds b = density_bounds(next);
        diag.rho_min = b.rho_min;
        diag.rho_max = b.rho_max;
        diag.has_atoms = b.has_atoms;
    } catch (const AllAtomic&) {
        diag.all_atomic = true;
        diag.has_atoms = true;
    }

    if (cfg.diag_bilipschitz && before.width() > 0.0) {
        diag.bilipschitz = bilipschitz_estimate(
            ctx, cfg.bilipschitz_samples,
            cfg.rng_seed + static_cast<std::uint64_t>(t));
    }

    const Integrals ib = default_integrals(part);
    const Integrals ia = default_integrals(next);
    diag.delta_z = std::abs(ia.z - ib.z);
    diag.delta_z2 = std::abs(ia.z2 - ib.z2);
    diag.delta_sin = std::abs(ia.sin_z - ib.sin_z);

    return {std::move(next), diag};
}

}  // namespace

const char* to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_steps: return "max_steps";
        case Termination::error: return "error";
    }
    return "unknown";
}

std::pair<OpinionPartition, StepDiagnostics> step(const OpinionPartition& part,
                                                  const SimulationConfig& cfg,
                                                  const InputSchedule& sched,
                                                  long t) {
    validate(cfg);
    return advance(part, cfg, sched, t, resolve(cfg, part));
}

bool is_converged(const OpinionPartition& part, const SimulationConfig& cfg) {
    const double eps_cluster =
        cfg.eps_cluster > 0.0
            ? cfg.eps_cluster
            : 1e-6 * std::max(part.support().width(), 1e-300);
    return extract_clusters(part, eps_cluster, cfg.r).converged;
}

Trajectory run(const OpinionPartition& mu0, const SimulationConfig& cfg,
               const InputSchedule& sched) {
    validate(cfg);
    const ResolvedTolerances tol = resolve(cfg, mu0);
    if (sched.horizon() < cfg.max_steps) {
        throw InvalidArgument("run: max_steps exceeds the schedule horizon");
    }

    SimulationConfig pinned = cfg;
    pinned.eps_cluster = tol.eps_cluster;
    pinned.eps_consensus = tol.eps_consensus;

    Trajectory traj;
    traj.snapshots.emplace_back(0, mu0);

    const long conv_from = sched.final_phase_start();
    OpinionPartition state = mu0;

    if (cfg.stop_on_convergence && conv_from <= 0 && is_converged(state, pinned)) {
        traj.termination = Termination::converged;
        traj.final_clusters = extract_clusters(state, tol.eps_cluster, cfg.r);
        return traj;
    }

    // A cluster being dragged by an active input looks converged in every
    // snapshot; demand near-stationarity on top of structure in that case.
    const double stationary_tol =
        std::max(10.0 * tol.eps_consensus, 1e-4 * mu0.support().width());

    long last_recorded = 0;
    traj.termination = Termination::max_steps;
    for (long t = 1; t <= cfg.max_steps; ++t) {
        bool may_stop = false;
        try {
            auto [next, diag] = advance(state, pinned, sched, t, tol);
            state = std::move(next);
            may_stop = !diag.input_present ||
                       diag.max_edge_displacement <= stationary_tol;
            traj.diagnostics.push_back(diag);
            traj.steps = t;
        } catch (const Error& e) {
            traj.termination = Termination::error;
            traj.error_message = "step " + std::to_string(t) + ": " + e.what();
            break;
        }
        if (t % cfg.record_every == 0) {
            traj.snapshots.emplace_back(t, state);
            last_recorded = t;
        }
        if (cfg.stop_on_convergence && may_stop && t >= conv_from &&
            is_converged(state, pinned)) {
            traj.termination = Termination::converged;
            break;
        }
    }
    if (last_recorded != traj.steps) {
        traj.snapshots.emplace_back(traj.steps, state);
    }
    traj.final_clusters = extract_clusters(state, tol.eps_cluster, cfg.r);
    return traj;
}

bool consensus_sufficient(const OpinionPartition& mu0, const InputSchedule& sched,
                          double r) {
    const Support sup = mu0.support();
    if (!(sup.width() < 2.0 * r)) return false;

    const double center = 0.5 * (sup.lo + sup.hi);
    const double geom_tol = 1e-12 * std::max(1.0, sup.width());
    const double mass_tol = 1e-12 * mu0.total_mass();
    const std::size_t n = mu0.n_cells();
    for (std::size_t i = 0; i < n; ++i) {
        const Cell a = mu0.cell(i);
        const Cell b = mu0.cell(n - 1 - i);
        if (std::abs((center - a.left) - (b.right - center)) > geom_tol) return false;
        if (std::abs((center - a.right) - (b.left - center)) > geom_tol) return false;
        if (std::abs(a.mass - b.mass) > mass_tol) return false;
    }

    if (sched.is_none()) return true;
    const auto symmetric_inside = [&](double mean, double sigma) {
        if (std::abs(mean - center) > geom_tol) return false;
        return sup.contains(mean - 3.0 * sigma, mean + 3.0 * sigma);
    };
    if (const auto& c = sched.constant_input()) {
        return symmetric_inside(c->mean, c->sigma);
    }
    for (const InputPhase& ph : sched.phases()) {
        const double* mean = std::get_if<double>(&ph.mean);
        if (mean == nullptr) return false;  // tracking mean is not static
        if (!symmetric_inside(*mean, ph.sigma)) return false;
    }
    return true;
}

std::vector<TestFunction> default_test_functions() {
    return {
        {"z", [](double z) { return z; }},
        {"z2", [](double z) { return z * z; }},
        {"sin_z", [](double z) { return std::sin(z); }},
    };
}

double integrate(const OpinionPartition& part,
                 const std::function<double(double)>& eta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        if (c.mass <= 0.0) continue;
        acc += c.mass * eta(c.midpoint());
    }
    return acc;
}

std::vector<WeakStarDelta> weak_star_deltas(const Trajectory& traj,
                                            const std::vector<TestFunction>& fns) {
    if (fns.empty()) {
        throw InvalidArgument("weak_star_deltas: requires >= 1 test function");
    }
    std::vector<WeakStarDelta> out;
    std::vector<double> prev(fns.size());
    for (std::size_t k = 0; k < fns.size(); ++k) {
        prev[k] = integrate(traj.snapshots.front().second, fns[k].fn);
    }
    for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
        WeakStarDelta d;
        d.step_from = traj.snapshots[s - 1].first;
        d.step_to = traj.snapshots[s].first;
        d.deltas.resize(fns.size());
        for (std::size_t k = 0; k < fns.size(); ++k) {
            const double cur = integrate(traj.snapshots[s].second, fns[k].fn);
            d.deltas[k] = std::abs(cur - prev[k]);
            prev[k] = cur;
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace opiniondrift

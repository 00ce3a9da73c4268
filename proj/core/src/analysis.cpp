#include "opiniondrift/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

namespace {

struct BasinIndices {
    std::size_t first_edge;
    std::size_t last_edge;
};

struct BasinResult {
    AttractionRangeResult range;
    BasinIndices idx;
};

BasinResult attraction_range_impl(const OpinionPartition& mu0,
                                  const TruncatedGaussianInput& u,
                                  const SimulationConfig& cfg, double tol) {
    const Support sup0 = mu0.support();
    if (u.mean < sup0.lo || u.mean > sup0.hi) {
        throw InvalidArgument("attraction_range: input mean outside supp(mu0)");
    }
    const double eps_cluster =
        cfg.eps_cluster > 0.0 ? cfg.eps_cluster : 1e-6 * sup0.width();
    const double tol_used = tol > 0.0 ? tol : 10.0 * eps_cluster;

    SimulationConfig rcfg = cfg;
    rcfg.stop_on_convergence = true;
    const Trajectory traj = run(mu0, rcfg, InputSchedule::constant(u));
    if (traj.termination == Termination::error) {
        throw Error("attraction_range: " + traj.error_message);
    }
    if (traj.termination != Termination::converged) {
        throw NotConverged("attraction_range: not converged after " +
                           std::to_string(traj.steps) + " steps");
    }

    // Edge count is preserved by push_forward for gap-free initial states,
    // so final edge i is the image of initial edge i under the composed flow.
    const std::vector<double>& initial = mu0.edges();
    const std::vector<double>& final_edges = traj.final_state().edges();
    if (final_edges.size() != initial.size()) {
        throw InvalidArgument(
            "attraction_range: initial distribution must be gap-free so edges "
            "can be tracked through the run");
    }

    // Longest contiguous run of attracted edges (order preservation makes the
    // basin contiguous; the longest run is a cheap guard against stray hits).
    std::size_t best_begin = 0, best_len = 0;
    std::size_t run_begin = 0, run_len = 0;
    for (std::size_t i = 0; i < final_edges.size(); ++i) {
        if (std::abs(final_edges[i] - u.mean) <= tol_used) {
            if (run_len == 0) run_begin = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_begin = run_begin;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len == 0) {
        throw NoBasin("attraction_range: no edge lands within tol of the mean");
    }

    const std::size_t j0 = best_begin;
    const std::size_t j1 = best_begin + best_len - 1;
    AttractionRangeResult out;
    out.y = initial[j0];
    out.z = initial[j1];
    out.attracted_mass = window_moments(mu0, out.y, out.z).mass;
    out.converged_center = 0.5 * (final_edges[j0] + final_edges[j1]);
    out.tol_used = tol_used;
    out.steps = traj.steps;
    return {out, {j0, j1}};
}

// Splits the chosen positive-width cells into k equal subcells each. Exact
// for piecewise-constant density.
OpinionPartition split_cells(const OpinionPartition& part,
                             const std::vector<std::size_t>& which, int k) {
    std::vector<double> edges;
    std::vector<double> masses;
    edges.push_back(part.edges().front());
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        const bool split = std::find(which.begin(), which.end(), i) != which.end();
        if (split && c.width() > 0.0 && k > 1) {
            const double sub_mass = c.mass / k;
            for (int s = 1; s <= k; ++s) {
                edges.push_back(s == k ? c.right
                                       : c.left + c.width() * (static_cast<double>(s) / k));
                masses.push_back(sub_mass);
            }
        } else {
            edges.push_back(c.right);
            masses.push_back(c.mass);
        }
    }
    return OpinionPartition(std::move(edges), std::move(masses));
}

}  // namespace

AttractionRangeResult attraction_range(const OpinionPartition& mu0,
                                       const TruncatedGaussianInput& u,
                                       const SimulationConfig& cfg, double tol) {
    return attraction_range_impl(mu0, u, cfg, tol).range;
}

AttractionRangeResult attraction_range_refined(const OpinionPartition& mu0,
                                               const TruncatedGaussianInput& u,
                                               const SimulationConfig& cfg,
                                               double tol, int rounds,
                                               int subdivisions) {
    OpinionPartition part = mu0;
    BasinResult res = attraction_range_impl(part, u, cfg, tol);
    for (int round = 0; round < rounds; ++round) {
        // The watershed sits inside the cells just outside the basin run.
        std::vector<std::size_t> which;
        if (res.idx.first_edge > 0) which.push_back(res.idx.first_edge - 1);
        if (res.idx.last_edge < part.n_cells()) which.push_back(res.idx.last_edge);
        if (which.empty()) break;  // basin covers the full support
        part = split_cells(part, which, subdivisions);
        res = attraction_range_impl(part, u, cfg, tol);
    }
    return res.range;
}

namespace {

// Least squares for y ~ X * beta over the active columns; returns false when
// the normal equations are numerically singular.
bool solve_ols(const std::vector<std::vector<double>>& cols,
               const std::vector<double>& y, std::vector<double>& beta) {
    const std::size_t k = cols.size();
    const std::size_t n = y.size();
    std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
    std::vector<double> aty(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += cols[i][t] * cols[j][t];
            ata[i][j] = ata[j][i] = s;
        }
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += cols[i][t] * y[t];
        aty[i] = s;
    }
    // Gaussian elimination with partial pivoting.
    std::vector<std::vector<double>> m = ata;
    std::vector<double> rhs = aty;
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, std::abs(m[i][i]));
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (std::abs(m[pivot][col]) < 1e-12 * std::max(scale, 1.0)) return false;
        std::swap(m[pivot], m[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < k; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    beta.resize(k);
    for (std::size_t i = 0; i < k; ++i) beta[i] = rhs[i] / m[i][i];
    return true;
}

double r_squared(const std::vector<std::vector<double>>& cols,
                 const std::vector<double>& y, const std::vector<double>& beta) {
    const std::size_t n = y.size();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double fit = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i) fit += beta[i] * cols[i][t];
        ss_res += (y[t] - fit) * (y[t] - fit);
        ss_tot += (y[t] - mean) * (y[t] - mean);
    }
    if (ss_tot <= 0.0) return ss_res <= 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

bool column_varies(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo > 1e-12 * std::max(1.0, std::abs(*hi));
}

// |Pearson correlation| of two varying columns; near one means the design
// cannot separate their slopes.
double abs_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 1.0;
    return std::abs(sxy) / std::sqrt(sxx * syy);
}

}  // namespace

LinearFit fit_range_law(const std::vector<SweepPoint>& points) {
    if (points.size() < 3) {
        throw InsufficientPoints("fit_range_law: need >= 3 points");
    }
    std::vector<double> sig, rr, y;
    for (const SweepPoint& pt : points) {
        sig.push_back(pt.sigma);
        rr.push_back(pt.r);
        y.push_back(pt.range_length);
    }

    LinearFit fit;
    fit.n_points = y.size();
    fit.a_active = column_varies(sig);
    fit.b_active = column_varies(rr);
    if (fit.a_active && fit.b_active && abs_correlation(sig, rr) > 0.999) {
        // sigma and r move together across the grid (diagonal pairings);
        // their slopes cannot be separated, so report on sigma alone
        fit.b_active = false;
    }

    const std::vector<double> ones(y.size(), 1.0);
    std::vector<std::vector<double>> cols;
    std::vector<int> roles;  // 0 = sigma, 1 = r, 2 = intercept
    if (fit.a_active) { cols.push_back(sig); roles.push_back(0); }
    if (fit.b_active) { cols.push_back(rr); roles.push_back(1); }
    cols.push_back(ones);
    roles.push_back(2);

    std::vector<double> beta;
    if (!solve_ols(cols, y, beta) && fit.a_active && fit.b_active) {
        fit.b_active = false;
        cols = {sig, ones};
        roles = {0, 2};
        if (!solve_ols(cols, y, beta)) {
            throw InsufficientPoints("fit_range_law: degenerate design matrix");
        }
    } else if (beta.empty()) {
        throw InsufficientPoints("fit_range_law: degenerate design matrix");
    }

    for (std::size_t i = 0; i < roles.size(); ++i) {
        if (roles[i] == 0) fit.a = beta[i];
        if (roles[i] == 1) fit.b = beta[i];
        if (roles[i] == 2) fit.c = beta[i];
    }
    fit.r_squared = r_squared(cols, y, beta);
    return fit;
}

SweepResult sweep_fit(const UniformFamily& family,
                      const std::vector<std::pair<double, double>>& sigma_r_grid,
                      const SimulationConfig& cfg, const SweepOptions& opts) {
    if (sigma_r_grid.size() < 3) {
        throw InsufficientPoints("sweep_fit: need >= 3 grid points");
    }

    SweepResult result;
    result.points.resize(sigma_r_grid.size());

    const auto run_point = [&](std::size_t i) {
        const auto [sigma, r] = sigma_r_grid[i];
        SweepPoint& pt = result.points[i];
        pt.sigma = sigma;
        pt.r = r;
        try {
            const OpinionPartition mu0 = OpinionPartition::from_uniform(
                family.lo, family.hi, family.mass, family.n_cells);
            const TruncatedGaussianInput u =
                make_truncated_gaussian(opts.input_mean, sigma, opts.input_weight);
            SimulationConfig pcfg = cfg;
            pcfg.r = r;
            const AttractionRangeResult res = attraction_range_refined(
                mu0, u, pcfg, opts.tol, opts.refine_rounds, opts.refine_subdivisions);
            pt.range_length = res.length();
            pt.attracted_mass = res.attracted_mass;
            pt.converged = true;
        } catch (const Error&) {
            pt.range_length = std::numeric_limits<double>::quiet_NaN();
            pt.attracted_mass = 0.0;
            pt.converged = false;
        }
    };

    const unsigned jobs = std::max(1u, opts.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < sigma_r_grid.size(); ++i) run_point(i);
    } else {
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < sigma_r_grid.size(); i += jobs) {
                    run_point(i);
                }
            });
        }
        for (std::thread& th : workers) th.join();
    }

    const double length_cap =
        (family.hi - family.lo) * (opts.filter_fraction > 0.0 ? opts.filter_fraction : 0.6);
    std::vector<SweepPoint> kept;
    for (const SweepPoint& pt : result.points) {
        if (!pt.converged || !std::isfinite(pt.range_length)) continue;
        if (!(pt.range_length < length_cap)) continue;
        kept.push_back(pt);
    }
    if (kept.size() < 3) {
        throw InsufficientPoints("sweep_fit: fewer than 3 points after filtering");
    }

    result.fit = fit_range_law(kept);
    result.fit.filtered_out = result.points.size() - kept.size();
    return result;
}

double positive_mass(const OpinionPartition& part) {
    return window_moments(part, 0.0, 1.0).mass;
}

namespace {

double schedule_sigma(const InputSchedule& s) {
    if (const auto& c = s.constant_input()) return c->sigma;
    if (!s.phases().empty()) {
        const double sigma = s.phases().front().sigma;
        for (const InputPhase& ph : s.phases()) {
            if (ph.sigma != sigma) {
                throw InvalidArgument("compare_strategies: phases must share sigma");
            }
        }
        return sigma;
    }
    throw InvalidArgument("compare_strategies: schedule carries no input");
}

StrategyArm run_arm(const std::string& name, const OpinionPartition& mu0,
                    const SimulationConfig& cfg, const InputSchedule& sched,
                    double center_halfwidth) {
    StrategyArm arm;
    arm.name = name;
    SimulationConfig horizon_cfg = cfg;
    horizon_cfg.stop_on_convergence = false;  // score at exactly step T
    arm.trajectory = run(mu0, horizon_cfg, sched);
    if (arm.trajectory.termination == Termination::error) {
        throw Error("compare_strategies(" + name + "): " +
                    arm.trajectory.error_message);
    }
    const OpinionPartition& final_state = arm.trajectory.final_state();
    arm.objective = positive_mass(final_state);
    const long t_last = std::max<long>(1, arm.trajectory.steps);
    const auto u = sched.at(t_last, final_state.support());
    arm.final_input_mean = u ? u->mean : 0.0;
    arm.attracted_to_center =
        window_moments(final_state, arm.final_input_mean - center_halfwidth,
                       arm.final_input_mean + center_halfwidth)
            .mass;
    return arm;
}

}  // namespace

StrategyReport compare_strategies(const OpinionPartition& mu0,
                                  const SimulationConfig& cfg,
                                  const InputSchedule& direct,
                                  const InputSchedule& distracting) {
    const double sd = schedule_sigma(direct);
    const double sd2 = schedule_sigma(distracting);
    if (sd != sd2) {
        throw InvalidArgument("compare_strategies: arms must share sigma");
    }
    const double w0 = mu0.support().width();
    if (!(sd < w0 / 12.0)) {
        throw InvalidArgument("compare_strategies: requires sigma < |supp mu0| / 12");
    }

    const double eps_consensus =
        cfg.eps_consensus > 0.0 ? cfg.eps_consensus : 1e-9 * w0;
    const double halfwidth = std::max(eps_consensus, 1e-3 * w0);

    StrategyReport report;
    report.direct = run_arm("direct", mu0, cfg, direct, halfwidth);
    report.distracting = run_arm("distracting", mu0, cfg, distracting, halfwidth);
    if (report.distracting.objective > report.direct.objective) {
        report.winner = "distracting";
    } else if (report.direct.objective > report.distracting.objective) {
        report.winner = "direct";
    } else {
        report.winner = "tie";
    }
    return report;
}

}  // namespace opiniondrift

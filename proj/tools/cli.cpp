#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "opiniondrift/analysis.hpp"
#include "opiniondrift/errors.hpp"
#include "opiniondrift/io.hpp"
#include "opiniondrift/oracle.hpp"
#include "opiniondrift/simulate.hpp"

namespace opiniondrift::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

int fail(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
}

}  // namespace

std::string resolve_out_dir(const std::string& flag_value) {
    if (const char* env = std::getenv("OPINIONDRIFT_OUT")) {
        if (*env != '\0') return env;
    }
    return flag_value.empty() ? "." : flag_value;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 bool verbose) {
    try {
        const RunConfig cfg = load_config(config_path);
        const OpinionPartition mu0 = initial_partition(cfg);
        const Trajectory traj = run(mu0, cfg.sim, cfg.schedule);

        std::ostringstream csv;
        write_trajectory_csv(traj, csv);
        write_file(fs::path(out_dir) / "trajectory.csv", csv.str());
        write_file(fs::path(out_dir) / "summary.json",
                   trajectory_summary_json(traj, "eulerian"));

        if (verbose) {
            std::cout << "simulate: " << to_string(traj.termination) << " after "
                      << traj.steps << " steps, "
                      << traj.final_clusters.clusters.size() << " clusters\n";
        }
        switch (traj.termination) {
            case Termination::converged: return 0;
            case Termination::max_steps: return 2;
            case Termination::error:
                std::cerr << "error: " << traj.error_message << "\n";
                return 1;
        }
        return 1;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_attraction_range(const std::string& config_path,
                         const std::string& out_dir, bool verbose) {
    try {
        const RunConfig cfg = load_config(config_path);
        if (!cfg.attraction.present) {
            throw ConfigError("config.attraction: section required");
        }
        const OpinionPartition mu0 = initial_partition(cfg);
        const TruncatedGaussianInput u = make_truncated_gaussian(
            cfg.attraction.mean, cfg.attraction.sigma, cfg.attraction.weight);
        const AttractionRangeResult res = attraction_range_refined(
            mu0, u, cfg.sim, cfg.attraction.tol, cfg.attraction.refine_rounds,
            cfg.attraction.refine_subdivisions);

        json j;
        j["y"] = res.y;
        j["z"] = res.z;
        j["range_length"] = res.length();
        j["attracted_mass"] = res.attracted_mass;
        j["converged_center"] = res.converged_center;
        j["tol_used"] = res.tol_used;
        j["steps"] = res.steps;
        write_file(fs::path(out_dir) / "attraction.json", j.dump(2));

        if (verbose) {
            std::cout << "attraction range [" << res.y << ", " << res.z
                      << "], length " << res.length() << ", mass "
                      << res.attracted_mass << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              unsigned jobs, bool verbose) {
    try {
        const RunConfig cfg = load_config(config_path);
        if (!cfg.sweep.present) throw ConfigError("config.sweep: section required");

        std::vector<std::pair<double, double>> grid;
        if (cfg.sweep.zip) {
            for (std::size_t i = 0; i < cfg.sweep.sigmas.size(); ++i) {
                grid.emplace_back(cfg.sweep.sigmas[i], cfg.sweep.rs[i]);
            }
        } else {
            for (double s : cfg.sweep.sigmas) {
                for (double r : cfg.sweep.rs) grid.emplace_back(s, r);
            }
        }

        UniformFamily family{cfg.initial_lo, cfg.initial_hi, cfg.initial_mass,
                             cfg.sweep.n_cells ? cfg.sweep.n_cells
                                               : cfg.sim.n_cells};
        SweepOptions opts = cfg.sweep.options;
        opts.jobs = std::max(1u, jobs);

        const SweepResult result = sweep_fit(family, grid, cfg.sim, opts);

        std::ostringstream csv;
        write_sweep_csv(result.points, csv);
        write_file(fs::path(out_dir) / "sweep.csv", csv.str());
        write_file(fs::path(out_dir) / "fit.json", fit_json(result.fit));

        std::cout << "fit: a=" << format_double(result.fit.a)
                  << " b=" << format_double(result.fit.b)
                  << " c=" << format_double(result.fit.c)
                  << " r_squared=" << format_double(result.fit.r_squared) << "\n";
        if (verbose) {
            std::cout << "sweep: " << result.points.size() << " points, "
                      << result.fit.n_points << " kept for the fit\n";
        }
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                bool verbose) {
    try {
        const RunConfig cfg = load_config(config_path);
        if (!cfg.compare.present) {
            throw ConfigError("config.compare: section required");
        }
        const OpinionPartition mu0 = initial_partition(cfg);
        SimulationConfig sim = cfg.sim;
        sim.max_steps = cfg.compare.horizon;

        const StrategyReport report =
            compare_strategies(mu0, sim, cfg.compare.direct, cfg.compare.distracting);

        write_file(fs::path(out_dir) / "compare.json", strategy_report_json(report));
        for (const StrategyArm* arm : {&report.direct, &report.distracting}) {
            std::ostringstream csv;
            write_trajectory_csv(arm->trajectory, csv);
            write_file(fs::path(out_dir) / (arm->name + "_trajectory.csv"), csv.str());
        }

        std::cout << "winner: " << report.winner
                  << " (direct objective " << format_double(report.direct.objective)
                  << ", distracting objective "
                  << format_double(report.distracting.objective) << ")\n";
        if (verbose) {
            std::cout << "attracted: direct "
                      << format_double(report.direct.attracted_to_center)
                      << ", distracting "
                      << format_double(report.distracting.attracted_to_center) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_oracle_check(const std::string& config_path, const std::string& out_dir,
                     bool verbose) {
    try {
        const RunConfig cfg = load_config(config_path);
        const OpinionPartition mu0 = initial_partition(cfg);

        const Trajectory euler = run(mu0, cfg.sim, cfg.schedule);
        if (euler.termination == Termination::error) {
            throw Error("eulerian run: " + euler.error_message);
        }
        const AgentRunResult agents =
            agent_run(sample_agents(mu0, cfg.oracle.n_agents), cfg.schedule,
                      cfg.sim.r, cfg.oracle.max_steps);

        // The agent engine's endstate in the shared trajectory formats: each
        // agent becomes an atom, separated by zero-mass gap cells.
        std::vector<double> agent_edges{agents.final_population.opinions.front()};
        std::vector<double> agent_masses;
        for (double x : agents.final_population.opinions) {
            if (x > agent_edges.back()) {
                agent_edges.push_back(x);
                agent_masses.push_back(0.0);
            }
            agent_edges.push_back(x);
            agent_masses.push_back(agents.final_population.agent_mass);
        }
        Trajectory lagr;
        lagr.snapshots.emplace_back(
            agents.steps,
            OpinionPartition(std::move(agent_edges), std::move(agent_masses)));
        lagr.termination = Termination::converged;
        lagr.steps = agents.steps;
        lagr.final_clusters.clusters = agents.clusters;
        for (const ClusterMass& c : agents.clusters) {
            lagr.final_clusters.clustered_mass += c.mass;
        }
        lagr.final_clusters.converged = true;

        const double floor = cfg.oracle.mass_floor * mu0.total_mass();
        const auto significant = [floor](const std::vector<ClusterMass>& cs) {
            std::vector<ClusterMass> out;
            for (const ClusterMass& c : cs) {
                if (c.mass >= floor) out.push_back(c);
            }
            return out;
        };
        const std::vector<ClusterMass> ce = significant(euler.final_clusters.clusters);
        const std::vector<ClusterMass> ca = significant(agents.clusters);

        double max_pos = 0.0, max_mass = 0.0;
        bool pass = ce.size() == ca.size() && !ce.empty();
        if (pass) {
            for (std::size_t i = 0; i < ce.size(); ++i) {
                max_pos = std::max(max_pos, std::abs(ce[i].position - ca[i].position));
                max_mass = std::max(max_mass, std::abs(ce[i].mass - ca[i].mass));
            }
            pass = max_pos <= cfg.oracle.position_tol &&
                   max_mass <= cfg.oracle.mass_tol;
        }

        json j;
        j["eulerian_clusters"] = json::array();
        for (const ClusterMass& c : ce) {
            j["eulerian_clusters"].push_back({{"position", c.position}, {"mass", c.mass}});
        }
        j["lagrangian_clusters"] = json::array();
        for (const ClusterMass& c : ca) {
            j["lagrangian_clusters"].push_back({{"position", c.position}, {"mass", c.mass}});
        }
        j["max_position_discrepancy"] = max_pos;
        j["max_mass_discrepancy"] = max_mass;
        j["position_tol"] = cfg.oracle.position_tol;
        j["mass_tol"] = cfg.oracle.mass_tol;
        j["mass_floor"] = floor;
        j["pass"] = pass;
        write_file(fs::path(out_dir) / "oracle_check.json", j.dump(2));

        std::ostringstream traj_csv;
        write_trajectory_csv(euler, traj_csv);
        write_file(fs::path(out_dir) / "eulerian_trajectory.csv", traj_csv.str());
        write_file(fs::path(out_dir) / "eulerian_summary.json",
                   trajectory_summary_json(euler, "eulerian"));
        std::ostringstream lagr_csv;
        write_trajectory_csv(lagr, lagr_csv);
        write_file(fs::path(out_dir) / "lagrangian_trajectory.csv", lagr_csv.str());
        write_file(fs::path(out_dir) / "lagrangian_summary.json",
                   trajectory_summary_json(lagr, "lagrangian"));

        std::cout << "oracle-check: " << ce.size() << " vs " << ca.size()
                  << " clusters, max position discrepancy "
                  << format_double(max_pos) << ", max mass discrepancy "
                  << format_double(max_mass) << " -> " << (pass ? "PASS" : "FAIL")
                  << "\n";
        if (verbose) {
            std::cout << "eulerian steps " << euler.steps << ", lagrangian steps "
                      << agents.steps << "\n";
        }
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

}  // namespace opiniondrift::cli

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opiniondrift/analysis.hpp"
#include "opiniondrift/input.hpp"
#include "opiniondrift/measure.hpp"
#include "opiniondrift/simulate.hpp"

namespace opiniondrift {

// CSV uses '.' decimal separator, LF line endings, a header row, and %.17g
// doubles so values round-trip exactly and identical runs produce
// byte-identical files.

/// Columns: left_edge,right_edge,mass.
void write_partition_csv(const OpinionPartition& part, std::ostream& os);
OpinionPartition read_partition_csv(std::istream& is);

/// JSON header accompanying the partition CSV: {"total_mass": ..., "n_cells": ...}.
std::string partition_header_json(const OpinionPartition& part);

/// Columns: step,cell_left,cell_right,mass for every recorded snapshot.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// Termination reason, final clusters, and per-step diagnostics.
std::string trajectory_summary_json(const Trajectory& traj,
                                    const std::string& engine);

/// Columns: sigma,r,range_length,attracted_mass,converged.
void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& os);

std::string fit_json(const LinearFit& fit);

std::string strategy_report_json(const StrategyReport& report);

/// Everything a run needs, parsed from the JSON config file. Schedule spec:
/// {"type":"none"} |
/// {"type":"constant","mean":m,"sigma":s,"weight":w} |
/// {"type":"phased","phases":[{"until_step":n,
///                             "mean": m | {"tracking_offset": d},
///                             "sigma":s,"weight":w}, ...]}
struct RunConfig {
    double initial_lo = -1.0;
    double initial_hi = 1.0;
    double initial_mass = 1.0;
    SimulationConfig sim;
    InputSchedule schedule;

    struct Attraction {
        double mean = 0.0;
        double sigma = 0.0;
        double weight = 1.0;
        double tol = 0.0;
        int refine_rounds = 0;
        int refine_subdivisions = 16;
        bool present = false;
    } attraction;

    struct Sweep {
        std::vector<double> sigmas;
        std::vector<double> rs;
        bool zip = false;  ///< pair grids by index instead of the full product
        SweepOptions options;
        std::size_t n_cells = 0;  ///< 0: reuse sim.n_cells
        bool present = false;
    } sweep;

    struct Compare {
        InputSchedule direct;
        InputSchedule distracting;
        long horizon = 0;
        bool present = false;
    } compare;

    struct Oracle {
        std::size_t n_agents = 20000;
        long max_steps = 5000;
        double position_tol = 0.01;
        double mass_tol = 0.02;
        double mass_floor = 0.01;  ///< clusters below this mass are dust, not matched
        bool present = false;
    } oracle;
};

/// Parses and validates a config file; throws ConfigError naming the
/// offending field.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// Builds the initial distribution described by the config.
OpinionPartition initial_partition(const RunConfig& cfg);

/// Fixed-format double used by every CSV writer.
std::string format_double(double v);

}  // namespace opiniondrift

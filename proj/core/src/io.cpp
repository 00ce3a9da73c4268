#include "opiniondrift/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_partition_csv(const OpinionPartition& part, std::ostream& os) {
    os << "left_edge,right_edge,mass\n";
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        os << format_double(c.left) << ',' << format_double(c.right) << ','
           << format_double(c.mass) << '\n';
    }
}

OpinionPartition read_partition_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("partition csv: empty stream");
    std::vector<double> edges;
    std::vector<double> masses;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double l, r, m;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &l, &r, &m) != 3) {
            throw Error("partition csv: malformed row '" + line + "'");
        }
        if (edges.empty()) {
            edges.push_back(l);
        } else if (edges.back() != l) {
            throw Error("partition csv: rows are not contiguous");
        }
        edges.push_back(r);
        masses.push_back(m);
    }
    return OpinionPartition(std::move(edges), std::move(masses));
}

std::string partition_header_json(const OpinionPartition& part) {
    json j;
    j["total_mass"] = part.total_mass();
    j["n_cells"] = part.n_cells();
    return j.dump();
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << "step,cell_left,cell_right,mass\n";
    for (const auto& [step, part] : traj.snapshots) {
        for (std::size_t i = 0; i < part.n_cells(); ++i) {
            const Cell c = part.cell(i);
            os << step << ',' << format_double(c.left) << ','
               << format_double(c.right) << ',' << format_double(c.mass) << '\n';
        }
    }
}

namespace {

json clusters_json(const ClusterSet& cs) {
    json j;
    j["converged"] = cs.converged;
    j["clustered_mass"] = cs.clustered_mass;
    j["unclustered_mass"] = cs.unclustered_mass;
    j["clusters"] = json::array();
    for (const ClusterMass& c : cs.clusters) {
        j["clusters"].push_back({{"position", c.position}, {"mass", c.mass}});
    }
    return j;
}

}  // namespace

std::string trajectory_summary_json(const Trajectory& traj,
                                    const std::string& engine) {
    json j;
    j["engine"] = engine;
    j["termination"] = to_string(traj.termination);
    j["steps"] = traj.steps;
    if (!traj.error_message.empty()) j["error"] = traj.error_message;
    j["final_total_mass"] = traj.final_state().total_mass();
    j["clusters"] = clusters_json(traj.final_clusters);

    json diags = json::array();
    for (const StepDiagnostics& d : traj.diagnostics) {
        json jd;
        jd["step"] = d.step;
        jd["support_lo"] = d.support_lo;
        jd["support_hi"] = d.support_hi;
        jd["support_width"] = d.support_width;
        jd["rho_min"] = d.rho_min;
        jd["rho_max"] = d.rho_max;
        jd["all_atomic"] = d.all_atomic;
        jd["input_present"] = d.input_present;
        if (d.input_present) {
            jd["input_mean"] = d.input_mean;
            jd["input_contained"] = d.input_contained;
        }
        jd["order_regime"] = d.order_regime;
        jd["monotonic_ok"] = d.monotonic_ok;
        jd["fused_edges"] = d.fused_edges;
        jd["support_shrank"] = d.support_shrank;
        jd["endpoint_map_error"] = d.endpoint_map_error;
        jd["delta_z"] = d.delta_z;
        jd["delta_z2"] = d.delta_z2;
        jd["delta_sin"] = d.delta_sin;
        if (d.bilipschitz) {
            jd["bilipschitz"] = {{"l_low", d.bilipschitz->l_low},
                                 {"l_high", d.bilipschitz->l_high},
                                 {"hypothesis_violated",
                                  d.bilipschitz->hypothesis_violated}};
        }
        diags.push_back(std::move(jd));
    }
    j["diagnostics"] = std::move(diags);
    return j.dump(2);
}

void write_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& os) {
    os << "sigma,r,range_length,attracted_mass,converged\n";
    for (const SweepPoint& pt : points) {
        os << format_double(pt.sigma) << ',' << format_double(pt.r) << ','
           << format_double(pt.range_length) << ','
           << format_double(pt.attracted_mass) << ',' << (pt.converged ? 1 : 0)
           << '\n';
    }
}

std::string fit_json(const LinearFit& fit) {
    json j;
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["c"] = fit.c;
    j["r_squared"] = fit.r_squared;
    j["n_points"] = fit.n_points;
    j["filtered_out"] = fit.filtered_out;
    j["a_active"] = fit.a_active;
    j["b_active"] = fit.b_active;
    return j.dump(2);
}

std::string strategy_report_json(const StrategyReport& report) {
    const auto arm_json = [](const StrategyArm& arm) {
        json j;
        j["objective"] = arm.objective;
        j["attracted_to_center"] = arm.attracted_to_center;
        j["final_input_mean"] = arm.final_input_mean;
        j["steps"] = arm.trajectory.steps;
        j["termination"] = to_string(arm.trajectory.termination);
        return j;
    };
    json j;
    j["direct"] = arm_json(report.direct);
    j["distracting"] = arm_json(report.distracting);
    j["winner"] = report.winner;
    return j.dump(2);
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError("config." + field + ": " + why);
}

double get_number(const json& j, const std::string& field, bool required,
                  double fallback) {
    if (!j.contains(field)) {
        if (required) fail(field, "missing required number");
        return fallback;
    }
    if (!j[field].is_number()) fail(field, "expected a number");
    return j[field].get<double>();
}

long get_integer(const json& j, const std::string& field, bool required,
                 long fallback) {
    if (!j.contains(field)) {
        if (required) fail(field, "missing required integer");
        return fallback;
    }
    if (!j[field].is_number_integer()) fail(field, "expected an integer");
    return j[field].get<long>();
}

InputSchedule parse_schedule(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        fail(where + ".type", "expected \"none\", \"constant\" or \"phased\"");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "none") return InputSchedule::none();
    if (type == "constant") {
        const double mean = get_number(j, "mean", true, 0.0);
        const double sigma = get_number(j, "sigma", true, 0.0);
        const double weight = get_number(j, "weight", false, 1.0);
        if (!(sigma > 0.0)) fail(where + ".sigma", "must be > 0");
        if (!(weight > 0.0)) fail(where + ".weight", "must be > 0");
        return InputSchedule::constant(make_truncated_gaussian(mean, sigma, weight));
    }
    if (type == "phased") {
        if (!j.contains("phases") || !j["phases"].is_array() || j["phases"].empty()) {
            fail(where + ".phases", "expected a non-empty array");
        }
        std::vector<InputPhase> phases;
        long prev = -1;
        for (const json& jp : j["phases"]) {
            InputPhase ph;
            ph.until_step = get_integer(jp, "until_step", true, 0);
            if (ph.until_step <= prev) {
                fail(where + ".phases.until_step", "must be strictly increasing");
            }
            prev = ph.until_step;
            if (!jp.contains("mean")) fail(where + ".phases.mean", "missing");
            if (jp["mean"].is_number()) {
                ph.mean = jp["mean"].get<double>();
            } else if (jp["mean"].is_object() && jp["mean"].contains("tracking_offset") &&
                       jp["mean"]["tracking_offset"].is_number()) {
                ph.mean = TrackingMean{jp["mean"]["tracking_offset"].get<double>()};
            } else {
                fail(where + ".phases.mean",
                     "expected a number or {\"tracking_offset\": x}");
            }
            ph.sigma = get_number(jp, "sigma", true, 0.0);
            ph.weight = get_number(jp, "weight", false, 1.0);
            if (!(ph.sigma > 0.0)) fail(where + ".phases.sigma", "must be > 0");
            if (!(ph.weight > 0.0)) fail(where + ".phases.weight", "must be > 0");
            phases.push_back(std::move(ph));
        }
        return InputSchedule::phased(std::move(phases));
    }
    fail(where + ".type", "unknown schedule type '" + type + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");

    RunConfig cfg;

    if (j.contains("initial")) {
        const json& ji = j["initial"];
        if (ji.contains("type") && ji["type"] != "uniform") {
            fail("initial.type", "only \"uniform\" is supported");
        }
        cfg.initial_lo = get_number(ji, "lo", true, 0.0);
        cfg.initial_hi = get_number(ji, "hi", true, 0.0);
        cfg.initial_mass = get_number(ji, "mass", false, 1.0);
    }
    if (!(cfg.initial_lo < cfg.initial_hi)) fail("initial", "requires lo < hi");
    if (!(cfg.initial_mass > 0.0)) fail("initial.mass", "must be > 0");

    const long n_cells = get_integer(j, "n_cells", true, 0);
    if (n_cells < 16) fail("n_cells", "must be >= 16");
    cfg.sim.n_cells = static_cast<std::size_t>(n_cells);

    cfg.sim.r = get_number(j, "r", true, 0.0);
    if (!(cfg.sim.r > 0.0)) fail("r", "must be > 0");

    cfg.sim.max_steps = get_integer(j, "max_steps", false, 1000);
    if (cfg.sim.max_steps < 1) fail("max_steps", "must be >= 1");

    cfg.sim.record_every = get_integer(j, "record_every", false, 1);
    if (cfg.sim.record_every < 1) fail("record_every", "must be >= 1");

    cfg.sim.rng_seed =
        static_cast<std::uint64_t>(get_integer(j, "rng_seed", false, 0));

    if (j.contains("stop_on_convergence")) {
        if (!j["stop_on_convergence"].is_boolean()) {
            fail("stop_on_convergence", "expected a boolean");
        }
        cfg.sim.stop_on_convergence = j["stop_on_convergence"].get<bool>();
    }

    if (j.contains("tolerances")) {
        const json& jt = j["tolerances"];
        cfg.sim.eps_cluster = get_number(jt, "cluster", false, 0.0);
        cfg.sim.eps_consensus = get_number(jt, "consensus", false, 0.0);
        if (cfg.sim.eps_cluster < 0.0) fail("tolerances.cluster", "must be >= 0");
        if (cfg.sim.eps_consensus < 0.0) fail("tolerances.consensus", "must be >= 0");
    }

    if (j.contains("diagnostics")) {
        const json& jd = j["diagnostics"];
        if (jd.contains("bilipschitz")) {
            if (!jd["bilipschitz"].is_boolean()) {
                fail("diagnostics.bilipschitz", "expected a boolean");
            }
            cfg.sim.diag_bilipschitz = jd["bilipschitz"].get<bool>();
        }
        const long samples = get_integer(jd, "bilipschitz_samples", false, 64);
        if (samples < 2) fail("diagnostics.bilipschitz_samples", "must be >= 2");
        cfg.sim.bilipschitz_samples = static_cast<std::size_t>(samples);
    }

    cfg.schedule = j.contains("schedule") ? parse_schedule(j["schedule"], "schedule")
                                          : InputSchedule::none();

    if (j.contains("attraction")) {
        const json& ja = j["attraction"];
        cfg.attraction.present = true;
        cfg.attraction.mean = get_number(ja, "mean", false, 0.0);
        cfg.attraction.sigma = get_number(ja, "sigma", true, 0.0);
        cfg.attraction.weight = get_number(ja, "weight", false, 1.0);
        cfg.attraction.tol = get_number(ja, "tol", false, 0.0);
        cfg.attraction.refine_rounds =
            static_cast<int>(get_integer(ja, "refine_rounds", false, 0));
        cfg.attraction.refine_subdivisions =
            static_cast<int>(get_integer(ja, "refine_subdivisions", false, 16));
        if (!(cfg.attraction.sigma > 0.0)) fail("attraction.sigma", "must be > 0");
        if (!(cfg.attraction.weight > 0.0)) fail("attraction.weight", "must be > 0");
    }

    if (j.contains("sweep")) {
        const json& js = j["sweep"];
        cfg.sweep.present = true;
        for (const std::string key : {"sigmas", "rs"}) {
            if (!js.contains(key) || !js[key].is_array() || js[key].empty()) {
                fail("sweep." + key, "expected a non-empty array of numbers");
            }
        }
        for (const json& v : js["sigmas"]) cfg.sweep.sigmas.push_back(v.get<double>());
        for (const json& v : js["rs"]) cfg.sweep.rs.push_back(v.get<double>());
        if (js.contains("mode")) {
            const std::string mode = js["mode"].get<std::string>();
            if (mode == "zip") {
                cfg.sweep.zip = true;
                if (cfg.sweep.sigmas.size() != cfg.sweep.rs.size()) {
                    fail("sweep.mode", "zip mode needs sigmas and rs of equal length");
                }
            } else if (mode != "grid") {
                fail("sweep.mode", "expected \"grid\" or \"zip\"");
            }
        }
        cfg.sweep.options.input_mean = get_number(js, "input_mean", false, 0.0);
        cfg.sweep.options.input_weight = get_number(js, "weight", false, 1.0);
        cfg.sweep.options.tol = get_number(js, "tol", false, 0.0);
        cfg.sweep.options.filter_fraction =
            get_number(js, "filter_fraction", false, 0.6);
        cfg.sweep.options.refine_rounds =
            static_cast<int>(get_integer(js, "refine_rounds", false, 1));
        cfg.sweep.options.refine_subdivisions =
            static_cast<int>(get_integer(js, "refine_subdivisions", false, 16));
        cfg.sweep.n_cells =
            static_cast<std::size_t>(get_integer(js, "n_cells", false, 0));
    }

    if (j.contains("compare")) {
        const json& jc = j["compare"];
        cfg.compare.present = true;
        if (!jc.contains("direct") || !jc.contains("distracting")) {
            fail("compare", "needs direct and distracting schedules");
        }
        cfg.compare.direct = parse_schedule(jc["direct"], "compare.direct");
        cfg.compare.distracting =
            parse_schedule(jc["distracting"], "compare.distracting");
        cfg.compare.horizon = get_integer(jc, "horizon", false, cfg.sim.max_steps);
        if (cfg.compare.horizon < 1) fail("compare.horizon", "must be >= 1");
    }

    if (j.contains("oracle")) {
        const json& jo = j["oracle"];
        cfg.oracle.present = true;
        const long agents = get_integer(jo, "n_agents", false, 20000);
        if (agents < 1) fail("oracle.n_agents", "must be >= 1");
        cfg.oracle.n_agents = static_cast<std::size_t>(agents);
        cfg.oracle.max_steps = get_integer(jo, "max_steps", false, 5000);
        cfg.oracle.position_tol = get_number(jo, "position_tol", false, 0.01);
        cfg.oracle.mass_tol = get_number(jo, "mass_tol", false, 0.02);
        cfg.oracle.mass_floor = get_number(jo, "mass_floor", false, 0.01);
    }

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

OpinionPartition initial_partition(const RunConfig& cfg) {
    return OpinionPartition::from_uniform(cfg.initial_lo, cfg.initial_hi,
                                          cfg.initial_mass, cfg.sim.n_cells);
}

}  // namespace opiniondrift

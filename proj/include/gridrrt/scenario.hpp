#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridrrt/case_io.hpp"
#include "gridrrt/io.hpp"
#include "gridrrt/numfmt.hpp"
#include "gridrrt/planner.hpp"
#include "gridrrt/power.hpp"
#include "gridrrt/svg.hpp"

namespace gridrrt {

struct FaultEvent {
    int bus = 0;
    double t_on = 0.0;
    double t_clear = 0.0;
};

struct Scenario {
    std::string case_path;
    std::optional<FaultEvent> fault;
    int prefault_mode = 0;  // mode of the pre-fault equilibrium
    int initial_mode = 0;   // mode right after fault clearing
    TargetSetSpec goal;
    PlannerConfig planner;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

inline Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
    Scenario sc;
    try {
        detail::reject_unknown_keys(j, {"schema", "case", "prefault_mode", "initial_mode", "fault",
                                        "goal", "planner", "solver", "out_dir"},
                                    "scenario");
        if (j.at("schema").get<int>() != 1) throw ParseError("scenario: unsupported schema version");
        const std::filesystem::path rel = j.at("case").get<std::string>();
        sc.case_path = rel.is_absolute() ? rel.string() : (base_dir / rel).string();
        sc.prefault_mode = j.at("prefault_mode").get<int>();
        sc.initial_mode = j.at("initial_mode").get<int>();
        if (j.contains("fault")) {
            const auto& fj = j.at("fault");
            detail::reject_unknown_keys(fj, {"bus", "t_on", "t_clear"}, "scenario.fault");
            sc.fault = FaultEvent{fj.at("bus").get<int>(), fj.at("t_on").get<double>(),
                                  fj.at("t_clear").get<double>()};
            if (!(sc.fault->t_on < sc.fault->t_clear))
                throw ValidationError("scenario: fault t_on must precede t_clear");
        }
        const auto& gj = j.at("goal");
        detail::reject_unknown_keys(gj, {"mode", "omega_tol", "phase_spread_max", "v_tol"},
                                    "scenario.goal");
        sc.goal.goal_mode = gj.at("mode").get<int>();
        sc.goal.omega_tol = gj.value("omega_tol", 0.01);
        sc.goal.phase_spread_max = gj.value("phase_spread_max", std::numbers::pi / 6.0);
        sc.goal.v_tol = gj.value("v_tol", 0.2);
        const auto& pj = j.at("planner");
        detail::reject_unknown_keys(pj, {"k", "dt", "seed", "stop_on_goal"}, "scenario.planner");
        sc.planner.iterations = pj.at("k").get<int>();
        sc.planner.dt = pj.at("dt").get<double>();
        if (pj.contains("seed")) sc.seed = pj.at("seed").get<std::uint64_t>();
        sc.planner.stop_on_goal = pj.value("stop_on_goal", true);
        if (j.contains("solver")) {
            const auto& sj = j.at("solver");
            detail::reject_unknown_keys(sj, {"h", "newton_tol", "newton_max_iter", "algebraic_tol"},
                                        "scenario.solver");
            sc.planner.solver.h = sj.value("h", 0.01);
            sc.planner.solver.newton_tol = sj.value("newton_tol", 1e-9);
            sc.planner.solver.newton_max_iter = sj.value("newton_max_iter", 25);
            sc.planner.solver.algebraic_tol = sj.value("algebraic_tol", 1e-8);
        }
        sc.out_dir = j.value("out_dir", "out");
        if (sc.planner.iterations < 0) throw ValidationError("scenario: k must be >= 0");
        if (!(sc.planner.dt > 0.0)) throw ValidationError("scenario: dt must be positive");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario json: ") + e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    return scenario_from_json(read_json_file(path), std::filesystem::path(path).parent_path());
}

// Everything derived from a scenario up to (and including) the post-fault
// initial hybrid state.
struct ScenarioContext {
    PowerSystemCase sys;  // initialized at the pre-fault equilibrium
    HybridAutomaton automaton;
    Layout layout;
    PowerFlowResult pf;
    Vec x_eq;
    HybridState s_init;
    // Fault-sequence record (empty when the scenario has no fault):
    // [0, t_on] equilibrium hold, [t_on, t_clear] faulted evolution.
    std::vector<TrajectorySegment> history;
};

// The polar-form network Jacobian degenerates as a bus voltage approaches
// zero (every row entry scales with v), so the algebraic state at the end
// of a bolted-fault interval is a hostile Newton seed. For the clearing
// transition the differential slice carries all the physics; seed the
// algebraic slice from the equilibrium instead.
inline Vec clearing_seed(const Vec& x, const Vec& x_eq, int n_y) {
    Vec s = x;
    const Eigen::Index nz = s.size() - n_y;
    s.tail(nz) = x_eq.tail(nz);
    return s;
}

inline ScenarioContext prepare_scenario(const Scenario& sc) {
    ScenarioContext ctx;
    PowerSystemCase raw = load_case(sc.case_path);
    raw.mode_spec(sc.prefault_mode);
    raw.mode_spec(sc.initial_mode);
    ctx.pf = power_flow(raw, sc.prefault_mode);
    ctx.sys = init_generators(std::move(raw), ctx.pf, sc.prefault_mode);
    ctx.automaton = build_automaton(ctx.sys);
    ctx.layout = ctx.automaton.layout;
    ctx.x_eq = pack_state(ctx.sys);

    const SolverConfig& cfg = sc.planner.solver;
    if (sc.fault) {
        ctx.sys.bus_index(sc.fault->bus);
        const SemiExplicitDae& pre_dae = ctx.automaton.mode_dynamics(sc.prefault_mode);
        Vec x = ctx.x_eq;
        // pre-fault hold at the equilibrium
        if (sc.fault->t_on > 0.0) {
            DaeState s0{x.head(pre_dae.n_y), x.tail(pre_dae.n_z), 0.0};
            TrajectorySegment hold = simulate(pre_dae, s0, 0.0, sc.fault->t_on, cfg);
            x = pack_dae_state(hold.back());
            ctx.history.push_back(std::move(hold));
        }
        // faulted evolution in the pre-fault mode
        PowerSystemCase faulted = apply_fault(ctx.sys, sc.fault->bus);
        SemiExplicitDae fault_dae = make_dae(faulted, sc.prefault_mode);
        Vec xf = make_consistent(fault_dae, x, 0.0, cfg);
        DaeState sf{xf.head(fault_dae.n_y), xf.tail(fault_dae.n_z), sc.fault->t_on};
        TrajectorySegment on_fault =
            simulate(fault_dae, sf, 0.0, sc.fault->t_clear - sc.fault->t_on, cfg);
        x = pack_dae_state(on_fault.back());
        ctx.history.push_back(std::move(on_fault));
        // clear the fault; switch to the post-fault mode
        HybridState cleared{sc.prefault_mode, x};
        if (sc.initial_mode != sc.prefault_mode)
            cleared = discrete_step(ctx.automaton, cleared,
                                    ctx.automaton.modes[static_cast<std::size_t>(sc.initial_mode)]);
        const SemiExplicitDae& post_dae = ctx.automaton.mode_dynamics(sc.initial_mode);
        const Vec seed = clearing_seed(cleared.x, ctx.x_eq, post_dae.n_y);
        ctx.s_init = HybridState{sc.initial_mode, make_consistent(post_dae, seed, 0.0, cfg)};
    } else {
        HybridState s{sc.prefault_mode, ctx.x_eq};
        if (sc.initial_mode != sc.prefault_mode) {
            s = discrete_step(ctx.automaton, s,
                              ctx.automaton.modes[static_cast<std::size_t>(sc.initial_mode)]);
            s.x = make_consistent(ctx.automaton.mode_dynamics(sc.initial_mode), s.x, 0.0, cfg);
        }
        ctx.s_init = s;
    }
    ctx.automaton.init = {ctx.s_init};
    return ctx;
}

// Search box for a prepared case: bus-voltage variables use the declared
// model bounds when present, angles cover the circle, the rest sits in the
// +-10% window around the power-flow equilibrium.
inline SamplerSpec scenario_search_box(const ScenarioContext& ctx) {
    const int g = static_cast<int>(ctx.sys.generators.size());
    const auto alg = algebraic_buses(ctx.sys);
    const int a = static_cast<int>(alg.size());
    std::map<int, std::pair<double, double>> bounds;
    for (int p = 0; p < a; ++p) {
        const Bus& bus = ctx.sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])];
        if (bus.v_min && bus.v_max) bounds[2 * g + a + p] = {*bus.v_min, *bus.v_max};
    }
    std::vector<int> mode_ids;
    for (const auto& m : ctx.automaton.modes) mode_ids.push_back(m.id);
    return search_box(ctx.layout, ctx.x_eq, bounds, {}, mode_ids);
}

// --- artifact writers ---------------------------------------------------------

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

struct PowerFlowArtifacts {
    PowerFlowResult pf;
    std::string csv_path;
    std::string log_path;
};

inline PowerFlowArtifacts run_powerflow(const Scenario& sc, const std::string& out_dir) {
    ensure_dir(out_dir);
    PowerSystemCase sys = load_case(sc.case_path);
    PowerFlowResult pf = power_flow(sys, sc.prefault_mode);

    const MatC Y = build_admittance(sys, sc.prefault_mode);
    const int nb = static_cast<int>(sys.buses.size());
    PowerFlowArtifacts art;
    art.pf = pf;
    art.csv_path = out_dir + "/powerflow.csv";
    art.log_path = out_dir + "/powerflow.log";

    std::ofstream csv(art.csv_path, std::ios::binary);
    csv << "bus,kind,v,theta,p_inj,q_inj\n";
    for (int j = 0; j < nb; ++j) {
        const Bus& bus = sys.buses[static_cast<std::size_t>(j)];
        double p, q;
        detail::bus_power(Y, pf.v, pf.theta, j, p, q);
        csv << bus.id << ","
            << (bus.kind == BusKind::Slack ? "slack" : bus.kind == BusKind::PV ? "PV" : "PQ") << ","
            << fmt_double(pf.v[j]) << "," << fmt_double(pf.theta[j]) << "," << fmt_double(p) << ","
            << fmt_double(q) << "\n";
    }
    csv.close();

    std::ofstream log(art.log_path, std::ios::binary);
    log << "case: " << sys.name << "\n";
    log << "mode: " << sc.prefault_mode << "\n";
    log << "iterations: " << pf.iterations << "\n";
    log << "mismatch_inf: " << fmt_double(pf.mismatch_inf) << "\n";
    log << "converged: true\n";
    return art;
}

// One row per stored sample of the stitched timeline.
struct TimelinePoint {
    double t = 0.0;
    Vec x;  // packed hybrid continuous state
};

struct SimulationArtifacts {
    std::vector<TimelinePoint> points;
    std::string csv_path;
};

// Full scenario timeline: equilibrium hold, faulted interval (when a fault
// is declared), then continuous evolution in `mode` under constant input u
// until `duration`. Boundary samples are duplicated at discontinuities of
// the algebraic variables.
inline SimulationArtifacts run_simulate(const Scenario& sc, int mode, double u, double duration,
                                        const std::string& out_dir,
                                        const std::vector<std::string>& plot_groups = {"omega", "delta",
                                                                                       "theta", "v"}) {
    ensure_dir(out_dir);
    ScenarioContext ctx = prepare_scenario(sc);
    const SolverConfig& cfg = sc.planner.solver;

    SimulationArtifacts art;
    auto append_segment = [&](const TrajectorySegment& seg) {
        for (std::size_t k = 0; k < seg.states.size(); ++k) {
            if (!art.points.empty() && k == 0 &&
                exact_equal(pack_dae_state(seg.states[k]), art.points.back().x))
                continue;  // skip bitwise-identical seam sample
            art.points.push_back(TimelinePoint{seg.times[k], pack_dae_state(seg.states[k])});
        }
    };

    double t = 0.0;
    Vec x = ctx.x_eq;
    for (const auto& seg : ctx.history) {
        append_segment(seg);
        t = seg.times.back();
        x = pack_dae_state(seg.back());
    }
    if (sc.fault) {
        // run_simulate continues after the fault clears in the requested mode
        HybridState cleared{sc.prefault_mode, x};
        if (mode != sc.prefault_mode)
            cleared = discrete_step(ctx.automaton, cleared,
                                    ctx.automaton.modes[static_cast<std::size_t>(mode)]);
        const SemiExplicitDae& dae_m = ctx.automaton.mode_dynamics(mode);
        x = make_consistent(dae_m, clearing_seed(cleared.x, ctx.x_eq, dae_m.n_y), u, cfg);
    } else if (mode != sc.prefault_mode) {
        HybridState s{sc.prefault_mode, x};
        s = discrete_step(ctx.automaton, s, ctx.automaton.modes[static_cast<std::size_t>(mode)]);
        x = make_consistent(ctx.automaton.mode_dynamics(mode), s.x, u, cfg);
    }
    if (duration > t) {
        const SemiExplicitDae& dae = ctx.automaton.mode_dynamics(mode);
        DaeState s0{x.head(dae.n_y), x.tail(dae.n_z), t};
        TrajectorySegment tail = simulate(dae, s0, u, duration - t, cfg);
        append_segment(tail);
    }

    // CSV: t, per-generator delta/omega, per-bus theta/v, then the derived
    // COI-relative angles and average-relative phases.
    const int g = static_cast<int>(ctx.sys.generators.size());
    const auto alg = algebraic_buses(ctx.sys);
    const int a = static_cast<int>(alg.size());
    Vec inertias(g);
    for (int i = 0; i < g; ++i) inertias[i] = ctx.sys.generators[static_cast<std::size_t>(i)].h;

    art.csv_path = out_dir + "/timeseries.csv";
    std::ofstream csv(art.csv_path, std::ios::binary);
    csv << "t";
    for (int i = 0; i < g; ++i) csv << ",delta_" << ctx.sys.generators[static_cast<std::size_t>(i)].id;
    for (int i = 0; i < g; ++i) csv << ",omega_" << ctx.sys.generators[static_cast<std::size_t>(i)].id;
    for (int p = 0; p < a; ++p)
        csv << ",theta_" << ctx.sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])].id;
    for (int p = 0; p < a; ++p)
        csv << ",v_" << ctx.sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])].id;
    for (int i = 0; i < g; ++i)
        csv << ",delta_coi_" << ctx.sys.generators[static_cast<std::size_t>(i)].id;
    for (int p = 0; p < a; ++p)
        csv << ",theta_rel_"
            << ctx.sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])].id;
    csv << "\n";
    for (const auto& pt : art.points) {
        csv << fmt_double(pt.t);
        const Vec deltas = pt.x.segment(0, g);
        const Vec omegas = pt.x.segment(g, g);
        const Vec thetas = pt.x.segment(2 * g, a);
        const Vec vs = pt.x.segment(2 * g + a, a);
        const double coi = g > 0 ? coi_angle(deltas, inertias) : 0.0;
        const double th_avg = a > 0 ? avg_bus_phase(thetas) : 0.0;
        for (int i = 0; i < g; ++i) csv << "," << fmt_double(deltas[i]);
        for (int i = 0; i < g; ++i) csv << "," << fmt_double(omegas[i]);
        for (int p = 0; p < a; ++p) csv << "," << fmt_double(thetas[p]);
        for (int p = 0; p < a; ++p) csv << "," << fmt_double(vs[p]);
        for (int i = 0; i < g; ++i) csv << "," << fmt_double(deltas[i] - coi);
        for (int p = 0; p < a; ++p) csv << "," << fmt_double(thetas[p] - th_avg);
        csv << "\n";
    }
    csv.close();

    // plots
    std::vector<double> ts;
    ts.reserve(art.points.size());
    for (const auto& pt : art.points) ts.push_back(pt.t);
    auto series_of = [&](int offset, int count, bool rel_coi, bool rel_avg) {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(count));
        for (const auto& pt : art.points) {
            double ref = 0.0;
            if (rel_coi) ref = coi_angle(pt.x.segment(0, g), inertias);
            if (rel_avg) ref = avg_bus_phase(pt.x.segment(2 * g, a));
            for (int i = 0; i < count; ++i)
                out[static_cast<std::size_t>(i)].push_back(pt.x[offset + i] - ref);
        }
        return out;
    };
    for (const auto& group : plot_groups) {
        std::vector<std::string> names;
        std::vector<std::vector<double>> series;
        std::string title;
        if (group == "omega") {
            for (int i = 0; i < g; ++i)
                names.push_back("omega_" +
                                std::to_string(ctx.sys.generators[static_cast<std::size_t>(i)].id));
            series = series_of(g, g, false, false);
            title = "rotor speeds (p.u.)";
        } else if (group == "delta") {
            for (int i = 0; i < g; ++i)
                names.push_back("delta_" +
                                std::to_string(ctx.sys.generators[static_cast<std::size_t>(i)].id));
            series = series_of(0, g, true, false);
            title = "rotor angles relative to the center of inertia (rad)";
        } else if (group == "theta") {
            for (int p = 0; p < a; ++p)
                names.push_back(
                    "theta_" +
                    std::to_string(
                        ctx.sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])].id));
            series = series_of(2 * g, a, false, true);
            title = "bus phases relative to their average (rad)";
        } else if (group == "v") {
            for (int p = 0; p < a; ++p)
                names.push_back(
                    "v_" +
                    std::to_string(
                        ctx.sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])].id));
            series = series_of(2 * g + a, a, false, false);
            title = "bus voltage amplitudes (p.u.)";
        } else {
            throw ValidationError("unknown plot group '" + group + "'");
        }
        write_svg_chart(out_dir + "/plot_" + group + ".svg", title, ts, series, names);
    }
    return art;
}

struct DsaOutcome {
    std::string verdict;  // SECURE or UNDECIDED
    PlanResult plan;
    std::optional<Execution> execution;
    ExecutionReport execution_report;
    ScenarioContext ctx;
};

struct DsaOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    std::optional<int> threads;
    bool write_artifacts = true;
};

inline DsaOutcome run_dsa(const Scenario& sc, const std::string& out_dir,
                          const DsaOverrides& ov = {}) {
    std::optional<std::uint64_t> seed = ov.seed ? ov.seed : sc.seed;
    if (!seed)
        throw ValidationError(
            "dsa: no seed given; set planner.seed in the scenario or pass --seed");

    DsaOutcome out;
    out.ctx = prepare_scenario(sc);
    ScenarioContext& ctx = out.ctx;

    PlannerConfig cfg = sc.planner;
    cfg.seed = *seed;
    if (ov.iterations) cfg.iterations = *ov.iterations;
    if (ov.threads) cfg.threads = *ov.threads;

    const SamplerSpec sampler = scenario_search_box(ctx);
    const DistanceSpec dspec = make_distance_spec(ctx.layout);
    const TargetSetSpec goal = sc.goal;
    const Layout layout = ctx.layout;
    auto goal_fn = [goal, layout](const HybridState& s) { return in_target_set(s, goal, layout); };
    auto feasible = make_feasibility_check(ctx.layout);

    out.plan = build_tree(ctx.automaton, ctx.s_init, sampler, dspec, goal_fn, feasible, cfg);

    if (out.plan.goal) {
        out.execution = extract_execution(ctx.automaton, out.plan.tree, *out.plan.goal);
        out.execution_report = validate_execution(ctx.automaton, *out.execution, 1e-6);
        out.verdict = out.execution_report.ok ? "SECURE" : "UNDECIDED";
    } else {
        out.verdict = "UNDECIDED";
    }

    if (ov.write_artifacts) {
        ensure_dir(out_dir);
        write_json_file(out_dir + "/tree.json", tree_to_json(out.plan.tree));
        if (out.execution)
            write_json_file(out_dir + "/execution.json", execution_to_json(*out.execution));

        std::ofstream metrics(out_dir + "/metrics.csv", std::ios::binary);
        metrics << "iter,t_step2,t_step3,t_step4,t_step5,nodes,sims_total\n";
        for (const auto& lm : out.plan.timing.loops)
            metrics << lm.iter << "," << fmt_double(lm.t_step2) << "," << fmt_double(lm.t_step3) << ","
                    << fmt_double(lm.t_step4) << "," << fmt_double(lm.t_step5) << "," << lm.nodes
                    << "," << lm.sims_total << "\n";
        metrics.close();

        const auto& tree = out.plan.tree;
        Json summary;
        summary["verdict"] = out.verdict;
        summary["seed"] = *seed;
        summary["k"] = cfg.iterations;
        summary["dt"] = cfg.dt;
        summary["threads"] = cfg.threads;
        summary["nodes"] = tree.nodes.size();
        summary["expanded"] = tree.expanded.size();
        summary["sims_total"] = tree.sims_total;
        summary["sim_bound"] = static_cast<std::uint64_t>(ctx.automaton.modes.size()) *
                               ctx.automaton.inputs.size() * tree.expanded.size();
        summary["nn_comparisons"] = tree.nn_comparisons;
        summary["rejected_iterations"] = tree.rejected_iterations;
        if (out.plan.goal) {
            summary["goal_node"] = out.plan.goal->node;
            summary["goal_sample"] = out.plan.goal->sample;
            int depth = 0;
            for (int id = out.plan.goal->node; tree.nodes[static_cast<std::size_t>(id)].parent != -1;
                 id = tree.nodes[static_cast<std::size_t>(id)].parent)
                ++depth;
            summary["goal_depth"] = depth;
            summary["execution_valid"] = out.execution_report.ok;
        } else {
            summary["goal_node"] = nullptr;
        }
        write_json_file(out_dir + "/summary.json", summary);
    }
    return out;
}

struct BenchRow {
    int k = 0;
    double t_total = 0.0, t_step2 = 0.0, t_step3 = 0.0, t_step4 = 0.0, t_step5 = 0.0;
    std::size_t nodes = 0;
    std::uint64_t sims_total = 0;
    std::uint64_t nn_comparisons = 0;
};

// Repeated full-budget runs over a list of iteration counts; trees are
// rebuilt from scratch so timings are independent.
inline std::vector<BenchRow> run_bench(const Scenario& sc, const std::vector<int>& k_list,
                                       const std::string& out_dir, bool write_artifacts = true) {
    if (!sc.seed) throw ValidationError("bench: scenario needs a planner seed");
    ScenarioContext ctx = prepare_scenario(sc);
    const SamplerSpec sampler = scenario_search_box(ctx);
    const DistanceSpec dspec = make_distance_spec(ctx.layout);
    const TargetSetSpec goal = sc.goal;
    const Layout layout = ctx.layout;
    auto goal_fn = [goal, layout](const HybridState& s) { return in_target_set(s, goal, layout); };
    auto feasible = make_feasibility_check(ctx.layout);

    std::vector<BenchRow> rows;
    for (int k : k_list) {
        PlannerConfig cfg = sc.planner;
        cfg.seed = *sc.seed;
        cfg.iterations = k;
        cfg.stop_on_goal = false;
        PlanResult res = build_tree(ctx.automaton, ctx.s_init, sampler, dspec, goal_fn, feasible, cfg);
        BenchRow row;
        row.k = k;
        row.t_step2 = res.timing.t_step2;
        row.t_step3 = res.timing.t_step3;
        row.t_step4 = res.timing.t_step4;
        row.t_step5 = res.timing.t_step5;
        row.t_total = res.timing.total;
        row.nodes = res.tree.nodes.size();
        row.sims_total = res.tree.sims_total;
        row.nn_comparisons = res.tree.nn_comparisons;
        rows.push_back(row);
    }
    if (write_artifacts) {
        ensure_dir(out_dir);
        std::ofstream csv(out_dir + "/bench.csv", std::ios::binary);
        csv << "k,t_total,t_step2,t_step3,t_step4,t_step5,nodes,sims_total,nn_comparisons\n";
        for (const auto& row : rows)
            csv << row.k << "," << fmt_double(row.t_total) << "," << fmt_double(row.t_step2) << ","
                << fmt_double(row.t_step3) << "," << fmt_double(row.t_step4) << ","
                << fmt_double(row.t_step5) << "," << row.nodes << "," << row.sims_total << ","
                << row.nn_comparisons << "\n";
    }
    return rows;
}

}  // namespace gridrrt

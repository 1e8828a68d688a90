#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridrrt/dae.hpp"
#include "gridrrt/errors.hpp"
#include "gridrrt/layout.hpp"

namespace gridrrt {

struct DiscreteMode {
    int id = 0;
    std::string label;
};

struct HybridState {
    int mode = 0;
    Vec x;
};

struct TimeInterval {
    double begin = 0.0;
    double end = 0.0;

    double length() const { return end - begin; }
};

// Ordered sequence of closed intervals [tau_i, tau_i'] with
// tau_i <= tau_i' and tau_i' == tau_{i+1}.
struct HybridTimeTrajectory {
    std::vector<TimeInterval> intervals;
};

struct TrajectoryReport {
    bool ok = true;
    int index = -1;
    std::string clause;
};

// Input annotation of one execution interval: a constant continuous input
// on positive-length intervals, the target mode on zero-length intervals
// that precede/record a discrete transition, or nothing (degenerate root
// interval).
struct IntervalInput {
    std::optional<double> continuous;
    std::optional<int> discrete_target;

    static IntervalInput none() { return {}; }
    static IntervalInput hold(double u) {
        IntervalInput in;
        in.continuous = u;
        return in;
    }
    static IntervalInput jump(int target_mode) {
        IntervalInput in;
        in.discrete_target = target_mode;
        return in;
    }
};

struct ExecutionSample {
    double t = 0.0;
    Vec x;
};

// Finite hybrid trajectory: per-interval mode, input, and the state series
// sampled on the integrator grid.
struct Execution {
    HybridTimeTrajectory tau;
    std::vector<int> modes;
    std::vector<IntervalInput> inputs;
    std::vector<std::vector<ExecutionSample>> samples;

    std::size_t size() const { return tau.intervals.size(); }
    bool empty() const { return tau.intervals.empty(); }
};

using GuardFn = std::function<bool(const Vec&)>;
using ResetFn = std::function<Vec(const Vec&)>;

struct HybridAutomaton {
    std::vector<DiscreteMode> modes;
    int dim = 0;
    Layout layout;
    std::vector<double> inputs;  // finite input set U, in declared order
    std::vector<std::pair<int, int>> edges;
    std::map<std::pair<int, int>, GuardFn> guards;
    std::map<std::pair<int, int>, ResetFn> resets;
    std::vector<HybridState> init;          // admissible initial states; empty = unconstrained
    std::vector<SemiExplicitDae> dynamics;  // one per mode, indexed by mode id

    bool has_edge(int from, int to) const {
        for (const auto& e : edges)
            if (e.first == from && e.second == to) return true;
        return false;
    }

    bool guard_holds(int from, int to, const Vec& x) const {
        auto it = guards.find({from, to});
        if (it == guards.end() || !it->second) return true;
        return it->second(x);
    }

    Vec apply_reset(int from, int to, const Vec& x) const {
        auto it = resets.find({from, to});
        if (it == resets.end() || !it->second) return x;
        return it->second(x);
    }

    const SemiExplicitDae& mode_dynamics(int mode) const {
        if (mode < 0 || mode >= static_cast<int>(dynamics.size()))
            throw ValidationError("automaton: no dynamics for mode " + std::to_string(mode));
        return dynamics[static_cast<std::size_t>(mode)];
    }
};

// Checks the three interval conditions of a hybrid time trajectory and
// reports the first violation. Total function: never throws.
inline TrajectoryReport validate_trajectory(const HybridTimeTrajectory& tau) {
    TrajectoryReport rep;
    if (tau.intervals.empty()) {
        rep.ok = false;
        rep.index = 0;
        rep.clause = "empty interval list";
        return rep;
    }
    for (std::size_t i = 0; i < tau.intervals.size(); ++i) {
        const auto& iv = tau.intervals[i];
        if (!(iv.begin <= iv.end)) {
            rep.ok = false;
            rep.index = static_cast<int>(i);
            rep.clause = "interval start exceeds its end";
            return rep;
        }
        if (i + 1 < tau.intervals.size() && iv.end != tau.intervals[i + 1].begin) {
            rep.ok = false;
            rep.index = static_cast<int>(i);
            rep.clause = "gap between consecutive intervals";
            return rep;
        }
    }
    return rep;
}

// One discrete transition. Identity resets return the continuous vector
// unchanged bitwise; algebraic re-consistency is the caller's concern.
inline HybridState discrete_step(const HybridAutomaton& automaton, const HybridState& s,
                                 const DiscreteMode& target) {
    if (!automaton.has_edge(s.mode, target.id))
        throw EdgeAbsent("discrete_step: no edge " + std::to_string(s.mode) + " -> " +
                         std::to_string(target.id));
    if (!automaton.guard_holds(s.mode, target.id, s.x))
        throw GuardFailed("discrete_step: guard rejects state on edge " + std::to_string(s.mode) +
                          " -> " + std::to_string(target.id));
    return HybridState{target.id, automaton.apply_reset(s.mode, target.id, s.x)};
}

inline bool exact_equal(const Vec& a, const Vec& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

inline HybridState first_state(const Execution& chi) {
    if (chi.empty() || chi.samples.front().empty()) throw Error("first_state: empty execution");
    return HybridState{chi.modes.front(), chi.samples.front().front().x};
}

inline HybridState last_state(const Execution& chi) {
    if (chi.empty() || chi.samples.back().empty()) throw Error("last_state: empty execution");
    return HybridState{chi.modes.back(), chi.samples.back().back().x};
}

struct ExecutionReport {
    bool ok = true;
    int interval = -1;
    int sample = -1;
    std::string clause;

    static ExecutionReport fail(int interval, int sample, std::string clause) {
        return ExecutionReport{false, interval, sample, std::move(clause)};
    }
};

// Execution acceptance check. Verifies, in order: structure, the hybrid
// time trajectory conditions, initial-condition membership, discrete
// evolution across boundaries, and the per-interval DAE residuals at the
// stored samples.
//
// Residuals are checked without re-integrating: every sample must satisfy
// ||psi||_inf <= tol, and every consecutive sample pair must satisfy the
// trapezoidal defect || y1 - y0 - (dt/2)(phi0 + phi1) ||_inf <= tol. The
// defect check is what catches corruption of differential variables that
// psi alone cannot see.
inline ExecutionReport validate_execution(const HybridAutomaton& automaton, const Execution& chi,
                                          double tol) {
    const std::size_t n = chi.size();
    if (n == 0) return ExecutionReport::fail(0, -1, "structure: empty execution");
    if (chi.modes.size() != n || chi.inputs.size() != n || chi.samples.size() != n)
        return ExecutionReport::fail(0, -1, "structure: per-interval arrays disagree with intervals");

    TrajectoryReport tr = validate_trajectory(chi.tau);
    if (!tr.ok) return ExecutionReport::fail(tr.index, -1, "trajectory: " + tr.clause);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& iv = chi.tau.intervals[i];
        const auto& ss = chi.samples[i];
        const int mode = chi.modes[i];
        if (mode < 0 || mode >= static_cast<int>(automaton.modes.size()))
            return ExecutionReport::fail(static_cast<int>(i), -1, "structure: unknown mode");
        if (ss.empty())
            return ExecutionReport::fail(static_cast<int>(i), -1, "structure: interval has no samples");
        if (iv.length() > 0.0 && ss.size() < 2)
            return ExecutionReport::fail(static_cast<int>(i), -1,
                                         "structure: positive-length interval needs a state series");
        const double tspan = std::max(1.0, std::abs(iv.end));
        if (std::abs(ss.front().t - iv.begin) > 1e-9 * tspan ||
            std::abs(ss.back().t - iv.end) > 1e-9 * tspan)
            return ExecutionReport::fail(static_cast<int>(i), -1,
                                         "structure: sample times do not span the interval");
        for (std::size_t k = 0; k + 1 < ss.size(); ++k)
            if (!(ss[k].t < ss[k + 1].t))
                return ExecutionReport::fail(static_cast<int>(i), static_cast<int>(k),
                                             "structure: sample times not increasing");
        for (const auto& s : ss)
            if (s.x.size() != automaton.dim)
                return ExecutionReport::fail(static_cast<int>(i), -1,
                                             "structure: sample dimension mismatch");
        if (iv.length() > 0.0 && !chi.inputs[i].continuous.has_value())
            return ExecutionReport::fail(static_cast<int>(i), -1,
                                         "structure: positive-length interval lacks an input");
    }

    if (!automaton.init.empty()) {
        const HybridState head = first_state(chi);
        bool member = false;
        for (const auto& s0 : automaton.init)
            if (s0.mode == head.mode && exact_equal(s0.x, head.x)) {
                member = true;
                break;
            }
        if (!member) return ExecutionReport::fail(0, 0, "initial: first state not in Init");
    }

    // Boundaries: a same-mode boundary is a seam (state continuity); a
    // mode change is a discrete transition (edge + guard + reset on the
    // differential slice; algebraic variables jump to the new manifold).
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Vec& x_end = chi.samples[i].back().x;
        const Vec& x_next = chi.samples[i + 1].front().x;
        const int q0 = chi.modes[i], q1 = chi.modes[i + 1];
        if (q0 == q1) {
            if (!exact_equal(x_end, x_next))
                return ExecutionReport::fail(static_cast<int>(i + 1), 0,
                                             "boundary: state discontinuity without a mode change");
            continue;
        }
        if (!automaton.has_edge(q0, q1))
            return ExecutionReport::fail(static_cast<int>(i + 1), 0, "boundary: edge not in E");
        if (!automaton.guard_holds(q0, q1, x_end))
            return ExecutionReport::fail(static_cast<int>(i + 1), 0, "boundary: guard rejected");
        const Vec reset_x = automaton.apply_reset(q0, q1, x_end);
        const int ny = automaton.mode_dynamics(q1).n_y;
        if (!exact_equal(reset_x.head(ny), x_next.head(ny)))
            return ExecutionReport::fail(static_cast<int>(i + 1), 0,
                                         "boundary: differential state disagrees with reset map");
    }

    // Per-interval DAE residuals on the stored grid.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& iv = chi.tau.intervals[i];
        if (!(iv.length() > 0.0)) continue;
        const auto& dae = automaton.mode_dynamics(chi.modes[i]);
        const double u = chi.inputs[i].continuous.value();
        const auto& ss = chi.samples[i];
        const int ny = dae.n_y, nz = dae.n_z;
        if (ny + nz != automaton.dim)
            return ExecutionReport::fail(static_cast<int>(i), -1, "structure: dynamics dimension");
        for (std::size_t k = 0; k < ss.size(); ++k) {
            if (nz > 0) {
                const Vec psi = dae.eval_psi(ss[k].x.head(ny), ss[k].x.tail(nz), u);
                if (!(psi.lpNorm<Eigen::Infinity>() <= tol))
                    return ExecutionReport::fail(static_cast<int>(i), static_cast<int>(k),
                                                 "residual: algebraic constraint violated");
            }
            if (k + 1 < ss.size() && ny > 0) {
                const double dt = ss[k + 1].t - ss[k].t;
                const Vec phi0 = dae.eval_phi(ss[k].x.head(ny), ss[k].x.tail(nz), u);
                const Vec phi1 = dae.eval_phi(ss[k + 1].x.head(ny), ss[k + 1].x.tail(nz), u);
                const Vec defect =
                    ss[k + 1].x.head(ny) - ss[k].x.head(ny) - 0.5 * dt * (phi0 + phi1);
                if (!(defect.lpNorm<Eigen::Infinity>() <= tol))
                    return ExecutionReport::fail(static_cast<int>(i), static_cast<int>(k),
                                                 "residual: differential defect violated");
            }
        }
    }
    return ExecutionReport{};
}

}  // namespace gridrrt

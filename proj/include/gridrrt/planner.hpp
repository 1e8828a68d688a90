#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gridrrt/dae.hpp"
#include "gridrrt/hybrid.hpp"
#include "gridrrt/layout.hpp"
#include "gridrrt/rng.hpp"

namespace gridrrt {

// --- sampling ----------------------------------------------------------------

enum class RangeClass { Circular, Bounded, Relative };

struct VariableRange {
    RangeClass cls = RangeClass::Relative;
    double lo = 0.0;
    double hi = 0.0;
    double center = 0.0;  // equilibrium value; sampled value for excluded indices
};

struct SamplerSpec {
    std::vector<int> modes;
    std::vector<VariableRange> ranges;  // one per continuous variable
    std::vector<char> excluded;         // indices never sampled nor measured

    int dim() const { return static_cast<int>(ranges.size()); }
};

// Two independent counter-based streams: one for the discrete mode, one for
// the continuous variables, so adding variables never perturbs the mode
// sequence and vice versa.
struct PlannerRng {
    SplitMix64 mode_stream;
    SplitMix64 cont_stream;

    explicit PlannerRng(std::uint64_t seed) : mode_stream(seed, 0), cont_stream(seed, 1) {}
};

// Uniform sample in the hybrid search box. Circular variables are drawn on
// (-pi, pi], bounded on [lo, hi], relative on [x* - 0.1|x*|, x* + 0.1|x*|];
// excluded variables sit at their equilibrium value.
inline HybridState sample_state(const SamplerSpec& spec, PlannerRng& rng) {
    HybridState s;
    s.mode = spec.modes[static_cast<std::size_t>(rng.mode_stream.next_below(spec.modes.size()))];
    s.x.resize(spec.dim());
    for (int i = 0; i < spec.dim(); ++i) {
        const VariableRange& r = spec.ranges[static_cast<std::size_t>(i)];
        if (!spec.excluded.empty() && spec.excluded[static_cast<std::size_t>(i)]) {
            s.x[i] = r.center;
            continue;
        }
        switch (r.cls) {
            case RangeClass::Circular:
                s.x[i] = rng.cont_stream.uniform_open_closed(-std::numbers::pi, std::numbers::pi);
                break;
            case RangeClass::Bounded:
            case RangeClass::Relative:
                s.x[i] = rng.cont_stream.uniform(r.lo, r.hi);
                break;
        }
    }
    return s;
}

// Generic search-box construction: circular slices sample the full circle,
// variables with declared model bounds use them, and everything else gets
// a +-10% window around its equilibrium value.
inline SamplerSpec search_box(const Layout& layout, const Vec& equilibrium,
                              const std::map<int, std::pair<double, double>>& declared_bounds,
                              const std::vector<int>& excluded_indices,
                              const std::vector<int>& mode_ids) {
    if (equilibrium.size() != layout.dim()) throw DimensionMismatch("search_box: equilibrium size");
    SamplerSpec spec;
    spec.modes = mode_ids;
    spec.ranges.resize(static_cast<std::size_t>(layout.dim()));
    spec.excluded.assign(static_cast<std::size_t>(layout.dim()), 0);
    for (int i = 0; i < layout.dim(); ++i) {
        VariableRange r;
        r.center = equilibrium[i];
        if (layout.is_circular(i)) {
            r.cls = RangeClass::Circular;
            r.lo = -std::numbers::pi;
            r.hi = std::numbers::pi;
        } else if (auto it = declared_bounds.find(i); it != declared_bounds.end()) {
            r.cls = RangeClass::Bounded;
            r.lo = it->second.first;
            r.hi = it->second.second;
        } else {
            r.cls = RangeClass::Relative;
            const double d = 0.1 * std::abs(r.center);
            r.lo = r.center - d;
            r.hi = r.center + d;
        }
        spec.ranges[static_cast<std::size_t>(i)] = r;
    }
    for (int idx : excluded_indices) spec.excluded[static_cast<std::size_t>(idx)] = 1;
    return spec;
}

// --- distance ------------------------------------------------------------------

struct DistanceSpec {
    std::vector<int> nonlinear;  // circular variables (rotor angles, bus phases)
    std::vector<int> linear;     // everything else that is measured
};

inline DistanceSpec make_distance_spec(const Layout& layout, const std::vector<int>& excluded = {}) {
    DistanceSpec d;
    std::vector<char> skip(static_cast<std::size_t>(layout.dim()), 0);
    for (int idx : excluded) skip[static_cast<std::size_t>(idx)] = 1;
    for (int i = 0; i < layout.dim(); ++i) {
        if (skip[static_cast<std::size_t>(i)]) continue;
        if (layout.is_circular(i))
            d.nonlinear.push_back(i);
        else
            d.linear.push_back(i);
    }
    return d;
}

// Arc distance on the circle: min_k |a - b - 2 k pi|, always in [0, pi].
inline double circular_dist(double a, double b) {
    return std::abs(std::remainder(a - b, 2.0 * std::numbers::pi));
}

// Hybrid distance: l2 over the circular group plus l2 over the linear
// group; the discrete mode contributes zero.
inline double distance(const Vec& a, const Vec& b, const DistanceSpec& dspec) {
    double acc_n = 0.0;
    for (int i : dspec.nonlinear) {
        const double d = circular_dist(a[i], b[i]);
        acc_n += d * d;
    }
    double acc_l = 0.0;
    for (int i : dspec.linear) {
        const double d = a[i] - b[i];
        acc_l += d * d;
    }
    return std::sqrt(acc_n) + std::sqrt(acc_l);
}

inline double distance(const HybridState& a, const HybridState& b, const DistanceSpec& dspec) {
    return distance(a.x, b.x, dspec);
}

// --- tree ----------------------------------------------------------------------

struct TreeNode {
    int id = 0;
    HybridState state;
    int parent = -1;
    std::optional<std::pair<int, double>> edge_input;  // (target mode, u); none for root
    TrajectorySegment segment;                         // arriving motion; empty for root
};

struct ExpansionCandidate {
    bool feasible = false;
    HybridState state;  // last state of the segment
    int target_mode = 0;
    double input = 0.0;
    TrajectorySegment segment;
    std::string failure;  // why the candidate was discarded, empty if feasible
};

struct SearchTree {
    std::vector<TreeNode> nodes;
    std::unordered_map<int, std::vector<ExpansionCandidate>> cache;  // S_P(s_j) per expanded node
    std::unordered_set<int> expanded;                                // S_N
    std::uint64_t sims_total = 0;
    std::uint64_t nn_comparisons = 0;
    int rejected_iterations = 0;
};

struct PlannerConfig {
    int iterations = 100;     // K
    double dt = 1.0;          // segment duration (s)
    std::uint64_t seed = 0;
    bool stop_on_goal = true;
    SolverConfig solver;
    int threads = 1;
};

struct LoopMetrics {
    int iter = 0;
    double t_step2 = 0.0, t_step3 = 0.0, t_step4 = 0.0, t_step5 = 0.0;
    int nodes = 0;
    std::uint64_t sims_total = 0;
};

struct TimingBreakdown {
    std::vector<LoopMetrics> loops;
    double t_step2 = 0.0, t_step3 = 0.0, t_step4 = 0.0, t_step5 = 0.0;
    double total = 0.0;
};

struct GoalHit {
    int node = -1;
    int sample = -1;  // index into the node's segment; -1 = the node state itself (root)
};

struct PlanResult {
    SearchTree tree;
    std::optional<GoalHit> goal;
    TimingBreakdown timing;
};

inline Vec pack_dae_state(const DaeState& s) {
    Vec x(s.y.size() + s.z.size());
    x << s.y, s.z;
    return x;
}

// Nearest vertex by linear scan; ties break to the lowest node id.
inline const TreeNode& nearest(SearchTree& tree, const HybridState& s_rand, const DistanceSpec& dspec) {
    if (tree.nodes.empty()) throw Error("nearest: empty tree");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const double d = distance(tree.nodes[i].state, s_rand, dspec);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    tree.nn_comparisons += tree.nodes.size();
    return tree.nodes[best];
}

// Expands a node over all (mode, input) pairs: one optional discrete step,
// algebraic re-consistency, then dt of continuous evolution. Results are
// cached; a second call returns the stored set without touching the
// simulator. Per-candidate failures are recorded, never fatal.
inline const std::vector<ExpansionCandidate>& expand(SearchTree& tree, int node_id,
                                                     const HybridAutomaton& automaton, double dt,
                                                     const SolverConfig& solver,
                                                     const std::function<bool(const Vec&)>& feasible_fn,
                                                     int threads = 1) {
    if (auto it = tree.cache.find(node_id); it != tree.cache.end()) return it->second;

    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    const int n_modes = static_cast<int>(automaton.modes.size());
    const int n_inputs = static_cast<int>(automaton.inputs.size());
    std::vector<ExpansionCandidate> results(static_cast<std::size_t>(n_modes * n_inputs));
    std::atomic<std::uint64_t> sims{0};

    auto eval_candidate = [&](int idx) {
        const int qi = idx / n_inputs;
        const int ui = idx % n_inputs;
        ExpansionCandidate& cand = results[static_cast<std::size_t>(idx)];
        cand.target_mode = automaton.modes[static_cast<std::size_t>(qi)].id;
        cand.input = automaton.inputs[static_cast<std::size_t>(ui)];
        const SemiExplicitDae& dae = automaton.mode_dynamics(cand.target_mode);
        Vec x = node.state.x;
        try {
            if (cand.target_mode != node.state.mode) {
                const HybridState stepped =
                    discrete_step(automaton, node.state,
                                  automaton.modes[static_cast<std::size_t>(qi)]);
                x = make_consistent(dae, stepped.x, cand.input, solver);
            }
            DaeState start{x.head(dae.n_y), x.tail(dae.n_z), 0.0};
            sims.fetch_add(1, std::memory_order_relaxed);
            TrajectorySegment seg = simulate(dae, start, cand.input, dt, solver);
            for (const auto& st : seg.states)
                if (!feasible_fn(pack_dae_state(st))) {
                    cand.failure = "constraint violated along segment";
                    return;
                }
            cand.state = HybridState{cand.target_mode, pack_dae_state(seg.back())};
            cand.segment = std::move(seg);
            cand.feasible = true;
        } catch (const std::exception& e) {
            cand.failure = e.what();
        }
    };

    const int total = n_modes * n_inputs;
    if (threads <= 1 || total <= 1) {
        for (int idx = 0; idx < total; ++idx) eval_candidate(idx);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int workers = std::min(threads, total);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (int idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1))
                    eval_candidate(idx);
            });
        for (auto& th : pool) th.join();
    }

    tree.sims_total += sims.load();
    tree.expanded.insert(node_id);
    auto [it, inserted] = tree.cache.emplace(node_id, std::move(results));
    return it->second;
}

// Nearest feasible candidate to the random sample; ties break to the lowest
// (mode, input) enumeration index, the order expand() produced.
inline std::optional<std::size_t> select_new(const std::vector<ExpansionCandidate>& candidates,
                                             const HybridState& s_rand, const DistanceSpec& dspec) {
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i].feasible) continue;
        const double d = distance(candidates[i].state, s_rand, dspec);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// The K-iteration RRT loop with per-node caching. Deterministic given
// (automaton, s_init, sampler, config): the sampling streams are fixed by
// the seed and expansion results do not depend on the thread count.
// Rejected iterations (every candidate infeasible) consume an iteration.
inline PlanResult build_tree(const HybridAutomaton& automaton, const HybridState& s_init,
                             const SamplerSpec& sampler, const DistanceSpec& dspec,
                             const std::function<bool(const HybridState&)>& goal_fn,
                             const std::function<bool(const Vec&)>& feasible_fn,
                             const PlannerConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    PlanResult result;
    SearchTree& tree = result.tree;
    tree.nodes.push_back(TreeNode{0, s_init, -1, std::nullopt, {}});
    PlannerRng rng(cfg.seed);

    if (goal_fn(s_init)) {
        result.goal = GoalHit{0, -1};
        if (cfg.stop_on_goal) return result;
    }

    for (int k = 1; k <= cfg.iterations; ++k) {
        LoopMetrics lm;
        lm.iter = k;

        auto t0 = clock::now();
        const HybridState s_rand = sample_state(sampler, rng);
        auto t1 = clock::now();
        const int near_id = nearest(tree, s_rand, dspec).id;
        auto t2 = clock::now();
        const auto& candidates =
            expand(tree, near_id, automaton, cfg.dt, cfg.solver, feasible_fn, cfg.threads);
        const auto chosen = select_new(candidates, s_rand, dspec);
        auto t3 = clock::now();

        lm.t_step2 = seconds(t0, t1);
        lm.t_step3 = seconds(t1, t2);
        lm.t_step4 = seconds(t2, t3);

        bool stop = false;
        if (!chosen) {
            ++tree.rejected_iterations;
        } else {
            const ExpansionCandidate& cand = candidates[*chosen];
            const int new_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(TreeNode{new_id, cand.state, near_id,
                                          std::make_pair(cand.target_mode, cand.input),
                                          cand.segment});
            if (!result.goal) {
                const auto& seg = tree.nodes.back().segment;
                for (std::size_t s = 0; s < seg.states.size(); ++s) {
                    HybridState probe{cand.target_mode, pack_dae_state(seg.states[s])};
                    if (goal_fn(probe)) {
                        result.goal = GoalHit{new_id, static_cast<int>(s)};
                        break;
                    }
                }
            }
            if (result.goal && cfg.stop_on_goal) stop = true;
        }
        auto t4 = clock::now();
        lm.t_step5 = seconds(t3, t4);
        lm.nodes = static_cast<int>(tree.nodes.size());
        lm.sims_total = tree.sims_total;

        result.timing.loops.push_back(lm);
        result.timing.t_step2 += lm.t_step2;
        result.timing.t_step3 += lm.t_step3;
        result.timing.t_step4 += lm.t_step4;
        result.timing.t_step5 += lm.t_step5;
        if (stop) break;
    }
    result.timing.total =
        result.timing.t_step2 + result.timing.t_step3 + result.timing.t_step4 + result.timing.t_step5;
    return result;
}

// Rebuilds the accepted execution from the tree: walks parent links to the
// root, emitting a zero-length interval (carrying the target mode as its
// input) at every mode switch and a dt-length interval per continuous
// segment. The final segment is truncated at the goal sample.
inline Execution extract_execution(const HybridAutomaton& /*automaton*/, const SearchTree& tree,
                                   const GoalHit& hit) {
    std::vector<int> path;
    for (int id = hit.node; id != -1; id = tree.nodes[static_cast<std::size_t>(id)].parent)
        path.push_back(id);
    std::reverse(path.begin(), path.end());

    Execution chi;
    const TreeNode& root = tree.nodes[static_cast<std::size_t>(path.front())];
    double t = 0.0;
    int prev_mode = root.state.mode;
    Vec prev_x = root.state.x;

    auto push_interval = [&](double begin, double end, int mode, IntervalInput input,
                             std::vector<ExecutionSample> samples) {
        chi.tau.intervals.push_back(TimeInterval{begin, end});
        chi.modes.push_back(mode);
        chi.inputs.push_back(input);
        chi.samples.push_back(std::move(samples));
    };

    if (path.size() == 1) {
        push_interval(0.0, 0.0, root.state.mode, IntervalInput::none(),
                      {ExecutionSample{0.0, root.state.x}});
        return chi;
    }

    for (std::size_t pi = 1; pi < path.size(); ++pi) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(path[pi])];
        const int q = node.state.mode;
        const double u = node.edge_input ? node.edge_input->second : 0.0;
        const auto& seg = node.segment;
        const bool is_goal_node = node.id == hit.node;
        const int cut = (is_goal_node && hit.sample >= 0) ? hit.sample
                                                          : static_cast<int>(seg.states.size()) - 1;

        if (q != prev_mode)
            push_interval(t, t, prev_mode, IntervalInput::jump(q), {ExecutionSample{t, prev_x}});

        if (cut >= 1) {
            const double duration = seg.times[static_cast<std::size_t>(cut)] - seg.times.front();
            std::vector<ExecutionSample> samples;
            samples.reserve(static_cast<std::size_t>(cut) + 1);
            for (int s = 0; s <= cut; ++s)
                samples.push_back(ExecutionSample{
                    t + (seg.times[static_cast<std::size_t>(s)] - seg.times.front()),
                    pack_dae_state(seg.states[static_cast<std::size_t>(s)])});
            const double t_end = t + duration;
            push_interval(t, t_end, q, IntervalInput::hold(u), std::move(samples));
            t = t_end;
        } else {
            push_interval(t, t, q, IntervalInput::none(),
                          {ExecutionSample{t, pack_dae_state(seg.states.front())}});
        }
        prev_mode = q;
        prev_x = chi.samples.back().back().x;
    }
    return chi;
}

}  // namespace gridrrt

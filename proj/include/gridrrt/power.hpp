#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gridrrt/dae.hpp"
#include "gridrrt/errors.hpp"
#include "gridrrt/hybrid.hpp"
#include "gridrrt/layout.hpp"

namespace gridrrt {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;

enum class BusKind { Slack, PV, PQ };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double p_load = 0.0;  // p.u. on system base
    double q_load = 0.0;
    double p_gen = 0.0;       // PV scheduled injection
    double v_setpoint = 1.0;  // PV / slack voltage magnitude
    double v = 1.0;           // operating-point amplitude (power flow result)
    double theta = 0.0;       // operating-point phase (rad)
    std::optional<double> v_min;
    std::optional<double> v_max;
};

struct Line {
    std::string id;
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;    // total line-charging susceptance
    double tap = 1.0;  // off-nominal ratio on the from side
    bool closed = true;
};

// Classical second-order machine: constant EMF magnitude behind the
// transient reactance, swing dynamics in (delta, omega).
struct Generator {
    int id = 0;
    int bus = 0;
    double h = 1.0;     // inertia constant, seconds
    double d = 0.0;     // damping, p.u.
    double xd_p = 0.1;  // transient reactance, p.u.
    double e_p = 0.0;   // internal EMF magnitude (set by init_generators)
    double delta = 0.0;
    double omega = 1.0;
    double p_m = 0.0;  // mechanical power (set by init_generators)
};

struct ModeSpec {
    DiscreteMode mode;
    std::vector<std::string> open_lines;
};

struct ControlSpec {
    int target_gen = 0;           // generator id receiving the input
    std::vector<double> inputs;   // finite input set U, declared order
};

enum class LoadModel { ConstantPower, ConstantImpedance };

struct FaultSpec {
    int bus = 0;
    double shunt_b = -1e6;  // fault shunt admittance jB, B in p.u.
};

struct PowerSystemCase {
    std::string name;
    std::string provenance;  // data source note carried through load/save
    double base_mva = 100.0;
    double freq_hz = 60.0;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<ModeSpec> modes;
    std::vector<std::pair<int, int>> edges;
    ControlSpec control;
    LoadModel load_model = LoadModel::ConstantPower;
    // When true the slack bus keeps its power-flow voltage during
    // transients (an infinite bus); when false every bus carries algebraic
    // equations and the system frequency is free.
    bool infinite_bus = true;
    std::optional<FaultSpec> fault;

    double omega_s() const { return 2.0 * std::numbers::pi * freq_hz; }

    int bus_index(int bus_id) const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].id == bus_id) return static_cast<int>(i);
        throw ValidationError("case: unknown bus id " + std::to_string(bus_id));
    }

    int slack_index() const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
        throw ValidationError("case: no slack bus");
    }

    int generator_index(int gen_id) const {
        for (std::size_t i = 0; i < generators.size(); ++i)
            if (generators[i].id == gen_id) return static_cast<int>(i);
        throw ValidationError("case: unknown generator id " + std::to_string(gen_id));
    }

    const ModeSpec& mode_spec(int mode_id) const {
        for (const auto& m : modes)
            if (m.mode.id == mode_id) return m;
        throw ValidationError("case: unknown mode " + std::to_string(mode_id));
    }

    bool line_open_in_mode(const Line& line, const ModeSpec& m) const {
        for (const auto& id : m.open_lines)
            if (id == line.id) return true;
        return !line.closed;
    }
};

struct TargetSetSpec {
    double omega_tol = 0.01;
    double phase_spread_max = std::numbers::pi / 6.0;
    double v_tol = 0.2;
    int goal_mode = 0;
};

struct PowerFlowConfig {
    double tol = 1e-8;  // ||mismatch||_inf target, p.u.
    int max_iter = 20;
};

struct PowerFlowResult {
    Vec v;      // per bus, case order
    Vec theta;  // rad
    int iterations = 0;
    double mismatch_inf = 0.0;
};

// --- admittance -----------------------------------------------------------

// Standard Y-bus assembly from the lines closed in `mode_id`, tap on the
// from side, plus the fault shunt when one is applied. Throws
// IslandedNetwork when any generator bus is cut off from the slack.
inline MatC build_admittance(const PowerSystemCase& sys, int mode_id) {
    const int nb = static_cast<int>(sys.buses.size());
    const ModeSpec& mode = sys.mode_spec(mode_id);
    MatC Y = MatC::Zero(nb, nb);

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nb));
    for (const auto& line : sys.lines) {
        if (sys.line_open_in_mode(line, mode)) continue;
        const int i = sys.bus_index(line.from);
        const int j = sys.bus_index(line.to);
        const Complex ys = 1.0 / Complex(line.r, line.x);
        const Complex ysh(0.0, line.b / 2.0);
        const double a = line.tap != 0.0 ? line.tap : 1.0;
        Y(i, i) += (ys + ysh) / (a * a);
        Y(j, j) += ys + ysh;
        Y(i, j) -= ys / a;
        Y(j, i) -= ys / a;
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }
    if (sys.fault) {
        const int f = sys.bus_index(sys.fault->bus);
        Y(f, f) += Complex(0.0, sys.fault->shunt_b);
    }

    // Every generator bus must stay connected to the slack.
    std::vector<char> seen(static_cast<std::size_t>(nb), 0);
    std::vector<int> stack{sys.slack_index()};
    seen[static_cast<std::size_t>(sys.slack_index())] = 1;
    while (!stack.empty()) {
        const int b = stack.back();
        stack.pop_back();
        for (int nb2 : adj[static_cast<std::size_t>(b)])
            if (!seen[static_cast<std::size_t>(nb2)]) {
                seen[static_cast<std::size_t>(nb2)] = 1;
                stack.push_back(nb2);
            }
    }
    for (const auto& gen : sys.generators)
        if (!seen[static_cast<std::size_t>(sys.bus_index(gen.bus))])
            throw IslandedNetwork("mode " + std::to_string(mode_id) + ": generator bus " +
                                  std::to_string(gen.bus) + " islanded from slack");
    return Y;
}

// --- power flow ------------------------------------------------------------

namespace detail {

inline void bus_power(const MatC& Y, const Vec& v, const Vec& th, int j, double& p, double& q) {
    const int nb = static_cast<int>(v.size());
    p = 0.0;
    q = 0.0;
    for (int k = 0; k < nb; ++k) {
        const double g = Y(j, k).real(), b = Y(j, k).imag();
        if (g == 0.0 && b == 0.0) continue;
        const double djk = th[j] - th[k];
        const double c = std::cos(djk), s = std::sin(djk);
        p += v[j] * v[k] * (g * c + b * s);
        q += v[j] * v[k] * (g * s - b * c);
    }
}

}  // namespace detail

// Newton-Raphson power flow on the polar mismatch equations. Flat start
// (v = setpoints, theta = 0) unless a warm start is supplied. Converged
// when ||mismatch||_inf <= cfg.tol, checked before each iteration so an
// already-solved case reports zero iterations.
inline PowerFlowResult power_flow(const PowerSystemCase& sys, int mode_id,
                                  const PowerFlowConfig& cfg = {},
                                  const PowerFlowResult* warm = nullptr) {
    const int nb = static_cast<int>(sys.buses.size());
    const MatC Y = build_admittance(sys, mode_id);

    Vec v(nb), th(nb);
    for (int j = 0; j < nb; ++j) {
        const Bus& bus = sys.buses[static_cast<std::size_t>(j)];
        v[j] = (bus.kind == BusKind::PQ) ? 1.0 : bus.v_setpoint;
        th[j] = 0.0;
    }
    if (warm) {
        v = warm->v;
        th = warm->theta;
    }

    std::vector<int> th_vars, v_vars;
    for (int j = 0; j < nb; ++j) {
        const Bus& bus = sys.buses[static_cast<std::size_t>(j)];
        if (bus.kind != BusKind::Slack) th_vars.push_back(j);
        if (bus.kind == BusKind::PQ) v_vars.push_back(j);
    }
    const int n1 = static_cast<int>(th_vars.size());
    const int n2 = static_cast<int>(v_vars.size());
    const int n = n1 + n2;

    auto mismatch = [&](Vec& m) {
        m.resize(n);
        for (int a = 0; a < n1; ++a) {
            const int j = th_vars[static_cast<std::size_t>(a)];
            const Bus& bus = sys.buses[static_cast<std::size_t>(j)];
            double p, q;
            detail::bus_power(Y, v, th, j, p, q);
            const double p_spec = (bus.kind == BusKind::PV ? bus.p_gen : 0.0) - bus.p_load;
            m[a] = p_spec - p;
        }
        for (int a = 0; a < n2; ++a) {
            const int j = v_vars[static_cast<std::size_t>(a)];
            const Bus& bus = sys.buses[static_cast<std::size_t>(j)];
            double p, q;
            detail::bus_power(Y, v, th, j, p, q);
            m[n1 + a] = -bus.q_load - q;
        }
    };

    Vec m;
    mismatch(m);
    double mnorm = n > 0 ? m.lpNorm<Eigen::Infinity>() : 0.0;
    int it = 0;
    while (mnorm > cfg.tol) {
        if (it >= cfg.max_iter || !std::isfinite(mnorm))
            throw PowerFlowDivergence("power flow: ||mismatch||_inf=" + std::to_string(mnorm) +
                                      " after " + std::to_string(it) + " iterations");
        // J = d[P_calc; Q_calc]/d[theta(th_vars); v(v_vars)]
        Mat J = Mat::Zero(n, n);
        for (int a = 0; a < n1 + n2; ++a) {
            const bool prow = a < n1;
            const int j = prow ? th_vars[static_cast<std::size_t>(a)]
                               : v_vars[static_cast<std::size_t>(a - n1)];
            for (int c = 0; c < n; ++c) {
                const bool thcol = c < n1;
                const int k = thcol ? th_vars[static_cast<std::size_t>(c)]
                                    : v_vars[static_cast<std::size_t>(c - n1)];
                double val = 0.0;
                const double gjk = Y(j, k).real(), bjk = Y(j, k).imag();
                if (thcol) {
                    if (k == j) {
                        for (int l = 0; l < nb; ++l) {
                            if (l == j) continue;
                            const double g = Y(j, l).real(), b = Y(j, l).imag();
                            if (g == 0.0 && b == 0.0) continue;
                            const double d = th[j] - th[l];
                            val += prow ? v[j] * v[l] * (-g * std::sin(d) + b * std::cos(d))
                                        : v[j] * v[l] * (g * std::cos(d) + b * std::sin(d));
                        }
                    } else {
                        const double d = th[j] - th[k];
                        val = prow ? v[j] * v[k] * (gjk * std::sin(d) - bjk * std::cos(d))
                                   : -v[j] * v[k] * (gjk * std::cos(d) + bjk * std::sin(d));
                    }
                } else {
                    if (k == j) {
                        double acc = prow ? v[j] * gjk : -v[j] * bjk;
                        for (int l = 0; l < nb; ++l) {
                            const double g = Y(j, l).real(), b = Y(j, l).imag();
                            if (g == 0.0 && b == 0.0) continue;
                            const double d = th[j] - th[l];
                            acc += prow ? v[l] * (g * std::cos(d) + b * std::sin(d))
                                        : v[l] * (g * std::sin(d) - b * std::cos(d));
                        }
                        val = acc;
                    } else {
                        const double d = th[j] - th[k];
                        val = prow ? v[j] * (gjk * std::cos(d) + bjk * std::sin(d))
                                   : v[j] * (gjk * std::sin(d) - bjk * std::cos(d));
                    }
                }
                J(a, c) = val;
            }
        }
        Eigen::PartialPivLU<Mat> lu(J);
        gridrrt::detail::check_pivots(lu, std::numeric_limits<double>::quiet_NaN());
        Vec dx = lu.solve(m);
        for (int a = 0; a < n1; ++a) th[th_vars[static_cast<std::size_t>(a)]] += dx[a];
        for (int a = 0; a < n2; ++a) v[v_vars[static_cast<std::size_t>(a)]] += dx[n1 + a];
        mismatch(m);
        mnorm = n > 0 ? m.lpNorm<Eigen::Infinity>() : 0.0;
        ++it;
    }
    return PowerFlowResult{std::move(v), std::move(th), it, mnorm};
}

// Writes a power-flow solution into a copy of the case.
inline PowerSystemCase apply_powerflow(PowerSystemCase sys, const PowerFlowResult& pf) {
    for (std::size_t j = 0; j < sys.buses.size(); ++j) {
        sys.buses[j].v = pf.v[static_cast<Eigen::Index>(j)];
        sys.buses[j].theta = pf.theta[static_cast<Eigen::Index>(j)];
    }
    return sys;
}

// Classical-model back-solve: E' and delta from the terminal phasor and the
// generator current, omega = 1, and P_m equal to the electrical power so
// the swing equation is at rest. Returns an updated copy of the case
// (buses carry the power-flow voltages, generators their internal states).
inline PowerSystemCase init_generators(PowerSystemCase sys, const PowerFlowResult& pf, int mode_id) {
    sys = apply_powerflow(std::move(sys), pf);
    const MatC Y = build_admittance(sys, mode_id);
    const int nb = static_cast<int>(sys.buses.size());

    Eigen::VectorXcd V(nb);
    for (int j = 0; j < nb; ++j) V[j] = std::polar(pf.v[j], pf.theta[j]);

    std::vector<int> gens_at(static_cast<std::size_t>(nb), 0);
    for (const auto& gen : sys.generators) gens_at[static_cast<std::size_t>(sys.bus_index(gen.bus))]++;
    for (int count : gens_at)
        if (count > 1) throw ValidationError("init_generators: multiple generators on one bus");

    for (auto& gen : sys.generators) {
        const int j = sys.bus_index(gen.bus);
        Complex i_net = 0.0;
        for (int k = 0; k < nb; ++k) i_net += Y(j, k) * V[k];
        const Complex s_net = V[j] * std::conj(i_net);
        const Bus& bus = sys.buses[static_cast<std::size_t>(j)];
        const Complex s_gen = s_net + Complex(bus.p_load, bus.q_load);
        const Complex i_gen = std::conj(s_gen / V[j]);
        const Complex emf = V[j] + Complex(0.0, gen.xd_p) * i_gen;
        gen.e_p = std::abs(emf);
        gen.delta = std::arg(emf);
        gen.omega = 1.0;
        gen.p_m = s_gen.real();
    }
    return sys;
}

// --- hybrid state layout ----------------------------------------------------

// Bus indices that carry algebraic variables: every bus, or every bus but
// the slack when the case anchors an infinite bus.
inline std::vector<int> algebraic_buses(const PowerSystemCase& sys) {
    std::vector<int> out;
    const int slack = sys.slack_index();
    for (int j = 0; j < static_cast<int>(sys.buses.size()); ++j)
        if (!(sys.infinite_bus && j == slack)) out.push_back(j);
    return out;
}

// State layout: x = [delta | omega | theta | v] with delta/theta circular.
inline Layout power_layout(const PowerSystemCase& sys) {
    const int g = static_cast<int>(sys.generators.size());
    const int a = static_cast<int>(algebraic_buses(sys).size());
    return Layout({Slice{"delta", 0, g, true}, Slice{"omega", g, g, false},
                   Slice{"theta", 2 * g, a, true}, Slice{"v", 2 * g + a, a, false}});
}

// Packs the case's operating point into a continuous state vector.
inline Vec pack_state(const PowerSystemCase& sys) {
    const int g = static_cast<int>(sys.generators.size());
    const auto alg = algebraic_buses(sys);
    const int a = static_cast<int>(alg.size());
    Vec x(2 * g + 2 * a);
    for (int i = 0; i < g; ++i) {
        x[i] = sys.generators[static_cast<std::size_t>(i)].delta;
        x[g + i] = sys.generators[static_cast<std::size_t>(i)].omega;
    }
    for (int p = 0; p < a; ++p) {
        const Bus& bus = sys.buses[static_cast<std::size_t>(alg[static_cast<std::size_t>(p)])];
        x[2 * g + p] = bus.theta;
        x[2 * g + a + p] = bus.v;
    }
    return x;
}

// --- per-mode DAE ------------------------------------------------------------

// Builds the semi-explicit DAE of one operation mode:
//   y = (delta_i, omega_i), z = (theta_j, v_j) over the algebraic buses,
//   phi: swing equations with the control input added to the mechanical
//        power of the control target,
//   psi: active/reactive power balance at every algebraic bus, with the
//        machines injecting through xd' and loads per the case load model.
// Call after init_generators so E', P_m and the load reference voltages
// are in place. Analytic Jacobian blocks are supplied.
inline SemiExplicitDae make_dae(const PowerSystemCase& sys, int mode_id) {
    struct Ctx {
        int g = 0, a = 0, nb = 0;
        Mat G, B;                    // real/imag parts of Y
        std::vector<int> alg;        // algebraic position -> bus index
        std::vector<int> pos;        // bus index -> algebraic position or -1
        Vec fixed_v, fixed_th;       // values used for non-algebraic buses
        std::vector<int> gen_bus;    // generator -> bus index
        Vec coef, xdp, h2, damp, pm; // coef = E'/xd'
        int ctrl = -1;               // generator receiving the input
        double ws = 0.0;
        LoadModel load_model = LoadModel::ConstantPower;
        Vec pl, ql, v0;              // per bus

        double vth(const Vec& z, int bus, bool want_v) const {
            const int p = pos[static_cast<std::size_t>(bus)];
            if (p < 0) return want_v ? fixed_v[bus] : fixed_th[bus];
            return want_v ? z[a + p] : z[p];
        }
    };

    auto ctx = std::make_shared<Ctx>();
    ctx->g = static_cast<int>(sys.generators.size());
    ctx->nb = static_cast<int>(sys.buses.size());
    const MatC Y = build_admittance(sys, mode_id);
    ctx->G = Y.real();
    ctx->B = Y.imag();
    ctx->alg = algebraic_buses(sys);
    ctx->a = static_cast<int>(ctx->alg.size());
    ctx->pos.assign(static_cast<std::size_t>(ctx->nb), -1);
    for (int p = 0; p < ctx->a; ++p) ctx->pos[static_cast<std::size_t>(ctx->alg[static_cast<std::size_t>(p)])] = p;
    ctx->fixed_v.resize(ctx->nb);
    ctx->fixed_th.resize(ctx->nb);
    for (int j = 0; j < ctx->nb; ++j) {
        ctx->fixed_v[j] = sys.buses[static_cast<std::size_t>(j)].v;
        ctx->fixed_th[j] = sys.buses[static_cast<std::size_t>(j)].theta;
    }
    ctx->gen_bus.resize(static_cast<std::size_t>(ctx->g));
    ctx->coef.resize(ctx->g);
    ctx->xdp.resize(ctx->g);
    ctx->h2.resize(ctx->g);
    ctx->damp.resize(ctx->g);
    ctx->pm.resize(ctx->g);
    for (int i = 0; i < ctx->g; ++i) {
        const Generator& gen = sys.generators[static_cast<std::size_t>(i)];
        ctx->gen_bus[static_cast<std::size_t>(i)] = sys.bus_index(gen.bus);
        ctx->coef[i] = gen.e_p / gen.xd_p;
        ctx->xdp[i] = gen.xd_p;
        ctx->h2[i] = 2.0 * gen.h;
        ctx->damp[i] = gen.d;
        ctx->pm[i] = gen.p_m;
        if (gen.id == sys.control.target_gen) ctx->ctrl = i;
    }
    ctx->ws = sys.omega_s();
    ctx->load_model = sys.load_model;
    ctx->pl.resize(ctx->nb);
    ctx->ql.resize(ctx->nb);
    ctx->v0.resize(ctx->nb);
    for (int j = 0; j < ctx->nb; ++j) {
        ctx->pl[j] = sys.buses[static_cast<std::size_t>(j)].p_load;
        ctx->ql[j] = sys.buses[static_cast<std::size_t>(j)].q_load;
        ctx->v0[j] = sys.buses[static_cast<std::size_t>(j)].v != 0.0 ? sys.buses[static_cast<std::size_t>(j)].v : 1.0;
    }

    SemiExplicitDae dae;
    dae.n_y = 2 * ctx->g;
    dae.n_z = 2 * ctx->a;

    dae.phi = [ctx](const Vec& y, const Vec& z, double u, Vec& out) {
        const int g = ctx->g;
        for (int i = 0; i < g; ++i) {
            const int b = ctx->gen_bus[static_cast<std::size_t>(i)];
            const double vb = ctx->vth(z, b, true);
            const double thb = ctx->vth(z, b, false);
            const double pe = ctx->coef[i] * vb * std::sin(y[i] - thb);
            out[i] = ctx->ws * (y[g + i] - 1.0);
            double pm = ctx->pm[i];
            if (i == ctx->ctrl) pm += u;
            out[g + i] = (pm - pe - ctx->damp[i] * (y[g + i] - 1.0)) / ctx->h2[i];
        }
    };

    dae.psi = [ctx](const Vec& y, const Vec& z, double /*u*/, Vec& out) {
        const int a = ctx->a, nb = ctx->nb, g = ctx->g;
        out.setZero();
        for (int p = 0; p < a; ++p) {
            const int j = ctx->alg[static_cast<std::size_t>(p)];
            const double vj = z[a + p];
            const double thj = z[p];
            double pn = 0.0, qn = 0.0;
            for (int k = 0; k < nb; ++k) {
                const double gjk = ctx->G(j, k), bjk = ctx->B(j, k);
                if (gjk == 0.0 && bjk == 0.0) continue;
                const double vk = ctx->vth(z, k, true);
                const double thk = ctx->vth(z, k, false);
                const double djk = thj - thk;
                const double c = std::cos(djk), s = std::sin(djk);
                pn += vj * vk * (gjk * c + bjk * s);
                qn += vj * vk * (gjk * s - bjk * c);
            }
            double pload = ctx->pl[j], qload = ctx->ql[j];
            if (ctx->load_model == LoadModel::ConstantImpedance) {
                const double ratio = (vj / ctx->v0[j]) * (vj / ctx->v0[j]);
                pload *= ratio;
                qload *= ratio;
            }
            out[p] = -pload - pn;
            out[a + p] = -qload - qn;
        }
        for (int i = 0; i < g; ++i) {
            const int j = ctx->gen_bus[static_cast<std::size_t>(i)];
            const int p = ctx->pos[static_cast<std::size_t>(j)];
            if (p < 0) continue;  // machine on the fixed bus does not enter psi
            const double vj = z[a + p];
            const double dth = y[i] - z[p];
            out[p] += ctx->coef[i] * vj * std::sin(dth);
            out[a + p] += ctx->coef[i] * vj * std::cos(dth) - vj * vj / ctx->xdp[i];
        }
    };

    dae.jac_phi = [ctx](const Vec& y, const Vec& z, double /*u*/, Mat& dy, Mat& dz) {
        const int g = ctx->g, a = ctx->a;
        dy.setZero();
        dz.setZero();
        for (int i = 0; i < g; ++i) {
            dy(i, g + i) = ctx->ws;
            const int b = ctx->gen_bus[static_cast<std::size_t>(i)];
            const double vb = ctx->vth(z, b, true);
            const double thb = ctx->vth(z, b, false);
            const double cosd = std::cos(y[i] - thb);
            const double sind = std::sin(y[i] - thb);
            dy(g + i, i) = -ctx->coef[i] * vb * cosd / ctx->h2[i];
            dy(g + i, g + i) = -ctx->damp[i] / ctx->h2[i];
            const int p = ctx->pos[static_cast<std::size_t>(b)];
            if (p >= 0) {
                dz(g + i, p) = ctx->coef[i] * vb * cosd / ctx->h2[i];
                dz(g + i, a + p) = -ctx->coef[i] * sind / ctx->h2[i];
            }
        }
    };

    dae.jac_psi = [ctx](const Vec& y, const Vec& z, double /*u*/, Mat& dy, Mat& dz) {
        const int g = ctx->g, a = ctx->a, nb = ctx->nb;
        dy.setZero();
        dz.setZero();
        for (int p = 0; p < a; ++p) {
            const int j = ctx->alg[static_cast<std::size_t>(p)];
            const double vj = z[a + p];
            const double thj = z[p];
            double dp_dthj = 0.0, dq_dthj = 0.0;
            double dp_dvj = 0.0, dq_dvj = 0.0;
            for (int k = 0; k < nb; ++k) {
                const double gjk = ctx->G(j, k), bjk = ctx->B(j, k);
                if (gjk == 0.0 && bjk == 0.0) continue;
                const double vk = ctx->vth(z, k, true);
                const double thk = ctx->vth(z, k, false);
                const double djk = thj - thk;
                const double c = std::cos(djk), s = std::sin(djk);
                if (k != j) {
                    dp_dthj += vj * vk * (-gjk * s + bjk * c);
                    dq_dthj += vj * vk * (gjk * c + bjk * s);
                    const int pk = ctx->pos[static_cast<std::size_t>(k)];
                    if (pk >= 0) {
                        dz(p, pk) += -(vj * vk * (gjk * s - bjk * c));
                        dz(a + p, pk) += vj * vk * (gjk * c + bjk * s);
                        dz(p, a + pk) += -(vj * (gjk * c + bjk * s));
                        dz(a + p, a + pk) += -(vj * (gjk * s - bjk * c));
                    }
                    dp_dvj += vk * (gjk * c + bjk * s);
                    dq_dvj += vk * (gjk * s - bjk * c);
                } else {
                    dp_dvj += vk * (gjk * c + bjk * s) + vj * gjk;
                    dq_dvj += vk * (gjk * s - bjk * c) - vj * bjk;
                }
            }
            dz(p, p) += -dp_dthj;
            dz(a + p, p) += -dq_dthj;
            dz(p, a + p) += -dp_dvj;
            dz(a + p, a + p) += -dq_dvj;
            if (ctx->load_model == LoadModel::ConstantImpedance) {
                dz(p, a + p) += -2.0 * ctx->pl[j] * vj / (ctx->v0[j] * ctx->v0[j]);
                dz(a + p, a + p) += -2.0 * ctx->ql[j] * vj / (ctx->v0[j] * ctx->v0[j]);
            }
        }
        for (int i = 0; i < g; ++i) {
            const int j = ctx->gen_bus[static_cast<std::size_t>(i)];
            const int p = ctx->pos[static_cast<std::size_t>(j)];
            if (p < 0) continue;
            const double vj = z[a + p];
            const double dth = y[i] - z[p];
            const double c = std::cos(dth), s = std::sin(dth);
            dy(p, i) += ctx->coef[i] * vj * c;
            dy(a + p, i) += -ctx->coef[i] * vj * s;
            dz(p, p) += -ctx->coef[i] * vj * c;
            dz(a + p, p) += ctx->coef[i] * vj * s;
            dz(p, a + p) += ctx->coef[i] * s;
            dz(a + p, a + p) += ctx->coef[i] * c - 2.0 * vj / ctx->xdp[i];
        }
    };

    return dae;
}

// --- faults ------------------------------------------------------------------

inline PowerSystemCase apply_fault(PowerSystemCase sys, int bus_id) {
    sys.bus_index(bus_id);  // existence check
    sys.fault = FaultSpec{bus_id, -1e6};
    return sys;
}

inline PowerSystemCase clear_fault(PowerSystemCase sys) {
    sys.fault.reset();
    return sys;
}

// --- target set and reference frames ----------------------------------------

// Inertia-weighted mean rotor angle.
inline double coi_angle(const Vec& deltas, const Vec& inertias) {
    if (deltas.size() != inertias.size() || deltas.size() == 0)
        throw DimensionMismatch("coi_angle: size mismatch");
    const double h_total = inertias.sum();
    return inertias.dot(deltas) / h_total;
}

inline double avg_bus_phase(const Vec& thetas) {
    if (thetas.size() == 0) throw DimensionMismatch("avg_bus_phase: empty");
    return thetas.mean();
}

inline double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(a, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;  // land in (-pi, pi]
    return r;
}

// Membership in S_goal: right mode, synchronized rotor speeds, bounded
// bus-phase spread, bounded voltage amplitudes. The spread is max-min of
// the phases unwrapped around their spatial average, so it only sees
// phase differences.
inline bool in_target_set(const HybridState& s, const TargetSetSpec& spec, const Layout& layout) {
    if (s.mode != spec.goal_mode) return false;
    const Slice& om = layout.slice("omega");
    for (int i = om.offset; i < om.end(); ++i)
        if (std::abs(s.x[i] - 1.0) > spec.omega_tol) return false;
    const Slice& vs = layout.slice("v");
    for (int i = vs.offset; i < vs.end(); ++i)
        if (std::abs(s.x[i] - 1.0) > spec.v_tol) return false;
    const Slice& th = layout.slice("theta");
    if (th.size > 0) {
        double mean = 0.0;
        for (int i = th.offset; i < th.end(); ++i) mean += s.x[i];
        mean /= th.size;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int i = th.offset; i < th.end(); ++i) {
            const double d = wrap_angle(s.x[i] - mean);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        if (hi - lo > spec.phase_spread_max) return false;
    }
    return true;
}

// Per-sample feasibility used as the planner's collision check: voltages
// above 0.5 p.u. and rotor speeds within 0.1 p.u. of synchronous.
inline std::function<bool(const Vec&)> make_feasibility_check(const Layout& layout) {
    const Slice om = layout.slice("omega");
    const Slice vs = layout.slice("v");
    return [om, vs](const Vec& x) {
        for (int i = om.offset; i < om.end(); ++i)
            if (std::abs(x[i] - 1.0) >= 0.1) return false;
        for (int i = vs.offset; i < vs.end(); ++i)
            if (x[i] <= 0.5) return false;
        return true;
    };
}

// --- automaton ----------------------------------------------------------------

// Wires the case into a hybrid automaton: one DAE per mode, always-true
// guards and identity resets on the declared edges. Call on an initialized
// case (power flow + init_generators).
inline HybridAutomaton build_automaton(const PowerSystemCase& sys) {
    HybridAutomaton automaton;
    for (const auto& m : sys.modes) automaton.modes.push_back(m.mode);
    automaton.layout = power_layout(sys);
    automaton.dim = automaton.layout.dim();
    automaton.inputs = sys.control.inputs;
    automaton.edges = sys.edges;
    for (const auto& e : sys.edges) {
        automaton.guards[e] = [](const Vec&) { return true; };
        automaton.resets[e] = [](const Vec& x) { return x; };
    }
    automaton.dynamics.resize(sys.modes.size());
    for (const auto& m : sys.modes)
        automaton.dynamics[static_cast<std::size_t>(m.mode.id)] = make_dae(sys, m.mode.id);
    return automaton;
}

}  // namespace gridrrt

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gridrrt/errors.hpp"

namespace gridrrt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Semi-explicit DAE
//
//   dy/dt = phi(y, z, u),   0 = psi(y, z, u)
//
// with n_y differential and n_z algebraic variables and a scalar input u.
// Analytic Jacobian blocks are optional; when absent the solvers fall back
// to central finite differences.
struct SemiExplicitDae {
    int n_y = 0;
    int n_z = 0;

    std::function<void(const Vec& y, const Vec& z, double u, Vec& out)> phi;
    std::function<void(const Vec& y, const Vec& z, double u, Vec& out)> psi;

    // d(phi)/dy, d(phi)/dz and d(psi)/dy, d(psi)/dz, each filled in place.
    std::function<void(const Vec& y, const Vec& z, double u, Mat& dy, Mat& dz)> jac_phi;
    std::function<void(const Vec& y, const Vec& z, double u, Mat& dy, Mat& dz)> jac_psi;

    bool has_jacobians() const { return static_cast<bool>(jac_phi) && static_cast<bool>(jac_psi); }

    Vec eval_phi(const Vec& y, const Vec& z, double u) const {
        if (y.size() != n_y || z.size() != n_z) throw DimensionMismatch("phi: state dimension mismatch");
        Vec out(n_y);
        if (n_y > 0) phi(y, z, u, out);
        return out;
    }

    Vec eval_psi(const Vec& y, const Vec& z, double u) const {
        if (y.size() != n_y || z.size() != n_z) throw DimensionMismatch("psi: state dimension mismatch");
        Vec out(n_z);
        if (n_z > 0) psi(y, z, u, out);
        return out;
    }
};

struct DaeState {
    Vec y;
    Vec z;
    double t = 0.0;
};

struct SolverConfig {
    double h = 0.01;             // internal integration step (s)
    double newton_tol = 1e-9;    // residual infinity-norm target
    int newton_max_iter = 50;
    double algebraic_tol = 1e-8; // consistency tolerance on ||psi||_inf
    bool check_index1 = false;   // verify det(dpsi/dz) != 0 at every accepted grid point
};

// Uniform-grid solution of one continuous evolution with constant input.
// The last step may be shorter than h when the duration is not a multiple.
struct TrajectorySegment {
    std::vector<double> times;
    std::vector<DaeState> states;
    double input = 0.0;

    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
    const DaeState& front() const { return states.front(); }
    const DaeState& back() const { return states.back(); }
    std::size_t size() const { return states.size(); }
};

struct Index1Report {
    bool nonsingular = false;
    double condition_estimate = 0.0;
};

struct JacobianBlocks {
    Mat dphi_dy, dphi_dz, dpsi_dy, dpsi_dz;
};

// r_diff = ydot - phi(y,z,u), r_alg = psi(y,z,u).
inline std::pair<Vec, Vec> residual(const SemiExplicitDae& dae, const Vec& y, const Vec& ydot,
                                    const Vec& z, double u) {
    if (ydot.size() != dae.n_y) throw DimensionMismatch("residual: ydot dimension mismatch");
    Vec r_diff = ydot - dae.eval_phi(y, z, u);
    Vec r_alg = dae.eval_psi(y, z, u);
    return {std::move(r_diff), std::move(r_alg)};
}

// Central-difference Jacobian blocks; the test-side oracle for analytic Jacobians.
inline JacobianBlocks finite_diff_jacobian(const SemiExplicitDae& dae, const Vec& y, const Vec& z,
                                           double u, double eps = 1e-6) {
    JacobianBlocks J;
    J.dphi_dy = Mat::Zero(dae.n_y, dae.n_y);
    J.dphi_dz = Mat::Zero(dae.n_y, dae.n_z);
    J.dpsi_dy = Mat::Zero(dae.n_z, dae.n_y);
    J.dpsi_dz = Mat::Zero(dae.n_z, dae.n_z);
    Vec yp = y, zp = z;
    for (int k = 0; k < dae.n_y; ++k) {
        const double step = eps * std::max(1.0, std::abs(y[k]));
        yp[k] = y[k] + step;
        Vec f_hi = dae.eval_phi(yp, z, u), g_hi = dae.eval_psi(yp, z, u);
        yp[k] = y[k] - step;
        Vec f_lo = dae.eval_phi(yp, z, u), g_lo = dae.eval_psi(yp, z, u);
        yp[k] = y[k];
        J.dphi_dy.col(k) = (f_hi - f_lo) / (2.0 * step);
        J.dpsi_dy.col(k) = (g_hi - g_lo) / (2.0 * step);
    }
    for (int k = 0; k < dae.n_z; ++k) {
        const double step = eps * std::max(1.0, std::abs(z[k]));
        zp[k] = z[k] + step;
        Vec f_hi = dae.eval_phi(y, zp, u), g_hi = dae.eval_psi(y, zp, u);
        zp[k] = z[k] - step;
        Vec f_lo = dae.eval_phi(y, zp, u), g_lo = dae.eval_psi(y, zp, u);
        zp[k] = z[k];
        J.dphi_dz.col(k) = (f_hi - f_lo) / (2.0 * step);
        J.dpsi_dz.col(k) = (g_hi - g_lo) / (2.0 * step);
    }
    return J;
}

inline JacobianBlocks eval_jacobians(const SemiExplicitDae& dae, const Vec& y, const Vec& z, double u) {
    if (!dae.has_jacobians()) return finite_diff_jacobian(dae, y, z, u, 1e-7);
    JacobianBlocks J;
    J.dphi_dy.resize(dae.n_y, dae.n_y);
    J.dphi_dz.resize(dae.n_y, dae.n_z);
    J.dpsi_dy.resize(dae.n_z, dae.n_y);
    J.dpsi_dz.resize(dae.n_z, dae.n_z);
    dae.jac_phi(y, z, u, J.dphi_dy, J.dphi_dz);
    dae.jac_psi(y, z, u, J.dpsi_dy, J.dpsi_dz);
    return J;
}

// Index-1 test: LU of dpsi/dz with pivots above 1e-12 * ||dpsi/dz||_inf.
// Singular is a valid answer, not an error.
inline Index1Report index1_check(const SemiExplicitDae& dae, const Vec& y, const Vec& z, double u) {
    if (dae.n_z == 0) return {true, 1.0};
    JacobianBlocks J = eval_jacobians(dae, y, z, u);
    const double norm = J.dpsi_dz.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::PartialPivLU<Mat> lu(J.dpsi_dz);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    Index1Report rep;
    rep.nonsingular = min_pivot > 1e-12 * norm && std::isfinite(norm) && norm > 0.0;
    const double rc = lu.rcond();
    rep.condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    return rep;
}

namespace detail {

inline void check_pivots(const Eigen::PartialPivLU<Mat>& lu, double t) {
    const Mat& f = lu.matrixLU();
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    if (f.diagonal().cwiseAbs().minCoeff() <= 1e-13 * scale)
        throw SingularJacobian("singular Jacobian in Newton solve", t);
}

}  // namespace detail

// Damped Newton on the algebraic equations with y held fixed.
// Steps are halved up to 10 times whenever the residual norm fails to decrease.
inline Vec solve_algebraic(const SemiExplicitDae& dae, const Vec& y, const Vec& z_guess, double u,
                           const SolverConfig& cfg) {
    if (dae.n_z == 0) return z_guess;
    Vec z = z_guess;
    Vec r = dae.eval_psi(y, z, u);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    double merit = r.squaredNorm();  // line-search merit: 1/2 ||psi||_2^2 descent
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (rnorm <= cfg.algebraic_tol) return z;
        JacobianBlocks J = eval_jacobians(dae, y, z, u);
        Eigen::PartialPivLU<Mat> lu(J.dpsi_dz);
        detail::check_pivots(lu, std::numeric_limits<double>::quiet_NaN());
        Vec dz = lu.solve(-r);
        double lambda = 1.0;
        for (int halving = 0; halving <= 10; ++halving) {
            Vec z_trial = z + lambda * dz;
            Vec r_trial = dae.eval_psi(y, z_trial, u);
            const double rt = r_trial.lpNorm<Eigen::Infinity>();
            const double mt = r_trial.squaredNorm();
            if (std::isfinite(mt) && (mt < merit || rt <= cfg.algebraic_tol)) {
                z = std::move(z_trial);
                r = std::move(r_trial);
                rnorm = rt;
                merit = mt;
                break;
            }
            if (halving == 10)
                throw NewtonDivergence("solve_algebraic: no descent after 10 halvings, |psi|=" +
                                       std::to_string(rnorm));
            lambda *= 0.5;
        }
    }
    if (rnorm <= cfg.algebraic_tol) return z;
    throw NewtonDivergence("solve_algebraic: not converged after " + std::to_string(cfg.newton_max_iter) +
                           " iterations, |psi|=" + std::to_string(rnorm));
}

// Projects a packed state (y, z) back onto the algebraic manifold of `dae`
// by re-solving z with y held fixed. Used after discrete mode switches,
// where the identity reset fixes the differential slice and the algebraic
// variables must jump to the new manifold.
inline Vec make_consistent(const SemiExplicitDae& dae, const Vec& x, double u, const SolverConfig& cfg) {
    if (x.size() != dae.n_y + dae.n_z) throw DimensionMismatch("make_consistent: bad state size");
    Vec out(x.size());
    out.head(dae.n_y) = x.head(dae.n_y);
    out.tail(dae.n_z) = solve_algebraic(dae, x.head(dae.n_y), x.tail(dae.n_z), u, cfg);
    return out;
}

// One implicit trapezoidal step of size h. Solves the coupled system
//   y+ - y - (h/2)(phi(y,z,u) + phi(y+,z+,u)) = 0,   psi(y+,z+,u) = 0
// by damped Newton on (y+, z+).
inline DaeState step_trapezoidal(const SemiExplicitDae& dae, const DaeState& state, double u, double h,
                                 const SolverConfig& cfg) {
    const int ny = dae.n_y, nz = dae.n_z, n = ny + nz;
    const Vec phi0 = dae.eval_phi(state.y, state.z, u);

    Vec y = state.y + h * phi0;  // explicit-Euler predictor
    Vec z = state.z;

    auto eval_res = [&](const Vec& yy, const Vec& zz, Vec& out) {
        out.resize(n);
        if (ny > 0) out.head(ny) = yy - state.y - 0.5 * h * (phi0 + dae.eval_phi(yy, zz, u));
        if (nz > 0) out.tail(nz) = dae.eval_psi(yy, zz, u);
    };

    Vec r;
    eval_res(y, z, r);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    double merit = r.squaredNorm();
    Mat A(n, n);
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (rnorm <= cfg.newton_tol) break;
        JacobianBlocks J = eval_jacobians(dae, y, z, u);
        A.setZero();
        if (ny > 0) {
            A.topLeftCorner(ny, ny) = Mat::Identity(ny, ny) - 0.5 * h * J.dphi_dy;
            if (nz > 0) A.topRightCorner(ny, nz) = -0.5 * h * J.dphi_dz;
        }
        if (nz > 0) {
            if (ny > 0) A.bottomLeftCorner(nz, ny) = J.dpsi_dy;
            A.bottomRightCorner(nz, nz) = J.dpsi_dz;
        }
        Eigen::PartialPivLU<Mat> lu(A);
        detail::check_pivots(lu, state.t + h);
        Vec d = lu.solve(-r);
        double lambda = 1.0;
        for (int halving = 0; halving <= 10; ++halving) {
            Vec y_trial = y + lambda * d.head(ny);
            Vec z_trial = z + lambda * d.tail(nz);
            Vec r_trial;
            eval_res(y_trial, z_trial, r_trial);
            const double rt = r_trial.lpNorm<Eigen::Infinity>();
            const double mt = r_trial.squaredNorm();
            if (std::isfinite(mt) && (mt < merit || rt <= cfg.newton_tol)) {
                y = std::move(y_trial);
                z = std::move(z_trial);
                r = std::move(r_trial);
                rnorm = rt;
                merit = mt;
                break;
            }
            if (halving == 10)
                throw NewtonDivergence("step_trapezoidal: no descent after 10 halvings, |F|=" +
                                       std::to_string(rnorm), state.t + h);
            lambda *= 0.5;
        }
        if (it == cfg.newton_max_iter - 1 && rnorm > cfg.newton_tol)
            throw NewtonDivergence("step_trapezoidal: not converged, |F|=" + std::to_string(rnorm),
                                   state.t + h);
    }
    return DaeState{std::move(y), std::move(z), state.t + h};
}

// Chains trapezoidal steps over a uniform grid. Deterministic given
// (model, state0, u, duration, cfg): no adaptivity, no randomness.
inline TrajectorySegment simulate(const SemiExplicitDae& dae, const DaeState& state0, double u,
                                  double duration, const SolverConfig& cfg) {
    if (!(duration > 0.0)) throw Error("simulate: duration must be positive");
    const double h = cfg.h;
    long long n_steps = static_cast<long long>(std::floor(duration / h + 1e-9));
    double rem = duration - static_cast<double>(n_steps) * h;
    if (rem < 1e-12 * std::max(1.0, duration)) rem = 0.0;

    TrajectorySegment seg;
    seg.input = u;
    seg.times.reserve(static_cast<std::size_t>(n_steps) + 2);
    seg.states.reserve(static_cast<std::size_t>(n_steps) + 2);
    seg.times.push_back(state0.t);
    seg.states.push_back(state0);

    auto guard_state = [&](const DaeState& s) {
        if (cfg.check_index1) {
            Index1Report rep = index1_check(dae, s.y, s.z, u);
            if (!rep.nonsingular)
                throw SingularJacobian("simulate: index-1 condition violated", s.t);
        }
    };
    guard_state(state0);

    DaeState cur = state0;
    for (long long k = 1; k <= n_steps; ++k) {
        try {
            cur = step_trapezoidal(dae, cur, u, h, cfg);
        } catch (NewtonDivergence& e) {
            throw NewtonDivergence(std::string(e.what()) + " at t=" + std::to_string(state0.t + k * h),
                                   state0.t + k * h);
        }
        cur.t = state0.t + static_cast<double>(k) * h;
        guard_state(cur);
        seg.times.push_back(cur.t);
        seg.states.push_back(cur);
    }
    if (rem > 0.0) {
        cur = step_trapezoidal(dae, cur, u, rem, cfg);
        cur.t = state0.t + duration;
        guard_state(cur);
        seg.times.push_back(cur.t);
        seg.states.push_back(cur);
    }
    return seg;
}

}  // namespace gridrrt

#include <catch2/catch.hpp>

#include <cmath>

#include "gridrrt/dae.hpp"
#include "gridrrt/rng.hpp"

using namespace gridrrt;

namespace {

// dy/dt = -y with the trivial constraint z = y; closed form y(t) = y0 e^-t.
SemiExplicitDae exp_model() {
    SemiExplicitDae dae;
    dae.n_y = 1;
    dae.n_z = 1;
    dae.phi = [](const Vec& y, const Vec&, double, Vec& out) { out[0] = -y[0]; };
    dae.psi = [](const Vec& y, const Vec& z, double, Vec& out) { out[0] = z[0] - y[0]; };
    dae.jac_phi = [](const Vec&, const Vec&, double, Mat& dy, Mat& dz) {
        dy(0, 0) = -1.0;
        dz(0, 0) = 0.0;
    };
    dae.jac_psi = [](const Vec&, const Vec&, double, Mat& dy, Mat& dz) {
        dy(0, 0) = -1.0;
        dz(0, 0) = 1.0;
    };
    return dae;
}

double exp_terminal_error(double h) {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    cfg.h = h;
    DaeState s0{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), 0.0};
    TrajectorySegment seg = simulate(dae, s0, 0.0, 1.0, cfg);
    return std::abs(seg.back().y[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("residual at an exact solution point is zero") {
    SemiExplicitDae dae = exp_model();
    Vec y = Vec::Constant(1, 2.0), ydot = Vec::Constant(1, -2.0), z = Vec::Constant(1, 2.0);
    auto [rd, ra] = residual(dae, y, ydot, z, 0.0);
    CHECK(rd[0] == Approx(0.0).margin(1e-15));
    CHECK(ra[0] == Approx(0.0).margin(1e-15));

    z[0] = 3.0;
    auto [rd2, ra2] = residual(dae, y, ydot, z, 0.0);
    CHECK(ra2[0] == Approx(1.0));
}

TEST_CASE("residual rejects mismatched dimensions") {
    SemiExplicitDae dae = exp_model();
    Vec bad = Vec::Zero(2);
    CHECK_THROWS_AS(residual(dae, bad, bad, bad, 0.0), DimensionMismatch);
}

TEST_CASE("index1_check distinguishes regular and singular constraints") {
    SemiExplicitDae dae = exp_model();
    Vec y = Vec::Constant(1, 1.0), z = Vec::Constant(1, 1.0);
    Index1Report rep = index1_check(dae, y, z, 0.0);
    CHECK(rep.nonsingular);
    CHECK(rep.condition_estimate == Approx(1.0));

    SemiExplicitDae sing = exp_model();
    sing.psi = [](const Vec& y, const Vec&, double, Vec& out) { out[0] = -y[0]; };
    sing.jac_psi = [](const Vec&, const Vec&, double, Mat& dy, Mat& dz) {
        dy(0, 0) = -1.0;
        dz(0, 0) = 0.0;
    };
    CHECK_FALSE(index1_check(sing, y, z, 0.0).nonsingular);
}

TEST_CASE("solve_algebraic solves the trivial constraint in one step") {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    Vec y = Vec::Constant(1, 4.2);
    Vec z = solve_algebraic(dae, y, Vec::Constant(1, -7.0), 0.0, cfg);
    CHECK(z[0] == Approx(4.2).margin(1e-10));
}

TEST_CASE("trapezoidal step matches the exponential to second order") {
    const double e1 = exp_terminal_error(0.04);
    const double e2 = exp_terminal_error(0.02);
    const double e3 = exp_terminal_error(0.01);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e2 / e3 >= 3.5);
    CHECK(e3 < 1e-4);
}

TEST_CASE("a vanishing step leaves the state essentially unchanged") {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    DaeState s0{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), 0.0};
    DaeState s1 = step_trapezoidal(dae, s0, 0.0, 1e-8, cfg);
    CHECK(std::abs(s1.y[0] - s0.y[0]) <= 1e-7);
}

TEST_CASE("simulate produces the documented uniform grid") {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    cfg.h = 0.01;
    DaeState s0{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), 0.0};
    TrajectorySegment seg = simulate(dae, s0, 0.0, 1.26, cfg);
    CHECK(seg.states.size() == 127);
    CHECK(seg.times.front() == 0.0);
    CHECK(seg.times.back() == Approx(1.26).margin(1e-12));
}

TEST_CASE("simulate is bitwise deterministic") {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    DaeState s0{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), 0.0};
    TrajectorySegment a = simulate(dae, s0, 0.0, 0.5, cfg);
    TrajectorySegment b = simulate(dae, s0, 0.0, 0.5, cfg);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        CHECK(a.states[k].y[0] == b.states[k].y[0]);
        CHECK(a.states[k].z[0] == b.states[k].z[0]);
    }
}

TEST_CASE("every simulated state stays on the algebraic manifold") {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    DaeState s0{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), 0.0};
    TrajectorySegment seg = simulate(dae, s0, 0.0, 2.0, cfg);
    for (const auto& st : seg.states)
        CHECK(std::abs(dae.eval_psi(st.y, st.z, 0.0)[0]) <= cfg.algebraic_tol);
}

TEST_CASE("finite differences recover the analytic Jacobian of a linear model") {
    SemiExplicitDae dae = exp_model();
    Vec y = Vec::Constant(1, 0.7), z = Vec::Constant(1, 0.7);
    JacobianBlocks fd = finite_diff_jacobian(dae, y, z, 0.0, 1e-6);
    CHECK(fd.dphi_dy(0, 0) == Approx(-1.0).margin(1e-9));
    CHECK(fd.dphi_dz(0, 0) == Approx(0.0).margin(1e-9));
    CHECK(fd.dpsi_dy(0, 0) == Approx(-1.0).margin(1e-9));
    CHECK(fd.dpsi_dz(0, 0) == Approx(1.0).margin(1e-9));
}

TEST_CASE("finite-difference error shows the usual V shape over eps") {
    // nonlinear scalar model so truncation error is visible
    SemiExplicitDae dae;
    dae.n_y = 1;
    dae.n_z = 1;
    dae.phi = [](const Vec& y, const Vec& z, double, Vec& out) { out[0] = std::sin(3.0 * y[0]) * z[0]; };
    dae.psi = [](const Vec& y, const Vec& z, double, Vec& out) { out[0] = z[0] - std::cos(2.0 * y[0]); };
    Vec y = Vec::Constant(1, 0.3), z = Vec::Constant(1, std::cos(0.6));
    const double exact = 3.0 * std::cos(3.0 * 0.3) * z[0];

    const double err_coarse = std::abs(finite_diff_jacobian(dae, y, z, 0.0, 1e-2).dphi_dy(0, 0) - exact);
    const double err_mid = std::abs(finite_diff_jacobian(dae, y, z, 0.0, 1e-5).dphi_dy(0, 0) - exact);
    const double err_fine = std::abs(finite_diff_jacobian(dae, y, z, 0.0, 1e-11).dphi_dy(0, 0) - exact);
    CHECK(err_mid < err_coarse);
    CHECK(err_mid < err_fine);
}

TEST_CASE("newton divergence surfaces as a typed error") {
    // z^2 + 1 = 0 has no real root
    SemiExplicitDae dae;
    dae.n_y = 0;
    dae.n_z = 1;
    dae.psi = [](const Vec&, const Vec& z, double, Vec& out) { out[0] = z[0] * z[0] + 1.0; };
    SolverConfig cfg;
    CHECK_THROWS_AS(solve_algebraic(dae, Vec(), Vec::Constant(1, 2.0), 0.0, cfg), NewtonDivergence);
}

TEST_CASE("make_consistent keeps y and projects z") {
    SemiExplicitDae dae = exp_model();
    SolverConfig cfg;
    Vec x(2);
    x << 1.5, 9.0;
    Vec fixed = make_consistent(dae, x, 0.0, cfg);
    CHECK(fixed[0] == 1.5);
    CHECK(fixed[1] == Approx(1.5).margin(1e-10));
}

TEST_CASE("splitmix streams are deterministic and distinct") {
    SplitMix64 a(42, 0), b(42, 0), c(42, 1);
    for (int i = 0; i < 100; ++i) {
        auto va = a.next_u64();
        CHECK(va == b.next_u64());
        CHECK(va != c.next_u64());
    }
    SplitMix64 d(7, 1);
    for (int i = 0; i < 10000; ++i) {
        const double x = d.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }
}

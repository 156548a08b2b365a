#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "varq/mechanics.hpp"

using namespace varq;

namespace {

ClassicalEnsemble gaussian_ensemble(const Grid1D& g, double mean, double width, double p0) {
    ClassicalEnsemble ens{g, RealVector(g.n), RealVector(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.node(i) - mean;
        ens.rho[i] = std::exp(-x * x / (2.0 * width * width));
        ens.S[i] = p0 * g.node(i);
    }
    const double mass = grid_integral(ens.rho, g.h);
    for (auto& r : ens.rho) r /= mass;
    return ens;
}

double centroid(const ClassicalEnsemble& ens) {
    double c = 0.0;
    for (std::size_t i = 0; i < ens.grid.n; ++i) c += ens.grid.node(i) * ens.rho[i];
    return c * ens.grid.h;
}

}  // namespace

TEST_CASE("Legendre transform examples") {
    const auto free = natural_system(1.0, free_potential());
    CHECK(legendre_hamiltonian(free, 0.3, 2.0) == 2.0);

    NaturalSystemSpec heavy = natural_system(2.0, polynomial_potential({0.0, 0.0, 1.0}));
    CHECK(legendre_hamiltonian(heavy, 1.0, 4.0) == doctest::Approx(5.0).epsilon(1e-15));

    NaturalSystemSpec bad = natural_system(-1.0, free_potential());
    CHECK_THROWS_AS(legendre_hamiltonian(bad, 0.0, 1.0), Error);
    try {
        (void)legendre_hamiltonian(bad, 0.0, 1.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_spec);
    }
}

TEST_CASE("Legendre involution for a position-dependent mass") {
    NaturalSystemSpec spec;
    spec.mass = [](double q) { return 1.0 + 0.5 * std::sin(q); };
    spec.mass_derivative = [](double q) { return 0.5 * std::cos(q); };
    spec.potential = quartic_potential(1.0);
    gen::Source src(9);
    for (int i = 0; i < 500; ++i) {
        const double q = src.uniform(-5.0, 5.0);
        const double p = src.uniform(-10.0, 10.0);
        const double w = legendre_velocity(spec, q, p);
        CHECK(std::abs(legendre_momentum(spec, q, w) - p) <= 1e-12 * (1.0 + std::abs(p)));
        // dH/dq against a central difference
        const double dq = 1e-5;
        const double fd = (legendre_hamiltonian(spec, q + dq, p) - legendre_hamiltonian(spec, q - dq, p)) / (2 * dq);
        CHECK(hamiltonian_force_term(spec, q, p) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("hamilton_flow reproduces the oscillator period") {
    const auto spec = natural_system(1.0, harmonic_potential(1.0));
    const double dt = 1e-3;
    const auto flow = hamilton_flow(spec, {1.0, 0.0}, dt, 20000);
    CHECK_FALSE(flow.escaped);
    RealVector q;
    for (const auto& s : flow.trajectory) q.push_back(s.q);
    CHECK(std::abs(crossing_period(q, dt) - 2.0 * std::numbers::pi) < 1e-6);
}

TEST_CASE("hamilton_flow free motion is exact") {
    const auto spec = natural_system(2.0, free_potential());
    const auto flow = hamilton_flow(spec, {0.5, 3.0}, 0.01, 1000);
    for (std::size_t k = 0; k < flow.trajectory.size(); ++k) {
        const double t = 0.01 * static_cast<double>(k);
        CHECK(flow.trajectory[k].q == doctest::Approx(0.5 + 1.5 * t).epsilon(1e-13));
        CHECK(flow.trajectory[k].p == 3.0);
    }
}

TEST_CASE("hamilton_flow is reversible") {
    const auto spec = natural_system(1.0, polynomial_potential({0.0, 0.0, 0.5, 0.0, 0.25}));
    const auto fwd = hamilton_flow(spec, {0.7, -0.4}, 1e-3, 3000);
    PhaseState back = fwd.trajectory.back();
    back.p = -back.p;
    const auto rev = hamilton_flow(spec, back, 1e-3, 3000);
    CHECK(rev.trajectory.back().q == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(-rev.trajectory.back().p == doctest::Approx(-0.4).epsilon(1e-9));
}

TEST_CASE("hamilton_flow energy drift is fourth order") {
    const auto spec = natural_system(1.0, polynomial_potential({0.0, 0.0, 0.5, 0.0, 0.5}));
    auto drift = [&](double dt) {
        const auto n = static_cast<std::size_t>(std::llround(4.0 / dt));
        const auto flow = hamilton_flow(spec, {1.0, 0.0}, dt, n);
        const auto& s = flow.trajectory.back();
        return std::abs(legendre_hamiltonian(spec, s.q, s.p) - legendre_hamiltonian(spec, 1.0, 0.0));
    };
    // At least fourth order; the leading dt^4 energy term of RK4 cancels for
    // one-dimensional Hamiltonians, so the observed ratio is near 32.
    const double ratio = drift(0.04) / drift(0.02);
    CHECK(ratio >= 16.0 * 0.8);
    CHECK(ratio < 40.0);
}

TEST_CASE("hamilton_flow reports leaving the domain") {
    const auto spec = natural_system(1.0, free_potential());
    const auto flow = hamilton_flow(spec, {0.0, 1.0}, 0.1, 100, std::make_pair(-1.0, 1.05));
    CHECK(flow.escaped);
    CHECK(flow.escape_step == 11);
    CHECK(flow.trajectory.size() == 11);
}

TEST_CASE("godunov kinetic term") {
    CHECK(godunov_kinetic(-1.0, 2.0, 1.0) == 0.0);
    CHECK(godunov_kinetic(1.0, 2.0, 1.0) == 0.5);
    CHECK(godunov_kinetic(-3.0, -2.0, 1.0) == 2.0);
    CHECK(godunov_kinetic(2.0, -3.0, 2.0) == 2.25);
    CHECK(godunov_kinetic(1.5, 1.5, 3.0) == doctest::Approx(0.375));
}

TEST_CASE("transport with constant S leaves rho unchanged") {
    const Grid1D g = build_grid(-5.0, 5.0, 201);
    auto ens = gaussian_ensemble(g, 0.3, 0.5, 0.0);
    for (auto& s : ens.S) s = 4.2;
    const auto next = transport_density(ens, natural_system(1.0, free_potential()), 0.01);
    CHECK(next.rho == ens.rho);
}

TEST_CASE("transport translates a Gaussian at the characteristic speed") {
    const auto spec = natural_system(2.0, free_potential());
    auto run = [&](double h) {
        const auto n = static_cast<std::int64_t>(std::llround(10.0 / h)) + 1;
        const Grid1D g = build_grid(-5.0, 5.0, n);
        auto ens = gaussian_ensemble(g, -1.0, 0.5, 1.0);
        const double dt = 0.5 * h;
        const double T = 1.0;
        const auto steps = static_cast<std::size_t>(std::llround(T / dt));
        const double c0 = centroid(ens);
        for (std::size_t s = 0; s < steps; ++s) ens = transport_density(ens, spec, dt);
        CHECK(centroid(ens) - c0 == doctest::Approx(0.5 * T).epsilon(1e-11));
        double err = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double x = g.node(i) - (-1.0 + 0.5 * T);
            const double exact = std::exp(-x * x / 0.5) / std::sqrt(std::numbers::pi * 0.5);
            err = std::max(err, std::abs(ens.rho[i] - exact));
        }
        return err;
    };
    const double e1 = run(0.02);
    const double e2 = run(0.01);
    CHECK(e1 < 0.1);
    CHECK(e1 / e2 > 1.5);
    CHECK(e1 / e2 < 2.6);
}

TEST_CASE("transport conserves probability for random fields") {
    gen::Source src(31);
    const Grid1D g = build_grid(-2.0, 2.0, 101);
    const auto spec = natural_system(1.3, harmonic_potential(2.0));
    for (int trial = 0; trial < 100; ++trial) {
        ClassicalEnsemble ens{g, src.reals(g.n, 0.0, 1.0), src.reals(g.n, -0.02, 0.02)};
        const double mass = grid_integral(ens.rho, g.h);
        for (auto& r : ens.rho) r /= mass;
        const auto next = transport_density(ens, spec, 0.5 * g.h);
        CHECK(std::abs(grid_integral(next.rho, g.h) - 1.0) < 1e-12);
        for (double r : next.rho) CHECK(r >= 0.0);
    }
}

TEST_CASE("transport rejects steps beyond the Courant limit") {
    const Grid1D g = build_grid(-1.0, 1.0, 21);
    auto ens = gaussian_ensemble(g, 0.0, 0.3, 5.0);
    const auto spec = natural_system(1.0, free_potential());
    CHECK(transport_courant(ens, spec, 0.02) == doctest::Approx(1.0));
    CHECK_NOTHROW(transport_density(ens, spec, 0.02));
    try {
        (void)transport_density(ens, spec, 0.03);
        FAIL("expected step-rejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::step_rejected);
    }
}

TEST_CASE("Hamilton-Jacobi residual examples") {
    const Grid1D g = build_grid(-3.0, 3.0, 121);
    const double p0 = 1.7;
    const double m = 1.4;
    const auto free = natural_system(m, free_potential());
    const double t = 0.6;
    ClassicalEnsemble ens{g, RealVector(g.n, 1.0 / 6.0), RealVector(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) ens.S[i] = p0 * g.node(i) - p0 * p0 / (2 * m) * t;
    const RealVector dSdt(g.n, -p0 * p0 / (2 * m));
    for (double r : hj_residual(ens, free, dSdt)) CHECK(std::abs(r) < 1e-12);

    const auto quartic = natural_system(1.0, quartic_potential(1.0));
    for (auto& s : ens.S) s = 0.0;
    const auto res = hj_residual(ens, quartic, RealVector(g.n, 0.0));
    for (std::size_t i = 0; i < g.n; ++i) {
        const double q = g.node(i);
        CHECK(res[i] == q * q * q * q);
    }

    // S = -(q^2/2) tan t solves the oscillator's equation.
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    RealVector dS(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double q = g.node(i);
        ens.S[i] = -0.5 * q * q * std::tan(t);
        dS[i] = -0.5 * q * q / (std::cos(t) * std::cos(t));
    }
    const auto harmonic = hj_residual(ens, osc, dS);
    for (std::size_t i = 1; i + 1 < g.n; ++i) CHECK(std::abs(harmonic[i]) < 4.0 * g.h * g.h);
}

TEST_CASE("density-gradient coupling is invisible to the classical balance") {
    const Grid1D g = build_grid(-4.0, 4.0, 161);
    const auto spec = natural_system(1.0, harmonic_potential(1.0));
    auto ens = gaussian_ensemble(g, 0.5, 0.7, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) ens.S[i] = 0.3 * g.node(i) + 0.1 * std::sin(g.node(i));
    const double dt = 0.2 * g.h;
    CHECK(lagrangian_equivalence_check(ens, spec, [](double) { return 0.0; }, dt) == 0.0);
    CHECK(lagrangian_equivalence_check(ens, spec, [](double r) { return 0.5 / r; }, dt) < 1e-12);
    CHECK(lagrangian_equivalence_check(ens, spec, [](double r) { return 3.0 + r * r; }, dt) < 1e-12);
}

TEST_CASE("narrow packet follows the characteristic through one period") {
    const Grid1D g = build_grid(-3.0, 3.0, 601);
    const auto spec = natural_system(1.0, harmonic_potential(1.0));
    const auto track = track_packet(spec, g, {1.0, 0.0}, 3.0 * g.h, 2.0 * std::numbers::pi, 0.2, 0.1);
    CHECK(track.max_error <= 2.0 * g.h);
    CHECK(track.times.back() == doctest::Approx(2.0 * std::numbers::pi));
}

TEST_CASE("centroid error shrinks with the packet width in an anharmonic well") {
    const Grid1D g = build_grid(-2.0, 2.0, 401);
    const auto spec = natural_system(1.0, polynomial_potential({0.0, 0.0, 0.5, 0.0, 0.5}));
    double previous = std::numeric_limits<double>::infinity();
    for (double widths : {24.0, 12.0, 6.0, 3.0}) {
        const auto track = track_packet(spec, g, {1.0, 0.0}, widths * g.h, 2.0, 0.2, 0.1);
        CHECK(track.max_error < previous);
        previous = track.max_error;
    }
    CHECK(previous <= 2.0 * g.h);
}

TEST_CASE("time reversal leaves the classical residuals invariant") {
    const Grid1D g = build_grid(-3.0, 3.0, 121);
    const auto spec = natural_system(1.0, harmonic_potential(1.0));
    auto ens = gaussian_ensemble(g, 0.4, 0.5, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) ens.S[i] = 0.5 * g.node(i);
    const double dt = 0.2 * g.h;
    std::vector<ClassicalEnsemble> history{ens};
    for (int s = 0; s < 50; ++s) history.push_back(transport_density(history.back(), spec, dt));
    const auto forward = classical_residuals(history, spec, dt);
    const auto reversed = classical_residuals(time_reversed(history), spec, dt);
    CHECK(forward.hamilton_jacobi > 0.0);
    CHECK(forward.continuity > 0.0);
    CHECK(reversed.hamilton_jacobi == doctest::Approx(forward.hamilton_jacobi).epsilon(1e-12));
    CHECK(reversed.continuity == doctest::Approx(forward.continuity).epsilon(1e-12));
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "varq/hydrodynamics.hpp"
#include "varq/wavefunction.hpp"

using namespace varq;

namespace {

HydroState gaussian_state(const Grid1D& g, double mean, double variance) {
    HydroState s{g, RealVector(g.n), RealVector(g.n, 0.0)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.node(i) - mean;
        s.rho[i] = std::exp(-x * x / (2.0 * variance));
    }
    const double mass = grid_integral(s.rho, g.h);
    for (auto& r : s.rho) r /= mass;
    return s;
}

double centroid(const HydroState& s) {
    double c = 0.0;
    for (std::size_t i = 0; i < s.grid.n; ++i) c += s.grid.node(i) * s.rho[i];
    return c * s.grid.h;
}

}  // namespace

TEST_CASE("rho d(rho) branches") {
    const auto q = quantum_diffusion(0.8);
    CHECK(rho_d(q, 0.3) == doctest::Approx(0.4));
    CHECK(rho_d_squared(q, 0.5) == doctest::Approx(0.16 / 0.5));
    const auto c = classical_diffusion();
    CHECK(rho_d(c, 0.3) == 0.0);
    CHECK(rho_d_squared(c, 0.3) == 0.0);
    auto reg = quantum_diffusion(1.0);
    reg.g = [](double r) { return 2.0 * r; };
    reg.g_derivative = [](double) { return 2.0; };
    CHECK(rho_d(reg, 0.5) == doctest::Approx(std::sqrt(0.25 + 0.5)));
}

TEST_CASE("diffusion current") {
    const Grid1D g = build_grid(-5.0, 5.0, 201);
    const auto spec = natural_system(2.0, free_potential());
    const auto flat = diffusion_current(spec, quantum_diffusion(1.0), g, RealVector(g.n, 0.1));
    for (double v : flat) CHECK(v == 0.0);

    const auto s = gaussian_state(g, 0.0, 1.0);
    const auto cur = diffusion_current(spec, quantum_diffusion(1.0), g, s.rho);
    for (std::size_t i = 1; i + 1 < g.n; ++i) {
        const double grad = (s.rho[i + 1] - s.rho[i - 1]) / (2.0 * g.h);
        CHECK(cur[i] == doctest::Approx(0.5 * grad / 2.0).epsilon(1e-13));
    }
    for (double v : diffusion_current(spec, classical_diffusion(), g, s.rho)) CHECK(v == 0.0);

    RealVector bad = s.rho;
    bad[10] = -1e-3;
    CHECK_THROWS_AS(diffusion_current(spec, quantum_diffusion(1.0), g, bad), Error);
}

TEST_CASE("effective Hamiltonian density") {
    const Grid1D g = build_grid(-8.0, 8.0, 801);
    const auto free = natural_system(1.0, free_potential());
    auto s = gaussian_state(g, 0.0, 1.0);
    for (auto& l : s.lam) l = 3.0;
    for (double e : effective_hamiltonian_density(free, classical_diffusion(), s)) CHECK(e == 0.0);

    // Ground state of the oscillator: h * sum H_e equals w0.
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto op = schrodinger_operator(osc, g, 1.0);
    const auto ground = eigensolve_lowest(op, 1)[0];
    HydroState gs{g, RealVector(g.n), RealVector(g.n, -ground.value * 0.37)};
    for (std::size_t i = 0; i < g.n; ++i) gs.rho[i] = ground.vector[i] * ground.vector[i];
    const double total = grid_integral(effective_hamiltonian_density(osc, quantum_diffusion(1.0), gs), g.h);
    CHECK(std::abs(total - ground.value) < 1e-10);
    CHECK(std::abs(total - 0.5) < 1e-4);

    // The first term is linear in rho.
    auto moving = gaussian_state(g, 0.0, 1.0);
    for (std::size_t i = 0; i < g.n; ++i) moving.lam[i] = 0.4 * g.node(i) + 0.1 * std::sin(g.node(i));
    auto doubled = moving;
    for (auto& r : doubled.rho) r *= 2.0;
    const auto e1 = effective_hamiltonian_density(osc, classical_diffusion(), moving);
    const auto e2 = effective_hamiltonian_density(osc, classical_diffusion(), doubled);
    for (std::size_t i = 0; i < g.n; ++i) CHECK(e2[i] == doctest::Approx(2.0 * e1[i]).epsilon(1e-14));
}

TEST_CASE("stationary pair keeps rho and advances lambda at rate w0") {
    const Grid1D g = build_grid(-8.0, 8.0, 401);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    const auto ground = eigensolve_lowest(schrodinger_operator(osc, g, 1.0), 1)[0];
    HydroState s{g, RealVector(g.n), RealVector(g.n, 0.0)};
    for (std::size_t i = 0; i < g.n; ++i) s.rho[i] = ground.vector[i] * ground.vector[i];
    const double dt = 0.4 * madelung_dispersive_limit(osc, dspec, g);
    const std::size_t steps = 200;
    HydroState cur = s;
    for (std::size_t k = 0; k < steps; ++k) cur = madelung_step(osc, dspec, cur, dt);
    const auto mask = density_mask(s.rho, 1e-8);
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(std::abs(cur.rho[i] - s.rho[i]) < 1e-9);
        if (mask[i]) CHECK(cur.lam[i] == doctest::Approx(-ground.value * dt * steps).epsilon(1e-6));
    }
}

TEST_CASE("classical mode reproduces classical transport bit for bit") {
    const Grid1D g = build_grid(-4.0, 4.0, 161);
    const auto spec = natural_system(1.2, harmonic_potential(0.7));
    auto s = gaussian_state(g, 0.3, 0.5);
    for (std::size_t i = 0; i < g.n; ++i) s.lam[i] = 0.2 * g.node(i) + 0.05 * std::cos(g.node(i));
    ClassicalEnsemble ens{g, s.rho, s.lam};
    for (int k = 0; k < 40; ++k) {
        s = madelung_step(spec, classical_diffusion(), s, 0.1 * g.h);
        ens = transport_density(ens, spec, 0.1 * g.h);
    }
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(std::abs(s.rho[i] - ens.rho[i]) <= 1e-12);
        CHECK(std::abs(s.lam[i] - ens.S[i]) <= 1e-12);
    }
}

TEST_CASE("madelung step conserves probability") {
    gen::Source src(17);
    const Grid1D g = build_grid(-6.0, 6.0, 241);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = gaussian_state(g, src.uniform(-1.0, 1.0), src.uniform(0.3, 1.0));
        const double k = src.uniform(-0.5, 0.5);
        for (std::size_t i = 0; i < g.n; ++i) s.lam[i] = k * g.node(i);
        const double dt = 0.5 * madelung_dispersive_limit(osc, dspec, g);
        for (int k = 0; k < 20; ++k) {
            s = madelung_step(osc, dspec, s, dt);
            CHECK(std::abs(grid_integral(s.rho, g.h) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("madelung step rejects nodes and oversize steps") {
    const Grid1D g = build_grid(-6.0, 6.0, 241);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    auto s = gaussian_state(g, 0.0, 1.0);
    const double limit = madelung_dispersive_limit(osc, dspec, g);
    CHECK(limit == doctest::Approx(g.h * g.h));
    try {
        (void)madelung_step(osc, dspec, s, 1.5 * limit);
        FAIL("expected step-rejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::step_rejected);
    }
    s.rho[100] = 0.0;
    try {
        (void)madelung_step(osc, dspec, s, 0.5 * limit);
        FAIL("expected step-rejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::step_rejected);
        REQUIRE(e.location().has_value());
        CHECK(*e.location() == 100);
    }
}

TEST_CASE("breathing packet stays regular in the tails") {
    const Grid1D g = build_grid(-6.0, 6.0, 601);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    auto s = gaussian_state(g, 0.0, 0.3);
    const double dt = 0.5 * madelung_dispersive_limit(osc, dspec, g);
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    for (std::size_t k = 0; k < steps; ++k) s = madelung_step(osc, dspec, s, dt);
    for (double l : s.lam) CHECK(std::isfinite(l));
    for (double r : s.rho) CHECK(r >= 0.0);
}

TEST_CASE("coherent packet oscillates with the classical period") {
    const Grid1D g = build_grid(-6.0, 6.0, 481);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    auto s = gaussian_state(g, 1.0, 0.5);
    const double dt = 0.5 * madelung_dispersive_limit(osc, dspec, g);
    const auto steps = static_cast<std::size_t>(std::llround(4.0 * std::numbers::pi / dt));
    RealVector c;
    for (std::size_t k = 0; k < steps; ++k) {
        c.push_back(centroid(s));
        s = madelung_step(osc, dspec, s, dt);
    }
    CHECK(crossing_period(c, dt) == doctest::Approx(2.0 * std::numbers::pi).epsilon(0.01));
}

TEST_CASE("Madelung evolution matches the Schrodinger solution") {
    const Grid1D g = build_grid(-6.0, 6.0, 601);
    const double a = 1.0;
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(a);
    auto s = gaussian_state(g, 0.5, 0.5);
    const auto wf0 = canonical_map_inverse(g, s.rho, s.lam, a);
    const double dt = 0.5 * madelung_dispersive_limit(osc, dspec, g);
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    const UnitaryStepper stepper(schrodinger_operator(osc, g, a), dt, a);
    ComplexVector psi = wf0.psi;
    double worst = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        s = madelung_step(osc, dspec, s, dt);
        stepper.advance(psi);
        for (std::size_t i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(s.rho[i] - std::norm(psi[i])));
    }
    // first order in h: about 0.09 h per unit of displacement at this spacing
    CHECK(worst < 2e-3);
}

TEST_CASE("quantum balance differs from the classical one for the same state") {
    const Grid1D g = build_grid(-6.0, 6.0, 241);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    auto s = gaussian_state(g, 0.0, 0.4);
    const double dt = 0.5 * g.h * g.h;
    CHECK(diffusion_discrepancy(osc, quantum_diffusion(1.0), s, dt) > 1e-6);
    CHECK(diffusion_discrepancy(osc, classical_diffusion(), s, dt) == 0.0);
}

TEST_CASE("time reversal leaves the Madelung residuals invariant") {
    const Grid1D g = build_grid(-6.0, 6.0, 241);
    const auto osc = natural_system(1.0, harmonic_potential(1.0));
    const auto dspec = quantum_diffusion(1.0);
    auto s = gaussian_state(g, 0.7, 0.5);
    const double dt = 0.5 * madelung_dispersive_limit(osc, dspec, g);
    std::vector<HydroState> history{s};
    for (int k = 0; k < 60; ++k) history.push_back(madelung_step(osc, dspec, history.back(), dt));
    const auto fwd = madelung_residuals(history, osc, dspec, dt);
    const auto rev = madelung_residuals(time_reversed(history), osc, dspec, dt);
    CHECK(fwd.hamilton_jacobi > 0.0);
    CHECK(rev.hamilton_jacobi == doctest::Approx(fwd.hamilton_jacobi).epsilon(1e-12));
    CHECK(rev.continuity == doctest::Approx(fwd.continuity).epsilon(1e-12));
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "varq/covariant_fields.hpp"

using namespace varq;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

FieldLagrangianSpec klein_gordon(double m, double eta = 1.0) {
    return {eta, harmonic_potential(m * m)};
}

// Exact frequency of a Fourier mode under kick-drift-kick leapfrog with the
// three-point Laplacian: the invariant ellipse has aspect sqrt(W^2 (1 - W^2 dt^2 / 4)).
double lattice_frequency(const FieldLagrangianSpec& spec, const PeriodicGrid& g, int mode, double dt,
                         double m) {
    const double k = two_pi * mode / g.length;
    const double s = 2.0 * std::sin(0.5 * k * g.h) / g.h;
    const double w2 = s * s + m * m / spec.eta;
    return std::sqrt(w2 * (1.0 - 0.25 * w2 * dt * dt));
}

double total_energy(const FieldLagrangianSpec& spec, const FieldState1p1& s) {
    return energy_momentum(spec, s).total(0, s.grid.h);
}

double total_momentum(const FieldLagrangianSpec& spec, const FieldState1p1& s) {
    return energy_momentum(spec, s).total(1, s.grid.h);
}

}  // namespace

TEST_CASE("covariant Legendre transform") {
    const FieldLagrangianSpec free{1.0, free_potential()};
    const auto m = covariant_legendre(free, 0.3, 1.0, 0.0);
    CHECK(m.pi0 == 1.0);
    CHECK(m.pi1 == 0.0);
    CHECK(m.H == 0.5);
    CHECK(covariant_legendre(free, 2.0, 1.0, 1.0).H == 0.0);

    gen::Source src(2);
    for (int i = 0; i < 100; ++i) {
        const FieldLagrangianSpec spec{src.uniform(0.2, 3.0), quartic_potential(0.4)};
        const double w0 = src.uniform(-2.0, 2.0);
        const double w1 = src.uniform(-2.0, 2.0);
        const auto mom = covariant_legendre(spec, src.uniform(-1.0, 1.0), w0, w1);
        CHECK(mom.pi1 == doctest::Approx(-spec.eta * w1));
        const auto back = covariant_velocity(spec, mom.pi0, mom.pi1);
        CHECK(std::abs(back[0] - w0) <= 1e-12);
        CHECK(std::abs(back[1] - w1) <= 1e-12);
    }
}

TEST_CASE("canonical reduction") {
    const auto spec = klein_gordon(1.3);
    CHECK(canonical_reduction(spec, 0.0, 0.0, 0.7) == doctest::Approx(spec.potential(0.7)));
    const FieldLagrangianSpec free{1.0, free_potential()};
    CHECK(canonical_reduction(free, 1.0, 1.0, 5.0) == 1.0);
    const FieldLagrangianSpec heavy{2.5, free_potential()};
    CHECK(canonical_velocity(heavy, 1.0) == doctest::Approx(0.4));
    // dH_c/dpi0 by symmetric difference
    const double d = (canonical_reduction(heavy, 1.0 + 1e-6, 0.3, 0.1) - canonical_reduction(heavy, 1.0 - 1e-6, 0.3, 0.1)) / 2e-6;
    CHECK(d == doctest::Approx(canonical_velocity(heavy, 1.0)).epsilon(1e-8));
}

TEST_CASE("tensor components and the canonical density agree") {
    gen::Source src(9);
    const auto g = build_periodic_grid(0.0, two_pi, 64);
    const FieldLagrangianSpec spec{1.7, quartic_potential(0.3)};
    FieldState1p1 s{g, src.reals(g.n, -1.0, 1.0), src.reals(g.n, -1.0, 1.0), 0.0};
    const auto em = energy_momentum(spec, s);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double dq = (s.q[(i + 1) % g.n] - s.q[(i + g.n - 1) % g.n]) / (2.0 * g.h);
        const double qdot = s.pi0[i] / spec.eta;
        const double lag = 0.5 * spec.eta * (qdot * qdot - dq * dq) - spec.potential(s.q[i]);
        CHECK(std::abs(em.T[i][0] - canonical_reduction(spec, s.pi0[i], dq, s.q[i])) <= 1e-12);
        CHECK(em.T[i][1] == doctest::Approx(spec.eta * qdot * dq));
        CHECK(em.T[i][2] == doctest::Approx(-spec.eta * qdot * dq));
        CHECK(em.T[i][3] == doctest::Approx(-spec.eta * dq * dq - lag));
    }

    const FieldLagrangianSpec free{1.0, free_potential()};
    FieldState1p1 rest{g, RealVector(g.n, 0.4), RealVector(g.n, 0.0), 0.0};
    for (const auto& t : energy_momentum(free, rest).T)
        for (double c : t) CHECK(c == 0.0);
}

TEST_CASE("spatial polymomentum is the constraint solution") {
    gen::Source src(4);
    const auto g = build_periodic_grid(-1.0, 2.0, 50);
    const FieldLagrangianSpec spec{0.8, free_potential()};
    const FieldState1p1 s{g, src.reals(g.n, -1.0, 1.0), RealVector(g.n, 0.0), 0.0};
    const auto pi1 = spatial_polymomentum(spec, s);
    REQUIRE(pi1.size() == g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        CHECK(pi1[i] + spec.eta * (s.q[(i + 1) % g.n] - s.q[i]) / g.h == 0.0);
}

TEST_CASE("Klein-Gordon plane wave follows the dispersion relation") {
    const double m = 1.0;
    const auto spec = klein_gordon(m);
    const auto g = build_periodic_grid(0.0, two_pi, 256);
    for (int mode : {1, 2, 4}) {
        const double k = mode;
        const double omega = std::sqrt(k * k + m * m);
        auto s = plane_wave_state(spec, g, 0.1, mode, omega);
        const double dt = 0.25 * g.h;
        const auto steps = static_cast<std::size_t>(std::ceil(4.0 * two_pi / omega / dt));
        const auto hist = ddw_history(spec, s, dt, steps);
        CHECK(hist.size() == steps + 1);
        const double measured = measured_frequency(hist, g, mode, dt);
        CHECK(std::abs(measured * measured - omega * omega) <= 1e-3 * omega * omega);

        // averaged energy density of the wave
        const auto fine = build_periodic_grid(0.0, two_pi, 1024);
        const auto start = plane_wave_state(spec, fine, 0.1, mode, omega);
        const double density = total_energy(spec, start) / fine.length;
        CHECK(std::abs(density - 0.5 * 0.01 * omega * omega) <= 1e-3 * 0.5 * 0.01 * omega * omega);
    }
}

TEST_CASE("massless pulse advects at unit speed") {
    const FieldLagrangianSpec free{1.0, free_potential()};
    const auto g = build_periodic_grid(-5.0, 10.0, 2000);
    auto pulse = [](double x) { return std::exp(-x * x / (2.0 * 0.3 * 0.3)); };
    FieldState1p1 s{g, RealVector(g.n), RealVector(g.n), 0.0};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.node(i);
        s.q[i] = pulse(x);
        s.pi0[i] = x / (0.3 * 0.3) * pulse(x);  // d_0 q = -f'(x)
    }
    const double dt = 0.5 * g.h;
    const auto steps = static_cast<std::size_t>(std::llround(3.0 / dt));
    const auto out = ddw_evolve(free, s, dt, steps);
    CHECK(out.time == doctest::Approx(3.0));
    double err = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) err = std::max(err, std::abs(out.q[i] - pulse(g.node(i) - 3.0)));
    CHECK(err <= 2e-3);
}

TEST_CASE("equilibrium field stays static") {
    const FieldLagrangianSpec spec{1.0, quartic_potential(0.5)};
    const auto g = build_periodic_grid(0.0, 1.0, 32);
    const FieldState1p1 s{g, RealVector(g.n, 0.0), RealVector(g.n, 0.0), 0.0};
    const auto out = ddw_evolve(spec, s, 0.5 * g.h, 500);
    for (double q : out.q) CHECK(q == 0.0);
    for (double p : out.pi0) CHECK(p == 0.0);
}

TEST_CASE("oversize steps are rejected") {
    const auto spec = klein_gordon(1.0);
    const auto g = build_periodic_grid(0.0, 1.0, 32);
    const FieldState1p1 s{g, RealVector(g.n, 0.0), RealVector(g.n, 0.0), 0.0};
    try {
        (void)ddw_evolve(spec, s, 1.01 * g.h, 1);
        FAIL("expected step-rejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::step_rejected);
    }
}

TEST_CASE("energy and momentum are conserved over ten crossings") {
    const double m = 1.0;
    const auto spec = klein_gordon(m);
    const auto g = build_periodic_grid(0.0, two_pi, 256);
    const double dt = 0.5 * g.h;
    const auto s0 = plane_wave_state(spec, g, 0.3, 1, lattice_frequency(spec, g, 1, dt, m));
    const double e0 = total_energy(spec, s0);
    const double p0 = total_momentum(spec, s0);
    const auto per_crossing = static_cast<std::size_t>(std::llround(g.length / dt));
    auto s = s0;
    double de = 0.0;
    double dp = 0.0;
    for (int c = 0; c < 10; ++c) {
        for (int sub = 0; sub < 8; ++sub) {
            s = ddw_evolve(spec, s, dt, per_crossing / 8);
            de = std::max(de, std::abs(total_energy(spec, s) - e0));
            dp = std::max(dp, std::abs(total_momentum(spec, s) - p0));
        }
    }
    CHECK(de <= 1e-6 * std::abs(e0));
    CHECK(dp <= 1e-6 * std::abs(p0));
}

TEST_CASE("tensor divergence vanishes with refinement") {
    const auto spec = klein_gordon(1.0);
    double prev = 0.0;
    for (std::size_t n : {64, 128, 256}) {
        const auto g = build_periodic_grid(0.0, two_pi, n);
        const double dt = 0.5 * g.h;
        const auto s = plane_wave_state(spec, g, 0.3, 2, std::sqrt(5.0));
        const auto next = ddw_evolve(spec, s, dt, 1);
        const auto r = tensor_divergence_residual(spec, s, next, dt);
        const double worst = std::max(std::abs(r[0]), std::abs(r[1]));
        if (prev > 0.0) CHECK(worst < 0.35 * prev);
        prev = worst;
    }
}

TEST_CASE("evolution is an extremal with second-order residual") {
    const auto spec = klein_gordon(1.0);
    const double t_final = 1.0;
    double coarse = 0.0;
    for (std::size_t n : {128, 256}) {
        const auto g = build_periodic_grid(0.0, two_pi, n);
        const double dt = 0.5 * g.h;
        auto s = plane_wave_state(spec, g, 0.5, 3, std::sqrt(10.0));
        const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
        const auto hist = ddw_history(spec, s, dt, steps);
        const double res = extremal_embedding_check(spec, hist, g, dt);
        if (coarse > 0.0) {
            const double ratio = coarse / res;
            CHECK(ratio >= 3.0);
            CHECK(ratio <= 5.0);
        }
        coarse = res;
    }

    gen::Source src(6);
    const auto g = build_periodic_grid(0.0, two_pi, 64);
    std::vector<RealVector> noise;
    for (int k = 0; k < 10; ++k) noise.push_back(src.reals(g.n, -1.0, 1.0));
    CHECK(extremal_embedding_check(spec, noise, g, 0.5 * g.h) > 1.0);
}

TEST_CASE("reversing time and pi0 retraces the trajectory") {
    const FieldLagrangianSpec spec{1.3, quartic_potential(0.2)};
    gen::Source src(12);
    const auto g = build_periodic_grid(0.0, two_pi, 128);
    FieldState1p1 s{g, RealVector(g.n), RealVector(g.n), 0.0};
    for (std::size_t i = 0; i < g.n; ++i) {
        s.q[i] = std::sin(g.node(i)) + 0.3 * std::cos(3.0 * g.node(i));
        s.pi0[i] = 0.2 * std::cos(2.0 * g.node(i));
    }
    const double dt = 0.5 * g.h;
    auto fwd = ddw_evolve(spec, s, dt, 400);
    for (auto& p : fwd.pi0) p = -p;
    const auto back = ddw_evolve(spec, fwd, dt, 400);
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(std::abs(back.q[i] - s.q[i]) <= 1e-10);
        CHECK(std::abs(back.pi0[i] + s.pi0[i]) <= 1e-10);
    }
}

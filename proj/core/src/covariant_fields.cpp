#include "varq/covariant_fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace varq {

namespace {

std::size_t wrap(std::size_t i, std::ptrdiff_t shift, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(i) + shift) % m + m) % m);
}

double central_dx(const RealVector& q, std::size_t i, double h) {
    return (q[wrap(i, 1, q.size())] - q[wrap(i, -1, q.size())]) / (2.0 * h);
}

void check_state(const FieldState1p1& s) {
    if (s.q.size() != s.grid.n || s.pi0.size() != s.grid.n)
        throw Error(ErrorKind::invalid_argument, "field vectors do not match the grid");
}

void check_spec(const FieldLagrangianSpec& spec) {
    if (!(spec.eta > 0.0)) throw Error(ErrorKind::invalid_spec, "eta must be positive");
}

// d_0 pi0 = -d_1 pi^1 - V'(q), with pi^1 on faces.
void kick(const FieldLagrangianSpec& spec, FieldState1p1& s, double tau) {
    const RealVector pi1 = spatial_polymomentum(spec, s);
    const std::size_t n = s.grid.n;
    for (std::size_t i = 0; i < n; ++i) {
        const double div = (pi1[i] - pi1[wrap(i, -1, n)]) / s.grid.h;
        s.pi0[i] += tau * (-div - spec.potential.derivative(s.q[i]));
    }
}

void leapfrog(const FieldLagrangianSpec& spec, FieldState1p1& s, double dt) {
    kick(spec, s, 0.5 * dt);
    for (std::size_t i = 0; i < s.grid.n; ++i) s.q[i] += dt * canonical_velocity(spec, s.pi0[i]);
    kick(spec, s, 0.5 * dt);
    s.time += dt;
}

void check_step(const FieldState1p1& s, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
    if (dt > s.grid.h * (1.0 + 1e-12))
        throw Error(ErrorKind::step_rejected,
                    "dt = " + std::to_string(dt) + " exceeds the light-cone limit h = " + std::to_string(s.grid.h));
}

}  // namespace

PeriodicGrid build_periodic_grid(double x_min, double length, std::size_t n) {
    if (n < 3) throw Error(ErrorKind::invalid_argument, "periodic grid needs at least 3 points");
    if (!(length > 0.0) || !std::isfinite(x_min))
        throw Error(ErrorKind::invalid_argument, "periodic grid needs a finite origin and positive length");
    return {x_min, length, n, length / static_cast<double>(n)};
}

CovariantMomenta covariant_legendre(const FieldLagrangianSpec& spec, double q, double w0, double w1) {
    check_spec(spec);
    CovariantMomenta m;
    m.pi0 = spec.eta * w0;
    m.pi1 = -spec.eta * w1;
    m.H = (m.pi0 * m.pi0 - m.pi1 * m.pi1) / (2.0 * spec.eta) + spec.potential(q);
    return m;
}

std::array<double, 2> covariant_velocity(const FieldLagrangianSpec& spec, double pi0, double pi1) {
    check_spec(spec);
    return {pi0 / spec.eta, -pi1 / spec.eta};
}

RealVector spatial_polymomentum(const FieldLagrangianSpec& spec, const FieldState1p1& state) {
    check_state(state);
    const std::size_t n = state.grid.n;
    RealVector pi1(n);
    for (std::size_t i = 0; i < n; ++i) pi1[i] = -spec.eta * (state.q[wrap(i, 1, n)] - state.q[i]) / state.grid.h;
    return pi1;
}

FieldState1p1 ddw_evolve(const FieldLagrangianSpec& spec, const FieldState1p1& state, double dt,
                         std::size_t n_steps) {
    check_spec(spec);
    check_state(state);
    check_step(state, dt);
    FieldState1p1 s = state;
    for (std::size_t k = 0; k < n_steps; ++k) leapfrog(spec, s, dt);
    return s;
}

std::vector<RealVector> ddw_history(const FieldLagrangianSpec& spec, FieldState1p1& state, double dt,
                                    std::size_t n_steps) {
    check_spec(spec);
    check_state(state);
    check_step(state, dt);
    std::vector<RealVector> out;
    out.reserve(n_steps + 1);
    out.push_back(state.q);
    for (std::size_t k = 0; k < n_steps; ++k) {
        leapfrog(spec, state, dt);
        out.push_back(state.q);
    }
    return out;
}

double extremal_embedding_check(const FieldLagrangianSpec& spec, const std::vector<RealVector>& history,
                                const PeriodicGrid& grid, double dt) {
    check_spec(spec);
    if (history.size() < 5) throw Error(ErrorKind::invalid_argument, "history needs at least 5 snapshots");
    const std::size_t n = grid.n;
    double worst = 0.0;
    for (std::size_t t = 2; t + 2 < history.size(); ++t) {
        const RealVector& q = history[t];
        for (std::size_t i = 0; i < n; ++i) {
            const double qtt = (-history[t + 2][i] + 16.0 * history[t + 1][i] - 30.0 * q[i] +
                                16.0 * history[t - 1][i] - history[t - 2][i]) /
                               (12.0 * dt * dt);
            const double qxx = (-q[wrap(i, 2, n)] + 16.0 * q[wrap(i, 1, n)] - 30.0 * q[i] +
                                16.0 * q[wrap(i, -1, n)] - q[wrap(i, -2, n)]) /
                               (12.0 * grid.h * grid.h);
            worst = std::max(worst, std::abs(spec.eta * (qtt - qxx) + spec.potential.derivative(q[i])));
        }
    }
    return worst;
}

double EnergyMomentum::total(std::size_t component, double h) const {
    if (component > 3) throw Error(ErrorKind::invalid_argument, "tensor component out of range");
    double sum = 0.0;
    for (const auto& t : T) sum += t[component];
    return sum * h;
}

EnergyMomentum energy_momentum(const FieldLagrangianSpec& spec, const FieldState1p1& state) {
    check_spec(spec);
    check_state(state);
    EnergyMomentum em;
    em.T.resize(state.grid.n);
    for (std::size_t i = 0; i < state.grid.n; ++i) {
        const double q0 = state.pi0[i] / spec.eta;
        const double q1 = central_dx(state.q, i, state.grid.h);
        const double lag = 0.5 * spec.eta * (q0 * q0 - q1 * q1) - spec.potential(state.q[i]);
        // raising the spatial index flips its sign
        em.T[i] = {spec.eta * q0 * q0 - lag, spec.eta * q0 * q1, -spec.eta * q1 * q0, -spec.eta * q1 * q1 - lag};
    }
    return em;
}

std::array<double, 2> tensor_divergence_residual(const FieldLagrangianSpec& spec, const FieldState1p1& before,
                                                 const FieldState1p1& after, double dt) {
    const auto a = energy_momentum(spec, before);
    const auto b = energy_momentum(spec, after);
    const std::size_t n = before.grid.n;
    const double h = before.grid.h;
    std::array<double, 2> worst{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = wrap(i, 1, n);
        const std::size_t l = wrap(i, -1, n);
        for (std::size_t nu = 0; nu < 2; ++nu) {
            const double d0 = (b.T[i][nu] - a.T[i][nu]) / dt;
            const double d1 = 0.5 * ((a.T[r][2 + nu] - a.T[l][2 + nu]) + (b.T[r][2 + nu] - b.T[l][2 + nu])) / (2.0 * h);
            const double res = d0 + d1;
            if (std::abs(res) > std::abs(worst[nu])) worst[nu] = res;
        }
    }
    return worst;
}

double canonical_reduction(const FieldLagrangianSpec& spec, double pi0, double dq_dx1, double q) {
    check_spec(spec);
    return pi0 * pi0 / (2.0 * spec.eta) + 0.5 * spec.eta * dq_dx1 * dq_dx1 + spec.potential(q);
}

double canonical_velocity(const FieldLagrangianSpec& spec, double pi0) { return pi0 / spec.eta; }

FieldState1p1 plane_wave_state(const FieldLagrangianSpec& spec, const PeriodicGrid& grid, double amplitude,
                               int mode, double omega) {
    check_spec(spec);
    const double k = 2.0 * std::numbers::pi * mode / grid.length;
    FieldState1p1 s{grid, RealVector(grid.n), RealVector(grid.n), 0.0};
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double phase = k * grid.node(i);
        s.q[i] = amplitude * std::cos(phase);
        s.pi0[i] = spec.eta * amplitude * omega * std::sin(phase);
    }
    return s;
}

double measured_frequency(const std::vector<RealVector>& history, const PeriodicGrid& grid, int mode, double dt) {
    if (history.size() < 2) throw Error(ErrorKind::invalid_argument, "history needs at least 2 snapshots");
    const double k = 2.0 * std::numbers::pi * mode / grid.length;
    RealVector phase(history.size());
    for (std::size_t t = 0; t < history.size(); ++t) {
        cplx c = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) c += history[t][i] * std::polar(1.0, -k * grid.node(i));
        phase[t] = std::arg(c);
        if (t > 0) phase[t] = phase[t - 1] + std::remainder(phase[t] - phase[t - 1], 2.0 * std::numbers::pi);
    }
    // least-squares slope of phase against time
    const double m = static_cast<double>(phase.size());
    double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
    for (std::size_t t = 0; t < phase.size(); ++t) {
        const double x = dt * static_cast<double>(t);
        st += x;
        sp += phase[t];
        stt += x * x;
        stp += x * phase[t];
    }
    const double slope = (m * stp - st * sp) / (m * stt - st * st);
    return -slope;
}

}  // namespace varq

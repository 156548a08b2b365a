#include "varq/mechanics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "transport_detail.hpp"

namespace varq {

namespace detail {

RealVector face_velocity(const Grid1D& grid, const RealVector& S, const NaturalSystemSpec& spec) {
    RealVector v(grid.n - 1);
    for (std::size_t i = 0; i + 1 < grid.n; ++i) {
        const double m = spec.mass_at(grid.node(i) + 0.5 * grid.h);
        v[i] = (S[i + 1] - S[i]) / (grid.h * m);
    }
    return v;
}

std::pair<std::size_t, double> max_courant(const RealVector& face_v, double dt, double h) {
    std::size_t where = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < face_v.size(); ++i) {
        const double c = std::abs(face_v[i]) * dt / h;
        if (!(c <= worst)) {
            worst = c;
            where = i;
        }
    }
    return {where, worst};
}

RealVector upwind_transport(const RealVector& rho, const RealVector& face_v, double dt, double h) {
    RealVector out = rho;
    const double ratio = dt / h;
    for (std::size_t i = 0; i < face_v.size(); ++i) {
        const double v = face_v[i];
        const double flux = v > 0.0 ? v * rho[i] : v * rho[i + 1];
        out[i] -= ratio * flux;
        out[i + 1] += ratio * flux;
    }
    return out;
}

RealVector godunov_kinetic_field(const Grid1D& grid, const RealVector& S,
                                 const NaturalSystemSpec& spec) {
    const std::size_t n = grid.n;
    RealVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? (S[i] - S[i - 1]) / grid.h : (S[1] - S[0]) / grid.h;
        const double right = i + 1 < n ? (S[i + 1] - S[i]) / grid.h : (S[n - 1] - S[n - 2]) / grid.h;
        out[i] = godunov_kinetic(left, right, spec.mass_at(grid.node(i)));
    }
    return out;
}

RealVector central_gradient(const RealVector& f, double h) {
    const std::size_t n = f.size();
    RealVector g(n);
    g[0] = (f[1] - f[0]) / h;
    g[n - 1] = (f[n - 1] - f[n - 2]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    return g;
}

}  // namespace detail

double NaturalSystemSpec::mass_at(double q) const {
    const double m = mass ? mass(q) : 1.0;
    if (!(m > 0.0) || !std::isfinite(m))
        throw Error(ErrorKind::invalid_spec, "mass must be positive and finite (got " +
                                                 std::to_string(m) + " at q = " + std::to_string(q) + ")");
    return m;
}

NaturalSystemSpec natural_system(double mass, Potential potential) {
    NaturalSystemSpec spec;
    spec.mass = [mass](double) { return mass; };
    spec.mass_derivative = [](double) { return 0.0; };
    spec.potential = std::move(potential);
    return spec;
}

double legendre_hamiltonian(const NaturalSystemSpec& spec, double q, double p) {
    return p * p / (2.0 * spec.mass_at(q)) + spec.potential(q);
}

double legendre_velocity(const NaturalSystemSpec& spec, double q, double p) {
    return p / spec.mass_at(q);
}

double legendre_momentum(const NaturalSystemSpec& spec, double q, double w) {
    return spec.mass_at(q) * w;
}

double hamiltonian_force_term(const NaturalSystemSpec& spec, double q, double p) {
    const double m = spec.mass_at(q);
    const double dm = spec.mass_derivative ? spec.mass_derivative(q) : 0.0;
    return -p * p * dm / (2.0 * m * m) + spec.potential.derivative(q);
}

FlowResult hamilton_flow(const NaturalSystemSpec& spec, PhaseState initial, double dt,
                         std::size_t n_steps, std::optional<std::pair<double, double>> domain) {
    if (!std::isfinite(dt * static_cast<double>(n_steps)))
        throw Error(ErrorKind::invalid_argument, "dt * n_steps must be finite");
    const VectorField field = [&spec](const RealVector& x) {
        return RealVector{legendre_velocity(spec, x[0], x[1]), -hamiltonian_force_term(spec, x[0], x[1])};
    };
    FlowResult result;
    result.trajectory.reserve(n_steps + 1);
    result.trajectory.push_back(initial);
    RealVector x{initial.q, initial.p};
    for (std::size_t k = 1; k <= n_steps; ++k) {
        bool left = false;
        try {
            x = rk4_step(field, x, dt);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::numerical_failure && e.kind() != ErrorKind::invalid_spec) throw;
            left = true;
        }
        left = left || !std::isfinite(x[0]) || !std::isfinite(x[1]);
        if (!left && domain) left = x[0] < domain->first || x[0] > domain->second;
        if (left) {
            result.escaped = true;
            result.escape_step = k;
            return result;
        }
        result.trajectory.push_back({x[0], x[1]});
    }
    return result;
}

double godunov_kinetic(double p_left, double p_right, double mass) {
    double p2;
    if (p_left <= p_right) {
        p2 = (p_left <= 0.0 && p_right >= 0.0) ? 0.0 : std::min(p_left * p_left, p_right * p_right);
    } else {
        p2 = std::max(p_left * p_left, p_right * p_right);
    }
    return p2 / (2.0 * mass);
}

double transport_courant(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec, double dt) {
    return detail::max_courant(detail::face_velocity(ens.grid, ens.S, spec), dt, ens.grid.h).second;
}

ClassicalEnsemble transport_density(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec,
                                    double dt) {
    const Grid1D& g = ens.grid;
    if (ens.rho.size() != g.n || ens.S.size() != g.n)
        throw Error(ErrorKind::invalid_argument, "ensemble fields do not match the grid");
    const RealVector v = detail::face_velocity(g, ens.S, spec);
    const auto [face, courant] = detail::max_courant(v, dt, g.h);
    if (courant > 1.0 + 1e-12)
        throw Error(ErrorKind::step_rejected,
                    "Courant number " + std::to_string(courant) + " exceeds 1 at face " + std::to_string(face),
                    face);
    ClassicalEnsemble out{g, detail::upwind_transport(ens.rho, v, dt, g.h), ens.S};
    const RealVector kinetic = detail::godunov_kinetic_field(g, ens.S, spec);
    for (std::size_t i = 0; i < g.n; ++i) out.S[i] -= dt * (kinetic[i] + spec.potential(g.node(i)));
    return out;
}

RealVector hj_residual(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec,
                       const RealVector& dSdt) {
    const Grid1D& g = ens.grid;
    const RealVector p = detail::central_gradient(ens.S, g.h);
    RealVector r(g.n);
    for (std::size_t i = 0; i < g.n; ++i) r[i] = dSdt[i] + legendre_hamiltonian(spec, g.node(i), p[i]);
    return r;
}

namespace {

// D(rho) = integral of d from the peak density to rho, by Gauss-Legendre in log(rho).
double integrated_coupling(const ScalarFunction& d, double rho, double rho_ref) {
    static constexpr std::array<double, 8> x{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                             0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                             0.9445750230732326, 0.9894009349916499};
    static constexpr std::array<double, 8> w{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                             0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                             0.0622535239024733, 0.0271524594117541};
    const double u0 = std::log(rho_ref);
    const double u1 = std::log(rho);
    const double half = 0.5 * (u1 - u0);
    const double mid = 0.5 * (u1 + u0);
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        for (double s : {-1.0, 1.0}) {
            const double u = mid + s * half * x[k];
            const double r = std::exp(u);
            acc += w[k] * d(r) * r;
        }
    }
    return acc * half;
}

}  // namespace

double lagrangian_equivalence_check(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec,
                                    const ScalarFunction& d_rho, double dt) {
    const ClassicalEnsemble plain = transport_density(ens, spec, dt);
    const double peak = *std::max_element(ens.rho.begin(), ens.rho.end());
    RealVector D(ens.grid.n, 0.0);
    for (std::size_t i = 0; i < ens.grid.n; ++i)
        if (ens.rho[i] > 0.0) D[i] = integrated_coupling(d_rho, ens.rho[i], peak);
    // The extended action's multiplier carries D(rho); its velocity subtracts
    // the d(rho) d(rho)/dq term again before transport.
    RealVector lambda(ens.grid.n);
    for (std::size_t i = 0; i < ens.grid.n; ++i) lambda[i] = ens.S[i] + D[i];
    ClassicalEnsemble extended{ens.grid, ens.rho, RealVector(ens.grid.n)};
    for (std::size_t i = 0; i < ens.grid.n; ++i) extended.S[i] = lambda[i] - D[i];
    const ClassicalEnsemble stepped = transport_density(extended, spec, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < ens.grid.n; ++i) {
        worst = std::max(worst, std::abs(stepped.rho[i] - plain.rho[i]));
        worst = std::max(worst, std::abs(stepped.S[i] - plain.S[i]));
    }
    return worst;
}

CentroidTrack track_packet(const NaturalSystemSpec& spec, const Grid1D& grid, PhaseState mean,
                           double width, double t_final, double courant, double reseed_interval) {
    if (!(width > 0.0) || !(t_final > 0.0) || !(courant > 0.0))
        throw Error(ErrorKind::invalid_argument, "track_packet requires positive width, duration and Courant number");
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / (courant * grid.h)));
    const double dt = t_final / static_cast<double>(steps);
    const std::size_t every = reseed_interval > 0.0
                                  ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(reseed_interval / dt)))
                                  : steps + 1;

    ClassicalEnsemble ens{grid, RealVector(grid.n), RealVector(grid.n)};
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.node(i) - mean.q;
        ens.rho[i] = std::exp(-x * x / (2.0 * width * width));
        ens.S[i] = mean.p * grid.node(i);
    }
    const double total = grid_integral(ens.rho, grid.h);
    for (auto& r : ens.rho) r /= total;

    const FlowResult flow = hamilton_flow(spec, mean, dt, steps);
    CentroidTrack track;
    for (std::size_t k = 0; k < steps; ++k) {
        if (k % every == 0 && k > 0) {
            double weighted = 0.0;
            double weight = 0.0;
            for (std::size_t i = 0; i + 1 < grid.n; ++i) {
                const double rf = 0.5 * (ens.rho[i] + ens.rho[i + 1]);
                weighted += rf * (ens.S[i + 1] - ens.S[i]) / grid.h;
                weight += rf;
            }
            const double pbar = weighted / weight;
            for (std::size_t i = 0; i < grid.n; ++i) ens.S[i] = pbar * grid.node(i);
        }
        ens = transport_density(ens, spec, dt);
        double c = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) c += grid.node(i) * ens.rho[i];
        c *= grid.h;
        const double t = static_cast<double>(k + 1) * dt;
        const double ref = k + 1 < flow.trajectory.size() ? flow.trajectory[k + 1].q : std::nan("");
        track.times.push_back(t);
        track.centroid.push_back(c);
        track.reference.push_back(ref);
        track.max_error = std::max(track.max_error, std::abs(c - ref));
        if (!std::isfinite(ref))
            throw Error(ErrorKind::numerical_failure, "reference characteristic left the finite range");
    }
    return track;
}

BalanceResiduals classical_residuals(const std::vector<ClassicalEnsemble>& history,
                                     const NaturalSystemSpec& spec, double dt) {
    BalanceResiduals out;
    if (history.size() < 3) return out;
    const Grid1D& g = history.front().grid;
    const std::size_t n = g.n;
    for (std::size_t t = 1; t + 1 < history.size(); ++t) {
        const auto& prev = history[t - 1];
        const auto& cur = history[t];
        const auto& next = history[t + 1];
        RealVector flux(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double q = g.node(i);
            const double p = (cur.S[i + 1] - cur.S[i - 1]) / (2.0 * g.h);
            const double dSdt = (next.S[i] - prev.S[i]) / (2.0 * dt);
            out.hamilton_jacobi = std::max(out.hamilton_jacobi, std::abs(dSdt + legendre_hamiltonian(spec, q, p)));
            flux[i] = cur.rho[i] * p / spec.mass_at(q);
        }
        for (std::size_t i = 2; i + 2 < n; ++i) {
            const double drho = (next.rho[i] - prev.rho[i]) / (2.0 * dt);
            const double div = (flux[i + 1] - flux[i - 1]) / (2.0 * g.h);
            out.continuity = std::max(out.continuity, std::abs(drho + div));
        }
    }
    return out;
}

std::vector<ClassicalEnsemble> time_reversed(const std::vector<ClassicalEnsemble>& history) {
    std::vector<ClassicalEnsemble> out(history.rbegin(), history.rend());
    for (auto& e : out)
        for (auto& s : e.S) s = -s;
    return out;
}

}  // namespace varq

#include "varq/hydrodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "transport_detail.hpp"

namespace varq {

namespace {

void check_density(const RealVector& rho) {
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (!(rho[i] >= 0.0) || !std::isfinite(rho[i]))
            throw Error(ErrorKind::invalid_state, "density must be nonnegative and finite", i);
}

// Contiguous run of cells above the floor that holds the density peak. Other
// runs are tail debris unless they carry more than 1e-6 of the probability,
// in which case the gap in between is a node.
std::pair<std::size_t, std::size_t> populated_range(const RealVector& rho, double floor_fraction) {
    const auto mask = density_mask(rho, floor_fraction);
    const auto peak = static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
    if (!mask[peak]) throw Error(ErrorKind::invalid_state, "density vanishes everywhere");
    std::size_t lo = peak;
    std::size_t hi = peak;
    while (lo > 0 && mask[lo - 1]) --lo;
    while (hi + 1 < rho.size() && mask[hi + 1]) ++hi;
    double total = 0.0;
    for (double r : rho) total += r;
    double left = 0.0;
    for (std::size_t i = 0; i < lo; ++i) left += mask[i] ? rho[i] : 0.0;
    if (left > 1e-6 * total)
        throw Error(ErrorKind::step_rejected, "density node at index " + std::to_string(lo - 1), lo - 1);
    double right = 0.0;
    for (std::size_t i = hi + 1; i < rho.size(); ++i) right += mask[i] ? rho[i] : 0.0;
    if (right > 1e-6 * total)
        throw Error(ErrorKind::step_rejected, "density node at index " + std::to_string(hi + 1), hi + 1);
    return {lo, hi};
}

// Linear continuation of lambda from the populated range into the masked tails.
RealVector extend_phase(const RealVector& lam, std::size_t lo, std::size_t hi) {
    RealVector out = lam;
    const double left = hi > lo ? lam[lo + 1] - lam[lo] : 0.0;
    const double right = hi > lo ? lam[hi] - lam[hi - 1] : 0.0;
    for (std::size_t j = 0; j < lo; ++j) out[j] = lam[lo] - left * static_cast<double>(lo - j);
    for (std::size_t j = hi + 1; j < lam.size(); ++j) out[j] = lam[hi] + right * static_cast<double>(j - hi);
    return out;
}

// Variational derivative of (1/2) g(rho) (d rho)^2 / m.
RealVector regular_part_potential(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                                  const Grid1D& grid, const RealVector& rho) {
    const std::size_t n = grid.n;
    RealVector out(n, 0.0);
    if (dspec.mode != DiffusionMode::quantum_pole || !dspec.has_regular_part()) return out;
    RealVector grad(n + 1, 0.0);
    RealVector flux(n + 1, 0.0);
    for (std::size_t f = 0; f <= n; ++f) {
        const double left = f > 0 ? rho[f - 1] : 0.0;
        const double right = f < n ? rho[f] : 0.0;
        const double q = grid.q_min + (static_cast<double>(f) - 0.5) * grid.h;
        grad[f] = (right - left) / grid.h;
        flux[f] = dspec.g(0.5 * (left + right)) * grad[f] / spec.mass_at(q);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double g2 = 0.5 * (grad[i] * grad[i] + grad[i + 1] * grad[i + 1]);
        const double dg = dspec.g_derivative ? dspec.g_derivative(rho[i]) : 0.0;
        out[i] = 0.5 * dg * g2 / spec.mass_at(grid.node(i)) - (flux[i + 1] - flux[i]) / grid.h;
    }
    return out;
}

}  // namespace

DiffusionSpec classical_diffusion() {
    DiffusionSpec d;
    d.mode = DiffusionMode::classical;
    return d;
}

DiffusionSpec quantum_diffusion(double a) {
    if (!(a > 0.0)) throw Error(ErrorKind::invalid_spec, "a must be positive");
    DiffusionSpec d;
    d.a = a;
    d.mode = DiffusionMode::quantum_pole;
    return d;
}

double rho_d_squared(const DiffusionSpec& dspec, double rho) {
    if (dspec.mode == DiffusionMode::classical) return 0.0;
    const double regular = dspec.has_regular_part() ? dspec.g(rho) : 0.0;
    return 0.25 * dspec.a * dspec.a / rho + regular;
}

double rho_d(const DiffusionSpec& dspec, double rho) {
    if (dspec.mode == DiffusionMode::classical) return 0.0;
    const double regular = dspec.has_regular_part() ? dspec.g(rho) : 0.0;
    return std::sqrt(0.25 * dspec.a * dspec.a + rho * regular);
}

RealVector diffusion_current(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                             const Grid1D& grid, const RealVector& rho) {
    check_density(rho);
    const RealVector grad = detail::central_gradient(rho, grid.h);
    RealVector out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i)
        out[i] = rho_d(dspec, rho[i]) * grad[i] / spec.mass_at(grid.node(i));
    return out;
}

RealVector effective_hamiltonian_density(const NaturalSystemSpec& spec,
                                         const DiffusionSpec& dspec, const HydroState& state) {
    const Grid1D& g = state.grid;
    const std::size_t n = g.n;
    const RealVector& rho = state.rho;
    RealVector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rho[i] * spec.potential(g.node(i));

    const bool quantum = dspec.mode == DiffusionMode::quantum_pole;
    // Face f sits between nodes f-1 and f; faces 0 and n border the zero ghosts.
    for (std::size_t f = 0; f <= n; ++f) {
        const bool interior = f > 0 && f < n;
        const double left = f > 0 ? rho[f - 1] : 0.0;
        const double right = f < n ? rho[f] : 0.0;
        const double m = spec.mass_at(g.q_min + (static_cast<double>(f) - 0.5) * g.h);
        double e = 0.0;
        if (interior) {
            const double dl = (state.lam[f] - state.lam[f - 1]) / g.h;
            e += 0.5 * (left + right) * dl * dl / (2.0 * m);
        }
        if (quantum) {
            const double ds = (std::sqrt(right) - std::sqrt(left)) / g.h;
            e += 0.5 * dspec.a * dspec.a * ds * ds / m;
            if (dspec.has_regular_part()) {
                const double dr = (right - left) / g.h;
                e += 0.5 * dspec.g(0.5 * (left + right)) * dr * dr / m;
            }
        }
        if (f == 0) {
            out[0] += e;
        } else if (f == n) {
            out[n - 1] += e;
        } else {
            out[f - 1] += 0.5 * e;
            out[f] += 0.5 * e;
        }
    }
    return out;
}

RealVector quantum_potential(const NaturalSystemSpec& spec, double a, const Grid1D& grid,
                             const RealVector& rho, const std::vector<char>& mask) {
    const std::size_t n = grid.n;
    RealVector amp(n);
    for (std::size_t i = 0; i < n; ++i) amp[i] = std::sqrt(std::max(rho[i], 0.0));
    RealVector slope(n + 1);
    for (std::size_t f = 0; f <= n; ++f) {
        const double left = f > 0 ? amp[f - 1] : 0.0;
        const double right = f < n ? amp[f] : 0.0;
        const double m = spec.mass_at(grid.q_min + (static_cast<double>(f) - 0.5) * grid.h);
        slope[f] = (right - left) / (grid.h * m);
    }
    RealVector out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i] || amp[i] == 0.0) continue;
        out[i] = -0.5 * a * a * (slope[i + 1] - slope[i]) / grid.h / amp[i];
    }
    return out;
}

std::vector<char> density_mask(const RealVector& rho, double floor_fraction) {
    const double peak = rho.empty() ? 0.0 : *std::max_element(rho.begin(), rho.end());
    std::vector<char> mask(rho.size(), 0);
    for (std::size_t i = 0; i < rho.size(); ++i) mask[i] = rho[i] > floor_fraction * peak ? 1 : 0;
    return mask;
}

double madelung_dispersive_limit(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                                 const Grid1D& grid) {
    if (dspec.mode == DiffusionMode::classical) return std::numeric_limits<double>::infinity();
    double m_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.n; ++i) m_min = std::min(m_min, spec.mass_at(grid.node(i)));
    return m_min * grid.h * grid.h / dspec.a;
}

HydroState madelung_step(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                         const HydroState& state, double dt, const MadelungOptions& opts) {
    const Grid1D& g = state.grid;
    if (state.rho.size() != g.n || state.lam.size() != g.n)
        throw Error(ErrorKind::invalid_argument, "state fields do not match the grid");
    check_density(state.rho);
    if (dspec.mode == DiffusionMode::classical) {
        const ClassicalEnsemble next = transport_density({g, state.rho, state.lam}, spec, dt);
        return {g, next.rho, next.S};
    }

    const double limit = madelung_dispersive_limit(spec, dspec, g);
    if (dt > limit * (1.0 + 1e-12))
        throw Error(ErrorKind::step_rejected,
                    "dt = " + std::to_string(dt) + " exceeds the dispersive limit " + std::to_string(limit));
    const auto [lo, hi] = populated_range(state.rho, opts.floor_fraction);
    std::vector<char> mask(g.n, 0);
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(lo), mask.begin() + static_cast<std::ptrdiff_t>(hi) + 1, 1);
    const RealVector lam = extend_phase(state.lam, lo, hi);

    const RealVector v = detail::face_velocity(g, lam, spec);
    const auto [face, courant] = detail::max_courant(v, dt, g.h);
    if (courant > 1.0 + 1e-12)
        throw Error(ErrorKind::step_rejected,
                    "Courant number " + std::to_string(courant) + " exceeds 1 at face " + std::to_string(face),
                    face);
    HydroState out{g, detail::upwind_transport(state.rho, v, dt, g.h), lam};
    for (std::size_t i = lo; i <= hi; ++i)
        if (!(out.rho[i] > 0.0))
            throw Error(ErrorKind::step_rejected, "density node formed at index " + std::to_string(i), i);
    (void)populated_range(out.rho, opts.floor_fraction);

    const RealVector kinetic = detail::godunov_kinetic_field(g, lam, spec);
    const RealVector Q = quantum_potential(spec, dspec.a, g, out.rho, mask);
    const RealVector G = regular_part_potential(spec, dspec, g, out.rho);
    for (std::size_t i = lo; i <= hi; ++i)
        out.lam[i] = lam[i] - dt * (kinetic[i] + spec.potential(g.node(i)) + Q[i] + G[i]);
    out.lam = extend_phase(out.lam, lo, hi);
    return out;
}

double diffusion_discrepancy(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                             const HydroState& state, double dt) {
    const HydroState with = madelung_step(spec, dspec, state, dt);
    const HydroState without = madelung_step(spec, classical_diffusion(), state, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < state.grid.n; ++i) {
        worst = std::max(worst, std::abs(with.rho[i] - without.rho[i]));
        worst = std::max(worst, std::abs(with.lam[i] - without.lam[i]));
    }
    return worst;
}

BalanceResiduals madelung_residuals(const std::vector<HydroState>& history,
                                    const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                                    double dt, double floor_fraction) {
    BalanceResiduals out;
    if (history.size() < 3) return out;
    const Grid1D& g = history.front().grid;
    const std::size_t n = g.n;
    for (std::size_t t = 1; t + 1 < history.size(); ++t) {
        const auto& prev = history[t - 1];
        const auto& cur = history[t];
        const auto& next = history[t + 1];
        const auto mask = density_mask(cur.rho, floor_fraction);
        const RealVector Q = dspec.mode == DiffusionMode::quantum_pole
                                 ? quantum_potential(spec, dspec.a, g, cur.rho, mask)
                                 : RealVector(n, 0.0);
        const RealVector G = regular_part_potential(spec, dspec, g, cur.rho);
        RealVector flux(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double q = g.node(i);
            const double p = (cur.lam[i + 1] - cur.lam[i - 1]) / (2.0 * g.h);
            flux[i] = cur.rho[i] * p / spec.mass_at(q);
            if (!(mask[i - 1] && mask[i] && mask[i + 1])) continue;
            const double dl = (next.lam[i] - prev.lam[i]) / (2.0 * dt);
            const double r = dl + legendre_hamiltonian(spec, q, p) + Q[i] + G[i];
            out.hamilton_jacobi = std::max(out.hamilton_jacobi, std::abs(r));
        }
        for (std::size_t i = 2; i + 2 < n; ++i) {
            if (!(mask[i - 2] && mask[i + 2])) continue;
            const double drho = (next.rho[i] - prev.rho[i]) / (2.0 * dt);
            const double div = (flux[i + 1] - flux[i - 1]) / (2.0 * g.h);
            out.continuity = std::max(out.continuity, std::abs(drho + div));
        }
    }
    return out;
}

std::vector<HydroState> time_reversed(const std::vector<HydroState>& history) {
    std::vector<HydroState> out(history.rbegin(), history.rend());
    for (auto& s : out)
        for (auto& l : s.lam) l = -l;
    return out;
}

}  // namespace varq

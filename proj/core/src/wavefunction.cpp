#include "varq/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace varq {

PolarFields canonical_map_forward(const WaveFunction& wf, double floor_fraction) {
    const std::size_t n = wf.psi.size();
    PolarFields out{RealVector(n), RealVector(n, 0.0), std::vector<char>(n, 0)};
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.rho[i] = std::norm(wf.psi[i]);
        peak = std::max(peak, out.rho[i]);
    }
    const double two_pi = 2.0 * std::numbers::pi;
    bool in_run = false;
    double previous = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(out.rho[i] > floor_fraction * peak) || peak == 0.0) {
            in_run = false;
            continue;
        }
        out.mask[i] = 1;
        double phase = std::arg(wf.psi[i]);
        if (in_run) phase += two_pi * std::round((previous - phase) / two_pi);
        previous = phase;
        in_run = true;
        out.lam[i] = wf.a * phase;
    }
    return out;
}

WaveFunction canonical_map_inverse(const Grid1D& grid, const RealVector& rho, const RealVector& lam,
                                   double a) {
    if (rho.size() != grid.n || lam.size() != grid.n)
        throw Error(ErrorKind::invalid_argument, "polar fields do not match the grid");
    if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "a must be positive");
    WaveFunction wf{grid, ComplexVector(grid.n), a};
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (rho[i] < 0.0 || !std::isfinite(rho[i]))
            throw Error(ErrorKind::invalid_state, "density must be nonnegative", i);
        wf.psi[i] = std::polar(std::sqrt(rho[i]), lam[i] / a);
    }
    return wf;
}

double canonical_density(double u, double v, double a) { return (u * u + v * v) / (2.0 * a); }

double canonical_phase(double u, double v, double a) { return a * std::atan2(v, u); }

double canonical_jacobian_fd(double u, double v, double a, double du) {
    // Phase differences are taken modulo 2 pi a so the branch cut does not leak in.
    const double period = 2.0 * std::numbers::pi * a;
    auto dphase = [period](double x, double y) { return std::remainder(x - y, period); };
    const double Pu = (canonical_density(u + du, v, a) - canonical_density(u - du, v, a)) / (2.0 * du);
    const double Pv = (canonical_density(u, v + du, a) - canonical_density(u, v - du, a)) / (2.0 * du);
    const double Lu = dphase(canonical_phase(u + du, v, a), canonical_phase(u - du, v, a)) / (2.0 * du);
    const double Lv = dphase(canonical_phase(u, v + du, a), canonical_phase(u, v - du, a)) / (2.0 * du);
    return Pu * Lv - Pv * Lu;
}

TridiagonalOperator schrodinger_operator(const NaturalSystemSpec& spec, const Grid1D& grid,
                                         double a) {
    return diffusion_operator(grid, a * a, [&spec](double q) { return 1.0 / spec.mass_at(q); },
                              spec.potential.value);
}

double boundary_mass(const WaveFunction& wf) {
    const std::size_t n = wf.psi.size();
    const std::size_t band = std::min(n / 2, std::max<std::size_t>(3, n / 50));
    double s = 0.0;
    for (std::size_t i = 0; i < band; ++i) s += std::norm(wf.psi[i]) + std::norm(wf.psi[n - 1 - i]);
    return s * wf.grid.h;
}

EvolveResult schrodinger_evolve(const NaturalSystemSpec& spec, const WaveFunction& wf, double dt,
                                std::size_t n_steps, double boundary_threshold) {
    const UnitaryStepper stepper(schrodinger_operator(spec, wf.grid, wf.a), dt, wf.a);
    EvolveResult result{wf, false, 0.0, 0.0};
    double before = result.wf.norm2();
    for (std::size_t k = 0; k < n_steps; ++k) {
        stepper.advance(result.wf.psi);
        const double after = result.wf.norm2();
        if (before > 0.0) result.max_step_norm_drift = std::max(result.max_step_norm_drift, std::abs(after - before) / before);
        before = after;
        const double edge = boundary_mass(result.wf);
        result.boundary_mass = std::max(result.boundary_mass, edge);
    }
    result.boundary_escape = result.boundary_mass > boundary_threshold;
    return result;
}

double mean_position(const WaveFunction& wf) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < wf.psi.size(); ++i) {
        const double w = std::norm(wf.psi[i]);
        num += wf.grid.node(i) * w;
        den += w;
    }
    return num / den;
}

double position_variance(const WaveFunction& wf) {
    const double mean = mean_position(wf);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < wf.psi.size(); ++i) {
        const double w = std::norm(wf.psi[i]);
        const double x = wf.grid.node(i) - mean;
        num += x * x * w;
        den += w;
    }
    return num / den;
}

double expectation(const TridiagonalOperator& op, const ComplexVector& psi, double h) {
    const ComplexVector a = apply_operator(op, psi);
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += (std::conj(psi[i]) * a[i]).real();
    return s * h;
}

}  // namespace varq

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "varq/numerics.hpp"
#include "varq/potential.hpp"

namespace varq {

/// L = (eta/2) d_mu q d^mu q - V(q) in 1+1 dimensions, metric diag(+, -).
struct FieldLagrangianSpec {
    double eta = 1.0;
    Potential potential;
};

/// Periodic grid x in [x_min, x_min + length) with n points.
struct PeriodicGrid {
    double x_min = 0.0;
    double length = 1.0;
    std::size_t n = 3;
    double h = 1.0 / 3.0;

    double node(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * h; }
};

PeriodicGrid build_periodic_grid(double x_min, double length, std::size_t n);

struct FieldState1p1 {
    PeriodicGrid grid;
    RealVector q;
    RealVector pi0;
    double time = 0.0;
};

struct CovariantMomenta {
    double pi0 = 0.0;
    double pi1 = 0.0;
    double H = 0.0;
};

/// (w0, w1) = (d_0 q, d_1 q); pi^mu = eta g^{mu nu} w_nu,
/// H = (pi0^2 - pi1^2) / (2 eta) + V(q).
CovariantMomenta covariant_legendre(const FieldLagrangianSpec& spec, double q, double w0,
                                    double w1);

/// dH/dpi^mu, which inverts covariant_legendre.
std::array<double, 2> covariant_velocity(const FieldLagrangianSpec& spec, double pi0,
                                         double pi1);

/// pi^1 = -eta d_1 q at cell faces i + 1/2.
RealVector spatial_polymomentum(const FieldLagrangianSpec& spec, const FieldState1p1& state);

/// Kick-drift-kick leapfrog for d_0 q = pi0 / eta, d_0 pi0 = -d_1 pi^1 - V'(q).
/// Throws step_rejected when dt > h.
FieldState1p1 ddw_evolve(const FieldLagrangianSpec& spec, const FieldState1p1& state, double dt,
                         std::size_t n_steps);

/// Same as ddw_evolve, recording q at every step (n_steps + 1 snapshots).
std::vector<RealVector> ddw_history(const FieldLagrangianSpec& spec, FieldState1p1& state,
                                    double dt, std::size_t n_steps);

/// Largest residual of eta (d_0^2 - d_1^2) q + V'(q) over a stored history,
/// using fourth-order differences in both directions.
double extremal_embedding_check(const FieldLagrangianSpec& spec,
                                const std::vector<RealVector>& history, const PeriodicGrid& grid,
                                double dt);

/// Mixed tensor T^sigma_nu per node, stored as [T00, T01, T10, T11].
struct EnergyMomentum {
    std::vector<std::array<double, 4>> T;

    double total(std::size_t component, double h) const;
};

EnergyMomentum energy_momentum(const FieldLagrangianSpec& spec, const FieldState1p1& state);

/// Discrete d_mu T^mu_nu from two states one step apart (time-centered).
std::array<double, 2> tensor_divergence_residual(const FieldLagrangianSpec& spec,
                                                 const FieldState1p1& before,
                                                 const FieldState1p1& after, double dt);

/// H_c = pi0^2 / (2 eta) + (eta/2) (d_1 q)^2 + V(q).
double canonical_reduction(const FieldLagrangianSpec& spec, double pi0, double dq_dx1, double q);

/// dH_c/dpi0, the field velocity used by ddw_evolve.
double canonical_velocity(const FieldLagrangianSpec& spec, double pi0);

/// Travelling wave q = A cos(k x - omega t) at t = 0, k = 2 pi mode / length.
FieldState1p1 plane_wave_state(const FieldLagrangianSpec& spec, const PeriodicGrid& grid,
                               double amplitude, int mode, double omega);

/// Angular frequency of the Fourier mode `mode` measured from the unwrapped
/// phase of its complex amplitude over a recorded history.
double measured_frequency(const std::vector<RealVector>& history, const PeriodicGrid& grid,
                          int mode, double dt);

}  // namespace varq

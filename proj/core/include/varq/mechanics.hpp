#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "varq/numerics.hpp"
#include "varq/potential.hpp"

namespace varq {

/// Natural system H = p^2 / (2 m(q)) + V(q) with one configuration coordinate.
struct NaturalSystemSpec {
    ScalarFunction mass;
    ScalarFunction mass_derivative;
    Potential potential;

    /// Mass at q; throws invalid_spec unless strictly positive and finite.
    double mass_at(double q) const;
};

NaturalSystemSpec natural_system(double mass, Potential potential);

struct PhaseState {
    double q = 0.0;
    double p = 0.0;
};

double legendre_hamiltonian(const NaturalSystemSpec& spec, double q, double p);
/// dH/dp
double legendre_velocity(const NaturalSystemSpec& spec, double q, double p);
/// dL/dw for L = m w^2 / 2 - V
double legendre_momentum(const NaturalSystemSpec& spec, double q, double w);
/// dH/dq
double hamiltonian_force_term(const NaturalSystemSpec& spec, double q, double p);

struct FlowResult {
    std::vector<PhaseState> trajectory;  // includes the initial state
    bool escaped = false;
    std::size_t escape_step = 0;
};

/// RK4 integration of Hamilton's equations. Leaving `domain` (or producing a
/// non-finite state) stops the run and is reported in the result.
FlowResult hamilton_flow(const NaturalSystemSpec& spec, PhaseState initial, double dt,
                         std::size_t n_steps,
                         std::optional<std::pair<double, double>> domain = std::nullopt);

struct ClassicalEnsemble {
    Grid1D grid;
    RealVector rho;
    RealVector S;
};

/// Godunov numerical Hamiltonian for p^2 / (2m) from one-sided slopes.
double godunov_kinetic(double p_left, double p_right, double mass);

/// One upwind step of the continuity equation followed by an upwind
/// Hamilton-Jacobi step. Throws step_rejected on CFL violation.
ClassicalEnsemble transport_density(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec,
                                    double dt);

/// Largest |v| dt / h over cell faces.
double transport_courant(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec, double dt);

/// dS/dt + H(q, dS/dq) evaluated with central differences.
RealVector hj_residual(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec,
                       const RealVector& dSdt);

/// Transport with the velocity derived from the multiplier lambda = S + D(rho)
/// of the Lagrangian extended by d(rho) (j/rho) d(rho)/dq, against plain
/// transport. Returns the largest difference in the updated (rho, S).
double lagrangian_equivalence_check(const ClassicalEnsemble& ens, const NaturalSystemSpec& spec,
                                    const ScalarFunction& d_rho, double dt);

struct CentroidTrack {
    RealVector times;
    RealVector centroid;
    RealVector reference;  // hamilton_flow position of the initial mean state
    double max_error = 0.0;
};

/// Transports a narrow Gaussian packet and compares its centroid with the
/// characteristic through its mean. The phase field is reset to the linear
/// profile carrying the ensemble mean momentum every `reseed_interval` time
/// units, keeping the run clear of caustics.
CentroidTrack track_packet(const NaturalSystemSpec& spec, const Grid1D& grid, PhaseState mean,
                           double width, double t_final, double courant,
                           double reseed_interval);

struct BalanceResiduals {
    double hamilton_jacobi = 0.0;
    double continuity = 0.0;
};

/// Residuals of the classical balance pair on a stored history sampled every dt,
/// using time-centered differences at interior time levels.
BalanceResiduals classical_residuals(const std::vector<ClassicalEnsemble>& history,
                                     const NaturalSystemSpec& spec, double dt);

/// t -> -t, S -> -S, rho -> rho applied to a stored history.
std::vector<ClassicalEnsemble> time_reversed(const std::vector<ClassicalEnsemble>& history);

}  // namespace varq

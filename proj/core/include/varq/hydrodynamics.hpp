#pragma once

#include <vector>

#include "varq/mechanics.hpp"
#include "varq/numerics.hpp"

namespace varq {

enum class DiffusionMode { classical, quantum_pole };

/// rho d^2(rho) = (a/2)^2 / rho + g(rho) in the quantum-pole mode, zero in
/// the classical mode. g defaults to zero.
struct DiffusionSpec {
    double a = 1.0;
    ScalarFunction g;
    ScalarFunction g_derivative;
    DiffusionMode mode = DiffusionMode::quantum_pole;

    bool has_regular_part() const { return static_cast<bool>(g); }
};

DiffusionSpec classical_diffusion();
DiffusionSpec quantum_diffusion(double a);

/// rho d^2(rho)
double rho_d_squared(const DiffusionSpec& dspec, double rho);
/// rho d(rho) on the positive branch; equals a/2 at g = 0.
double rho_d(const DiffusionSpec& dspec, double rho);

struct HydroState {
    Grid1D grid;
    RealVector rho;
    RealVector lam;
};

/// i = rho d(rho) (d rho / dq) / m at grid nodes.
RealVector diffusion_current(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                             const Grid1D& grid, const RealVector& rho);

/// rho [ (d lambda)^2 / 2m + V ] + (1/2) rho d^2(rho) (d rho)^2 / m per node.
/// Gradient terms live on cell faces and are shared half-and-half between
/// neighbouring nodes, so h * sum reproduces the discrete energy functional.
RealVector effective_hamiltonian_density(const NaturalSystemSpec& spec,
                                         const DiffusionSpec& dspec, const HydroState& state);

struct MadelungOptions {
    double floor_fraction = 1e-12;
};

/// Quantum potential -(a^2/2) d(m^-1 d sqrt(rho)) / sqrt(rho) on unmasked nodes.
RealVector quantum_potential(const NaturalSystemSpec& spec, double a, const Grid1D& grid,
                             const RealVector& rho, const std::vector<char>& mask);

/// One step: conservative upwind transport of rho with the current lambda,
/// then an upwind Hamilton-Jacobi update of lambda whose density-gradient
/// terms use the freshly transported rho. In the quantum-pole mode lambda is
/// only updated above the density floor and is extended linearly into the
/// masked tails, which keeps the tail velocity field smooth. Throws
/// step_rejected on a masked gap between populated cells, on a Courant number
/// above one, or when dt exceeds the dispersive limit.
HydroState madelung_step(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                         const HydroState& state, double dt, const MadelungOptions& opts = {});

/// Largest stable step for the dispersive coupling, m_min h^2 / a.
double madelung_dispersive_limit(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                                 const Grid1D& grid);

/// Largest difference in the updated (rho, lambda) between the given
/// diffusion mode and the classical mode from the same state.
double diffusion_discrepancy(const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                             const HydroState& state, double dt);

/// Mask of nodes with rho above floor_fraction * max(rho).
std::vector<char> density_mask(const RealVector& rho, double floor_fraction);

/// Residuals of the pair (lambda equation, continuity) on a stored history
/// sampled every dt, restricted to masked-in interior nodes.
BalanceResiduals madelung_residuals(const std::vector<HydroState>& history,
                                    const NaturalSystemSpec& spec, const DiffusionSpec& dspec,
                                    double dt, double floor_fraction = 1e-8);

/// Reverses the order of a history and negates lambda.
std::vector<HydroState> time_reversed(const std::vector<HydroState>& history);

}  // namespace varq

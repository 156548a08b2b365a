#pragma once

#include <vector>

#include "varq/mechanics.hpp"
#include "varq/numerics.hpp"

namespace varq {

struct WaveFunction {
    Grid1D grid;
    ComplexVector psi;
    double a = 1.0;

    double norm2() const { return grid_norm2(psi, grid.h); }
};

struct PolarFields {
    RealVector rho;
    RealVector lam;
    std::vector<char> mask;
};

/// rho = |psi|^2 and lambda = a arg(psi), unwrapped left to right on masked-in
/// cells; the branch restarts after every masked gap.
PolarFields canonical_map_forward(const WaveFunction& wf, double floor_fraction = 1e-12);

/// psi = sqrt(rho) exp(i lambda / a).
WaveFunction canonical_map_inverse(const Grid1D& grid, const RealVector& rho,
                                   const RealVector& lam, double a);

/// P(u, v) = (u^2 + v^2) / 2a
double canonical_density(double u, double v, double a);
/// Lambda(u, v) = a arg(u + i v)
double canonical_phase(double u, double v, double a);
/// d(P, Lambda)/d(u, v) by central differences with step du.
double canonical_jacobian_fd(double u, double v, double a, double du = 1e-6);

/// -(a^2/2) d(m^-1 d .) + V
TridiagonalOperator schrodinger_operator(const NaturalSystemSpec& spec, const Grid1D& grid,
                                         double a);

struct EvolveResult {
    WaveFunction wf;
    bool boundary_escape = false;
    double boundary_mass = 0.0;
    double max_step_norm_drift = 0.0;  // largest relative norm change of a single step
};

/// Probability in the outer 2% of nodes on each side (at least three nodes).
double boundary_mass(const WaveFunction& wf);

EvolveResult schrodinger_evolve(const NaturalSystemSpec& spec, const WaveFunction& wf, double dt,
                                std::size_t n_steps, double boundary_threshold = 1e-8);

double mean_position(const WaveFunction& wf);
double position_variance(const WaveFunction& wf);
/// Re <psi|A|psi> with grid quadrature.
double expectation(const TridiagonalOperator& op, const ComplexVector& psi, double h);

}  // namespace varq

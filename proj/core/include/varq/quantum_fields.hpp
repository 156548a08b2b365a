#pragma once

#include <cstddef>
#include <vector>

#include "varq/hydrodynamics.hpp"
#include "varq/numerics.hpp"
#include "varq/potential.hpp"

namespace varq {

struct QFieldSpec {
    double eta = 1.0;
    Potential potential;
    double f = 1.0;
};

/// Checks eta, f > 0 and that V is nonnegative on the grid and rises toward
/// both ends. Throws invalid_spec otherwise.
void validate(const QFieldSpec& spec, const Grid1D& grid);

/// -(f^2 / 2 eta) d^2/dq^2 + V
TridiagonalOperator field_operator(const QFieldSpec& spec, const Grid1D& grid);

struct VacuumSpectrum {
    Grid1D grid;
    RealVector w;
    std::vector<RealVector> psi;  // h-normalized, psi[0] >= 0
};

/// Lowest k eigenpairs. Throws invalid_argument when an eigenfunction has not
/// decayed to 1e-6 of its peak at the grid ends.
VacuumSpectrum vacuum_spectrum(const QFieldSpec& spec, const Grid1D& grid, std::size_t k);

/// Largest |<psi_r|psi_s> - delta_rs|.
double orthonormality_defect(const VacuumSpectrum& vac);

/// delta^sigma_nu * ws as a dim x dim row-major matrix.
std::vector<double> invariant_state_tensor(double ws, std::size_t dim = 2);

struct Fluctuations {
    double mean = 0.0;
    double variance = 0.0;
};

Fluctuations field_fluctuations(const VacuumSpectrum& vac);

struct SpaceIndependentResult {
    ComplexVector psi;              // final amplitude
    RealVector times;
    RealVector mean_energy;         // h sum Re(psi* H psi) per recorded time
    RealVector energy_density;      // final epsilon^Q per node (0 where masked)
    RealVector energy_density_min;  // per recorded time, over masked-in nodes
    RealVector energy_density_max;
    std::vector<HydroState> history;  // (rho, lambda = f arg psi) per recorded time
};

/// Evolves i f d_0 psi = H psi with Cayley steps; records every `record_every`
/// steps (and the last step).
SpaceIndependentResult space_independent_evolve(const QFieldSpec& spec, const Grid1D& grid,
                                                const ComplexVector& psi0, double dt,
                                                std::size_t n_steps,
                                                std::size_t record_every = 1,
                                                double floor_fraction = 1e-10);

/// epsilon^Q = Re(psi* H psi) / |psi|^2 on nodes above the floor, 0 elsewhere.
RealVector local_energy_density(const QFieldSpec& spec, const Grid1D& grid,
                                const ComplexVector& psi, double floor_fraction = 1e-10);

struct RandomEnergyDensity {
    RealVector energy;    // epsilon^Q
    RealVector momentum;  // P^Q
};

/// Pointwise energy and momentum densities from (rho, lambda^0, lambda^m).
RandomEnergyDensity random_energy_density(const QFieldSpec& spec, const Grid1D& grid,
                                          const RealVector& rho, const RealVector& lam0,
                                          const RealVector& lam_m, double floor_fraction = 1e-10);

struct ConfinedOptions {
    std::size_t modes = 8;
    double r_min = 0.0;    // 0 selects 0.5 f / (w1 - w0)
    double r_max = 0.0;    // 0 selects 150 f / (w1 - w0)
    std::size_t radial_points = 5000;
    double tol = 1e-8;
    std::size_t max_iterations = 200;
    double source_floor = 1e-30;  // nodes with psi0 below this fraction of its peak carry no source
};

/// Modal representation of the conjugate pair. phi = sum_n (seed_n + da_n) psi_n and
/// phi~ = psi_0 + sum_n db_n psi_n, with seed_n(r) = c_n exp(-(w_n - w0) r / f).
struct RadialPair {
    double f = 1.0;
    RealVector r;
    RealVector c;
    RealVector eps;                  // w_n - w0
    std::vector<RealVector> da;      // [mode][radial index]
    std::vector<RealVector> db;
    std::vector<double> residual_log;  // accepted iterations
    std::size_t iterations = 0;
    std::size_t rejected = 0;

    double seed(std::size_t mode, std::size_t j) const;
    /// Modal coefficients of phi - psi0 and phi~ - psi0 at radial index j.
    RealVector phi_deviation(std::size_t j) const;
    RealVector phi_tilde_deviation(std::size_t j) const;
};

RealVector phi_field(const RadialPair& pair, const VacuumSpectrum& vac, std::size_t j);
RealVector phi_tilde_field(const RadialPair& pair, const VacuumSpectrum& vac, std::size_t j);
/// rho - psi0^2 = psi0 (D + D~) + D D~ without cancellation.
RealVector density_excess(const RadialPair& pair, const VacuumSpectrum& vac, std::size_t j);

/// Successive approximation for the conjugate radial pair in the truncated
/// eigenbasis. phi's excited modes start from the seed at r_min and decay
/// forward; phi~ and phi's ground mode are pinned at large r.
RadialPair confined_solve(const QFieldSpec& spec, const VacuumSpectrum& vac, const RealVector& c,
                          const ConfinedOptions& opts = {});

/// First successive correction about the seed pair at large r, with the
/// operator's action on the correction neglected:
/// d phi = int_r^inf (1/r') log(phi0/phi0~) phi0 dr',
/// d phi~ = -int_r^inf (1/r') log(phi0/phi0~) phi0~ dr'.
/// Returns modal coefficients [mode][radial index] for both corrections.
struct LeadingCorrection {
    RealVector r;
    std::vector<RealVector> dphi;
    std::vector<RealVector> dphi_tilde;
};

LeadingCorrection leading_correction(const QFieldSpec& spec, const VacuumSpectrum& vac,
                                     const RealVector& c, const RealVector& r,
                                     double source_floor = 1e-30);

/// Coefficient C of C exp(-eps r / f) / r in a radial profile, from a
/// polynomial fit in 1/r of profile * r * exp(eps r / f) over [r_lo, r_hi].
double inverse_r_coefficient(const RealVector& r, const RealVector& profile, double eps, double f,
                             double r_lo, double r_hi, std::size_t degree = 3);

struct ConfinementReport {
    double fitted_rate = 0.0;
    double radius = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t points = 0;
};

/// h * sum |rho - psi0^2| per radial node.
RealVector tail_integral(const RadialPair& pair, const VacuumSpectrum& vac);

/// Least-squares slope of log(tail) against r over [lo_fraction, hi_fraction] * r_max,
/// restricted to tail values above tail_floor. Throws fit_window_empty with
/// fewer than eight usable points.
ConfinementReport confinement_report(const RadialPair& pair, const VacuumSpectrum& vac,
                                     double f, double lo_fraction = 0.4,
                                     double hi_fraction = 0.8, double tail_floor = 1e-280);

/// Residuals of the space-independent balance pair (continuity and the
/// lambda equation with the quantum potential) on a stored history.
BalanceResiduals space_independent_residuals(const QFieldSpec& spec,
                                             const std::vector<HydroState>& history, double dt,
                                             double floor_fraction = 1e-8);

/// x0 -> -x0, lambda -> -lambda, rho -> rho.
std::vector<HydroState> spacetime_inverted(const std::vector<HydroState>& history);

}  // namespace varq

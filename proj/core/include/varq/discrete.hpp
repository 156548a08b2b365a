#pragma once

#include <cstddef>
#include <vector>

#include "varq/numerics.hpp"

namespace varq {

/// Dense row-major square matrix.
template <typename T>
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<T> data;

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t size) : n(size), data(size * size, T{}) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

using RealMatrix = SquareMatrix<double>;
using ComplexMatrix = SquareMatrix<cplx>;

struct SpinSystemSpec {
    std::size_t N = 2;
    RealMatrix U;      // symmetric
    RealMatrix theta;  // antisymmetric, zero diagonal
    double a = 1.0;
    double b = 1.0;
};

/// Throws invalid_spec when symmetry requirements fail.
void validate(const SpinSystemSpec& spec);

struct SpinState {
    ComplexVector psi;
};

/// h = -b U exp(-i theta / a), elementwise.
ComplexMatrix build_hamiltonian(const SpinSystemSpec& spec);

/// psi(t) = exp(-i h t / a) psi(0) through the hermitian eigendecomposition of h.
SpinState propagate(const SpinSystemSpec& spec, const SpinState& state, double t);

/// Same as propagate for a list of times, reusing one eigendecomposition.
std::vector<SpinState> propagate_series(const SpinSystemSpec& spec, const SpinState& state,
                                        const RealVector& times);

/// Real parts of the eigenvalues of h in ascending order.
RealVector hamiltonian_spectrum(const SpinSystemSpec& spec);

/// <psi|h|psi>
double spin_energy(const SpinSystemSpec& spec, const SpinState& state);

struct LocalState {
    RealVector p;
    RealVector lam;
};

/// Time derivatives of the populations and multipliers. Pair fluxes are
/// accumulated antisymmetrically, so the populations' rates sum to zero.
LocalState local_form_rates(const SpinSystemSpec& spec, const LocalState& s);

/// RK4 step of the local form. Throws step_rejected when a population is at
/// or below `floor` at any stage.
LocalState local_form_step(const SpinSystemSpec& spec, const LocalState& s, double dt,
                           double floor = 1e-12);

/// gamma_ab = sqrt(p_a) U_ab sqrt(p_b) (-b/a) sin(eta_ab / a) with
/// eta_ab = lambda_a - lambda_b + theta_ab.
RealMatrix gamma_currents(const SpinSystemSpec& spec, const RealVector& p, const RealVector& lam);

/// pdot_a + sum_b (gamma_ab - gamma_ba)
RealVector balance_residual(const SpinSystemSpec& spec, const RealVector& p,
                            const RealVector& lam, const RealVector& pdot);

/// Exact d|psi_a|^2/dt from the Schrodinger form.
RealVector population_rates(const SpinSystemSpec& spec, const SpinState& state);

/// p = |psi|^2, lambda = a arg psi (principal branch).
LocalState to_local(const SpinState& state, double a);
SpinState from_local(const LocalState& s, double a);

}  // namespace varq

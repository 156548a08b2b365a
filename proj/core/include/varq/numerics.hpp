#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "varq/error.hpp"

namespace varq {

using cplx = std::complex<double>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<cplx>;
using ScalarFunction = std::function<double(double)>;

/// Uniform grid on [q_min, q_max] with n nodes.
struct Grid1D {
    double q_min = 0.0;
    double q_max = 1.0;
    std::size_t n = 3;
    double h = 0.5;

    double node(std::size_t i) const noexcept { return q_min + static_cast<double>(i) * h; }
    RealVector nodes() const;
};

Grid1D build_grid(double q_min, double q_max, std::int64_t n);

/// Symmetric tridiagonal matrix. `h` is the quadrature weight used to
/// normalize eigenvectors (h * sum v^2 = 1).
struct TridiagonalOperator {
    RealVector diagonal;
    RealVector off_diagonal;
    double h = 1.0;

    std::size_t size() const noexcept { return diagonal.size(); }
};

/// Discretizes -(c/2) d/dq (mu(q) d/dq .) + V(q) on the grid nodes.
/// mu is sampled at cell faces; the field vanishes one spacing beyond each end.
TridiagonalOperator diffusion_operator(const Grid1D& grid, double c, const ScalarFunction& mu,
                                       const ScalarFunction& potential);

RealVector apply_operator(const TridiagonalOperator& op, const RealVector& v);
ComplexVector apply_operator(const TridiagonalOperator& op, const ComplexVector& v);

struct EigenPair {
    double value = 0.0;
    RealVector vector;
};

/// Lowest k eigenpairs by Sturm-sequence bisection and inverse iteration.
/// The ground state is returned nonnegative; every other vector has a
/// positive outermost lobe on the right.
std::vector<EigenPair> eigensolve_lowest(const TridiagonalOperator& op, std::size_t k);

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(const TridiagonalOperator& op, double x);

/// Cayley step (1 + i dt A / 2a) psi+ = (1 - i dt A / 2a) psi, factorized once.
class UnitaryStepper {
public:
    UnitaryStepper(const TridiagonalOperator& op, double dt, double a);
    void advance(ComplexVector& psi) const;
    double dt() const noexcept { return dt_; }

private:
    TridiagonalOperator op_;
    double dt_;
    double tau_;
    ComplexVector inv_pivot_;
    ComplexVector upper_;
};

ComplexVector unitary_step(const TridiagonalOperator& op, const ComplexVector& psi, double dt,
                           double a);

using VectorField = std::function<RealVector(const RealVector&)>;

RealVector rk4_step(const VectorField& f, const RealVector& state, double dt);

/// h * sum(values).
double grid_integral(const RealVector& values, double h);
double grid_norm2(const ComplexVector& psi, double h);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const RealVector& x, const RealVector& y);

/// Least-squares coefficients c_0..c_deg of sum c_j x^j.
RealVector fit_polynomial(const RealVector& x, const RealVector& y, std::size_t degree);

/// Mean spacing of upward zero crossings of a uniformly sampled signal,
/// located by linear interpolation. Returns 0 when fewer than two crossings exist.
double crossing_period(const RealVector& values, double dt);

}  // namespace varq

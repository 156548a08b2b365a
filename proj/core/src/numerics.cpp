#include "varq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

namespace varq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool all_finite(const RealVector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Partial-pivot LU of a shifted symmetric tridiagonal matrix, stored in the
// layout of LAPACK's gttrf: l (multipliers), u0 (diagonal), u1, u2 (first and
// second super-diagonals), and a row-swap flag per elimination step.
struct TridiagonalLU {
    RealVector l, u0, u1, u2;
    std::vector<char> swapped;

    TridiagonalLU(const TridiagonalOperator& op, double shift, double tiny) {
        const std::size_t n = op.size();
        u0.resize(n);
        u1.assign(n, 0.0);
        u2.assign(n, 0.0);
        l.assign(n, 0.0);
        swapped.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) u0[i] = op.diagonal[i] - shift;
        for (std::size_t i = 0; i + 1 < n; ++i) u1[i] = op.off_diagonal[i];
        RealVector sub(op.off_diagonal);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double below_diag = op.diagonal[i + 1] - shift;
            double below_super = (i + 2 < n) ? op.off_diagonal[i + 1] : 0.0;
            if (std::abs(u0[i]) >= std::abs(sub[i])) {
                if (u0[i] == 0.0) u0[i] = tiny;
                l[i] = sub[i] / u0[i];
                u0[i + 1] = below_diag - l[i] * u1[i];
                u1[i + 1] = below_super;
            } else {
                swapped[i] = 1;
                l[i] = u0[i] / sub[i];
                u0[i] = sub[i];
                const double t = u1[i];
                u1[i] = below_diag;
                u0[i + 1] = t - l[i] * below_diag;
                u2[i] = below_super;
                u1[i + 1] = -l[i] * below_super;
            }
        }
        if (n > 0 && u0[n - 1] == 0.0) u0[n - 1] = tiny;
        for (auto& d : u0)
            if (std::abs(d) < tiny) d = std::copysign(tiny, d == 0.0 ? 1.0 : d);
    }

    void solve(RealVector& b) const {
        const std::size_t n = u0.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (swapped[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= l[i] * b[i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double acc = b[i];
            if (i + 1 < n) acc -= u1[i] * b[i + 1];
            if (i + 2 < n) acc -= u2[i] * b[i + 2];
            b[i] = acc / u0[i];
        }
    }
};

double max_abs(const RealVector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void normalize_h(RealVector& v, double h) {
    double s = 0.0;
    for (double x : v) s += x * x;
    const double scale = 1.0 / std::sqrt(s * h);
    for (auto& x : v) x *= scale;
}

void fix_sign(RealVector& v, bool ground) {
    const double peak = max_abs(v);
    if (ground) {
        const double total = std::accumulate(v.begin(), v.end(), 0.0);
        if (total < 0.0)
            for (auto& x : v) x = -x;
        for (auto& x : v)
            if (x < 0.0 && std::abs(x) < 1e-10 * peak) x = 0.0;
        return;
    }
    for (std::size_t i = v.size(); i-- > 0;) {
        if (std::abs(v[i]) > 1e-3 * peak) {
            if (v[i] < 0.0)
                for (auto& x : v) x = -x;
            return;
        }
    }
}

}  // namespace

RealVector Grid1D::nodes() const {
    RealVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = node(i);
    return x;
}

Grid1D build_grid(double q_min, double q_max, std::int64_t n) {
    if (!std::isfinite(q_min) || !std::isfinite(q_max))
        throw Error(ErrorKind::invalid_argument, "grid bounds must be finite");
    if (!(q_min < q_max)) throw Error(ErrorKind::invalid_argument, "grid requires q_min < q_max");
    if (n < 3) throw Error(ErrorKind::invalid_argument, "grid requires at least 3 nodes");
    Grid1D g;
    g.q_min = q_min;
    g.q_max = q_max;
    g.n = static_cast<std::size_t>(n);
    g.h = (q_max - q_min) / static_cast<double>(n - 1);
    return g;
}

TridiagonalOperator diffusion_operator(const Grid1D& grid, double c, const ScalarFunction& mu,
                                       const ScalarFunction& potential) {
    TridiagonalOperator op;
    op.h = grid.h;
    op.diagonal.resize(grid.n);
    op.off_diagonal.resize(grid.n - 1);
    const double scale = 0.5 * c / (grid.h * grid.h);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double q = grid.node(i);
        const double left = mu(q - 0.5 * grid.h);
        const double right = mu(q + 0.5 * grid.h);
        op.diagonal[i] = scale * (left + right) + potential(q);
        if (i + 1 < grid.n) op.off_diagonal[i] = -scale * right;
    }
    if (!all_finite(op.diagonal) || !all_finite(op.off_diagonal))
        throw Error(ErrorKind::invalid_spec, "operator coefficients are not finite on the grid");
    return op;
}

RealVector apply_operator(const TridiagonalOperator& op, const RealVector& v) {
    const std::size_t n = op.size();
    RealVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = op.diagonal[i] * v[i];
        if (i > 0) acc += op.off_diagonal[i - 1] * v[i - 1];
        if (i + 1 < n) acc += op.off_diagonal[i] * v[i + 1];
        out[i] = acc;
    }
    return out;
}

ComplexVector apply_operator(const TridiagonalOperator& op, const ComplexVector& v) {
    const std::size_t n = op.size();
    ComplexVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = op.diagonal[i] * v[i];
        if (i > 0) acc += op.off_diagonal[i - 1] * v[i - 1];
        if (i + 1 < n) acc += op.off_diagonal[i] * v[i + 1];
        out[i] = acc;
    }
    return out;
}

std::size_t sturm_count(const TridiagonalOperator& op, double x) {
    const std::size_t n = op.size();
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double b2 = i > 0 ? op.off_diagonal[i - 1] * op.off_diagonal[i - 1] : 0.0;
        d = op.diagonal[i] - x - (i > 0 ? b2 / d : 0.0);
        if (d == 0.0) d = -kEps * (std::abs(x) + 1.0);
        if (d < 0.0) ++count;
    }
    return count;
}

std::vector<EigenPair> eigensolve_lowest(const TridiagonalOperator& op, std::size_t k) {
    const std::size_t n = op.size();
    if (n == 0 || k == 0 || k > n)
        throw Error(ErrorKind::invalid_argument, "eigensolve_lowest requires 1 <= k <= n");
    if (op.off_diagonal.size() + 1 != n)
        throw Error(ErrorKind::invalid_argument, "off-diagonal length must be n - 1");
    if (!all_finite(op.diagonal) || !all_finite(op.off_diagonal))
        throw Error(ErrorKind::invalid_argument, "operator has non-finite entries");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::abs(op.off_diagonal[i - 1]);
        if (i + 1 < n) radius += std::abs(op.off_diagonal[i]);
        lo = std::min(lo, op.diagonal[i] - radius);
        hi = std::max(hi, op.diagonal[i] + radius);
    }
    const double norm = std::max(std::abs(lo), std::abs(hi));
    const double abs_tol = 2.0 * kEps * std::max(norm, 1e-300);

    std::vector<EigenPair> pairs;
    pairs.reserve(k);
    double floor = lo;
    for (std::size_t r = 0; r < k; ++r) {
        double a = floor;
        double b = hi;
        for (int it = 0; it < 400 && b - a > abs_tol; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (sturm_count(op, mid) > r) b = mid; else a = mid;
        }
        const double value = 0.5 * (a + b);
        floor = a;

        // Inverse iteration seeded by a deterministic non-symmetric vector.
        const double tiny = kEps * std::max(norm, 1.0);
        const TridiagonalLU lu(op, value, tiny);
        RealVector v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.37 * static_cast<double>(i));
        double residual = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 8; ++it) {
            lu.solve(v);
            for (const auto& prev : pairs) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += prev.vector[i] * v[i];
                dot *= op.h;
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * prev.vector[i];
            }
            normalize_h(v, op.h);
            const RealVector av = apply_operator(op, v);
            residual = 0.0;
            for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(av[i] - value * v[i]));
            if (it >= 1 && residual <= 1e-9 * (1.0 + std::abs(value))) break;
        }
        if (!std::isfinite(residual) || residual > 1e-8 * (1.0 + std::abs(value))) {
            throw Error(ErrorKind::numerical_failure,
                        "inverse iteration did not converge for eigenpair " + std::to_string(r) +
                            " (eigenvalue " + std::to_string(value) + ", residual " +
                            std::to_string(residual) + ")");
        }
        fix_sign(v, r == 0);
        pairs.push_back({value, std::move(v)});
    }
    return pairs;
}

UnitaryStepper::UnitaryStepper(const TridiagonalOperator& op, double dt, double a)
    : op_(op), dt_(dt), tau_(0.0) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::invalid_argument, "a must be positive");
    if (!std::isfinite(dt)) throw Error(ErrorKind::invalid_argument, "dt must be finite");
    tau_ = dt / (2.0 * a);
    const std::size_t n = op_.size();
    inv_pivot_.resize(n);
    upper_.resize(n);
    const cplx i_tau(0.0, tau_);
    cplx prev_upper = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx pivot = 1.0 + i_tau * op_.diagonal[i];
        if (i > 0) pivot -= i_tau * op_.off_diagonal[i - 1] * prev_upper;
        if (pivot == 0.0 || !std::isfinite(std::abs(pivot)))
            throw Error(ErrorKind::numerical_failure, "singular Cayley system", i);
        inv_pivot_[i] = 1.0 / pivot;
        upper_[i] = (i + 1 < n) ? i_tau * op_.off_diagonal[i] * inv_pivot_[i] : cplx(0.0);
        prev_upper = upper_[i];
    }
}

void UnitaryStepper::advance(ComplexVector& psi) const {
    const std::size_t n = op_.size();
    if (psi.size() != n) throw Error(ErrorKind::invalid_argument, "state length does not match operator");
    if (tau_ == 0.0) return;
    const cplx i_tau(0.0, tau_);
    // rhs = (1 - i tau A) psi, computed in place with a one-entry lag.
    cplx prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = op_.diagonal[i] * psi[i];
        if (i > 0) acc += op_.off_diagonal[i - 1] * prev;
        if (i + 1 < n) acc += op_.off_diagonal[i] * psi[i + 1];
        prev = psi[i];
        psi[i] -= i_tau * acc;
    }
    // Forward sweep then back substitution.
    for (std::size_t i = 0; i < n; ++i) {
        cplx r = psi[i];
        if (i > 0) r -= i_tau * op_.off_diagonal[i - 1] * psi[i - 1];
        psi[i] = r * inv_pivot_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) psi[i] -= upper_[i] * psi[i + 1];
}

ComplexVector unitary_step(const TridiagonalOperator& op, const ComplexVector& psi, double dt,
                           double a) {
    const UnitaryStepper stepper(op, dt, a);
    ComplexVector out = psi;
    stepper.advance(out);
    return out;
}

RealVector rk4_step(const VectorField& f, const RealVector& state, double dt) {
    auto eval = [&f](const RealVector& x) {
        RealVector d = f(x);
        if (d.size() != x.size() || !all_finite(d))
            throw Error(ErrorKind::numerical_failure, "vector field returned a non-finite derivative");
        return d;
    };
    const std::size_t n = state.size();
    const RealVector k1 = eval(state);
    RealVector tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    const RealVector k2 = eval(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    const RealVector k3 = eval(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
    const RealVector k4 = eval(tmp);
    RealVector out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

double grid_integral(const RealVector& values, double h) {
    return h * std::accumulate(values.begin(), values.end(), 0.0);
}

double grid_norm2(const ComplexVector& psi, double h) {
    double s = 0.0;
    for (const auto& z : psi) s += std::norm(z);
    return h * s;
}

LineFit fit_line(const RealVector& x, const RealVector& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) throw Error(ErrorKind::invalid_argument, "line fit needs two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::invalid_argument, "line fit needs distinct abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

RealVector fit_polynomial(const RealVector& x, const RealVector& y, std::size_t degree) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n <= degree) throw Error(ErrorKind::invalid_argument, "polynomial fit needs more points than the degree");
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            A(i, j) = p;
            p *= x[static_cast<std::size_t>(i)];
        }
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    return RealVector(c.data(), c.data() + c.size());
}

double crossing_period(const RealVector& values, double dt) {
    RealVector crossings;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        if (values[i] < 0.0 && values[i + 1] >= 0.0) {
            const double frac = values[i] / (values[i] - values[i + 1]);
            crossings.push_back((static_cast<double>(i) + frac) * dt);
        }
    }
    if (crossings.size() < 2) return 0.0;
    return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

}  // namespace varq

#include "varq/discrete.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace varq {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXcd to_eigen(const ComplexMatrix& m) {
    MatrixXcd out(m.n, m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) out(i, j) = m(i, j);
    return out;
}

void check_sizes(const SpinSystemSpec& spec, std::size_t p, std::size_t lam) {
    if (p != spec.N || lam != spec.N)
        throw Error(ErrorKind::invalid_argument, "vector length does not match N");
}

double eta(const SpinSystemSpec& spec, const RealVector& lam, std::size_t i, std::size_t j) {
    return lam[i] - lam[j] + spec.theta(i, j);
}

struct Eigenbasis {
    Eigen::VectorXd values;
    MatrixXcd vectors;
};

Eigenbasis diagonalize(const SpinSystemSpec& spec) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(to_eigen(build_hamiltonian(spec)));
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::numerical_failure, "hermitian eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

SpinState evolve_in_basis(const Eigenbasis& basis, const VectorXcd& coeffs, double a, double t) {
    VectorXcd phased(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
        phased(k) = std::exp(cplx(0.0, -basis.values(k) * t / a)) * coeffs(k);
    const VectorXcd psi = basis.vectors * phased;
    return {ComplexVector(psi.data(), psi.data() + psi.size())};
}

VectorXcd as_eigen(const SpinState& s) {
    return Eigen::Map<const VectorXcd>(s.psi.data(), static_cast<Eigen::Index>(s.psi.size()));
}

}  // namespace

void validate(const SpinSystemSpec& spec) {
    if (spec.N < 2) throw Error(ErrorKind::invalid_spec, "N must be at least 2");
    if (spec.U.n != spec.N || spec.theta.n != spec.N)
        throw Error(ErrorKind::invalid_spec, "U and theta must be N x N");
    if (!(spec.a > 0.0)) throw Error(ErrorKind::invalid_spec, "a must be positive");
    if (!std::isfinite(spec.b)) throw Error(ErrorKind::invalid_spec, "b must be finite");
    for (std::size_t i = 0; i < spec.N; ++i) {
        if (spec.theta(i, i) != 0.0)
            throw Error(ErrorKind::invalid_spec, "theta diagonal must vanish");
        for (std::size_t j = i + 1; j < spec.N; ++j) {
            if (spec.U(i, j) != spec.U(j, i))
                throw Error(ErrorKind::invalid_spec,
                            "U not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            if (spec.theta(i, j) != -spec.theta(j, i))
                throw Error(ErrorKind::invalid_spec,
                            "theta not antisymmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
    }
}

ComplexMatrix build_hamiltonian(const SpinSystemSpec& spec) {
    validate(spec);
    ComplexMatrix h(spec.N);
    for (std::size_t i = 0; i < spec.N; ++i) {
        h(i, i) = -spec.b * spec.U(i, i);
        for (std::size_t j = i + 1; j < spec.N; ++j) {
            h(i, j) = -spec.b * spec.U(i, j) * std::exp(cplx(0.0, -spec.theta(i, j) / spec.a));
            h(j, i) = std::conj(h(i, j));
        }
    }
    return h;
}

SpinState propagate(const SpinSystemSpec& spec, const SpinState& state, double t) {
    return propagate_series(spec, state, {t}).front();
}

std::vector<SpinState> propagate_series(const SpinSystemSpec& spec, const SpinState& state,
                                        const RealVector& times) {
    if (state.psi.size() != spec.N) throw Error(ErrorKind::invalid_argument, "state length does not match N");
    const Eigenbasis basis = diagonalize(spec);
    const VectorXcd coeffs = basis.vectors.adjoint() * as_eigen(state);
    std::vector<SpinState> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!std::isfinite(t)) throw Error(ErrorKind::invalid_argument, "time must be finite");
        out.push_back(t == 0.0 ? state : evolve_in_basis(basis, coeffs, spec.a, t));
    }
    return out;
}

RealVector hamiltonian_spectrum(const SpinSystemSpec& spec) {
    const Eigenbasis basis = diagonalize(spec);
    return RealVector(basis.values.data(), basis.values.data() + basis.values.size());
}

double spin_energy(const SpinSystemSpec& spec, const SpinState& state) {
    const VectorXcd psi = as_eigen(state);
    return psi.dot(to_eigen(build_hamiltonian(spec)) * psi).real();
}

LocalState local_form_rates(const SpinSystemSpec& spec, const LocalState& s) {
    check_sizes(spec, s.p.size(), s.lam.size());
    const std::size_t n = spec.N;
    LocalState r{RealVector(n, 0.0), RealVector(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        r.lam[i] += spec.b * spec.U(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double e = eta(spec, s.lam, i, j) / spec.a;
            const double root = std::sqrt(s.p[i] * s.p[j]);
            const double flow = 2.0 * spec.b / spec.a * spec.U(i, j) * root * std::sin(e);
            r.p[i] += flow;
            r.p[j] -= flow;
            const double c = spec.b * spec.U(i, j) * std::cos(e);
            r.lam[i] += c * std::sqrt(s.p[j] / s.p[i]);
            r.lam[j] += c * std::sqrt(s.p[i] / s.p[j]);
        }
    }
    return r;
}

LocalState local_form_step(const SpinSystemSpec& spec, const LocalState& s, double dt, double floor) {
    const std::size_t n = spec.N;
    auto rates = [&](const LocalState& x) {
        for (std::size_t i = 0; i < n; ++i)
            if (!(x.p[i] > floor))
                throw Error(ErrorKind::step_rejected,
                            "population " + std::to_string(i) + " at or below the floor", i);
        return local_form_rates(spec, x);
    };
    auto shifted = [&](const LocalState& k, double c) {
        LocalState x = s;
        for (std::size_t i = 0; i < n; ++i) {
            x.p[i] += c * k.p[i];
            x.lam[i] += c * k.lam[i];
        }
        return x;
    };
    const LocalState k1 = rates(s);
    const LocalState k2 = rates(shifted(k1, 0.5 * dt));
    const LocalState k3 = rates(shifted(k2, 0.5 * dt));
    const LocalState k4 = rates(shifted(k3, dt));
    LocalState out = s;
    for (std::size_t i = 0; i < n; ++i) {
        out.p[i] += dt / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
        out.lam[i] += dt / 6.0 * (k1.lam[i] + 2.0 * k2.lam[i] + 2.0 * k3.lam[i] + k4.lam[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!(out.p[i] > floor))
            throw Error(ErrorKind::step_rejected, "population " + std::to_string(i) + " at or below the floor", i);
    return out;
}

RealMatrix gamma_currents(const SpinSystemSpec& spec, const RealVector& p, const RealVector& lam) {
    check_sizes(spec, p.size(), lam.size());
    RealMatrix g(spec.N);
    for (std::size_t i = 0; i < spec.N; ++i)
        for (std::size_t j = 0; j < spec.N; ++j)
            g(i, j) = std::sqrt(p[i]) * spec.U(i, j) * std::sqrt(p[j]) * (-spec.b / spec.a) *
                      std::sin(eta(spec, lam, i, j) / spec.a);
    return g;
}

RealVector balance_residual(const SpinSystemSpec& spec, const RealVector& p, const RealVector& lam,
                            const RealVector& pdot) {
    if (pdot.size() != spec.N) throw Error(ErrorKind::invalid_argument, "rate length does not match N");
    const RealMatrix g = gamma_currents(spec, p, lam);
    RealVector out(spec.N);
    for (std::size_t i = 0; i < spec.N; ++i) {
        out[i] = pdot[i];
        for (std::size_t j = 0; j < spec.N; ++j) out[i] += g(i, j) - g(j, i);
    }
    return out;
}

RealVector population_rates(const SpinSystemSpec& spec, const SpinState& state) {
    const VectorXcd psi = as_eigen(state);
    const VectorXcd hpsi = to_eigen(build_hamiltonian(spec)) * psi;
    RealVector out(spec.N);
    // i a psi' = h psi, so d|psi|^2/dt = (2/a) Im(conj(psi) h psi)
    for (std::size_t i = 0; i < spec.N; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out[i] = 2.0 / spec.a * (std::conj(psi(k)) * hpsi(k)).imag();
    }
    return out;
}

LocalState to_local(const SpinState& state, double a) {
    LocalState s{RealVector(state.psi.size()), RealVector(state.psi.size())};
    for (std::size_t i = 0; i < state.psi.size(); ++i) {
        s.p[i] = std::norm(state.psi[i]);
        s.lam[i] = a * std::arg(state.psi[i]);
    }
    return s;
}

SpinState from_local(const LocalState& s, double a) {
    if (s.p.size() != s.lam.size()) throw Error(ErrorKind::invalid_argument, "p and lambda lengths differ");
    SpinState out{ComplexVector(s.p.size())};
    for (std::size_t i = 0; i < s.p.size(); ++i) {
        if (!(s.p[i] >= 0.0)) throw Error(ErrorKind::invalid_state, "population must be nonnegative", i);
        out.psi[i] = std::polar(std::sqrt(s.p[i]), s.lam[i] / a);
    }
    return out;
}

}  // namespace varq

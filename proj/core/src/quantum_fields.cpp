#include "varq/quantum_fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "varq/mechanics.hpp"

namespace varq {

namespace {

using Eigen::MatrixXd;

void check_field_spec(const QFieldSpec& spec) {
    if (!(spec.eta > 0.0)) throw Error(ErrorKind::invalid_spec, "eta must be positive");
    if (!(spec.f > 0.0)) throw Error(ErrorKind::invalid_spec, "f must be positive");
    if (!spec.potential.value) throw Error(ErrorKind::invalid_spec, "potential is not set");
}

NaturalSystemSpec as_natural(const QFieldSpec& spec) { return natural_system(spec.eta, spec.potential); }

double wrapped(double d, double period) { return std::remainder(d, period); }

// Central difference with one-sided ends.
double gradient_at(const RealVector& v, std::size_t i, double h) {
    const std::size_t n = v.size();
    if (i == 0) return (v[1] - v[0]) / h;
    if (i + 1 == n) return (v[n - 1] - v[n - 2]) / h;
    return (v[i + 1] - v[i - 1]) / (2.0 * h);
}

MatrixXd basis_matrix(const VacuumSpectrum& vac, std::size_t modes) {
    MatrixXd P(static_cast<Eigen::Index>(vac.grid.n), static_cast<Eigen::Index>(modes));
    for (std::size_t m = 0; m < modes; ++m)
        for (std::size_t i = 0; i < vac.grid.n; ++i)
            P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = vac.psi[m][i];
    return P;
}

// Weights of the left and right samples when a linearly interpolated source is
// integrated against exp(-x t) over one cell of unit length, measured from
// the end the kernel peaks at.
struct CellWeights {
    double near = 0.0;
    double far = 0.0;
};

CellWeights exponential_weights(double x) {
    if (x < 1e-4) return {0.5 - x / 6.0 + x * x / 24.0, 0.5 - x / 3.0 + x * x / 8.0};
    const double e = std::exp(-x);
    const double phi = (1.0 - e) / x;
    const double far = (phi - e) / x;
    return {phi - far, far};
}

std::vector<char> source_mask(const VacuumSpectrum& vac, double floor) {
    const RealVector& g = vac.psi[0];
    const double peak = *std::max_element(g.begin(), g.end());
    std::vector<char> mask(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) mask[i] = g[i] > floor * peak ? 1 : 0;
    return mask;
}

struct ConfinedWork {
    std::size_t K = 0;
    std::size_t Nr = 0;
    double f = 1.0;
    double h = 1.0;
    MatrixXd P;       // n x K
    MatrixXd seed;    // K x Nr, excited rows only
    RealVector r;
    RealVector eps;
    std::vector<char> mask;
    std::vector<std::vector<CellWeights>> weights;  // [mode][cell]
    std::vector<RealVector> decay;                  // [mode][cell]
};

// One successive-approximation sweep: new modal deviations from the current ones.
void sweep(const ConfinedWork& w, const MatrixXd& da, const MatrixXd& db, MatrixXd& nda, MatrixXd& ndb) {
    const auto n = w.P.rows();
    const auto K = static_cast<Eigen::Index>(w.K);
    const auto Nr = static_cast<Eigen::Index>(w.Nr);
    MatrixXd a = w.seed + da;
    a.row(0).array() += 1.0;
    MatrixXd b = db;
    b.row(0).array() += 1.0;
    const MatrixXd phi = w.P * a;
    const MatrixXd phit = w.P * b;
    const MatrixXd D = w.P * (w.seed + da - db);

    MatrixXd src_phi = MatrixXd::Zero(n, Nr);
    MatrixXd src_tilde = MatrixXd::Zero(n, Nr);
    for (Eigen::Index j = 0; j < Nr; ++j) {
        const double scale = w.f / w.r[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!w.mask[static_cast<std::size_t>(i)]) continue;
            if (!(phi(i, j) > 0.0) || !(phit(i, j) > 0.0))
                throw Error(ErrorKind::diverged,
                            "conjugate pair lost positivity at q index " + std::to_string(i) + ", r = " +
                                std::to_string(w.r[static_cast<std::size_t>(j)]),
                            static_cast<std::size_t>(i));
            const double l = scale * std::log1p(D(i, j) / phit(i, j));
            src_phi(i, j) = l * phi(i, j);
            src_tilde(i, j) = l * phit(i, j);
        }
    }
    const MatrixXd s = w.h * (w.P.transpose() * src_phi);
    const MatrixXd st = w.h * (w.P.transpose() * src_tilde);

    nda.setZero(K, Nr);
    ndb.setZero(K, Nr);
    for (Eigen::Index m = 0; m < K; ++m) {
        const auto& cw = w.weights[static_cast<std::size_t>(m)];
        const auto& ex = w.decay[static_cast<std::size_t>(m)];
        if (m == 0) {
            // ground mode of phi: bounded, pinned at large r
            for (Eigen::Index j = Nr - 2; j >= 0; --j) {
                const double dr = w.r[static_cast<std::size_t>(j + 1)] - w.r[static_cast<std::size_t>(j)];
                nda(0, j) = nda(0, j + 1) + dr * 0.5 * (s(0, j) + s(0, j + 1)) / w.f;
            }
        } else {
            // excited modes of phi decay forward from r_min
            for (Eigen::Index j = 0; j + 1 < Nr; ++j) {
                const auto c = static_cast<std::size_t>(j);
                const double dr = w.r[c + 1] - w.r[c];
                nda(m, j + 1) = ex[c] * nda(m, j) - dr * (cw[c].far * s(m, j) + cw[c].near * s(m, j + 1)) / w.f;
            }
        }
        // phi~ grows forward, so every mode is integrated in from large r
        for (Eigen::Index j = Nr - 2; j >= 0; --j) {
            const auto c = static_cast<std::size_t>(j);
            const double dr = w.r[c + 1] - w.r[c];
            ndb(m, j) = ex[c] * ndb(m, j + 1) - dr * (cw[c].far * st(m, j + 1) + cw[c].near * st(m, j)) / w.f;
        }
    }
}

std::vector<RealVector> to_rows(const MatrixXd& m) {
    std::vector<RealVector> out(static_cast<std::size_t>(m.rows()), RealVector(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

RealVector expand(const VacuumSpectrum& vac, const RealVector& coeffs) {
    RealVector out(vac.grid.n, 0.0);
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        if (coeffs[m] == 0.0) continue;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeffs[m] * vac.psi[m][i];
    }
    return out;
}

}  // namespace

void validate(const QFieldSpec& spec, const Grid1D& grid) {
    check_field_spec(spec);
    if (grid.n < 3) throw Error(ErrorKind::invalid_spec, "grid too small");
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double v = spec.potential(grid.node(i));
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorKind::invalid_spec, "potential must be finite and nonnegative on the grid", i);
    }
    const std::size_t n = grid.n;
    if (!(spec.potential(grid.node(0)) > spec.potential(grid.node(1))) ||
        !(spec.potential(grid.node(n - 1)) > spec.potential(grid.node(n - 2))))
        throw Error(ErrorKind::invalid_spec, "potential must rise toward both grid ends");
}

TridiagonalOperator field_operator(const QFieldSpec& spec, const Grid1D& grid) {
    check_field_spec(spec);
    return diffusion_operator(grid, spec.f * spec.f / spec.eta, [](double) { return 1.0; }, spec.potential.value);
}

VacuumSpectrum vacuum_spectrum(const QFieldSpec& spec, const Grid1D& grid, std::size_t k) {
    validate(spec, grid);
    if (k == 0) throw Error(ErrorKind::invalid_argument, "need at least one mode");
    const auto pairs = eigensolve_lowest(field_operator(spec, grid), k);
    VacuumSpectrum vac{grid, {}, {}};
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const RealVector& v = pairs[r].vector;
        double peak = 0.0;
        for (double x : v) peak = std::max(peak, std::abs(x));
        if (std::max(std::abs(v.front()), std::abs(v.back())) > 1e-6 * peak)
            throw Error(ErrorKind::invalid_argument,
                        "eigenfunction " + std::to_string(r) + " has not decayed at the grid ends");
        if (r > 0 && !(pairs[r].value > pairs[r - 1].value))
            throw Error(ErrorKind::numerical_failure, "vacuum spectrum is not strictly ordered");
        vac.w.push_back(pairs[r].value);
        vac.psi.push_back(v);
    }
    return vac;
}

double orthonormality_defect(const VacuumSpectrum& vac) {
    double worst = 0.0;
    for (std::size_t r = 0; r < vac.psi.size(); ++r)
        for (std::size_t s = r; s < vac.psi.size(); ++s) {
            double dot = 0.0;
            for (std::size_t i = 0; i < vac.grid.n; ++i) dot += vac.psi[r][i] * vac.psi[s][i];
            worst = std::max(worst, std::abs(vac.grid.h * dot - (r == s ? 1.0 : 0.0)));
        }
    return worst;
}

std::vector<double> invariant_state_tensor(double ws, std::size_t dim) {
    if (!(ws >= 0.0)) throw Error(ErrorKind::invalid_argument, "w_s must be nonnegative");
    if (dim == 0) throw Error(ErrorKind::invalid_argument, "dimension must be positive");
    std::vector<double> t(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) t[i * dim + i] = ws;
    return t;
}

Fluctuations field_fluctuations(const VacuumSpectrum& vac) {
    if (vac.psi.empty()) throw Error(ErrorKind::invalid_argument, "empty spectrum");
    const Grid1D& g = vac.grid;
    const RealVector& p = vac.psi[0];
    double mean = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) mean += g.node(i) * p[i] * p[i];
    mean *= g.h;
    double var = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double d = g.node(i) - mean;
        var += d * d * p[i] * p[i];
    }
    var *= g.h;
    if (!std::isfinite(var)) throw Error(ErrorKind::numerical_failure, "fluctuation is not finite");
    return {mean, var};
}

RealVector local_energy_density(const QFieldSpec& spec, const Grid1D& grid, const ComplexVector& psi,
                                double floor_fraction) {
    if (psi.size() != grid.n) throw Error(ErrorKind::invalid_argument, "amplitude does not match the grid");
    const ComplexVector hpsi = apply_operator(field_operator(spec, grid), psi);
    double peak = 0.0;
    for (const auto& z : psi) peak = std::max(peak, std::norm(z));
    RealVector out(grid.n, 0.0);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double r = std::norm(psi[i]);
        if (r > floor_fraction * peak) out[i] = (std::conj(psi[i]) * hpsi[i]).real() / r;
    }
    return out;
}

SpaceIndependentResult space_independent_evolve(const QFieldSpec& spec, const Grid1D& grid, const ComplexVector& psi0,
                                                double dt, std::size_t n_steps, std::size_t record_every,
                                                double floor_fraction) {
    check_field_spec(spec);
    if (psi0.size() != grid.n) throw Error(ErrorKind::invalid_argument, "amplitude does not match the grid");
    if (record_every == 0) throw Error(ErrorKind::invalid_argument, "record_every must be positive");
    const TridiagonalOperator op = field_operator(spec, grid);
    const UnitaryStepper stepper(op, dt, spec.f);
    SpaceIndependentResult out;
    ComplexVector psi = psi0;
    auto record = [&](std::size_t k) {
        out.times.push_back(dt * static_cast<double>(k));
        const ComplexVector hpsi = apply_operator(op, psi);
        double mean = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) mean += (std::conj(psi[i]) * hpsi[i]).real();
        out.mean_energy.push_back(grid.h * mean);
        out.energy_density = local_energy_density(spec, grid, psi, floor_fraction);
        double peak = 0.0;
        for (const auto& z : psi) peak = std::max(peak, std::norm(z));
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        HydroState st{grid, RealVector(grid.n), RealVector(grid.n)};
        for (std::size_t i = 0; i < grid.n; ++i) {
            st.rho[i] = std::norm(psi[i]);
            st.lam[i] = spec.f * std::arg(psi[i]);
            if (st.rho[i] > floor_fraction * peak) {
                lo = std::min(lo, out.energy_density[i]);
                hi = std::max(hi, out.energy_density[i]);
            }
        }
        out.energy_density_min.push_back(lo);
        out.energy_density_max.push_back(hi);
        out.history.push_back(std::move(st));
    };
    record(0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        stepper.advance(psi);
        if (k % record_every == 0 || k == n_steps) record(k);
    }
    out.psi = psi;
    return out;
}

RandomEnergyDensity random_energy_density(const QFieldSpec& spec, const Grid1D& grid, const RealVector& rho,
                                          const RealVector& lam0, const RealVector& lam_m, double floor_fraction) {
    check_field_spec(spec);
    if (rho.size() != grid.n || lam0.size() != grid.n || lam_m.size() != grid.n)
        throw Error(ErrorKind::invalid_argument, "fields do not match the grid");
    const auto mask = density_mask(rho, floor_fraction);
    const RealVector Q = quantum_potential(as_natural(spec), spec.f, grid, rho, mask);
    RandomEnergyDensity out{RealVector(grid.n, 0.0), RealVector(grid.n, 0.0)};
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double g0 = gradient_at(lam0, i, grid.h);
        const double gm = gradient_at(lam_m, i, grid.h);
        // lowering the spatial index of lambda^m flips its sign
        out.momentum[i] = -g0 * gm / spec.eta;
        if (mask[i])
            out.energy[i] = 0.5 * (g0 * g0 + gm * gm) / spec.eta + spec.potential(grid.node(i)) + Q[i];
    }
    return out;
}

double RadialPair::seed(std::size_t mode, std::size_t j) const {
    return c[mode] * std::exp(-eps[mode] * r[j] / f);
}

RealVector RadialPair::phi_deviation(std::size_t j) const {
    RealVector out(c.size());
    out[0] = da[0][j];
    for (std::size_t m = 1; m < c.size(); ++m) out[m] = seed(m, j) + da[m][j];
    return out;
}

RealVector RadialPair::phi_tilde_deviation(std::size_t j) const {
    RealVector out(c.size());
    for (std::size_t m = 0; m < c.size(); ++m) out[m] = db[m][j];
    return out;
}

RealVector phi_field(const RadialPair& pair, const VacuumSpectrum& vac, std::size_t j) {
    RealVector out = expand(vac, pair.phi_deviation(j));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += vac.psi[0][i];
    return out;
}

RealVector phi_tilde_field(const RadialPair& pair, const VacuumSpectrum& vac, std::size_t j) {
    RealVector out = expand(vac, pair.phi_tilde_deviation(j));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += vac.psi[0][i];
    return out;
}

RealVector density_excess(const RadialPair& pair, const VacuumSpectrum& vac, std::size_t j) {
    const RealVector d = expand(vac, pair.phi_deviation(j));
    const RealVector dt = expand(vac, pair.phi_tilde_deviation(j));
    RealVector out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = vac.psi[0][i] * (d[i] + dt[i]) + d[i] * dt[i];
    return out;
}

RadialPair confined_solve(const QFieldSpec& spec, const VacuumSpectrum& vac, const RealVector& c,
                          const ConfinedOptions& opts) {
    check_field_spec(spec);
    const std::size_t K = std::min(opts.modes, vac.psi.size());
    if (K < 2) throw Error(ErrorKind::invalid_argument, "confined solve needs at least two modes");
    if (c.empty() || c[0] != 1.0) throw Error(ErrorKind::invalid_argument, "c_0 must be 1");
    for (std::size_t m = K; m < c.size(); ++m)
        if (c[m] != 0.0) throw Error(ErrorKind::invalid_argument, "coefficient beyond the retained modes");
    if (opts.radial_points < 3) throw Error(ErrorKind::invalid_argument, "need at least 3 radial points");

    RadialPair pair;
    pair.f = spec.f;
    pair.c.assign(K, 0.0);
    std::copy_n(c.begin(), std::min(c.size(), K), pair.c.begin());
    for (std::size_t m = 0; m < K; ++m) pair.eps.push_back(vac.w[m] - vac.w[0]);
    const double radius = spec.f / pair.eps[1];
    const double r_min = opts.r_min > 0.0 ? opts.r_min : 0.5 * radius;
    const double r_max = opts.r_max > 0.0 ? opts.r_max : 150.0 * radius;
    if (!(r_max > r_min)) throw Error(ErrorKind::invalid_argument, "r_max must exceed r_min");
    const std::size_t Nr = opts.radial_points;
    pair.r.resize(Nr);
    for (std::size_t j = 0; j < Nr; ++j)
        pair.r[j] = r_min * std::pow(r_max / r_min, static_cast<double>(j) / static_cast<double>(Nr - 1));
    pair.r.back() = r_max;
    pair.da.assign(K, RealVector(Nr, 0.0));
    pair.db.assign(K, RealVector(Nr, 0.0));

    bool vacuum = true;
    for (std::size_t m = 1; m < K; ++m) vacuum = vacuum && pair.c[m] == 0.0;
    if (vacuum) return pair;

    ConfinedWork w;
    w.K = K;
    w.Nr = Nr;
    w.f = spec.f;
    w.h = vac.grid.h;
    w.P = basis_matrix(vac, K);
    w.r = pair.r;
    w.eps = pair.eps;
    w.mask = source_mask(vac, opts.source_floor);
    w.seed = MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(Nr));
    for (std::size_t m = 1; m < K; ++m)
        for (std::size_t j = 0; j < Nr; ++j)
            w.seed(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = pair.seed(m, j);
    w.weights.resize(K);
    w.decay.resize(K);
    for (std::size_t m = 0; m < K; ++m) {
        for (std::size_t j = 0; j + 1 < Nr; ++j) {
            const double x = pair.eps[m] * (pair.r[j + 1] - pair.r[j]) / spec.f;
            w.weights[m].push_back(exponential_weights(x));
            w.decay[m].push_back(std::exp(-x));
        }
    }

    const auto rows = static_cast<Eigen::Index>(K);
    const auto cols = static_cast<Eigen::Index>(Nr);
    MatrixXd da = MatrixXd::Zero(rows, cols);
    MatrixXd db = MatrixXd::Zero(rows, cols);
    MatrixXd nda, ndb;
    sweep(w, da, db, nda, ndb);
    double defect = std::max((nda - da).cwiseAbs().maxCoeff(), (ndb - db).cwiseAbs().maxCoeff());
    pair.residual_log.push_back(defect);
    double relax = 1.0;
    while (defect >= opts.tol) {
        if (pair.iterations >= opts.max_iterations || relax < 1e-6)
            throw Error(ErrorKind::max_iterations,
                        "confined solve stalled at residual " + std::to_string(defect) + " after " +
                            std::to_string(pair.iterations) + " iterations");
        const MatrixXd ta = da + relax * (nda - da);
        const MatrixXd tb = db + relax * (ndb - db);
        MatrixXd ga, gb;
        sweep(w, ta, tb, ga, gb);
        const double next = std::max((ga - ta).cwiseAbs().maxCoeff(), (gb - tb).cwiseAbs().maxCoeff());
        if (!(next < defect)) {
            ++pair.rejected;
            relax *= 0.5;
            continue;
        }
        da = ta;
        db = tb;
        nda = std::move(ga);
        ndb = std::move(gb);
        defect = next;
        pair.residual_log.push_back(defect);
        ++pair.iterations;
    }
    // the last sweep is within tolerance of the iterate it came from
    pair.da = to_rows(nda);
    pair.db = to_rows(ndb);
    return pair;
}

LeadingCorrection leading_correction(const QFieldSpec& spec, const VacuumSpectrum& vac, const RealVector& c,
                                     const RealVector& r, double source_floor) {
    check_field_spec(spec);
    if (c.empty() || c[0] != 1.0) throw Error(ErrorKind::invalid_argument, "c_0 must be 1");
    if (c.size() > vac.psi.size()) throw Error(ErrorKind::invalid_argument, "more coefficients than modes");
    if (r.size() < 2) throw Error(ErrorKind::invalid_argument, "need at least two radii");
    const std::size_t K = c.size();
    const std::size_t n = vac.grid.n;
    const auto mask = source_mask(vac, source_floor);
    const RealVector& g = vac.psi[0];

    std::vector<RealVector> src(K, RealVector(r.size()));
    std::vector<RealVector> src_tilde(K, RealVector(r.size()));
    RealVector excess(n);
    for (std::size_t j = 0; j < r.size(); ++j) {
        std::fill(excess.begin(), excess.end(), 0.0);
        for (std::size_t m = 1; m < K; ++m) {
            const double amp = c[m] * std::exp(-(vac.w[m] - vac.w[0]) * r[j] / spec.f);
            for (std::size_t i = 0; i < n; ++i) excess[i] += amp * vac.psi[m][i];
        }
        for (std::size_t m = 0; m < K; ++m) {
            double s = 0.0;
            double st = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!mask[i]) continue;
                const double l = std::log1p(excess[i] / g[i]) / r[j];
                s += l * (g[i] + excess[i]) * vac.psi[m][i];
                st += l * g[i] * vac.psi[m][i];
            }
            src[m][j] = vac.grid.h * s;
            src_tilde[m][j] = vac.grid.h * st;
        }
    }
    LeadingCorrection out{r, std::vector<RealVector>(K, RealVector(r.size(), 0.0)),
                          std::vector<RealVector>(K, RealVector(r.size(), 0.0))};
    for (std::size_t m = 0; m < K; ++m)
        for (std::size_t j = r.size() - 1; j-- > 0;) {
            const double dr = r[j + 1] - r[j];
            out.dphi[m][j] = out.dphi[m][j + 1] + 0.5 * dr * (src[m][j] + src[m][j + 1]);
            out.dphi_tilde[m][j] = out.dphi_tilde[m][j + 1] - 0.5 * dr * (src_tilde[m][j] + src_tilde[m][j + 1]);
        }
    return out;
}

double inverse_r_coefficient(const RealVector& r, const RealVector& profile, double eps, double f, double r_lo,
                             double r_hi, std::size_t degree) {
    if (r.size() != profile.size()) throw Error(ErrorKind::invalid_argument, "radii and profile differ in length");
    RealVector x;
    RealVector y;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] < r_lo || r[j] > r_hi) continue;
        x.push_back(1.0 / r[j]);
        y.push_back(profile[j] * r[j] * std::exp(eps * r[j] / f));
    }
    if (x.size() < degree + 2)
        throw Error(ErrorKind::fit_window_empty, "too few radii in [" + std::to_string(r_lo) + ", " +
                                                     std::to_string(r_hi) + "]");
    return fit_polynomial(x, y, degree)[0];
}

RealVector tail_integral(const RadialPair& pair, const VacuumSpectrum& vac) {
    RealVector out(pair.r.size());
    for (std::size_t j = 0; j < pair.r.size(); ++j) {
        double s = 0.0;
        for (double d : density_excess(pair, vac, j)) s += std::abs(d);
        out[j] = vac.grid.h * s;
    }
    return out;
}

ConfinementReport confinement_report(const RadialPair& pair, const VacuumSpectrum& vac, double f,
                                     double lo_fraction, double hi_fraction, double tail_floor) {
    if (vac.w.size() < 2) throw Error(ErrorKind::invalid_argument, "need the first excited level");
    ConfinementReport rep;
    rep.radius = f / (vac.w[1] - vac.w[0]);
    const double r_max = pair.r.back();
    rep.window_lo = lo_fraction * r_max;
    rep.window_hi = hi_fraction * r_max;
    const RealVector tail = tail_integral(pair, vac);
    RealVector x;
    RealVector y;
    for (std::size_t j = 0; j < pair.r.size(); ++j) {
        if (pair.r[j] < rep.window_lo || pair.r[j] > rep.window_hi || !(tail[j] > tail_floor)) continue;
        x.push_back(pair.r[j]);
        y.push_back(std::log(tail[j]));
    }
    rep.points = x.size();
    if (x.size() < 8)
        throw Error(ErrorKind::fit_window_empty, "only " + std::to_string(x.size()) + " tail samples above the floor");
    rep.fitted_rate = -fit_line(x, y).slope;
    return rep;
}

BalanceResiduals space_independent_residuals(const QFieldSpec& spec, const std::vector<HydroState>& history,
                                             double dt, double floor_fraction) {
    check_field_spec(spec);
    BalanceResiduals out;
    if (history.size() < 3) return out;
    const Grid1D& g = history.front().grid;
    const std::size_t n = g.n;
    const double period = 2.0 * std::numbers::pi * spec.f;
    const NaturalSystemSpec natural = as_natural(spec);
    for (std::size_t t = 1; t + 1 < history.size(); ++t) {
        const auto& prev = history[t - 1];
        const auto& cur = history[t];
        const auto& next = history[t + 1];
        const auto mask = density_mask(cur.rho, floor_fraction);
        const RealVector Q = quantum_potential(natural, spec.f, g, cur.rho, mask);
        RealVector flux(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double p = wrapped(cur.lam[i + 1] - cur.lam[i - 1], period) / (2.0 * g.h);
            flux[i] = cur.rho[i] * p / spec.eta;
            if (!(mask[i - 1] && mask[i] && mask[i + 1])) continue;
            const double dl = wrapped(next.lam[i] - prev.lam[i], period) / (2.0 * dt);
            const double r = dl + 0.5 * p * p / spec.eta + spec.potential(g.node(i)) + Q[i];
            out.hamilton_jacobi = std::max(out.hamilton_jacobi, std::abs(r));
        }
        for (std::size_t i = 2; i + 2 < n; ++i) {
            if (!(mask[i - 2] && mask[i + 2])) continue;
            const double drho = (next.rho[i] - prev.rho[i]) / (2.0 * dt);
            const double div = (flux[i + 1] - flux[i - 1]) / (2.0 * g.h);
            out.continuity = std::max(out.continuity, std::abs(drho + div));
        }
    }
    return out;
}

std::vector<HydroState> spacetime_inverted(const std::vector<HydroState>& history) { return time_reversed(history); }

}  // namespace varq

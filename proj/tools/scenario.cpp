#include "scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "varq/varq.hpp"

namespace varq::cli {

namespace {

using json = nlohmann::ordered_json;
using Body = std::function<void(RunReport&)>;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

double rel_drift(double x, double x0) { return std::abs(x - x0) / (x0 != 0.0 ? std::abs(x0) : 1.0); }

double positive(const Config& c, const char* sec, const char* key, double v) {
    if (!(v > 0.0)) c.fail(sec, key, "must be positive");
    return v;
}

double positive_or(const Config& c, const char* sec, const char* key, double fallback) {
    return positive(c, sec, key, c.real_or(sec, key, fallback));
}

std::size_t count_or(const Config& c, const char* sec, const char* key, std::int64_t fallback, std::int64_t min = 1) {
    const std::int64_t v = c.integer_or(sec, key, fallback);
    if (v < min) c.fail(sec, key, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::size_t steps_for(double t_final, double dt) {
    return static_cast<std::size_t>(std::max<long long>(1, std::llround(t_final / dt)));
}

struct PotentialChoice {
    Potential potential;
    std::string kind;
    double k = 0.0;
    double shift = 0.0;
};

PotentialChoice parse_potential(const Config& c, const char* sec) {
    PotentialChoice p;
    p.kind = c.text_or(sec, "potential", "free");
    if (p.kind == "free") {
        p.potential = free_potential();
    } else if (p.kind == "harmonic") {
        p.k = c.real_or(sec, "k", 1.0);
        p.potential = harmonic_potential(p.k);
    } else if (p.kind == "quartic") {
        p.potential = quartic_potential(c.real_or(sec, "lambda", 1.0));
    } else if (p.kind == "box") {
        p.potential = box_potential();
    } else if (p.kind == "polynomial") {
        p.potential = polynomial_potential(c.reals(sec, "coefficients"));
    } else {
        c.fail(sec, "potential", "unknown potential '" + p.kind + "' (free, harmonic, quartic, box, polynomial)");
    }
    p.shift = c.real_or(sec, "shift", 0.0);
    if (p.shift != 0.0) p.potential = p.potential.shifted(p.shift);
    return p;
}

Grid1D parse_grid(const Config& c) {
    const double lo = c.real("grid", "q_min");
    const double hi = c.real("grid", "q_max");
    const std::int64_t n = c.integer("grid", "n");
    if (!(hi > lo)) c.fail("grid", "q_max", "must exceed q_min");
    if (n < 3) c.fail("grid", "n", "must be at least 3");
    return build_grid(lo, hi, n);
}

struct SystemChoice {
    NaturalSystemSpec spec;
    double a = 1.0;
};

SystemChoice parse_system(const Config& c) {
    const double mass = positive_or(c, "system", "mass", 1.0);
    SystemChoice s{natural_system(mass, parse_potential(c, "system").potential), 1.0};
    s.a = positive_or(c, "system", "a", 1.0);
    return s;
}

std::vector<std::string> indexed(const std::string& head, const std::string& stem, std::size_t n, std::size_t base) {
    std::vector<std::string> cols{head};
    for (std::size_t i = 0; i < n; ++i) cols.push_back(stem + std::to_string(i + base));
    return cols;
}

// ---------------------------------------------------------------- classical

Body plan_classical(const Config& c) {
    const auto sys = parse_system(c);
    const Grid1D g = parse_grid(c);
    const PhaseState start{c.real_or("initial", "q0", 0.5 * (g.q_min + g.q_max)), c.real_or("initial", "p0", 0.0)};
    if (start.q <= g.q_min || start.q >= g.q_max) c.fail("initial", "q0", "must lie inside the grid");
    const double width = positive_or(c, "initial", "width", 3.0 * g.h);
    const double dt = positive_or(c, "run", "dt", 1e-3);
    const double t_final = positive(c, "run", "t_final", c.real("run", "t_final"));
    const double courant = positive_or(c, "run", "courant", 0.2);
    if (courant > 1.0) c.fail("run", "courant", "must not exceed 1");
    const double reseed = positive_or(c, "run", "reseed", 0.1);
    const std::size_t every = count_or(c, "run", "record_every", 1);

    return [=](RunReport& r) {
        const std::size_t steps = steps_for(t_final, dt);
        const auto flow = hamilton_flow(sys.spec, start, dt, steps);
        const double h0 = legendre_hamiltonian(sys.spec, start.q, start.p);
        Series traj{"trajectory", {"t", "q", "p", "energy"}, {}};
        RealVector q;
        double drift = 0.0;
        for (std::size_t k = 0; k < flow.trajectory.size(); ++k) {
            const auto& s = flow.trajectory[k];
            const double e = legendre_hamiltonian(sys.spec, s.q, s.p);
            drift = std::max(drift, rel_drift(e, h0));
            q.push_back(s.q);
            if (k % every == 0 || k + 1 == flow.trajectory.size())
                traj.rows.push_back({dt * static_cast<double>(k), s.q, s.p, e});
        }
        double mean = 0.0;
        for (double x : q) mean += x / static_cast<double>(q.size());
        for (double& x : q) x -= mean;
        const auto track = track_packet(sys.spec, g, start, width, t_final, courant, reseed);
        Series cen{"centroid", {"t", "centroid", "reference"}, {}};
        for (std::size_t k = 0; k < track.times.size(); ++k)
            cen.rows.push_back({track.times[k], track.centroid[k], track.reference[k]});

        r.results["flow_steps"] = flow.trajectory.size() - 1;
        r.results["flow_escaped"] = flow.escaped;
        r.results["period"] = crossing_period(q, dt);
        r.results["energy_initial"] = h0;
        r.results["flow_energy_drift"] = drift;
        r.results["centroid_max_error"] = track.max_error;
        r.results["grid_spacing"] = g.h;
        r.check_true("flow_in_domain", !flow.escaped);
        r.check("flow_energy_drift", drift, 1e-6);
        r.check("centroid_error", track.max_error, 2.0 * g.h);
        r.series = {traj, cen};
    };
}

// ---------------------------------------------------------------- madelung

double centroid(const Grid1D& g, const RealVector& rho) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        num += g.node(i) * rho[i];
        den += rho[i];
    }
    return num / den;
}

HydroState gaussian_state(const Grid1D& g, double mean, double variance, double k0) {
    HydroState s{g, RealVector(g.n), RealVector(g.n)};
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.node(i) - mean;
        s.rho[i] = std::exp(-x * x / (2.0 * variance));
        s.lam[i] = k0 * g.node(i);
    }
    const double mass = grid_integral(s.rho, g.h);
    for (auto& v : s.rho) v /= mass;
    return s;
}

Body plan_madelung(const Config& c) {
    const auto sys = parse_system(c);
    const Grid1D g = parse_grid(c);
    const std::string mode = c.text_or("diffusion", "mode", "quantum");
    if (mode != "quantum" && mode != "classical") c.fail("diffusion", "mode", "must be quantum or classical");
    const DiffusionSpec dspec = mode == "quantum" ? quantum_diffusion(sys.a) : classical_diffusion();
    const double q0 = c.real_or("initial", "q0", 0.0);
    const double variance = positive_or(c, "initial", "variance", 0.5);
    const double k0 = c.real_or("initial", "k0", 0.0);
    const double limit = madelung_dispersive_limit(sys.spec, dspec, g);
    const double dt = positive_or(c, "run", "dt", mode == "quantum" ? 0.5 * limit : 0.1 * g.h);
    if (dt > limit) c.fail("run", "dt", "exceeds the dispersive limit " + std::to_string(limit));
    const double t_final = positive(c, "run", "t_final", c.real("run", "t_final"));
    const double floor = positive_or(c, "run", "floor_fraction", 1e-12);
    const std::size_t every = count_or(c, "run", "record_every", 100);

    return [=](RunReport& r) {
        const std::size_t steps = steps_for(t_final, dt);
        HydroState s = gaussian_state(g, q0, variance, k0);
        const double mass0 = grid_integral(s.rho, g.h);
        const bool quantum = dspec.mode == DiffusionMode::quantum_pole;
        ComplexVector psi = canonical_map_inverse(g, s.rho, s.lam, sys.a).psi;
        const UnitaryStepper stepper(schrodinger_operator(sys.spec, g, sys.a), dt, sys.a);
        ClassicalEnsemble ens{g, s.rho, s.lam};
        auto reference_rho = [&] {
            if (!quantum) return ens.rho;
            RealVector rho(g.n);
            for (std::size_t i = 0; i < g.n; ++i) rho[i] = std::norm(psi[i]);
            return rho;
        };

        std::vector<HydroState> history{s};
        Series mom{"moments", {"t", "centroid", "mass", "reference_centroid"}, {}};
        mom.rows.push_back({0.0, centroid(g, s.rho), mass0, centroid(g, s.rho)});
        double gap = 0.0;
        double mass_drift = 0.0;
        const MadelungOptions opts{floor};
        for (std::size_t k = 1; k <= steps; ++k) {
            s = madelung_step(sys.spec, dspec, s, dt, opts);
            if (quantum) stepper.advance(psi);
            else ens = transport_density(ens, sys.spec, dt);
            const RealVector ref = reference_rho();
            for (std::size_t i = 0; i < g.n; ++i) gap = std::max(gap, std::abs(s.rho[i] - ref[i]));
            const double mass = grid_integral(s.rho, g.h);
            mass_drift = std::max(mass_drift, rel_drift(mass, mass0));
            if (history.size() < 64) history.push_back(s);
            if (k % every == 0 || k == steps)
                mom.rows.push_back({dt * static_cast<double>(k), centroid(g, s.rho), mass, centroid(g, ref)});
        }
        const RealVector ref = reference_rho();
        Series dens{"density", {"q", "rho", "lambda", "reference_rho"}, {}};
        for (std::size_t i = 0; i < g.n; ++i) dens.rows.push_back({g.node(i), s.rho[i], s.lam[i], ref[i]});

        r.results["mode"] = quantum ? "quantum" : "classical";
        r.results["dt"] = dt;
        r.results["steps"] = steps;
        r.results["mass_drift"] = mass_drift;
        r.results["reference_rho_linf"] = gap;
        r.results["final_centroid"] = centroid(g, s.rho);
        r.check("mass_drift", mass_drift, 1e-12);
        r.check(quantum ? "rho_linf_vs_schrodinger" : "rho_linf_vs_transport", gap, quantum ? 1e-3 : 1e-12);
        if (history.size() >= 3) {
            const auto fwd = madelung_residuals(history, sys.spec, dspec, dt);
            const auto rev = madelung_residuals(time_reversed(history), sys.spec, dspec, dt);
            r.results["balance_residuals"] = {{"lambda", fwd.hamilton_jacobi}, {"continuity", fwd.continuity}};
            r.check("time_reversal_gap",
                    std::max(rel_drift(rev.hamilton_jacobi, fwd.hamilton_jacobi), rel_drift(rev.continuity, fwd.continuity)),
                    1e-12);
        }
        r.series = {mom, dens};
    };
}

// ---------------------------------------------------------------- schrodinger

Body plan_schrodinger(const Config& c, std::uint64_t seed) {
    const auto sys = parse_system(c);
    const Grid1D g = parse_grid(c);
    const double q0 = c.real_or("initial", "q0", 0.0);
    const double variance = positive_or(c, "initial", "variance", 1.0);
    const double k0 = c.real_or("initial", "k0", 0.0);
    const double dt = positive(c, "run", "dt", c.real("run", "dt"));
    const std::size_t steps = count_or(c, "run", "steps", 1);
    const std::size_t every = count_or(c, "run", "record_every", 10);
    const double threshold = positive_or(c, "run", "boundary_threshold", 1e-8);
    const std::size_t probes = count_or(c, "run", "probes", 100, 0);

    return [=](RunReport& r) {
        WaveFunction wf{g, ComplexVector(g.n), sys.a};
        for (std::size_t i = 0; i < g.n; ++i) {
            const double x = g.node(i) - q0;
            wf.psi[i] = std::exp(cplx(-x * x / (4.0 * variance), k0 * g.node(i) / sys.a));
        }
        const double n0 = std::sqrt(wf.norm2());
        for (auto& z : wf.psi) z /= n0;
        const auto op = schrodinger_operator(sys.spec, g, sys.a);
        auto row = [&](double t) {
            return RealVector{t, mean_position(wf), position_variance(wf), wf.norm2(), expectation(op, wf.psi, g.h)};
        };
        Series mom{"moments", {"t", "mean", "variance", "norm", "energy"}, {row(0.0)}};
        const double e0 = expectation(op, wf.psi, g.h);
        double norm_drift = 0.0;
        double energy_drift = 0.0;
        double edge = 0.0;
        for (std::size_t done = 0; done < steps;) {
            const std::size_t chunk = std::min(every, steps - done);
            const auto res = schrodinger_evolve(sys.spec, wf, dt, chunk, threshold);
            wf = res.wf;
            done += chunk;
            norm_drift = std::max(norm_drift, res.max_step_norm_drift);
            edge = std::max(edge, res.boundary_mass);
            energy_drift = std::max(energy_drift, rel_drift(expectation(op, wf.psi, g.h), e0));
            mom.rows.push_back(row(dt * static_cast<double>(done)));
        }
        const auto polar = canonical_map_forward(wf);
        Series dens{"density", {"q", "rho", "lambda"}, {}};
        for (std::size_t i = 0; i < g.n; ++i) dens.rows.push_back({g.node(i), polar.rho[i], polar.lam[i]});

        // seeded probes of the canonical map
        Rng rng(seed);
        double jac = 0.0;
        for (std::size_t k = 0; k < probes;) {
            const double u = rng.uniform(-3.0, 3.0);
            const double v = rng.uniform(-3.0, 3.0);
            if (std::hypot(u, v) < 0.05) continue;
            jac = std::max(jac, std::abs(canonical_jacobian_fd(u, v, sys.a) - 1.0));
            ++k;
        }
        double trip = 0.0;
        WaveFunction probe{g, ComplexVector(g.n), sys.a};
        for (int trial = 0; trial < 10; ++trial) {
            double phase = rng.uniform(-3.0, 3.0);
            for (auto& z : probe.psi) {
                phase += rng.uniform(-1.0, 1.0);
                z = std::polar(rng.uniform(0.1, 2.0), phase);
            }
            const auto p = canonical_map_forward(probe);
            const auto back = canonical_map_inverse(g, p.rho, p.lam, sys.a);
            for (std::size_t i = 0; i < g.n; ++i) trip = std::max(trip, std::abs(back.psi[i] - probe.psi[i]));
        }

        r.results["steps"] = steps;
        r.results["final_mean"] = mean_position(wf);
        r.results["final_variance"] = position_variance(wf);
        r.results["energy_initial"] = e0;
        r.results["max_step_norm_drift"] = norm_drift;
        r.results["energy_drift"] = energy_drift;
        r.results["boundary_mass"] = edge;
        r.results["canonical_jacobian_error"] = jac;
        r.results["canonical_round_trip_error"] = trip;
        r.check("norm_drift_per_step", norm_drift, 1e-12);
        r.check("energy_drift", energy_drift, 1e-10);
        r.check("boundary_mass", edge, threshold);
        if (probes > 0) r.check("canonical_jacobian", jac, 1e-6);
        r.check("canonical_round_trip", trip, 1e-12);
        r.series = {mom, dens};
    };
}

// ---------------------------------------------------------------- spin

Body plan_spin(const Config& c, std::uint64_t seed) {
    SpinSystemSpec spec;
    const std::int64_t n = c.integer("spin", "N");
    if (n < 2 || n > 64) c.fail("spin", "N", "must lie in [2, 64]");
    spec.N = static_cast<std::size_t>(n);
    spec.a = positive_or(c, "spin", "a", 1.0);
    spec.b = c.real_or("spin", "b", 1.0);
    spec.U = RealMatrix(spec.N);
    spec.theta = RealMatrix(spec.N);
    Rng rng(seed);
    auto matrix = [&](const char* key, RealMatrix& m, double lo, double hi, bool antisymmetric) {
        if (!c.has("spin", key)) return;
        if (c.text("spin", key) == "random") {
            for (std::size_t i = 0; i < spec.N; ++i)
                for (std::size_t j = i; j < spec.N; ++j) {
                    if (antisymmetric && i == j) continue;
                    m(i, j) = rng.uniform(lo, hi);
                    m(j, i) = antisymmetric ? -m(i, j) : m(i, j);
                }
            return;
        }
        const RealVector v = c.reals("spin", key);
        if (v.size() != spec.N * spec.N) c.fail("spin", key, "needs N*N row-major entries");
        m.data = v;
    };
    matrix("coupling", spec.U, 0.2, 1.5, false);
    matrix("theta", spec.theta, -1.0, 1.0, true);
    try {
        validate(spec);
    } catch (const Error& e) {
        c.fail("spin", "coupling", e.what());
    }
    const RealVector re = c.reals("initial", "amplitudes_re");
    const RealVector im = c.reals_or("initial", "amplitudes_im", RealVector(spec.N, 0.0));
    if (re.size() != spec.N) c.fail("initial", "amplitudes_re", "needs N entries");
    if (im.size() != spec.N) c.fail("initial", "amplitudes_im", "needs N entries");
    SpinState start{ComplexVector(spec.N)};
    double norm = 0.0;
    for (std::size_t i = 0; i < spec.N; ++i) {
        start.psi[i] = {re[i], im[i]};
        norm += std::norm(start.psi[i]);
    }
    if (!(norm > 0.0)) c.fail("initial", "amplitudes_re", "state must be nonzero");
    for (auto& z : start.psi) z /= std::sqrt(norm);
    const double dt = positive_or(c, "run", "dt", 1e-3);
    const double t_final = positive(c, "run", "t_final", c.real("run", "t_final"));
    const std::size_t every = count_or(c, "run", "record_every", 10);
    const double floor = positive_or(c, "run", "local_floor", 1e-6);

    return [=](RunReport& r) {
        const std::size_t steps = steps_for(t_final, dt);
        RealVector times(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) times[k] = dt * static_cast<double>(k);
        const auto states = propagate_series(spec, start, times);
        const double e0 = spin_energy(spec, start);
        Series pop{"populations", indexed("t", "p_", spec.N, 1), {}};
        double norm_drift = 0.0;
        double energy_drift = 0.0;
        for (std::size_t k = 0; k <= steps; ++k) {
            double total = 0.0;
            RealVector row{times[k]};
            for (const auto& z : states[k].psi) {
                total += std::norm(z);
                row.push_back(std::norm(z));
            }
            norm_drift = std::max(norm_drift, std::abs(total - 1.0));
            energy_drift = std::max(energy_drift, rel_drift(spin_energy(spec, states[k]), e0));
            if (k % every == 0 || k == steps) pop.rows.push_back(row);
        }

        // local form from the same start while every population stays above the floor
        LocalState s = to_local(start, spec.a);
        double local_gap = 0.0;
        double local_mass = 0.0;
        std::size_t local_steps = 0;
        auto above = [&](const RealVector& p) { return *std::min_element(p.begin(), p.end()) > floor; };
        while (local_steps < steps && above(s.p)) {
            LocalState next;
            try {
                next = local_form_step(spec, s, dt);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::step_rejected) throw;
                break;
            }
            if (!above(next.p)) break;
            s = next;
            ++local_steps;
            const auto ref = to_local(states[local_steps], spec.a);
            double total = 0.0;
            for (std::size_t i = 0; i < spec.N; ++i) {
                local_gap = std::max(local_gap, std::abs(s.p[i] - ref.p[i]));
                local_gap = std::max(local_gap,
                                     std::abs(std::remainder(s.lam[i] - ref.lam[i], 2.0 * std::numbers::pi * spec.a)));
                total += s.p[i];
            }
            local_mass = std::max(local_mass, std::abs(total - 1.0));
        }

        r.results["spectrum"] = hamiltonian_spectrum(spec);
        r.results["energy"] = e0;
        r.results["steps"] = steps;
        r.results["final_populations"] = RealVector(pop.rows.back().begin() + 1, pop.rows.back().end());
        r.results["local_form_steps"] = local_steps;
        r.results["local_form_t_end"] = dt * static_cast<double>(local_steps);
        r.check("norm_drift", norm_drift, 1e-12);
        r.check("energy_drift", energy_drift, 1e-12);
        if (local_steps > 0) {
            r.check("local_vs_psi", local_gap, 1e-4);
            r.check("local_population_drift", local_mass, 1e-12);
        }
        r.series = {pop};
    };
}

// ---------------------------------------------------------------- ddw

FieldLagrangianSpec parse_classical_field(const Config& c, PotentialChoice& choice) {
    FieldLagrangianSpec spec;
    spec.eta = positive_or(c, "field", "eta", 1.0);
    choice = parse_potential(c, "field");
    spec.potential = choice.potential;
    return spec;
}

Body plan_ddw(const Config& c, std::uint64_t seed) {
    PotentialChoice choice;
    const auto spec = parse_classical_field(c, choice);
    const double length = positive_or(c, "grid", "length", 2.0 * std::numbers::pi);
    const std::int64_t n = c.integer("grid", "n");
    if (n < 5) c.fail("grid", "n", "must be at least 5");
    const auto g = build_periodic_grid(c.real_or("grid", "x_min", 0.0), length, static_cast<std::size_t>(n));
    const double amplitude = c.real_or("initial", "amplitude", 0.1);
    const std::int64_t mode = c.integer_or("initial", "mode", 1);
    const double dt = positive_or(c, "run", "dt", 0.5 * g.h);
    if (dt > g.h) c.fail("run", "dt", "exceeds the light-cone limit h = " + std::to_string(g.h));
    const double t_final = positive(c, "run", "t_final", c.real("run", "t_final"));
    const std::size_t every = count_or(c, "run", "record_every", 10);

    const double k = 2.0 * std::numbers::pi * static_cast<double>(mode) / length;
    const double d = 1e-4;
    const double m2 = (spec.potential.derivative(d) - spec.potential.derivative(-d)) / (2.0 * d * spec.eta);
    const double continuum2 = k * k + m2;
    const double s = 2.0 * std::sin(0.5 * k * g.h) / g.h;
    const double w2 = s * s + m2;
    const double lattice2 = w2 * (1.0 - 0.25 * w2 * dt * dt);
    double omega = 0.0;
    if (c.has("initial", "omega")) omega = c.real("initial", "omega");
    else if (lattice2 > 0.0) omega = std::sqrt(lattice2);
    else c.fail("initial", "omega", "required: the linearized dispersion has no real frequency for this mode");
    const bool linear = choice.kind == "harmonic" || choice.kind == "free";

    return [=](RunReport& r) {
        const std::size_t steps = steps_for(t_final, dt);
        FieldState1p1 st = plane_wave_state(spec, g, amplitude, static_cast<int>(mode), omega);
        const auto em0 = energy_momentum(spec, st);
        const double e0 = em0.total(0, g.h);
        const double p0 = em0.total(1, g.h);
        const double p_scale = std::abs(p0) > 1e-12 * std::abs(e0) ? std::abs(p0) : std::abs(e0);
        Series en{"energy", {"t", "energy", "momentum"}, {{0.0, e0, p0}}};
        std::vector<RealVector> history{st.q};
        double de = 0.0;
        double dp = 0.0;
        std::array<double, 2> divergence{0.0, 0.0};
        for (std::size_t step = 1; step <= steps; ++step) {
            const FieldState1p1 next = ddw_evolve(spec, st, dt, 1);
            if (step == 1) divergence = tensor_divergence_residual(spec, st, next, dt);
            st = next;
            history.push_back(st.q);
            const auto em = energy_momentum(spec, st);
            const double e = em.total(0, g.h);
            const double p = em.total(1, g.h);
            de = std::max(de, rel_drift(e, e0));
            dp = std::max(dp, std::abs(p - p0) / (p_scale > 0.0 ? p_scale : 1.0));
            if (step % every == 0 || step == steps) en.rows.push_back({dt * static_cast<double>(step), e, p});
        }
        Series field{"field", {"x", "q", "pi0"}, {}};
        for (std::size_t i = 0; i < g.n; ++i) field.rows.push_back({g.node(i), st.q[i], st.pi0[i]});

        // seeded probe of the tensor against the canonical density
        Rng rng(seed);
        FieldState1p1 probe{g, RealVector(g.n), RealVector(g.n), 0.0};
        for (std::size_t i = 0; i < g.n; ++i) {
            probe.q[i] = rng.uniform(-1.0, 1.0);
            probe.pi0[i] = rng.uniform(-1.0, 1.0);
        }
        const auto emp = energy_momentum(spec, probe);
        double hc = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double dq = (probe.q[(i + 1) % g.n] - probe.q[(i + g.n - 1) % g.n]) / (2.0 * g.h);
            hc = std::max(hc, std::abs(emp.T[i][0] - canonical_reduction(spec, probe.pi0[i], dq, probe.q[i])));
        }

        r.results["dt"] = dt;
        r.results["steps"] = steps;
        r.results["launch_omega"] = omega;
        r.results["energy_initial"] = e0;
        r.results["momentum_initial"] = p0;
        r.results["energy_drift"] = de;
        r.results["momentum_drift"] = dp;
        r.results["tensor_divergence"] = {divergence[0], divergence[1]};
        if (history.size() >= 5) r.results["extremal_residual"] = extremal_embedding_check(spec, history, g, dt);
        r.check("energy_drift", de, 1e-6);
        r.check("momentum_drift", dp, 1e-6);
        r.check("canonical_density_vs_T00", hc, 1e-12);
        if (linear && mode != 0 && continuum2 > 0.0) {
            const double w = measured_frequency(history, g, static_cast<int>(mode), dt);
            r.results["continuum_omega"] = std::sqrt(continuum2);
            r.results["measured_omega"] = w;
            r.check("dispersion_rel_error", std::abs(w * w - continuum2) / continuum2, 1e-3);
        }
        r.series = {en, field};
    };
}

// ---------------------------------------------------------------- quantum fields

QFieldSpec parse_quantum_field(const Config& c, const Grid1D& g, PotentialChoice& choice) {
    QFieldSpec spec;
    spec.eta = positive_or(c, "field", "eta", 1.0);
    spec.f = positive_or(c, "field", "f", 1.0);
    choice = parse_potential(c, "field");
    spec.potential = choice.potential;
    try {
        validate(spec, g);
    } catch (const Error& e) {
        c.fail("field", "potential", e.what());
    }
    return spec;
}

Body plan_vacuum(const Config& c) {
    const Grid1D g = parse_grid(c);
    PotentialChoice choice;
    const auto spec = parse_quantum_field(c, g, choice);
    const std::size_t k_eigen = count_or(c, "run", "k_eigen", 3);
    if (k_eigen > g.n) c.fail("run", "k_eigen", "exceeds the number of grid nodes");

    return [=](RunReport& r) {
        const auto vac = vacuum_spectrum(spec, g, k_eigen);
        const auto fl = field_fluctuations(vac);
        Series eig{"eigenfunctions", indexed("q", "psi_", k_eigen, 0), {}};
        for (std::size_t i = 0; i < g.n; ++i) {
            RealVector row{g.node(i)};
            for (const auto& v : vac.psi) row.push_back(v[i]);
            eig.rows.push_back(row);
        }
        bool ordered = true;
        bool tensor = true;
        for (std::size_t s = 0; s < k_eigen; ++s) {
            if (s > 0) ordered = ordered && vac.w[s] > vac.w[s - 1];
            const auto t = invariant_state_tensor(std::max(vac.w[s], 0.0));
            tensor = tensor && t[0] == std::max(vac.w[s], 0.0) && t[1] == 0.0 && t[2] == 0.0 && t[3] == t[0];
        }
        r.results["eigenvalues"] = vac.w;
        r.results["orthonormality_defect"] = orthonormality_defect(vac);
        r.results["fluctuation_mean"] = fl.mean;
        r.results["fluctuation_variance"] = fl.variance;
        r.check("orthonormality", orthonormality_defect(vac), 1e-8);
        r.check_true("strictly_increasing", ordered);
        r.check_true("invariant_state_tensor", tensor);
        if (choice.kind == "harmonic" && choice.k > 0.0) {
            const double omega = spec.f * std::sqrt(choice.k / spec.eta);
            double err = 0.0;
            for (std::size_t s = 0; s < k_eigen && s <= 2; ++s)
                err = std::max(err, std::abs(vac.w[s] - choice.shift - omega * (static_cast<double>(s) + 0.5)));
            r.results["analytic_spectrum_error"] = err;
            r.check("analytic_spectrum", err, 1e-4);
            const double var = spec.f / (2.0 * std::sqrt(choice.k * spec.eta));
            r.check("analytic_fluctuation", std::abs(fl.variance - var), 1e-4);
        }
        r.series = {eig};
    };
}

Body plan_space_independent(const Config& c) {
    const Grid1D g = parse_grid(c);
    PotentialChoice choice;
    const auto spec = parse_quantum_field(c, g, choice);
    const RealVector re = c.reals("initial", "amplitudes_re");
    const RealVector im = c.reals_or("initial", "amplitudes_im", RealVector(re.size(), 0.0));
    if (im.size() != re.size()) c.fail("initial", "amplitudes_im", "needs as many entries as amplitudes_re");
    double norm = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) norm += re[i] * re[i] + im[i] * im[i];
    if (!(norm > 0.0)) c.fail("initial", "amplitudes_re", "state must be nonzero");
    const double dt = positive(c, "run", "dt", c.real("run", "dt"));
    const std::size_t steps = count_or(c, "run", "steps", 1);
    const std::size_t every = count_or(c, "run", "record_every", 1);

    return [=](RunReport& r) {
        const std::size_t modes = re.size();
        const auto vac = vacuum_spectrum(spec, g, modes);
        ComplexVector psi(g.n, 0.0);
        double expected = 0.0;
        std::size_t populated = 0;
        for (std::size_t m = 0; m < modes; ++m) {
            const cplx amp = cplx(re[m], im[m]) / std::sqrt(norm);
            expected += std::norm(amp) * vac.w[m];
            if (amp != 0.0) ++populated;
            for (std::size_t i = 0; i < g.n; ++i) psi[i] += amp * vac.psi[m][i];
        }
        const auto out = space_independent_evolve(spec, g, psi, dt, steps, every);
        Series en{"energy", {"t", "mean_energy", "eps_min", "eps_max"}, {}};
        double drift = 0.0;
        for (std::size_t k = 0; k < out.times.size(); ++k) {
            en.rows.push_back({out.times[k], out.mean_energy[k], out.energy_density_min[k], out.energy_density_max[k]});
            drift = std::max(drift, rel_drift(out.mean_energy[k], out.mean_energy.front()));
        }
        const auto& last = out.history.back();
        Series dens{"density", {"q", "rho", "lambda", "epsilon"}, {}};
        for (std::size_t i = 0; i < g.n; ++i)
            dens.rows.push_back({g.node(i), last.rho[i], last.lam[i], out.energy_density[i]});
        const auto rd = random_energy_density(spec, g, last.rho, last.lam, RealVector(g.n, 0.0));
        double momentum = 0.0;
        for (double p : rd.momentum) momentum = std::max(momentum, std::abs(p));

        r.results["expected_mean_energy"] = expected;
        r.results["mean_energy_initial"] = out.mean_energy.front();
        r.results["mean_energy_final"] = out.mean_energy.back();
        r.results["mean_energy_drift"] = drift;
        r.results["norm_final"] = grid_norm2(out.psi, g.h);
        r.check("mean_energy_drift", drift, 1e-8);
        r.check("mean_energy_vs_modes", rel_drift(out.mean_energy.front(), expected), 1e-10);
        r.check("momentum_density", momentum, 0.0);
        if (populated == 1) {
            double w = 0.0;
            for (std::size_t m = 0; m < modes; ++m)
                if (re[m] != 0.0 || im[m] != 0.0) w = vac.w[m];
            double err = 0.0;
            for (std::size_t k = 0; k < out.times.size(); ++k)
                err = std::max({err, std::abs(out.energy_density_min[k] - w), std::abs(out.energy_density_max[k] - w)});
            r.check("eigenstate_energy_density", err, 1e-6);
        }
        if (out.history.size() >= 3) {
            const double spacing = dt * static_cast<double>(every);
            const auto fwd = space_independent_residuals(spec, out.history, spacing);
            const auto inv = space_independent_residuals(spec, spacetime_inverted(out.history), spacing);
            r.results["balance_residuals"] = {{"lambda", fwd.hamilton_jacobi}, {"continuity", fwd.continuity}};
            r.check("inversion_gap",
                    std::max(rel_drift(inv.hamilton_jacobi, fwd.hamilton_jacobi), rel_drift(inv.continuity, fwd.continuity)),
                    1e-10);
        }
        r.series = {en, dens};
    };
}

Body plan_confined(const Config& c) {
    const Grid1D g = parse_grid(c);
    PotentialChoice choice;
    const auto spec = parse_quantum_field(c, g, choice);
    ConfinedOptions opts;
    opts.modes = count_or(c, "confined", "modes", 8, 2);
    RealVector coeff = c.reals("confined", "c");
    if (coeff.size() > opts.modes) c.fail("confined", "c", "has more entries than modes");
    coeff.resize(opts.modes, 0.0);
    opts.r_min = c.real_or("confined", "r_min", 0.0);
    opts.r_max = c.real_or("confined", "r_max", 0.0);
    if (opts.r_min < 0.0) c.fail("confined", "r_min", "must be nonnegative");
    if (opts.r_max < 0.0 || (opts.r_max > 0.0 && opts.r_max <= opts.r_min))
        c.fail("confined", "r_max", "must exceed r_min");
    opts.radial_points = count_or(c, "confined", "radial_points", 5000, 16);
    opts.tol = positive_or(c, "confined", "tol", 1e-8);
    opts.max_iterations = count_or(c, "confined", "max_iterations", 200);
    const double fit_lo = positive_or(c, "confined", "fit_lo", 0.4);
    const double fit_hi = positive_or(c, "confined", "fit_hi", 0.8);
    if (fit_hi <= fit_lo || fit_hi > 1.0) c.fail("confined", "fit_hi", "must lie in (fit_lo, 1]");
    const double rate_tol = positive_or(c, "confined", "rate_tolerance", 0.02);
    const double coeff_tol = positive_or(c, "confined", "coefficient_tolerance", 0.05);

    return [=](RunReport& r) {
        const auto vac = vacuum_spectrum(spec, g, opts.modes);
        const auto pair = confined_solve(spec, vac, coeff, opts);
        std::size_t lead = 0;
        for (std::size_t j = 1; j < coeff.size() && lead == 0; ++j)
            if (coeff[j] != 0.0) lead = j;
        const auto tail = tail_integral(pair, vac);
        Series ts{"tail", {"r", "tail_integral", "log_tail"}, {}};
        for (std::size_t j = 0; j < tail.size(); ++j)
            if (tail[j] > 0.0) ts.rows.push_back({pair.r[j], tail[j], std::log(tail[j])});
        Series res{"residuals", {"iteration", "residual"}, {}};
        for (std::size_t k = 0; k < pair.residual_log.size(); ++k)
            res.rows.push_back({static_cast<double>(k + 1), pair.residual_log[k]});

        r.results["eigenvalues"] = vac.w;
        r.results["iterations"] = pair.iterations;
        r.results["rejected"] = pair.rejected;
        r.results["residual_log"] = pair.residual_log;
        r.results["r_min"] = pair.r.front();
        r.results["r_max"] = pair.r.back();
        if (lead == 0) {
            double excess = 0.0;
            for (std::size_t j = 0; j < pair.r.size(); ++j)
                for (double d : density_excess(pair, vac, j)) excess = std::max(excess, std::abs(d));
            r.check_true("vacuum_fixed_point", pair.iterations == 0 && excess == 0.0);
        } else {
            bool monotone = true;
            for (std::size_t k = 1; k < pair.residual_log.size(); ++k)
                monotone = monotone && pair.residual_log[k] < pair.residual_log[k - 1];
            r.check_true("residual_monotone", monotone);
            r.check("final_residual", pair.residual_log.empty() ? 0.0 : pair.residual_log.back(), opts.tol);
            const auto rep = confinement_report(pair, vac, spec.f, fit_lo, fit_hi);
            const double expected = (vac.w[lead] - vac.w[0]) / spec.f;
            r.results["fitted_rate"] = rep.fitted_rate;
            r.results["expected_rate"] = expected;
            r.results["radius"] = rep.radius;
            r.results["fit_window"] = {rep.window_lo, rep.window_hi};
            r.check("rate_rel_error", rel_drift(rep.fitted_rate, expected), rate_tol);
            if (coeff[1] != 0.0) {
                const double eps = vac.w[1] - vac.w[0];
                const double unit = spec.f / eps;
                RealVector rr;
                for (std::size_t j = 0; j <= 4000; ++j) rr.push_back(unit * (0.5 + 99.5 * static_cast<double>(j) / 4000.0));
                const auto lc = leading_correction(spec, vac, coeff, rr);
                const double want = coeff[1] * spec.f / eps;
                const double got = inverse_r_coefficient(lc.r, lc.dphi[1], eps, spec.f, 10.0 * unit, 50.0 * unit);
                r.results["inverse_r_coefficient"] = got;
                r.results["inverse_r_expected"] = want;
                r.check("inverse_r_rel_error", rel_drift(got, want), coeff_tol);
            }
        }
        r.series = {ts, res};
    };
}

}  // namespace

const std::vector<std::string>& regimes() {
    static const std::vector<std::string> names{"classical", "madelung", "schrodinger", "spin",
                                                "ddw", "vacuum", "space-independent", "confined"};
    return names;
}

Scenario plan_scenario(const Config& cfg, const RunOptions& opts) {
    Scenario s;
    s.regime = cfg.text("scenario", "regime");
    if (std::find(regimes().begin(), regimes().end(), s.regime) == regimes().end())
        cfg.fail("scenario", "regime", "unknown regime '" + s.regime + "'");
    s.name = cfg.text_or("scenario", "name", s.regime);
    const std::int64_t cfg_seed = cfg.integer_or("scenario", "seed", 0);
    if (cfg_seed < 0) cfg.fail("scenario", "seed", "must be nonnegative");
    s.seed = opts.seed ? *opts.seed : static_cast<std::uint64_t>(cfg_seed);
    s.tol_scale = opts.tol_scale;
    s.waive = cfg.flag_or("scenario", "waive_invariants", false);
    try {
        if (s.regime == "classical") s.body = plan_classical(cfg);
        else if (s.regime == "madelung") s.body = plan_madelung(cfg);
        else if (s.regime == "schrodinger") s.body = plan_schrodinger(cfg, s.seed);
        else if (s.regime == "spin") s.body = plan_spin(cfg, s.seed);
        else if (s.regime == "ddw") s.body = plan_ddw(cfg, s.seed);
        else if (s.regime == "vacuum") s.body = plan_vacuum(cfg);
        else if (s.regime == "space-independent") s.body = plan_space_independent(cfg);
        else s.body = plan_confined(cfg);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        throw Error(ErrorKind::config, cfg.source() + ": " + e.what());
    }
    cfg.reject_unused();
    s.echo = cfg.echo();
    return s;
}

RunReport run_scenario(const Scenario& scenario) {
    RunReport r;
    r.regime = scenario.regime;
    r.name = scenario.name;
    r.seed = scenario.seed;
    r.tol_scale = scenario.tol_scale;
    r.waived = scenario.waive;
    r.echo = scenario.echo;
    const auto t0 = std::chrono::steady_clock::now();
    scenario.body(r);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace varq::cli

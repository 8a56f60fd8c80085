#include "mtdc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace mtdc {

const char* sim_mode_name(SimMode m) {
    switch (m) {
        case SimMode::Linear: return "linear";
        case SimMode::NonlinearPowerCurrent: return "nonlinear";
        case SimMode::RlLines: return "rl-lines";
    }
    return "?";
}

void Scenario::validate() const {
    params.validate();
    gains.validate(params.n);
    if (!(dt > 0.0)) throw InvalidParams("dt must be positive");
    if (!(t_end > 0.0)) throw InvalidParams("t_end must be positive");
    double prev = 0.0;
    for (const auto& e : events) {
        if (e.t < prev) throw InvalidParams("events must be sorted by time");
        prev = e.t;
        if (e.area >= params.n) throw InvalidParams("event area index out of range");
        if (e.t > t_end) throw InvalidParams("t_end must cover every event time");
    }
    if (mode == SimMode::RlLines) {
        if (lines.l.size() != dc.edges.size())
            throw InvalidParams("rl-lines mode requires an inductance for every line");
        for (double l : lines.l)
            if (!(l > 0.0)) throw InvalidParams("line inductances must be positive");
    }
    if (mode == SimMode::NonlinearPowerCurrent && config == Config::SecondaryDistributed && !comm)
        throw MissingCommGraph("secondary-distributed controller requires a communication graph");
}

double spectral_radius_estimate(const Matrix& a) {
    const double scale = norm_fro(a);
    if (scale == 0.0) return 0.0;
    Matrix b = (1.0 / scale) * a;
    double log_norm = 0.0; // log ||(A/scale)^(2^k)||_F with b kept normalized
    const int kSquarings = 6;
    for (int k = 0; k < kSquarings; ++k) {
        b = b * b;
        const double nb = norm_fro(b);
        if (nb == 0.0) return 0.0;
        log_norm = 2.0 * log_norm + std::log(nb);
        b = (1.0 / nb) * b;
    }
    return scale * std::exp(log_norm / std::exp2(kSquarings));
}

Matrix rk4_step_matrix(const Matrix& a, double h) {
    const std::size_t n = a.rows();
    const Matrix t1 = h * a;
    const Matrix t2 = t1 * t1;
    const Matrix t3 = t2 * t1;
    const Matrix t4 = t3 * t1;
    return Matrix::identity(n) + t1 + (1.0 / 2.0) * t2 + (1.0 / 6.0) * t3 + (1.0 / 24.0) * t4;
}

Matrix rk4_forcing_matrix(const Matrix& a, double h) {
    const std::size_t n = a.rows();
    const Matrix t1 = h * a;
    const Matrix t2 = t1 * t1;
    const Matrix t3 = t2 * t1;
    return h * (Matrix::identity(n) + (1.0 / 2.0) * t1 + (1.0 / 6.0) * t2 + (1.0 / 24.0) * t3);
}

namespace {

// R^m and S = sum_{k<m} R^k by binary double-and-add.
void pow_accum(const Matrix& r, std::size_t m, Matrix& r_m, Matrix& s_m) {
    const std::size_t n = r.rows();
    r_m = Matrix::identity(n);
    s_m = Matrix(n, n);
    Matrix base_p = r;
    Matrix base_s = Matrix::identity(n);
    while (m > 0) {
        if (m & 1) {
            s_m = s_m + r_m * base_s;
            r_m = r_m * base_p;
        }
        m >>= 1;
        if (m == 0) break;
        base_s = base_s + base_p * base_s;
        base_p = base_p * base_p;
    }
}

std::size_t sample_count(double t_end, double dt) {
    return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
}

std::size_t event_sample(double t, double dt, std::size_t samples) {
    const double k = std::ceil(t / dt - 1e-9);
    const auto idx = static_cast<std::size_t>(std::max(k, 0.0));
    return std::min(idx, samples - 1);
}

struct Segment {
    std::size_t begin = 0; // first sample where this disturbance is active
    Vec p_m;
};

std::vector<Segment> build_segments(const Scenario& scn, std::size_t samples) {
    std::vector<Segment> segs;
    segs.push_back({0, scn.params.p_m});
    for (const auto& e : scn.events) {
        const std::size_t k = event_sample(e.t, scn.dt, samples);
        Vec p = segs.back().p_m;
        p[e.area] += e.dp_m;
        if (!segs.empty() && segs.back().begin == k) {
            segs.back().p_m = p;
        } else {
            segs.push_back({k, p});
        }
    }
    return segs;
}

std::size_t substep_count(const Scenario& scn, double rho, bool& forced_warning) {
    forced_warning = false;
    if (rho <= 0.0) return 1;
    const auto needed =
        static_cast<std::size_t>(std::ceil(scn.dt * rho / kTol.rk4_safety - 1e-12));
    if (needed <= 1) return 1;
    if (scn.force_dt) {
        forced_warning = true;
        return 1;
    }
    return needed;
}

struct OutputAccum {
    Trajectory traj;
    const Scenario* scn = nullptr;
    std::size_t base_dim = 0;
    Vec w_ref;          // lyapunov reference of the active segment
    bool w_ref_ok = false;

    void start(const Scenario& s, std::size_t samples, std::size_t state_dim, std::size_t base) {
        scn = &s;
        base_dim = base;
        traj.n = s.params.n;
        traj.dt = s.dt;
        traj.times.reserve(samples);
        traj.states.reserve(samples);
        traj.omega.reserve(samples);
        traj.volt.reserve(samples);
        traj.p_gen.reserve(samples);
        traj.lyap_w.reserve(samples);
        (void)state_dim;
    }

    void segment(const Vec& p_m) {
        try {
            w_ref = lyapunov_reference(scn->params, scn->gains, scn->dc, scn->comm, scn->config, p_m);
            w_ref_ok = true;
        } catch (const Error&) {
            w_ref_ok = false; // W reported as NaN for this segment
        }
    }

    void sample(std::size_t k, const Vec& x) {
        const std::size_t n = scn->params.n;
        if (norm_inf(x) > 1e6)
            throw StepSizeUnstable("state magnitude exceeded 1e6 at t = " +
                                   std::to_string(static_cast<double>(k) * scn->dt));
        traj.times.push_back(static_cast<double>(k) * scn->dt);
        traj.states.push_back(x);

        Vec omega(n), volt(n);
        for (std::size_t i = 0; i < n; ++i) {
            omega[i] = scn->params.omega_ref + x[i];
            volt[i] = scn->params.v_ref[i] + x[n + i];
        }
        const Vec eta(x.begin() + 2 * n, x.begin() + base_dim);
        traj.p_gen.push_back(
            controller_outputs(scn->params, scn->gains, scn->config, omega, volt, eta).p_gen);
        traj.omega.push_back(std::move(omega));
        traj.volt.push_back(std::move(volt));

        if (w_ref_ok) {
            Vec dev(base_dim);
            for (std::size_t i = 0; i < base_dim; ++i) dev[i] = x[i] - w_ref[i];
            traj.lyap_w.push_back(lyapunov_value(scn->params, scn->gains, scn->config, dev));
        } else {
            traj.lyap_w.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
};

Trajectory integrate_linear_system(const Scenario& scn, const Matrix& a,
                                   const Vec& b_template_p_m_zero, std::size_t base_dim,
                                   const std::function<Vec(const Vec&)>& forcing_for) {
    const std::size_t samples = sample_count(scn.t_end, scn.dt);
    const std::vector<Segment> segs = build_segments(scn, samples);

    const double rho = spectral_radius_estimate(a);
    bool forced = false;
    const std::size_t m = substep_count(scn, rho, forced);
    const double h = scn.dt / static_cast<double>(m);

    const Matrix r1 = rk4_step_matrix(a, h);
    const Matrix f1 = rk4_forcing_matrix(a, h);
    Matrix r_m, s_m;
    pow_accum(r1, m, r_m, s_m);
    const Matrix u = s_m * f1;

    Vec x = scn.x0.value_or(Vec(a.rows(), 0.0));
    if (x.size() != a.rows()) throw InvalidParams("initial state size mismatch");

    OutputAccum out;
    out.start(scn, samples, a.rows(), base_dim);
    out.traj.dt_forced_warning = forced;
    (void)b_template_p_m_zero;

    std::size_t seg_idx = 0;
    Vec b = forcing_for(segs[0].p_m);
    out.segment(segs[0].p_m);
    for (const auto& e : scn.events)
        out.traj.event_samples.push_back(event_sample(e.t, scn.dt, samples));

    for (std::size_t k = 0; k < samples; ++k) {
        while (seg_idx + 1 < segs.size() && segs[seg_idx + 1].begin == k) {
            ++seg_idx;
            b = forcing_for(segs[seg_idx].p_m);
            out.segment(segs[seg_idx].p_m);
        }
        out.sample(k, x);
        if (k + 1 < samples) {
            Vec xn = r_m * x;
            const Vec fb = u * b;
            for (std::size_t i = 0; i < xn.size(); ++i) xn[i] += fb[i];
            x = std::move(xn);
        }
    }
    out.traj.p_m_final = segs.back().p_m;
    return out.traj;
}

} // namespace

RlSystem assemble_rl(const Scenario& scn) {
    const std::size_t n = scn.params.n;
    const std::size_t ne = scn.dc.edges.size();
    const ClosedLoopSystem base = assemble(scn.params, scn.gains, scn.dc, scn.comm, scn.config);
    const std::size_t bd = base.layout.size();
    const std::size_t dim = bd + ne;

    // terminal capacitance with half of each incident line's shunt lumped in
    Vec cap_eff = scn.params.cap;
    if (!scn.lines.c.empty()) {
        for (std::size_t e = 0; e < ne; ++e) {
            cap_eff[scn.dc.edges[e].i] += 0.5 * scn.lines.c[e];
            cap_eff[scn.dc.edges[e].j] += 0.5 * scn.lines.c[e];
        }
    }

    Matrix a(dim, dim);
    for (std::size_t i = 0; i < bd; ++i)
        for (std::size_t j = 0; j < bd; ++j) a(i, j) = base.a(i, j);

    Vec lv(n, 0.0);
    for (const auto& e : scn.dc.edges) {
        const double flow = e.weight * (scn.params.v_ref[e.i] - scn.params.v_ref[e.j]);
        lv[e.i] += flow;
        lv[e.j] -= flow;
    }
    Vec b(dim, 0.0);
    for (std::size_t i = 0; i < bd; ++i) b[i] = base.b[i];

    for (std::size_t i = 0; i < n; ++i) {
        const double ei = 1.0 / cap_eff[i];
        for (std::size_t j = 0; j < dim; ++j) a(n + i, j) = 0.0;
        a(n + i, i) = ei * scn.gains.k_omega[i] / scn.params.v_nom;
        a(n + i, n + i) = -ei * scn.gains.k_v[i] / scn.params.v_nom;
        b[n + i] = ei * (scn.params.p_inj_nom[i] / scn.params.v_nom - lv[i]);
    }
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& edge = scn.dc.edges[e];
        const double resistance = 1.0 / edge.weight;
        const double inv_l = 1.0 / scn.lines.l[e];
        // node equations: C_i v_dot -= (B I)_i, current leaves edge.i toward edge.j
        a(n + edge.i, bd + e) = -1.0 / cap_eff[edge.i];
        a(n + edge.j, bd + e) = 1.0 / cap_eff[edge.j];
        // line equation: L I_dot = (B^T V)_e - R I_e
        a(bd + e, n + edge.i) = inv_l;
        a(bd + e, n + edge.j) = -inv_l;
        a(bd + e, bd + e) = -resistance * inv_l;
    }
    return {std::move(a), std::move(b), bd};
}

Trajectory integrate_rl_lines(const Scenario& scn) {
    scn.validate();
    const RlSystem rl = assemble_rl(scn);
    Scenario s = scn;
    if (!s.x0) s.x0 = Vec(rl.a.rows(), 0.0);

    // rebuild only the forcing when events change p_m
    auto forcing_for = [&](const Vec& p_m) {
        Vec b = rl.b;
        for (std::size_t i = 0; i < s.params.n; ++i) b[i] = p_m[i] / s.params.m[i];
        return b;
    };
    return integrate_linear_system(s, rl.a, rl.b, rl.base_dim, forcing_for);
}

namespace {

Trajectory integrate_nonlinear(const Scenario& scn) {
    const std::size_t n = scn.params.n;
    const std::size_t samples = sample_count(scn.t_end, scn.dt);
    const std::vector<Segment> segs = build_segments(scn, samples);

    // stiffness estimate from the linearized closed loop
    const ClosedLoopSystem lin = assemble(scn.params, scn.gains, scn.dc, scn.comm, scn.config);
    const double rho = spectral_radius_estimate(lin.a);
    bool forced = false;
    const std::size_t m = substep_count(scn, rho, forced);
    const double h = scn.dt / static_cast<double>(m);
    const std::size_t dim = lin.layout.size();

    // absolute coordinates for the nonlinear right-hand side
    Vec dev = scn.x0.value_or(Vec(dim, 0.0));
    if (dev.size() != dim) throw InvalidParams("initial state size mismatch");
    Vec y(dim);
    auto to_abs = [&](const Vec& d) {
        Vec abs_state(dim);
        for (std::size_t i = 0; i < n; ++i) {
            abs_state[i] = scn.params.omega_ref + d[i];
            abs_state[n + i] = scn.params.v_ref[i] + d[n + i];
        }
        for (std::size_t i = 2 * n; i < dim; ++i) abs_state[i] = d[i];
        return abs_state;
    };
    auto to_dev = [&](const Vec& abs_state) {
        Vec d(dim);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = abs_state[i] - scn.params.omega_ref;
            d[n + i] = abs_state[n + i] - scn.params.v_ref[i];
        }
        for (std::size_t i = 2 * n; i < dim; ++i) d[i] = abs_state[i];
        return d;
    };
    y = to_abs(dev);

    OutputAccum out;
    out.start(scn, samples, dim, dim);
    out.traj.dt_forced_warning = forced;
    for (const auto& e : scn.events)
        out.traj.event_samples.push_back(event_sample(e.t, scn.dt, samples));

    const PowerCurrentMode pc_mode = scn.mode == SimMode::NonlinearPowerCurrent
                                         ? PowerCurrentMode::NonlinearPowerCurrent
                                         : PowerCurrentMode::Linearized;

    std::size_t seg_idx = 0;
    out.segment(segs[0].p_m);
    Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (std::size_t k = 0; k < samples; ++k) {
        while (seg_idx + 1 < segs.size() && segs[seg_idx + 1].begin == k) {
            ++seg_idx;
            out.segment(segs[seg_idx].p_m);
        }
        out.sample(k, to_dev(y));
        if (k + 1 == samples) break;
        const Vec& p_m = segs[seg_idx].p_m;
        auto rhs = [&](const Vec& state, Vec& out) {
            nonlinear_rhs_into(scn.params, scn.gains, scn.dc, scn.comm, scn.config, state, p_m,
                               pc_mode, out);
        };
        for (std::size_t s = 0; s < m; ++s) {
            rhs(y, k1);
            for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            rhs(tmp, k2);
            for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            rhs(tmp, k3);
            for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
            rhs(tmp, k4);
            for (std::size_t i = 0; i < dim; ++i)
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    out.traj.p_m_final = segs.back().p_m;
    return out.traj;
}

} // namespace

Trajectory integrate(const Scenario& scn) {
    scn.validate();
    switch (scn.mode) {
        case SimMode::RlLines: return integrate_rl_lines(scn);
        case SimMode::NonlinearPowerCurrent: return integrate_nonlinear(scn);
        case SimMode::Linear: break;
    }
    const ClosedLoopSystem sys = assemble(scn.params, scn.gains, scn.dc, scn.comm, scn.config);
    Scenario s = scn;
    auto forcing_for = [&](const Vec& p_m) {
        return forcing(s.params, s.dc, s.config, p_m);
    };
    return integrate_linear_system(s, sys.a, sys.b, sys.layout.size(), forcing_for);
}

std::vector<SweepEntry> sweep(const Scenario& base, const std::string& parameter,
                              const Vec& values) {
    if (values.empty()) throw InvalidParams("sweep requires at least one value");

    std::vector<SweepEntry> entries;
    for (const double value : values) {
        SweepEntry entry;
        entry.value = value;
        try {
            Scenario s = base;
            if (parameter == "delta") s.gains.delta = value;
            else if (parameter == "gamma") s.gains.gamma = value;
            else if (parameter == "k_droop") s.gains.k_droop.assign(s.params.n, value);
            else if (parameter == "k_droop_i") s.gains.k_droop_i.assign(s.params.n, value);
            else if (parameter == "k_omega") s.gains.k_omega.assign(s.params.n, value);
            else if (parameter == "k_v") s.gains.k_v.assign(s.params.n, value);
            else throw InvalidParams("unknown sweep parameter: " + parameter);

            Vec p_m = s.params.p_m;
            for (const auto& e : s.events) p_m[e.area] += e.dp_m;
            s.params.p_m = p_m;

            const ClosedLoopSystem sys = assemble(s.params, s.gains, s.dc, s.comm, s.config);
            entry.eq = equilibrium(sys);
            entry.ok = true;

            const std::size_t n = s.params.n;
            entry.sum_omega_hat = entry.eq.omega_hat_avg * static_cast<double>(n);
            entry.sum_v_hat = entry.eq.v_hat_avg * static_cast<double>(n);
            if (s.config == Config::SecondaryProjected) {
                entry.eta_prime = entry.eq.x0[2 * n];
            } else if (s.config != Config::DroopOnly) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += entry.eq.x0[2 * n + i];
                entry.eta_prime = acc / static_cast<double>(n);
            }

            if (s.gains.uniform_primary()) {
                const BoundSet bounds = s.config == Config::DroopOnly
                                            ? bounds_decentralized(s.params, s.gains, s.dc)
                                            : bounds_distributed(s.params, s.gains, s.dc);
                bool pass = true;
                for (std::size_t i = 0; i < n; ++i) {
                    pass = pass && std::abs(entry.eq.x0[i]) <= bounds.e_omega;
                    pass = pass && std::abs(entry.eq.x0[n + i]) <= bounds.e_v;
                }
                const double share =
                    std::accumulate(p_m.begin(), p_m.end(), 0.0) / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i)
                    pass = pass && std::abs(entry.eq.p_gen_asym[i] + share) <= bounds.e_gen;
                entry.bounds_pass = pass;
            }
        } catch (const Error& err) {
            entry.ok = false;
            entry.error = err.what();
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace mtdc

#include "mtdc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtdc {

namespace {

Vec negate(const Vec& v) {
    Vec r = v;
    for (double& x : r) x = -x;
    return r;
}

double mean(const Vec& v, std::size_t begin, std::size_t count) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += v[begin + i];
    return acc / static_cast<double>(count);
}

} // namespace

EquilibriumReport equilibrium(const ClosedLoopSystem& sys) {
    const std::size_t n = sys.params.n;
    Vec x0;
    try {
        x0 = lu_solve(sys.a, negate(sys.b));
        // one step of iterative refinement keeps the residual at roundoff
        Vec r = sys.a * x0;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = -(r[i] + sys.b[i]);
        const Vec dx = lu_solve(sys.a, r);
        for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += dx[i];
    } catch (const SingularMatrix&) {
        throw SingularSystem(std::string("closed-loop matrix is singular for ") +
                             config_name(sys.config) +
                             " (gamma = 0 averaged controller); use the limit-bound path");
    }

    Vec residual_vec = sys.a * x0;
    for (std::size_t i = 0; i < residual_vec.size(); ++i) residual_vec[i] += sys.b[i];
    const double residual = norm_inf(residual_vec);
    if (residual > kTol.equilibrium_residual)
        throw Error("equilibrium residual " + std::to_string(residual) + " above tolerance");

    EquilibriumReport rep;
    rep.x0 = x0;
    rep.omega_hat_avg = mean(x0, 0, n);
    rep.v_hat_avg = mean(x0, n, n);
    rep.residual = residual;

    Vec omega(n), volt(n);
    for (std::size_t i = 0; i < n; ++i) {
        omega[i] = sys.params.omega_ref + x0[i];
        volt[i] = sys.params.v_ref[i] + x0[n + i];
    }
    const Vec eta(x0.begin() + 2 * n, x0.end());
    rep.p_gen_asym = controller_outputs(sys.params, sys.gains, sys.config, omega, volt, eta).p_gen;
    return rep;
}

Matrix build_q1(const ControllerGains& gains) {
    const std::size_t n = gains.k_omega.size();
    Matrix q(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        q(i, i) = gains.k_omega[i] / gains.k_v[i] * (gains.k_omega[i] + gains.k_droop[i]);
        q(i, n + i) = -gains.k_omega[i];
        q(n + i, i) = -gains.k_omega[i];
        q(n + i, n + i) = gains.k_v[i];
    }
    return q;
}

bool q1_schur_positive(const ControllerGains& gains) {
    // Q1 is block-diagonal per area; positive definiteness reduces to the
    // Schur complement K_w (K_v)^-1 K_droop > 0 together with K_v > 0.
    // Evaluated cancellation-free, so extreme gain ratios stay exact.
    for (std::size_t i = 0; i < gains.k_omega.size(); ++i) {
        if (!(gains.k_v[i] > 0.0)) return false;
        if (!(gains.k_omega[i] / gains.k_v[i] * gains.k_droop[i] > 0.0)) return false;
    }
    return !gains.k_omega.empty();
}

StabilityCertificate certify_stability(const ClosedLoopSystem& sys) {
    StabilityCertificate cert;
    cert.q1_pd = q1_schur_positive(sys.gains);

    try {
        const Matrix p = lyapunov_solve(sys.a);
        const CholeskyResult chol = cholesky_pd_check(p);
        if (chol.is_pd) {
            double min_pivot = chol.factor(0, 0) * chol.factor(0, 0);
            for (std::size_t i = 1; i < p.rows(); ++i)
                min_pivot = std::min(min_pivot, chol.factor(i, i) * chol.factor(i, i));
            cert.hurwitz = true;
            cert.lyap_p_min_pivot = min_pivot;
            cert.method_notes = "A^T P + P A = -I solved; P positive definite";
        } else {
            cert.hurwitz = false;
            cert.method_notes = "Lyapunov solution exists but is not positive definite";
        }
    } catch (const SingularMatrix&) {
        cert.hurwitz = false;
        cert.method_notes = "Lyapunov operator singular (marginal spectrum); "
                            "output dynamics covered by the projected system and "
                            "LaSalle with Q1 positive definite";
    }
    return cert;
}

double lyapunov_value(const PlantParams& params, const ControllerGains& gains, Config config,
                      const Vec& deviation) {
    const std::size_t n = params.n;
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wb = deviation[i];
        w += 0.5 * gains.k_omega[i] * params.m[i] / gains.k_v[i] * wb * wb;
        const double vb = deviation[n + i];
        w += 0.5 * params.v_nom * params.cap[i] * vb * vb;
    }
    switch (config) {
        case Config::DroopOnly: break;
        // The averaged-integral term carries weight n/2, not 1/2: only then
        // do the cross terms of dW/dt cancel against the printed closed-loop
        // coupling, and the value agrees with the consensus form on eta = c 1_n.
        case Config::SecondaryProjected: {
            const double ep = deviation[2 * n];
            w += 0.5 * static_cast<double>(n) * ep * ep;
            break;
        }
        case Config::SecondaryComplete: {
            const double ep = mean(deviation, 2 * n, n);
            w += 0.5 * static_cast<double>(n) * ep * ep;
            break;
        }
        case Config::SecondaryDistributed:
            for (std::size_t i = 0; i < n; ++i) {
                const double eb = deviation[2 * n + i];
                w += 0.5 * eb * eb;
            }
            break;
    }
    return w;
}

Vec lyapunov_reference(const PlantParams& params, const ControllerGains& gains,
                       const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                       Config config, const Vec& p_m) {
    PlantParams p = params;
    p.p_m = p_m;
    const std::size_t n = params.n;

    if (config == Config::SecondaryComplete) {
        // full-state equilibrium may not exist (gamma = 0); the projected
        // twin shares the output equilibrium and defines the eta' reference
        const ClosedLoopSystem twin = assemble(p, gains, dc, comm, Config::SecondaryProjected);
        const EquilibriumReport rep = equilibrium(twin);
        Vec ref(3 * n);
        for (std::size_t i = 0; i < 2 * n; ++i) ref[i] = rep.x0[i];
        for (std::size_t i = 0; i < n; ++i) ref[2 * n + i] = rep.x0[2 * n];
        return ref;
    }
    const ClosedLoopSystem sys = assemble(p, gains, dc, comm, config);
    return equilibrium(sys).x0;
}

namespace {

struct SpectralSum {
    double sum_inv_lambda = 0.0; // sum over i >= 2 of 1/lambda_i(L_R)
};

SpectralSum laplacian_spectral_sum(const WeightedGraph& dc) {
    SpectralSum s;
    const SpectralResult eig = jacobi_sym_eig(laplacian(dc));
    for (std::size_t i = 1; i < eig.eigenvalues.size(); ++i)
        s.sum_inv_lambda += 1.0 / eig.eigenvalues[i];
    return s;
}

struct BoundInputs {
    double k_omega, k_v, k_droop;
    double pm_absmax, pm_abssum;
    double n;
    double spectral_term; // (n-1) + (k_v / v_nom) * sum 1/lambda_i
    double sum_inv_lambda;
    double v_nom;
};

BoundInputs bound_inputs(const PlantParams& params, const ControllerGains& gains,
                         const WeightedGraph& dc) {
    const auto uni = gains.uniform_primary();
    if (!uni)
        throw NonUniformGains("static-error bounds require uniform k_omega, k_v, k_droop");
    BoundInputs in{};
    in.k_omega = uni->k_omega;
    in.k_v = uni->k_v;
    in.k_droop = uni->k_droop;
    in.n = static_cast<double>(params.n);
    in.v_nom = params.v_nom;
    in.pm_absmax = norm_inf(params.p_m);
    in.pm_abssum = std::abs(std::accumulate(params.p_m.begin(), params.p_m.end(), 0.0));
    in.sum_inv_lambda = laplacian_spectral_sum(dc).sum_inv_lambda;
    in.spectral_term = (in.n - 1.0) + in.k_v / in.v_nom * in.sum_inv_lambda;
    return in;
}

} // namespace

BoundSet bounds_decentralized(const PlantParams& params, const ControllerGains& gains,
                              const WeightedGraph& dc) {
    const BoundInputs in = bound_inputs(params, gains, dc);
    BoundSet b;
    b.variant = BoundVariant::Decentralized;
    b.e_gen = in.k_droop * in.pm_absmax / (in.k_droop + in.k_omega) * in.spectral_term;
    b.delta_e_v = in.k_omega / (in.n * in.k_droop * in.k_v) * in.pm_abssum;
    b.delta_e_omega = in.pm_abssum / (in.n * in.k_droop);
    b.e_v = b.delta_e_v +
            in.k_omega * in.pm_absmax / ((in.k_droop + in.k_omega) * in.v_nom) * in.sum_inv_lambda;
    b.e_omega = b.delta_e_omega + in.pm_absmax / (in.k_droop + in.k_omega) * in.spectral_term;
    return b;
}

BoundSet bounds_distributed(const PlantParams& params, const ControllerGains& gains,
                            const WeightedGraph& dc) {
    const BoundInputs in = bound_inputs(params, gains, dc);
    BoundSet b;
    b.variant = BoundVariant::Distributed;
    b.e_gen = in.k_droop * in.pm_absmax / (in.k_droop + in.k_omega) * in.spectral_term;
    b.e_v = in.k_omega * in.pm_absmax / ((in.k_droop + in.k_omega) * in.v_nom) * in.sum_inv_lambda;
    b.e_omega = in.pm_absmax / (in.k_droop + in.k_omega) * in.spectral_term;
    b.delta_e_v = in.k_omega / (in.n * in.k_droop * in.k_v) * in.pm_abssum;
    b.delta_e_omega = in.pm_abssum / (in.n * in.k_droop);

    // cross-check the closed-form differences against direct subtraction
    const BoundSet dec = bounds_decentralized(params, gains, dc);
    const double dv = dec.e_v - b.e_v;
    const double dw = dec.e_omega - b.e_omega;
    if (std::abs(dv - b.delta_e_v) > 1e-12 * std::max(1.0, std::abs(b.delta_e_v)) ||
        std::abs(dw - b.delta_e_omega) > 1e-12 * std::max(1.0, std::abs(b.delta_e_omega)))
        throw Error("bound-difference identity violated");
    return b;
}

ObjectiveVerdict verify_objective(const Trajectory& traj, const BoundSet& bounds,
                                  const PlantParams& params) {
    const std::size_t n = params.n;
    const std::size_t samples = traj.times.size();
    if (samples < 10) throw NotConverged("trajectory too short for tail analysis");
    const std::size_t tail_begin = samples - samples / 10;

    double drift = 0.0;
    for (std::size_t k = tail_begin; k + 1 < samples; ++k) {
        for (std::size_t i = 0; i < traj.states[k].size(); ++i)
            drift = std::max(drift, std::abs(traj.states[k + 1][i] - traj.states[k][i]));
    }
    if (drift >= 1e-6)
        throw NotConverged("tail window still drifts " + std::to_string(drift) + " per sample");

    const double pm_sum = std::accumulate(traj.p_m_final.begin(), traj.p_m_final.end(), 0.0);
    const double share = pm_sum / static_cast<double>(n);

    ObjectiveVerdict v;
    v.tail_drift = drift;
    v.omega_dev.assign(n, 0.0);
    v.v_dev.assign(n, 0.0);
    v.gen_dev.assign(n, 0.0);
    for (std::size_t k = tail_begin; k < samples; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            v.omega_dev[i] = std::max(v.omega_dev[i], std::abs(traj.omega[k][i] - params.omega_ref));
            v.v_dev[i] = std::max(v.v_dev[i], std::abs(traj.volt[k][i] - params.v_ref[i]));
            v.gen_dev[i] = std::max(v.gen_dev[i], std::abs(traj.p_gen[k][i] + share));
        }
    }

    v.omega_margin.resize(n);
    v.v_margin.resize(n);
    v.gen_margin.resize(n);
    v.pass = true;
    for (std::size_t i = 0; i < n; ++i) {
        v.omega_margin[i] = bounds.e_omega - v.omega_dev[i];
        v.v_margin[i] = bounds.e_v - v.v_dev[i];
        v.gen_margin[i] = bounds.e_gen - v.gen_dev[i];
        if (v.omega_margin[i] < 0) {
            v.pass = false;
            v.failures.push_back("area " + std::to_string(i + 1) + ": frequency deviation exceeds bound");
        }
        if (v.v_margin[i] < 0) {
            v.pass = false;
            v.failures.push_back("area " + std::to_string(i + 1) + ": voltage deviation exceeds bound");
        }
        if (v.gen_margin[i] < 0) {
            v.pass = false;
            v.failures.push_back("area " + std::to_string(i + 1) + ": power-sharing deviation exceeds bound");
        }
    }
    return v;
}

} // namespace mtdc

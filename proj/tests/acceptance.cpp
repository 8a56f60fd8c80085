// Acceptance suite: exercises every published claim the library is expected
// to certify, one pass/fail line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "mtdc/scenario_io.hpp"
#include "oracles.hpp"

using namespace mtdc;
using Clock = std::chrono::steady_clock;

namespace {

struct Checker {
    int failed = 0;

    void criterion(int num, const std::string& name, bool pass, const std::string& detail) {
        std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", num, name.c_str(),
                    detail.c_str());
        if (!pass) ++failed;
    }

    int finish() const {
        std::printf("%s: %d criterion(s) failed\n", failed == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                    failed);
        return failed == 0 ? 0 : 1;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Vec fault_p_m() { return {-0.2, 0, 0, 0, 0, 0}; }

Scenario with_p_m_events(Scenario scn, const Vec& p_m) {
    scn.events.clear();
    for (std::size_t i = 0; i < p_m.size(); ++i)
        if (p_m[i] != 0.0) scn.events.push_back({1.0, i, p_m[i]});
    return scn;
}

struct TailStats {
    Vec omega_dev;      // per-area max |omega_hat| over the tail window
    Vec v_dev;
    Vec gen_dev;        // per-area max |p_gen + share|
    double drift_out;   // max per-sample change of omega/volt in the tail
    double spread_end;  // max_i,j |p_gen_i - p_gen_j| at the last sample
    double mean_abs_gen_end;
};

TailStats tail_stats(const Trajectory& traj, const PlantParams& params) {
    const std::size_t n = traj.n;
    const std::size_t samples = traj.times.size();
    const std::size_t tail = samples - samples / 10;
    const double share =
        std::accumulate(traj.p_m_final.begin(), traj.p_m_final.end(), 0.0) / static_cast<double>(n);

    TailStats s;
    s.omega_dev.assign(n, 0.0);
    s.v_dev.assign(n, 0.0);
    s.gen_dev.assign(n, 0.0);
    s.drift_out = 0.0;
    for (std::size_t k = tail; k < samples; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            s.omega_dev[i] = std::max(s.omega_dev[i], std::abs(traj.omega[k][i] - params.omega_ref));
            s.v_dev[i] = std::max(s.v_dev[i], std::abs(traj.volt[k][i] - params.v_ref[i]));
            s.gen_dev[i] = std::max(s.gen_dev[i], std::abs(traj.p_gen[k][i] + share));
            if (k + 1 < samples) {
                s.drift_out = std::max(s.drift_out,
                                       std::abs(traj.omega[k + 1][i] - traj.omega[k][i]));
                s.drift_out = std::max(s.drift_out,
                                       std::abs(traj.volt[k + 1][i] - traj.volt[k][i]));
            }
        }
    }
    double lo = traj.p_gen.back()[0], hi = lo, mean_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, traj.p_gen.back()[i]);
        hi = std::max(hi, traj.p_gen.back()[i]);
        mean_abs += std::abs(traj.p_gen.back()[i]);
    }
    s.spread_end = hi - lo;
    s.mean_abs_gen_end = mean_abs / static_cast<double>(n);
    return s;
}

// 1. Lyapunov + Cholesky certificates for the four controller configurations.
void criterion_1(Checker& ck) {
    const auto t0 = Clock::now();
    std::ostringstream detail;
    bool pass = true;

    struct Case {
        Config config;
        double gamma;
        bool expect_hurwitz; // false only for the singular averaged case
    };
    const Case cases[] = {
        {Config::DroopOnly, 0.0, true},
        {Config::SecondaryComplete, 0.0, false},
        {Config::SecondaryComplete, 1e-4, true},
        {Config::SecondaryProjected, 0.0, true},
        {Config::SecondaryProjected, 1e-4, true},
        {Config::SecondaryDistributed, 0.0, true},
    };
    for (const Case& c : cases) {
        Scenario scn = benchmark_scenario(c.config);
        scn.params.p_m = fault_p_m();
        scn.gains.gamma = c.gamma;
        const ClosedLoopSystem sys = assemble(scn.params, scn.gains, scn.dc, scn.comm, c.config);
        const StabilityCertificate cert = certify_stability(sys);
        if (!cert.q1_pd) {
            pass = false;
            detail << config_name(c.config) << ": q1 not pd; ";
        }
        if (cert.hurwitz != c.expect_hurwitz) {
            pass = false;
            detail << config_name(c.config) << " gamma=" << c.gamma
                   << ": hurwitz=" << cert.hurwitz << " expected " << c.expect_hurwitz << "; ";
        }
        bool singular = false;
        try {
            equilibrium(sys);
        } catch (const SingularSystem&) {
            singular = true;
        }
        if (singular == c.expect_hurwitz) {
            pass = false;
            detail << config_name(c.config) << ": singularity detection mismatch; ";
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 1.0) {
        pass = false;
        detail << "runtime " << fmt(elapsed) << " s >= 1 s; ";
    }
    detail << "q1 pd everywhere, hurwitz on all nonsingular cases, " << fmt(elapsed) << " s";
    ck.criterion(1, "stability certification", pass, detail.str());
}

// 2. Output equivalence of the redundant averaged controller and its projection.
void criterion_2(Checker& ck) {
    Scenario s9 = benchmark_scenario(Config::SecondaryComplete);
    Scenario s10 = benchmark_scenario(Config::SecondaryProjected);
    s9.t_end = s10.t_end = 10.0;

    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    Vec x9(18);
    for (auto& v : x9) v = u(rng);
    Vec x10(13);
    for (int i = 0; i < 12; ++i) x10[i] = x9[i];
    double eta_mean = 0.0;
    for (int i = 12; i < 18; ++i) eta_mean += x9[i] / 6.0;
    x10[12] = eta_mean;
    s9.x0 = x9;
    s10.x0 = x10;

    const Trajectory t9 = integrate(s9);
    const Trajectory t10 = integrate(s10);
    double worst = 0.0;
    for (std::size_t k = 0; k < t9.times.size(); ++k)
        for (int i = 0; i < 12; ++i)
            worst = std::max(worst, std::abs(t9.states[k][i] - t10.states[k][i]));

    ck.criterion(2, "projection equivalence", worst <= 1e-8,
                 "sup |output difference| over 10 s = " + fmt(worst) + " (<= 1e-8)");
}

// 3. Lyapunov descent along the distributed benchmark trajectory.
void criterion_3(Checker& ck) {
    const Scenario scn = benchmark_scenario(Config::SecondaryDistributed);
    const Trajectory traj = integrate(scn);
    const std::size_t kf = traj.event_samples.at(0);

    std::size_t violations = 0;
    double worst_rise = 0.0;
    for (std::size_t k = kf + 1; k < traj.lyap_w.size(); ++k) {
        const double rise = traj.lyap_w[k] - traj.lyap_w[k - 1];
        if (rise > 1e-9) {
            ++violations;
            worst_rise = std::max(worst_rise, rise);
        }
    }
    const double ratio = traj.lyap_w.back() / traj.lyap_w[kf];
    const bool pass = violations == 0 && ratio <= 1e-3;
    ck.criterion(3, "lyapunov monotonicity", pass,
                 "post-fault rises above slack: " + std::to_string(violations) +
                     ", W(end)/W(fault+) = " + fmt(ratio) + " (<= 1e-3)");
}

// 4. Tail errors of simulated runs never exceed the matching bound set.
void criterion_4(Checker& ck) {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> draw(-0.3, 0.3);

    std::vector<Vec> disturbances;
    disturbances.push_back(fault_p_m());
    for (int d = 0; d < 50; ++d) {
        Vec p(6);
        for (auto& v : p) v = draw(rng);
        disturbances.push_back(p);
    }

    std::size_t violations = 0, runs = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (const Config config : {Config::DroopOnly, Config::SecondaryDistributed}) {
        for (const Vec& p_m : disturbances) {
            Scenario scn = with_p_m_events(benchmark_scenario(config), p_m);
            PlantParams post = scn.params;
            post.p_m = p_m;
            const BoundSet bounds = config == Config::DroopOnly
                                        ? bounds_decentralized(post, scn.gains, scn.dc)
                                        : bounds_distributed(post, scn.gains, scn.dc);
            const Trajectory traj = integrate(scn);
            const TailStats stats = tail_stats(traj, scn.params);
            ++runs;
            for (int i = 0; i < 6; ++i) {
                const double m = std::min({bounds.e_omega - stats.omega_dev[i],
                                           bounds.e_v - stats.v_dev[i],
                                           bounds.e_gen - stats.gen_dev[i]});
                min_margin = std::min(min_margin, m);
                if (m < 0.0) ++violations;
            }
        }
    }
    ck.criterion(4, "bound dominance", violations == 0,
                 std::to_string(runs) + " runs (fault + 50 draws, both controller/bound pairs), " +
                     std::to_string(violations) + " violations, min margin " + fmt(min_margin));
}

// 5. Zero-average property and the parameter ladders of the secondary layer.
void criterion_5(Checker& ck) {
    std::ostringstream detail;
    bool pass = true;
    const double pm_norm = 0.2;

    Scenario dist = with_p_m_events(benchmark_scenario(Config::SecondaryDistributed), fault_p_m());
    const std::vector<SweepEntry> ladder = sweep(dist, "delta", {5, 50, 500});
    // The average deviations vanish identically at every delta (1^T L_c = 0),
    // so the solved values sit at roundoff; the ladder checks the level at
    // every rung, non-increase within roundoff slack, and the quantity that
    // genuinely contracts with delta: the power-sharing spread.
    double prev_w = std::numeric_limits<double>::infinity();
    double prev_v = std::numeric_limits<double>::infinity();
    double prev_spread = std::numeric_limits<double>::infinity();
    detail << "averages ";
    for (const SweepEntry& e : ladder) {
        if (!e.ok) {
            pass = false;
            detail << "delta=" << e.value << " failed: " << e.error << "; ";
            continue;
        }
        const double sw = std::abs(e.sum_omega_hat), sv = std::abs(e.sum_v_hat);
        detail << fmt(sw) << "/" << fmt(sv) << " ";
        if (sw > 1e-3 * pm_norm || sv > 1e-3 * pm_norm) pass = false;
        if (sw > prev_w + 1e-12 * pm_norm || sv > prev_v + 1e-12 * pm_norm) pass = false;
        prev_w = sw;
        prev_v = sv;

        double lo = e.eq.p_gen_asym[0], hi = lo;
        for (double g : e.eq.p_gen_asym) {
            lo = std::min(lo, g);
            hi = std::max(hi, g);
        }
        if (!(hi - lo < prev_spread)) {
            pass = false;
            detail << "(spread not decreasing) ";
        }
        prev_spread = hi - lo;
    }

    Scenario proj = with_p_m_events(benchmark_scenario(Config::SecondaryProjected), fault_p_m());
    const std::vector<SweepEntry> gamma_ladder = sweep(proj, "gamma", {1e-2, 1e-4, 1e-6});
    // limit follows from the closed-loop matrices:
    // (n k_v k_droop_i / k_omega) eta' = 1^T P^m at the equilibrium
    const double limit = 9000.0 * (-0.2) / (6.0 * 110.0 * 10.0);
    if (!gamma_ladder.back().ok) {
        pass = false;
        detail << "; gamma ladder failed";
    } else {
        const double got = gamma_ladder.back().eta_prime;
        const double rel = std::abs(got - limit) / std::abs(limit);
        detail << "; eta'(1e-6) = " << fmt(got) << " vs limit " << fmt(limit) << " (rel "
               << fmt(rel) << ")";
        if (rel > 1e-3) pass = false;
    }
    ck.criterion(5, "zero-average property", pass, detail.str());
}

// 6. Closed-form bound differences.
void criterion_6(Checker& ck) {
    PlantParams p = benchmark_scenario(Config::DroopOnly).params;
    p.p_m = fault_p_m();
    const ControllerGains g = benchmark_scenario(Config::DroopOnly).gains;
    const WeightedGraph dc = benchmark_scenario(Config::DroopOnly).dc;

    const BoundSet dec = bounds_decentralized(p, g, dc);
    const BoundSet dist = bounds_distributed(p, g, dc);

    const double dv = dec.e_v - dist.e_v;
    const double dw = dec.e_omega - dist.e_omega;
    const double expected_dw = 0.2 / (6.0 * 8.0);
    const bool pass =
        std::abs(dv - dist.delta_e_v) <= 1e-12 * std::max(1.0, std::abs(dist.delta_e_v)) &&
        std::abs(dw - dist.delta_e_omega) <= 1e-12 * std::max(1.0, std::abs(dist.delta_e_omega)) &&
        std::abs(dw - expected_dw) <= 1e-12;
    ck.criterion(6, "bound-difference formulas", pass,
                 "e_omega difference = " + fmt(dw) + " (expected " + fmt(expected_dw) +
                     "), subtraction matches closed forms to 1e-12");
}

// 7. Qualitative reproduction of the published fault experiment.
void criterion_7(Checker& ck) {
    std::ostringstream detail;
    bool pass = true;

    struct Run {
        Config config;
        double delta;
        Trajectory traj;
        TailStats stats;
        double seconds;
    };
    std::vector<Run> runs;
    for (const auto& [config, delta] :
         std::vector<std::pair<Config, double>>{{Config::DroopOnly, 5.0},
                                                {Config::SecondaryComplete, 5.0},
                                                {Config::SecondaryDistributed, 5.0},
                                                {Config::SecondaryDistributed, 500.0}}) {
        Scenario scn = benchmark_scenario(config);
        scn.gains.delta = delta;
        const auto t0 = Clock::now();
        Trajectory traj = integrate(scn);
        const double secs = seconds_since(t0);
        if (secs >= 30.0) {
            pass = false;
            detail << config_name(config) << " runtime " << fmt(secs) << " s >= 30 s; ";
        }
        TailStats stats = tail_stats(traj, scn.params);
        runs.push_back({config, delta, std::move(traj), std::move(stats), secs});
    }

    // (a) the faulted area drops first
    for (const Run& r : runs) {
        const std::size_t kf = r.traj.event_samples.at(0);
        for (std::size_t k = kf + 1; k <= kf + 5; ++k) {
            std::size_t argmin = 0;
            for (std::size_t i = 1; i < 6; ++i)
                if (r.traj.omega[k][i] < r.traj.omega[k][argmin]) argmin = i;
            if (argmin != 0 || !(r.traj.omega[k][0] < 1.0)) {
                pass = false;
                detail << config_name(r.config) << ": area 1 does not lead the drop; ";
                break;
            }
        }
    }

    // (b) tail drift below 1e-6 per sample for frequencies and voltages
    for (const Run& r : runs) {
        if (r.stats.drift_out >= 1e-6) {
            pass = false;
            detail << config_name(r.config) << ": tail drift " << fmt(r.stats.drift_out) << "; ";
        }
    }

    // (c) secondary control shrinks the stationary frequency error
    const double droop_w = *std::max_element(runs[0].stats.omega_dev.begin(),
                                             runs[0].stats.omega_dev.end());
    for (int idx : {1, 2}) {
        const double w = *std::max_element(runs[idx].stats.omega_dev.begin(),
                                           runs[idx].stats.omega_dev.end());
        if (!(w < droop_w)) {
            pass = false;
            detail << config_name(runs[idx].config) << ": tail |omega_hat| not below droop; ";
        }
    }

    // (d) high consensus gain shares power within 10%
    const Run& sharp = runs[3];
    const double rel_spread = sharp.stats.spread_end / sharp.stats.mean_abs_gen_end;
    if (!(rel_spread < 0.1)) {
        pass = false;
        detail << "delta=500 spread ratio " << fmt(rel_spread) << "; ";
    }

    detail << "drop order ok, drifts < 1e-6, secondary tail error < droop, spread ratio "
           << fmt(rel_spread) << ", slowest run " << fmt(runs[1].seconds) << " s";
    ck.criterion(7, "fault experiment reproduction", pass, detail.str());
}

// 8. Linearized right-hand side vs assembled system; RL vs resistive steady state.
void criterion_8(Checker& ck) {
    std::ostringstream detail;
    bool pass = true;

    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst_rhs = 0.0;
    for (const Config config : {Config::DroopOnly, Config::SecondaryComplete,
                                Config::SecondaryProjected, Config::SecondaryDistributed}) {
        Scenario scn = benchmark_scenario(config);
        scn.params.p_m = fault_p_m();
        const ClosedLoopSystem sys = assemble(scn.params, scn.gains, scn.dc, scn.comm, config);
        const std::size_t dim = sys.layout.size();
        for (int trial = 0; trial < 100; ++trial) {
            Vec x_hat(dim);
            for (auto& v : x_hat) v = u(rng);
            Vec abs_state(dim);
            for (int i = 0; i < 6; ++i) {
                abs_state[i] = scn.params.omega_ref + x_hat[i];
                abs_state[6 + i] = scn.params.v_ref[i] + x_hat[6 + i];
            }
            for (std::size_t i = 12; i < dim; ++i) abs_state[i] = x_hat[i];
            const Vec dx = nonlinear_rhs(scn.params, scn.gains, scn.dc, scn.comm, config,
                                         abs_state, scn.params.p_m, PowerCurrentMode::Linearized);
            Vec expected = sys.a * x_hat;
            for (std::size_t i = 0; i < dim; ++i) expected[i] += sys.b[i];
            double scale = 1.0;
            for (double v : expected) scale = std::max(scale, std::abs(v));
            for (std::size_t i = 0; i < dim; ++i)
                worst_rhs = std::max(worst_rhs, std::abs(dx[i] - expected[i]) / scale);
        }
    }
    if (worst_rhs > 1e-10) {
        pass = false;
        detail << "rhs mismatch " << fmt(worst_rhs) << "; ";
    }

    Scenario rl = benchmark_scenario(Config::DroopOnly);
    rl.mode = SimMode::RlLines;
    rl.t_end = 8.0;
    const Trajectory traj = integrate(rl);
    PlantParams post = rl.params;
    post.p_m = fault_p_m();
    const EquilibriumReport eq = equilibrium(assemble(post, rl.gains, rl.dc, rl.comm, rl.config));
    double gap = 0.0;
    for (int i = 0; i < 12; ++i)
        gap = std::max(gap, std::abs(traj.states.back()[i] - eq.x0[i]));
    if (gap > 1e-6) {
        pass = false;
        detail << "RL steady-state gap " << fmt(gap) << "; ";
    }
    detail << "max rhs mismatch " << fmt(worst_rhs) << " (<= 1e-10), RL vs resistive steady gap "
           << fmt(gap) << " (<= 1e-6)";
    ck.criterion(8, "oracle equivalence", pass, detail.str());
}

// 9. Kernel-level checks against independent oracles.
void criterion_9(Checker& ck) {
    std::ostringstream detail;
    bool pass = true;

    const Matrix lr = laplacian(benchmark_scenario(Config::DroopOnly).dc);
    const SpectralResult eig = jacobi_sym_eig(lr);
    const Vec roots = oracle::eig_charpoly_bisect(lr);
    double worst_eig = 0.0;
    for (int i = 0; i < 6; ++i)
        worst_eig = std::max(worst_eig, std::abs(eig.eigenvalues[i] - roots[i]));
    if (worst_eig > 1e-8) pass = false;

    std::mt19937 rng(31415);
    double worst_res = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 11;
        const Matrix a = oracle::random_hurwitz(rng, n);
        const Matrix p = lyapunov_solve(a);
        const Matrix residual = transpose(a) * p + p * a + Matrix::identity(n);
        worst_res = std::max(worst_res, max_abs(residual));
    }
    if (worst_res > 1e-7) pass = false;

    detail << "jacobi vs bisection " << fmt(worst_eig) << " (<= 1e-8), lyapunov residual "
           << fmt(worst_res) << " over 100 systems (<= 1e-7)";
    ck.criterion(9, "kernel correctness", pass, detail.str());
}

} // namespace

int main() {
    Checker ck;
    criterion_1(ck);
    criterion_2(ck);
    criterion_3(ck);
    criterion_4(ck);
    criterion_5(ck);
    criterion_6(ck);
    criterion_7(ck);
    criterion_8(ck);
    criterion_9(ck);
    return ck.finish();
}

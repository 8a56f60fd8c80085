#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtdc/analysis.hpp"
#include "mtdc/plant.hpp"
#include "mtdc/trajectory.hpp"

namespace mtdc {

enum class SimMode { Linear, NonlinearPowerCurrent, RlLines };

const char* sim_mode_name(SimMode m);

// Step change of the disturbance in one area, applied at the first sample
// at or after t.
struct SimEvent {
    double t = 0.0;
    std::size_t area = 0; // 0-based
    double dp_m = 0.0;
};

// Per-edge line constants aligned with the DC graph's edge list. l must be
// positive in RlLines mode; c is lumped into the terminal capacitances there.
struct LineData {
    Vec l;
    Vec c;
};

struct Scenario {
    PlantParams params;
    ControllerGains gains;
    WeightedGraph dc;
    std::optional<WeightedGraph> comm;
    LineData lines;
    Config config = Config::DroopOnly;
    SimMode mode = SimMode::Linear;
    double dt = 1e-4;
    double t_end = 35.0;
    std::vector<SimEvent> events;
    std::optional<Vec> x0; // deviation coordinates; defaults to the origin
    bool force_dt = false; // take dt as the raw step even when unstable

    void validate() const;
};

// Upper estimate of the spectral radius via scaled repeated squaring of A
// (||A^64||_F^(1/64) >= rho(A), tight for these systems).
double spectral_radius_estimate(const Matrix& a);

// One classical RK4 step for x_dot = A x + b is x+ = R x + F b.
Matrix rk4_step_matrix(const Matrix& a, double h);    // R = sum_{k<=4} (hA)^k / k!
Matrix rk4_forcing_matrix(const Matrix& a, double h); // F = h sum_{k<=3} (hA)^k / (k+1)!

// Fixed-step RK4 integration of the scenario. The scenario dt is the output
// sampling interval; internally the step is subdivided until
// h * rho(A) <= 0.1 (unless force_dt is set, which flags a warning and may
// end in StepSizeUnstable once a state magnitude exceeds 1e6).
Trajectory integrate(const Scenario& scn);

// Resistive-line model extended with per-edge inductor current states.
// Shunt line capacitances are lumped onto the terminals. Reached from
// integrate() when mode == RlLines.
Trajectory integrate_rl_lines(const Scenario& scn);

// Augmented state-space of the RL-line model (exposed for analysis/tests).
struct RlSystem {
    Matrix a;
    Vec b;
    std::size_t base_dim = 0; // leading block matching the resistive layout
};
RlSystem assemble_rl(const Scenario& scn);

struct SweepEntry {
    double value = 0.0;
    bool ok = false;
    std::string error;
    EquilibriumReport eq;           // valid when ok
    double sum_omega_hat = 0.0;     // 1^T omega_hat at equilibrium
    double sum_v_hat = 0.0;         // 1^T v_hat at equilibrium
    double eta_prime = 0.0;         // integral-state mean at equilibrium
    std::optional<bool> bounds_pass; // equilibrium deviations vs matching bounds
};

// Re-solves the equilibrium for each parameter value. Accepted parameters:
// delta, gamma, k_droop, k_droop_i, k_omega, k_v. Per-value failures are
// recorded, not thrown.
std::vector<SweepEntry> sweep(const Scenario& base, const std::string& parameter,
                              const Vec& values);

} // namespace mtdc

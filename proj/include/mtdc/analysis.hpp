#pragma once

#include <string>
#include <vector>

#include "mtdc/plant.hpp"
#include "mtdc/trajectory.hpp"

namespace mtdc {

struct EquilibriumReport {
    Vec x0;              // equilibrium in deviation coordinates
    double omega_hat_avg = 0.0;
    double v_hat_avg = 0.0;
    Vec p_gen_asym;      // asymptotic generation command per area
    double residual = 0.0;
};

// Solves A x0 = -b. Throws SingularSystem when the closed-loop matrix is
// singular (gamma = 0 with the redundant averaged controller), in which
// case limit formulas must be used instead.
EquilibriumReport equilibrium(const ClosedLoopSystem& sys);

struct StabilityCertificate {
    bool hurwitz = false;
    double lyap_p_min_pivot = 0.0;
    bool q1_pd = false;
    std::string method_notes;
};

// Certifies Hurwitz stability via the Lyapunov equation plus a Cholesky
// positive-definiteness check, and independently checks the dissipation
// matrix Q1. Never throws; marginal cases report hurwitz=false with notes.
StabilityCertificate certify_stability(const ClosedLoopSystem& sys);

// Dissipation quadratic form [[K_w (K_v)^-1 (K_w + K_droop), -K_w], [-K_w, K_v]].
Matrix build_q1(const ControllerGains& gains);

// Positive definiteness of Q1 through the per-area Schur complement.
bool q1_schur_positive(const ControllerGains& gains);

// Lyapunov function value for a state given in deviation-from-equilibrium
// coordinates (layout of the config). The voltage term is weighted by the
// capacitances C (energy form), which is the weighting under which the
// function decreases along trajectories.
double lyapunov_value(const PlantParams& params, const ControllerGains& gains, Config config,
                      const Vec& deviation);

// Reference point for Lyapunov evaluation under a given disturbance. For the
// redundant averaged controller (whose full-state equilibrium may not exist)
// the reference comes from the projected twin system and the eta block holds
// the projected value in every component.
Vec lyapunov_reference(const PlantParams& params, const ControllerGains& gains,
                       const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                       Config config, const Vec& p_m);

enum class BoundVariant { Decentralized, Distributed };

// Static-error bounds. Deviations from the printed formulas: every
// disturbance maximum is taken in absolute value (a sign-definite
// disturbance would otherwise produce a negative "bound").
struct BoundSet {
    BoundVariant variant = BoundVariant::Decentralized;
    double e_gen = 0.0;
    double e_v = 0.0;
    double e_omega = 0.0;
    double delta_e_v = 0.0;     // decentralized minus distributed voltage bound
    double delta_e_omega = 0.0; // decentralized minus distributed frequency bound
};

// Both require uniform k_omega/k_v/k_droop (NonUniformGains otherwise).
BoundSet bounds_decentralized(const PlantParams& params, const ControllerGains& gains,
                              const WeightedGraph& dc);
BoundSet bounds_distributed(const PlantParams& params, const ControllerGains& gains,
                            const WeightedGraph& dc);

struct ObjectiveVerdict {
    bool pass = false;
    double tail_drift = 0.0;   // max per-sample state change in the tail window
    Vec omega_dev;             // per-area tail max |omega_i - omega_ref|
    Vec v_dev;                 // per-area tail max |V_i - V_ref_i|
    Vec gen_dev;               // per-area tail max |P_gen_i + (1/n) sum P_m|
    Vec omega_margin;          // bound minus deviation, per area
    Vec v_margin;
    Vec gen_margin;
    std::vector<std::string> failures;
};

// Compares the trailing 10% of a trajectory against a bound set. Throws
// NotConverged when the tail still moves more than 1e-6 per sample.
ObjectiveVerdict verify_objective(const Trajectory& traj, const BoundSet& bounds,
                                  const PlantParams& params);

} // namespace mtdc

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtdc/densela.hpp"
#include "mtdc/netgraph.hpp"

namespace mtdc {

// Which frequency controller closes the loop.
enum class Config {
    DroopOnly,            // proportional droop, 2n states (omega_hat, v_hat)
    SecondaryComplete,    // averaged integral state, 3n states (redundant form)
    SecondaryProjected,   // projected single integral state, 2n+1 states
    SecondaryDistributed, // consensus-filtered integral states, 3n states
};

const char* config_name(Config c);

// Physical constants and references for the n AC areas and their DC
// terminals. All values are per-unit.
struct PlantParams {
    std::size_t n = 0;
    Vec m;         // generator inertia per area
    Vec cap;       // DC-side terminal capacitance per area
    double v_nom = 1.0;
    Vec v_ref;     // reference DC voltage per terminal
    double omega_ref = 1.0;
    Vec p_nom;     // nominal generated power per area
    Vec p_inj_nom; // nominal injected power per area (must equal p_nom)
    Vec p_m;       // uncontrolled generation disturbance per area

    void validate() const; // throws InvalidParams
};

// Feedback gains. Arrays are per-area; gamma/delta are shared scalars.
struct ControllerGains {
    Vec k_omega;
    Vec k_v;
    Vec k_droop;
    Vec k_droop_i;
    double gamma = 0.0;
    double delta = 0.0;

    void validate(std::size_t n) const; // throws InvalidParams

    // Uniform values when all areas share the same k_omega/k_v/k_droop
    // (the assumption behind the static-error bound formulas).
    struct UniformPrimary {
        double k_omega, k_v, k_droop;
    };
    std::optional<UniformPrimary> uniform_primary() const;
    std::optional<double> uniform_droop_i() const;
};

// Ordered state blocks of a closed-loop state vector.
enum class StateBlock { OmegaHat, VHat, Eta, EtaPrime };

struct StateLayout {
    std::vector<std::pair<StateBlock, std::size_t>> blocks;
    std::size_t size() const;
    std::size_t offset(StateBlock b) const; // throws if absent
    bool has(StateBlock b) const;
};

StateLayout layout_for(Config config, std::size_t n);

// Linear closed-loop system x_dot = a x + b in deviation coordinates
// (omega_hat = omega - omega_ref, v_hat = V - V_ref, plus integral states).
struct ClosedLoopSystem {
    Config config = Config::DroopOnly;
    Matrix a;
    Vec b;
    StateLayout layout;
    PlantParams params;
    ControllerGains gains;
    WeightedGraph dc;
    std::optional<WeightedGraph> comm;
};

// Builds the closed-loop matrices for the requested controller. comm is
// required (and must be connected) only for SecondaryDistributed.
ClosedLoopSystem assemble(const PlantParams& params, const ControllerGains& gains,
                          const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                          Config config);

// Recomputes the forcing vector for a new disturbance, matching assemble().
Vec forcing(const PlantParams& params, const WeightedGraph& dc, Config config, const Vec& p_m);

enum class PowerCurrentMode {
    Linearized,           // V_nom * I_inj = P_inj
    NonlinearPowerCurrent // V_i * I_inj = P_inj; guards V_i > 0.5 V_nom
};

// Generation command P_gen and converter injection P_inj for an absolute
// state (omega, V) and the controller's integral block (size n for
// SecondaryComplete/Distributed, size 1 for SecondaryProjected, empty for
// DroopOnly).
struct ControllerOutputs {
    Vec p_gen;
    Vec p_inj;
};
ControllerOutputs controller_outputs(const PlantParams& params, const ControllerGains& gains,
                                     Config config, const Vec& omega, const Vec& v,
                                     const Vec& eta);

// Right-hand side of the plant + controller dynamics at an absolute state
// laid out as (omega, V, integral block per config). p_m is the currently
// active disturbance. In Linearized mode this equals a*x_hat + b of the
// assembled system written in absolute coordinates.
Vec nonlinear_rhs(const PlantParams& params, const ControllerGains& gains,
                  const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                  Config config, const Vec& state, const Vec& p_m, PowerCurrentMode mode);

// Allocation-free variant for integrator hot loops.
void nonlinear_rhs_into(const PlantParams& params, const ControllerGains& gains,
                        const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                        Config config, const Vec& state, const Vec& p_m, PowerCurrentMode mode,
                        Vec& dx);

} // namespace mtdc

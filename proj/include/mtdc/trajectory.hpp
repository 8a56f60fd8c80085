#pragma once

#include <cstddef>
#include <vector>

#include "mtdc/densela.hpp"

namespace mtdc {

// Uniformly sampled simulation result. omega/volt are absolute per-unit
// values; p_gen is the generation-control output; lyap_w is the Lyapunov
// function value relative to the equilibrium of the active forcing segment.
struct Trajectory {
    std::size_t n = 0;
    double dt = 0.0;
    Vec times;
    std::vector<Vec> states; // closed-loop state vectors (deviation coords)
    std::vector<Vec> omega;
    std::vector<Vec> volt;
    std::vector<Vec> p_gen;
    Vec lyap_w;
    Vec p_m_final;                    // disturbance active at t_end
    std::vector<std::size_t> event_samples;
    bool dt_forced_warning = false;
};

} // namespace mtdc

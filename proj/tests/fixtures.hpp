#pragma once

// Shared six-terminal benchmark pieces for the unit suites.

#include "mtdc/plant.hpp"

namespace fixtures {

using namespace mtdc;

inline WeightedGraph six_terminal_dc() {
    auto g = [](double r) { return 1.0 / r; };
    return make_graph(6, GraphKind::DcGrid,
                      {
                          {0, 1, g(0.0586)},
                          {0, 2, g(0.0586)},
                          {1, 3, g(0.0586)},
                          {2, 3, g(0.0586)},
                          {1, 2, g(0.0878)},
                          {1, 4, g(0.0732)},
                          {3, 4, g(0.0732)},
                          {1, 5, g(0.1464)},
                          {2, 4, g(0.1464)},
                          {4, 5, g(0.1464)},
                      });
}

inline WeightedGraph ring_comm() {
    return make_graph(6, GraphKind::Comm,
                      {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {2, 4, 1}, {4, 5, 1}, {0, 5, 1}, {0, 4, 1}});
}

inline PlantParams benchmark_params(std::size_t n = 6) {
    PlantParams p;
    p.n = n;
    p.m.assign(n, 0.1);
    p.cap.assign(n, 0.375e-3);
    p.v_nom = 1.0;
    p.v_ref.assign(n, 1.0);
    p.omega_ref = 1.0;
    p.p_nom.assign(n, 0.0);
    p.p_inj_nom.assign(n, 0.0);
    p.p_m.assign(n, 0.0);
    return p;
}

inline ControllerGains table_gains(std::size_t n = 6) {
    ControllerGains g;
    g.k_omega.assign(n, 9000.0);
    g.k_v.assign(n, 110.0);
    g.k_droop.assign(n, 8.0);
    g.k_droop_i.assign(n, 10.0);
    g.gamma = 0.0;
    g.delta = 5.0;
    return g;
}

inline WeightedGraph single_node_dc() { return make_graph(1, GraphKind::DcGrid, {}); }

} // namespace fixtures

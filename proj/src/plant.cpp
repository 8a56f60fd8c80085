#include "mtdc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtdc {

const char* config_name(Config c) {
    switch (c) {
        case Config::DroopOnly: return "droop";
        case Config::SecondaryComplete: return "secondary-complete";
        case Config::SecondaryProjected: return "secondary-projected";
        case Config::SecondaryDistributed: return "secondary-distributed";
    }
    return "?";
}

namespace {

void require_positive(const Vec& v, std::size_t n, const char* name) {
    if (v.size() != n) throw InvalidParams(std::string(name) + ": expected " + std::to_string(n) + " entries");
    for (double x : v)
        if (!(x > 0.0) || !std::isfinite(x))
            throw InvalidParams(std::string(name) + ": entries must be positive and finite");
}

void require_finite(const Vec& v, std::size_t n, const char* name) {
    if (v.size() != n) throw InvalidParams(std::string(name) + ": expected " + std::to_string(n) + " entries");
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidParams(std::string(name) + ": entries must be finite");
}

} // namespace

void PlantParams::validate() const {
    if (n == 0) throw InvalidParams("params: at least one area required");
    require_positive(m, n, "m");
    require_positive(cap, n, "cap");
    if (!(v_nom > 0.0)) throw InvalidParams("v_nom must be positive");
    require_positive(v_ref, n, "v_ref");
    if (!std::isfinite(omega_ref)) throw InvalidParams("omega_ref must be finite");
    require_finite(p_nom, n, "p_nom");
    require_finite(p_inj_nom, n, "p_inj_nom");
    require_finite(p_m, n, "p_m");
    for (std::size_t i = 0; i < n; ++i)
        if (p_nom[i] != p_inj_nom[i])
            throw InvalidParams("nominal generated power must equal nominal injected power (area " +
                                std::to_string(i + 1) + ")");
}

void ControllerGains::validate(std::size_t n) const {
    require_positive(k_omega, n, "k_omega");
    require_positive(k_v, n, "k_v");
    require_positive(k_droop, n, "k_droop");
    require_positive(k_droop_i, n, "k_droop_i");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidParams("gamma must be >= 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidParams("delta must be positive");
}

namespace {
bool all_equal(const Vec& v) {
    return !v.empty() &&
           std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}
} // namespace

std::optional<ControllerGains::UniformPrimary> ControllerGains::uniform_primary() const {
    if (all_equal(k_omega) && all_equal(k_v) && all_equal(k_droop))
        return UniformPrimary{k_omega.front(), k_v.front(), k_droop.front()};
    return std::nullopt;
}

std::optional<double> ControllerGains::uniform_droop_i() const {
    if (all_equal(k_droop_i)) return k_droop_i.front();
    return std::nullopt;
}

std::size_t StateLayout::size() const {
    std::size_t s = 0;
    for (const auto& [b, len] : blocks) s += len;
    return s;
}

std::size_t StateLayout::offset(StateBlock b) const {
    std::size_t off = 0;
    for (const auto& [blk, len] : blocks) {
        if (blk == b) return off;
        off += len;
    }
    throw std::logic_error("state block not present in layout");
}

bool StateLayout::has(StateBlock b) const {
    for (const auto& [blk, len] : blocks)
        if (blk == b) return true;
    return false;
}

StateLayout layout_for(Config config, std::size_t n) {
    StateLayout l;
    l.blocks.push_back({StateBlock::OmegaHat, n});
    l.blocks.push_back({StateBlock::VHat, n});
    switch (config) {
        case Config::DroopOnly: break;
        case Config::SecondaryComplete:
        case Config::SecondaryDistributed: l.blocks.push_back({StateBlock::Eta, n}); break;
        case Config::SecondaryProjected: l.blocks.push_back({StateBlock::EtaPrime, 1}); break;
    }
    return l;
}

Vec forcing(const PlantParams& params, const WeightedGraph& dc, Config config, const Vec& p_m) {
    const std::size_t n = params.n;
    const StateLayout layout = layout_for(config, n);
    Vec b(layout.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) b[i] = p_m[i] / params.m[i];

    // The voltage rows carry the nominal operating-point mismatch
    // E (P_inj_nom / V_nom - L_R V_ref); it vanishes whenever the nominal
    // injections solve the DC load flow at the reference voltages (always
    // the case for uniform V_ref and zero nominal injections). Edge-wise
    // differences keep the uniform-reference case exactly zero.
    Vec lv(n, 0.0);
    for (const auto& e : dc.edges) {
        const double flow = e.weight * (params.v_ref[e.i] - params.v_ref[e.j]);
        lv[e.i] += flow;
        lv[e.j] -= flow;
    }
    for (std::size_t i = 0; i < n; ++i)
        b[n + i] = (params.p_inj_nom[i] / params.v_nom - lv[i]) / params.cap[i];
    return b;
}

ClosedLoopSystem assemble(const PlantParams& params, const ControllerGains& gains,
                          const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                          Config config) {
    params.validate();
    gains.validate(params.n);
    const std::size_t n = params.n;
    if (dc.n != n) throw InvalidParams("DC grid node count does not match area count");
    if (config == Config::SecondaryDistributed) {
        if (!comm) throw MissingCommGraph("secondary-distributed controller requires a communication graph");
        if (comm->n != n) throw InvalidParams("communication graph node count does not match area count");
        if (!connectivity_check(*comm))
            throw DisconnectedGraph("communication graph must be connected");
    }

    const StateLayout layout = layout_for(config, n);
    const std::size_t dim = layout.size();
    Matrix a(dim, dim);
    const Matrix lr = laplacian(dc);

    for (std::size_t i = 0; i < n; ++i) {
        const double mi = 1.0 / params.m[i];
        const double ei = 1.0 / params.cap[i];
        // swing rows
        a(i, i) = -mi * (gains.k_omega[i] + gains.k_droop[i]);
        a(i, n + i) = mi * gains.k_v[i];
        // voltage rows
        a(n + i, i) = ei * gains.k_omega[i] / params.v_nom;
        for (std::size_t j = 0; j < n; ++j) a(n + i, n + j) = -ei * lr(i, j);
        a(n + i, n + i) -= ei * gains.k_v[i] / params.v_nom;
    }

    const auto secondary_coeff = [&](std::size_t i) {
        return gains.k_v[i] * gains.k_droop_i[i] / (params.m[i] * gains.k_omega[i]);
    };

    switch (config) {
        case Config::DroopOnly: break;
        case Config::SecondaryComplete: {
            const std::size_t e0 = 2 * n;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j)
                    a(i, e0 + j) = -secondary_coeff(i) / static_cast<double>(n);
                a(e0 + i, i) = gains.k_droop_i[i];
                a(e0 + i, e0 + i) = -gains.gamma;
            }
            break;
        }
        case Config::SecondaryProjected: {
            const std::size_t e0 = 2 * n;
            for (std::size_t i = 0; i < n; ++i) {
                a(i, e0) = -secondary_coeff(i);
                a(e0, i) = gains.k_droop_i[i] / static_cast<double>(n);
            }
            a(e0, e0) = -gains.gamma;
            break;
        }
        case Config::SecondaryDistributed: {
            const std::size_t e0 = 2 * n;
            const Matrix lc = laplacian(*comm);
            for (std::size_t i = 0; i < n; ++i) {
                a(i, e0 + i) = -secondary_coeff(i);
                a(e0 + i, i) = gains.k_droop_i[i];
                for (std::size_t j = 0; j < n; ++j) a(e0 + i, e0 + j) -= gains.delta * lc(i, j);
            }
            break;
        }
    }

    if (!a.all_finite()) throw InvalidParams("assembled closed-loop matrix has non-finite entries");

    ClosedLoopSystem sys;
    sys.config = config;
    sys.a = std::move(a);
    sys.b = forcing(params, dc, config, params.p_m);
    sys.layout = layout;
    sys.params = params;
    sys.gains = gains;
    sys.dc = dc;
    sys.comm = comm;
    return sys;
}

ControllerOutputs controller_outputs(const PlantParams& params, const ControllerGains& gains,
                                     Config config, const Vec& omega, const Vec& v,
                                     const Vec& eta) {
    const std::size_t n = params.n;
    ControllerOutputs out;
    out.p_gen.resize(n);
    out.p_inj.resize(n);

    double eta_mean = 0.0;
    if (config == Config::SecondaryComplete) {
        eta_mean = std::accumulate(eta.begin(), eta.end(), 0.0) / static_cast<double>(n);
    } else if (config == Config::SecondaryProjected) {
        eta_mean = eta.at(0);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double w_hat = omega[i] - params.omega_ref;
        const double v_hat = v[i] - params.v_ref[i];
        double p_gen = -gains.k_droop[i] * w_hat;
        switch (config) {
            case Config::DroopOnly: break;
            case Config::SecondaryComplete:
            case Config::SecondaryProjected:
                p_gen -= gains.k_v[i] / gains.k_omega[i] * gains.k_droop_i[i] * eta_mean;
                break;
            case Config::SecondaryDistributed:
                p_gen -= gains.k_v[i] / gains.k_omega[i] * gains.k_droop_i[i] * eta[i];
                break;
        }
        out.p_gen[i] = p_gen;
        out.p_inj[i] = params.p_inj_nom[i] + gains.k_omega[i] * w_hat - gains.k_v[i] * v_hat;
    }
    return out;
}

void nonlinear_rhs_into(const PlantParams& params, const ControllerGains& gains,
                        const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                        Config config, const Vec& state, const Vec& p_m, PowerCurrentMode mode,
                        Vec& dx) {
    const std::size_t n = params.n;
    dx.assign(state.size(), 0.0);

    // the eta block starts at 2n; mean needed by the averaged controllers
    double eta_mean = 0.0;
    if (config == Config::SecondaryComplete) {
        for (std::size_t i = 0; i < n; ++i) eta_mean += state[2 * n + i];
        eta_mean /= static_cast<double>(n);
    } else if (config == Config::SecondaryProjected) {
        eta_mean = state[2 * n];
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double w_hat = state[i] - params.omega_ref;
        const double v_abs = state[n + i];
        const double v_hat = v_abs - params.v_ref[i];

        double p_gen = -gains.k_droop[i] * w_hat;
        switch (config) {
            case Config::DroopOnly: break;
            case Config::SecondaryComplete:
            case Config::SecondaryProjected:
                p_gen -= gains.k_v[i] / gains.k_omega[i] * gains.k_droop_i[i] * eta_mean;
                break;
            case Config::SecondaryDistributed:
                p_gen -= gains.k_v[i] / gains.k_omega[i] * gains.k_droop_i[i] * state[2 * n + i];
                break;
        }
        const double p_inj = params.p_inj_nom[i] + gains.k_omega[i] * w_hat - gains.k_v[i] * v_hat;

        dx[i] = (p_gen + params.p_nom[i] + p_m[i] - p_inj) / params.m[i];

        double i_inj;
        if (mode == PowerCurrentMode::Linearized) {
            i_inj = p_inj / params.v_nom;
        } else {
            if (!(v_abs > 0.5 * params.v_nom))
                throw VoltageCollapse("terminal voltage " + std::to_string(i + 1) +
                                      " fell below half of nominal");
            i_inj = p_inj / v_abs;
        }
        dx[n + i] = i_inj / params.cap[i];
    }
    for (const auto& e : dc.edges) {
        const double flow = e.weight * (state[n + e.i] - state[n + e.j]);
        dx[n + e.i] -= flow / params.cap[e.i];
        dx[n + e.j] += flow / params.cap[e.j];
    }

    switch (config) {
        case Config::DroopOnly: break;
        case Config::SecondaryComplete:
            for (std::size_t i = 0; i < n; ++i)
                dx[2 * n + i] = gains.k_droop_i[i] * (state[i] - params.omega_ref) -
                                gains.gamma * state[2 * n + i];
            break;
        case Config::SecondaryProjected: {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += gains.k_droop_i[i] * (state[i] - params.omega_ref);
            dx[2 * n] = acc / static_cast<double>(n) - gains.gamma * state[2 * n];
            break;
        }
        case Config::SecondaryDistributed: {
            if (!comm) throw MissingCommGraph("secondary-distributed controller requires a communication graph");
            for (std::size_t i = 0; i < n; ++i)
                dx[2 * n + i] = gains.k_droop_i[i] * (state[i] - params.omega_ref);
            for (const auto& e : comm->edges) {
                const double d = gains.delta * e.weight * (state[2 * n + e.i] - state[2 * n + e.j]);
                dx[2 * n + e.i] -= d;
                dx[2 * n + e.j] += d;
            }
            break;
        }
    }
}

Vec nonlinear_rhs(const PlantParams& params, const ControllerGains& gains,
                  const WeightedGraph& dc, const std::optional<WeightedGraph>& comm,
                  Config config, const Vec& state, const Vec& p_m, PowerCurrentMode mode) {
    const std::size_t n = params.n;
    if (state.size() != layout_for(config, n).size())
        throw InvalidParams("state size does not match controller layout");
    Vec dx;
    nonlinear_rhs_into(params, gains, dc, comm, config, state, p_m, mode, dx);
    return dx;
}

} // namespace mtdc

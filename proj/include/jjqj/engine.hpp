#pragma once

// Quantum-jump Monte Carlo along a current ramp. Each ramp evolves the
// junction (and optionally the TLS) under the non-Hermitian effective
// Hamiltonian, draws one uniform per step to decide on a jump, and ends at the
// first tunneling event, whose bias current is the switching current.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jjqj/errors.hpp"
#include "jjqj/hamiltonian.hpp"
#include "jjqj/parallel.hpp"
#include "jjqj/physics.hpp"
#include "jjqj/propagator.hpp"
#include "jjqj/rng.hpp"

namespace jjqj {

enum class Integrator { exponential, rk4 };

inline const char* to_string(Integrator i) noexcept { return i == Integrator::exponential ? "exponential" : "rk4"; }

enum class JumpKind { tunnel, relax };

/// Jump channels. The two TLS channels exist only when a TLS relaxation rate is configured.
enum class Channel : int {
    tunnel_g0 = 0,
    tunnel_g1,
    tunnel_e0,
    tunnel_e1,
    relax_g,      // |1g> -> |0g>
    relax_e,      // |1e> -> |0e>
    tls_relax_0,  // |0e> -> |0g>
    tls_relax_1,  // |1e> -> |1g>
};

inline constexpr int channel_count = 8;

inline constexpr std::array<Channel, channel_count> all_channels{
    Channel::tunnel_g0, Channel::tunnel_g1, Channel::tunnel_e0,   Channel::tunnel_e1,
    Channel::relax_g,   Channel::relax_e,   Channel::tls_relax_0, Channel::tls_relax_1};

inline JumpKind kind_of(Channel c) noexcept {
    return static_cast<int>(c) < 4 ? JumpKind::tunnel : JumpKind::relax;
}

inline BasisState source_of(Channel c) noexcept {
    switch (c) {
        case Channel::tunnel_g0: return BasisState::g0;
        case Channel::tunnel_g1: return BasisState::g1;
        case Channel::tunnel_e0: return BasisState::e0;
        case Channel::tunnel_e1: return BasisState::e1;
        case Channel::relax_g: return BasisState::g1;
        case Channel::relax_e: return BasisState::e1;
        case Channel::tls_relax_0: return BasisState::e0;
        case Channel::tls_relax_1: return BasisState::e1;
    }
    return BasisState::g0;
}

/// Where a relaxation jump lands. Meaningless for tunnel channels.
inline BasisState target_of(Channel c) noexcept {
    switch (c) {
        case Channel::relax_g: return BasisState::g0;
        case Channel::relax_e: return BasisState::e0;
        case Channel::tls_relax_0: return BasisState::g0;
        case Channel::tls_relax_1: return BasisState::g1;
        default: return source_of(c);
    }
}

inline double channel_rate(Channel c, const RateSet& r) noexcept {
    switch (c) {
        case Channel::relax_g:
        case Channel::relax_e: return r.relaxation;
        case Channel::tls_relax_0:
        case Channel::tls_relax_1: return r.tls_relaxation;
        default: return r.tunnel(source_of(c));
    }
}

inline const char* to_string(Channel c) noexcept {
    switch (c) {
        case Channel::tunnel_g0: return "tunnel_0g";
        case Channel::tunnel_g1: return "tunnel_1g";
        case Channel::tunnel_e0: return "tunnel_0e";
        case Channel::tunnel_e1: return "tunnel_1e";
        case Channel::relax_g: return "relax_1g_0g";
        case Channel::relax_e: return "relax_1e_0e";
        case Channel::tls_relax_0: return "tls_relax_0e_0g";
        case Channel::tls_relax_1: return "tls_relax_1e_1g";
    }
    return "?";
}

template <int Dim>
constexpr bool channel_exists(Channel c) noexcept {
    return Dim == 4 || static_cast<int>(source_of(c)) < 2;
}

template <int Dim>
struct QuantumState {
    ComplexVector<Dim> amplitudes = ComplexVector<Dim>::Zero();
    double t = 0.0;     // s since the start of the ramp
    double bias = 0.0;  // A
    int flag = 0;       // TLS branch: 0 = g, 1 = e

    double norm2() const { return amplitudes.squaredNorm(); }

    static QuantumState basis(BasisState s, double t = 0.0, double bias = 0.0) {
        QuantumState q;
        q.amplitudes(index_of(s)) = 1.0;
        q.t = t;
        q.bias = bias;
        q.flag = static_cast<int>(branch_of(s));
        return q;
    }
};

struct JumpEvent {
    JumpKind kind = JumpKind::tunnel;
    Channel channel = Channel::tunnel_g0;
    double t = 0.0;
    double bias = 0.0;
};

struct SwitchRecord {
    std::uint64_t ramp_index = 0;
    double switching_current = 0.0;  // A
    int initial_flag = 0;
    int flag_at_switch = 0;
    std::uint64_t steps = 0;
    std::vector<JumpEvent> events;

    std::size_t relax_events() const {
        return static_cast<std::size_t>(
            std::count_if(events.begin(), events.end(), [](const JumpEvent& e) { return e.kind == JumpKind::relax; }));
    }
};

struct EngineConfig {
    int dimension = 4;
    Frame frame = Frame::rwa;
    Integrator integrator = Integrator::exponential;
    double dt_max = 2e-9;          // s
    double dt_rate_cap = 0.05;     // bound on dt x (total jump rate of the current state)
    std::uint64_t master_seed = 1;
    std::uint64_t ramps = 2000;
    std::uint64_t trajectories = 10000;
    std::uint64_t step_ceiling = 1'000'000'000;
    int initial_flag = 0;
    TunnelingMode tunneling_mode = TunnelingMode::analytic;
    unsigned workers = 1;

    void validate() const {
        if (dimension != 2 && dimension != 4) throw ConfigError("engine.dimension must be 2 or 4");
        if (!(dt_max > 0.0)) throw ConfigError("engine.dt_max must be > 0");
        if (!(dt_rate_cap > 0.0 && dt_rate_cap < 1.0)) throw ConfigError("engine.dt_rate_cap must lie in (0, 1)");
        if (step_ceiling == 0) throw ConfigError("engine.step_ceiling must be >= 1");
        if (initial_flag != 0 && initial_flag != 1) throw ConfigError("engine.initial_flag must be 0 or 1");
        if (dimension == 2 && initial_flag != 0) throw ConfigError("engine.initial_flag must be 0 without a TLS");
    }
};

/// Everything physical a ramp needs.
struct Model {
    JunctionParams junction;
    TlsParams tls;
    BiasDrive drive;

    void validate() const {
        junction.validate();
        tls.validate();
        drive.validate(junction);
    }
};

/// Rates as a function of bias current. The default evaluates the physics module.
using RateProvider = std::function<RateSet(double bias)>;

/// Largest bias at which the two-level description is still used for the
/// coherent part. Beyond it the Hamiltonian is frozen; physical escape rates
/// there are saturated, so no physical ramp gets that far.
inline double coherent_bias_limit(const JunctionParams& p) {
    const double r0 = barrier_in_quanta(p, 0.0);
    const double headroom = std::pow(2.0 * (5.0 / 36.0) / r0, 0.8);
    return p.critical_current * (1.0 - headroom);
}

inline RateProvider physical_rates(const Model& m, TunnelingMode mode) {
    const double limit = coherent_bias_limit(m.junction);
    return [p = m.junction, tls_relax = m.tls.relaxation, mode, limit](double bias) {
        RateSet r;
        r.relaxation = relaxation_rate(p, std::min(bias, limit));
        r.tls_relaxation = tls_relax;
        for (Branch b : {Branch::g, Branch::e})
            for (Level l : {Level::ground, Level::excited})
                r.tunnel(basis_state(l, b)) = tunneling_rate(p, bias, l, b, mode);
        return r;
    };
}

/// Advances the amplitudes by dt under a frozen H_eff. The norm is not restored.
template <int Dim>
QuantumState<Dim> evolve_step(const QuantumState<Dim>& s, const ComplexMatrix<Dim>& h_eff, double dt,
                              Integrator integrator = Integrator::rk4) {
    QuantumState<Dim> out = s;
    if (integrator == Integrator::rk4)
        out.amplitudes = rk4_step<Dim>(h_eff, s.amplitudes, dt);
    else
        out.amplitudes = step_propagator<Dim>(h_eff, dt) * s.amplitudes;
    out.t = s.t + dt;
    const double before = s.norm2();
    const double after = out.norm2();
    if (!(after <= before * (1.0 + 1e-12)))
        throw NumericalError("evolve_step: norm grew from " + std::to_string(before) + " to " +
                             std::to_string(after) + "; step too large or H_eff malformed");
    return out;
}

/// Per-channel jump rates R_k = rate_k |psi_source|^2 / |psi|^2.
template <int Dim>
std::array<double, channel_count> channel_weights(const QuantumState<Dim>& s, const RateSet& r) {
    std::array<double, channel_count> w{};
    const double n2 = s.norm2();
    for (Channel c : all_channels) {
        if (!channel_exists<Dim>(c)) continue;
        const double rate = channel_rate(c, r);
        if (rate == 0.0) continue;
        w[static_cast<std::size_t>(c)] = rate * std::norm(s.amplitudes(index_of(source_of(c)))) / n2;
    }
    return w;
}

/// Sum of R_k over all channels: the instantaneous jump rate of this state.
template <int Dim>
double total_jump_rate(const QuantumState<Dim>& s, const RateSet& r) {
    double total = 0.0;
    for (double x : channel_weights(s, r)) total += x;
    return total;
}

/// Decides whether a jump happens this step: dp = dt sum_k R_k, and the same
/// draw u picks the channel by inverse CDF on [0, dp).
template <int Dim>
std::optional<JumpEvent> jump_decision(const QuantumState<Dim>& s, const RateSet& r, double dt, double u) {
    const auto w = channel_weights(s, r);
    double dp = 0.0;
    for (double x : w) dp += dt * x;
    if (!(u < dp)) return std::nullopt;
    double acc = 0.0;
    Channel chosen = Channel::tunnel_g0;
    bool found = false;
    for (Channel c : all_channels) {
        const double x = dt * w[static_cast<std::size_t>(c)];
        if (x == 0.0) continue;
        chosen = c;
        found = true;
        acc += x;
        if (u < acc) break;
    }
    if (!found) return std::nullopt;
    return JumpEvent{kind_of(chosen), chosen, s.t, s.bias};
}

/// Collapses onto the target basis state of a relaxation channel.
template <int Dim>
QuantumState<Dim> apply_relax(const QuantumState<Dim>& s, Channel c) {
    if (kind_of(c) != JumpKind::relax) throw DomainError("apply_relax: not a relaxation channel");
    return QuantumState<Dim>::basis(target_of(c), s.t, s.bias);
}

namespace detail {

template <int Dim>
ComplexMatrix<Dim> coherent_hamiltonian(const Model& m, double bias, double t, Frame frame) {
    if constexpr (Dim == 2)
        return hamiltonian_2(m.junction, m.drive, bias, t, frame);
    else
        return hamiltonian_4(m.junction, m.tls, m.drive, bias, t, frame);
}

/// One step of the trajectory loop at fixed rates. Returns the jump if one occurred.
template <int Dim>
std::optional<JumpEvent> trajectory_step(QuantumState<Dim>& s, const Model& m, const EngineConfig& cfg,
                                         const RateSet& rates, double bias_mid, double coherent_limit, double dt,
                                         double u) {
    if (auto jump = jump_decision(s, rates, dt, u)) {
        if (jump->kind == JumpKind::relax) {
            s = apply_relax(s, jump->channel);
            s.t += dt;
        }
        return jump;
    }
    const double hb = std::min(bias_mid, coherent_limit);
    if (cfg.integrator == Integrator::rk4) {
        // Classical RK4 with the drive sampled at t, t + dt/2 and t + dt.
        auto heff = [&](double tau) {
            return effective_hamiltonian<Dim>(coherent_hamiltonian<Dim>(m, hb, tau, cfg.frame), rates);
        };
        const complex mi(0.0, -1.0);
        const ComplexMatrix<Dim> h0 = heff(s.t), h1 = heff(s.t + 0.5 * dt), h2 = heff(s.t + dt);
        const ComplexVector<Dim>& psi = s.amplitudes;
        const ComplexVector<Dim> k1 = mi * (h0 * psi);
        const ComplexVector<Dim> k2 = mi * (h1 * (psi + 0.5 * dt * k1));
        const ComplexVector<Dim> k3 = mi * (h1 * (psi + 0.5 * dt * k2));
        const ComplexVector<Dim> k4 = mi * (h2 * (psi + dt * k3));
        const double before = s.norm2();
        s.amplitudes = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s.t += dt;
        if (!(s.norm2() <= before * (1.0 + 1e-12)))
            throw NumericalError("rk4 step increased the norm; reduce engine.dt_max");
    } else {
        const auto h = effective_hamiltonian<Dim>(coherent_hamiltonian<Dim>(m, hb, s.t + 0.5 * dt, cfg.frame), rates);
        s = evolve_step(s, h, dt, Integrator::exponential);
    }
    // The no-jump norm only matters through ratios; keep it away from underflow.
    if (const double n2 = s.norm2(); n2 < 1e-200) s.amplitudes /= std::sqrt(n2);
    return std::nullopt;
}

inline double lab_frame_dt_limit(const Model& m, const EngineConfig& cfg) {
    return cfg.frame == Frame::lab ? two_pi / (20.0 * m.drive.microwave_frequency) : cfg.dt_max;
}

}  // namespace detail

/// One ramp from dc_start until the first tunneling event.
template <int Dim>
SwitchRecord run_ramp(const Model& m, const EngineConfig& cfg, int init_flag, RngStream& rng,
                      const RateProvider& provider, std::uint64_t ramp_index = 0) {
    static_assert(Dim == 2 || Dim == 4);
    if (Dim == 2 && init_flag != 0) throw ConfigError("run_ramp: a bare junction always starts at flag 0");
    SwitchRecord rec;
    rec.ramp_index = ramp_index;
    rec.initial_flag = init_flag;

    auto s = QuantumState<Dim>::basis(init_flag == 0 ? BasisState::g0 : BasisState::e0, 0.0, m.drive.dc_start);
    const double limit = coherent_bias_limit(m.junction);
    const double dt_ceiling = std::min(cfg.dt_max, detail::lab_frame_dt_limit(m, cfg));
    const double ramp = m.drive.ramp_rate;

    for (std::uint64_t step = 0; step < cfg.step_ceiling; ++step) {
        s.bias = m.drive.bias_at(s.t);
        double dt = dt_ceiling;
        RateSet rates = provider(s.bias + 0.5 * ramp * dt);
        // Rates grow along the ramp, so shrinking dt to the midpoint value is safe.
        for (int pass = 0; pass < 4; ++pass) {
            const double total = total_jump_rate(s, rates);
            if (total * dt <= cfg.dt_rate_cap) break;
            dt = cfg.dt_rate_cap / total;
            rates = provider(s.bias + 0.5 * ramp * dt);
        }
        const double u = rng.uniform();
        auto jump = detail::trajectory_step(s, m, cfg, rates, s.bias + 0.5 * ramp * dt, limit, dt, u);
        if (!jump) continue;
        rec.events.push_back(*jump);
        if (jump->kind == JumpKind::tunnel) {
            rec.switching_current = jump->bias;
            rec.flag_at_switch = static_cast<int>(branch_of(source_of(jump->channel)));
            rec.steps = step + 1;
            return rec;
        }
    }
    throw StepCeilingError("run_ramp: no escape within " + std::to_string(cfg.step_ceiling) +
                           " steps; check that escape rates are nonzero");
}

template <int Dim>
SwitchRecord run_ramp(const Model& m, const EngineConfig& cfg, int init_flag, RngStream& rng,
                      std::uint64_t ramp_index = 0) {
    return run_ramp<Dim>(m, cfg, init_flag, rng, physical_rates(m, cfg.tunneling_mode), ramp_index);
}

/// Consecutive ramps carrying the TLS flag from each escape to the next start.
template <int Dim>
std::vector<SwitchRecord> run_sequence(const Model& m, const EngineConfig& cfg) {
    m.validate();
    cfg.validate();
    if (cfg.ramps < 1) throw ConfigError("engine.ramps must be >= 1");
    const auto provider = physical_rates(m, cfg.tunneling_mode);
    std::vector<SwitchRecord> out;
    out.reserve(cfg.ramps);
    int flag = cfg.initial_flag;
    for (std::uint64_t i = 0; i < cfg.ramps; ++i) {
        RngStream rng(cfg.master_seed, i);
        out.push_back(run_ramp<Dim>(m, cfg, flag, rng, provider, i));
        flag = out.back().flag_at_switch;
    }
    return out;
}

/// Independent single ramps, all starting in |0g>, spread over cfg.workers threads.
template <int Dim>
std::vector<SwitchRecord> run_ensemble(const Model& m, const EngineConfig& cfg, std::uint64_t n) {
    m.validate();
    cfg.validate();
    if (n < 1) throw ConfigError("ensemble needs at least one trajectory");
    const auto provider = physical_rates(m, cfg.tunneling_mode);
    std::vector<SwitchRecord> out(n);
    parallel_for(n, cfg.workers, [&](std::uint64_t i) {
        RngStream rng(cfg.master_seed, i);
        out[i] = run_ramp<Dim>(m, cfg, 0, rng, provider, i);
    });
    return out;
}

/// Runtime dispatch on cfg.dimension.
inline std::vector<SwitchRecord> run_sequence(const Model& m, const EngineConfig& cfg) {
    return cfg.dimension == 2 ? run_sequence<2>(m, cfg) : run_sequence<4>(m, cfg);
}

inline std::vector<SwitchRecord> run_ensemble(const Model& m, const EngineConfig& cfg, std::uint64_t n) {
    return cfg.dimension == 2 ? run_ensemble<2>(m, cfg, n) : run_ensemble<4>(m, cfg, n);
}

/// Trajectory-averaged density matrices at fixed bias, sampled at `times`
/// (ascending, s). Each trajectory's state is normalized before averaging.
template <int Dim>
std::vector<ComplexMatrix<Dim>> average_density_static(const Model& m, const EngineConfig& cfg, double bias,
                                                       const RateSet& rates, const std::vector<double>& times,
                                                       std::uint64_t n, BasisState initial = BasisState::g0) {
    if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("checkpoint times must be ascending");
    const double dt_ceiling = std::min(cfg.dt_max, detail::lab_frame_dt_limit(m, cfg));
    const double limit = coherent_bias_limit(m.junction);

    std::vector<std::vector<ComplexMatrix<Dim>>> partial(n);
    parallel_for(n, cfg.workers, [&](std::uint64_t i) {
        RngStream rng(cfg.master_seed, i);
        auto s = QuantumState<Dim>::basis(initial, 0.0, bias);
        auto& acc = partial[i];
        acc.reserve(times.size());
        for (double target : times) {
            while (s.t < target) {
                const double total = total_jump_rate(s, rates);
                const double dt_nominal = total > 0.0 ? std::min(dt_ceiling, cfg.dt_rate_cap / total) : dt_ceiling;
                const bool last = dt_nominal >= target - s.t;
                const double dt = last ? target - s.t : dt_nominal;
                auto jump = detail::trajectory_step(s, m, cfg, rates, bias, limit, dt, rng.uniform());
                if (jump && jump->kind == JumpKind::tunnel)
                    throw ConfigError("average_density_static: tunneling must be disabled");
                if (last) s.t = target;
            }
            const ComplexVector<Dim> psi = s.amplitudes / std::sqrt(s.norm2());
            acc.push_back(psi * psi.adjoint());
        }
    });
    std::vector<ComplexMatrix<Dim>> mean(times.size(), ComplexMatrix<Dim>::Zero());
    for (const auto& acc : partial)
        for (std::size_t k = 0; k < times.size(); ++k) mean[k] += acc[k];
    for (auto& rho : mean) rho /= static_cast<double>(n);
    return mean;
}

}  // namespace jjqj

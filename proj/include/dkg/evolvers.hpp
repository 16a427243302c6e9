#pragma once

// Time steppers for the coupled system and the cubic Dirac equation.
//
// Both steppers act on a weighted orbital family; the one-body states are the
// rank-one case, so the many-body flows share the exact same arithmetic.
//
// Coupled step over dt (symmetric, explicit):
//   Psi <- e^{-i dt/2 D} Psi
//   Psi <- exp(-i dt/2 W(S_n, omega_n)) Psi
//   (S, omega) <- exact Klein-Gordon flow over dt, sources from the current densities
//   Psi <- exp(-i dt/2 W(S_{n+1}, omega_{n+1})) Psi
//   Psi <- e^{-i dt/2 D} Psi
// Cubic step over dt (symmetric, implicit midpoint in the density):
//   Psi <- e^{-i dt/2 D} Psi
//   Psi_m = exp(-i dt/2 W_nl(Psi_m)) Psi   (fixed point)
//   Psi <- exp(-i dt/2 W_nl(Psi_m)) Psi_m
//   Psi <- e^{-i dt/2 D} Psi

#include "dkg/errors.hpp"
#include "dkg/klein_gordon.hpp"

#include <chrono>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace dkg {

inline constexpr double blowup_amplitude = 1e12;

/// How the meson fields are advanced by the coupled stepper.
enum class FieldClosure {
    dynamic,        ///< Klein-Gordon evolution
    instantaneous,  ///< overwritten by -gamma_sigma rho_s, gamma_omega (rho_v, J) at every step
};

struct DKGSystemState {
    SpinorField psi;
    KGState kg;
    Couplings c;
    double t = 0.0;
};

struct NLDState {
    SpinorField psi;
    Couplings c;
    double t = 0.0;
};

struct StepReport {
    std::size_t step = 0;
    double t = 0.0;
    double l2_drift = 0.0;  ///< relative change of the weighted L^2 mass since the start
    double charge = 0.0;    ///< int rho_v dx
    double max_psi = 0.0;
    double max_field = 0.0;
    double wall_seconds = 0.0;
};

namespace detail {

inline void check_finite(std::span<const SpinorField> orbitals, const KGState* kg, double t) {
    double m = 0.0;
    for (const auto& psi : orbitals) m = nan_max(m, max_abs(psi));
    if (kg) m = nan_max(m, kg->max_abs());
    if (!std::isfinite(m) || m > blowup_amplitude)
        throw NonFiniteError("field amplitude left the finite range at t = " + std::to_string(t), t);
}

inline double weighted_mass(std::span<const SpinorField> orbitals, std::span<const double> weights) {
    double acc = 0.0;
    for (std::size_t k = 0; k < orbitals.size(); ++k) {
        const double n = l2_norm(orbitals[k]);
        acc += weights[k] * n * n;
    }
    return acc;
}

inline DensityBundle smoothed_densities(std::span<const SpinorField> orbitals, std::span<const double> weights) {
    return dealias(densities(orbitals, weights));
}

/// Replace the fields by their instantaneous values and the velocities by
/// the corresponding density rates.
inline void impose_instantaneous(std::span<const SpinorField> orbitals, std::span<const double> weights,
                                 KGState& kg, const Couplings& c) {
    const DensityBundle rho = smoothed_densities(orbitals, weights);
    InstantFields f = instantaneous_fields(rho, c);
    kg.s = std::move(f.s);
    kg.omega = std::move(f.omega);

    const auto& g = kg.grid();
    Field rs_dot(g);
    VectorField4 j_dot = zero_vector_field(g);
    for (std::size_t k = 0; k < orbitals.size(); ++k) {
        const DensityRates r = derivative_initial_data(orbitals[k], kg.s, kg.omega, c.fermion_mass);
        rs_dot += complex(weights[k], 0.0) * r.rho_s;
        for (int mu = 0; mu < 4; ++mu) j_dot[static_cast<std::size_t>(mu)] += complex(weights[k], 0.0) * r.four_current(mu);
    }
    kg.s_dot = complex(-c.gamma_sigma, 0.0) * dealias(rs_dot);
    make_real(kg.s_dot);
    for (std::size_t mu = 0; mu < 4; ++mu) {
        kg.omega_dot[mu] = complex(c.gamma_omega, 0.0) * dealias(j_dot[mu]);
        make_real(kg.omega_dot[mu]);
    }
}

inline void dkg_orbital_step(std::span<SpinorField> orbitals, std::span<const double> weights, KGState& kg,
                             const Couplings& c, double dt, FieldClosure closure) {
    if (closure == FieldClosure::instantaneous) impose_instantaneous(orbitals, weights, kg, c);
    const double h = 0.5 * dt;
    const Potential w0 = field_potential(kg.s, kg.omega);
    for (auto& psi : orbitals) {
        free_dirac_propagate_inplace(psi, h, c.fermion_mass);
        interaction_phase_step_inplace(w0, psi, h);
    }
    kg = kg_driven_step(std::move(kg), smoothed_densities(orbitals, weights), c, dt);
    const Potential w1 = field_potential(kg.s, kg.omega);
    for (auto& psi : orbitals) {
        interaction_phase_step_inplace(w1, psi, h);
        free_dirac_propagate_inplace(psi, h, c.fermion_mass);
    }
}

inline constexpr int nld_max_iterations = 100;
inline constexpr double nld_tolerance = 1e-15;

inline void nld_orbital_step(std::span<SpinorField> orbitals, std::span<const double> weights, const Couplings& c,
                             double dt) {
    const double h = 0.5 * dt;
    for (auto& psi : orbitals) free_dirac_propagate_inplace(psi, h, c.fermion_mass);

    std::vector<SpinorField> mid(orbitals.begin(), orbitals.end());
    double scale = 1.0;
    for (const auto& psi : orbitals) scale = std::max(scale, max_abs(psi));
    for (int it = 0; it < nld_max_iterations; ++it) {
        const Potential w = nld_potential(smoothed_densities(mid, weights), c);
        double change = 0.0;
        for (std::size_t k = 0; k < orbitals.size(); ++k) {
            SpinorField next = interaction_phase_step(w, orbitals[k], h);
            change = nan_max(change, max_abs(next - mid[k]));
            mid[k] = std::move(next);
        }
        if (!(change > nld_tolerance * scale)) break;
    }

    const Potential w = nld_potential(smoothed_densities(mid, weights), c);
    for (std::size_t k = 0; k < orbitals.size(); ++k) {
        orbitals[k] = std::move(mid[k]);
        interaction_phase_step_inplace(w, orbitals[k], h);
        free_dirac_propagate_inplace(orbitals[k], h, c.fermion_mass);
    }
}

}  // namespace detail

inline constexpr double unit_weight[1] = {1.0};

inline DKGSystemState dkg_step(DKGSystemState state, double dt, FieldClosure closure = FieldClosure::dynamic) {
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and nonzero");
    detail::dkg_orbital_step(std::span<SpinorField>(&state.psi, 1), unit_weight, state.kg, state.c, dt, closure);
    state.t += dt;
    detail::check_finite(std::span<const SpinorField>(&state.psi, 1), &state.kg, state.t);
    return state;
}

inline NLDState nld_step(NLDState state, double dt) {
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and nonzero");
    detail::nld_orbital_step(std::span<SpinorField>(&state.psi, 1), unit_weight, state.c, dt);
    state.t += dt;
    detail::check_finite(std::span<const SpinorField>(&state.psi, 1), nullptr, state.t);
    return state;
}

template <typename State>
struct Trajectory {
    std::vector<State> samples;
    std::vector<StepReport> reports;
};

/// Orbital view used for reporting. One-body states expose a single orbital.
inline std::span<const SpinorField> orbitals_of(const DKGSystemState& s) { return {&s.psi, 1}; }
inline std::span<const SpinorField> orbitals_of(const NLDState& s) { return {&s.psi, 1}; }
inline std::span<const double> weights_of(const DKGSystemState&) { return unit_weight; }
inline std::span<const double> weights_of(const NLDState&) { return unit_weight; }
inline double field_amplitude(const DKGSystemState& s) { return s.kg.max_abs(); }
inline double field_amplitude(const NLDState&) { return 0.0; }

inline std::size_t step_count(double T, double dt) {
    if (dt == 0.0 || !std::isfinite(dt) || !std::isfinite(T)) throw std::invalid_argument("bad time interval");
    const double ratio = T / dt;
    if (ratio < -1e-9) throw std::invalid_argument("T and dt must have the same sign");
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw std::invalid_argument("T/dt must be an integer number of steps");
    return static_cast<std::size_t>(n);
}

/// Advance `state` by T in steps of dt, keeping every `sample_every`-th state
/// (always including t = 0 and t = T).
template <typename State, typename Stepper>
Trajectory<State> evolve(State state, double T, double dt, std::size_t sample_every, Stepper&& step) {
    if (sample_every == 0) throw std::invalid_argument("sample_every must be positive");
    const std::size_t n = step_count(T, dt);
    const double m0 = detail::weighted_mass(orbitals_of(state), weights_of(state));
    const double t0 = state.t;

    Trajectory<State> traj;
    traj.samples.push_back(state);
    for (std::size_t i = 1; i <= n; ++i) {
        const auto start = std::chrono::steady_clock::now();
        state = step(std::move(state), dt);
        state.t = t0 + static_cast<double>(i) * dt;
        const auto stop = std::chrono::steady_clock::now();

        StepReport r;
        r.step = i;
        r.t = state.t;
        const double m = detail::weighted_mass(orbitals_of(state), weights_of(state));
        r.l2_drift = m0 > 0.0 ? std::abs(m - m0) / m0 : std::abs(m - m0);
        r.charge = m;
        for (const auto& psi : orbitals_of(state)) r.max_psi = nan_max(r.max_psi, max_abs(psi));
        r.max_field = field_amplitude(state);
        r.wall_seconds = std::chrono::duration<double>(stop - start).count();
        traj.reports.push_back(r);

        if (i % sample_every == 0 || i == n) traj.samples.push_back(state);
    }
    return traj;
}

inline Trajectory<DKGSystemState> evolve(DKGSystemState state, double T, double dt, std::size_t sample_every,
                                         FieldClosure closure = FieldClosure::dynamic) {
    return evolve(std::move(state), T, dt, sample_every,
                  [closure](DKGSystemState s, double h) { return dkg_step(std::move(s), h, closure); });
}

inline Trajectory<NLDState> evolve(NLDState state, double T, double dt, std::size_t sample_every) {
    return evolve(std::move(state), T, dt, sample_every, [](NLDState s, double h) { return nld_step(std::move(s), h); });
}

inline constexpr double sample_time_tolerance = 1e-12;

/// sup over samples of ||Psi_A - Psi_B||_{H^{s'}}.
template <typename A, typename B>
double error_metric(const std::vector<A>& a, const std::vector<B>& b, SobolevIndex s) {
    if (a.size() != b.size()) throw std::invalid_argument("trajectories have different sample counts");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].t - b[i].t) > sample_time_tolerance * std::max(1.0, std::abs(a[i].t)))
            throw std::invalid_argument("trajectories are sampled at different times");
        worst = nan_max(worst, sobolev_norm(a[i].psi - b[i].psi, s));
    }
    return worst;
}

template <typename A, typename B>
double error_metric(const Trajectory<A>& a, const Trajectory<B>& b, SobolevIndex s) {
    return error_metric(a.samples, b.samples, s);
}

}  // namespace dkg

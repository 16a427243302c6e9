#pragma once

// Meson fields: exact Klein-Gordon propagation, the instantaneous relation,
// reduced variables and their Q sources.

#include "dkg/dirac.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dkg {

struct Couplings {
    double gamma_sigma = 0.5;
    double gamma_omega = 0.5;
    double fermion_mass = 1.0;

    /// g^2 = gamma m^2; g itself is m sqrt(gamma).
    double g_sigma_squared(double m_sigma) const noexcept { return gamma_sigma * m_sigma * m_sigma; }
    double g_omega_squared(double m_omega) const noexcept { return gamma_omega * m_omega * m_omega; }
    double g_sigma(double m_sigma) const noexcept { return m_sigma * std::sqrt(gamma_sigma); }
    double g_omega(double m_omega) const noexcept { return m_omega * std::sqrt(gamma_omega); }

    void validate() const {
        if (!(gamma_sigma >= 0.0) || !(gamma_omega >= 0.0))
            throw std::invalid_argument("couplings must be nonnegative");
        if (!(fermion_mass >= 0.0)) throw std::invalid_argument("fermion mass must be nonnegative");
    }
};

using VectorField4 = std::array<Field, 4>;

inline VectorField4 zero_vector_field(const TorusGrid& g) { return {Field(g), Field(g), Field(g), Field(g)}; }

/// (S, dS/dt) and (omega, d omega/dt) with omega = (V, omega_1, omega_2, omega_3).
struct KGState {
    Field s;
    Field s_dot;
    VectorField4 omega;
    VectorField4 omega_dot;
    double m_sigma;
    double m_omega;

    KGState(TorusGrid g, double msig, double momg)
        : s(g), s_dot(g), omega(zero_vector_field(g)), omega_dot(zero_vector_field(g)),
          m_sigma(msig), m_omega(momg) {
        if (!(msig > 0.0) || !(momg > 0.0)) throw std::invalid_argument("meson masses must be positive");
    }

    const TorusGrid& grid() const noexcept { return s.grid(); }

    double max_abs() const noexcept {
        double m = nan_max(dkg::max_abs(s), dkg::max_abs(s_dot));
        for (int mu = 0; mu < 4; ++mu) {
            m = nan_max(m, dkg::max_abs(omega[static_cast<std::size_t>(mu)]));
            m = nan_max(m, dkg::max_abs(omega_dot[static_cast<std::size_t>(mu)]));
        }
        return m;
    }

    bool operator==(const KGState& o) const {
        return s == o.s && s_dot == o.s_dot && omega == o.omega && omega_dot == o.omega_dot &&
               m_sigma == o.m_sigma && m_omega == o.m_omega;
    }
};

/// Right-hand sides of the two Klein-Gordon equations, held fixed over a step.
struct KGSources {
    Field sigma;
    VectorField4 omega;

    explicit KGSources(TorusGrid g) : sigma(g), omega(zero_vector_field(g)) {}

    /// -g_sigma^2 rho_s for S and +g_omega^2 (rho_v, J) for omega.
    static KGSources from_densities(const DensityBundle& rho, const Couplings& c, double m_sigma, double m_omega) {
        KGSources out(rho.grid());
        const double gs2 = c.g_sigma_squared(m_sigma);
        const double go2 = c.g_omega_squared(m_omega);
        out.sigma = complex(-gs2, 0.0) * rho.rho_s;
        for (int mu = 0; mu < 4; ++mu) out.omega[static_cast<std::size_t>(mu)] = complex(go2, 0.0) * rho.four_current(mu);
        return out;
    }
};

namespace detail {

/// Exact flow of u'' + (|k|^2 + mass^2) u = f over dt for constant f, mode by mode.
inline void kg_field_step(Field& u, Field& u_dot, const Field* source, double mass, double dt) {
    Spectrum a = forward_transform(u);
    Spectrum b = forward_transform(u_dot);
    Spectrum f{u.grid(), std::vector<complex>(u.size())};
    if (source) f = forward_transform(*source);
    const auto& g = u.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double lam = std::sqrt(g.k_squared(i) + mass * mass);
        const double x = dt * lam;
        const double sn = std::sin(x);
        const double half = std::sin(0.5 * x);
        const double cm1 = -2.0 * half * half;                                           // cos(x) - 1
        const double sinc = lam > 0.0 ? sn / lam : dt;                                   // sin(x)/lam
        const double versine = lam > 0.0 ? 2.0 * half * half / (lam * lam) : 0.5 * dt * dt;  // (1-cos x)/lam^2
        const complex u0 = a.coeffs[i], v0 = b.coeffs[i], f0 = f.coeffs[i];
        a.coeffs[i] = u0 + (cm1 * u0 + sinc * v0 + versine * f0);
        b.coeffs[i] = v0 + (cm1 * v0 - (lam * sn) * u0 + sinc * f0);
    }
    u = inverse_transform(std::move(a));
    u_dot = inverse_transform(std::move(b));
    make_real(u);
    make_real(u_dot);
}

}  // namespace detail

/// Exact update with sources frozen over dt (variation of constants).
inline KGState kg_driven_step(KGState state, const KGSources& src, double dt) {
    require_same_grid(state.grid(), src.sigma.grid());
    detail::kg_field_step(state.s, state.s_dot, &src.sigma, state.m_sigma, dt);
    for (std::size_t mu = 0; mu < 4; ++mu)
        detail::kg_field_step(state.omega[mu], state.omega_dot[mu], &src.omega[mu], state.m_omega, dt);
    return state;
}

inline KGState kg_driven_step(KGState state, const DensityBundle& rho, const Couplings& c, double dt) {
    const KGSources src = KGSources::from_densities(rho, c, state.m_sigma, state.m_omega);
    return kg_driven_step(std::move(state), src, dt);
}

inline KGState kg_homogeneous_step(KGState state, double dt) {
    const KGSources zero(state.grid());
    return kg_driven_step(std::move(state), zero, dt);
}

/// Per-mode energy 1/2 |d_t u_hat|^2 + 1/2 lambda^2 |u_hat|^2 of one field, scaled so the
/// modes sum to the continuum energy 1/2 int (u_t^2 + |grad u|^2 + mass^2 u^2) over the box.
inline std::vector<double> mode_energies(const Field& u, const Field& u_dot, double mass) {
    const Spectrum a = forward_transform(u);
    const Spectrum b = forward_transform(u_dot);
    const double scale = u.grid().cell_volume() / static_cast<double>(u.size());
    std::vector<double> e(u.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double lam2 = u.grid().k_squared(i) + mass * mass;
        e[i] = scale * (0.5 * std::norm(b.coeffs[i]) + 0.5 * lam2 * std::norm(a.coeffs[i]));
    }
    return e;
}

struct InstantFields {
    Field s;
    VectorField4 omega;
};

/// S = -gamma_sigma rho_s, omega = gamma_omega (rho_v, J).
inline InstantFields instantaneous_fields(const DensityBundle& rho, const Couplings& c) {
    InstantFields out{complex(-c.gamma_sigma, 0.0) * rho.rho_s, zero_vector_field(rho.grid())};
    for (int mu = 0; mu < 4; ++mu)
        out.omega[static_cast<std::size_t>(mu)] = complex(c.gamma_omega, 0.0) * rho.four_current(mu);
    return out;
}

/// W for the coupled system: alpha.(-omega_vec) + beta S + V.
inline Potential field_potential(const Field& s, const VectorField4& omega) {
    Potential w(s.grid());
    w.scalar = omega[0];
    w.beta_coeff = s;
    for (std::size_t k = 0; k < 3; ++k) w.alpha_coeff[k] = complex(-1.0, 0.0) * omega[k + 1];
    return w;
}

/// W for the cubic equation: -gamma_omega alpha.J - gamma_sigma beta rho_s + gamma_omega rho_v.
inline Potential nld_potential(const DensityBundle& rho, const Couplings& c) {
    const InstantFields f = instantaneous_fields(rho, c);
    return field_potential(f.s, f.omega);
}

/// Sbar = S + gamma_sigma rho_s, omegabar = omega - gamma_omega (rho_v, J), with velocities.
struct ReducedState {
    Field s_bar;
    Field s_bar_dot;
    VectorField4 omega_bar;
    VectorField4 omega_bar_dot;
    double m_sigma;
    double m_omega;
};

inline ReducedState to_reduced(const KGState& kg, const SpinorField& psi, const Couplings& c) {
    require_same_grid(kg.grid(), psi.grid());
    const DensityBundle rho = densities(psi);
    const DensityRates rate = derivative_initial_data(psi, kg.s, kg.omega, c.fermion_mass);
    const double gs = c.gamma_sigma, go = c.gamma_omega;
    ReducedState r{kg.s, kg.s_dot, kg.omega, kg.omega_dot, kg.m_sigma, kg.m_omega};
    for (std::size_t i = 0; i < psi.size(); ++i) {
        r.s_bar[i] += gs * rho.rho_s[i];
        r.s_bar_dot[i] += gs * rate.rho_s[i];
        for (int mu = 0; mu < 4; ++mu) {
            const auto m = static_cast<std::size_t>(mu);
            r.omega_bar[m][i] -= go * rho.four_current(mu)[i];
            r.omega_bar_dot[m][i] -= go * rate.four_current(mu)[i];
        }
    }
    return r;
}

inline KGState from_reduced(const ReducedState& r, const SpinorField& psi, const Couplings& c) {
    require_same_grid(r.s_bar.grid(), psi.grid());
    const DensityBundle rho = densities(psi);
    const double gs = c.gamma_sigma, go = c.gamma_omega;
    KGState kg(psi.grid(), r.m_sigma, r.m_omega);
    kg.s = r.s_bar;
    kg.omega = r.omega_bar;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        kg.s[i] -= gs * rho.rho_s[i];
        for (int mu = 0; mu < 4; ++mu) kg.omega[static_cast<std::size_t>(mu)][i] += go * rho.four_current(mu)[i];
    }
    const DensityRates rate = derivative_initial_data(psi, kg.s, kg.omega, c.fermion_mass);
    kg.s_dot = r.s_bar_dot;
    kg.omega_dot = r.omega_bar_dot;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        kg.s_dot[i] -= gs * rate.rho_s[i];
        for (int mu = 0; mu < 4; ++mu) kg.omega_dot[static_cast<std::size_t>(mu)][i] += go * rate.four_current(mu)[i];
    }
    return kg;
}

/// W in reduced variables: alpha.(-omegabar - gamma_omega J) + beta(Sbar - gamma_sigma rho_s) + (Vbar + gamma_omega rho_v).
inline Potential reduced_potential(const SpinorField& psi, const Field& s_bar, const VectorField4& omega_bar,
                                   const Couplings& c) {
    const DensityBundle rho = densities(psi);
    Field s = s_bar;
    VectorField4 omega = omega_bar;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        s[i] -= c.gamma_sigma * rho.rho_s[i];
        for (int mu = 0; mu < 4; ++mu) omega[static_cast<std::size_t>(mu)][i] += c.gamma_omega * rho.four_current(mu)[i];
    }
    return field_potential(s, omega);
}

struct QSources {
    Field sigma;
    VectorField4 omega;
};

/// Q_sigma = 2 gamma_sigma Im<Psi, beta W Psi>, Q_V = -2 gamma_omega Im<Psi, W Psi>,
/// Q_k = -2 gamma_omega Im<Psi, alpha_k W Psi>.
inline QSources q_sources(const SpinorField& psi, const InteractionMatrixField& w, const Couplings& c) {
    require_same_grid(psi.grid(), w.grid());
    const auto& g = psi.grid();
    QSources q{Field(g), zero_vector_field(g)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vector4 v = psi.at(i);
        const Vector4 wv = w[i] * v;
        q.sigma[i] = 2.0 * c.gamma_sigma * v.dot(DiracAlgebra::beta() * wv).imag();
        q.omega[0][i] = -2.0 * c.gamma_omega * v.dot(wv).imag();
        for (int k = 0; k < 3; ++k)
            q.omega[static_cast<std::size_t>(k + 1)][i] = -2.0 * c.gamma_omega * v.dot(DiracAlgebra::alpha(k) * wv).imag();
    }
    return q;
}

inline QSources q_sources(const SpinorField& psi, const Field& s_bar, const VectorField4& omega_bar,
                          const Couplings& c) {
    return q_sources(psi, InteractionMatrixField(reduced_potential(psi, s_bar, omega_bar, c)), c);
}

struct SplitSample {
    double t;
    SpinorField psi;
    ReducedState reduced;
};

struct SplitFields {
    double t;
    Field s_tilde;
    VectorField4 omega_tilde;
};

namespace detail {

inline Spectrum cos_propagate(Spectrum spec, double t, double mass) {
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i)
        spec.coeffs[i] *= std::cos(t * std::sqrt(spec.grid.k_squared(i) + mass * mass));
    return spec;
}

}  // namespace detail

/// Stilde(t) = Sbar(t) - cos(t Lambda) Sbar_in - int_0^t cos((t-t') Lambda) Q_sigma(t') dt',
/// Lambda = sqrt(-Delta + m^2), with the integral taken by the trapezoid rule on
/// the stored samples. omegatilde likewise. Samples must start at t = 0.
inline std::vector<SplitFields> oscillatory_split(const std::vector<SplitSample>& history, const Couplings& c) {
    if (history.size() < 3) throw std::invalid_argument("oscillatory split needs at least 3 samples");
    const auto& g = history.front().psi.grid();
    const double m_sigma = history.front().reduced.m_sigma;
    const double m_omega = history.front().reduced.m_omega;

    std::vector<Spectrum> q_sigma;
    std::vector<std::vector<Spectrum>> q_omega;
    for (const auto& h : history) {
        const QSources q = q_sources(h.psi, h.reduced.s_bar, h.reduced.omega_bar, c);
        q_sigma.push_back(forward_transform(q.sigma));
        q_omega.push_back({forward_transform(q.omega[0]), forward_transform(q.omega[1]),
                           forward_transform(q.omega[2]), forward_transform(q.omega[3])});
    }
    const Spectrum s_in = forward_transform(history.front().reduced.s_bar);
    std::vector<Spectrum> omega_in;
    for (std::size_t mu = 0; mu < 4; ++mu) omega_in.push_back(forward_transform(history.front().reduced.omega_bar[mu]));

    auto accumulate = [&](Spectrum& acc, const Spectrum& x, double weight, double tau, double mass) {
        const Spectrum y = detail::cos_propagate(x, tau, mass);
        for (std::size_t i = 0; i < acc.coeffs.size(); ++i) acc.coeffs[i] += weight * y.coeffs[i];
    };

    std::vector<SplitFields> out;
    out.push_back(SplitFields{history.front().t, Field(g), zero_vector_field(g)});
    for (std::size_t n = 1; n < history.size(); ++n) {
        const double t = history[n].t;
        Spectrum s_acc{g, std::vector<complex>(g.size())};
        std::vector<Spectrum> o_acc(4, Spectrum{g, std::vector<complex>(g.size())});

        accumulate(s_acc, s_in, 1.0, t, m_sigma);
        for (std::size_t mu = 0; mu < 4; ++mu) accumulate(o_acc[mu], omega_in[mu], 1.0, t, m_omega);
        for (std::size_t j = 0; j + 1 <= n; ++j) {
            const double h = history[j + 1].t - history[j].t;
            for (std::size_t e : {j, j + 1}) {
                accumulate(s_acc, q_sigma[e], 0.5 * h, t - history[e].t, m_sigma);
                for (std::size_t mu = 0; mu < 4; ++mu)
                    accumulate(o_acc[mu], q_omega[e][mu], 0.5 * h, t - history[e].t, m_omega);
            }
        }

        SplitFields f{t, history[n].reduced.s_bar - inverse_transform(std::move(s_acc)), zero_vector_field(g)};
        make_real(f.s_tilde);
        for (std::size_t mu = 0; mu < 4; ++mu) {
            f.omega_tilde[mu] = history[n].reduced.omega_bar[mu] - inverse_transform(std::move(o_acc[mu]));
            make_real(f.omega_tilde[mu]);
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace dkg

#pragma once

// Initial data recipes shared by every run of a sweep.

#include "dkg/lab/config.hpp"
#include "dkg/manybody.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace dkg::lab {

namespace detail {

inline double radius_squared(const std::array<double, 3>& x, int dim) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    return r2;
}

inline void normalize(SpinorField& psi) {
    const double n = l2_norm(psi);
    if (n > 0.0) psi *= complex(1.0 / n, 0.0);
}

inline double hermite(int n, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

inline std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t slot) { return seed * 1000003ULL + slot; }

}  // namespace detail

/// e^{-|x|^2/2} (1, 0.3, 0.2i, 0), normalized in L^2.
inline SpinorField smooth_spinor(const TorusGrid& g) {
    const Vector4 v(1.0, 0.3, complex(0.0, 0.2), 0.0);
    SpinorField psi = SpinorField::from_profile(g, v, [&g](const auto& x) {
        return complex(std::exp(-0.5 * detail::radius_squared(x, g.dim())), 0.0);
    });
    detail::normalize(psi);
    return psi;
}

inline SpinorField initial_spinor(const ExperimentConfig& c) {
    const TorusGrid g = c.grid();
    SpinorField psi = smooth_spinor(g);
    if (c.preset == Preset::rough) {
        for (int k = 0; k < 4; ++k) {
            const auto kk = static_cast<std::uint64_t>(k);
            const Field re = synthesize_rough_field(g, c.rough_sigma, detail::derived_seed(c.seed, 2 * kk));
            const Field im = synthesize_rough_field(g, c.rough_sigma, detail::derived_seed(c.seed, 2 * kk + 1));
            for (std::size_t i = 0; i < g.size(); ++i)
                psi[k][i] += c.spinor_amplitude * complex(re[i].real(), im[i].real());
        }
        detail::normalize(psi);
    }
    return psi;
}

/// Orthonormal Hermite-Gaussian orbitals with distinct spinor parts.
inline std::vector<SpinorField> initial_orbitals(const ExperimentConfig& c) {
    const TorusGrid g = c.grid();
    const std::array<Vector4, 4> spin{Vector4(1.0, 0.3, complex(0.0, 0.2), 0.0),
                                      Vector4(0.2, 1.0, 0.0, complex(0.0, 0.3)),
                                      Vector4(0.0, complex(0.0, 0.1), 1.0, 0.2),
                                      Vector4(0.3, 0.0, complex(0.0, -0.2), 1.0)};
    std::vector<SpinorField> out;
    for (int j = 0; j < c.rank; ++j) {
        const Vector4& v = spin[static_cast<std::size_t>(j % 4)];
        SpinorField psi = SpinorField::from_profile(g, v, [&g, j](const auto& x) {
            return complex(detail::hermite(j, x[0]) * std::exp(-0.5 * detail::radius_squared(x, g.dim())), 0.0);
        });
        for (const auto& prev : out) {
            const complex proj = l2_inner(prev, psi);
            psi -= proj * prev;
        }
        detail::normalize(psi);
        out.push_back(std::move(psi));
    }
    return out;
}

/// Fields from reduced data for a weighted orbital family:
/// S = Sbar - gamma_sigma rho_s, omega = omegabar + gamma_omega (rho_v, J), velocities shifted by the density rates.
inline KGState fields_from_reduced(std::span<const SpinorField> orbitals, std::span<const double> weights,
                                   const ReducedState& r, const Couplings& c) {
    const DensityBundle rho = densities(orbitals, weights);
    KGState kg(r.s_bar.grid(), r.m_sigma, r.m_omega);
    kg.s = r.s_bar - complex(c.gamma_sigma, 0.0) * rho.rho_s;
    for (int mu = 0; mu < 4; ++mu) {
        const auto m = static_cast<std::size_t>(mu);
        kg.omega[m] = r.omega_bar[m] + complex(c.gamma_omega, 0.0) * rho.four_current(mu);
    }
    kg.s_dot = r.s_bar_dot;
    kg.omega_dot = r.omega_bar_dot;
    for (std::size_t k = 0; k < orbitals.size(); ++k) {
        const DensityRates rate = derivative_initial_data(orbitals[k], kg.s, kg.omega, c.fermion_mass);
        kg.s_dot -= complex(c.gamma_sigma * weights[k], 0.0) * rate.rho_s;
        for (int mu = 0; mu < 4; ++mu)
            kg.omega_dot[static_cast<std::size_t>(mu)] += complex(c.gamma_omega * weights[k], 0.0) * rate.four_current(mu);
    }
    make_real(kg.s);
    make_real(kg.s_dot);
    for (std::size_t mu = 0; mu < 4; ++mu) {
        make_real(kg.omega[mu]);
        make_real(kg.omega_dot[mu]);
    }
    return kg;
}

/// Reduced initial fields: rough for the rough preset, zero otherwise; velocities zero.
inline ReducedState initial_reduced(const ExperimentConfig& c, double mass) {
    const TorusGrid g = c.grid();
    ReducedState r{Field(g), Field(g), zero_vector_field(g), zero_vector_field(g), mass, mass};
    if (c.preset == Preset::rough) {
        r.s_bar = complex(c.field_amplitude, 0.0) * synthesize_rough_field(g, c.rough_sigma, detail::derived_seed(c.seed, 100));
        for (std::uint64_t mu = 0; mu < 4; ++mu)
            r.omega_bar[mu] = complex(c.field_amplitude, 0.0) *
                              synthesize_rough_field(g, c.rough_sigma, detail::derived_seed(c.seed, 101 + mu));
    }
    return r;
}

inline KGState initial_fields(const ExperimentConfig& c, std::span<const SpinorField> orbitals,
                              std::span<const double> weights, double mass) {
    const TorusGrid g = c.grid();
    switch (c.field_init) {
        case FieldInit::consistent:
            return fields_from_reduced(orbitals, weights, initial_reduced(c, mass), c.couplings);
        case FieldInit::preset: {
            KGState kg(g, mass, mass);
            kg.s = Field::from_function(g, [&g](const auto& x) {
                return complex(0.5 * std::exp(-detail::radius_squared(x, g.dim())), 0.0);
            });
            return kg;
        }
        case FieldInit::mismatched:
            break;
    }
    return KGState(g, mass, mass);
}

inline DKGSystemState initial_dkg_state(const ExperimentConfig& c, double mass) {
    SpinorField psi = initial_spinor(c);
    KGState kg = initial_fields(c, std::span<const SpinorField>(&psi, 1), unit_weight, mass);
    return DKGSystemState{std::move(psi), std::move(kg), c.couplings, 0.0};
}

inline NLDState initial_nld_state(const ExperimentConfig& c) { return NLDState{initial_spinor(c), c.couplings, 0.0}; }

inline DensityMatrix initial_density_matrix(const ExperimentConfig& c) {
    return DensityMatrix(initial_orbitals(c), c.manybody_occupations());
}

inline ManyBodyDKGState initial_manybody_dkg_state(const ExperimentConfig& c, double mass) {
    DensityMatrix gamma = initial_density_matrix(c);
    KGState kg = initial_fields(c, gamma.orbitals, gamma.occupations, mass);
    return ManyBodyDKGState{std::move(gamma), std::move(kg), c.couplings, 0.0};
}

inline ManyBodyNLDState initial_manybody_nld_state(const ExperimentConfig& c) {
    return ManyBodyNLDState{initial_density_matrix(c), c.couplings, 0.0};
}

}  // namespace dkg::lab

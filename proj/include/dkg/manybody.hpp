#pragma once

// Finite-rank density matrices Gamma = sum_k n_k |psi_k><psi_k|, their
// densities, h^s norms through orbital Gram matrices, and the many-body flows.

#include "dkg/evolvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dkg {

struct DensityMatrix {
    std::vector<SpinorField> orbitals;
    std::vector<double> occupations;

    DensityMatrix(std::vector<SpinorField> psi, std::vector<double> n)
        : orbitals(std::move(psi)), occupations(std::move(n)) {
        if (orbitals.empty()) throw std::invalid_argument("density matrix needs at least one orbital");
        if (orbitals.size() != occupations.size()) throw std::invalid_argument("orbital/occupation count mismatch");
        for (double v : occupations)
            if (!(v >= 0.0)) throw std::invalid_argument("occupations must be nonnegative");
        for (const auto& o : orbitals) require_same_grid(orbitals.front().grid(), o.grid());
    }

    static DensityMatrix rank_one(SpinorField psi, double n = 1.0) {
        std::vector<SpinorField> v;
        v.push_back(std::move(psi));
        return DensityMatrix(std::move(v), {n});
    }

    const TorusGrid& grid() const noexcept { return orbitals.front().grid(); }
    std::size_t rank() const noexcept { return orbitals.size(); }
};

using OperatorSobolevIndex = SobolevIndex;

inline DensityBundle gamma_densities(const DensityMatrix& g) { return densities(g.orbitals, g.occupations); }

/// <phi, Gamma phi> = sum_k n_k |<psi_k, phi>|^2.
inline double expectation(const DensityMatrix& g, const SpinorField& phi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < g.rank(); ++k) acc += g.occupations[k] * std::norm(l2_inner(g.orbitals[k], phi));
    return acc;
}

namespace detail {

/// Spectra of (1 - Delta)^{s/2} applied to each orbital, stacked by component.
inline std::vector<std::vector<complex>> weighted_spectra(std::span<const SpinorField> orbitals, double s) {
    std::vector<std::vector<complex>> out;
    for (const auto& psi : orbitals) {
        const auto& g = psi.grid();
        std::vector<complex> stacked;
        stacked.reserve(4 * g.size());
        for (int c = 0; c < 4; ++c) {
            Spectrum sp = forward_transform(psi[c]);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double w = s == 0.0 ? 1.0 : std::pow(1.0 + g.k_squared(i), 0.5 * s);
                stacked.push_back(w * sp.coeffs[i]);
            }
        }
        out.push_back(std::move(stacked));
    }
    return out;
}

/// Matrix of continuum inner products <a_j, b_k> from spectra.
inline Eigen::MatrixXcd spectral_gram(const std::vector<std::vector<complex>>& a,
                                      const std::vector<std::vector<complex>>& b, const TorusGrid& g) {
    const double scale = g.cell_volume() / static_cast<double>(g.size());
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t j = 0; j < a.size(); ++j)
        for (std::size_t k = 0; k < b.size(); ++k) {
            complex acc{0.0, 0.0};
            for (std::size_t i = 0; i < a[j].size(); ++i) acc += std::conj(a[j][i]) * b[k][i];
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = acc * scale;
        }
    return m;
}

/// ||sum_k n_k |a_k><b_k| ||_HS^2 = sum_jk n_j n_k <a_j, a_k> <b_k, b_j>.
inline double hs_norm_squared(const Eigen::MatrixXcd& ga, const Eigen::MatrixXcd& gb, std::span<const double> n) {
    double acc = 0.0;
    const auto r = static_cast<Eigen::Index>(n.size());
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index k = 0; k < r; ++k)
            acc += n[static_cast<std::size_t>(j)] * n[static_cast<std::size_t>(k)] * (ga(j, k) * gb(k, j)).real();
    return acc;
}

inline double signed_hs_norm(std::span<const SpinorField> orbitals, std::span<const double> n, double s) {
    const auto spec = weighted_spectra(orbitals, s);
    const Eigen::MatrixXcd g = spectral_gram(spec, spec, orbitals.front().grid());
    return std::sqrt(std::max(0.0, hs_norm_squared(g, g, n)));
}

}  // namespace detail

/// Orbital Gram matrix <chi_j, chi_k> with chi = (1 - Delta)^{s/2} psi.
inline Eigen::MatrixXcd gram_matrix(const DensityMatrix& g, SobolevIndex s = SobolevIndex(0.0)) {
    const auto spec = detail::weighted_spectra(g.orbitals, s.value());
    return detail::spectral_gram(spec, spec, g.grid());
}

/// ||(1 - Delta)^{s/2} Gamma (1 - Delta)^{s/2}||_HS.
inline double hs_norm(const DensityMatrix& g, OperatorSobolevIndex s) {
    return detail::signed_hs_norm(g.orbitals, g.occupations, s.value());
}

/// h^s norm of Gamma_A - Gamma_B, a finite-rank operator with signed weights.
inline double diff_hs_norm(const DensityMatrix& a, const DensityMatrix& b, OperatorSobolevIndex s) {
    require_same_grid(a.grid(), b.grid());
    std::vector<SpinorField> orbitals = a.orbitals;
    orbitals.insert(orbitals.end(), b.orbitals.begin(), b.orbitals.end());
    std::vector<double> n = a.occupations;
    for (double v : b.occupations) n.push_back(-v);
    return detail::signed_hs_norm(orbitals, n, s.value());
}

/// h^s norms of f Gamma and Gamma f for a scalar multiplier f.
inline std::pair<double, double> multiplied_hs_norms(const DensityMatrix& g, const Field& f, OperatorSobolevIndex s) {
    require_same_grid(g.grid(), f.grid());
    std::vector<SpinorField> f_psi, fbar_psi;
    Field fbar = f;
    for (auto& v : fbar.values()) v = std::conj(v);
    for (const auto& psi : g.orbitals) {
        SpinorField a = psi, b = psi;
        for (int c = 0; c < 4; ++c)
            for (std::size_t i = 0; i < psi.size(); ++i) {
                a[c][i] *= f[i];
                b[c][i] *= fbar[i];
            }
        f_psi.push_back(std::move(a));
        fbar_psi.push_back(std::move(b));
    }
    const auto plain = detail::weighted_spectra(g.orbitals, s.value());
    const auto sf = detail::weighted_spectra(f_psi, s.value());
    const auto sfb = detail::weighted_spectra(fbar_psi, s.value());
    const Eigen::MatrixXcd gp = detail::spectral_gram(plain, plain, g.grid());
    const double left = detail::hs_norm_squared(detail::spectral_gram(sf, sf, g.grid()), gp, g.occupations);
    // Gamma f = sum_k n_k |psi_k><fbar psi_k|
    const double right = detail::hs_norm_squared(gp, detail::spectral_gram(sfb, sfb, g.grid()), g.occupations);
    return {std::sqrt(std::max(0.0, left)), std::sqrt(std::max(0.0, right))};
}

/// The 4x4 matrix-valued diagonal Gamma(x, x) = sum_k n_k psi_k(x) psi_k(x)^*, entry (a, b) at index 4a + b.
inline std::vector<Field> kernel_diagonal(const DensityMatrix& g) {
    std::vector<Field> out(16, Field(g.grid()));
    for (std::size_t k = 0; k < g.rank(); ++k)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (std::size_t i = 0; i < g.grid().size(); ++i)
                    out[static_cast<std::size_t>(4 * a + b)][i] +=
                        g.occupations[k] * g.orbitals[k][a][i] * std::conj(g.orbitals[k][b][i]);
    return out;
}

inline double kernel_diagonal_norm(const DensityMatrix& g, SobolevIndex s) {
    double acc = 0.0;
    for (const auto& f : kernel_diagonal(g)) acc += sobolev_norm_squared(forward_transform(f), s);
    return std::sqrt(acc);
}

struct RegularityReport {
    double ratio = 0.0;               ///< ||Gamma(x,x)||_{H^s} / (||Gamma||_{h^s} ||Gamma||_{h^s'})^{1/2}
    double diagonal_norm = 0.0;
    double hs_s = 0.0;
    double hs_s_prime = 0.0;
};

inline RegularityReport density_regularity_check(const DensityMatrix& g, SobolevIndex s, SobolevIndex s_prime) {
    RegularityReport r;
    r.diagonal_norm = kernel_diagonal_norm(g, s);
    r.hs_s = hs_norm(g, s);
    r.hs_s_prime = hs_norm(g, s_prime);
    const double denom = std::sqrt(r.hs_s * r.hs_s_prime);
    r.ratio = denom > 0.0 ? r.diagonal_norm / denom : 0.0;
    return r;
}

/// Largest ratio over an ensemble.
inline double density_regularity_check(const std::vector<DensityMatrix>& ensemble, SobolevIndex s,
                                       SobolevIndex s_prime) {
    double worst = 0.0;
    for (const auto& g : ensemble) worst = nan_max(worst, density_regularity_check(g, s, s_prime).ratio);
    return worst;
}

struct MultiplicationReport {
    double lhs = 0.0;  ///< ||f Gamma||_{h^s} + ||Gamma f||_{h^s}
    double rhs = 0.0;  ///< ||f||_{H^s} ||Gamma||_{h^s}^{1/2} ||Gamma||_{h^s'}^{1/2} + ||f||_inf ||Gamma||_{h^s}
    double ratio = 0.0;
};

inline MultiplicationReport multiplication_bound_check(const DensityMatrix& g, const Field& f, SobolevIndex s,
                                                       SobolevIndex s_prime) {
    MultiplicationReport r;
    const auto [left, right] = multiplied_hs_norms(g, f, s);
    r.lhs = left + right;
    const double hs = hs_norm(g, s);
    r.rhs = sobolev_norm(f, s) * std::sqrt(hs * hs_norm(g, s_prime)) + max_abs(f) * hs;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    return r;
}

struct ManyBodyDKGState {
    DensityMatrix gamma;
    KGState kg;
    Couplings c;
    double t = 0.0;
};

struct ManyBodyNLDState {
    DensityMatrix gamma;
    Couplings c;
    double t = 0.0;
};

inline std::span<const SpinorField> orbitals_of(const ManyBodyDKGState& s) { return s.gamma.orbitals; }
inline std::span<const SpinorField> orbitals_of(const ManyBodyNLDState& s) { return s.gamma.orbitals; }
inline std::span<const double> weights_of(const ManyBodyDKGState& s) { return s.gamma.occupations; }
inline std::span<const double> weights_of(const ManyBodyNLDState& s) { return s.gamma.occupations; }
inline double field_amplitude(const ManyBodyDKGState& s) { return s.kg.max_abs(); }
inline double field_amplitude(const ManyBodyNLDState&) { return 0.0; }

/// Every orbital advanced by the one-body stepper with the common W of Gamma.
inline ManyBodyDKGState manybody_dkg_step(ManyBodyDKGState state, double dt,
                                          FieldClosure closure = FieldClosure::dynamic) {
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and nonzero");
    detail::dkg_orbital_step(state.gamma.orbitals, state.gamma.occupations, state.kg, state.c, dt, closure);
    state.t += dt;
    detail::check_finite(state.gamma.orbitals, &state.kg, state.t);
    return state;
}

inline ManyBodyNLDState manybody_nld_step(ManyBodyNLDState state, double dt) {
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and nonzero");
    detail::nld_orbital_step(state.gamma.orbitals, state.gamma.occupations, state.c, dt);
    state.t += dt;
    detail::check_finite(state.gamma.orbitals, nullptr, state.t);
    return state;
}

inline Trajectory<ManyBodyDKGState> evolve(ManyBodyDKGState state, double T, double dt, std::size_t sample_every) {
    return evolve(std::move(state), T, dt, sample_every,
                  [](ManyBodyDKGState s, double h) { return manybody_dkg_step(std::move(s), h); });
}

inline Trajectory<ManyBodyNLDState> evolve(ManyBodyNLDState state, double T, double dt, std::size_t sample_every) {
    return evolve(std::move(state), T, dt, sample_every,
                  [](ManyBodyNLDState s, double h) { return manybody_nld_step(std::move(s), h); });
}

/// sup over samples of ||Gamma_A - Gamma_B||_{h^{s'}}.
template <typename A, typename B>
double hs_error_metric(const std::vector<A>& a, const std::vector<B>& b, OperatorSobolevIndex s) {
    if (a.size() != b.size()) throw std::invalid_argument("trajectories have different sample counts");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].t - b[i].t) > sample_time_tolerance * std::max(1.0, std::abs(a[i].t)))
            throw std::invalid_argument("trajectories are sampled at different times");
        worst = nan_max(worst, diff_hs_norm(a[i].gamma, b[i].gamma, s));
    }
    return worst;
}

}  // namespace dkg

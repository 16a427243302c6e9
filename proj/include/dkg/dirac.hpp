#pragma once

// Dirac algebra, spinor fields, bilinear densities, the free Dirac
// propagator and pointwise interaction matrices.
//
// Inner products on C^4 are antilinear in the first slot. Spatial dimension
// d <= 3 uses alpha_1..alpha_d for the kinetic term; all three alpha
// matrices still enter the current J and the interaction matrix.

#include "dkg/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace dkg {

using Matrix4 = Eigen::Matrix4cd;
using Vector4 = Eigen::Vector4cd;

struct DiracAlgebra {
    static const Matrix4& identity() {
        static const Matrix4 id = Matrix4::Identity();
        return id;
    }

    static const Matrix4& beta() {
        static const Matrix4 b = [] {
            Matrix4 m = Matrix4::Zero();
            m(0, 0) = m(1, 1) = 1.0;
            m(2, 2) = m(3, 3) = -1.0;
            return m;
        }();
        return b;
    }

    /// alpha_k for k = 0, 1, 2 (alpha_1, alpha_2, alpha_3).
    static const Matrix4& alpha(int k) {
        static const std::array<Matrix4, 3> a = [] {
            const complex I(0.0, 1.0);
            std::array<Eigen::Matrix2cd, 3> sigma;
            sigma[0] << 0.0, 1.0, 1.0, 0.0;
            sigma[1] << 0.0, -I, I, 0.0;
            sigma[2] << 1.0, 0.0, 0.0, -1.0;
            std::array<Matrix4, 3> out;
            for (std::size_t j = 0; j < 3; ++j) {
                out[j] = Matrix4::Zero();
                out[j].block<2, 2>(0, 2) = sigma[j];
                out[j].block<2, 2>(2, 0) = sigma[j];
            }
            return out;
        }();
        return a[static_cast<std::size_t>(k)];
    }

    /// Symbol of D = -i alpha.grad + beta m at wavevector xi: alpha.xi + beta m.
    static Matrix4 symbol(const Wavevector& xi, double mass) {
        Matrix4 m = mass * beta();
        for (int k = 0; k < 3; ++k) m += xi[static_cast<std::size_t>(k)] * alpha(k);
        return m;
    }
};

class SpinorField {
public:
    explicit SpinorField(TorusGrid grid)
        : components_{Field(grid), Field(grid), Field(grid), Field(grid)} {}
    SpinorField(Field c0, Field c1, Field c2, Field c3)
        : components_{std::move(c0), std::move(c1), std::move(c2), std::move(c3)} {
        for (int c = 1; c < 4; ++c) require_same_grid(components_[0].grid(), components_[static_cast<std::size_t>(c)].grid());
    }

    /// Constant spinor times a scalar profile f(x).
    template <typename F>
    static SpinorField from_profile(TorusGrid grid, const Vector4& v, F&& profile) {
        SpinorField psi(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const complex f = profile(grid.position(i));
            for (int c = 0; c < 4; ++c) psi[c][i] = v(c) * f;
        }
        return psi;
    }

    const TorusGrid& grid() const noexcept { return components_[0].grid(); }
    std::size_t size() const noexcept { return components_[0].size(); }
    Field& operator[](int c) noexcept { return components_[static_cast<std::size_t>(c)]; }
    const Field& operator[](int c) const noexcept { return components_[static_cast<std::size_t>(c)]; }

    Vector4 at(std::size_t i) const noexcept {
        return Vector4(components_[0][i], components_[1][i], components_[2][i], components_[3][i]);
    }
    void set(std::size_t i, const Vector4& v) noexcept {
        for (std::size_t c = 0; c < 4; ++c) components_[c][i] = v(static_cast<Eigen::Index>(c));
    }

    SpinorField& operator+=(const SpinorField& o) {
        for (std::size_t c = 0; c < 4; ++c) components_[c] += o.components_[c];
        return *this;
    }
    SpinorField& operator-=(const SpinorField& o) {
        for (std::size_t c = 0; c < 4; ++c) components_[c] -= o.components_[c];
        return *this;
    }
    SpinorField& operator*=(complex z) noexcept {
        for (auto& f : components_) f *= z;
        return *this;
    }
    friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
    friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
    friend SpinorField operator*(complex z, SpinorField a) { return a *= z; }
    bool operator==(const SpinorField& o) const { return components_ == o.components_; }

private:
    std::array<Field, 4> components_;
};

inline double sobolev_norm(const SpinorField& psi, SobolevIndex s) {
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) acc += sobolev_norm_squared(forward_transform(psi[c]), s);
    return std::sqrt(acc);
}

inline double l2_norm(const SpinorField& psi) noexcept {
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) acc += quadrature_norm_squared(psi[c]);
    return std::sqrt(acc);
}

inline complex l2_inner(const SpinorField& a, const SpinorField& b) {
    complex acc{0.0, 0.0};
    for (int c = 0; c < 4; ++c) acc += l2_inner(a[c], b[c]);
    return acc;
}

inline double max_abs(const SpinorField& psi) noexcept {
    double m = 0.0;
    for (int c = 0; c < 4; ++c) m = nan_max(m, max_abs(psi[c]));
    return m;
}

inline SpinorField gradient(const SpinorField& psi, int axis) {
    return SpinorField(gradient(psi[0], axis), gradient(psi[1], axis), gradient(psi[2], axis),
                       gradient(psi[3], axis));
}

/// rho_s = <beta Psi, Psi>, rho_v = |Psi|^2, J_k = <Psi, alpha_k Psi>.
struct DensityBundle {
    Field rho_s;
    Field rho_v;
    std::array<Field, 3> current;

    explicit DensityBundle(TorusGrid grid)
        : rho_s(grid), rho_v(grid), current{Field(grid), Field(grid), Field(grid)} {}

    const TorusGrid& grid() const noexcept { return rho_s.grid(); }

    /// Four-current (rho_v, J_1, J_2, J_3), the source of the vector field.
    const Field& four_current(int mu) const noexcept {
        return mu == 0 ? rho_v : current[static_cast<std::size_t>(mu - 1)];
    }

    DensityBundle& add_scaled(const DensityBundle& o, double w) {
        require_same_grid(grid(), o.grid());
        for (std::size_t i = 0; i < rho_s.size(); ++i) {
            rho_s[i] += w * o.rho_s[i];
            rho_v[i] += w * o.rho_v[i];
            for (std::size_t k = 0; k < 3; ++k) current[k][i] += w * o.current[k][i];
        }
        return *this;
    }
};

inline DensityBundle densities(const SpinorField& psi) {
    DensityBundle out(psi.grid());
    const Matrix4& b = DiracAlgebra::beta();
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const Vector4 v = psi.at(i);
        out.rho_s[i] = v.dot(b * v).real();
        out.rho_v[i] = v.squaredNorm();
        for (int k = 0; k < 3; ++k)
            out.current[static_cast<std::size_t>(k)][i] = v.dot(DiracAlgebra::alpha(k) * v).real();
    }
    return out;
}

/// Weighted sum of one-body densities, sum_k w_k rho(psi_k).
inline DensityBundle densities(std::span<const SpinorField> orbitals, std::span<const double> weights) {
    if (orbitals.empty()) throw std::invalid_argument("densities of an empty orbital set");
    if (orbitals.size() != weights.size()) throw std::invalid_argument("orbital/weight count mismatch");
    DensityBundle out(orbitals.front().grid());
    for (std::size_t k = 0; k < orbitals.size(); ++k) out.add_scaled(densities(orbitals[k]), weights[k]);
    return out;
}

inline DensityBundle dealias(const DensityBundle& rho) {
    DensityBundle out(rho.grid());
    out.rho_s = dealias(rho.rho_s);
    out.rho_v = dealias(rho.rho_v);
    make_real(out.rho_s);
    make_real(out.rho_v);
    for (std::size_t k = 0; k < 3; ++k) {
        out.current[k] = dealias(rho.current[k]);
        make_real(out.current[k]);
    }
    return out;
}

/// Interaction matrix in Clifford form,
///   W = scalar * Id + beta_coeff * beta + sum_k alpha_coeff[k] * alpha_k,
/// with real coefficient fields. Every W arising from the field equations
/// has this form.
struct Potential {
    Field scalar;
    Field beta_coeff;
    std::array<Field, 3> alpha_coeff;

    explicit Potential(TorusGrid grid)
        : scalar(grid), beta_coeff(grid), alpha_coeff{Field(grid), Field(grid), Field(grid)} {}

    const TorusGrid& grid() const noexcept { return scalar.grid(); }

    Matrix4 matrix_at(std::size_t i) const {
        Matrix4 w = scalar[i].real() * DiracAlgebra::identity() + beta_coeff[i].real() * DiracAlgebra::beta();
        for (int k = 0; k < 3; ++k) w += alpha_coeff[static_cast<std::size_t>(k)][i].real() * DiracAlgebra::alpha(k);
        return w;
    }
};

/// General pointwise 4x4 matrix field (Hermitian when used as an interaction).
class InteractionMatrixField {
public:
    explicit InteractionMatrixField(TorusGrid grid) : grid_(grid), w_(grid.size(), Matrix4::Zero()) {}
    explicit InteractionMatrixField(const Potential& p) : InteractionMatrixField(p.grid()) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = p.matrix_at(i);
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return w_.size(); }
    Matrix4& operator[](std::size_t i) noexcept { return w_[i]; }
    const Matrix4& operator[](std::size_t i) const noexcept { return w_[i]; }

    /// Largest |W - W^dagger| entry relative to max(1, |W|).
    double hermiticity_defect() const {
        double worst = 0.0;
        for (const auto& w : w_) {
            const double scale = std::max(1.0, w.cwiseAbs().maxCoeff<Eigen::PropagateNaN>());
            worst = nan_max(worst, (w - w.adjoint()).cwiseAbs().maxCoeff<Eigen::PropagateNaN>() / scale);
        }
        return worst;
    }

private:
    TorusGrid grid_;
    std::vector<Matrix4> w_;
};

inline SpinorField apply_interaction(const InteractionMatrixField& w, const SpinorField& psi) {
    require_same_grid(w.grid(), psi.grid());
    SpinorField out(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) out.set(i, w[i] * psi.at(i));
    return out;
}

inline SpinorField apply_interaction(const Potential& w, const SpinorField& psi) {
    return apply_interaction(InteractionMatrixField(w), psi);
}

inline constexpr double hermiticity_tolerance = 1e-12;

/// Exact flow of i dPsi/dt = W(x) Psi with W frozen: exp(-i dt W(x)) at
/// every point, from a Hermitian eigendecomposition.
inline SpinorField interaction_phase_step(const InteractionMatrixField& w, const SpinorField& psi, double dt) {
    require_same_grid(w.grid(), psi.grid());
    if (!(w.hermiticity_defect() <= hermiticity_tolerance))
        throw std::invalid_argument("interaction matrix is not Hermitian");
    SpinorField out(psi.grid());
    Eigen::SelfAdjointEigenSolver<Matrix4> eig;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        eig.compute(w[i]);
        const Eigen::Vector4d lam = eig.eigenvalues();
        Vector4 phases;
        for (int j = 0; j < 4; ++j) phases(j) = std::polar(1.0, -dt * lam(j));
        const Matrix4& v = eig.eigenvectors();
        out.set(i, v * phases.asDiagonal() * (v.adjoint() * psi.at(i)));
    }
    return out;
}

/// Same flow for W in Clifford form. Since (b beta + a.alpha)^2 = (b^2 + |a|^2) Id,
/// exp(-i dt W) = e^{-i dt c} [cos(dt kappa) - i sin(dt kappa)/kappa (b beta + a.alpha)].
inline void interaction_phase_step_inplace(const Potential& w, SpinorField& psi, double dt) {
    require_same_grid(w.grid(), psi.grid());
    const complex I(0.0, 1.0);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double c = w.scalar[i].real();
        const double b = w.beta_coeff[i].real();
        const double a1 = w.alpha_coeff[0][i].real();
        const double a2 = w.alpha_coeff[1][i].real();
        const double a3 = w.alpha_coeff[2][i].real();
        const double kappa = std::sqrt(b * b + a1 * a1 + a2 * a2 + a3 * a3);
        const double cs = std::cos(dt * kappa);
        const double sn = kappa > 0.0 ? std::sin(dt * kappa) / kappa : dt;
        const complex ph = std::polar(1.0, -dt * c);
        const complex p0 = psi[0][i], p1 = psi[1][i], p2 = psi[2][i], p3 = psi[3][i];
        // M psi with M = b beta + a1 alpha1 + a2 alpha2 + a3 alpha3
        const complex m0 = b * p0 + a3 * p2 + complex(a1, -a2) * p3;
        const complex m1 = b * p1 + complex(a1, a2) * p2 - a3 * p3;
        const complex m2 = -b * p2 + a3 * p0 + complex(a1, -a2) * p1;
        const complex m3 = -b * p3 + complex(a1, a2) * p0 - a3 * p1;
        psi[0][i] = ph * (cs * p0 - I * sn * m0);
        psi[1][i] = ph * (cs * p1 - I * sn * m1);
        psi[2][i] = ph * (cs * p2 - I * sn * m2);
        psi[3][i] = ph * (cs * p3 - I * sn * m3);
    }
}

inline SpinorField interaction_phase_step(const Potential& w, const SpinorField& psi, double dt) {
    SpinorField out = psi;
    interaction_phase_step_inplace(w, out, dt);
    return out;
}

/// Free propagator e^{-itD} applied mode by mode:
/// cos(t lambda) Id - i sin(t lambda)/lambda (alpha.xi + beta m), lambda = sqrt(|xi|^2 + m^2).
inline void free_dirac_propagate_inplace(SpinorField& psi, double t, double mass) {
    if (t == 0.0) return;
    const auto& g = psi.grid();
    std::array<Spectrum, 4> spec{forward_transform(psi[0]), forward_transform(psi[1]),
                                 forward_transform(psi[2]), forward_transform(psi[3])};
    const complex I(0.0, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Wavevector xi = g.wavevector(i);
        const double lam = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + mass * mass);
        const double cs = std::cos(t * lam);
        const double sn = lam > 0.0 ? std::sin(t * lam) / lam : t;
        const complex p0 = spec[0].coeffs[i], p1 = spec[1].coeffs[i];
        const complex p2 = spec[2].coeffs[i], p3 = spec[3].coeffs[i];
        // (alpha.xi + beta m) p
        const complex m0 = mass * p0 + xi[2] * p2 + complex(xi[0], -xi[1]) * p3;
        const complex m1 = mass * p1 + complex(xi[0], xi[1]) * p2 - xi[2] * p3;
        const complex m2 = -mass * p2 + xi[2] * p0 + complex(xi[0], -xi[1]) * p1;
        const complex m3 = -mass * p3 + complex(xi[0], xi[1]) * p0 - xi[2] * p1;
        spec[0].coeffs[i] = cs * p0 - I * sn * m0;
        spec[1].coeffs[i] = cs * p1 - I * sn * m1;
        spec[2].coeffs[i] = cs * p2 - I * sn * m2;
        spec[3].coeffs[i] = cs * p3 - I * sn * m3;
    }
    for (int c = 0; c < 4; ++c) psi[c] = inverse_transform(std::move(spec[static_cast<std::size_t>(c)]));
}

inline SpinorField free_dirac_propagate(const SpinorField& psi, double t, double mass) {
    SpinorField out = psi;
    free_dirac_propagate_inplace(out, t, mass);
    return out;
}

/// -i sum_a alpha_a d_a Psi over the d active axes.
inline SpinorField kinetic_term(const SpinorField& psi) {
    const auto& g = psi.grid();
    SpinorField out(g);
    const complex mI(0.0, -1.0);
    for (int a = 0; a < g.dim(); ++a) {
        const SpinorField d = gradient(psi, a);
        for (std::size_t i = 0; i < g.size(); ++i)
            out.set(i, out.at(i) + mI * (DiracAlgebra::alpha(a) * d.at(i)));
    }
    return out;
}

/// D Psi = -i alpha.grad Psi + beta m Psi, derivatives taken spectrally.
inline SpinorField apply_dirac_operator(const SpinorField& psi, double mass) {
    SpinorField out = kinetic_term(psi);
    for (std::size_t i = 0; i < psi.size(); ++i)
        out.set(i, out.at(i) + mass * (DiracAlgebra::beta() * psi.at(i)));
    return out;
}

/// Time derivative of rho_s along the free flow, 2 Im <beta Psi, D Psi>.
inline Field dt_rho_s(const SpinorField& psi, double mass) {
    const SpinorField dpsi = apply_dirac_operator(psi, mass);
    Field out(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i)
        out[i] = 2.0 * (DiracAlgebra::beta() * psi.at(i)).dot(dpsi.at(i)).imag();
    return out;
}

/// Time derivatives of the densities at t = 0 for a solution of the coupled
/// system with spinor psi and fields (S, omega = (V, omega_1..3)).
struct DensityRates {
    Field rho_s;
    Field rho_v;
    std::array<Field, 3> current;

    explicit DensityRates(TorusGrid grid)
        : rho_s(grid), rho_v(grid), current{Field(grid), Field(grid), Field(grid)} {}

    const Field& four_current(int mu) const noexcept {
        return mu == 0 ? rho_v : current[static_cast<std::size_t>(mu - 1)];
    }
};

inline DensityRates derivative_initial_data(const SpinorField& psi, const Field& s_field,
                                            const std::array<Field, 4>& omega, double mass) {
    const auto& g = psi.grid();
    require_same_grid(g, s_field.grid());
    for (const auto& f : omega) require_same_grid(g, f.grid());

    std::vector<SpinorField> grads;
    for (int a = 0; a < g.dim(); ++a) grads.push_back(gradient(psi, a));

    DensityRates out(g);
    const complex I(0.0, 1.0);
    const Matrix4& beta = DiracAlgebra::beta();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vector4 v = psi.at(i);
        Vector4 alpha_grad = Vector4::Zero();  // alpha . grad Psi
        for (int a = 0; a < g.dim(); ++a)
            alpha_grad += DiracAlgebra::alpha(a) * grads[static_cast<std::size_t>(a)].at(i);
        // X = alpha.(-i grad - omega) Psi
        Vector4 x = -I * alpha_grad;
        for (int k = 0; k < 3; ++k)
            x -= omega[static_cast<std::size_t>(k + 1)][i].real() * (DiracAlgebra::alpha(k) * v);
        const Vector4 y = x + (mass + s_field[i].real()) * (beta * v);

        out.rho_s[i] = 2.0 * (I * (beta * v)).dot(x).real();
        out.rho_v[i] = -2.0 * v.dot(alpha_grad).real();
        for (int k = 0; k < 3; ++k)
            out.current[static_cast<std::size_t>(k)][i] = 2.0 * (I * (DiracAlgebra::alpha(k) * v)).dot(y).real();
    }
    return out;
}

}  // namespace dkg

#include "dkg/dirac.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace dkg;
using oracle::complex;

namespace {

const double pi = std::numbers::pi;
const complex I(0.0, 1.0);

SpinorField constant_spinor(const TorusGrid& g, const Vector4& v) {
    return SpinorField::from_profile(g, v, [](const auto&) { return complex(1.0, 0.0); });
}

SpinorField random_spinor(const TorusGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    SpinorField psi(g);
    for (int c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) psi[c][i] = complex(d(rng), d(rng));
    return psi;
}

/// Smooth localized spinor, band limited well inside the grid.
SpinorField gaussian_spinor(const TorusGrid& g, double shift = 0.0) {
    const Vector4 v(1.0, 0.3, complex(0.0, 0.2), 0.1);
    return SpinorField::from_profile(g, v, [shift](const auto& x) {
        return std::exp(-0.5 * (x[0] - shift) * (x[0] - shift)) * std::polar(1.0, 0.7 * x[0]);
    });
}

double max_diff(const SpinorField& a, const SpinorField& b) { return max_abs(a - b); }

}  // namespace

TEST(DiracAlgebra, AnticommutationTableIsExact) {
    const Matrix4& b = DiracAlgebra::beta();
    const Matrix4 id = Matrix4::Identity();
    EXPECT_EQ(b * b, id);
    for (int j = 0; j < 3; ++j) {
        const Matrix4& aj = DiracAlgebra::alpha(j);
        EXPECT_EQ(aj * aj, id);
        EXPECT_EQ(b * aj + aj * b, Matrix4::Zero().eval());
        EXPECT_EQ(aj.adjoint(), aj);
        for (int k = 0; k < 3; ++k) {
            if (j == k) continue;
            EXPECT_EQ(aj * DiracAlgebra::alpha(k) + DiracAlgebra::alpha(k) * aj, Matrix4::Zero().eval());
        }
    }
    EXPECT_EQ(b.adjoint(), b);
}

TEST(DiracAlgebra, MatchesEntrywiseOracle) {
    EXPECT_EQ(DiracAlgebra::beta(), oracle::beta());
    for (int k = 0; k < 3; ++k) EXPECT_EQ(DiracAlgebra::alpha(k), oracle::alpha(k));
}

TEST(SpinorField, ComponentsShareGrid) {
    TorusGrid a(1, 16, 1.0), b(1, 32, 1.0);
    EXPECT_THROW(SpinorField(Field(a), Field(a), Field(b), Field(a)), GridMismatch);
}

TEST(Densities, UpperComponentSpotValues) {
    TorusGrid g(1, 16, 4.0);
    auto rho = densities(constant_spinor(g, Vector4(1, 0, 0, 0)));
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_DOUBLE_EQ(rho.rho_s[i].real(), 1.0);
        EXPECT_DOUBLE_EQ(rho.rho_v[i].real(), 1.0);
        for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(rho.current[static_cast<std::size_t>(k)][i].real(), 0.0);
    }
}

TEST(Densities, LowerComponentSpotValues) {
    TorusGrid g(1, 16, 4.0);
    auto rho = densities(constant_spinor(g, Vector4(0, 0, 1, 0)));
    EXPECT_DOUBLE_EQ(rho.rho_s[3].real(), -1.0);
    EXPECT_DOUBLE_EQ(rho.rho_v[3].real(), 1.0);
    for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(rho.current[static_cast<std::size_t>(k)][3].real(), 0.0);
}

TEST(Densities, MixedSpinorMatchesMatrixOracle) {
    TorusGrid g(1, 16, 4.0);
    const Vector4 v = Vector4(1, 0, 1, 0) / std::sqrt(2.0);
    auto rho = densities(constant_spinor(g, v));
    EXPECT_NEAR(rho.rho_s[0].real(), 0.0, 1e-13);
    EXPECT_NEAR(rho.rho_v[0].real(), 1.0, 1e-13);
    EXPECT_NEAR(rho.current[0][0].real(), 0.0, 1e-13);
    EXPECT_NEAR(rho.current[1][0].real(), 0.0, 1e-13);
    EXPECT_NEAR(rho.current[2][0].real(), 1.0, 1e-13);

    std::mt19937 rng(5);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 20; ++trial) {
        Vector4 w;
        for (int c = 0; c < 4; ++c) w(c) = complex(d(rng), d(rng));
        auto r = densities(constant_spinor(g, w));
        const complex s = (oracle::beta() * w).adjoint() * w;
        EXPECT_NEAR(r.rho_s[0].real(), s.real(), 1e-13 * (1 + std::abs(s)));
        for (int k = 0; k < 3; ++k) {
            const complex j = w.adjoint() * (oracle::alpha(k) * w);
            EXPECT_NEAR(r.current[static_cast<std::size_t>(k)][0].real(), j.real(), 1e-13 * (1 + std::abs(j)));
        }
    }
}

TEST(Densities, PointwiseBoundsOnRandomSpinors) {
    TorusGrid g(1, 256, 8.0);
    auto rho = densities(random_spinor(g, 17u));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rv = rho.rho_v[i].real();
        EXPECT_GE(rv, -1e-12);
        EXPECT_LE(std::abs(rho.rho_s[i].real()), rv + 1e-12);
        for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(rho.current[static_cast<std::size_t>(k)][i].real()), rv + 1e-12);
        EXPECT_EQ(rho.rho_s[i].imag(), 0.0);
    }
}

TEST(FreeDirac, ZeroModeHalfAndFullPeriod) {
    TorusGrid g(1, 16, 4.0);
    const Vector4 v(1.0, complex(0.5, 0.2), -0.3, complex(0.0, 1.0));
    SpinorField psi = constant_spinor(g, v);
    SpinorField full = free_dirac_propagate(psi, pi, 1.0);
    EXPECT_LT(max_diff(full, complex(-1.0, 0.0) * psi), 1e-14);
    SpinorField half = free_dirac_propagate(psi, pi / 2, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LT(std::abs(half[0][i] + I * v(0)), 1e-14);
        EXPECT_LT(std::abs(half[1][i] + I * v(1)), 1e-14);
        EXPECT_LT(std::abs(half[2][i] - I * v(2)), 1e-14);
        EXPECT_LT(std::abs(half[3][i] - I * v(3)), 1e-14);
    }
}

TEST(FreeDirac, EigenSpinorPicksUpPhase) {
    const double L = 2.0 * pi;
    TorusGrid g(1, 32, L);
    const double m = 1.3;
    for (int n : {1, -3, 5}) {
        const double xi = n;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(xi * oracle::alpha(0) + m * oracle::beta());
        for (int e : {0, 3}) {
            const double lam = eig.eigenvalues()(e);
            const Vector4 u = eig.eigenvectors().col(e);
            SpinorField psi = SpinorField::from_profile(g, u, [n](const auto& x) { return std::polar(1.0, n * x[0]); });
            const double t = 2.7;
            SpinorField out = free_dirac_propagate(psi, t, m);
            EXPECT_LT(max_diff(out, std::polar(1.0, -t * lam) * psi), 1e-13) << "n " << n << " e " << e;
        }
    }
}

TEST(FreeDirac, UnitaryWithGroupLaw) {
    TorusGrid g(1, 128, 16.0);
    SpinorField psi = random_spinor(g, 3u);
    const double m = 2.0;
    const double n0 = l2_norm(psi);
    SpinorField a = free_dirac_propagate(psi, 0.37, m);
    EXPECT_NEAR(l2_norm(a) / n0, 1.0, 1e-12);
    SpinorField b = free_dirac_propagate(a, 1.1, m);
    SpinorField c = free_dirac_propagate(psi, 1.47, m);
    EXPECT_LT(max_diff(b, c) / max_abs(psi), 1e-12);
    EXPECT_EQ(free_dirac_propagate(psi, 0.0, m), psi);
    const double q0 = std::abs(l2_inner(psi, psi));
    EXPECT_NEAR(std::abs(l2_inner(c, c)) / q0, 1.0, 1e-12);
}

TEST(FreeDirac, MasslessLimitIsFinite) {
    TorusGrid g(1, 32, 8.0);
    SpinorField psi = constant_spinor(g, Vector4(1, 0, 0, 0));
    SpinorField out = free_dirac_propagate(psi, 1.0, 0.0);
    EXPECT_LT(max_diff(out, psi), 1e-14);
}

TEST(FreeDirac, ThreeDimensionalEigenSpinor) {
    const double L = 2.0 * pi;
    TorusGrid g(3, 8, L);
    const double m = 0.8;
    const Wavevector xi{1.0, -2.0, 3.0};
    Eigen::Matrix4cd h = m * oracle::beta();
    for (int k = 0; k < 3; ++k) h += xi[static_cast<std::size_t>(k)] * oracle::alpha(k);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(h);
    const Vector4 u = eig.eigenvectors().col(1);
    SpinorField psi = SpinorField::from_profile(g, u, [&](const auto& x) {
        return std::polar(1.0, xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]);
    });
    SpinorField out = free_dirac_propagate(psi, 1.9, m);
    EXPECT_LT(max_diff(out, std::polar(1.0, -1.9 * eig.eigenvalues()(1)) * psi), 1e-13);
}

TEST(ApplyInteraction, IdentityAndBeta) {
    TorusGrid g(1, 16, 4.0);
    const Vector4 v(1.0, 2.0, 3.0, 4.0);
    SpinorField psi = constant_spinor(g, v);
    Potential id(g);
    for (std::size_t i = 0; i < g.size(); ++i) id.scalar[i] = 1.0;
    EXPECT_EQ(apply_interaction(id, psi), psi);

    Potential b(g);
    for (std::size_t i = 0; i < g.size(); ++i) b.beta_coeff[i] = 1.0;
    SpinorField out = apply_interaction(b, psi);
    EXPECT_EQ(out.at(5), Vector4(1.0, 2.0, -3.0, -4.0));
}

TEST(ApplyInteraction, GridMismatchThrows) {
    InteractionMatrixField w(TorusGrid(1, 16, 1.0));
    SpinorField psi(TorusGrid(1, 32, 1.0));
    EXPECT_THROW(apply_interaction(w, psi), GridMismatch);
}

TEST(ApplyInteraction, HermitianExpectationIsReal) {
    TorusGrid g(1, 64, 4.0);
    std::mt19937 rng(9);
    InteractionMatrixField w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = oracle::random_hermitian(rng);
    SpinorField psi = random_spinor(g, 10u);
    SpinorField wpsi = apply_interaction(w, psi);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const complex e = psi.at(i).dot(wpsi.at(i));
        EXPECT_LT(std::abs(e.imag()), 1e-12 * (1.0 + std::abs(e)));
    }
}

TEST(InteractionPhase, ScalarPotentialIsGlobalPhase) {
    TorusGrid g(1, 16, 4.0);
    SpinorField psi = random_spinor(g, 2u);
    Potential w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w.scalar[i] = 0.8;
    const SpinorField expect = std::polar(1.0, -0.3 * 0.8) * psi;
    EXPECT_LT(max_diff(interaction_phase_step(InteractionMatrixField(w), psi, 0.3), expect), 1e-14);
    EXPECT_LT(max_diff(interaction_phase_step(w, psi, 0.3), expect), 1e-14);
}

TEST(InteractionPhase, BetaOverPiFlipsSign) {
    TorusGrid g(1, 16, 4.0);
    SpinorField psi = random_spinor(g, 4u);
    Potential w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w.beta_coeff[i] = 1.0;
    EXPECT_LT(max_diff(interaction_phase_step(InteractionMatrixField(w), psi, pi), complex(-1.0, 0.0) * psi), 1e-14);
    EXPECT_LT(max_diff(interaction_phase_step(w, psi, pi), complex(-1.0, 0.0) * psi), 1e-14);
}

TEST(InteractionPhase, RandomHermitianIsUnitaryPointwise) {
    TorusGrid g(1, 128, 4.0);
    std::mt19937 rng(12);
    InteractionMatrixField w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = oracle::random_hermitian(rng, 3.0);
    SpinorField psi = random_spinor(g, 13u);
    SpinorField out = interaction_phase_step(w, psi, 0.77);
    EXPECT_NEAR(l2_norm(out) / l2_norm(psi), 1.0, 1e-13);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(out.at(i).norm(), psi.at(i).norm(), 1e-13 * psi.at(i).norm());
}

TEST(InteractionPhase, MatchesMatrixExponentialOracle) {
    TorusGrid g(1, 16, 4.0);
    std::mt19937 rng(21);
    InteractionMatrixField w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = oracle::random_hermitian(rng);
    SpinorField psi = random_spinor(g, 22u);
    const double dt = 0.4;
    SpinorField out = interaction_phase_step(w, psi, dt);
    for (std::size_t i = 0; i < g.size(); ++i) {
        // Taylor series of exp(-i dt W) to convergence
        Eigen::Matrix4cd term = Eigen::Matrix4cd::Identity(), sum = Eigen::Matrix4cd::Identity();
        for (int k = 1; k < 60; ++k) {
            term = term * (-I * dt * w[i]) / static_cast<double>(k);
            sum += term;
        }
        EXPECT_LT((out.at(i) - sum * psi.at(i)).norm(), 1e-13 * psi.at(i).norm());
    }
}

TEST(InteractionPhase, CliffordClosedFormMatchesEigenPath) {
    TorusGrid g(1, 64, 8.0);
    std::mt19937 rng(31);
    std::normal_distribution<double> d;
    Potential w(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        w.scalar[i] = d(rng);
        w.beta_coeff[i] = d(rng);
        for (auto& a : w.alpha_coeff) a[i] = d(rng);
    }
    w.beta_coeff[0] = 0.0;
    for (auto& a : w.alpha_coeff) a[0] = 0.0;
    SpinorField psi = random_spinor(g, 32u);
    SpinorField a = interaction_phase_step(w, psi, 0.9);
    SpinorField b = interaction_phase_step(InteractionMatrixField(w), psi, 0.9);
    EXPECT_LT(max_diff(a, b), 1e-13 * max_abs(psi));
}

TEST(InteractionPhase, NonHermitianThrows) {
    TorusGrid g(1, 16, 4.0);
    InteractionMatrixField w(g);
    w[3](0, 1) = 1.0;
    EXPECT_THROW(interaction_phase_step(w, SpinorField(g), 0.1), std::invalid_argument);
}

TEST(InteractionPhase, NaNMatrixThrows) {
    TorusGrid g(1, 16, 4.0);
    InteractionMatrixField w(g);
    w[5](2, 2) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(interaction_phase_step(w, SpinorField(g), 0.1), std::invalid_argument);
}

TEST(InteractionPhase, ConservesCharge) {
    TorusGrid g(1, 128, 16.0);
    SpinorField psi = gaussian_spinor(g);
    std::mt19937 rng(40);
    InteractionMatrixField w(g);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = oracle::random_hermitian(rng);
    auto charge = [](const SpinorField& p) {
        auto r = densities(p);
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) acc += r.rho_v[i].real() * p.grid().cell_volume();
        return acc;
    };
    const double q0 = charge(psi);
    EXPECT_NEAR(charge(interaction_phase_step(w, psi, 1.3)) / q0, 1.0, 1e-12);
    EXPECT_NEAR(charge(free_dirac_propagate(psi, 2.1, 1.0)) / q0, 1.0, 1e-12);
}

TEST(DtRhoS, ConstantSpinorGivesZero) {
    TorusGrid g(1, 16, 4.0);
    Field r = dt_rho_s(constant_spinor(g, Vector4(1.0, complex(0, 2), 0.5, -1.0)), 1.0);
    EXPECT_LT(max_abs(r), 1e-14);
}

TEST(DtRhoS, MatchesCentredDifferenceAtSecondOrder) {
    TorusGrid g(1, 256, 32.0);
    const double m = 1.0;
    SpinorField psi = gaussian_spinor(g, 0.5);
    const Field exact = dt_rho_s(psi, m);
    std::vector<double> hs, errs;
    for (double h : {0.02, 0.01, 0.005, 0.0025}) {
        const Field rp = densities(free_dirac_propagate(psi, h, m)).rho_s;
        const Field rm = densities(free_dirac_propagate(psi, -h, m)).rho_s;
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            e = std::max(e, std::abs((rp[i] - rm[i]).real() / (2 * h) - exact[i].real()));
        hs.push_back(h);
        errs.push_back(e);
    }
    EXPECT_NEAR(oracle::fit_slope(hs, errs), 2.0, 0.1);
}

TEST(DtRhoS, ChargeIsConservedByFreeFlow) {
    TorusGrid g(1, 256, 32.0);
    SpinorField psi = gaussian_spinor(g, -1.0);
    SpinorField later = free_dirac_propagate(psi, 0.5, 1.0);
    auto total = [](const SpinorField& p) {
        double acc = 0.0;
        auto r = densities(p);
        for (std::size_t i = 0; i < p.size(); ++i) acc += r.rho_v[i].real();
        return acc;
    };
    EXPECT_NEAR(total(later) / total(psi), 1.0, 1e-12);
}

TEST(DerivativeInitialData, ConstantSpinorTrivialRates) {
    TorusGrid g(1, 16, 4.0);
    SpinorField psi = constant_spinor(g, Vector4(1.0, complex(0, 0.5), 0.2, 0.1));
    std::array<Field, 4> omega{Field(g), Field(g), Field(g), Field(g)};
    auto r = derivative_initial_data(psi, Field(g), omega, 1.0);
    EXPECT_LT(max_abs(r.rho_v), 1e-14);
    EXPECT_LT(max_abs(r.rho_s), 1e-14);
}

TEST(DerivativeInitialData, ScalarRateAgreesWithDtRhoSWithoutFields) {
    TorusGrid g(1, 128, 16.0);
    SpinorField psi = gaussian_spinor(g);
    std::array<Field, 4> omega{Field(g), Field(g), Field(g), Field(g)};
    auto r = derivative_initial_data(psi, Field(g), omega, 1.0);
    const Field d = dt_rho_s(psi, 1.0);
    EXPECT_LT(max_abs(r.rho_s - d), 1e-13);
}

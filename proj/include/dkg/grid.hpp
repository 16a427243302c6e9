#pragma once

// Periodic box [-L/2, L/2)^d with N points per axis and spectral operations.
//
// Normalization: forward_transform is the plain (unnormalized) DFT over grid
// indices, uhat[n] = sum_j u[j] exp(-2 pi i n.j / N). The continuum
// Fourier-series coefficient of u is uhat[n] / N^d. All norms are
// continuum-consistent: ||u||_{L^2}^2 = (L/N)^d sum_j |u[j]|^2 and
// ||u||_{H^s}^2 = (L/N)^d N^{-d} sum_n (1 + |k_n|^2)^s |uhat[n]|^2.

#include "dkg/errors.hpp"
#include "dkg/fft.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dkg {

using complex = std::complex<double>;
using Wavevector = std::array<double, 3>;

class TorusGrid {
public:
    TorusGrid(int dim, int points, double length)
        : dim_(dim), points_(points), length_(length) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1, 2 or 3");
        if (points < 8 || (points & (points - 1)) != 0)
            throw std::invalid_argument("points per axis must be a power of two >= 8");
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("box length must be positive");
        size_ = 1;
        for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(points);
    }

    int dim() const noexcept { return dim_; }
    int points() const noexcept { return points_; }
    double length() const noexcept { return length_; }
    std::size_t size() const noexcept { return size_; }
    double spacing() const noexcept { return length_ / points_; }
    double cell_volume() const noexcept { return std::pow(spacing(), dim_); }

    /// Signed mode number of index i along one axis, in [-N/2, N/2).
    int mode(int i) const noexcept { return i < points_ / 2 ? i : i - points_; }
    double wavenumber(int i) const noexcept {
        return 2.0 * std::numbers::pi * mode(i) / length_;
    }

    std::array<int, 3> unflatten(std::size_t idx) const noexcept {
        std::array<int, 3> out{0, 0, 0};
        for (int a = dim_ - 1; a >= 0; --a) {
            out[static_cast<std::size_t>(a)] = static_cast<int>(idx % static_cast<std::size_t>(points_));
            idx /= static_cast<std::size_t>(points_);
        }
        return out;
    }

    std::size_t flatten(const std::array<int, 3>& ix) const noexcept {
        std::size_t idx = 0;
        for (int a = 0; a < dim_; ++a)
            idx = idx * static_cast<std::size_t>(points_) + static_cast<std::size_t>(ix[static_cast<std::size_t>(a)]);
        return idx;
    }

    Wavevector wavevector(std::size_t idx) const noexcept {
        auto ix = unflatten(idx);
        Wavevector k{0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a)
            k[static_cast<std::size_t>(a)] = wavenumber(ix[static_cast<std::size_t>(a)]);
        return k;
    }

    double k_squared(std::size_t idx) const noexcept {
        auto k = wavevector(idx);
        return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    }

    /// Cell-centred coordinates are not used; point j sits at -L/2 + j L/N.
    std::array<double, 3> position(std::size_t idx) const noexcept {
        auto ix = unflatten(idx);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a)
            x[static_cast<std::size_t>(a)] = -0.5 * length_ + spacing() * ix[static_cast<std::size_t>(a)];
        return x;
    }

    bool operator==(const TorusGrid& o) const noexcept {
        return dim_ == o.dim_ && points_ == o.points_ && length_ == o.length_;
    }

private:
    int dim_;
    int points_;
    double length_;
    std::size_t size_;
};

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b)) throw GridMismatch("fields live on different grids");
}

/// Exponent of a Sobolev space H^s.
class SobolevIndex {
public:
    explicit SobolevIndex(double s) : s_(s) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("Sobolev index must be >= 0");
    }
    double value() const noexcept { return s_; }

private:
    double s_;
};

/// Complex scalar field sampled on a grid. Real-valued physical fields use
/// the same storage with zero imaginary parts (see make_real).
class Field {
public:
    explicit Field(TorusGrid grid) : grid_(grid), values_(grid.size()) {}
    Field(TorusGrid grid, std::vector<complex> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw GridMismatch("field length " + std::to_string(values_.size()) +
                               " does not match grid size " + std::to_string(grid_.size()));
    }

    template <std::invocable<const std::array<double, 3>&> F>
    static Field from_function(TorusGrid grid, F&& f) {
        Field u(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) u.values_[i] = f(grid.position(i));
        return u;
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::vector<complex>& values() noexcept { return values_; }
    const std::vector<complex>& values() const noexcept { return values_; }
    complex& operator[](std::size_t i) noexcept { return values_[i]; }
    const complex& operator[](std::size_t i) const noexcept { return values_[i]; }

    Field& operator+=(const Field& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(complex c) noexcept {
        for (auto& v : values_) v *= c;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(complex c, Field a) { return a *= c; }

    bool operator==(const Field& o) const { return grid_ == o.grid_ && values_ == o.values_; }

private:
    TorusGrid grid_;
    std::vector<complex> values_;
};

/// DFT coefficients of a Field, indexed like the grid (FFT ordering).
struct Spectrum {
    TorusGrid grid;
    std::vector<complex> coeffs;
};

inline Spectrum forward_transform(const Field& u) {
    Spectrum out{u.grid(), u.values()};
    fft::execute(out.coeffs, u.grid().dim(), u.grid().points(), fft::Direction::forward);
    return out;
}

inline Field inverse_transform(Spectrum spec) {
    if (spec.coeffs.size() != spec.grid.size()) throw GridMismatch("spectrum length does not match grid");
    fft::execute(spec.coeffs, spec.grid.dim(), spec.grid.points(), fft::Direction::backward);
    const double scale = 1.0 / static_cast<double>(spec.grid.size());
    for (auto& c : spec.coeffs) c *= scale;
    return Field(spec.grid, std::move(spec.coeffs));
}

/// Zero imaginary parts in place; used for fields that are real by construction.
inline Field& make_real(Field& u) noexcept {
    for (auto& v : u.values()) v = complex(v.real(), 0.0);
    return u;
}

/// Maximum that propagates NaN from either argument.
inline double nan_max(double a, double b) noexcept { return (std::isnan(a) || a >= b) ? a : b; }

/// Largest modulus; NaN if any entry is NaN.
inline double max_abs(const Field& u) noexcept {
    double m = 0.0;
    for (const auto& v : u.values()) m = nan_max(m, std::abs(v));
    return m;
}

inline double max_imag(const Field& u) noexcept {
    double m = 0.0;
    for (const auto& v : u.values()) m = nan_max(m, std::abs(v.imag()));
    return m;
}

/// Continuum L^2 inner product <a, b> = int conj(a) b dx (box quadrature).
inline complex l2_inner(const Field& a, const Field& b) {
    require_same_grid(a.grid(), b.grid());
    complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc * a.grid().cell_volume();
}

/// Box quadrature sum |u|^2 (L/N)^d.
inline double quadrature_norm_squared(const Field& u) noexcept {
    double acc = 0.0;
    for (const auto& v : u.values()) acc += std::norm(v);
    return acc * u.grid().cell_volume();
}

inline double sobolev_norm_squared(const Spectrum& spec, SobolevIndex s) {
    const auto& g = spec.grid;
    double acc = 0.0;
    const double sv = s.value();
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
        const double w = sv == 0.0 ? 1.0 : std::pow(1.0 + g.k_squared(i), sv);
        acc += w * std::norm(spec.coeffs[i]);
    }
    return acc * g.cell_volume() / static_cast<double>(g.size());
}

inline double sobolev_norm(const Spectrum& spec, SobolevIndex s) {
    return std::sqrt(sobolev_norm_squared(spec, s));
}

inline double sobolev_norm(const Field& u, SobolevIndex s) {
    return sobolev_norm(forward_transform(u), s);
}

template <typename F>
concept SpectralSymbol = std::invocable<F, const Wavevector&> &&
    std::convertible_to<std::invoke_result_t<F, const Wavevector&>, complex>;

/// Multiply spectral coefficients by symbol(k) in place.
template <SpectralSymbol F>
void apply_symbol(Spectrum& spec, F&& symbol) {
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
        const complex m = symbol(spec.grid.wavevector(i));
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
            throw std::domain_error("multiplier symbol is not finite on the grid");
        spec.coeffs[i] *= m;
    }
}

template <SpectralSymbol F>
Field apply_multiplier(const Field& u, F&& symbol) {
    Spectrum spec = forward_transform(u);
    apply_symbol(spec, std::forward<F>(symbol));
    return inverse_transform(std::move(spec));
}

/// Bessel potential (1 - Delta)^{s/2}.
inline Field bessel_potential(const Field& u, double s) {
    return apply_multiplier(u, [s](const Wavevector& k) {
        return complex(std::pow(1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2], 0.5 * s), 0.0);
    });
}

/// Spectral derivative along `axis` (0-based). The Nyquist mode is dropped
/// so that real input stays real.
inline Field gradient(const Field& u, int axis) {
    const auto& g = u.grid();
    Spectrum spec = forward_transform(u);
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
        const int ia = g.unflatten(i)[static_cast<std::size_t>(axis)];
        const double k = (2 * ia == g.points()) ? 0.0 : g.wavenumber(ia);
        spec.coeffs[i] *= complex(0.0, k);
    }
    return inverse_transform(std::move(spec));
}

/// True if the mode survives the 2/3 rule (|n| <= N/3 on every axis).
inline bool inside_dealias_band(const TorusGrid& g, std::size_t idx) noexcept {
    auto ix = g.unflatten(idx);
    for (int a = 0; a < g.dim(); ++a)
        if (3 * std::abs(g.mode(ix[static_cast<std::size_t>(a)])) > g.points()) return false;
    return true;
}

inline void dealias_spectrum(Spectrum& spec) noexcept {
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i)
        if (!inside_dealias_band(spec.grid, i)) spec.coeffs[i] = 0.0;
}

inline Field dealias(const Field& u) {
    Spectrum spec = forward_transform(u);
    dealias_spectrum(spec);
    return inverse_transform(std::move(spec));
}

/// Margin above sigma that keeps the synthesized field in H^sigma.
inline constexpr double rough_field_margin = 0.05;

/// Real random field whose Fourier-series coefficients have modulus
/// (1 + |k|^2)^{-(2 sigma + d + 2 eps)/4} and uniformly random phases.
/// It lies in H^s exactly for s < sigma + eps.
inline Field synthesize_rough_field(const TorusGrid& grid, double sigma, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw std::invalid_argument("rough field regularity must be positive");
    const double expo = -(2.0 * sigma + grid.dim() + 2.0 * rough_field_margin) / 4.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::bernoulli_distribution sign(0.5);

    const double total = static_cast<double>(grid.size());
    std::vector<complex> coeffs(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto ix = grid.unflatten(i);
        std::array<int, 3> neg{0, 0, 0};
        for (int a = 0; a < grid.dim(); ++a) {
            const auto au = static_cast<std::size_t>(a);
            neg[au] = (grid.points() - ix[au]) % grid.points();
        }
        const std::size_t partner = grid.flatten(neg);
        if (partner < i) continue;
        const double modulus = std::pow(1.0 + grid.k_squared(i), expo) * total;
        if (partner == i) {
            coeffs[i] = sign(rng) ? modulus : -modulus;
        } else {
            const complex c = std::polar(modulus, phase(rng));
            coeffs[i] = c;
            coeffs[partner] = std::conj(c);
        }
    }
    Field u = inverse_transform(Spectrum{grid, std::move(coeffs)});
    return make_real(u);
}

}  // namespace dkg

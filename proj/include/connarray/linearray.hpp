#pragma once

// Spectral model of an infinitely long wire with periodic delta-gap feeds:
// continuous admittance Y(alpha), its impulse response y(z), the
// Brillouin-zone admittance Y_d(alpha), the discrete impedance kernel
// z_d[m] and the open-circuited N-port Toeplitz matrix Z_T.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "medium.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace connarray {

struct LineGeometry {
    double wire_radius = 0.0;   // a, metres
    double feed_spacing = 0.0;  // Delta, metres
    int num_feeds = 1;          // N
    double loss_delta = 1e-4;

    void validate() const {
        if (!(wire_radius > 0.0)) throw std::invalid_argument("LineGeometry.wire_radius must be > 0");
        if (!(feed_spacing > wire_radius))
            throw std::invalid_argument("LineGeometry.feed_spacing must exceed wire_radius");
        if (num_feeds < 1) throw std::invalid_argument("LineGeometry.num_feeds must be >= 1");
        if (!(loss_delta >= 0.0) || loss_delta > 1e-2)
            throw std::invalid_argument("LineGeometry.loss_delta must lie in [0, 1e-2]");
    }

    /// Width of the Brillouin zone, 2 pi / Delta.
    double zone_width() const { return 2.0 * std::numbers::pi / feed_spacing; }

    /// Axial position of feed m; the array is centred on z = 0.
    double feed_position(int m) const { return (m - 0.5 * (num_feeds - 1)) * feed_spacing; }
};

/// Y(alpha) = (4k/Z0) / (beta^2 J0(beta a) H0^(2)(beta a)), siemens * metre.
inline cplx admittance_spectrum(double alpha, const LineGeometry& geom, const Medium& med) {
    if (!std::isfinite(alpha)) throw domain_error("admittance_spectrum: non-finite alpha");
    const cplx k = med.k();
    const cplx beta = specfun::beta_of_alpha(alpha, k);
    const cplx x = beta * geom.wire_radius;
    // J0(x) H0(x) = J0s(x) H0s(x) exp(|Im x| - j x), well scaled for Im x <= 0.
    const cplx jh = specfun::bessel_j_scaled(0, x) * specfun::hankel2_scaled(0, x) *
                    std::exp(cplx{std::abs(x.imag()) + x.imag(), -x.real()});
    const cplx denom = beta * beta * jh;
    if (!(std::abs(denom) >= 1e-300))
        throw singularity_error("admittance_spectrum: vanishing denominator at alpha = " + std::to_string(alpha));
    return 4.0 * k / (med.impedance() * denom);
}

/// Default spectral truncation: 100 Re(k).
inline double default_alpha_max(const Medium& med, double multiplier = 100.0) {
    return multiplier * med.k().real();
}

/// Default number of Brillouin images, ceil(alpha_max Delta / 2 pi).
/// Ratios that are integers up to rounding (100 k at Delta = 2 lambda) are
/// not bumped to the next image, so the count is the same at every
/// reference frequency.
inline int default_l_max(const LineGeometry& geom, double alpha_max) {
    const double x = alpha_max / geom.zone_width();
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) return std::max(1, static_cast<int>(nearest));
    return static_cast<int>(std::ceil(x));
}

/// Spectral window half-width matching a mode sum with the given l_max.
/// The discrete admittance keeps exactly the images inside
/// [-window, window], so the continuous route truncated at this width is
/// its Poisson-summation partner.
inline double window_half_width(const LineGeometry& geom, int l_max) {
    return (l_max + 0.5) * geom.zone_width();
}

namespace detail {

inline std::vector<double> branch_splits(const Medium& med, double upper) {
    std::vector<double> splits;
    const double kr = med.k().real();
    if (kr > 0.0 && kr < upper) splits.push_back(kr);
    return splits;
}

// Folds a symmetric [-A, A] spec onto [0, A] for even integrands.
inline quadrature::IntegrationSpec half_line_spec(const quadrature::IntegrationSpec& spec, const Medium& med,
                                                  double max_offset) {
    if (!(spec.upper > 0.0) || std::abs(spec.lower + spec.upper) > 1e-12 * spec.upper)
        throw std::invalid_argument("spectral integral: expected a symmetric interval [-alpha_max, alpha_max]");
    quadrature::IntegrationSpec half = spec;
    half.lower = 0.0;
    half.splits = branch_splits(med, spec.upper);
    for (double s : spec.splits)
        if (s > 0.0 && s < spec.upper && std::abs(s - med.k().real()) > 1e-12 * spec.upper) half.splits.push_back(s);
    std::sort(half.splits.begin(), half.splits.end());
    if (max_offset > 0.0) {
        const double seed = std::numbers::pi / max_offset;
        half.max_panel_length = half.max_panel_length > 0.0 ? std::min(half.max_panel_length, seed) : seed;
    }
    return half;
}

}  // namespace detail

/// Symmetric spectral integration spec [-alpha_max, alpha_max].
inline quadrature::IntegrationSpec spectral_spec(double alpha_max, double rel_tol = 1e-10, double abs_tol = 1e-300) {
    quadrature::IntegrationSpec s;
    s.lower = -alpha_max;
    s.upper = alpha_max;
    s.rel_tol = rel_tol;
    s.abs_tol = abs_tol;
    return s;
}

/// y(z) = (1/2 pi) int Y(alpha) e^{j alpha z} d alpha over [-alpha_max, alpha_max],
/// evaluated as (1/pi) int_0^alpha_max Y(alpha) cos(alpha z) d alpha with a
/// breakpoint at Re(k). Siemens per metre.
inline quadrature::IntegrationResult<cplx> admittance_impulse_response(double z, const LineGeometry& geom,
                                                                       const Medium& med,
                                                                       const quadrature::IntegrationSpec& spec) {
    const auto half = detail::half_line_spec(spec, med, std::abs(z));
    auto res = quadrature::integrate(
        [&](double a) { return admittance_spectrum(a, geom, med) * std::cos(a * z); }, half);
    res.value /= std::numbers::pi;
    res.error /= std::numbers::pi;
    return res;
}

/// Batched y(z_i) sharing one panel tree; the integrand is vector-valued.
inline quadrature::IntegrationResult<Eigen::VectorXcd> admittance_impulse_response(
    std::span<const double> zs, const LineGeometry& geom, const Medium& med, const quadrature::IntegrationSpec& spec) {
    double zmax = 0.0;
    for (double z : zs) zmax = std::max(zmax, std::abs(z));
    const auto half = detail::half_line_spec(spec, med, zmax);
    const Eigen::Map<const Eigen::VectorXd> zv(zs.data(), static_cast<Eigen::Index>(zs.size()));
    auto res = quadrature::integrate(
        [&](double a) -> Eigen::VectorXcd {
            return admittance_spectrum(a, geom, med) * (a * zv).array().cos().cast<cplx>().matrix();
        },
        half);
    res.value /= std::numbers::pi;
    res.error /= std::numbers::pi;
    return res;
}

/// Y_d(alpha) = (1/Delta) sum_l Y(alpha - 2 pi l / Delta), siemens.
///
/// alpha is first reduced into [0, 2 pi/Delta); the l_max images on each
/// side of the image nearest the origin are kept, i.e. exactly the images
/// in the window [-(l_max + 1/2), (l_max + 1/2)] * 2 pi / Delta. This makes
/// Y_d periodic and even in alpha by construction.
inline cplx discrete_admittance(double alpha, const LineGeometry& geom, const Medium& med,
                                const quadrature::TailSumSpec& tail) {
    const double period = geom.zone_width();
    double reduced = alpha - std::floor(alpha / period) * period;
    if (reduced >= period) reduced -= period;
    const int shift = reduced > 0.5 * period ? 1 : 0;
    const cplx sum = quadrature::mode_sum(
        [&](int l) { return admittance_spectrum(reduced - (l + shift) * period, geom, med); }, tail);
    return sum / geom.feed_spacing;
}

struct SpectralAdmittance {
    std::vector<double> alpha_grid;  // q * (2 pi / Delta) / M, q = 0..M-1
    std::vector<cplx> yd_samples;
    int l_max = 0;
};

struct DiscreteImpedance {
    std::vector<cplx> kernel;  // z_d[0..N-1], ohms
    double spacing = 0.0;
};

/// Default Brillouin sampling: max(1024, 64 N) rounded up to a power of two.
inline std::size_t default_grid_size(int num_feeds) {
    const std::size_t m = std::max<std::size_t>(1024, 64u * static_cast<std::size_t>(num_feeds));
    return std::bit_ceil(m);
}

inline SpectralAdmittance sample_brillouin_zone(const LineGeometry& geom, const Medium& med, std::size_t grid_size,
                                                const quadrature::TailSumSpec& tail) {
    if (grid_size == 0 || !std::has_single_bit(grid_size))
        throw std::invalid_argument("sample_brillouin_zone: grid size must be a power of two");
    SpectralAdmittance out;
    out.l_max = tail.l_max;
    out.alpha_grid.resize(grid_size);
    out.yd_samples.resize(grid_size);
    const double period = geom.zone_width();
    for (std::size_t q = 0; q < grid_size; ++q) {
        out.alpha_grid[q] = period * double(q) / double(grid_size);
        out.yd_samples[q] = discrete_admittance(out.alpha_grid[q], geom, med, tail);
    }
    return out;
}

/// z_d[m] for arbitrary integer lags m from the inverse DFT of 1/Y_d.
inline std::vector<cplx> impedance_lags(const SpectralAdmittance& zone, std::span<const long> lags) {
    const std::size_t grid = zone.yd_samples.size();
    std::vector<cplx> inv(grid);
    for (std::size_t q = 0; q < grid; ++q) {
        if (zone.yd_samples[q] == cplx{})
            throw singularity_error("impedance kernel: zero discrete admittance sample at q = " + std::to_string(q));
        inv[q] = 1.0 / zone.yd_samples[q];
    }
    const long M = static_cast<long>(grid);
    std::vector<cplx> out;
    out.reserve(lags.size());
    for (long m : lags) {
        const long mm = ((m % M) + M) % M;
        cplx acc{};
        for (long q = 0; q < M; ++q) {
            const long idx = (q * mm) % M;
            const double phase = 2.0 * std::numbers::pi * double(idx) / double(M);
            acc += inv[static_cast<std::size_t>(q)] * cplx{std::cos(phase), std::sin(phase)};
        }
        out.push_back(acc / double(M));
    }
    return out;
}

/// Z_d(alpha) = 1/Y_d(alpha) on the sampled zone, ohms.
inline std::vector<cplx> zone_impedance(const SpectralAdmittance& zone) {
    std::vector<cplx> out(zone.yd_samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / zone.yd_samples[i];
    return out;
}

inline DiscreteImpedance impedance_kernel(const SpectralAdmittance& zone, const LineGeometry& geom) {
    std::vector<long> lags(static_cast<std::size_t>(geom.num_feeds));
    for (int m = 0; m < geom.num_feeds; ++m) lags[static_cast<std::size_t>(m)] = m;
    return {impedance_lags(zone, lags), geom.feed_spacing};
}

/// z_d[m] = (Delta / 2 pi) int_0^{2 pi/Delta} e^{j alpha m Delta} / Y_d(alpha) d alpha
/// for m = 0..N-1, sampled on grid_size points of the Brillouin zone.
inline DiscreteImpedance impedance_kernel(const LineGeometry& geom, const Medium& med, std::size_t grid_size,
                                          const quadrature::TailSumSpec& tail) {
    if (grid_size < 64u * static_cast<std::size_t>(geom.num_feeds))
        throw std::invalid_argument("impedance_kernel: grid size must be at least 64 N");
    return impedance_kernel(sample_brillouin_zone(geom, med, grid_size, tail), geom);
}

/// Z_T[m, n] = z_d[|m - n|] (complex symmetric Toeplitz).
inline Eigen::MatrixXcd finite_array_impedance(const DiscreteImpedance& kernel, int n) {
    if (n < 1 || static_cast<std::size_t>(n) > kernel.kernel.size())
        throw std::invalid_argument("finite_array_impedance: kernel has fewer lags than ports");
    Eigen::MatrixXcd zt(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) zt(r, c) = kernel.kernel[static_cast<std::size_t>(std::abs(r - c))];
    return zt;
}

}  // namespace connarray

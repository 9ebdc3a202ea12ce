#pragma once

// Magnetic near field of the driven wire and the hybrid coupling to small
// loop receivers (magnetic Hertzian dipole or magnetic Chu antenna).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "linearray.hpp"
#include "medium.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace connarray {

enum class ReceiverKind { hertzian_loop, chu_loop };

struct ReceiverSpec {
    double r = 0.0;  // radial distance from the wire axis, metres
    double z = 0.0;  // axial position, metres
    ReceiverKind kind = ReceiverKind::chu_loop;
    double dipole_length = 0.0;  // delta-l
    double chu_radius = 0.0;     // a_Chu, used by chu_loop

    void validate(const LineGeometry& geom) const {
        if (!(r > geom.wire_radius)) throw std::invalid_argument("ReceiverSpec.r must exceed the wire radius");
        if (!std::isfinite(z)) throw std::invalid_argument("ReceiverSpec.z must be finite");
        if (!(dipole_length > 0.0)) throw std::invalid_argument("ReceiverSpec.dipole_length must be > 0");
        if (kind == ReceiverKind::chu_loop && !(chu_radius > 0.0))
            throw std::invalid_argument("ReceiverSpec.chu_radius must be > 0 for a Chu loop");
    }
};

struct FieldSample {
    cplx h_phi;  // A/m
    double r = 0.0;
    double z = 0.0;
    bool converged = true;
};

struct FieldNumerics {
    double alpha_max_multiplier = 100.0;
    double tail_bound = 1e-12;  // evanescent tail exp(-alpha_max (r - a)) left out
    double rel_tol = 1e-8;
    double abs_tol = 1e-300;
};

/// Spectral truncation for the field at radius r: the evanescent tail
/// bound sets the width, floored at alpha_max_multiplier * Re(k).
inline double field_alpha_max(double r, const LineGeometry& geom, const Medium& med, const FieldNumerics& num) {
    const double from_tail = -std::log(num.tail_bound) / (r - geom.wire_radius);
    return std::max(num.alpha_max_multiplier * med.k().real(), from_tail);
}

/// H_phi(r, alpha) = omega eps V(alpha) / (j beta) * H1^(2)(beta r) / H0^(2)(beta a).
///
/// This is -(1/mu) dA_z/dr of the vector-potential spectrum, since
/// d/dr H0^(2)(beta r) = -beta H1^(2)(beta r).
inline cplx h_phi_spectrum(double alpha, double r, cplx vhat, const LineGeometry& geom, const Medium& med) {
    if (!(r > geom.wire_radius)) throw std::invalid_argument("h_phi_spectrum: r must exceed the wire radius");
    if (vhat == cplx{}) return {};
    const cplx beta = specfun::beta_of_alpha(alpha, med.k());
    if (beta == cplx{}) throw singularity_error("h_phi_spectrum: beta = 0 (branch point on the real axis)");
    const cplx j{0.0, 1.0};
    const cplx ratio = specfun::hankel2_scaled(1, beta * r) / specfun::hankel2_scaled(0, beta * geom.wire_radius) *
                       std::exp(-j * beta * (r - geom.wire_radius));
    return med.omega() * med.permittivity() * vhat / (j * beta) * ratio;
}

/// Field of a unit voltage across a single gap at z = 0, sampled at axial
/// offsets `offsets` and radius r. Even in the offset.
inline quadrature::IntegrationResult<Eigen::VectorXcd> unit_gap_field(double r, std::span<const double> offsets,
                                                                      const LineGeometry& geom, const Medium& med,
                                                                      const FieldNumerics& num = {}) {
    const double amax = field_alpha_max(r, geom, med, num);
    double zmax = 0.0;
    for (double z : offsets) zmax = std::max(zmax, std::abs(z));
    const auto half = detail::half_line_spec(spectral_spec(amax, num.rel_tol, num.abs_tol), med, zmax);
    const Eigen::Map<const Eigen::VectorXd> zv(offsets.data(), static_cast<Eigen::Index>(offsets.size()));
    auto res = quadrature::integrate(
        [&](double a) -> Eigen::VectorXcd {
            return h_phi_spectrum(a, r, 1.0, geom, med) * (a * zv).array().cos().cast<cplx>().matrix();
        },
        half);
    res.value /= std::numbers::pi;
    res.error /= std::numbers::pi;
    return res;
}

/// H_phi(r, z) for feed voltages V_m at the array's feed positions:
/// (1/2 pi) int h_phi_spectrum(alpha, r, V(alpha)) e^{j alpha z} d alpha,
/// V(alpha) = sum_m V_m e^{-j alpha z_m}.
inline FieldSample h_phi_spatial(double r, double z, std::span<const cplx> feed_voltages, const LineGeometry& geom,
                                 const Medium& med, const FieldNumerics& num = {}) {
    if (!(r > geom.wire_radius)) throw std::invalid_argument("h_phi_spatial: r must exceed the wire radius");
    if (feed_voltages.size() != static_cast<std::size_t>(geom.num_feeds))
        throw dimension_error("h_phi_spatial: need one voltage per feed");
    bool all_zero = true;
    double reach = 0.0;
    for (std::size_t m = 0; m < feed_voltages.size(); ++m) {
        if (!std::isfinite(feed_voltages[m].real()) || !std::isfinite(feed_voltages[m].imag()))
            throw domain_error("h_phi_spatial: non-finite feed voltage");
        if (feed_voltages[m] != cplx{}) all_zero = false;
        reach = std::max(reach, std::abs(z - geom.feed_position(static_cast<int>(m))));
    }
    if (all_zero) return {cplx{}, r, z, true};

    const double amax = field_alpha_max(r, geom, med, num);
    const double kr = med.k().real();
    quadrature::IntegrationSpec spec = spectral_spec(amax, num.rel_tol, num.abs_tol);
    if (kr < amax) spec.splits = {-kr, 0.0, kr};
    else spec.splits = {0.0};
    if (reach > 0.0) spec.max_panel_length = std::numbers::pi / reach;
    const cplx j{0.0, 1.0};
    auto res = quadrature::integrate(
        [&](double a) {
            cplx vhat{};
            for (std::size_t m = 0; m < feed_voltages.size(); ++m)
                vhat += feed_voltages[m] * std::exp(-j * a * geom.feed_position(static_cast<int>(m)));
            return h_phi_spectrum(a, r, vhat, geom, med) * std::exp(j * a * z);
        },
        spec);
    return {res.value / (2.0 * std::numbers::pi), r, z, res.converged};
}

/// Radiation conductance of the magnetic Hertzian dipole, 2 pi dl^2 / (3 Z0 lambda^2).
inline double hertz_conductance(double dipole_length, const Medium& med) {
    const double lam = med.wavelength();
    return 2.0 * std::numbers::pi * dipole_length * dipole_length / (3.0 * med.impedance() * lam * lam);
}

/// Admittance of the magnetic (TE10) Chu antenna of radius a_Chu:
/// (1/Z0) (1/(j k a) + 1/(1 + j k a)).
inline cplx chu_admittance(double chu_radius, const Medium& med) {
    const cplx jka{0.0, med.k0() * chu_radius};
    return (1.0 / jka + 1.0 / (1.0 + jka)) / med.impedance();
}

/// sqrt(Re Y_Chu / Re Y_Hertz) for Chu loops, 1 for Hertzian loops.
inline double coupling_scale(const ReceiverSpec& rx, const Medium& med) {
    if (rx.kind == ReceiverKind::hertzian_loop) return 1.0;
    const double gchu = chu_admittance(rx.chu_radius, med).real();
    if (!(gchu > 0.0)) throw model_error("Chu admittance has non-positive real part");
    return std::sqrt(gchu / hertz_conductance(rx.dipole_length, med));
}

/// Receive-port admittance entering Y_R.
inline cplx receiver_admittance(const ReceiverSpec& rx, const Medium& med) {
    if (rx.kind == ReceiverKind::chu_loop) return chu_admittance(rx.chu_radius, med);
    return hertz_conductance(rx.dipole_length, med);
}

/// Hybrid coupling spectrum of a magnetic Hertzian probe:
/// dl * omega eps Z_d(alpha) / (j beta) * H1^(2)(beta r) / H0^(2)(beta a).
inline cplx hertz_coupling(double alpha, const ReceiverSpec& rx, cplx zd_alpha, const LineGeometry& geom,
                           const Medium& med) {
    if (rx.kind != ReceiverKind::hertzian_loop) throw std::invalid_argument("hertz_coupling: receiver is not a Hertzian loop");
    return rx.dipole_length * h_phi_spectrum(alpha, rx.r, zd_alpha, geom, med);
}

/// Current coupling of a magnetic Chu antenna; the Hertzian coupling
/// rescaled by sqrt(Re Y_Chu / Re Y_Hertz).
inline cplx chu_coupling(double alpha, const ReceiverSpec& rx, cplx zd_alpha, const LineGeometry& geom,
                         const Medium& med) {
    if (rx.kind != ReceiverKind::chu_loop) throw std::invalid_argument("chu_coupling: receiver is not a Chu loop");
    ReceiverSpec probe = rx;
    probe.kind = ReceiverKind::hertzian_loop;
    return coupling_scale(rx, med) * hertz_coupling(alpha, probe, zd_alpha, geom, med);
}

/// H_RT (M x N). Column n is the receive response to a unit current at
/// feed n with every other feed open: the feed voltages are v = Z_T e_n and
/// H_RT[u, n] = scale_u * dl_u * H_phi(r_u, z_u).
inline Eigen::MatrixXcd build_hrt(std::span<const ReceiverSpec> users, const LineGeometry& geom, const Medium& med,
                                  const Eigen::MatrixXcd& zt, const FieldNumerics& num = {},
                                  quadrature::AccuracyLog* log = nullptr) {
    const int n = geom.num_feeds;
    if (zt.rows() != n || zt.cols() != n) throw dimension_error("build_hrt: Z_T must be N x N");
    const auto m_users = static_cast<Eigen::Index>(users.size());
    for (const auto& u : users) u.validate(geom);

    // unit_field(u, m) = H_phi at user u from a unit voltage at feed m.
    Eigen::MatrixXcd unit_field(m_users, n);
    std::map<double, std::vector<Eigen::Index>> by_radius;
    for (Eigen::Index u = 0; u < m_users; ++u) by_radius[users[static_cast<std::size_t>(u)].r].push_back(u);
    for (const auto& [r, idx] : by_radius) {
        std::vector<double> offsets;
        for (Eigen::Index u : idx)
            for (int m = 0; m < n; ++m) offsets.push_back(users[static_cast<std::size_t>(u)].z - geom.feed_position(m));
        const auto res = unit_gap_field(r, offsets, geom, med, num);
        if (log) log->check(res, "unit_gap_field(r=" + std::to_string(r) + ")");
        std::size_t k = 0;
        for (Eigen::Index u : idx)
            for (int m = 0; m < n; ++m) unit_field(u, m) = res.value[static_cast<Eigen::Index>(k++)];
    }

    Eigen::MatrixXcd hrt = unit_field * zt;
    for (Eigen::Index u = 0; u < m_users; ++u) {
        const auto& rx = users[static_cast<std::size_t>(u)];
        hrt.row(u) *= coupling_scale(rx, med) * rx.dipole_length;
    }
    return hrt;
}

inline Eigen::MatrixXcd build_hrt(std::span<const ReceiverSpec> users, const LineGeometry& geom, const Medium& med,
                                  const DiscreteImpedance& kernel, const FieldNumerics& num = {},
                                  quadrature::AccuracyLog* log = nullptr) {
    return build_hrt(users, geom, med, finite_array_impedance(kernel, geom.num_feeds), num, log);
}

}  // namespace connarray

#pragma once

// Cylinder functions of complex argument for orders 0 and 1.
//
// Regimes:
//   |z| <= 12                 ascending series for J and Y
//   |z| <= 12, |Im z| > 2     H^(2) through K_n(jz) (Steed continued fraction)
//   |z| >  12                 Hankel asymptotic expansions
//   z = -j w, w > 0           real I_n / K_n kernels
//
// The "scaled" variants remove the exponential factor so that ratios of
// Hankel functions at large evanescent arguments stay representable:
//   bessel_j_scaled(n, z) = J_n(z) * exp(-|Im z|)
//   hankel2_scaled(n, z)  = H_n^(2)(z) * exp(j z)

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "errors.hpp"

namespace connarray::specfun {

using cplx = std::complex<double>;

inline constexpr double series_radius = 12.0;
inline constexpr double validated_radius = 1e4;

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double eps = std::numeric_limits<double>::epsilon();
inline constexpr cplx j{0.0, 1.0};

inline void check_finite(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw domain_error("cylinder function: non-finite argument");
}

inline void check_order(int n) {
    if (n != 0 && n != 1)
        throw domain_error("cylinder function: order " + std::to_string(n) + " not in {0, 1}");
}

template <class T>
struct Pair {
    T first;
    T second;
};

// J0, J1 (or I0, I1 when sign = +1) by ascending series.
template <class T>
Pair<T> ascending_series(T z, double sign) {
    const T q = sign * z * z / 4.0;
    T t0{1.0};
    T t1{1.0};
    T s0 = t0;
    T s1 = t1;
    double peak = 1.0;
    for (int m = 1; m < 300; ++m) {
        t0 *= q / (double(m) * double(m));
        t1 *= q / (double(m) * double(m + 1));
        s0 += t0;
        s1 += t1;
        peak = std::max(peak, std::abs(t0));
        if (std::abs(t0) < 1e-18 * peak && std::abs(t1) < 1e-18 * peak) break;
    }
    return {s0, s1 * z / 2.0};
}

// Y0, Y1 from the ascending series; J supplied by the caller.
inline Pair<cplx> neumann_series(cplx z, Pair<cplx> jj) {
    using std::numbers::pi;
    const cplx q = -z * z / 4.0;
    const cplx lg = std::log(z / 2.0);

    // sum0 = sum_k H_k q^k / (k!)^2, sum1 = sum_k (psi(k+1)+psi(k+2)) q^k / (k!(k+1)!)
    cplx t0{1.0};
    cplx t1{1.0};
    double harm = 0.0;
    cplx sum0{0.0};
    cplx sum1 = (-2.0 * euler_gamma + 1.0) * t1;
    double peak = 1.0;
    for (int k = 1; k < 300; ++k) {
        t0 *= q / (double(k) * double(k));
        t1 *= q / (double(k) * double(k + 1));
        harm += 1.0 / k;
        const double harm_next = harm + 1.0 / (k + 1);
        sum0 += harm * t0;
        sum1 += (-2.0 * euler_gamma + harm + harm_next) * t1;
        peak = std::max(peak, std::abs(t0) * (harm + 1.0));
        if (std::abs(t0) * harm_next < 1e-18 * peak && std::abs(t1) * harm_next < 1e-18 * peak) break;
    }
    const cplx y0 = (2.0 / pi) * ((lg + euler_gamma) * jj.first - sum0);
    const cplx y1 = -2.0 / (pi * z) + (2.0 / pi) * lg * jj.second - (z / (2.0 * pi)) * sum1;
    return {y0, y1};
}

// Asymptotic sum sum_k (s j)^k a_k(nu) / z^k with s = +1 for H^(1), -1 for H^(2).
inline cplx hankel_asymptotic_sum(int n, cplx z, double s) {
    const double mu = 4.0 * n * n;
    cplx term{1.0};
    cplx sum{1.0};
    double last = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (s * j) * (mu - odd * odd) / (8.0 * k * z);
        const double mag = std::abs(term);
        if (mag > last) break;  // divergent tail of the asymptotic series
        sum += term;
        last = mag;
        if (mag < 0.5 * eps * std::abs(sum)) break;
    }
    return sum;
}

// H_n^(2)(z) e^{jz}
inline cplx hankel2_asymptotic_scaled(int n, cplx z) {
    using std::numbers::pi;
    const cplx phase = std::exp(j * (n * pi / 2.0 + pi / 4.0));
    return std::sqrt(2.0 / (pi * z)) * phase * hankel_asymptotic_sum(n, z, -1.0);
}

// H_n^(1)(z) e^{-jz}
inline cplx hankel1_asymptotic_scaled(int n, cplx z) {
    using std::numbers::pi;
    const cplx phase = std::exp(-j * (n * pi / 2.0 + pi / 4.0));
    return std::sqrt(2.0 / (pi * z)) * phase * hankel_asymptotic_sum(n, z, 1.0);
}

// e^{x} K0(x), e^{x} K1(x) for Re x > 0. T is double or std::complex<double>.
template <class T>
Pair<T> bessel_k_scaled(T x) {
    using std::numbers::pi;
    if (std::abs(x) <= 2.0) {
        const auto ii = ascending_series(x, +1.0);
        const T q = x * x / 4.0;
        T t0{1.0};
        T t1{1.0};
        double harm = 0.0;
        T sum0{0.0};
        T sum1 = (-2.0 * euler_gamma + 1.0) * t1;
        for (int k = 1; k < 100; ++k) {
            t0 *= q / (double(k) * double(k));
            t1 *= q / (double(k) * double(k + 1));
            harm += 1.0 / k;
            sum0 += harm * t0;
            sum1 += (-2.0 * euler_gamma + harm + harm + 1.0 / (k + 1)) * t1;
            if (std::abs(t0) < 1e-18) break;
        }
        const T lg = std::log(x / 2.0);
        const T k0 = -(lg + euler_gamma) * ii.first + sum0;
        const T k1 = 1.0 / x + lg * ii.second - (x / 4.0) * sum1;
        const T scale = std::exp(x);
        return {k0 * scale, k1 * scale};
    }
    // Steed's algorithm for the Temme continued fraction CF2, order 0.
    T b = 2.0 * (1.0 + x);
    T d = 1.0 / b;
    T h = d;
    T delh = d;
    T q1{0.0};
    T q2{1.0};
    const double a1 = 0.25;
    T q{a1};
    T c{a1};
    double a = -a1;
    T s = 1.0 + q * delh;
    for (int i = 1; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const T qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const T dels = q * delh;
        s += dels;
        if (std::abs(dels) < eps * std::abs(s)) break;
    }
    h = a1 * h;
    const T k0 = std::sqrt(pi / (2.0 * x)) / s;
    const T k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

// e^{-x} I0(x), e^{-x} I1(x) for real x >= 0.
inline Pair<double> bessel_i_scaled(double x) {
    using std::numbers::pi;
    if (x <= 25.0) {
        const auto ii = ascending_series(x, +1.0);
        const double scale = std::exp(-x);
        return {ii.first * scale, ii.second * scale};
    }
    auto tail = [x](int n) {
        const double mu = 4.0 * n * n;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 60; ++k) {
            const double odd = 2.0 * k - 1.0;
            term *= -(mu - odd * odd) / (8.0 * k * x);
            sum += term;
            if (std::abs(term) < 0.5 * eps * std::abs(sum)) break;
        }
        return sum / std::sqrt(2.0 * pi * x);
    };
    return {tail(0), tail(1)};
}

inline bool on_negative_imaginary_ray(cplx z) { return z.real() == 0.0 && z.imag() < 0.0; }

// H_n^(2)(z) e^{jz} without the evanescent fast path.
inline cplx hankel2_general_scaled(int n, cplx z) {
    using std::numbers::pi;
    const double r = std::abs(z);
    if (r > series_radius) return hankel2_asymptotic_scaled(n, z);
    if (std::abs(z.imag()) > 2.0 && z.imag() < 0.0) {
        // H_n^(2)(z) = (2/pi) j^{n+1} K_n(jz); e^{jz} K_n(jz) is the scaled K.
        const auto kk = bessel_k_scaled(j * z);
        const cplx kn = n == 0 ? kk.first : kk.second;
        const cplx jpow = n == 0 ? j : cplx{-1.0, 0.0};
        return (2.0 / pi) * jpow * kn;
    }
    const auto jj = ascending_series(z, -1.0);
    const auto yy = neumann_series(z, jj);
    const cplx h = n == 0 ? jj.first - j * yy.first : jj.second - j * yy.second;
    return h * std::exp(j * z);
}

inline cplx bessel_j_general_scaled(int n, cplx z) {
    const double r = std::abs(z);
    const double y = z.imag();
    if (r <= series_radius) {
        const auto jj = ascending_series(z, -1.0);
        return (n == 0 ? jj.first : jj.second) * std::exp(-std::abs(y));
    }
    // J = (H1 + H2) / 2 with each Hankel carried in scaled form.
    const cplx h1 = hankel1_asymptotic_scaled(n, z) * std::exp(j * z.real() - y - std::abs(y));
    const cplx h2 = hankel2_asymptotic_scaled(n, z) * std::exp(-j * z.real() + y - std::abs(y));
    return 0.5 * (h1 + h2);
}

}  // namespace detail

/// J_n(z) exp(-|Im z|), n in {0, 1}.
inline cplx bessel_j_scaled(int n, cplx z) {
    detail::check_order(n);
    detail::check_finite(z);
    if (z == cplx{}) return n == 0 ? 1.0 : 0.0;
    // J is entire with J_n(-z) = (-1)^n J_n(z); evaluate in the right half plane.
    if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() > 0.0)) {
        const cplx v = bessel_j_scaled(n, -z);
        return n == 0 ? v : -v;
    }
    if (detail::on_negative_imaginary_ray(z)) {
        const auto ii = detail::bessel_i_scaled(-z.imag());
        // J0(-jw) = I0(w), J1(-jw) = -j I1(w)
        return n == 0 ? cplx{ii.first} : -detail::j * ii.second;
    }
    return detail::bessel_j_general_scaled(n, z);
}

/// Bessel function of the first kind J_n(z), n in {0, 1}.
inline cplx bessel_j(int n, cplx z) {
    return bessel_j_scaled(n, z) * std::exp(std::abs(z.imag()));
}

/// H_n^(2)(z) exp(j z), n in {0, 1}. Throws singularity_error at z = 0.
inline cplx hankel2_scaled(int n, cplx z) {
    using std::numbers::pi;
    detail::check_order(n);
    detail::check_finite(z);
    if (z == cplx{}) throw singularity_error("hankel2: logarithmic singularity at z = 0");
    if (detail::on_negative_imaginary_ray(z)) {
        const auto kk = detail::bessel_k_scaled(-z.imag());
        // H0^(2)(-jw) = (2j/pi) K0(w), H1^(2)(-jw) = -(2/pi) K1(w)
        return n == 0 ? detail::j * (2.0 / pi) * kk.first : cplx{-(2.0 / pi) * kk.second};
    }
    return detail::hankel2_general_scaled(n, z);
}

/// Hankel function of the second kind H_n^(2)(z) = J_n(z) - j Y_n(z).
inline cplx hankel2(int n, cplx z) {
    return hankel2_scaled(n, z) * std::exp(-detail::j * z);
}

/// Bessel function of the second kind Y_n(z), n in {0, 1}.
inline cplx bessel_y(int n, cplx z) {
    using namespace detail;
    check_order(n);
    check_finite(z);
    if (z == cplx{}) throw singularity_error("bessel_y: logarithmic singularity at z = 0");
    if (std::abs(z) <= series_radius && !(std::abs(z.imag()) > 2.0 && z.imag() < 0.0)) {
        const auto jj = ascending_series(z, -1.0);
        const auto yy = neumann_series(z, jj);
        return n == 0 ? yy.first : yy.second;
    }
    // Y = j (H2 - J)
    return j * (hankel2(n, z) - bessel_j(n, z));
}

/// Radial wavenumber sqrt(k^2 - alpha^2) on the branch with Im <= 0.
inline cplx beta_of_alpha(cplx alpha, cplx k) {
    cplx b = std::sqrt(k * k - alpha * alpha);
    if (b.imag() > 0.0) b = -b;
    return b;
}

}  // namespace connarray::specfun

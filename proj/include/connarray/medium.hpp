#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace connarray {

using cplx = std::complex<double>;

namespace constants {
inline constexpr double c0 = 299792458.0;         // m/s
inline constexpr double mu0 = 1.25663706212e-6;   // H/m
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
inline constexpr double boltzmann = 1.380649e-23;  // J/K
}  // namespace constants

/// Homogeneous free-space medium at one frequency. The wavenumber carries
/// a small loss, k = (2 pi / lambda)(1 - j loss_delta), which moves the
/// branch points alpha = +-k off the real axis.
class Medium {
public:
    explicit Medium(double frequency_hz, double loss_delta = 0.0)
        : frequency_(frequency_hz), loss_(loss_delta) {
        if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz))
            throw std::invalid_argument("Medium: frequency must be positive and finite");
        if (!(loss_delta >= 0.0) || loss_delta > 1e-2)
            throw std::invalid_argument("Medium: loss_delta must lie in [0, 1e-2]");
    }

    double frequency() const noexcept { return frequency_; }
    double loss_delta() const noexcept { return loss_; }
    double permittivity() const noexcept { return constants::eps0; }
    double permeability() const noexcept { return constants::mu0; }
    double omega() const noexcept { return 2.0 * std::numbers::pi * frequency_; }
    double wavelength() const noexcept { return constants::c0 / frequency_; }
    double impedance() const noexcept { return std::sqrt(permeability() / permittivity()); }

    /// Lossless wavenumber 2 pi / lambda.
    double k0() const noexcept { return 2.0 * std::numbers::pi / wavelength(); }
    /// Regularized complex wavenumber.
    cplx k() const noexcept { return k0() * cplx{1.0, -loss_}; }

private:
    double frequency_;
    double loss_;
};

}  // namespace connarray

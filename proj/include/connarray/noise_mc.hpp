#pragma once

// Monte-Carlo check of the output noise correlation: circular Gaussian
// noise sources are pushed through the terminated circuit and the sample
// covariance of the LNA output currents is compared with R_n.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "errors.hpp"
#include "multiport.hpp"

namespace connarray {

namespace detail {

/// Square-root factor L with L L^H = cov for a real symmetric PSD matrix.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, const char* what) {
    if (cov.size() == 0) return cov;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double scale = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) throw model_error(what);
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lam.asDiagonal();
}

inline Eigen::VectorXcd circular_gaussian(const Eigen::MatrixXd& factor, std::mt19937_64& rng,
                                          std::normal_distribution<double>& normal) {
    Eigen::VectorXcd w(factor.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        w[i] = cplx{re, im} * std::sqrt(0.5);
    }
    return factor.cast<cplx>() * w;
}

}  // namespace detail

struct NoiseCheck {
    Eigen::MatrixXcd empirical;  // sample covariance of i_L
    Eigen::MatrixXcd expected;   // R_n from end_to_end
    double max_z = 0.0;          // largest |empirical - expected| / sigma over real and imaginary parts
    std::size_t draws = 0;
};

/// Draws `draws` noise realizations (v_NT, i_NR, i_LNA independent, with the
/// covariances of noise_covariances) through direct_circuit_oracle with
/// zero generator voltage and compares the sample covariance with R_n.
/// sigma is the per-entry Monte-Carlo standard error estimated from the
/// same samples.
inline NoiseCheck noise_monte_carlo(const MultiportModel& model, const AmplifierChain& chain, std::size_t draws,
                                    std::uint64_t seed) {
    if (draws < 2) throw std::invalid_argument("noise_monte_carlo: need at least two draws");
    const NoiseCovariances cov = noise_covariances(model, chain);
    const Eigen::MatrixXd lt = detail::psd_factor(cov.v_nt, "noise_monte_carlo: Re{Z_T} is not PSD");
    const Eigen::MatrixXd lr = detail::psd_factor(cov.i_nr, "noise_monte_carlo: Re{Y_R} is not PSD");
    const Eigen::Index n = model.transmitters();
    const Eigen::Index m = model.receivers();
    const Eigen::MatrixXd ll = Eigen::MatrixXd::Identity(m, m) * std::sqrt(cov.i_lna);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::VectorXcd v_g = Eigen::VectorXcd::Zero(n);

    // Running sums of the outer products and of their squared parts.
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd sq_im = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t d = 0; d < draws; ++d) {
        NoiseSources src{detail::circular_gaussian(lt, rng, normal), detail::circular_gaussian(lr, rng, normal),
                         detail::circular_gaussian(ll, rng, normal)};
        const Eigen::VectorXcd i_l = direct_circuit_oracle(model, chain, v_g, src);
        const Eigen::MatrixXcd outer = i_l * i_l.adjoint();
        sum += outer;
        sq_re += outer.real().cwiseAbs2();
        sq_im += outer.imag().cwiseAbs2();
    }

    NoiseCheck out;
    out.draws = draws;
    const double nd = double(draws);
    out.empirical = sum / nd;
    out.expected = end_to_end(model, chain).rn;
    for (Eigen::Index p = 0; p < m; ++p) {
        for (Eigen::Index q = 0; q < m; ++q) {
            const double mean_re = out.empirical(p, q).real();
            const double mean_im = out.empirical(p, q).imag();
            const double sd_re = std::sqrt(std::max(sq_re(p, q) / nd - mean_re * mean_re, 0.0) / nd);
            const double sd_im = std::sqrt(std::max(sq_im(p, q) / nd - mean_im * mean_im, 0.0) / nd);
            const cplx diff = out.empirical(p, q) - out.expected(p, q);
            if (sd_re > 0.0) out.max_z = std::max(out.max_z, std::abs(diff.real()) / sd_re);
            if (sd_im > 0.0) out.max_z = std::max(out.max_z, std::abs(diff.imag()) / sd_im);
        }
    }
    return out;
}

}  // namespace connarray

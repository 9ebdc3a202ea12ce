#pragma once

// Transmit Wiener (LMMSE) precoding and achievable rates on whitened
// multiport channels.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "multiport.hpp"

namespace connarray {

/// Sum of squared generator-voltage magnitudes available to the precoder, V^2.
struct PowerBudget {
    double total_generator_power = 1.0;

    void validate() const {
        if (!(total_generator_power > 0.0) || !std::isfinite(total_generator_power))
            throw std::invalid_argument("PowerBudget.total_generator_power must be positive and finite");
    }
};

/// R_n^{-1/2} by Hermitian eigendecomposition; eigenvalues are floored
/// at 1e-15 * trace.
inline Eigen::MatrixXcd whitening_matrix(const Eigen::MatrixXcd& rn) {
    const double trace = rn.trace().real();
    if (!(trace > 0.0) || !std::isfinite(trace)) throw singular_matrix_error("whitening_matrix: noise correlation has no power", INFINITY);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rn);
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(1e-15 * trace);
    return eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
}

/// Single-receiver spectral efficiency with maximum-ratio generator
/// voltages: log2(1 + P ||h||^2 / R_n).
inline double spectral_efficiency_point(const ChannelRealization& chan, const PowerBudget& budget) {
    budget.validate();
    if (chan.h.rows() != 1 || chan.rn.rows() != 1) throw dimension_error("spectral_efficiency_point: expects a single receiver");
    const double gain = chan.h.row(0).squaredNorm();
    if (gain == 0.0) return 0.0;
    const double noise = chan.rn(0, 0).real();
    if (!(noise > 0.0)) throw singular_matrix_error("spectral_efficiency_point: zero noise power", INFINITY);
    return std::log2(1.0 + budget.total_generator_power * gain / noise);
}

struct Precoder {
    Eigen::MatrixXcd p;  // N x M generator voltages per unit-variance symbol
    double c = 0.0;      // power scaling; the receivers apply 1/c
};

/// Transmit Wiener filter on the whitened channel H_w = R_n^{-1/2} H:
/// P = c (H_w^H H_w + (M / P_tot) I)^{-1} H_w^H, tr(P P^H) = P_tot.
inline Precoder lmmse_precoder(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& rn, const PowerBudget& budget) {
    budget.validate();
    if (rn.rows() != h.rows() || rn.cols() != h.rows()) throw dimension_error("lmmse_precoder: R_n must be M x M");
    const Eigen::MatrixXcd hw = whitening_matrix(rn) * h;
    const Eigen::Index n = h.cols();
    const double xi = double(h.rows()) / budget.total_generator_power;
    Eigen::MatrixXcd gram = hw.adjoint() * hw;
    gram.diagonal().array() += xi;
    const Eigen::MatrixXcd shape = gram.ldlt().solve(hw.adjoint());
    const double norm2 = shape.squaredNorm();
    if (norm2 == 0.0) return {Eigen::MatrixXcd::Zero(n, h.rows()), 0.0};
    const double c = std::sqrt(budget.total_generator_power / norm2);
    return {c * shape, c};
}

/// Sum-MSE E||s - g (H_w P s + n)||^2 for unit-variance symbols and
/// whitened noise, at the best common receive scalar g.
inline double sum_mse(const Eigen::MatrixXcd& hw, const Eigen::MatrixXcd& p) {
    const Eigen::MatrixXcd a = hw * p;
    const double m = double(a.rows());
    const cplx tr = a.trace();
    return m - std::norm(tr) / (a.squaredNorm() + m);
}

struct RateResult {
    std::vector<double> per_user_rate;  // bits/s/Hz
    std::vector<double> sinr;
    Eigen::MatrixXcd precoder;
};

/// Per-user SINR and rate with G = R_n^{-1/2} H P:
/// sinr_u = |G_uu|^2 / (sum_{j != u} |G_uj|^2 + 1).
inline RateResult per_user_rates(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& rn, const Eigen::MatrixXcd& precoder,
                                 double c) {
    if (precoder.rows() != h.cols() || precoder.cols() != h.rows())
        throw dimension_error("per_user_rates: precoder must be N x M");
    if (rn.rows() != h.rows() || rn.cols() != h.rows()) throw dimension_error("per_user_rates: R_n must be M x M");
    (void)c;  // a common receive scalar cancels in every SINR
    const Eigen::MatrixXcd g = whitening_matrix(rn) * h * precoder;
    RateResult out;
    out.precoder = precoder;
    for (Eigen::Index u = 0; u < g.rows(); ++u) {
        const double signal = std::norm(g(u, u));
        const double interference = g.row(u).squaredNorm() - signal;
        const double s = signal / (interference + 1.0);
        out.sinr.push_back(s);
        out.per_user_rate.push_back(std::log2(1.0 + s));
    }
    return out;
}

}  // namespace connarray

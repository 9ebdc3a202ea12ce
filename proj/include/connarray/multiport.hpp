#pragma once

// Multiport MIMO circuit: hybrid matrix G_MIMO = [Z_T H_TR; H_RT Y_R],
// generator/LNA terminations, the block inverse K_MIMO, the end-to-end
// channel H and the output noise correlation R_n.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"
#include "medium.hpp"

namespace connarray {

struct AmplifierChain {
    double source_resistance = 50.0;     // R
    double lna_input_resistance = 50.0;  // R_in
    double lna_gain_beta = 10.0;
    double noise_figure = 2.0;           // N_f, linear
    double temperature = 290.0;          // K
    double boltzmann = constants::boltzmann;

    void validate() const {
        if (!(source_resistance > 0.0)) throw std::invalid_argument("AmplifierChain.source_resistance must be > 0");
        if (!(lna_input_resistance > 0.0)) throw std::invalid_argument("AmplifierChain.lna_input_resistance must be > 0");
        if (!(lna_gain_beta > 0.0)) throw std::invalid_argument("AmplifierChain.lna_gain_beta must be > 0");
        if (!(noise_figure >= 1.0)) throw std::invalid_argument("AmplifierChain.noise_figure must be >= 1");
        if (!(temperature > 0.0)) throw std::invalid_argument("AmplifierChain.temperature must be > 0");
        if (!(boltzmann > 0.0)) throw std::invalid_argument("AmplifierChain.boltzmann must be > 0");
    }

    /// 4 k_b T, the thermal noise density scale per unit bandwidth.
    double thermal() const { return 4.0 * boltzmann * temperature; }
};

struct MultiportModel {
    Eigen::MatrixXcd zt;   // N x N
    Eigen::MatrixXcd yr;   // M x M
    Eigen::MatrixXcd htr;  // N x M
    Eigen::MatrixXcd hrt;  // M x N

    Eigen::Index transmitters() const { return zt.rows(); }
    Eigen::Index receivers() const { return yr.rows(); }
};

/// Builds G_MIMO with the reciprocal fill-in H_TR = -H_RT^T.
inline MultiportModel assemble_gmimo(const Eigen::MatrixXcd& zt, const Eigen::MatrixXcd& yr, const Eigen::MatrixXcd& hrt) {
    if (zt.rows() != zt.cols()) throw dimension_error("assemble_gmimo: Z_T must be square");
    if (yr.rows() != yr.cols()) throw dimension_error("assemble_gmimo: Y_R must be square");
    if (hrt.rows() != yr.rows() || hrt.cols() != zt.rows())
        throw dimension_error("assemble_gmimo: H_RT must be M x N");
    const double zscale = std::max(1.0, zt.cwiseAbs().maxCoeff());
    if ((zt - zt.transpose()).cwiseAbs().maxCoeff() > 1e-12 * zscale)
        throw model_error("assemble_gmimo: Z_T is not complex symmetric");
    const double yscale = std::max(1e-300, yr.cwiseAbs().maxCoeff());
    Eigen::MatrixXcd off = yr;
    off.diagonal().setZero();
    if (off.size() > 0 && off.cwiseAbs().maxCoeff() > 1e-15 * yscale)
        throw model_error("assemble_gmimo: Y_R must be diagonal");
    return {zt, yr, -hrt.transpose(), hrt};
}

/// F_MIMO = G_MIMO + diag(R I_N, I_M / R_in).
inline Eigen::MatrixXcd terminated_matrix(const MultiportModel& model, const AmplifierChain& chain) {
    const Eigen::Index n = model.transmitters();
    const Eigen::Index m = model.receivers();
    Eigen::MatrixXcd f(n + m, n + m);
    f.topLeftCorner(n, n) = model.zt;
    f.topLeftCorner(n, n).diagonal().array() += chain.source_resistance;
    f.topRightCorner(n, m) = model.htr;
    f.bottomLeftCorner(m, n) = model.hrt;
    f.bottomRightCorner(m, m) = model.yr;
    f.bottomRightCorner(m, m).diagonal().array() += 1.0 / chain.lna_input_resistance;
    return f;
}

struct KBlocks {
    Eigen::MatrixXcd q;    // Schur-complement inverse, equals kt
    Eigen::MatrixXcd kt;   // N x N
    Eigen::MatrixXcd ktr;  // N x M
    Eigen::MatrixXcd krt;  // M x N
    Eigen::MatrixXcd kr;   // M x M

    Eigen::MatrixXcd assembled() const {
        Eigen::MatrixXcd k(kt.rows() + kr.rows(), kt.cols() + kr.cols());
        k << kt, ktr, krt, kr;
        return k;
    }
};

namespace detail {

inline constexpr double max_condition = 1e12;

inline Eigen::PartialPivLU<Eigen::MatrixXcd> checked_lu(const Eigen::MatrixXcd& a, const char* what) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1.0 / max_condition)) throw singular_matrix_error(what, rc > 0.0 ? 1.0 / rc : INFINITY);
    return lu;
}

}  // namespace detail

/// Block inverse K_MIMO = F_MIMO^{-1} through the Schur complement
/// Q = (Z_T + R I - H_TR A^{-1} H_RT)^{-1}, A = Y_R + I / R_in.
inline KBlocks block_inverse(const MultiportModel& model, const AmplifierChain& chain) {
    chain.validate();
    Eigen::MatrixXcd a = model.yr;
    a.diagonal().array() += 1.0 / chain.lna_input_resistance;
    const auto a_lu = detail::checked_lu(a, "block_inverse: Y_R + I/R_in is ill-conditioned");
    const Eigen::MatrixXcd a_inv = a_lu.inverse();

    Eigen::MatrixXcd schur = model.zt - model.htr * a_inv * model.hrt;
    schur.diagonal().array() += chain.source_resistance;
    const auto s_lu = detail::checked_lu(schur, "block_inverse: Schur complement is ill-conditioned");

    KBlocks k;
    k.q = s_lu.inverse();
    k.kt = k.q;
    k.ktr = -k.q * model.htr * a_inv;
    k.krt = -a_inv * model.hrt * k.q;
    k.kr = a_inv + a_inv * model.hrt * k.q * model.htr * a_inv;
    return k;
}

struct ChannelRealization {
    Eigen::MatrixXcd h;    // M x N, A/V
    Eigen::MatrixXcd rn;   // M x M, A^2 per Hz
    double asymmetry = 0.0;  // ||R - R^H|| / ||R|| before symmetrization
};

/// H = (beta / R_in) K_RT and the five-term noise correlation
/// R_n = (4 k T beta^2 / R_in^2) [ (N_f - 1) R_in / beta I
///        + K_RT Re{Z_T} K_RT^H + K_RT Re{H_TR} K_R^H
///        + K_R Re{H_RT} K_RT^H + K_R Re{Y_R} K_R^H ],
/// returned symmetrized as (R_n + R_n^H) / 2.
inline ChannelRealization end_to_end(const MultiportModel& model, const AmplifierChain& chain) {
    const KBlocks k = block_inverse(model, chain);
    const double beta = chain.lna_gain_beta;
    const double rin = chain.lna_input_resistance;
    const Eigen::Index m = model.receivers();

    ChannelRealization out;
    out.h = (beta / rin) * k.krt;

    Eigen::MatrixXcd bracket = Eigen::MatrixXcd::Identity(m, m) * ((chain.noise_figure - 1.0) * rin / beta);
    bracket += k.krt * model.zt.real().cast<cplx>() * k.krt.adjoint();
    bracket += k.krt * model.htr.real().cast<cplx>() * k.kr.adjoint();
    bracket += k.kr * model.hrt.real().cast<cplx>() * k.krt.adjoint();
    bracket += k.kr * model.yr.real().cast<cplx>() * k.kr.adjoint();
    const Eigen::MatrixXcd rn = (chain.thermal() * beta * beta / (rin * rin)) * bracket;

    const double norm = rn.norm();
    out.asymmetry = norm > 0.0 ? (rn - rn.adjoint()).norm() / norm : 0.0;
    out.rn = 0.5 * (rn + rn.adjoint());

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(out.rn, Eigen::EigenvaluesOnly);
    const double trace = out.rn.trace().real();
    if (eig.eigenvalues().minCoeff() < -1e-9 * trace)
        throw model_error("end_to_end: noise correlation is not positive semidefinite (active receive admittance?)");
    return out;
}

/// Intrinsic and extrinsic noise sources entering the circuit.
struct NoiseSources {
    Eigen::VectorXcd v_nt;   // N, series voltage at the transmit ports
    Eigen::VectorXcd i_nr;   // M, shunt current at the receive ports
    Eigen::VectorXcd i_lna;  // M, LNA output current noise
};

/// Source covariances consistent with R_n: 4kT Re{Z_T}, 4kT Re{Y_R} and
/// 4kT (N_f - 1) beta / R_in per LNA, mutually uncorrelated.
struct NoiseCovariances {
    Eigen::MatrixXd v_nt;
    Eigen::MatrixXd i_nr;
    double i_lna = 0.0;
};

inline NoiseCovariances noise_covariances(const MultiportModel& model, const AmplifierChain& chain) {
    return {chain.thermal() * model.zt.real(), chain.thermal() * model.yr.real(),
            chain.thermal() * (chain.noise_figure - 1.0) * chain.lna_gain_beta / chain.lna_input_resistance};
}

/// Solves the terminated circuit F_MIMO [i_T; v_R] = [v_G + v_NT; i_NR]
/// directly and returns i_L = i_LNA + (beta / R_in) v_R.
inline Eigen::VectorXcd direct_circuit_oracle(const MultiportModel& model, const AmplifierChain& chain,
                                              const Eigen::VectorXcd& v_g, const NoiseSources& noise) {
    chain.validate();
    const Eigen::Index n = model.transmitters();
    const Eigen::Index m = model.receivers();
    if (v_g.size() != n || noise.v_nt.size() != n || noise.i_nr.size() != m || noise.i_lna.size() != m)
        throw dimension_error("direct_circuit_oracle: source vector sizes do not match the model");
    const auto lu = detail::checked_lu(terminated_matrix(model, chain), "direct_circuit_oracle: F_MIMO is ill-conditioned");
    Eigen::VectorXcd rhs(n + m);
    rhs << v_g + noise.v_nt, noise.i_nr;
    const Eigen::VectorXcd x = lu.solve(rhs);
    return noise.i_lna + (chain.lna_gain_beta / chain.lna_input_resistance) * x.tail(m);
}

inline Eigen::VectorXcd direct_circuit_oracle(const MultiportModel& model, const AmplifierChain& chain,
                                              const Eigen::VectorXcd& v_g) {
    const Eigen::Index n = model.transmitters();
    const Eigen::Index m = model.receivers();
    return direct_circuit_oracle(model, chain, v_g,
                                 {Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(m), Eigen::VectorXcd::Zero(m)});
}

}  // namespace connarray

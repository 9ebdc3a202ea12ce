#include <catch_amalgamated.hpp>

#include <random>

#include "connarray/multiport.hpp"
#include "connarray/noise_mc.hpp"

using namespace connarray;

namespace {

// Passive random model: Re{Z_T} positive definite, Re{Y_R} > 0, modest coupling.
MultiportModel random_model(int n, int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rnd = [&](int r, int c) {
        Eigen::MatrixXcd a(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) a(i, j) = {u(rng), u(rng)};
        return a;
    };
    Eigen::MatrixXcd b = rnd(n, n);
    Eigen::MatrixXcd zt = 20.0 * (b * b.adjoint()).real().cast<cplx>();
    zt.diagonal().array() += 10.0;
    const Eigen::MatrixXcd reactive = rnd(n, n);
    zt += 30.0 * cplx{0.0, 1.0} * (reactive + reactive.transpose()).real().cast<cplx>();
    Eigen::MatrixXcd yr = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i) yr(i, i) = {0.002 + 0.01 * std::abs(u(rng)), 0.02 * u(rng)};
    return assemble_gmimo(zt, yr, 0.05 * rnd(m, n));
}

double max_abs(const Eigen::MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("assemble_gmimo fills in the reciprocal block") {
    std::mt19937_64 rng(1);
    const auto model = random_model(3, 2, rng);
    CHECK(model.htr == -model.hrt.transpose());

    Eigen::MatrixXcd z(1, 1), y(1, 1), h(1, 1);
    z << cplx{70.0, 20.0};
    y << cplx{0.01, -0.002};
    h << cplx{0.3, 0.1};
    const auto s = assemble_gmimo(z, y, h);
    CHECK(s.htr(0, 0) == -h(0, 0));

    CHECK_THROWS_AS(assemble_gmimo(z, y, Eigen::MatrixXcd::Zero(2, 1)), dimension_error);
    Eigen::MatrixXcd asym(2, 2);
    asym << 1.0, 2.0, 3.0, 1.0;
    CHECK_THROWS_AS(assemble_gmimo(asym, y, Eigen::MatrixXcd::Zero(1, 2)), model_error);
    Eigen::MatrixXcd full_y = Eigen::MatrixXcd::Constant(2, 2, 0.01);
    CHECK_THROWS_AS(assemble_gmimo(z, full_y, Eigen::MatrixXcd::Zero(2, 1)), model_error);
}

TEST_CASE("block_inverse: scalar closed form") {
    const AmplifierChain chain;
    Eigen::MatrixXcd z(1, 1), y(1, 1), h(1, 1);
    z << cplx{70.0, 20.0};
    y << cplx{0.01, -0.002};
    h << cplx{0.3, 0.1};
    const auto k = block_inverse(assemble_gmimo(z, y, h), chain);
    // F = [[z + R, -h], [h, y + 1/R_in]]
    const cplx a = z(0, 0) + chain.source_resistance, d = y(0, 0) + 1.0 / chain.lna_input_resistance;
    const cplx det = a * d + h(0, 0) * h(0, 0);
    CHECK(std::abs(k.kt(0, 0) - d / det) < 1e-14 * std::abs(d / det));
    CHECK(std::abs(k.ktr(0, 0) - h(0, 0) / det) < 1e-14 * std::abs(h(0, 0) / det));
    CHECK(std::abs(k.krt(0, 0) + h(0, 0) / det) < 1e-14 * std::abs(h(0, 0) / det));
    CHECK(std::abs(k.kr(0, 0) - a / det) < 1e-14 * std::abs(a / det));

    // hand-solved chain gain: v_R = -h v_G / det, i_L = (beta / R_in) v_R
    Eigen::VectorXcd e1(1);
    e1 << 1.0;
    const auto il = direct_circuit_oracle(assemble_gmimo(z, y, h), chain, e1);
    const cplx want = -chain.lna_gain_beta / chain.lna_input_resistance * h(0, 0) / det;
    CHECK(std::abs(il[0] - want) < 1e-14 * std::abs(want));
}

TEST_CASE("block_inverse: decoupled limit") {
    std::mt19937_64 rng(2);
    auto model = random_model(3, 2, rng);
    model = assemble_gmimo(model.zt, model.yr, Eigen::MatrixXcd::Zero(2, 3));
    const AmplifierChain chain;
    const auto k = block_inverse(model, chain);
    Eigen::MatrixXcd a = model.zt;
    a.diagonal().array() += chain.source_resistance;
    Eigen::MatrixXcd d = model.yr;
    d.diagonal().array() += 1.0 / chain.lna_input_resistance;
    CHECK(max_abs(k.kt - a.inverse()) < 1e-12 * max_abs(a.inverse()));
    CHECK(max_abs(k.kr - d.inverse()) < 1e-12 * max_abs(d.inverse()));
    CHECK(max_abs(k.ktr) == 0.0);
    CHECK(max_abs(k.krt) == 0.0);
    CHECK(max_abs(end_to_end(model, chain).h) == 0.0);
}

TEST_CASE("block_inverse and the direct oracle on 100 random models") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const AmplifierChain chain;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 5, m = 1 + trial % 3;
        const auto model = random_model(n, m, rng);
        const auto k = block_inverse(model, chain);
        const Eigen::MatrixXcd f = terminated_matrix(model, chain);
        const Eigen::MatrixXcd kf = k.assembled() * f;
        CHECK(max_abs(kf - Eigen::MatrixXcd::Identity(n + m, n + m)) < 1e-10);
        CHECK(max_abs(k.assembled() - f.inverse()) < 1e-10 * max_abs(f.inverse()));
        CHECK(k.q == k.kt);

        Eigen::VectorXcd vg(n);
        for (int i = 0; i < n; ++i) vg[i] = {g(rng), g(rng)};
        const auto chan = end_to_end(model, chain);
        const Eigen::VectorXcd hv = chan.h * vg;
        CHECK((direct_circuit_oracle(model, chain, vg) - hv).norm() <= 1e-10 * hv.norm());
        CHECK(direct_circuit_oracle(model, chain, Eigen::VectorXcd::Zero(n)).norm() == 0.0);

        // Hermitian PSD after symmetrization
        CHECK(chan.rn == chan.rn.adjoint());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(chan.rn);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12 * chan.rn.trace().real());
    }
}

TEST_CASE("end_to_end: term dropout and gain scaling") {
    std::mt19937_64 rng(4);
    auto model = random_model(3, 2, rng);
    AmplifierChain chain;

    // H_RT = 0 and N_f = 1 leave only the receive-port thermal term.
    const auto bare = assemble_gmimo(model.zt, model.yr, Eigen::MatrixXcd::Zero(2, 3));
    chain.noise_figure = 1.0;
    const auto k = block_inverse(bare, chain);
    const Eigen::MatrixXcd want = chain.thermal() * chain.lna_gain_beta * chain.lna_gain_beta /
                                  (chain.lna_input_resistance * chain.lna_input_resistance) * k.kr *
                                  bare.yr.real().cast<cplx>() * k.kr.adjoint();
    CHECK(max_abs(end_to_end(bare, chain).rn - want) < 1e-12 * max_abs(want));

    // Doubling beta: H doubles, the N_f term doubles, the rest quadruples.
    chain.noise_figure = 2.0;
    const auto one = end_to_end(model, chain);
    AmplifierChain twice = chain;
    twice.lna_gain_beta *= 2.0;
    const auto two = end_to_end(model, twice);
    CHECK(max_abs(two.h - 2.0 * one.h) < 1e-14 * max_abs(one.h));
    const double nf_term = chain.thermal() * chain.lna_gain_beta * (chain.noise_figure - 1.0) / chain.lna_input_resistance;
    const Eigen::MatrixXcd expect = 4.0 * one.rn - 2.0 * nf_term * Eigen::MatrixXcd::Identity(2, 2);
    CHECK(max_abs(two.rn - expect) < 1e-12 * max_abs(two.rn));
}

TEST_CASE("end_to_end rejects an active receive admittance") {
    std::mt19937_64 rng(5);
    auto model = random_model(2, 1, rng);
    Eigen::MatrixXcd yr(1, 1);
    yr << cplx{-0.015, 0.0};
    AmplifierChain chain;
    chain.noise_figure = 1.0;
    CHECK_THROWS_AS(end_to_end(assemble_gmimo(model.zt, yr, Eigen::MatrixXcd::Zero(1, 2)), chain), model_error);
}

TEST_CASE("singular terminations are reported with their conditioning") {
    AmplifierChain chain;
    Eigen::MatrixXcd z(1, 1), y(1, 1);
    z << cplx{-chain.source_resistance, 0.0};
    y << cplx{0.01, 0.0};
    const auto model = assemble_gmimo(z, y, Eigen::MatrixXcd::Zero(1, 1));
    try {
        block_inverse(model, chain);
        FAIL("no exception");
    } catch (const singular_matrix_error& e) {
        CHECK(std::string(e.what()).find("Schur") != std::string::npos);
    }
    CHECK_THROWS_AS(direct_circuit_oracle(model, chain, Eigen::VectorXcd::Ones(1)), singular_matrix_error);
}

TEST_CASE("AmplifierChain validation") {
    AmplifierChain c;
    CHECK_NOTHROW(c.validate());
    c.noise_figure = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.lna_input_resistance = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("noise superposition reproduces R_n") {
    std::mt19937_64 rng(6);
    const auto model = random_model(3, 2, rng);
    const auto check = noise_monte_carlo(model, AmplifierChain{}, 100000, 12345);
    CHECK(check.draws == 100000);
    CHECK(check.max_z < 3.0);
    CHECK(max_abs(check.empirical - check.expected) < 0.02 * max_abs(check.expected));
}

#include <catch_amalgamated.hpp>

#include <random>

#include "connarray/linkrate.hpp"

using namespace connarray;

namespace {

Eigen::MatrixXcd random_matrix(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) a(i, j) = {g(rng), g(rng)};
    return a;
}

Eigen::MatrixXcd random_covariance(int m, std::mt19937_64& rng) {
    const Eigen::MatrixXcd b = random_matrix(m, m, rng);
    Eigen::MatrixXcd r = b * b.adjoint();
    r.diagonal().array() += 0.5;
    return r;
}

ChannelRealization scalar_channel(cplx h, double noise) {
    ChannelRealization c;
    c.h = Eigen::MatrixXcd::Constant(1, 1, h);
    c.rn = Eigen::MatrixXcd::Constant(1, 1, noise);
    return c;
}

}  // namespace

TEST_CASE("whitening_matrix") {
    std::mt19937_64 rng(1);
    const auto rn = random_covariance(3, rng);
    const auto w = whitening_matrix(rn);
    CHECK((w * rn * w.adjoint() - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(whitening_matrix(Eigen::MatrixXcd::Zero(2, 2)), singular_matrix_error);
    // rank-deficient input is floored rather than inverted blindly
    Eigen::MatrixXcd deficient = Eigen::MatrixXcd::Zero(2, 2);
    deficient(0, 0) = 1.0;
    const auto wd = whitening_matrix(deficient);
    CHECK(std::abs(wd(1, 1)) == Catch::Approx(1.0 / std::sqrt(1e-15)).epsilon(1e-12));
}

TEST_CASE("spectral_efficiency_point") {
    const PowerBudget p{2.0};
    CHECK(spectral_efficiency_point(scalar_channel(0.0, 1.0), p) == 0.0);
    const cplx h{0.3, -0.4};
    CHECK(spectral_efficiency_point(scalar_channel(h, 0.1), p) == Catch::Approx(std::log2(1.0 + 0.25 * 2.0 / 0.1)));

    double prev = -1.0;
    for (double budget : {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
        const double se = spectral_efficiency_point(scalar_channel(h, 0.1), PowerBudget{budget});
        CHECK(se > prev);
        prev = se;
    }

    // multi-feed: maximum-ratio voltages collect ||h||^2
    ChannelRealization c;
    c.h.resize(1, 3);
    c.h << cplx{1.0, 0.0}, cplx{0.0, 2.0}, cplx{-1.0, 1.0};
    c.rn = Eigen::MatrixXcd::Constant(1, 1, 0.5);
    CHECK(spectral_efficiency_point(c, PowerBudget{1.0}) == Catch::Approx(std::log2(1.0 + 7.0 / 0.5)));

    ChannelRealization two;
    two.h = Eigen::MatrixXcd::Ones(2, 2);
    two.rn = Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(spectral_efficiency_point(two, p), dimension_error);
    CHECK_THROWS_AS(spectral_efficiency_point(scalar_channel(h, 0.1), PowerBudget{0.0}), std::invalid_argument);
}

TEST_CASE("lmmse_precoder: power accounting and the single-user matched filter") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + trial % 3;
        const auto h = random_matrix(m, 5, rng);
        const auto rn = random_covariance(m, rng);
        const PowerBudget budget{0.3 + trial};
        const auto pre = lmmse_precoder(h, rn, budget);
        CHECK(pre.p.squaredNorm() == Catch::Approx(budget.total_generator_power).epsilon(1e-10));
        CHECK(pre.c > 0.0);
    }

    const auto h = random_matrix(1, 4, rng);
    const auto rn = random_covariance(1, rng);
    const auto pre = lmmse_precoder(h, rn, PowerBudget{1.0});
    const Eigen::MatrixXcd mf = (whitening_matrix(rn) * h).adjoint();
    const cplx ratio = pre.p(0, 0) / mf(0, 0);
    CHECK(ratio.real() > 0.0);
    CHECK(std::abs(ratio.imag()) < 1e-12 * std::abs(ratio));
    CHECK((pre.p - ratio * mf).norm() < 1e-12 * pre.p.norm());

    const auto zero = lmmse_precoder(Eigen::MatrixXcd::Zero(2, 3), Eigen::MatrixXcd::Identity(2, 2), PowerBudget{1.0});
    CHECK(zero.p.norm() == 0.0);
    CHECK_THROWS_AS(lmmse_precoder(h, Eigen::MatrixXcd::Identity(2, 2), PowerBudget{1.0}), dimension_error);
}

TEST_CASE("lmmse_precoder: zero-forcing limit") {
    std::mt19937_64 rng(3);
    const auto h = random_matrix(2, 4, rng);
    const auto rn = random_covariance(2, rng);
    const Eigen::MatrixXcd hw = whitening_matrix(rn) * h;
    auto leakage = [&](double budget) {
        const Eigen::MatrixXcd g = hw * lmmse_precoder(h, rn, PowerBudget{budget}).p;
        Eigen::MatrixXcd off = g;
        off.diagonal().setZero();
        return off.norm() / g.diagonal().norm();
    };
    const double l6 = leakage(1e6), l8 = leakage(1e8);
    CHECK(l6 < 1e-4);
    CHECK(l8 < 1.1e-2 * l6);  // leakage is first order in xi = M / budget

    // direction approaches the pseudo-inverse
    const Eigen::MatrixXcd pinv = hw.adjoint() * (hw * hw.adjoint()).inverse();
    const Eigen::MatrixXcd p8 = lmmse_precoder(h, rn, PowerBudget{1e8}).p;
    CHECK((p8 / p8.norm() - pinv / pinv.norm()).norm() < 1e-6);
}

TEST_CASE("lmmse_precoder minimizes the sum-MSE") {
    std::mt19937_64 rng(4);
    const auto h = random_matrix(2, 4, rng);
    const auto rn = random_covariance(2, rng);
    const PowerBudget budget{3.0};
    const Eigen::MatrixXcd hw = whitening_matrix(rn) * h;
    const auto pre = lmmse_precoder(h, rn, budget);
    const double best = sum_mse(hw, pre.p);

    for (int i = 0; i < 1000; ++i) {
        Eigen::MatrixXcd q = random_matrix(4, 2, rng);
        q *= std::sqrt(budget.total_generator_power) / q.norm();
        CHECK(sum_mse(hw, q) >= best);
    }

    for (int i = 0; i < 200; ++i) {
        Eigen::MatrixXcd q = pre.p + 1e-3 * pre.p.norm() * random_matrix(4, 2, rng) / std::sqrt(8.0);
        q *= std::sqrt(budget.total_generator_power) / q.norm();
        CHECK(sum_mse(hw, q) >= best - 1e-9);
    }
}

TEST_CASE("per_user_rates") {
    // diagonal G
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    h(0, 0) = 2.0;
    h(1, 1) = cplx{0.0, 3.0};
    const auto diag = per_user_rates(h, Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Identity(2, 2), 1.0);
    CHECK(diag.sinr[0] == Catch::Approx(4.0));
    CHECK(diag.sinr[1] == Catch::Approx(9.0));
    for (int u = 0; u < 2; ++u) CHECK(std::abs(diag.per_user_rate[u] - std::log2(1.0 + diag.sinr[u])) < 1e-12);

    // toy channel by hand: R_n = diag(4, 1), G = diag(1/2, 1) H P
    Eigen::MatrixXcd ht(2, 2), p(2, 2), rn = Eigen::MatrixXcd::Zero(2, 2);
    ht << 1.0, 2.0, cplx{0.0, 1.0}, 1.0;
    p << 1.0, 0.0, 0.0, 1.0;
    rn(0, 0) = 4.0;
    rn(1, 1) = 1.0;
    // G = [[0.5, 1], [j, 1]]: sinr_1 = 0.25 / (1 + 1), sinr_2 = 1 / (1 + 1)
    const auto toy = per_user_rates(ht, rn, p, 1.0);
    CHECK(toy.sinr[0] == Catch::Approx(0.125));
    CHECK(toy.sinr[1] == Catch::Approx(0.5));
    CHECK(toy.per_user_rate[0] == Catch::Approx(std::log2(1.125)));

    // duplicated users
    std::mt19937_64 rng(5);
    Eigen::MatrixXcd dup(2, 4);
    dup.row(0) = random_matrix(1, 4, rng);
    dup.row(1) = dup.row(0);
    const Eigen::MatrixXcd rn2 = Eigen::MatrixXcd::Identity(2, 2) * 0.7;
    const auto pre = lmmse_precoder(dup, rn2, PowerBudget{2.0});
    const auto same = per_user_rates(dup, rn2, pre.p, pre.c);
    CHECK(same.per_user_rate[0] == Catch::Approx(same.per_user_rate[1]).epsilon(1e-12));
    CHECK(same.per_user_rate[0] >= 0.0);

    CHECK_THROWS_AS(per_user_rates(dup, rn2, Eigen::MatrixXcd::Identity(2, 2), 1.0), dimension_error);
}

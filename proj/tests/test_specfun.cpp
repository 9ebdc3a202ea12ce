#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "connarray/errors.hpp"
#include "connarray/specfun.hpp"

using namespace connarray;
using namespace connarray::specfun;
using std::numbers::pi;

namespace {

double rel(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return x;
}

// Reference values from mpmath at 30 digits.
struct ComplexRef {
    cplx z;
    int n;
    cplx j, y;
};

const ComplexRef complex_refs[] = {
    {{3.0, -0.5}, 0, {-0.30753601797880278, 0.17324844577780657}, {0.4107107426425238, 0.17028150550830334}},
    {{3.0, -0.5}, 1, {0.36149679840403173, 0.19336161497912512}, {0.37260837346001694, -0.13658956325895598}},
    {{15.0, -2.0}, 0, {-0.10246827747721027, 0.7375897696750036}, {0.76531055244646473, 0.10238347839194762}},
    {{15.0, -2.0}, 1, {0.75913341907093362, 0.12623171752681542}, {0.12721999107823479, -0.73128021081488338}},
    {{0.01, -0.001}, 0, {0.99997525014689026, 4.9999381252517619e-6}, {-3.0022890200455127, -0.06346765920832878}},
    {{0.01, -0.001}, 1, {0.0049999393752345049, -0.00049998131262760642}, {-63.048295570963798, -6.3018230407063833}},
    {{50.0, -0.2}, 0, {0.056971560495321468, -0.019631042657792677}, {-0.10000996404975953, -0.011437577380084129}},
    {{50.0, -0.2}, 1, {-0.099444522029163456, -0.011632198365890716}, {-0.057973941412267403, 0.01951363913200174}},
    {{7.0, -7.0}, 0, {133.40580687703759, 43.39705138800573}, {43.396947665001872, -133.40560249173379}},
    {{7.0, -7.0}, 1, {46.798235328320373, -127.04731345664082}, {-127.04752870769068, -46.798335691114139}},
    {{0.3, -20.0}, 0, {41707012.68464758, 12555073.754694253}, {12555073.754694253, -41707012.68464758}},
    {{0.3, -20.0}, 1, {12253193.9377043, -40646004.968893997}, {-40646004.968893997, -12253193.9377043}},
    {{11.5, -0.01}, 0, {-0.067656337869922117, -0.0022838246748150519}, {-0.2252436253167121, 0.00057943171825936356}},
    {{11.5, -0.01}, 1, {-0.22839016115184144, 0.0004779539265673699}, {0.057944421194734334, 0.0023027442692436921}},
    {{12.5, -0.01}, 0, {0.14689206090922188, -0.0016548633154085489}, {-0.17122225226689616, -0.0015384101598981123}},
    {{12.5, -0.01}, 1, {-0.16549138541565096, -0.0016012559296630507}, {-0.15384653492333811, 0.0015890964275665563}},
};

}  // namespace

TEST_CASE("bessel_j values at the origin and at one") {
    CHECK(bessel_j(0, 0.0) == cplx{1.0});
    CHECK(bessel_j(1, 0.0) == cplx{0.0});
    CHECK(rel(bessel_j(0, 1.0), 0.7651976865579666) < 1e-14);
}

TEST_CASE("hankel2 values at one") {
    CHECK(rel(hankel2(0, 1.0), {0.7651976865579666, -0.08825696421567696}) < 1e-13);
    CHECK(rel(hankel2(1, 1.0), {0.44005058574493355, 0.7812128213002887}) < 1e-13);
}

TEST_CASE("hankel2 diverges logarithmically near the origin") {
    for (double x : {1e-6, 1e-9, 1e-12}) {
        const double ratio = std::abs(hankel2(0, x)) / ((2.0 / pi) * std::abs(std::log(x)));
        CHECK(ratio == Catch::Approx(1.0).epsilon(0.05));
    }
    CHECK_THROWS_AS(hankel2(0, 0.0), singularity_error);
    CHECK_THROWS_AS(bessel_y(1, 0.0), singularity_error);
}

TEST_CASE("non-finite arguments and bad orders are rejected") {
    CHECK_THROWS_AS(bessel_j(0, cplx{NAN, 0.0}), domain_error);
    CHECK_THROWS_AS(hankel2(1, cplx{0.0, INFINITY}), domain_error);
    CHECK_THROWS_AS(bessel_j(2, 1.0), domain_error);
}

TEST_CASE("real line against the standard library implementation") {
    for (double x : log_grid(1e-3, 1e3, 400)) {
        INFO("x = " << x);
        const double j0 = std::cyl_bessel_j(0.0, x), j1 = std::cyl_bessel_j(1.0, x);
        const double y0 = std::cyl_neumann(0.0, x), y1 = std::cyl_neumann(1.0, x);
        // Relative to the local modulus |H|, which stays meaningful near zeros.
        const double m0 = std::hypot(j0, y0), m1 = std::hypot(j1, y1);
        CHECK(std::abs(bessel_j(0, x) - j0) / m0 < 1e-10);
        CHECK(std::abs(bessel_j(1, x) - j1) / m1 < 1e-10);
        CHECK(std::abs(bessel_y(0, x) - y0) / m0 < 1e-10);
        CHECK(std::abs(bessel_y(1, x) - y1) / m1 < 1e-10);
        CHECK(bessel_j(0, x).imag() == 0.0);
    }
}

TEST_CASE("negative imaginary ray against modified Bessel functions") {
    for (double w : log_grid(1e-3, 600.0, 300)) {
        INFO("w = " << w);
        const cplx z{0.0, -w};
        // H0(-jw) = (2j/pi) K0(w), H1(-jw) = -(2/pi) K1(w); J0(-jw) = I0(w), J1(-jw) = -j I1(w)
        CHECK(rel(hankel2(0, z), cplx{0.0, 2.0 / pi * std::cyl_bessel_k(0.0, w)}) < 1e-9);
        CHECK(rel(hankel2(1, z), cplx{-2.0 / pi * std::cyl_bessel_k(1.0, w)}) < 1e-9);
        CHECK(rel(bessel_j(0, z), cplx{std::cyl_bessel_i(0.0, w)}) < 1e-10);
        CHECK(rel(bessel_j(1, z), cplx{0.0, -std::cyl_bessel_i(1.0, w)}) < 1e-10);
    }
}

TEST_CASE("complex arguments against high-precision references") {
    for (const auto& r : complex_refs) {
        INFO("z = " << r.z << ", n = " << r.n);
        const double scale = std::abs(r.j) + std::abs(r.y);
        CHECK(std::abs(bessel_j(r.n, r.z) - r.j) / scale < 1e-10);
        CHECK(std::abs(bessel_y(r.n, r.z) - r.y) / scale < 1e-10);
        CHECK(std::abs(hankel2(r.n, r.z) - (r.j - cplx{0.0, 1.0} * r.y)) / scale < 1e-10);
    }
}

TEST_CASE("Wronskian on the real line") {
    for (double x : log_grid(1e-3, 1e3, 1000)) {
        const cplx w = bessel_j(1, x) * bessel_y(0, x) - bessel_j(0, x) * bessel_y(1, x);
        CHECK(std::abs(w - 2.0 / (pi * x)) / (2.0 / (pi * x)) < 1e-10);
    }
}

TEST_CASE("reflection symmetry of J") {
    for (cplx z : {cplx{0.5, -0.1}, cplx{3.0, -2.0}, cplx{20.0, -0.5}, cplx{0.0, -4.0}}) {
        CHECK(std::abs(bessel_j(0, -z) - bessel_j(0, z)) <= 1e-14 * std::abs(bessel_j(0, z)));
        CHECK(std::abs(bessel_j(1, -z) + bessel_j(1, z)) <= 1e-14 * std::abs(bessel_j(1, z)));
    }
}

TEST_CASE("hankel2 is the conjugate of hankel1 on the real axis") {
    for (double x : {0.01, 1.0, 7.5, 12.0, 40.0}) {
        const cplx h1 = bessel_j(0, x) + cplx{0.0, 1.0} * bessel_y(0, x);
        CHECK(std::abs(hankel2(0, x) - std::conj(h1)) < 1e-13 * std::abs(h1));
    }
}

TEST_CASE("scaled forms stay finite deep on the evanescent ray") {
    const cplx z{0.0, -5000.0};
    const cplx h = hankel2_scaled(0, z);
    const cplx jj = bessel_j_scaled(0, z);
    CHECK(std::isfinite(h.real()));
    CHECK(std::isfinite(h.imag()));
    // J0 H0 ~ j / (pi w) for large w
    CHECK(rel(h * jj, cplx{0.0, 1.0 / (pi * 5000.0)}) < 1e-4);
}

TEST_CASE("beta_of_alpha branch") {
    const double k = 2.0;
    CHECK(beta_of_alpha(0.0, k) == cplx{k});
    CHECK(std::abs(beta_of_alpha(2.0 * k, k) - cplx{0.0, -k * std::sqrt(3.0)}) < 1e-14);
    CHECK(beta_of_alpha(k, k) == cplx{});
    for (double a : {2.0001, 3.0, 10.0, 1e3, -2.5, -1e4}) CHECK(beta_of_alpha(a, k).imag() < 0.0);
    const cplx lossy = cplx{k, -1e-4 * k};
    for (double a : {0.0, 1.0, 1.999, 2.0, 2.001, 5.0}) CHECK(beta_of_alpha(a, lossy).imag() <= 0.0);
}

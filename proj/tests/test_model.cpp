#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sls/model.hpp"
#include "sls/spectral.hpp"

using namespace sls;

TEST_CASE("raised cosine shape") {
    const double r = 0.5;
    CHECK(raised_cosine({0, 0}, r) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(raised_cosine({r, 0}, r) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(raised_cosine({0, r / 2}, r) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(raised_cosine({r + 1e-9, 0}, r) == 0.0);
    CHECK(raised_cosine({3.0, 3.0}, r) == 0.0);
    // radial symmetry and range
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Point2 z{d(rng), d(rng)};
        const double v = raised_cosine(z, r);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == doctest::Approx(raised_cosine({-z.z1, -z.z2}, r)).epsilon(1e-15));
    }
}

TEST_CASE("actuator grid layout") {
    Domain2D dom;
    const std::vector<Point2> grid16 = actuator_grid(16, dom);
    REQUIRE(grid16.size() == 16);
    const double expect[4] = {-1.5, -0.5, 0.5, 1.5};
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col) {
            const Point2 p = grid16[std::size_t(row * 4 + col)];
            CHECK(p.z1 == doctest::Approx(expect[row]).epsilon(1e-15));
            CHECK(p.z2 == doctest::Approx(expect[col]).epsilon(1e-15));
        }

    const std::vector<Point2> grid1 = actuator_grid(1, dom);
    REQUIRE(grid1.size() == 1);
    CHECK(grid1[0].z1 == doctest::Approx(0.0));
    CHECK(grid1[0].z2 == doctest::Approx(0.0));

    CHECK_THROWS_AS(actuator_grid(12, dom), std::invalid_argument);
}

TEST_CASE("model construction ties b to the negated shifted kernel") {
    Domain2D dom;
    KernelModel model = build_model(1.5, 16, dom, 12);
    REQUIRE(model.n_u() == 16);
    REQUIRE(model.b_coeffs.size() == 16);

    double worst = 0.0;
    for (int l = 0; l < model.n_u(); ++l) {
        SpectralField expected =
            shift_coefficients(model.a_coeffs, model.actuators[std::size_t(l)], dom);
        for (std::size_t j = 0; j < expected.coeffs.size(); ++j)
            worst = std::max(worst, std::abs(model.b_coeffs[std::size_t(l)].coeffs[j] +
                                             expected.coeffs[j]));
    }
    CHECK(worst <= 1e-10);

    // The synthesized trough at each actuator equals the synthesized kernel
    // peak, and sits within truncation error of the exact -1.
    const double peak = synthesize_grid(model.a_coeffs, {{0.0, 0.0}}, dom)[0];
    for (int l = 0; l < model.n_u(); ++l) {
        const double trough =
            synthesize_grid(model.b_coeffs[std::size_t(l)], {model.actuators[std::size_t(l)]},
                            dom)[0];
        CHECK(trough == doctest::Approx(-peak).epsilon(1e-10));
        CHECK(std::abs(trough + 1.0) <= 1e-2);
    }
}

TEST_CASE("kernel symmetry zeroes the odd modes") {
    Domain2D dom;
    KernelModel model = build_model(1.5, 1, dom, 12);
    double worst = 0.0;
    for (int m = 0; m <= 12; ++m)
        for (int n = 0; n <= 12; ++n)
            for (int i : {2, 3})
                worst = std::max(worst, std::abs(model.a_coeffs.at(m, n, i)));
    CHECK(worst <= 1e-9);
}

TEST_CASE("kernel truncation leakage is bounded beyond the support") {
    Domain2D dom;
    const double r = 1.5;
    KernelModel model = build_model(r, 1, dom, 12);

    // 80x80 cell-centre lattice over the domain window, one coarse reference
    // cell (0.5 units) of margin beyond the support radius.
    const int n = 80;
    const double dx = dom.width1() / n;
    std::vector<Point2> far;
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            Point2 z{dom.z1_min + (p + 0.5) * dx, dom.z2_min + (q + 0.5) * dx};
            if (std::hypot(z.z1, z.z2) > r + 0.5) far.push_back(z);
        }
    REQUIRE(!far.empty());
    std::vector<double> vals = synthesize_grid(model.a_coeffs, far, dom);
    double worst = 0.0;
    for (double v : vals) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-3);
}

TEST_CASE("actuation evaluation matches the pointwise sum") {
    Domain2D dom;
    KernelModel model = build_model(1.5, 16, dom, 12);

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(16);
    CHECK(eval_actuation(model, zero, {0.3, -0.9}) == 0.0);

    Eigen::VectorXd e5 = Eigen::VectorXd::Zero(16);
    e5[5] = 1.0;
    const Point2 z{0.4, 0.8};
    const Point2 shift = z - model.actuators[5];
    const double direct = -synthesize_grid(model.a_coeffs, {shift}, dom)[0];
    CHECK(eval_actuation(model, e5, z) == doctest::Approx(direct).epsilon(1e-10));

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd gains(16);
    for (int l = 0; l < 16; ++l) gains[l] = d(rng);
    for (Point2 probe : {Point2{0.0, 0.0}, Point2{-1.2, 1.7}, Point2{1.9, -0.4}}) {
        double expected = 0.0;
        for (int l = 0; l < 16; ++l)
            expected -= gains[l] *
                        synthesize_grid(model.a_coeffs, {probe - model.actuators[std::size_t(l)]},
                                        dom)[0];
        CHECK(eval_actuation(model, gains, probe) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("oversized kernel support is rejected") {
    Domain2D dom;
    CHECK_THROWS_AS(build_model(2.1, 16, dom, 12), std::invalid_argument);
    CHECK_THROWS_AS(build_model(-0.5, 16, dom, 12), std::invalid_argument);
    CHECK_NOTHROW(build_model(1.5, 4, dom, 6));
}

TEST_CASE("explicit actuator positions are honoured") {
    Domain2D dom;
    std::vector<Point2> pos{{0.0, 0.0}, {-1.0, 1.0}};
    KernelModel model = build_model(1.0, pos, dom, 8);
    REQUIRE(model.n_u() == 2);
    CHECK(model.actuators[1].z1 == doctest::Approx(-1.0));
    CHECK(model.b_coeffs.size() == 2);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sls/model.hpp"
#include "sls/qpsolve.hpp"
#include "sls/slp.hpp"

using namespace sls;

namespace {

double constraint_residual(const SLPProblem& p, const Eigen::VectorXd& x) {
    return (p.A * x - p.rhs).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("assembled dimensions at the reference configuration") {
    SynthesisConfig cfg;  // T=5, k=12
    KernelModel model = build_model(1.5, 16, cfg.domain, cfg.k);
    SLPProblem p = assemble(model, cfg, {-0.26, 0.56});
    CHECK(p.n_rows == 3380);
    CHECK(p.n_vars == 3460);
    CHECK(p.A.rows() == 3380);
    CHECK(p.A.cols() == 3460);
    CHECK(p.n_alpha == 676);
    CHECK(int(p.active.size()) == 16);
}

TEST_CASE("rows only couple adjacent time blocks") {
    SynthesisConfig cfg;
    cfg.k = 6;
    KernelModel model = build_model(1.5, 4, cfg.domain, cfg.k);
    SLPProblem p = assemble(model, cfg, {0.4, -0.9});
    const int n_act = int(p.active.size());
    for (int col = 0; col < p.A.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, col); it; ++it) {
            const int t_row = int(it.row()) / p.n_alpha + 1;  // row group t = 1..T
            int t_col;
            if (int(it.col()) < p.T * p.n_alpha)
                t_col = int(it.col()) / p.n_alpha + 1;  // alpha block
            else
                t_col = (int(it.col()) - p.T * p.n_alpha) / n_act + 1;  // u block t-1 -> t
            CHECK(std::abs(t_row - t_col) <= 1);
            CHECK(t_col <= t_row);
        }
    }
}

TEST_CASE("horizon-one problem is the base-case identity") {
    SynthesisConfig cfg;
    cfg.T = 1;
    cfg.k = 6;
    KernelModel model = build_model(1.5, 4, cfg.domain, cfg.k);
    const Point2 zt{0.7, 0.1};
    SLPProblem p = assemble(model, cfg, zt);
    REQUIRE(p.n_rows == p.n_alpha);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd u0(4);
    for (int l = 0; l < 4; ++l) u0[l] = d(rng);

    SpectralField alpha1 = shift_coefficients(model.a_coeffs, zt, cfg.domain);
    for (int l = 0; l < 4; ++l)
        for (std::size_t j = 0; j < alpha1.coeffs.size(); ++j)
            alpha1.coeffs[j] += u0[l] * model.b_coeffs[std::size_t(l)].coeffs[j];

    Eigen::VectorXd x(p.n_vars);
    for (int j = 0; j < p.n_alpha; ++j) x[j] = alpha1.coeffs[std::size_t(j)];
    for (int l = 0; l < 4; ++l) x[p.u_var(0, l)] = u0[l];
    CHECK(constraint_residual(p, x) <= 1e-12);
}

TEST_CASE("uncontrolled rollout is a feasible witness") {
    SynthesisConfig cfg;
    KernelModel model = build_model(1.5, 16, cfg.domain, cfg.k);
    for (Point2 zt : {Point2{-0.26, 0.56}, Point2{1.3, -1.7}, Point2{0.0, 0.0}}) {
        SLPProblem p = assemble(model, cfg, zt);
        Eigen::VectorXd witness = uncontrolled_solution(model, cfg, zt, p);
        CHECK(constraint_residual(p, witness) <= 1e-10);
    }
}

TEST_CASE("cost evaluation") {
    SynthesisConfig cfg;
    cfg.k = 6;
    KernelModel model = build_model(1.5, 4, cfg.domain, cfg.k);
    SLPProblem p = assemble(model, cfg, {0.2, 0.3});

    CHECK(cost_of(p, Eigen::VectorXd::Zero(p.n_vars)) == 0.0);

    Eigen::VectorXd e = Eigen::VectorXd::Zero(p.n_vars);
    e[17] = 1.0;  // a state coefficient slot; Q = 1
    CHECK(cost_of(p, e) == doctest::Approx(cfg.Q).epsilon(1e-15));

    Eigen::VectorXd witness = uncontrolled_solution(model, cfg, {0.2, 0.3}, p);
    QPSolution sol = solve(p.qp());
    CHECK(cost_of(p, witness) >= cost_of(p, sol.x) - 1e-12);
    CHECK(constraint_residual(p, sol.x) <= 1e-8);
}

TEST_CASE("locality mask enumeration") {
    SynthesisConfig cfg;
    KernelModel model = build_model(1.5, 16, cfg.domain, cfg.k);

    LocalitySpec unbounded{1, 1e9};
    CHECK(locality_mask(model, {0.1, 0.1}, unbounded).size() == 16);

    // Disturbance exactly on an actuator, radius below the 1.0 grid spacing.
    LocalitySpec tight{1, 0.9};
    std::vector<int> only = locality_mask(model, model.actuators[10], tight);
    REQUIRE(only.size() == 1);
    CHECK(only[0] == 10);

    // Reference disturbance, 1-norm radius 2: hand enumeration.
    LocalitySpec loc{1, 2.0};
    std::vector<int> mask = locality_mask(model, {-0.26, 0.56}, loc);
    const std::vector<int> expected{2, 5, 6, 7, 9, 10, 11, 14};
    CHECK(mask == expected);
}

TEST_CASE("mask equals column removal with pinned gains") {
    SynthesisConfig cfg;
    cfg.k = 8;
    KernelModel model = build_model(1.5, 16, cfg.domain, cfg.k);
    const Point2 zt{-0.26, 0.56};

    SynthesisConfig masked_cfg = cfg;
    masked_cfg.locality = LocalitySpec{1, 2.0};
    SLPProblem masked = assemble(model, masked_cfg, zt);
    QPSolution masked_sol = solve(masked.qp());

    SLPProblem full = assemble(model, cfg, zt);
    std::vector<int> keep = locality_mask(model, zt, *masked_cfg.locality);
    // Pin every gain outside the mask to zero through extra rows.
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < full.A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(full.A, col); it; ++it)
            trips.emplace_back(int(it.row()), int(it.col()), it.value());
    int extra = 0;
    for (int t = 0; t < full.T; ++t)
        for (int l = 0; l < full.n_u; ++l)
            if (!std::binary_search(keep.begin(), keep.end(), l))
                trips.emplace_back(full.n_rows + extra++, full.u_var(t, l), 1.0);
    Eigen::SparseMatrix<double> A2(full.n_rows + extra, full.n_vars);
    A2.setFromTriplets(trips.begin(), trips.end());
    EqConstrainedQP pinned{full.cost_diag,A2,
                            (Eigen::VectorXd(full.n_rows + extra) << full.rhs,
                             Eigen::VectorXd::Zero(extra))
                                .finished()};
    QPSolution pinned_sol = solve(pinned);

    CHECK(cost_of(masked, masked_sol.x) ==
          doctest::Approx(pinned_sol.x.dot(pinned.H_diag.asDiagonal() * pinned_sol.x))
              .epsilon(1e-8));
}

TEST_CASE("empty mask leaves the pure rollout") {
    SynthesisConfig cfg;
    cfg.k = 6;
    cfg.locality = LocalitySpec{1, 0.05};
    KernelModel model = build_model(1.5, 4, cfg.domain, cfg.k);
    const Point2 zt{0.11, -0.07};  // far from every actuator at radius 0.05
    SLPProblem p = assemble(model, cfg, zt);
    CHECK(p.active.empty());
    CHECK(p.empty_mask_warning);
    QPSolution sol = solve(p.qp());
    Eigen::VectorXd witness = uncontrolled_solution(model, cfg, zt, p);
    CHECK((sol.x - witness).cwiseAbs().maxCoeff() <= 1e-8);
}

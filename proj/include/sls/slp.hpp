#pragma once

// Per-disturbance system level parameterization: linear equality constraints
// tying each time step's state coefficients to the previous step plus the
// actuation, with a diagonal quadratic cost.
//
// Variable layout: state coefficient blocks for t = 1..T (4(k+1)^2 each),
// then actuator gain blocks for t = 0..T-1 (only unmasked actuators).
// Row group t (t = 1..T) constrains the step into time t:
//   t = 1 :  alpha(1) - sum_l b_l * u_l(0)                    = shifted kernel at zt
//   t >= 2:  alpha(t) - conv[alpha(t-1)] - sum_l b_l * u_l(t-1) = 0

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sls/model.hpp"
#include "sls/qpsolve.hpp"

namespace sls {

struct SLPProblem {
    Point2 zt;
    int T = 0;
    int k = 0;
    int n_u = 0;                 // actuators in the model
    std::vector<int> active;     // unmasked actuator ids, ascending
    int n_alpha = 0;             // coefficients per time step
    int n_rows = 0;
    int n_vars = 0;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd rhs;
    Eigen::VectorXd cost_diag;
    bool empty_mask_warning = false;

    int alpha_var(int t, int j) const { return (t - 1) * n_alpha + j; }
    int u_var(int t, int pos) const { return T * n_alpha + t * int(active.size()) + pos; }

    EqConstrainedQP qp() const { return {cost_diag, A, rhs}; }
};

// Actuators within the locality radius of zt (all of them when the radius is
// infinite). norm selects the 1- or 2-norm ball.
std::vector<int> locality_mask(const KernelModel& model, Point2 zt, const LocalitySpec& loc);

SLPProblem assemble(const KernelModel& model, const SynthesisConfig& cfg, Point2 zt);

// sum_j cost_diag[j] * x[j]^2
double cost_of(const SLPProblem& problem, const Eigen::VectorXd& x);

// The always-feasible point with zero actuation: states follow the spectral
// powers of the shifted kernel. Index layout matches the problem's.
Eigen::VectorXd uncontrolled_solution(const KernelModel& model, const SynthesisConfig& cfg,
                                      Point2 zt, const SLPProblem& problem);

}  // namespace sls

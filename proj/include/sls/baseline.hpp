#pragma once

// Discretize-then-optimize comparator: collocate the integral operator on a
// spatial lattice, run finite-dimensional SLS on the resulting matrix system,
// and score the discrete controller inside the continuous-space simulator.

#include <vector>

#include <Eigen/Dense>

#include "sls/model.hpp"

namespace sls {

struct FiniteDimSystem {
    double dx = 0.0;
    int nodes_per_axis = 0;
    std::vector<Point2> grid;           // z = z_min + i*dx per axis, half open
    Eigen::MatrixXd A_mat;              // a(z_i - z_j) * dx^2
    Eigen::MatrixXd B_mat;              // column l: b(l, z_i) at the snapped actuator
    std::vector<int> actuator_nodes;    // lattice index each actuator snapped to
    double state_weight_unit = 1.0;     // makes the lattice state cost commensurate
                                        // with the coefficient-space cost

    int n_x() const { return static_cast<int>(grid.size()); }
    int n_u() const { return static_cast<int>(B_mat.cols()); }
};

// Midpoint-rule collocation; dx must divide both domain widths. Actuators
// snap to the nearest lattice node (ties toward the lower coordinate).
FiniteDimSystem discretize(const KernelModel& model, double dx);

int nearest_node(const FiniteDimSystem& sys, Point2 z);

// Impulse-response maps of the closed loop: state maps for t = 1..T (the
// t = 0 map is the identity) and input maps for t = 0..T-1.
struct FiniteCLMs {
    int T = 0;
    std::vector<Eigen::MatrixXd> phi_x;  // n_x x n_x each
    std::vector<Eigen::MatrixXd> phi_u;  // n_u x n_x each
    double objective = 0.0;
    double max_primal_residual = 0.0;
};

// Column-separable equality-constrained least squares under the LQR cost,
// one shared factorization across all disturbance columns. scale_state_cost
// multiplies the state weight by state_weight_unit (dx^2 times the basis
// normalization 4/(lambda1*lambda2)) so the discrete cost trades state
// against input the same way the coefficient-space cost does; pass false
// for the raw unscaled comparison.
FiniteCLMs finite_sls(const FiniteDimSystem& sys, double Q, double R, int T,
                      bool scale_state_cost = true);

struct FiniteTrajectory {
    std::vector<Eigen::VectorXd> states;  // t = 0..T
    std::vector<Eigen::VectorXd> inputs;  // t = 0..T-1
};

// Internal-model controller rolled out against the discrete dynamics from
// initial disturbance w. With an exact model the innovations vanish and the
// trajectory reproduces the maps applied to w.
FiniteTrajectory discrete_closed_loop(const FiniteDimSystem& sys, const FiniteCLMs& clms,
                                      const Eigen::VectorXd& w);

// Continuous-space scoring round trip: a unit point disturbance at zt enters
// the true dynamics; the discrete controller reads lattice samples of the
// grid state, updates its internal model, and emits actuator gains that act
// through the true influence fields. Returns per-step % gains for t = 1..T.
std::vector<double> evaluate_in_continuous(const FiniteDimSystem& sys, const FiniteCLMs& clms,
                                           const KernelModel& model, Point2 zt, int grid_n);

double average_gain(const std::vector<double>& per_step);

}  // namespace sls

#pragma once

// Finite-dimensional verification of the closed-loop-map parameterization:
// build CLMs from a causal controller over a finite horizon, check the
// affine identities they must satisfy, recover the controller back, and
// confirm trajectory equivalence. Everything is plain block-matrix
// arithmetic on horizon-stacked operators.

#include <Eigen/Dense>

namespace sls {

// Horizon-stacked system. Blocks index times 0..T. A_blk and B_blk carry the
// per-step maps on the first superdiagonal (strictly upper block-bidiagonal),
// C_blk is block diagonal, K_blk is the upper block-triangular controller
// (state gain for the state-feedback path, measurement gain for the
// output-feedback path).
struct StackedOperators {
    int T = 0;
    int n = 0, n_u = 0, n_y = 0;
    Eigen::MatrixXd A_blk;  // (T+1)n x (T+1)n
    Eigen::MatrixXd B_blk;  // (T+1)n_u x (T+1)n
    Eigen::MatrixXd C_blk;  // (T+1)n x (T+1)n_y
    Eigen::MatrixXd K_blk;  // (T+1)n x (T+1)n_u  or  (T+1)n_y x (T+1)n_u
};

StackedOperators stack_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& C, int T);

struct CLMSet {
    Eigen::MatrixXd theta_x, theta_u;                       // state feedback
    Eigen::MatrixXd theta_xx, theta_xy, theta_ux, theta_uy; // output feedback
};

// theta_x = (I - A_blk - K_blk B_blk)^{-1}, theta_u = theta_x K_blk.
CLMSet clm_from_controller_sf(const StackedOperators& ops);

// With At = I - A_blk - C_blk K_blk B_blk:
//   theta_xx = At^{-1}, theta_xy = K_blk B_blk At^{-1},
//   theta_ux = At^{-1} C_blk K_blk, theta_uy = theta_xy C_blk K_blk + K_blk.
CLMSet clm_from_controller_of(const StackedOperators& ops);

// Max-abs residuals of the affine identities the CLMs must satisfy, plus the
// controller-recovery error.
double sf_identity_residual(const StackedOperators& ops, const CLMSet& clms);
double sf_recovery_residual(const StackedOperators& ops, const CLMSet& clms);
double of_identity_residual(const StackedOperators& ops, const CLMSet& clms);
double of_recovery_residual(const StackedOperators& ops, const CLMSet& clms);

struct TrajectoryReport {
    bool pass = false;
    double dynamics_residual = 0.0;
    double controller_residual = 0.0;
};

// State feedback: x = theta_x' w and u = theta_u' w must satisfy
// x = A_blk' x + B_blk' u + w and u = K_blk' x.
TrajectoryReport trajectory_equivalence(const StackedOperators& ops, const CLMSet& clms,
                                        const Eigen::VectorXd& w, double tol = 1e-10);

// Output feedback with process and measurement disturbances.
TrajectoryReport trajectory_equivalence(const StackedOperators& ops, const CLMSet& clms,
                                        const Eigen::VectorXd& w_x, const Eigen::VectorXd& w_y,
                                        double tol = 1e-10);

struct OracleSummary {
    int systems = 0;
    int failures = 0;
    double worst_residual = 0.0;
};

// Randomized suite: per draw, both feedback paths are checked in the stacked
// convention above and re-checked in the transposed (lower-triangular)
// convention; trajectory equivalence runs on random disturbances. A draw
// counts as a failure when any residual exceeds tol.
OracleSummary run_oracle_suite(int n_systems, unsigned seed, double tol = 1e-10);

}  // namespace sls

#include "sls/oracle.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace sls {

namespace {

Eigen::MatrixXd superdiag(const Eigen::MatrixXd& M, int T) {
    const Eigen::Index r = M.rows(), c = M.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero((T + 1) * r, (T + 1) * c);
    for (int t = 0; t < T; ++t) out.block(t * r, (t + 1) * c, r, c) = M;
    return out;
}

Eigen::MatrixXd blockdiag(const Eigen::MatrixXd& M, int T) {
    const Eigen::Index r = M.rows(), c = M.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero((T + 1) * r, (T + 1) * c);
    for (int t = 0; t <= T; ++t) out.block(t * r, t * c, r, c) = M;
    return out;
}

Eigen::MatrixXd identity_like(const StackedOperators& ops) {
    return Eigen::MatrixXd::Identity((ops.T + 1) * ops.n, (ops.T + 1) * ops.n);
}

double max_abs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

StackedOperators stack_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& C, int T) {
    if (T < 1) throw std::invalid_argument("horizon must be at least 1");
    if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("B row count must match A");
    if (C.size() && C.cols() != A.rows()) throw std::invalid_argument("C column count must match A");
    StackedOperators ops;
    ops.T = T;
    ops.n = static_cast<int>(A.rows());
    ops.n_u = static_cast<int>(B.cols());
    ops.n_y = C.size() ? static_cast<int>(C.rows()) : 0;
    ops.A_blk = superdiag(A.transpose(), T);
    ops.B_blk = superdiag(B.transpose(), T);
    if (C.size()) ops.C_blk = blockdiag(C.transpose(), T);
    return ops;
}

CLMSet clm_from_controller_sf(const StackedOperators& ops) {
    CLMSet clms;
    Eigen::MatrixXd M = identity_like(ops) - ops.A_blk - ops.K_blk * ops.B_blk;
    clms.theta_x = M.partialPivLu().inverse();
    clms.theta_u = clms.theta_x * ops.K_blk;
    return clms;
}

CLMSet clm_from_controller_of(const StackedOperators& ops) {
    CLMSet clms;
    Eigen::MatrixXd At = identity_like(ops) - ops.A_blk - ops.C_blk * ops.K_blk * ops.B_blk;
    clms.theta_xx = At.partialPivLu().inverse();
    clms.theta_xy = ops.K_blk * ops.B_blk * clms.theta_xx;
    clms.theta_ux = clms.theta_xx * ops.C_blk * ops.K_blk;
    clms.theta_uy = clms.theta_xy * ops.C_blk * ops.K_blk + ops.K_blk;
    return clms;
}

double sf_identity_residual(const StackedOperators& ops, const CLMSet& clms) {
    Eigen::MatrixXd I = identity_like(ops);
    return max_abs(clms.theta_x * (I - ops.A_blk) - clms.theta_u * ops.B_blk - I);
}

double sf_recovery_residual(const StackedOperators& ops, const CLMSet& clms) {
    Eigen::MatrixXd K = clms.theta_x.partialPivLu().solve(clms.theta_u);
    return max_abs(K - ops.K_blk);
}

double of_identity_residual(const StackedOperators& ops, const CLMSet& clms) {
    Eigen::MatrixXd I = identity_like(ops);
    Eigen::MatrixXd IA = I - ops.A_blk;
    double r = max_abs(clms.theta_xx * IA - clms.theta_ux * ops.B_blk - I);
    r = std::max(r, max_abs(clms.theta_xy * IA - clms.theta_uy * ops.B_blk));
    r = std::max(r, max_abs(IA * clms.theta_xx - ops.C_blk * clms.theta_xy - I));
    r = std::max(r, max_abs(IA * clms.theta_ux - ops.C_blk * clms.theta_uy));
    return r;
}

double of_recovery_residual(const StackedOperators& ops, const CLMSet& clms) {
    Eigen::MatrixXd K =
        clms.theta_uy - clms.theta_xy * clms.theta_xx.partialPivLu().solve(clms.theta_ux);
    return max_abs(K - ops.K_blk);
}

TrajectoryReport trajectory_equivalence(const StackedOperators& ops, const CLMSet& clms,
                                        const Eigen::VectorXd& w, double tol) {
    if (w.size() != clms.theta_x.rows()) throw std::invalid_argument("disturbance length mismatch");
    Eigen::VectorXd x = clms.theta_x.transpose() * w;
    Eigen::VectorXd u = clms.theta_u.transpose() * w;
    TrajectoryReport rep;
    rep.dynamics_residual =
        (x - ops.A_blk.transpose() * x - ops.B_blk.transpose() * u - w).cwiseAbs().maxCoeff();
    rep.controller_residual = (u - ops.K_blk.transpose() * x).cwiseAbs().maxCoeff();
    rep.pass = rep.dynamics_residual <= tol && rep.controller_residual <= tol;
    return rep;
}

TrajectoryReport trajectory_equivalence(const StackedOperators& ops, const CLMSet& clms,
                                        const Eigen::VectorXd& w_x, const Eigen::VectorXd& w_y,
                                        double tol) {
    if (w_x.size() != clms.theta_xx.rows() || w_y.size() != clms.theta_xy.rows())
        throw std::invalid_argument("disturbance length mismatch");
    Eigen::VectorXd x = clms.theta_xx.transpose() * w_x + clms.theta_xy.transpose() * w_y;
    Eigen::VectorXd u = clms.theta_ux.transpose() * w_x + clms.theta_uy.transpose() * w_y;
    Eigen::VectorXd y = ops.C_blk.transpose() * x + w_y;
    TrajectoryReport rep;
    rep.dynamics_residual =
        (x - ops.A_blk.transpose() * x - ops.B_blk.transpose() * u - w_x).cwiseAbs().maxCoeff();
    rep.controller_residual = (u - ops.K_blk.transpose() * y).cwiseAbs().maxCoeff();
    rep.pass = rep.dynamics_residual <= tol && rep.controller_residual <= tol;
    return rep;
}

namespace {

Eigen::MatrixXd random_matrix(std::mt19937& rng, int r, int c) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = dist(rng);
    return M;
}

void rescale_spectral_radius(Eigen::MatrixXd& A, double target) {
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 1e-12) A *= target / rho;
}

// Upper block-triangular controller stack, diagonal blocks included.
Eigen::MatrixXd random_controller(std::mt19937& rng, int T, int rows, int cols) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero((T + 1) * rows, (T + 1) * cols);
    for (int s = 0; s <= T; ++s)
        for (int t = s; t <= T; ++t) K.block(s * rows, t * cols, rows, cols) = random_matrix(rng, rows, cols);
    return K;
}

// Lower-triangular transcription of the same construction: A and B on the
// first subdiagonal, lower block-triangular K acting on the left.
double direct_convention_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                  const Eigen::MatrixXd& K_upper, int T) {
    const int n = static_cast<int>(A.rows()), n_u = static_cast<int>(B.cols());
    const int N = (T + 1) * n, NU = (T + 1) * n_u;
    Eigen::MatrixXd Ad = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd Bd = Eigen::MatrixXd::Zero(N, NU);
    for (int t = 0; t < T; ++t) {
        Ad.block((t + 1) * n, t * n, n, n) = A;
        Bd.block((t + 1) * n, t * n_u, n, n_u) = B;
    }
    Eigen::MatrixXd Kd = K_upper.transpose();  // lower block-triangular, (T+1)n_u x (T+1)n
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
    Eigen::MatrixXd phi_x = (I - Ad - Bd * Kd).partialPivLu().inverse();
    Eigen::MatrixXd phi_u = Kd * phi_x;
    double r = max_abs((I - Ad) * phi_x - Bd * phi_u - I);
    Eigen::MatrixXd K_rec = phi_u * phi_x.partialPivLu().inverse();
    return std::max(r, max_abs(K_rec - Kd));
}

}  // namespace

OracleSummary run_oracle_suite(int n_systems, unsigned seed, double tol) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dim_n(1, 4), dim_io(1, 3), dim_T(1, 4);
    OracleSummary sum;
    for (int s = 0; s < n_systems; ++s) {
        const int n = dim_n(rng), n_u = dim_io(rng), n_y = dim_io(rng), T = dim_T(rng);
        Eigen::MatrixXd A = random_matrix(rng, n, n);
        rescale_spectral_radius(A, 0.9);
        Eigen::MatrixXd B = random_matrix(rng, n, n_u);
        Eigen::MatrixXd C = random_matrix(rng, n_y, n);

        double worst = 0.0;

        StackedOperators sf = stack_system(A, B, Eigen::MatrixXd(), T);
        sf.K_blk = random_controller(rng, T, n, n_u);
        CLMSet sf_clms = clm_from_controller_sf(sf);
        worst = std::max(worst, sf_identity_residual(sf, sf_clms));
        worst = std::max(worst, sf_recovery_residual(sf, sf_clms));
        TrajectoryReport tr =
            trajectory_equivalence(sf, sf_clms, random_matrix(rng, (T + 1) * n, 1), tol);
        worst = std::max({worst, tr.dynamics_residual, tr.controller_residual});
        worst = std::max(worst, direct_convention_residual(A, B, sf.K_blk, T));

        StackedOperators of = stack_system(A, B, C, T);
        of.K_blk = random_controller(rng, T, n_y, n_u);
        CLMSet of_clms = clm_from_controller_of(of);
        worst = std::max(worst, of_identity_residual(of, of_clms));
        worst = std::max(worst, of_recovery_residual(of, of_clms));
        TrajectoryReport tro = trajectory_equivalence(of, of_clms, random_matrix(rng, (T + 1) * n, 1),
                                                      random_matrix(rng, (T + 1) * n_y, 1), tol);
        worst = std::max({worst, tro.dynamics_residual, tro.controller_residual});

        sum.systems += 1;
        sum.worst_residual = std::max(sum.worst_residual, worst);
        if (worst > tol) sum.failures += 1;
    }
    return sum;
}

}  // namespace sls

#pragma once

// Equality-constrained quadratic programming: minimize x'Hx subject to Ax=b
// with diagonal H, solved through the KKT system
//   [2H A'] [x ]   [0]
//   [A  0 ] [mu] = [b].
// Small systems go through dense partial-pivot LU, large ones through sparse
// LU. A factorization can be reused across right-hand sides sharing (H, A).

#include <iosfwd>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sls {

struct EqConstrainedQP {
    Eigen::VectorXd H_diag;         // length n
    Eigen::SparseMatrix<double> A;  // m x n
    Eigen::VectorXd b;              // length m
};

struct QPSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd multipliers;
    double primal_residual = 0.0;        // |Ax - b|_inf
    double stationarity_residual = 0.0;  // |2Hx + A'mu|_inf
};

class QPError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class KKTPath { Auto, Dense, Sparse };

// Factors the KKT matrix of (H, A) once; solve_rhs back-substitutes for any
// constraint right-hand side. bump_zero_diag adds 1e-10 to exactly-zero cost
// entries so zero-weight coordinates get the minimum-norm tie-break.
class KKTFactorization {
  public:
    KKTFactorization(const EqConstrainedQP& qp, KKTPath path = KKTPath::Auto,
                     bool bump_zero_diag = false);
    ~KKTFactorization();
    KKTFactorization(KKTFactorization&&) noexcept;

    QPSolution solve_rhs(const Eigen::VectorXd& b) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot solves. solve expects a cost that is positive definite on the
// feasible subspace; solve_with_R_zero additionally tie-breaks coordinates
// with exactly zero weight toward minimum norm.
QPSolution solve(const EqConstrainedQP& qp, KKTPath path = KKTPath::Auto);
QPSolution solve_with_R_zero(const EqConstrainedQP& qp, KKTPath path = KKTPath::Auto);

// Sparse-triplet CSV dump of (H, A, b) for external cross-checks.
// Rows: term,i,j,value with term one of H, A, b.
void write_qp_triplets(std::ostream& os, const EqConstrainedQP& qp);

}  // namespace sls

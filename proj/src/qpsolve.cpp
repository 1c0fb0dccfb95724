#include "sls/qpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "sls/csv.hpp"

namespace sls {

namespace {

constexpr double kZeroDiagBump = 1e-10;
constexpr double kPivotThreshold = 1e-10;
constexpr double kPrimalTol = 1e-8;
constexpr double kStationarityTol = 1e-6;
// Dense LU is fine up to a few thousand KKT unknowns; beyond that the
// block-sparse structure pays off.
constexpr int kDenseLimit = 5000;

Eigen::SparseMatrix<double> kkt_sparse(const Eigen::VectorXd& h, const Eigen::SparseMatrix<double>& A) {
    const int n = int(A.cols());
    const int m = int(A.rows());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(n) + 2 * std::size_t(A.nonZeros()));
    for (int j = 0; j < n; ++j)
        if (h[j] != 0.0) trip.emplace_back(j, j, 2.0 * h[j]);
    for (int outer = 0; outer < A.outerSize(); ++outer) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, outer); it; ++it) {
            trip.emplace_back(n + int(it.row()), int(it.col()), it.value());
            trip.emplace_back(int(it.col()), n + int(it.row()), it.value());
        }
    }
    Eigen::SparseMatrix<double> K(n + m, n + m);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    return K;
}

}  // namespace

struct KKTFactorization::Impl {
    Eigen::VectorXd h;              // effective diagonal cost
    Eigen::SparseMatrix<double> A;  // full constraint matrix (residual checks)
    int n = 0, m = 0;
    bool dense = false;

    // dense path; kept_rows is empty when no elimination was needed
    Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu;
    Eigen::MatrixXd dense_kkt;
    std::vector<int> kept_rows;

    // sparse path
    Eigen::SparseLU<Eigen::SparseMatrix<double>> sparse_lu;
    Eigen::SparseMatrix<double> sparse_kkt;

    void factor_dense(const Eigen::MatrixXd& Ad) {
        const int mm = int(Ad.rows());
        dense_kkt = Eigen::MatrixXd::Zero(n + mm, n + mm);
        for (int j = 0; j < n; ++j) dense_kkt(j, j) = 2.0 * h[j];
        dense_kkt.block(n, 0, mm, n) = Ad;
        dense_kkt.block(0, n, n, mm) = Ad.transpose();
        dense_lu.compute(dense_kkt);
    }

    // Partial-pivot LU does not flag exact singularity at factor time, so
    // probe with a fixed right-hand side and inspect the backward error.
    bool dense_factor_ok() const {
        const Eigen::VectorXd probe = Eigen::VectorXd::Ones(dense_kkt.rows());
        const Eigen::VectorXd sol = dense_lu.solve(probe);
        if (!sol.array().isFinite().all()) return false;
        const double scale =
            dense_kkt.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff() + 1.0;
        return (dense_kkt * sol - probe).cwiseAbs().maxCoeff() <= 1e-8 * scale;
    }

    // Rank-revealing pass over A': keeps a maximal independent row subset.
    void eliminate_rows() {
        Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ad.transpose());
        qr.setThreshold(kPivotThreshold);
        const int rank = int(qr.rank());
        if (rank == m)
            throw QPError("qpsolve: KKT system singular although constraints have full row rank; "
                          "cost is degenerate on the feasible subspace");
        kept_rows.assign(std::size_t(rank), 0);
        const auto& perm = qr.colsPermutation().indices();
        for (int i = 0; i < rank; ++i) kept_rows[std::size_t(i)] = perm[i];
        std::sort(kept_rows.begin(), kept_rows.end());
        Eigen::MatrixXd Ak(rank, n);
        for (int i = 0; i < rank; ++i) Ak.row(i) = Ad.row(kept_rows[std::size_t(i)]);
        factor_dense(Ak);
        if (!dense_factor_ok())
            throw QPError("qpsolve: KKT system singular; constraint rank defect " +
                          std::to_string(m - rank) + " of " + std::to_string(m) + " rows");
    }
};

KKTFactorization::KKTFactorization(const EqConstrainedQP& qp, KKTPath path, bool bump_zero_diag) {
    impl_ = std::make_unique<Impl>();
    impl_->n = int(qp.A.cols());
    impl_->m = int(qp.A.rows());
    if (qp.H_diag.size() != impl_->n) throw QPError("qpsolve: H diagonal length mismatch");
    if (qp.b.size() != impl_->m) throw QPError("qpsolve: right-hand side length mismatch");
    if (!qp.H_diag.array().isFinite().all() || (qp.H_diag.array() < 0.0).any())
        throw QPError("qpsolve: cost diagonal must be finite and nonnegative");
    impl_->h = qp.H_diag;
    if (bump_zero_diag)
        for (int j = 0; j < impl_->n; ++j)
            if (impl_->h[j] == 0.0) impl_->h[j] = kZeroDiagBump;
    impl_->A = qp.A;
    impl_->A.makeCompressed();

    const bool dense = path == KKTPath::Dense ||
                       (path == KKTPath::Auto && impl_->n + impl_->m < kDenseLimit);
    impl_->dense = dense;
    if (dense) {
        impl_->factor_dense(Eigen::MatrixXd(impl_->A));
        if (!impl_->dense_factor_ok()) impl_->eliminate_rows();
    } else {
        impl_->sparse_kkt = kkt_sparse(impl_->h, impl_->A);
        impl_->sparse_lu.compute(impl_->sparse_kkt);
        if (impl_->sparse_lu.info() != Eigen::Success)
            throw QPError("qpsolve: sparse KKT factorization failed; "
                          "constraint rows are rank-deficient or the system is singular");
    }
}

KKTFactorization::~KKTFactorization() = default;
KKTFactorization::KKTFactorization(KKTFactorization&&) noexcept = default;

QPSolution KKTFactorization::solve_rhs(const Eigen::VectorXd& b) const {
    const Impl& im = *impl_;
    if (b.size() != im.m) throw QPError("qpsolve: right-hand side length mismatch");
    if (!b.array().isFinite().all()) throw QPError("qpsolve: non-finite right-hand side");

    Eigen::VectorXd x, mu;
    if (im.dense) {
        const bool reduced = !im.kept_rows.empty();
        const int mr = reduced ? int(im.kept_rows.size()) : im.m;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.n + mr);
        if (reduced) {
            for (int i = 0; i < mr; ++i) rhs[im.n + i] = b[im.kept_rows[std::size_t(i)]];
        } else {
            rhs.tail(mr) = b;
        }
        Eigen::VectorXd sol = im.dense_lu.solve(rhs);
        sol += im.dense_lu.solve(rhs - im.dense_kkt * sol);  // one refinement pass
        if (!sol.array().isFinite().all())
            throw QPError("qpsolve: dense KKT solve produced non-finite values (singular system)");
        x = sol.head(im.n);
        mu = Eigen::VectorXd::Zero(im.m);
        if (reduced) {
            for (int i = 0; i < mr; ++i) mu[im.kept_rows[std::size_t(i)]] = sol[im.n + i];
        } else {
            mu = sol.tail(im.m);
        }
    } else {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.n + im.m);
        rhs.tail(im.m) = b;
        Eigen::VectorXd sol = im.sparse_lu.solve(rhs);
        sol += im.sparse_lu.solve(rhs - im.sparse_kkt * sol);
        if (!sol.array().isFinite().all())
            throw QPError("qpsolve: sparse KKT solve produced non-finite values");
        x = sol.head(im.n);
        mu = sol.tail(im.m);
    }

    QPSolution out;
    out.x = std::move(x);
    out.multipliers = std::move(mu);
    out.primal_residual = im.m > 0 ? (im.A * out.x - b).cwiseAbs().maxCoeff() : 0.0;
    Eigen::VectorXd stat = 2.0 * im.h.cwiseProduct(out.x) + im.A.transpose() * out.multipliers;
    out.stationarity_residual = im.n > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;

    const double b_scale = 1.0 + (im.m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
    if (out.primal_residual > kPrimalTol)
        throw QPError("qpsolve: primal residual " + std::to_string(out.primal_residual) +
                      " exceeds tolerance (inconsistent or ill-conditioned constraints)");
    if (out.stationarity_residual > kStationarityTol * b_scale)
        throw QPError("qpsolve: stationarity residual " + std::to_string(out.stationarity_residual) +
                      " exceeds tolerance");
    return out;
}

QPSolution solve(const EqConstrainedQP& qp, KKTPath path) {
    return KKTFactorization(qp, path, false).solve_rhs(qp.b);
}

QPSolution solve_with_R_zero(const EqConstrainedQP& qp, KKTPath path) {
    return KKTFactorization(qp, path, true).solve_rhs(qp.b);
}

void write_qp_triplets(std::ostream& os, const EqConstrainedQP& qp) {
    os << "term,i,j,value\n";
    for (int j = 0; j < qp.H_diag.size(); ++j)
        os << "H," << j << "," << j << "," << fmt17(qp.H_diag[j]) << "\n";
    for (int outer = 0; outer < qp.A.outerSize(); ++outer)
        for (Eigen::SparseMatrix<double>::InnerIterator it(qp.A, outer); it; ++it)
            os << "A," << it.row() << "," << it.col() << "," << fmt17(it.value()) << "\n";
    for (int i = 0; i < qp.b.size(); ++i) os << "b," << i << ",0," << fmt17(qp.b[i]) << "\n";
}

}  // namespace sls

#include "sls/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sls/qpsolve.hpp"
#include "sls/simulate.hpp"

namespace sls {

namespace {

int axis_nodes(double width, double dx) {
    const double ratio = width / dx;
    const int n = static_cast<int>(std::lround(ratio));
    if (n < 2 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("dx does not divide the domain width");
    return n;
}

// Nearest lattice index with ties toward the lower coordinate.
int snap_axis(double z, double z_min, double dx, int n) {
    const double v = (z - z_min) / dx;
    const int lo = static_cast<int>(std::floor(v));
    const double frac = v - lo;
    int idx = (frac > 0.5 + 1e-9) ? lo + 1 : lo;
    return std::min(std::max(idx, 0), n - 1);
}

}  // namespace

FiniteDimSystem discretize(const KernelModel& model, double dx) {
    if (dx <= 0.0) throw std::invalid_argument("dx must be positive");
    const Domain2D& dom = model.domain;
    const int n1 = axis_nodes(dom.width1(), dx);
    const int n2 = axis_nodes(dom.width2(), dx);

    FiniteDimSystem sys;
    sys.dx = dx;
    sys.nodes_per_axis = n1;
    sys.grid.reserve(static_cast<size_t>(n1) * n2);
    for (int p = 0; p < n1; ++p)
        for (int q = 0; q < n2; ++q)
            sys.grid.push_back({dom.z1_min + p * dx, dom.z2_min + q * dx});

    const int n_x = static_cast<int>(sys.grid.size());
    sys.A_mat.resize(n_x, n_x);
    const double area = dx * dx;
    for (int i = 0; i < n_x; ++i)
        for (int j = 0; j < n_x; ++j)
            sys.A_mat(i, j) = model.a_raw(sys.grid[i] - sys.grid[j]) * area;

    sys.state_weight_unit = area * 4.0 / (dom.lambda1 * dom.lambda2);

    const int n_u = model.n_u();
    sys.B_mat.resize(n_x, n_u);
    sys.actuator_nodes.reserve(n_u);
    for (int l = 0; l < n_u; ++l) {
        const Point2 za = model.actuators[l];
        const int p = snap_axis(za.z1, dom.z1_min, dx, n1);
        const int q = snap_axis(za.z2, dom.z2_min, dx, n2);
        const int node = p * n2 + q;
        sys.actuator_nodes.push_back(node);
        const Point2 zs = sys.grid[node];
        for (int i = 0; i < n_x; ++i) sys.B_mat(i, l) = -model.a_raw(sys.grid[i] - zs);
    }
    return sys;
}

int nearest_node(const FiniteDimSystem& sys, Point2 z) {
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < sys.n_x(); ++i) {
        const Point2 d = sys.grid[i] - z;
        const double dist = d.z1 * d.z1 + d.z2 * d.z2;
        if (dist < best - 1e-15) {
            best = dist;
            best_i = i;
        }
    }
    return best_i;
}

FiniteCLMs finite_sls(const FiniteDimSystem& sys, double Q, double R, int T,
                      bool scale_state_cost) {
    if (T < 1) throw std::invalid_argument("horizon must be at least 1");
    if (Q <= 0.0 || R < 0.0) throw std::invalid_argument("require Q > 0 and R >= 0");
    const int n_x = sys.n_x(), n_u = sys.n_u();
    const int n_vars = T * (n_x + n_u);
    const int n_rows = T * n_x;
    const double Q_eff = scale_state_cost ? Q * sys.state_weight_unit : Q;

    EqConstrainedQP qp;
    qp.H_diag.resize(n_vars);
    qp.H_diag.head(T * n_x).setConstant(Q_eff);
    qp.H_diag.tail(T * n_u).setConstant(R);
    qp.b = Eigen::VectorXd::Zero(n_rows);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n_rows) + sys.A_mat.size() / 4 + n_rows * n_u / 4);
    for (int t = 0; t < T; ++t) {
        const int r0 = t * n_x;
        for (int i = 0; i < n_x; ++i) trips.emplace_back(r0 + i, t * n_x + i, 1.0);
        if (t >= 1) {
            const int c0 = (t - 1) * n_x;
            for (int j = 0; j < n_x; ++j)
                for (int i = 0; i < n_x; ++i)
                    if (sys.A_mat(i, j) != 0.0) trips.emplace_back(r0 + i, c0 + j, -sys.A_mat(i, j));
        }
        const int cu = T * n_x + t * n_u;
        for (int l = 0; l < n_u; ++l)
            for (int i = 0; i < n_x; ++i)
                if (sys.B_mat(i, l) != 0.0) trips.emplace_back(r0 + i, cu + l, -sys.B_mat(i, l));
    }
    qp.A.resize(n_rows, n_vars);
    qp.A.setFromTriplets(trips.begin(), trips.end());

    KKTFactorization fact(qp, KKTPath::Auto, R == 0.0);

    FiniteCLMs clms;
    clms.T = T;
    clms.phi_x.assign(T, Eigen::MatrixXd::Zero(n_x, n_x));
    clms.phi_u.assign(T, Eigen::MatrixXd::Zero(n_u, n_x));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_rows);
    for (int j = 0; j < n_x; ++j) {
        b.head(n_x) = sys.A_mat.col(j);
        QPSolution sol = fact.solve_rhs(b);
        for (int t = 0; t < T; ++t) {
            clms.phi_x[t].col(j) = sol.x.segment(t * n_x, n_x);
            clms.phi_u[t].col(j) = sol.x.segment(T * n_x + t * n_u, n_u);
        }
        clms.objective += sol.x.cwiseProduct(qp.H_diag.cwiseProduct(sol.x)).sum();
        clms.max_primal_residual = std::max(clms.max_primal_residual, sol.primal_residual);
    }
    return clms;
}

namespace {

// u and predicted-state sums of the internal-model realization over the
// stored innovation history.
Eigen::VectorXd control_from_innovations(const FiniteCLMs& clms,
                                         const std::vector<Eigen::VectorXd>& innov, int t, int n_u) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_u);
    for (int s = 0; s <= t; ++s) {
        const int age = t - s;
        if (age < clms.T) u += clms.phi_u[age] * innov[s];
    }
    return u;
}

Eigen::VectorXd predict_state(const FiniteCLMs& clms, const std::vector<Eigen::VectorXd>& innov,
                              int t_next, int n_x) {
    Eigen::VectorXd xp = Eigen::VectorXd::Zero(n_x);
    for (int s = 0; s < static_cast<int>(innov.size()); ++s) {
        const int age = t_next - s;
        if (age >= 1 && age <= clms.T) xp += clms.phi_x[age - 1] * innov[s];
    }
    return xp;
}

double bilinear_sample(const std::vector<double>& values, const SimGrid& g, Point2 z) {
    auto axis = [](double coord, const std::vector<double>& centers, double dx, int n, int& i0,
                   double& w) {
        double f = (coord - centers[0]) / dx;
        i0 = static_cast<int>(std::floor(f));
        i0 = std::min(std::max(i0, 0), n - 2);
        w = std::min(std::max(f - i0, 0.0), 1.0);
    };
    int p0, q0;
    double w1, w2;
    axis(z.z1, g.xs, g.dx1, g.n1, p0, w1);
    axis(z.z2, g.ys, g.dx2, g.n2, q0, w2);
    const auto v = [&](int p, int q) { return values[static_cast<size_t>(p) * g.n2 + q]; };
    return (1 - w1) * ((1 - w2) * v(p0, q0) + w2 * v(p0, q0 + 1)) +
           w1 * ((1 - w2) * v(p0 + 1, q0) + w2 * v(p0 + 1, q0 + 1));
}

}  // namespace

FiniteTrajectory discrete_closed_loop(const FiniteDimSystem& sys, const FiniteCLMs& clms,
                                      const Eigen::VectorXd& w) {
    if (w.size() != sys.n_x()) throw std::invalid_argument("disturbance length mismatch");
    FiniteTrajectory traj;
    traj.states.push_back(w);
    std::vector<Eigen::VectorXd> innov{w};
    for (int t = 0; t < clms.T; ++t) {
        Eigen::VectorXd u = control_from_innovations(clms, innov, t, sys.n_u());
        Eigen::VectorXd x_next = sys.A_mat * traj.states.back() + sys.B_mat * u;
        traj.inputs.push_back(u);
        traj.states.push_back(x_next);
        innov.push_back(x_next - predict_state(clms, innov, t + 1, sys.n_x()));
    }
    return traj;
}

std::vector<double> evaluate_in_continuous(const FiniteDimSystem& sys, const FiniteCLMs& clms,
                                           const KernelModel& model, Point2 zt, int grid_n) {
    if (!model.domain.contains(zt)) throw std::invalid_argument("disturbance outside domain");
    const int T = clms.T;
    const int n_x = sys.n_x(), n_u = sys.n_u();

    // Mass-preserving lattice image of the unit point disturbance.
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(n_x);
    w0[nearest_node(sys, zt)] = 1.0 / (sys.dx * sys.dx);
    std::vector<Eigen::VectorXd> innov{w0};

    Stepper controlled(model, grid_n);
    controlled.queue_impulse(zt, 1.0);
    Stepper open(model, grid_n);
    open.queue_impulse(zt, 1.0);
    const SimGrid& g = controlled.grid();
    const Eigen::VectorXd zero_u =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.actuators.size()));

    std::vector<double> gains;
    gains.reserve(T);
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd u = control_from_innovations(clms, innov, t, n_u);
        controlled.step(u);
        open.step(zero_u);
        const std::vector<double> state = controlled.window_state();
        const double nu = grid_norm(open.window_state());
        if (nu == 0.0)
            throw std::runtime_error("uncontrolled state vanished at step " + std::to_string(t + 1));
        gains.push_back(100.0 * (1.0 - grid_norm(state) / nu));

        if (t + 1 < T) {
            Eigen::VectorXd obs(n_x);
            for (int i = 0; i < n_x; ++i) obs[i] = bilinear_sample(state, g, sys.grid[i]);
            innov.push_back(obs - predict_state(clms, innov, t + 1, n_x));
        }
    }
    return gains;
}

double average_gain(const std::vector<double>& per_step) {
    if (per_step.empty()) throw std::invalid_argument("no per-step gains");
    double s = 0.0;
    for (double v : per_step) s += v;
    return s / per_step.size();
}

}  // namespace sls

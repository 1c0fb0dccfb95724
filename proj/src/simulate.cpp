#include "sls/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sls {

std::vector<Point2> SimGrid::points() const {
    std::vector<Point2> pts;
    pts.reserve(static_cast<size_t>(n1) * n2);
    for (int p = 0; p < n1; ++p)
        for (int q = 0; q < n2; ++q) pts.push_back({xs[p], ys[q]});
    return pts;
}

namespace {

int lattice_count(double span, double dx, const char* what) {
    const double ratio = span / dx;
    const int n = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(std::string(what) + " is not a multiple of the grid spacing");
    return n;
}

}  // namespace

SimGrid make_grid(const Domain2D& dom, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
    SimGrid g;
    g.n1 = grid_n;
    g.n2 = lattice_count(dom.width2(), dom.width1() / grid_n, "domain width");
    g.dx1 = dom.width1() / grid_n;
    g.dx2 = dom.width2() / g.n2;
    g.cn1 = lattice_count(dom.lambda1, g.dx1, "basis period");
    g.cn2 = lattice_count(dom.lambda2, g.dx2, "basis period");
    g.off1 = lattice_count(dom.z1_min + 0.5 * dom.lambda1, g.dx1, "window offset");
    g.off2 = lattice_count(dom.z2_min + 0.5 * dom.lambda2, g.dx2, "window offset");

    g.xs.resize(g.n1);
    g.ys.resize(g.n2);
    for (int p = 0; p < g.n1; ++p) g.xs[p] = dom.z1_min + (p + 0.5) * g.dx1;
    for (int q = 0; q < g.n2; ++q) g.ys[q] = dom.z2_min + (q + 0.5) * g.dx2;
    g.cxs.resize(g.cn1);
    g.cys.resize(g.cn2);
    for (int p = 0; p < g.cn1; ++p) g.cxs[p] = -0.5 * dom.lambda1 + (p + 0.5) * g.dx1;
    for (int q = 0; q < g.cn2; ++q) g.cys[q] = -0.5 * dom.lambda2 + (q + 0.5) * g.dx2;
    return g;
}

double grid_norm(const std::vector<double>& values) {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

Stepper::Stepper(const KernelModel& model, int grid_n)
    : model_(model), grid_(make_grid(model.domain, grid_n)) {
    w1_ = static_cast<int>(std::floor(model.r / grid_.dx1)) + 1;
    w2_ = static_cast<int>(std::floor(model.r / grid_.dx2)) + 1;
    if (2 * w1_ + 1 > grid_.cn1 || 2 * w2_ + 1 > grid_.cn2)
        throw std::invalid_argument("kernel support too wide for the cell lattice");
    stencil_.assign(static_cast<size_t>(2 * w1_ + 1) * (2 * w2_ + 1), 0.0);
    const double area = grid_.cell_area();
    for (int d1 = -w1_; d1 <= w1_; ++d1)
        for (int d2 = -w2_; d2 <= w2_; ++d2)
            stencil_[static_cast<size_t>(d1 + w1_) * (2 * w2_ + 1) + (d2 + w2_)] =
                model.a_raw({d1 * grid_.dx1, d2 * grid_.dx2}) * area;
    state_.assign(static_cast<size_t>(grid_.cn1) * grid_.cn2, 0.0);
    next_.assign(state_.size(), 0.0);
}

void Stepper::set_window_state(const std::vector<double>& window_values) {
    if (window_values.size() != static_cast<size_t>(grid_.n1) * grid_.n2)
        throw std::invalid_argument("window state length does not match grid size");
    std::fill(state_.begin(), state_.end(), 0.0);
    for (int p = 0; p < grid_.n1; ++p)
        for (int q = 0; q < grid_.n2; ++q)
            state_[static_cast<size_t>(p + grid_.off1) * grid_.cn2 + (q + grid_.off2)] =
                window_values[static_cast<size_t>(p) * grid_.n2 + q];
}

void Stepper::queue_impulse(Point2 zt, double weight) { pending_.push_back({zt, weight}); }

void Stepper::step(const Eigen::VectorXd& u) {
    if (u.size() != static_cast<Eigen::Index>(model_.actuators.size()))
        throw std::invalid_argument("input vector length does not match actuator count");

    // Periodic convolution against the kernel stencil.
    const int cn1 = grid_.cn1, cn2 = grid_.cn2, W2 = 2 * w2_ + 1;
    for (int p = 0; p < cn1; ++p) {
        for (int q = 0; q < cn2; ++q) {
            double acc = 0.0;
            for (int d1 = -w1_; d1 <= w1_; ++d1) {
                int s1 = p - d1;
                s1 += (s1 < 0) ? cn1 : (s1 >= cn1 ? -cn1 : 0);
                const double* row = &state_[static_cast<size_t>(s1) * cn2];
                const double* wrow = &stencil_[static_cast<size_t>(d1 + w1_) * W2];
                for (int d2 = -w2_; d2 <= w2_; ++d2) {
                    int s2 = q - d2;
                    s2 += (s2 < 0) ? cn2 : (s2 >= cn2 ? -cn2 : 0);
                    acc += wrow[d2 + w2_] * row[s2];
                }
            }
            next_[static_cast<size_t>(p) * cn2 + q] = acc;
        }
    }

    // One-step images of impulses that arrived with this step, with the
    // cell-periodic distance convention.
    for (const auto& [zt, weight] : pending_) {
        for (int p = 0; p < cn1; ++p) {
            const double d1 =
                std::remainder(grid_.cxs[p] - zt.z1, model_.domain.lambda1);
            if (std::abs(d1) > model_.r) continue;
            for (int q = 0; q < cn2; ++q) {
                const double d2 =
                    std::remainder(grid_.cys[q] - zt.z2, model_.domain.lambda2);
                next_[static_cast<size_t>(p) * cn2 + q] += weight * model_.a_raw({d1, d2});
            }
        }
    }
    pending_.clear();

    if (!u.isZero(0.0)) {
        SpectralField f = actuation_field(model_, u);
        std::vector<double> act = synthesize_tensor(f, grid_.cxs, grid_.cys, model_.domain);
        for (size_t i = 0; i < next_.size(); ++i) next_[i] += act[i];
    }

    for (double v : next_)
        if (!std::isfinite(v))
            throw std::runtime_error("simulation diverged at step " + std::to_string(t_ + 1));
    state_.swap(next_);
    ++t_;
}

std::vector<double> Stepper::window_state() const {
    std::vector<double> out(static_cast<size_t>(grid_.n1) * grid_.n2);
    for (int p = 0; p < grid_.n1; ++p)
        for (int q = 0; q < grid_.n2; ++q)
            out[static_cast<size_t>(p) * grid_.n2 + q] =
                state_[static_cast<size_t>(p + grid_.off1) * grid_.cn2 + (q + grid_.off2)];
    return out;
}

SpectralField Stepper::project_state(int k) const {
    return project_samples(state_, grid_.cxs, grid_.cys, grid_.cell_area(), k, model_.domain);
}

TrajectoryGrid rollout(const KernelModel& model, const std::vector<double>& initial,
                       const std::vector<Eigen::VectorXd>& inputs, int grid_n) {
    Stepper sim(model, grid_n);
    sim.set_window_state(initial);
    TrajectoryGrid traj;
    traj.grid = sim.grid();
    traj.inputs = inputs;
    traj.states.push_back(initial);
    for (const Eigen::VectorXd& u : inputs) {
        sim.step(u);
        traj.states.push_back(sim.window_state());
    }
    return traj;
}

TrajectoryGrid rollout(const KernelModel& model, const ImpulseInit& impulse,
                       const std::vector<Eigen::VectorXd>& inputs, int grid_n) {
    Stepper sim(model, grid_n);
    TrajectoryGrid traj;
    traj.grid = sim.grid();
    traj.inputs = inputs;
    // Displayed initial state: band-limited surrogate of the impulse. The
    // recursion does not step through it; the exact image enters at t = 1.
    SpectralField surrogate = delta_surrogate(impulse.zt, model.a_coeffs.k, model.domain);
    std::vector<double> s0 =
        synthesize_tensor(surrogate, traj.grid.xs, traj.grid.ys, model.domain);
    for (double& v : s0) v *= impulse.weight;
    traj.states.push_back(s0);

    sim.queue_impulse(impulse.zt, impulse.weight);
    for (const Eigen::VectorXd& u : inputs) {
        sim.step(u);
        traj.states.push_back(sim.window_state());
    }
    return traj;
}

std::vector<double> basis_accuracy(const DisturbanceResponse& response, const KernelModel& model,
                                   int grid_n) {
    const int T = static_cast<int>(response.alpha.size());
    TrajectoryGrid traj = rollout(model, ImpulseInit{response.zt, 1.0}, response.u_gains, grid_n);
    std::vector<double> errs;
    errs.reserve(T);
    for (int t = 1; t <= T; ++t) {
        std::vector<double> pred =
            synthesize_tensor(response.alpha[t - 1], traj.grid.xs, traj.grid.ys, model.domain);
        const std::vector<double>& ref = traj.states[t];
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < ref.size(); ++i) {
            const double d = pred[i] - ref[i];
            num += d * d;
            den += ref[i] * ref[i];
        }
        if (den == 0.0)
            throw std::runtime_error("reference state vanished at step " + std::to_string(t));
        errs.push_back(std::sqrt(num / den));
    }
    return errs;
}

std::vector<double> performance_gain(const DisturbanceResponse& response, const KernelModel& model,
                                     int grid_n) {
    const int T = static_cast<int>(response.alpha.size());
    TrajectoryGrid controlled =
        rollout(model, ImpulseInit{response.zt, 1.0}, response.u_gains, grid_n);
    std::vector<Eigen::VectorXd> zeros(
        T, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.actuators.size())));
    TrajectoryGrid open = rollout(model, ImpulseInit{response.zt, 1.0}, zeros, grid_n);
    std::vector<double> gains;
    gains.reserve(T);
    for (int t = 1; t <= T; ++t) {
        const double nu = grid_norm(open.states[t]);
        if (nu == 0.0)
            throw std::runtime_error("uncontrolled state vanished at step " + std::to_string(t));
        gains.push_back(100.0 * (1.0 - grid_norm(controlled.states[t]) / nu));
    }
    return gains;
}

TrajectoryGrid closed_loop_rollout(const KernelModel& model,
                                   const std::vector<TimedImpulse>& impulses, const PolicyFn& policy,
                                   int grid_n, int T, int k_obs) {
    if (T < 1) throw std::invalid_argument("closed loop horizon must be positive");
    for (const TimedImpulse& imp : impulses) {
        if (imp.t < 0 || imp.t >= T)
            throw std::invalid_argument("impulse time outside simulation horizon");
        if (!model.domain.contains(imp.zt))
            throw std::invalid_argument("impulse location outside domain");
    }
    Stepper sim(model, grid_n);
    TrajectoryGrid traj;
    traj.grid = sim.grid();
    traj.states.push_back(sim.window_state());
    for (int t = 0; t < T; ++t) {
        SpectralField obs = sim.project_state(k_obs);
        for (const TimedImpulse& imp : impulses) {
            if (imp.t != t) continue;
            SpectralField s = delta_surrogate(imp.zt, k_obs, model.domain);
            for (size_t j = 0; j < obs.coeffs.size(); ++j)
                obs.coeffs[j] += imp.weight * s.coeffs[j];
            sim.queue_impulse(imp.zt, imp.weight);
        }
        Eigen::VectorXd u = policy(obs);
        sim.step(u);
        traj.inputs.push_back(u);
        traj.states.push_back(sim.window_state());
    }
    return traj;
}

}  // namespace sls

#pragma once

// Independent verification path: direct-quadrature rollout of the integral
// dynamics, plus the error and performance metrics derived from it.
//
// The convolution integral runs over the full basis period cell with
// periodic wrap, because that is the operator the coefficient pipeline
// optimizes; the domain extents act as the reporting window. States are
// stepped on a cell-wide lattice and exposed restricted to the window.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sls/model.hpp"
#include "sls/synth.hpp"

namespace sls {

// Window lattice (cell centers over the domain extents) plus the enclosing
// period-cell lattice it is embedded in.
struct SimGrid {
    int n1 = 0, n2 = 0;          // window cells per axis
    double dx1 = 0.0, dx2 = 0.0;
    std::vector<double> xs, ys;  // window cell centers
    int cn1 = 0, cn2 = 0;        // cell lattice size per axis
    std::vector<double> cxs, cys;
    int off1 = 0, off2 = 0;      // window origin within the cell lattice

    double cell_area() const { return dx1 * dx2; }
    std::vector<Point2> points() const;  // window points, row-major, xs slowest
};

// The lattice spacing must tile both the window and the period cell exactly.
SimGrid make_grid(const Domain2D& dom, int grid_n);

struct TrajectoryGrid {
    SimGrid grid;
    std::vector<std::vector<double>> states;   // window-restricted, t = 0..T
    std::vector<Eigen::VectorXd> inputs;       // t = 0..T-1
};

// Unit point disturbance at zt entering the state at time 0; its one-step
// image a(. - zt) is injected exactly, so the lattice never has to represent
// the impulse itself.
struct ImpulseInit {
    Point2 zt;
    double weight = 1.0;
};

// Step-by-step engine behind the rollout functions. Holds the cell-wide
// state; impulses queued before a step contribute their exact one-step image
// to that step's result.
class Stepper {
  public:
    Stepper(const KernelModel& model, int grid_n);

    const SimGrid& grid() const { return grid_; }
    void set_window_state(const std::vector<double>& window_values);  // zero outside
    void queue_impulse(Point2 zt, double weight);
    void step(const Eigen::VectorXd& u);

    const std::vector<double>& cell_state() const { return state_; }
    std::vector<double> window_state() const;
    SpectralField project_state(int k) const;  // cell-wide projection
    int time() const { return t_; }

  private:
    const KernelModel& model_;
    SimGrid grid_;
    std::vector<double> stencil_;  // quadrature weights of the kernel, wrapped
    int w1_ = 0, w2_ = 0;
    std::vector<double> state_, next_;
    std::vector<std::pair<Point2, double>> pending_;
    int t_ = 0;
};

// Advances T = inputs.size() steps from a window initial state.
TrajectoryGrid rollout(const KernelModel& model, const std::vector<double>& initial,
                       const std::vector<Eigen::VectorXd>& inputs, int grid_n);
TrajectoryGrid rollout(const KernelModel& model, const ImpulseInit& impulse,
                       const std::vector<Eigen::VectorXd>& inputs, int grid_n);

// Per-step relative L2 error between the response's predicted state fields
// and the quadrature rollout replaying the same gains, t = 1..T, measured on
// the window.
std::vector<double> basis_accuracy(const DisturbanceResponse& response, const KernelModel& model,
                                   int grid_n);

// Per-step percentage reduction of the window state norm against the
// uncontrolled rollout from the same impulse, t = 1..T.
std::vector<double> performance_gain(const DisturbanceResponse& response, const KernelModel& model,
                                     int grid_n);

struct TimedImpulse {
    int t = 0;
    Point2 zt;
    double weight = 1.0;
};

// Closed loop: each step the policy sees the spectral projection of the
// current state (impulses arriving that step appear as band-limited
// surrogates) and returns actuator gains. Recorded states exclude the
// surrogate spikes themselves.
using PolicyFn = std::function<Eigen::VectorXd(const SpectralField&)>;
TrajectoryGrid closed_loop_rollout(const KernelModel& model,
                                   const std::vector<TimedImpulse>& impulses, const PolicyFn& policy,
                                   int grid_n, int T, int k_obs);

double grid_norm(const std::vector<double>& values);

}  // namespace sls

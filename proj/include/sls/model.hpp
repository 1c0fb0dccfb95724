#pragma once

// Concrete dynamics instance: compactly supported raised-cosine scattering
// kernel, actuator influence functions b(l,.) = -a(. - z_l), and the synthesis
// configuration shared across the pipeline.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sls/spectral.hpp"

namespace sls {

// 1/2 + 1/2*cos(pi*|z|/r) inside the support radius, zero outside.
double raised_cosine(Point2 z, double r);

struct KernelModel {
    // Default support radius keeps the degree-12 basis truncation of the
    // kernel under 0.5% relative L2 error on the default cell; much smaller
    // radii are too sharp for the basis to represent accurately.
    double r = 1.5;
    Domain2D domain;
    SpectralField a_coeffs;
    std::vector<Point2> actuators;
    std::vector<SpectralField> b_coeffs;   // one per actuator
    std::function<double(Point2)> a_raw;   // callable kernel behind a_coeffs

    int n_u() const { return int(actuators.size()); }
};

struct LocalitySpec {
    int norm = 1;          // 1 or 2
    double radius = 2.0;
};

struct SynthesisConfig {
    int T = 5;
    int k = 12;
    double Q = 1.0;
    double R = 0.5;  // balances one-step gain (~49% at defaults) against input effort
    Domain2D domain;
    std::optional<LocalitySpec> locality;
    int jobs = 1;

    void validate() const;  // throws std::invalid_argument
};

// Actuators on a uniform g x g interior grid with half-cell margins,
// g = sqrt(n_u); index l = row * g + col with the z1 coordinate as row.
std::vector<Point2> actuator_grid(int n_u, const Domain2D& dom);

// Projects the kernel and derives every b(l,.) by a negated coefficient
// shift. jobs > 1 builds the per-actuator coefficients concurrently.
KernelModel build_model(double r, int n_u, const Domain2D& dom, int k, int jobs = 1);

// Same construction with explicit actuator positions.
KernelModel build_model(double r, std::vector<Point2> actuators, const Domain2D& dom, int k,
                        int jobs = 1);

// sum_l gains[l] * b(l, z) through spectral synthesis.
double eval_actuation(const KernelModel& model, const Eigen::VectorXd& gains, Point2 z);

// Stacked actuation coefficients sum_l gains[l] * b_coeffs[l].
SpectralField actuation_field(const KernelModel& model, const Eigen::VectorXd& gains);

}  // namespace sls

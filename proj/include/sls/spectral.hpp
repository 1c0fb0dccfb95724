#pragma once

// Truncated 2D real Fourier basis on a rectangular period cell: evaluation,
// projection by midpoint quadrature, shift-of-argument transforms, and the
// per-mode application of the convolution operator.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sls {

struct Point2 {
    double z1 = 0.0;
    double z2 = 0.0;
};

inline Point2 operator-(Point2 a, Point2 b) { return {a.z1 - b.z1, a.z2 - b.z2}; }
inline Point2 operator+(Point2 a, Point2 b) { return {a.z1 + b.z1, a.z2 + b.z2}; }

// Spatial extents plus the basis periods and the quadrature resolution used
// for coefficient integrals. The periods must be at least twice the extents,
// otherwise the periodic convolution wraps back into the domain.
struct Domain2D {
    double z1_min = -2.0;
    double z1_max = 2.0;
    double z2_min = -2.0;
    double z2_max = 2.0;
    double lambda1 = 8.0;
    double lambda2 = 8.0;
    int quad_n = 512;

    double width1() const { return z1_max - z1_min; }
    double width2() const { return z2_max - z2_min; }
    bool contains(Point2 z) const {
        return z.z1 >= z1_min && z.z1 <= z1_max && z.z2 >= z2_min && z.z2 <= z2_max;
    }
    // Throws std::invalid_argument if the periods are too short for the
    // extents or quad_n cannot resolve truncation order k.
    void validate(int k) const;
};

// Basis index triple. i selects the sin/cos combination:
//   i=1: sin*sin, i=2: cos*sin, i=3: sin*cos, i=4: cos*cos
// with arguments 2*pi*m*z1/lambda1 and 2*pi*n*z2/lambda2.
struct BasisIndex {
    int m = 0;
    int n = 0;
    int i = 4;
};

// Indices whose sin factor has zero frequency are identically zero and stay
// inactive; their coefficient slots are stored but always zero.
inline bool basis_active(int m, int n, int i) {
    switch (i) {
        case 1: return m > 0 && n > 0;
        case 2: return n > 0;
        case 3: return m > 0;
        default: return true;
    }
}

// Normalization weight: 1 when m=n=0, 2 when exactly one of m,n is zero,
// 4 when both are positive.
inline double kappa(int m, int n) {
    if (m == 0 && n == 0) return 1.0;
    if (m == 0 || n == 0) return 2.0;
    return 4.0;
}

// Coefficient storage: dense array of length 4*(k+1)^2, i fastest, then n,
// then m. Inactive slots hold exact zeros.
struct SpectralField {
    int k = 0;
    std::vector<double> coeffs;

    static SpectralField zeros(int k) {
        SpectralField f;
        f.k = k;
        f.coeffs.assign(4u * std::size_t(k + 1) * std::size_t(k + 1), 0.0);
        return f;
    }
    std::size_t size() const { return coeffs.size(); }
    std::size_t index(int m, int n, int i) const {
        return (std::size_t(m) * (k + 1) + std::size_t(n)) * 4 + std::size_t(i - 1);
    }
    double& at(int m, int n, int i) { return coeffs[index(m, n, i)]; }
    double at(int m, int n, int i) const { return coeffs[index(m, n, i)]; }
};

double eval_basis(BasisIndex idx, Point2 z, const Domain2D& dom);

// Coefficients of f by tensor-product midpoint quadrature over the period
// cell, quad_n nodes per axis. Throws std::domain_error on non-finite samples.
SpectralField project(const std::function<double(Point2)>& f, int k, const Domain2D& dom);

// Same quadrature but over tensor samples given on an axis-aligned lattice
// restricted to the domain extents; the integrand is taken as zero outside.
// Used to lift simulator grid states into coefficient space.
SpectralField project_samples(const std::vector<double>& values,
                              const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              double cell_area, int k, const Domain2D& dom);

// Coefficients of z -> f(z - zt). Exact: shifting permutes energy within each
// (m,n) block through an orthogonal 4x4 mixing matrix.
SpectralField shift_coefficients(const SpectralField& f, Point2 zt, const Domain2D& dom);

// The 4x4 mixing pattern of mode (m,n): convolution maps the coefficient
// 4-vector x_mn to conv_scale(m,n)*conv_matrix(a,m,n)*x_mn.
Eigen::Matrix4d conv_matrix(const SpectralField& a_field, int m, int n);
double conv_scale(int m, int n, const Domain2D& dom);

// Periodic convolution of the two fields, applied blockwise per mode.
SpectralField conv_apply(const SpectralField& a_field, const SpectralField& x_field,
                         const Domain2D& dom);

// Pointwise synthesis sum(coeffs * basis) at arbitrary points.
std::vector<double> synthesize_grid(const SpectralField& f, const std::vector<Point2>& grid,
                                    const Domain2D& dom);

// Synthesis on a tensor lattice xs x ys, returned row-major with the
// xs index slowest. Separated axis sums; same values as the pointwise form
// up to rounding.
std::vector<double> synthesize_tensor(const SpectralField& f, const std::vector<double>& xs,
                                      const std::vector<double>& ys, const Domain2D& dom);

// Band-limited stand-in for a unit point impulse at zt: the projection of the
// Dirac delta onto the truncated basis.
SpectralField delta_surrogate(Point2 zt, int k, const Domain2D& dom);

// l2 norm of the coefficient array.
double coeff_norm(const SpectralField& f);

}  // namespace sls

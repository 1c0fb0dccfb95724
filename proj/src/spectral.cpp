#include "sls/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sls {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-axis trig tables sin(2*pi*m*x/lambda), cos(2*pi*m*x/lambda) for
// m = 0..k at each node.
struct AxisTable {
    // layout: value(m, p) = v[m * npts + p]
    std::vector<double> sin_v, cos_v;
    std::size_t npts = 0;

    AxisTable(const std::vector<double>& nodes, int k, double lambda) {
        npts = nodes.size();
        sin_v.resize(std::size_t(k + 1) * npts);
        cos_v.resize(std::size_t(k + 1) * npts);
        for (int m = 0; m <= k; ++m) {
            const double freq = kTwoPi * m / lambda;
            for (std::size_t p = 0; p < npts; ++p) {
                sin_v[std::size_t(m) * npts + p] = std::sin(freq * nodes[p]);
                cos_v[std::size_t(m) * npts + p] = std::cos(freq * nodes[p]);
            }
        }
    }
    const double* s(int m) const { return sin_v.data() + std::size_t(m) * npts; }
    const double* c(int m) const { return cos_v.data() + std::size_t(m) * npts; }
};

std::vector<double> cell_nodes(double lambda, int quad_n) {
    std::vector<double> nodes(quad_n);
    const double h = lambda / quad_n;
    for (int p = 0; p < quad_n; ++p) nodes[p] = -0.5 * lambda + (p + 0.5) * h;
    return nodes;
}

// Shared sign/permutation pattern of the shift and convolution 4x4 blocks:
// out = M(w) * v with
//   M(w) = [  w4  w3  w2  w1 ]
//          [ -w3  w4 -w1  w2 ]
//          [ -w2 -w1  w4  w3 ]
//          [  w1 -w2 -w3  w4 ]
// M(w)v = M(v)w, and for a unit phase vector w the matrix is orthogonal.
inline void mix4(const double w[4], const double v[4], double out[4]) {
    out[0] = w[3] * v[0] + w[2] * v[1] + w[1] * v[2] + w[0] * v[3];
    out[1] = -w[2] * v[0] + w[3] * v[1] - w[0] * v[2] + w[1] * v[3];
    out[2] = -w[1] * v[0] - w[0] * v[1] + w[3] * v[2] + w[2] * v[3];
    out[3] = w[0] * v[0] - w[1] * v[1] - w[2] * v[2] + w[3] * v[3];
}

// Phase vector (phi_mn1(zt), ..., phi_mn4(zt)).
inline void phase_at(int m, int n, Point2 zt, const Domain2D& dom, double p[4]) {
    const double a = kTwoPi * m / dom.lambda1 * zt.z1;
    const double b = kTwoPi * n / dom.lambda2 * zt.z2;
    const double sa = std::sin(a), ca = std::cos(a);
    const double sb = std::sin(b), cb = std::cos(b);
    p[0] = sa * sb;
    p[1] = ca * sb;
    p[2] = sa * cb;
    p[3] = ca * cb;
}

// Coefficients from staged axis sums. stage1_s/stage1_c hold
// sum_p f(x_p, y_q) * sin/cos(2 pi m x_p / lambda1) laid out as (m, q).
SpectralField assemble_from_stage1(const std::vector<double>& stage1_s,
                                   const std::vector<double>& stage1_c,
                                   const AxisTable& t2, double cell_area, int k,
                                   const Domain2D& dom) {
    SpectralField out = SpectralField::zeros(k);
    const std::size_t nq = t2.npts;
    const double inv_cell = 1.0 / (dom.lambda1 * dom.lambda2);
    for (int m = 0; m <= k; ++m) {
        const double* row_s = stage1_s.data() + std::size_t(m) * nq;
        const double* row_c = stage1_c.data() + std::size_t(m) * nq;
        for (int n = 0; n <= k; ++n) {
            const double* s2 = t2.s(n);
            const double* c2 = t2.c(n);
            double acc[4] = {0.0, 0.0, 0.0, 0.0};
            for (std::size_t q = 0; q < nq; ++q) {
                acc[0] += row_s[q] * s2[q];
                acc[1] += row_c[q] * s2[q];
                acc[2] += row_s[q] * c2[q];
                acc[3] += row_c[q] * c2[q];
            }
            const double w = kappa(m, n) * inv_cell * cell_area;
            for (int i = 1; i <= 4; ++i)
                if (basis_active(m, n, i)) out.at(m, n, i) = w * acc[i - 1];
        }
    }
    return out;
}

}  // namespace

void Domain2D::validate(int k) const {
    if (lambda1 < 2.0 * width1() || lambda2 < 2.0 * width2())
        throw std::invalid_argument("Domain2D: periods must be at least twice the extents");
    if (quad_n < 4 * (k + 1))
        throw std::invalid_argument("Domain2D: quad_n too small for truncation order");
}

double eval_basis(BasisIndex idx, Point2 z, const Domain2D& dom) {
    const double a = kTwoPi * idx.m / dom.lambda1 * z.z1;
    const double b = kTwoPi * idx.n / dom.lambda2 * z.z2;
    switch (idx.i) {
        case 1: return std::sin(a) * std::sin(b);
        case 2: return std::cos(a) * std::sin(b);
        case 3: return std::sin(a) * std::cos(b);
        default: return std::cos(a) * std::cos(b);
    }
}

SpectralField project(const std::function<double(Point2)>& f, int k, const Domain2D& dom) {
    dom.validate(k);
    const int nq = dom.quad_n;
    const std::vector<double> xs = cell_nodes(dom.lambda1, nq);
    const std::vector<double> ys = cell_nodes(dom.lambda2, nq);
    const AxisTable t1(xs, k, dom.lambda1);
    const AxisTable t2(ys, k, dom.lambda2);

    // stage 1: contract the z1 axis against the sample matrix, one y column
    // at a time so the full sample matrix is never materialized.
    std::vector<double> stage1_s(std::size_t(k + 1) * nq, 0.0);
    std::vector<double> stage1_c(std::size_t(k + 1) * nq, 0.0);
    std::vector<double> col(nq);
    for (int q = 0; q < nq; ++q) {
        for (int p = 0; p < nq; ++p) {
            const double v = f({xs[std::size_t(p)], ys[std::size_t(q)]});
            if (!std::isfinite(v)) throw std::domain_error("project: non-finite sample");
            col[std::size_t(p)] = v;
        }
        for (int m = 0; m <= k; ++m) {
            const double* s1 = t1.s(m);
            const double* c1 = t1.c(m);
            double as = 0.0, ac = 0.0;
            for (int p = 0; p < nq; ++p) {
                as += col[std::size_t(p)] * s1[p];
                ac += col[std::size_t(p)] * c1[p];
            }
            stage1_s[std::size_t(m) * nq + std::size_t(q)] = as;
            stage1_c[std::size_t(m) * nq + std::size_t(q)] = ac;
        }
    }
    const double cell_area = (dom.lambda1 / nq) * (dom.lambda2 / nq);
    return assemble_from_stage1(stage1_s, stage1_c, t2, cell_area, k, dom);
}

SpectralField project_samples(const std::vector<double>& values, const std::vector<double>& xs,
                              const std::vector<double>& ys, double cell_area, int k,
                              const Domain2D& dom) {
    if (values.size() != xs.size() * ys.size())
        throw std::invalid_argument("project_samples: size mismatch");
    const AxisTable t1(xs, k, dom.lambda1);
    const AxisTable t2(ys, k, dom.lambda2);
    const std::size_t nx = xs.size(), ny = ys.size();
    std::vector<double> stage1_s(std::size_t(k + 1) * ny, 0.0);
    std::vector<double> stage1_c(std::size_t(k + 1) * ny, 0.0);
    for (std::size_t q = 0; q < ny; ++q) {
        for (int m = 0; m <= k; ++m) {
            const double* s1 = t1.s(m);
            const double* c1 = t1.c(m);
            double as = 0.0, ac = 0.0;
            for (std::size_t p = 0; p < nx; ++p) {
                const double v = values[p * ny + q];
                as += v * s1[p];
                ac += v * c1[p];
            }
            stage1_s[std::size_t(m) * ny + q] = as;
            stage1_c[std::size_t(m) * ny + q] = ac;
        }
    }
    return assemble_from_stage1(stage1_s, stage1_c, t2, cell_area, k, dom);
}

SpectralField shift_coefficients(const SpectralField& f, Point2 zt, const Domain2D& dom) {
    SpectralField out = SpectralField::zeros(f.k);
    for (int m = 0; m <= f.k; ++m) {
        for (int n = 0; n <= f.k; ++n) {
            double p[4];
            phase_at(m, n, zt, dom, p);
            const double* in = f.coeffs.data() + f.index(m, n, 1);
            mix4(p, in, out.coeffs.data() + out.index(m, n, 1));
        }
    }
    return out;
}

Eigen::Matrix4d conv_matrix(const SpectralField& a_field, int m, int n) {
    const double a1 = a_field.at(m, n, 1);
    const double a2 = a_field.at(m, n, 2);
    const double a3 = a_field.at(m, n, 3);
    const double a4 = a_field.at(m, n, 4);
    Eigen::Matrix4d mat;
    mat << a4, a3, a2, a1,
          -a3, a4, -a1, a2,
          -a2, -a1, a4, a3,
           a1, -a2, -a3, a4;
    return mat;
}

double conv_scale(int m, int n, const Domain2D& dom) {
    return dom.lambda1 * dom.lambda2 / kappa(m, n);
}

SpectralField conv_apply(const SpectralField& a_field, const SpectralField& x_field,
                         const Domain2D& dom) {
    if (a_field.k != x_field.k)
        throw std::invalid_argument("conv_apply: truncation orders differ");
    SpectralField out = SpectralField::zeros(x_field.k);
    for (int m = 0; m <= x_field.k; ++m) {
        for (int n = 0; n <= x_field.k; ++n) {
            const double scale = conv_scale(m, n, dom);
            const double* av = a_field.coeffs.data() + a_field.index(m, n, 1);
            const double* xv = x_field.coeffs.data() + x_field.index(m, n, 1);
            double mixed[4];
            mix4(av, xv, mixed);
            double* ov = out.coeffs.data() + out.index(m, n, 1);
            for (int i = 0; i < 4; ++i) ov[i] = scale * mixed[i];
        }
    }
    return out;
}

std::vector<double> synthesize_grid(const SpectralField& f, const std::vector<Point2>& grid,
                                    const Domain2D& dom) {
    std::vector<double> out(grid.size(), 0.0);
    const int k = f.k;
    std::vector<double> s1(k + 1), c1(k + 1), s2(k + 1), c2(k + 1);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (int m = 0; m <= k; ++m) {
            const double a = kTwoPi * m / dom.lambda1 * grid[g].z1;
            s1[std::size_t(m)] = std::sin(a);
            c1[std::size_t(m)] = std::cos(a);
        }
        for (int n = 0; n <= k; ++n) {
            const double b = kTwoPi * n / dom.lambda2 * grid[g].z2;
            s2[std::size_t(n)] = std::sin(b);
            c2[std::size_t(n)] = std::cos(b);
        }
        double acc = 0.0;
        for (int m = 0; m <= k; ++m) {
            for (int n = 0; n <= k; ++n) {
                const double* cv = f.coeffs.data() + f.index(m, n, 1);
                acc += (cv[0] * s1[std::size_t(m)] + cv[1] * c1[std::size_t(m)]) * s2[std::size_t(n)] +
                       (cv[2] * s1[std::size_t(m)] + cv[3] * c1[std::size_t(m)]) * c2[std::size_t(n)];
            }
        }
        out[g] = acc;
    }
    return out;
}

std::vector<double> synthesize_tensor(const SpectralField& f, const std::vector<double>& xs,
                                      const std::vector<double>& ys, const Domain2D& dom) {
    const int k = f.k;
    const AxisTable t1(xs, k, dom.lambda1);
    const AxisTable t2(ys, k, dom.lambda2);
    const std::size_t nx = xs.size(), ny = ys.size();
    // contract the n axis first: per (m, q) partial sums attached to the
    // sin/cos factor of z1.
    std::vector<double> vs(std::size_t(k + 1) * ny, 0.0);
    std::vector<double> vc(std::size_t(k + 1) * ny, 0.0);
    for (int m = 0; m <= k; ++m) {
        for (std::size_t q = 0; q < ny; ++q) {
            double acc_s = 0.0, acc_c = 0.0;
            for (int n = 0; n <= k; ++n) {
                const double* cv = f.coeffs.data() + f.index(m, n, 1);
                const double sv = t2.s(n)[q];
                const double cvv = t2.c(n)[q];
                acc_s += cv[0] * sv + cv[2] * cvv;
                acc_c += cv[1] * sv + cv[3] * cvv;
            }
            vs[std::size_t(m) * ny + q] = acc_s;
            vc[std::size_t(m) * ny + q] = acc_c;
        }
    }
    std::vector<double> out(nx * ny, 0.0);
    for (std::size_t p = 0; p < nx; ++p) {
        for (std::size_t q = 0; q < ny; ++q) {
            double acc = 0.0;
            for (int m = 0; m <= k; ++m)
                acc += t1.s(m)[p] * vs[std::size_t(m) * ny + q] +
                       t1.c(m)[p] * vc[std::size_t(m) * ny + q];
            out[p * ny + q] = acc;
        }
    }
    return out;
}

SpectralField delta_surrogate(Point2 zt, int k, const Domain2D& dom) {
    SpectralField out = SpectralField::zeros(k);
    const double inv_cell = 1.0 / (dom.lambda1 * dom.lambda2);
    for (int m = 0; m <= k; ++m) {
        for (int n = 0; n <= k; ++n) {
            double p[4];
            phase_at(m, n, zt, dom, p);
            const double w = kappa(m, n) * inv_cell;
            for (int i = 1; i <= 4; ++i)
                if (basis_active(m, n, i)) out.at(m, n, i) = w * p[i - 1];
        }
    }
    return out;
}

double coeff_norm(const SpectralField& f) {
    double acc = 0.0;
    for (double v : f.coeffs) acc += v * v;
    return std::sqrt(acc);
}

}  // namespace sls

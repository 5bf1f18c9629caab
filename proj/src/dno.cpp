#include "jetstab/dno.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

// One-sided fourth-order derivative at the last node.
constexpr double kTrace[5] = {25.0, -48.0, 36.0, -16.0, 3.0};

double y_node(int j, double h) { return (j - 0.5) * h; }

double spectral_xi2(int xi, const FourierGrid& g) { return xi == g.nyquist() ? 0.0 : double(xi) * xi; }

// Solves the flat radial problem for one Fourier mode: s (1/y)(y f')' - xi^2 f = rhs,
// f_{n_y} = top, even ghost at the axis. Returns levels 1..n_y-1.
template <class T>
void flat_mode_solve(int n_y, double h, double s, double xi2, const T* rhs, T top, T* out,
                     std::vector<double>& cp, std::vector<T>& dp) {
    const int m = n_y - 1;
    cp.resize(m);
    dp.resize(m);
    for (int j = 1; j <= m; ++j) {
        double y = y_node(j, h);
        double lo = j > 1 ? s * (j - 1) * h / (y * h * h) : 0.0;
        double up = s * j * h / (y * h * h);
        double d = -(lo + up) - xi2;
        T r = rhs[j - 1];
        if (j == m) r -= up * top;
        double u = j < m ? up : 0.0;
        if (j == 1) {
            cp[0] = u / d;
            dp[0] = r / d;
        } else {
            double den = d - lo * cp[j - 2];
            cp[j - 1] = u / den;
            dp[j - 1] = (r - lo * dp[j - 2]) / den;
        }
    }
    out[m - 1] = dp[m - 1];
    for (int j = m - 1; j >= 1; --j) out[j - 1] = dp[j - 1] - cp[j - 1] * out[j];
}

template <class T>
T trace_derivative(const T* interior, T top, int n_y, double h) {
    T acc = kTrace[0] * top;
    for (int k = 1; k < 5; ++k) acc += kTrace[k] * interior[n_y - 1 - k];
    return acc / (12.0 * h);
}

void check_radius(const RealField& eta, const DispersionParams& p, double c) {
    double lim = c < 0.0 ? 0.25 * p.rho : c;
    for (int i = 0; i < eta.size(); ++i) {
        if (p.rho + eta.v[i] < lim) {
            std::ostringstream os;
            os << "rho + eta = " << p.rho + eta.v[i] << " below degeneracy threshold " << lim << " at x index " << i;
            throw DomainError(os.str());
        }
    }
}

double vec_norm(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

}  // namespace

double radial_step(int n_y) {
    if (n_y < 6) throw ConfigError("n_y must be at least 6");
    return 1.0 / (n_y - 0.5);
}

RadialOperator::RadialOperator(const RealField& eta, const DispersionParams& p, int ny)
    : grid(eta.grid), n_y(ny), h(radial_step(ny)) {
    const int n = grid.size();
    inv_r2.resize(n);
    eta_x = derivative(eta).v;
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) {
        double r = p.rho + eta.v[i];
        inv_r2[i] = 1.0 / (r * r);
        q[i] = eta_x[i] * inv_r2[i];
    }
    auto qx = derivative(RealField(grid, q)).v;
    inv_r2_mean = 0.0;
    for (double v : inv_r2) inv_r2_mean += v / n;
    const int m = levels();
    a2.resize(m * n);
    g2.resize(m * n);
    beta.resize(m * n);
    for (int j = 1; j <= m; ++j) {
        double y = y_node(j, h);
        for (int i = 0; i < n; ++i) {
            double r = p.rho + eta.v[i];
            a2[(j - 1) * n + i] = y * y * eta_x[i] * eta_x[i] * inv_r2[i];
            g2[(j - 1) * n + i] = -y * r * qx[i];
            beta[(j - 1) * n + i] = -2.0 * y * eta_x[i] / r;
        }
    }
}

void RadialOperator::apply(const std::vector<double>& x, const std::vector<double>* psi, std::vector<double>& out,
                           bool parallel) const {
    const int n = grid.size();
    const int m = levels();
    const int nyq = grid.nyquist();
    out.assign(static_cast<size_t>(m) * n, 0.0);
    auto level = [&](int j) -> const double* {
        if (j == 0) j = 1;
        if (j == n_y) return psi ? psi->data() : nullptr;
        return x.data() + static_cast<size_t>(j - 1) * n;
    };
    const double h2 = h * h;
#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 1; j <= m; ++j) {
        std::vector<cplx> w(n);
        const double* fm = level(j - 1);
        const double* f0 = level(j);
        const double* fp = level(j + 1);
        for (int i = 0; i < n; ++i) {
            double vp = fp ? fp[i] : 0.0;
            w[i] = cplx(f0[i], vp - fm[i]);
        }
        fft_forward(w);
        std::vector<cplx> d(n);
        for (int k = 0; k < n; ++k) {
            int xi = grid.freq(k);
            int kn = (n - k) % n;
            cplx a = 0.5 * (w[k] + std::conj(w[kn]));
            cplx b = cplx(0.0, -0.5) * (w[k] - std::conj(w[kn]));
            if (xi == nyq) {
                d[k] = 0.0;
                continue;
            }
            d[k] = -double(xi) * xi * a + cplx(0.0, 1.0) * (cplx(0.0, xi) * b);
        }
        fft_inverse(d);
        const double y = y_node(j, h);
        const double sp = j * h / (y * h2), sm = (j - 1) * h / (y * h2);
        double* o = out.data() + static_cast<size_t>(j - 1) * n;
        const size_t off = static_cast<size_t>(j - 1) * n;
        for (int i = 0; i < n; ++i) {
            double vp = fp ? fp[i] : 0.0;
            double vm = fm[i], v0 = f0[i];
            double dxx = d[i].real() / n;
            double dxdiff = d[i].imag() / n;
            double sing = inv_r2[i] * (sp * (vp - v0) - sm * (v0 - vm));
            double reg = a2[off + i] * (vp - 2.0 * v0 + vm) / h2 + g2[off + i] * (vp - vm) / (2.0 * h) +
                         beta[off + i] * dxdiff / (2.0 * h);
            o[i] = sing + reg + dxx;
        }
    }
}

void RadialOperator::precondition(const std::vector<double>& x, std::vector<double>& out, bool parallel) const {
    const int n = grid.size();
    const int m = levels();
    std::vector<cplx> spec(static_cast<size_t>(m) * n);
#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < m; ++j) {
        std::vector<cplx> w(n);
        for (int i = 0; i < n; ++i) w[i] = x[static_cast<size_t>(j) * n + i];
        fft_forward(w);
        for (int k = 0; k < n; ++k) spec[static_cast<size_t>(j) * n + k] = w[k];
    }
#pragma omp parallel for schedule(static) if (parallel)
    for (int k = 0; k < n; ++k) {
        std::vector<cplx> rhs(m), sol(m), dp;
        std::vector<double> cp;
        for (int j = 0; j < m; ++j) rhs[j] = spec[static_cast<size_t>(j) * n + k];
        flat_mode_solve<cplx>(n_y, h, inv_r2_mean, spectral_xi2(grid.freq(k), grid), rhs.data(), cplx(0.0), sol.data(),
                              cp, dp);
        for (int j = 0; j < m; ++j) spec[static_cast<size_t>(j) * n + k] = sol[j];
    }
    out.assign(static_cast<size_t>(m) * n, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < m; ++j) {
        std::vector<cplx> w(spec.begin() + static_cast<size_t>(j) * n, spec.begin() + static_cast<size_t>(j + 1) * n);
        fft_inverse(w);
        for (int i = 0; i < n; ++i) out[static_cast<size_t>(j) * n + i] = w[i].real() / n;
    }
}

RealField dno_flat(const RealField& psi, const DispersionParams& p) { return from_spectrum(dno_flat(to_spectrum(psi), p)); }

Spectrum dno_flat(const Spectrum& psi, const DispersionParams& p) {
    return apply_multiplier([&](int xi) { return cplx(g0_multiplier(xi, p)); }, psi);
}

double dno_flat_discrete_multiplier(int xi, const DispersionParams& p, int n_y) {
    const double h = radial_step(n_y);
    std::vector<double> rhs(n_y - 1, 0.0), sol(n_y - 1), cp, dp;
    flat_mode_solve<double>(n_y, h, 1.0 / (p.rho * p.rho), double(xi) * xi, rhs.data(), 1.0, sol.data(), cp, dp);
    return trace_derivative<double>(sol.data(), 1.0, n_y, h) / p.rho;
}

Spectrum dno_flat_discrete(const Spectrum& psi, const DispersionParams& p, int n_y) {
    const auto& g = psi.grid;
    return apply_multiplier(
        [&](int xi) { return cplx(xi == g.nyquist() ? 0.0 : dno_flat_discrete_multiplier(xi, p, n_y)); }, psi);
}

namespace {

// Right-preconditioned restarted GMRES.
int gmres(const RadialOperator& op, const std::vector<double>& b, std::vector<double>& x, const DnoOptions& o,
          double& rel_res) {
    const size_t N = b.size();
    const int mr = o.restart;
    const double bn = vec_norm(b);
    x.assign(N, 0.0);
    if (bn == 0.0) {
        rel_res = 0.0;
        return 0;
    }
    // start from the flat solution so the tolerance applies to the eta-dependent part
    std::vector<double> r(N), ax, z;
    op.precondition(b, x, o.parallel);
    op.apply(x, nullptr, ax, o.parallel);
    for (size_t q = 0; q < N; ++q) r[q] = b[q] - ax[q];
    double beta = vec_norm(r);
    const double target = std::max(o.tol * beta, 1e-15 * bn);
    int iters = 0;
    double last = beta;
    while (iters < o.max_iter && beta > target) {
        std::vector<std::vector<double>> V(mr + 1, std::vector<double>(N));
        std::vector<std::vector<double>> H(mr + 1, std::vector<double>(mr, 0.0));
        std::vector<double> cs(mr), sn(mr), g(mr + 1, 0.0);
        for (size_t i = 0; i < N; ++i) V[0][i] = r[i] / beta;
        g[0] = beta;
        int k = 0;
        for (; k < mr && iters < o.max_iter; ++k, ++iters) {
            op.precondition(V[k], z, o.parallel);
            op.apply(z, nullptr, ax, o.parallel);
            for (int i = 0; i <= k; ++i) {
                double d = 0.0;
                for (size_t q = 0; q < N; ++q) d += ax[q] * V[i][q];
                H[i][k] = d;
                for (size_t q = 0; q < N; ++q) ax[q] -= d * V[i][q];
            }
            double nn = vec_norm(ax);
            H[k + 1][k] = nn;
            if (nn > 0.0)
                for (size_t q = 0; q < N; ++q) V[k + 1][q] = ax[q] / nn;
            for (int i = 0; i < k; ++i) {
                double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
                H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
                H[i][k] = t;
            }
            double den = std::hypot(H[k][k], H[k + 1][k]);
            cs[k] = H[k][k] / den;
            sn[k] = H[k + 1][k] / den;
            H[k][k] = den;
            H[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            if (std::abs(g[k + 1]) <= target || nn == 0.0) {
                ++k;
                ++iters;
                break;
            }
        }
        std::vector<double> yv(k);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int l = i + 1; l < k; ++l) s -= H[i][l] * yv[l];
            yv[i] = s / H[i][i];
        }
        std::vector<double> upd(N, 0.0);
        for (int i = 0; i < k; ++i)
            for (size_t q = 0; q < N; ++q) upd[q] += yv[i] * V[i][q];
        op.precondition(upd, z, o.parallel);
        for (size_t q = 0; q < N; ++q) x[q] += z[q];
        op.apply(x, nullptr, ax, o.parallel);
        for (size_t q = 0; q < N; ++q) r[q] = b[q] - ax[q];
        beta = vec_norm(r);
        if (beta > 0.5 * last) break;  // stagnation at the rounding floor
        last = beta;
    }
    rel_res = beta / bn;
    return iters;
}

void direct_solve(const RadialOperator& op, const std::vector<double>& psi, std::vector<double>& x) {
    using Mat = Eigen::MatrixXd;
    const int n = op.grid.size();
    const int m = op.levels();
    const double h = op.h, h2 = h * h;
    Mat Dx(n, n), Dxx(n, n);
    for (int c = 0; c < n; ++c) {
        RealField e(op.grid);
        e.v[c] = 1.0;
        auto d1 = derivative(e, 1).v;
        auto d2 = derivative(e, 2).v;
        for (int r = 0; r < n; ++r) {
            Dx(r, c) = d1[r];
            Dxx(r, c) = d2[r];
        }
    }
    auto coeffs = [&](int j, Eigen::VectorXd& cm, Eigen::VectorXd& c0, Eigen::VectorXd& cp, Eigen::VectorXd& bb) {
        double y = y_node(j, h);
        double sp = j * h / (y * h2), sm = (j - 1) * h / (y * h2);
        cm.resize(n);
        c0.resize(n);
        cp.resize(n);
        bb.resize(n);
        for (int i = 0; i < n; ++i) {
            size_t off = static_cast<size_t>(j - 1) * n + i;
            double a2 = op.a2[off], g2 = op.g2[off];
            cp[i] = op.inv_r2[i] * sp + a2 / h2 + g2 / (2 * h);
            cm[i] = op.inv_r2[i] * sm + a2 / h2 - g2 / (2 * h);
            c0[i] = -op.inv_r2[i] * (sp + sm) - 2 * a2 / h2;
            bb[i] = op.beta[off] / (2 * h);
        }
    };
    std::vector<Eigen::PartialPivLU<Mat>> lus(m);
    std::vector<Mat> Us(m);
    std::vector<Eigen::VectorXd> rp(m);
    Eigen::VectorXd cm, c0, cp, bb;
    Mat Wprev;
    for (int j = 1; j <= m; ++j) {
        coeffs(j, cm, c0, cp, bb);
        Mat L = Mat(cm.asDiagonal()) - bb.asDiagonal() * Dx;
        Mat U = Mat(cp.asDiagonal()) + bb.asDiagonal() * Dx;
        Mat D = Mat(c0.asDiagonal()) + Dxx;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        if (j == 1) D += L;
        if (j == m) {
            Eigen::Map<const Eigen::VectorXd> ps(psi.data(), n);
            r = -U * ps;
        }
        if (j > 1) {
            D -= L * Wprev;
            r -= L * lus[j - 2].solve(rp[j - 2]);
        }
        lus[j - 1].compute(D);
        rp[j - 1] = r;
        if (j < m) Wprev = lus[j - 1].solve(U);
        Us[j - 1] = std::move(U);
    }
    x.assign(static_cast<size_t>(m) * n, 0.0);
    Eigen::VectorXd next;
    for (int j = m; j >= 1; --j) {
        Eigen::VectorXd r = rp[j - 1];
        if (j < m) r -= Us[j - 1] * next;
        next = lus[j - 1].solve(r);
        for (int i = 0; i < n; ++i) x[static_cast<size_t>(j - 1) * n + i] = next[i];
    }
}

}  // namespace

DNOResult solve_dno(const FlattenedEllipticProblem& pr) {
    const auto& p = pr.params;
    if (!(pr.eta.grid == pr.psi.grid)) throw ConfigError("eta and psi grids differ");
    check_radius(pr.eta, p, pr.min_radius);
    const int n = pr.eta.size();
    const int n_y = pr.options.n_y;
    RadialOperator op(pr.eta, p, n_y);
    const int m = op.levels();

    std::vector<double> b, x, chk;
    op.apply(std::vector<double>(static_cast<size_t>(m) * n, 0.0), &pr.psi.v, b, pr.options.parallel);
    for (auto& v : b) v = -v;
    DNOResult res;
    double rel = 0.0;
    if (pr.options.solver == DnoSolver::iterative) {
        res.iterations = gmres(op, b, x, pr.options, rel);
    } else {
        direct_solve(op, pr.psi.v, x);
    }
    op.apply(x, &pr.psi.v, chk, pr.options.parallel);
    double bn = vec_norm(b);
    res.residual = bn > 0.0 ? vec_norm(chk) / bn : vec_norm(chk);
    if (!std::isfinite(res.residual) || res.residual > 1e-8) {
        std::ostringstream os;
        os << "elliptic solve did not converge: relative residual " << res.residual << " after " << res.iterations
           << " iterations";
        throw NumericError(os.str());
    }

    res.phi.reserve(n_y);
    for (int j = 0; j < m; ++j)
        res.phi.emplace_back(pr.eta.grid, std::vector<double>(x.begin() + static_cast<size_t>(j) * n,
                                                               x.begin() + static_cast<size_t>(j + 1) * n));
    res.phi.push_back(pr.psi);

    const double h = op.h;
    auto psi_x = derivative(pr.psi).v;
    res.g = RealField(pr.eta.grid);
    std::vector<double> col(m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) col[j] = x[static_cast<size_t>(j) * n + i];
        double phiy = trace_derivative<double>(col.data(), pr.psi.v[i], n_y, h);
        double r = p.rho + pr.eta.v[i];
        double ex = op.eta_x[i];
        res.g.v[i] = (1.0 + ex * ex) / r * phiy - ex * psi_x[i];
    }
    boundary_velocities(pr.eta, pr.psi, res.g, res.b, res.v);
    return res;
}

RealField dno_corrected(const RealField& eta, const RealField& psi, const DispersionParams& p, const DnoOptions& o) {
    auto ps = to_spectrum(psi);
    auto lin = dno_flat(ps, p) - dno_flat_discrete(ps, p, o.n_y);
    auto g = solve_dno(FlattenedEllipticProblem(eta, psi, p, o)).g;
    return g + from_spectrum(lin);
}

void boundary_velocities(const RealField& eta, const RealField& psi, const RealField& g, RealField& b, RealField& v) {
    auto ex = derivative(eta).v;
    auto px = derivative(psi).v;
    b = RealField(eta.grid);
    v = RealField(eta.grid);
    for (int i = 0; i < eta.size(); ++i) {
        b.v[i] = (ex[i] * px[i] + g.v[i]) / (1.0 + ex[i] * ex[i]);
        v.v[i] = px[i] - b.v[i] * ex[i];
    }
}

RealField quadratic_part(const RealField& eta, const RealField& psi, const DispersionParams& p) {
    auto eh = to_spectrum(eta);
    auto ph = to_spectrum(psi);
    auto b0 = dno_flat(ph, p);
    auto v0 = derivative(ph);
    auto b0eta = product(b0, eh);
    auto v0eta = product(v0, eh);
    auto out = (-1.0) * dno_flat(b0eta, p) - derivative(v0eta) - cplx(1.0 / p.rho) * b0eta;
    return from_spectrum(dealias(out));
}

RealField shape_derivative(const RealField& eta, const RealField& psi, const RealField& delta_eta,
                           const DispersionParams& p, const DnoOptions& o) {
    auto base = solve_dno(FlattenedEllipticProblem(eta, psi, p, o));
    auto bd = from_spectrum(product(to_spectrum(base.b), to_spectrum(delta_eta)));
    auto vd = product(to_spectrum(base.v), to_spectrum(delta_eta));
    auto gbd = solve_dno(FlattenedEllipticProblem(eta, bd, p, o)).g;
    RealField out(eta.grid);
    auto dvd = from_spectrum(derivative(vd));
    for (int i = 0; i < eta.size(); ++i) out.v[i] = -gbd.v[i] - dvd.v[i] - bd.v[i] / (p.rho + eta.v[i]);
    return out;
}

double boundary_flux(const DNOResult& result, const RealField& eta, const DispersionParams& p) {
    const int n = eta.size();
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (p.rho + eta.v[i]) * result.g.v[i];
    return 2.0 * std::numbers::pi * s / n;
}

}  // namespace jetstab

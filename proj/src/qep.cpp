#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "dampwave/csv.hpp"
#include "dampwave/errors.hpp"
#include "dampwave/integrate.hpp"
#include "dampwave/spectra.hpp"

namespace dampwave {

std::string to_string(EigenClass c) { return c == EigenClass::NearPoint ? "near-point" : "near-essential"; }

CSpMat DiscretePencil::at(cplx lambda) const
{
    CSpMat P = (lambda * lambda) * P2.cast<cplx>() + lambda * P1.cast<cplx>() + P0.cast<cplx>();
    P.makeCompressed();
    return P;
}

DiscretePencil assemble_discrete_pencil(const ModelSpec& model, const GridFunction& v, double mu)
{
    if (!v.grid.periodic()) throw InvalidArgument("discrete pencil needs a periodic grid");
    if (v.m != model.m()) throw GridMismatch("discrete pencil: profile has the wrong number of components");
    // The pencil is minus the linearization of the comoving operator at (v, 0; mu, 0).
    const ComovingOperator op(model, v.grid);
    const auto L = op.linearize(v.values, Vec::Zero(v.values.size()), mu, 0.0);
    DiscretePencil p{v.grid, model.m(), mu, op.Mb(), -L.dw, -L.dv, {}};
    p.P1.makeCompressed();
    p.P0.makeCompressed();
    if (model.states()) p.limits = {SymbolPencil(model, mu, Side::Minus), SymbolPencil(model, mu, Side::Plus)};
    return p;
}

namespace {

double weighted_norm(const CVec& x, const Vec& W) { return std::sqrt((W.array() * x.array().abs2()).sum()); }

struct Eigenpairs {
    CVec values;
    CMat vectors;  // upper halves of the linearized eigenvectors
};

// Companion form [w; lambda w]: lambda y = -M^{-1}(P0 w + P1 y).
Eigenpairs dense_eigs(const DiscretePencil& p)
{
    const Eigen::Index n = p.P0.rows();
    const Mat Minv = Mat(p.P2).inverse();
    Mat L = Mat::Zero(2 * n, 2 * n);
    L.topRightCorner(n, n) = Mat::Identity(n, n);
    L.bottomLeftCorner(n, n) = -Minv * Mat(p.P0);
    L.bottomRightCorner(n, n) = -Minv * Mat(p.P1);
    Eigen::EigenSolver<Mat> es(L, true);
    if (es.info() != Eigen::Success) throw Error("dense eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors().topRows(n)};
}

// Arnoldi on (L - sigma)^{-1} with L the companion matrix; eigenvalues lambda = sigma + 1/theta.
Eigenpairs shift_invert_eigs(const DiscretePencil& p, cplx sigma, int n_wanted, double tol)
{
    const Eigen::Index n = p.P0.rows();
    const Eigen::Index dim = 2 * n;
    const CSpMat Ps = p.at(sigma);
    const CSpMat P1 = p.P1.cast<cplx>();
    const CSpMat P2 = p.P2.cast<cplx>();
    Eigen::SparseLU<CSpMat> lu;
    lu.compute(Ps);
    if (lu.info() != Eigen::Success) throw Error("shift-invert: P(shift) is singular");

    // (L - sigma)[a; b] = [x; y]  <=>  P(sigma) a = -(M (y + sigma x) + P1 x), b = x + sigma a.
    auto apply = [&](const CVec& z) {
        const CVec x = z.head(n), y = z.tail(n);
        const CVec rhs = -(P2 * (y + sigma * x) + P1 * x);
        CVec out(dim);
        out.head(n) = lu.solve(rhs);
        out.tail(n) = x + sigma * out.head(n);
        return out;
    };

    const int wanted = int(std::min<Eigen::Index>(n_wanted, dim));
    Eigen::Index k = std::min<Eigen::Index>(dim, std::max(2 * wanted + 20, 60));
    CVec start = CVec::Ones(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start[i] += 0.1 * std::sin(1.0 + 3.7 * double(i));
    for (;;) {
        CMat V(dim, k + 1);
        CMat H = CMat::Zero(k + 1, k);
        V.col(0) = start.normalized();
        Eigen::Index used = k;
        for (Eigen::Index j = 0; j < k; ++j) {
            CVec w = apply(V.col(j));
            for (int pass = 0; pass < 2; ++pass) {
                const CVec h = V.leftCols(j + 1).adjoint() * w;
                w -= V.leftCols(j + 1) * h;
                H.col(j).head(j + 1) += h;
            }
            H(j + 1, j) = w.norm();
            if (std::abs(H(j + 1, j)) < 1e-14) {
                used = j + 1;
                break;
            }
            V.col(j + 1) = w / H(j + 1, j);
        }
        Eigen::ComplexEigenSolver<CMat> es(H.topLeftCorner(used, used), true);
        const CVec theta = es.eigenvalues();
        const CMat Y = es.eigenvectors();
        const double hnext = used < k || used == dim ? 0.0 : std::abs(H(used, used - 1));

        std::vector<Eigen::Index> order(static_cast<std::size_t>(used));
        for (Eigen::Index i = 0; i < used; ++i) order[std::size_t(i)] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(theta[a]) > std::abs(theta[b]); });

        int converged = 0;
        for (int i = 0; i < std::min<Eigen::Index>(wanted, used); ++i) {
            const auto c = order[std::size_t(i)];
            if (hnext * std::abs(Y(used - 1, c)) <= tol * std::abs(theta[c])) ++converged;
            else break;
        }
        if (converged >= wanted || used < k || k == dim) {
            const int out_n = int(std::min<Eigen::Index>(wanted, used));
            Eigenpairs e{CVec(out_n), CMat(n, out_n)};
            for (int i = 0; i < out_n; ++i) {
                const auto c = order[std::size_t(i)];
                e.values[i] = sigma + 1.0 / theta[c];
                e.vectors.col(i) = (V.leftCols(used) * Y.col(c)).head(n);
            }
            return e;
        }
        k = std::min(dim, 2 * k);
    }
}

}  // namespace

SpectrumResult solve_quadratic_eigproblem(const DiscretePencil& pencil, const QepOptions& opts,
                                          const DispersionCurve* curves)
{
    const Eigen::Index n = pencil.P0.rows();
    Eigenpairs e;
    if (opts.shift) {
        if (opts.n_wanted < 1) throw InvalidArgument("n_wanted must be at least 1");
        e = shift_invert_eigs(pencil, *opts.shift, opts.n_wanted, opts.arnoldi_tol);
    } else {
        if (n > opts.size_cap)
            throw SizeCapExceeded("pencil of size " + std::to_string(n) + " exceeds the dense cap " +
                                  std::to_string(opts.size_cap) + "; give a shift");
        e = dense_eigs(pencil);
    }

    const Vec W = weight_vector(pencil.grid, pencil.m);
    SpectrumResult r{e.values, e.vectors, Vec(e.values.size()), {}, pencil.grid, pencil.m};
    for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) {
        CVec w = r.eigenvectors.col(k);
        w /= weighted_norm(w, W);
        // Fix the phase so that the largest entry is real and positive.
        Eigen::Index imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        w *= std::conj(w[imax]) / std::abs(w[imax]);
        r.eigenvectors.col(k) = w;
        r.residuals[k] = weighted_norm(pencil.at(r.eigenvalues[k]) * w, W);
    }

    DispersionCurve own;
    if (!curves && !pencil.limits.empty()) {
        own = dispersion_curves(pencil.limits);
        curves = &own;
    }
    std::vector<cplx> pts;
    if (curves) pts = curves->points();
    r.classes.assign(std::size_t(r.eigenvalues.size()), EigenClass::NearPoint);
    for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k)
        for (const cplx& z : pts)
            if (std::abs(z - r.eigenvalues[k]) <= opts.class_tol) {
                r.classes[std::size_t(k)] = EigenClass::NearEssential;
                break;
            }
    return r;
}

CGridFunction SpectrumResult::eigenfunction(int k) const
{
    if (k < 0 || k >= eigenvectors.cols()) throw InvalidArgument("eigenfunction index out of range");
    return CGridFunction(grid, m, eigenvectors.col(k));
}

int SpectrumResult::nearest(cplx z) const
{
    if (eigenvalues.size() == 0) throw InvalidArgument("empty spectrum");
    Eigen::Index k = 0;
    (eigenvalues.array() - z).abs().minCoeff(&k);
    return int(k);
}

void write_csv(std::ostream& os, const SpectrumResult& r)
{
    csv::Writer w(os, {"re", "im", "class", "residual"});
    for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) {
        w << r.eigenvalues[k].real() << r.eigenvalues[k].imag() << to_string(r.classes[std::size_t(k)])
          << r.residuals[k];
        w.end_row();
    }
}

int count_near_segment(const CVec& eigenvalues, double line_re, double half_height, double tol)
{
    int c = 0;
    for (const cplx& z : eigenvalues)
        if (std::abs(z.real() - line_re) <= tol && std::abs(z.imag()) <= half_height) ++c;
    return c;
}

double cosine(const CGridFunction& a, const CGridFunction& b)
{
    check_same_layout(a.grid, a.m, b.grid, b.m);
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine of a zero function");
    return std::abs(inner(a, b)) / (na * nb);
}

}  // namespace dampwave

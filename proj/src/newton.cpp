#include "dampwave/newton.hpp"

#include <cmath>

#include "dampwave/errors.hpp"

namespace dampwave {

void BorderedSolver::factorize(const SpMat& J)
{
    lu_.compute(J);
    if (lu_.info() != Eigen::Success) throw Error("sparse LU of the Newton matrix failed: " + lu_.lastErrorMessage());
}

Vec BorderedSolver::solve(const Vec& r)
{
    Vec x = lu_.solve(r);
    return x;
}

void BorderedSolver::solve(const Mat& B, const Mat& C, const Mat& D, const Vec& r, const Vec& s, Vec& x, Vec& y)
{
    const Eigen::Index k = D.rows();
    if (k == 0) {
        x = lu_.solve(r);
        y.resize(0);
        return;
    }
    Mat rhs(r.size(), k + 1);
    rhs.col(0) = r;
    rhs.rightCols(k) = B;
    Mat Z = lu_.solve(rhs);
    Mat S = D - C * Z.rightCols(k);
    const double det = S.determinant();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det))
        throw DegeneratePhase("Schur complement of the bordered Newton system is singular");
    y = S.partialPivLu().solve(s - C * Z.col(0));
    x = Z.col(0) - Z.rightCols(k) * y;
}

}  // namespace dampwave

#pragma once

#include <Eigen/SparseLU>

#include "dampwave/types.hpp"

namespace dampwave {

struct NewtonOptions {
    double tol = 1e-10;  // on the max-norm of the residual
    int max_iter = 12;
};

// Solves the bordered system
//   [ J  B ] [x]   [r]
//   [ C  D ] [y] = [s]
// with sparse J (n x n) and a k-dimensional dense border, by one LU of J
// and a k x k Schur complement.
class BorderedSolver {
public:
    void factorize(const SpMat& J);
    void solve(const Mat& B, const Mat& C, const Mat& D, const Vec& r, const Vec& s, Vec& x, Vec& y);
    Vec solve(const Vec& r);

private:
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace dampwave

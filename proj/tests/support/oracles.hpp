#pragma once

// Independent reference computations for the tests. Nothing here calls into the
// library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "dampwave/model.hpp"

namespace oracle {

using dampwave::cplx;
using dampwave::Mat;
using dampwave::Vec;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
    Vec vec(int n, double a, double b)
    {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(a, b);
        return v;
    }
    Mat mat(int r, int c, double a, double b)
    {
        Mat M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = uniform(a, b);
        return M;
    }

private:
    std::mt19937_64 gen_;
};

// Central differences of f in each m-block, step h.
inline dampwave::PointJacobians fd_jacobians(const dampwave::ModelSpec& model, const Vec& u, const Vec& v,
                                             const Vec& w, double h)
{
    const int m = model.m();
    dampwave::PointJacobians J{Mat(m, m), Mat(m, m), Mat(m, m)};
    for (int j = 0; j < m; ++j) {
        Vec e = Vec::Zero(m);
        e[j] = h;
        J.d1.col(j) = (model.f(u + e, v, w) - model.f(u - e, v, w)) / (2 * h);
        J.d2.col(j) = (model.f(u, v + e, w) - model.f(u, v - e, w)) / (2 * h);
        J.d3.col(j) = (model.f(u, v, w + e) - model.f(u, v, w - e)) / (2 * h);
    }
    return J;
}

// Bisection on a sign change of a scalar function.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-14)
{
    double fa = f(a);
    for (int i = 0; i < 200 && b - a > tol * (1 + std::abs(a)); ++i) {
        double c = 0.5 * (a + b);
        double fc = f(c);
        if ((fa < 0) == (fc < 0)) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    return 0.5 * (a + b);
}

// Roots of a2 x^2 + a1 x + a0 (complex coefficients).
inline std::vector<cplx> quadratic_roots(cplx a2, cplx a1, cplx a0)
{
    cplx d = std::sqrt(a1 * a1 - 4.0 * a2 * a0);
    cplx q = -0.5 * (a1 + (std::real(std::conj(a1) * d) >= 0 ? d : -d));
    return {q / a2, a0 / q};
}

// Durand-Kerner iteration for a polynomial with coefficients c[0] + c[1] x + ... + c[n] x^n.
inline std::vector<cplx> polynomial_roots(std::vector<cplx> c)
{
    const int n = int(c.size()) - 1;
    for (auto& x : c) x /= c[n];
    std::vector<cplx> z(n);
    const cplx seed(0.4, 0.9);
    double radius = 1.0;
    for (int k = 0; k < n; ++k) radius = std::max(radius, 1.0 + std::abs(c[k]));
    for (int k = 0; k < n; ++k) z[k] = radius * std::pow(seed, k);
    auto eval = [&](cplx x) {
        cplx s = c[n];
        for (int k = n - 1; k >= 0; --k) s = s * x + c[k];
        return s;
    };
    for (int it = 0; it < 2000; ++it) {
        double delta = 0;
        for (int k = 0; k < n; ++k) {
            cplx den = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != k) den *= z[k] - z[j];
            cplx step = eval(z[k]) / den;
            z[k] -= step;
            delta = std::max(delta, std::abs(step));
        }
        if (delta < 1e-16) break;
    }
    // Newton polish on the original polynomial.
    for (auto& x : z)
        for (int it = 0; it < 3; ++it) {
            cplx p = c[n], dp = 0;
            for (int k = n - 1; k >= 0; --k) {
                dp = dp * x + p;
                p = p * x + c[k];
            }
            if (std::abs(dp) > 0) x -= p / dp;
        }
    return z;
}

// Greedy matching distance between two point sets of equal size.
inline double matched_distance(std::vector<cplx> a, std::vector<cplx> b)
{
    double worst = 0;
    for (const cplx& x : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](const cplx& p, const cplx& q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

inline double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// Random smooth periodic function on [-R, R]: a few Fourier modes.
struct TrigSeries {
    double R;
    std::vector<int> k;
    std::vector<double> a, b;
    static TrigSeries random(Rng& rng, double R, int modes)
    {
        TrigSeries s{R, {}, {}, {}};
        for (int i = 0; i < modes; ++i) {
            s.k.push_back(rng.integer(1, 4));
            s.a.push_back(rng.uniform(-1, 1));
            s.b.push_back(rng.uniform(-1, 1));
        }
        return s;
    }
    double operator()(double x) const
    {
        double y = 0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            double t = k[i] * M_PI * x / R;
            y += a[i] * std::cos(t) + b[i] * std::sin(t);
        }
        return y;
    }
    double derivative(double x) const
    {
        double y = 0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            double w = k[i] * M_PI / R;
            y += w * (-a[i] * std::sin(w * x) + b[i] * std::cos(w * x));
        }
        return y;
    }
};

}  // namespace oracle

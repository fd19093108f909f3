#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dampwave/errors.hpp"
#include "dampwave/grid.hpp"
#include "oracles.hpp"

using namespace dampwave;

namespace {

GridFunction scalar(const Grid1D& g, double (*fn)(double))
{
    return sample(g, 1, [&](double x) { return Vec::Constant(1, fn(x)); });
}

double max_abs(const Vec& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("grid construction")
{
    Grid1D n = Grid1D::neumann(50.0, 1001);
    CHECK(n.dx() == doctest::Approx(0.1));
    CHECK(n.node(0) == -50.0);
    CHECK(n.node(1000) == doctest::Approx(50.0));

    Grid1D p = Grid1D::periodic(50.0, 200);
    CHECK(p.dx() == doctest::Approx(0.5));
    for (int i = 0; i < p.N(); ++i) CHECK(p.node(i) == doctest::Approx(-p.node(p.N() - 1 - i)));

    CHECK(Grid1D::with_spacing(50.0, 0.1, Boundary::Neumann).N() == 1001);
    CHECK(Grid1D::with_spacing(50.0, 0.5, Boundary::Periodic).N() == 200);
    CHECK_THROWS_AS(Grid1D::neumann(1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(Grid1D::with_spacing(1.0, 0.3, Boundary::Neumann), InvalidArgument);
    CHECK_THROWS_AS(Grid1D::with_spacing(1.0, -0.1, Boundary::Neumann), InvalidArgument);
}

TEST_CASE("difference operators annihilate constants")
{
    for (Boundary bc : {Boundary::Neumann, Boundary::Periodic}) {
        Grid1D g = Grid1D::with_spacing(5.0, 0.25, bc);
        Vec c(2);
        c << 1.5, -2.0;
        GridFunction u = constant(g, c);
        CHECK(max_abs(d1(u).values) == 0.0);
        CHECK(max_abs(d2(u).values) == 0.0);
    }
}

TEST_CASE("neumann closure reflects the ghost node")
{
    Grid1D g = Grid1D::neumann(3.0, 31);
    GridFunction sq = scalar(g, [](double x) { return x * x; });
    GridFunction dsq = d1(sq);
    CHECK(dsq.at(0, 0) == 0.0);
    CHECK(dsq.at(30, 0) == 0.0);
    GridFunction lin = scalar(g, [](double x) { return x; });
    GridFunction dd = d2(lin);
    for (int i = 1; i < 30; ++i) CHECK(std::abs(dd.at(i, 0)) < 1e-12);
}

TEST_CASE("second order convergence on periodic trig functions")
{
    double prev1 = 0, prev2 = 0;
    for (int N : {100, 200, 400}) {
        Grid1D g = Grid1D::periodic(10.0, N);
        const double k = M_PI / 10.0;
        GridFunction s = sample(g, 1, [&](double x) { return Vec::Constant(1, std::sin(k * x)); });
        GridFunction c = sample(g, 1, [&](double x) { return Vec::Constant(1, std::cos(k * x)); });
        const double e1 = max_abs(d1(s).values - k * c.values);
        const double e2 = max_abs(d2(c).values + k * k * c.values);
        if (prev1 > 0) {
            CHECK(prev1 / e1 == doctest::Approx(4.0).epsilon(0.1));
            CHECK(prev2 / e2 == doctest::Approx(4.0).epsilon(0.1));
        }
        prev1 = e1;
        prev2 = e2;
    }
}

TEST_CASE("convergence order on a smooth nonperiodic function with neumann data")
{
    // exp(-x^2) has vanishing derivative at the ends to working precision.
    double prev1 = 0, prev2 = 0;
    for (int N : {201, 401, 801}) {
        Grid1D g = Grid1D::neumann(8.0, N);
        GridFunction u = scalar(g, [](double x) { return std::exp(-x * x); });
        GridFunction du = scalar(g, [](double x) { return -2 * x * std::exp(-x * x); });
        GridFunction ddu = scalar(g, [](double x) { return (4 * x * x - 2) * std::exp(-x * x); });
        const double e1 = max_abs(d1(u).values - du.values);
        const double e2 = max_abs(d2(u).values - ddu.values);
        if (prev1 > 0) {
            CHECK(prev1 / e1 == doctest::Approx(4.0).epsilon(0.1));
            CHECK(prev2 / e2 == doctest::Approx(4.0).epsilon(0.1));
        }
        prev1 = e1;
        prev2 = e2;
    }
}

TEST_CASE("quadrature")
{
    Grid1D n = Grid1D::neumann(50.0, 1001);
    GridFunction one = constant(n, Vec::Ones(1));
    CHECK(inner(one, one) == doctest::Approx(100.0).epsilon(1e-12));
    Grid1D p = Grid1D::periodic(50.0, 200);
    GridFunction one_p = constant(p, Vec::Ones(1));
    CHECK(inner(one_p, one_p) == doctest::Approx(100.0).epsilon(1e-12));

    // sin and cos over full periods are orthogonal under the rectangle rule
    GridFunction s = sample(p, 1, [](double x) { return Vec::Constant(1, std::sin(3 * M_PI * x / 50.0)); });
    GridFunction c = sample(p, 1, [](double x) { return Vec::Constant(1, std::cos(3 * M_PI * x / 50.0)); });
    CHECK(std::abs(inner(s, c)) < 1e-12);

    // trapezoid rule is exact for piecewise linear data
    Grid1D g = Grid1D::neumann(2.0, 9);
    GridFunction x = scalar(g, [](double t) { return t + 2.0; });
    CHECK(inner(x, constant(g, Vec::Ones(1))) == doctest::Approx(8.0));

    CHECK_THROWS_AS(inner(one, one_p), GridMismatch);
}

TEST_CASE("inner product is positive definite on random data")
{
    oracle::Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Grid1D g = Grid1D::neumann(rng.uniform(1, 20), rng.integer(5, 60));
        GridFunction u(g, 2, rng.vec(2 * g.N(), -1, 1));
        CHECK(inner(u, u) > 0.0);
    }
    Grid1D g = Grid1D::neumann(1.0, 7);
    CHECK(inner(GridFunction(g, 1), GridFunction(g, 1)) == 0.0);
}

TEST_CASE("summation by parts on periodic grids")
{
    oracle::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Grid1D g = Grid1D::periodic(7.0, rng.integer(20, 200));
        auto fu = oracle::TrigSeries::random(rng, 7.0, 3);
        auto fw = oracle::TrigSeries::random(rng, 7.0, 3);
        GridFunction u = sample(g, 1, [&](double x) { return Vec::Constant(1, fu(x)); });
        GridFunction w = sample(g, 1, [&](double x) { return Vec::Constant(1, fw(x)); });
        // the central stencil is skew-adjoint under uniform weights
        CHECK(std::abs(inner(d1(u), w) + inner(u, d1(w))) < 1e-12);
    }
}

TEST_CASE("periodic first and second differences commute")
{
    oracle::Rng rng(5);
    Grid1D g = Grid1D::periodic(4.0, 64);
    GridFunction u(g, 2, rng.vec(128, -1, 1));
    CHECK(max_abs(d1(d2(u)).values - d2(d1(u)).values) < 1e-12);
}

TEST_CASE("matrix stencils agree with the direct stencils")
{
    oracle::Rng rng(8);
    for (Boundary bc : {Boundary::Neumann, Boundary::Periodic}) {
        Grid1D g = Grid1D::with_spacing(3.0, 0.25, bc);
        GridFunction u(g, 3, rng.vec(3 * g.N(), -1, 1));
        CHECK(max_abs(d1_matrix(g, 3) * u.values - d1(u).values) < 1e-12);
        CHECK(max_abs(d2_matrix(g, 3) * u.values - d2(u).values) < 1e-10);
    }
}

TEST_CASE("weighted neumann second difference is symmetric")
{
    Grid1D g = Grid1D::neumann(2.0, 11);
    Mat WD2 = weight_vector(g, 1).asDiagonal() * Mat(d2_matrix(g, 1));
    CHECK((WD2 - WD2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("resample")
{
    Grid1D g = Grid1D::neumann(10.0, 201);
    GridFunction u = sample(g, 1, [](double x) { return Vec::Constant(1, std::tanh(x)); });
    CHECK(max_abs(resample(u, 0.0).values - u.values) < 1e-14);

    // shift by one cell equals an index shift, up to O(dx^4) on a generic shift
    GridFunction s = resample(u, g.dx());
    for (int i = 1; i < g.N(); ++i) CHECK(std::abs(s.at(i, 0) - u.at(i - 1, 0)) < 1e-12);

    double prev = 0;
    for (int N : {101, 201, 401}) {
        Grid1D h = Grid1D::neumann(10.0, N);
        GridFunction v = sample(h, 1, [](double x) { return Vec::Constant(1, std::tanh(x)); });
        GridFunction r = resample(v, 0.3 * h.dx());
        double err = 0;
        for (int i = 3; i < N - 3; ++i) err = std::max(err, std::abs(r.at(i, 0) - std::tanh(h.node(i) - 0.3 * h.dx())));
        if (prev > 0) CHECK(prev / err > 12.0);
        prev = err;
    }

    Grid1D p = Grid1D::periodic(5.0, 50);
    GridFunction q = sample(p, 1, [](double x) { return Vec::Constant(1, std::sin(M_PI * x / 5.0)); });
    CHECK(max_abs(resample(q, 10.0).values - q.values) < 1e-12);

    // neumann data is continued by its end values
    GridFunction far = resample(u, 50.0);
    CHECK(far.at(0, 0) == u.at(0, 0));
}

TEST_CASE("interpolation to another grid")
{
    Grid1D coarse = Grid1D::neumann(10.0, 201);
    GridFunction u = sample(coarse, 1, [](double x) { return Vec::Constant(1, std::tanh(x)); });
    Grid1D fine = Grid1D::neumann(9.0, 361);
    GridFunction v = interpolate_to(u, fine);
    for (int i = 0; i < fine.N(); ++i) CHECK(std::abs(v.at(i, 0) - std::tanh(fine.node(i))) < 1e-5);
    // identical grids reproduce the data
    CHECK(max_abs(interpolate_to(u, coarse).values - u.values) < 1e-14);
}

TEST_CASE("periodic and neumann grids on the same nodes")
{
    Grid1D p = Grid1D::periodic(50.0, 200);
    Grid1D n = neumann_on_same_nodes(p);
    CHECK(n.N() == 200);
    CHECK(n.dx() == doctest::Approx(0.5));
    for (int i = 0; i < 200; ++i) CHECK(n.node(i) == doctest::Approx(p.node(i)));
    GridFunction u = sample(n, 2, [](double x) { return Vec{{x, -x}}; });
    GridFunction w = rebind(u, p);
    CHECK(w.grid == p);
    CHECK(w.values == u.values);
    CHECK_THROWS_AS(rebind(u, Grid1D::periodic(50.0, 100)), GridMismatch);
    CHECK_THROWS_AS(neumann_on_same_nodes(n), InvalidArgument);
}

TEST_CASE("csv round trip")
{
    oracle::Rng rng(2);
    for (Boundary bc : {Boundary::Neumann, Boundary::Periodic}) {
        Grid1D g = Grid1D::with_spacing(2.5, 0.1, bc);
        GridFunction u(g, 2, rng.vec(2 * g.N(), -3, 3));
        std::stringstream ss;
        write_csv(ss, u);
        CHECK(ss.str().rfind("xi,u1,u2\n", 0) == 0);
        GridFunction back = read_csv(ss, bc);
        CHECK(back.grid == g);
        CHECK(back.values == u.values);
    }
}

#include <chrono>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dampwave/csv.hpp"
#include "dampwave/errors.hpp"
#include "dampwave/firstorder.hpp"
#include "oracles.hpp"

using namespace dampwave;

namespace {

const double kNagumoMu = -0.348155;
const double kFhnMu = -0.7867;

Mat blockdiag3(const Mat& a, const Mat& b, const Mat& c)
{
    const auto n = a.rows();
    Mat out = Mat::Zero(3 * n, 3 * n);
    out.block(0, 0, n, n) = a;
    out.block(n, n, n, n) = b;
    out.block(2 * n, 2 * n, n, n) = c;
    return out;
}

GridFunction arctan_data(const Grid1D& g)
{
    return sample(g, 1, [](double x) { return Vec::Constant(1, std::atan(x) / M_PI + 0.5); });
}

}  // namespace

TEST_CASE("positive square root")
{
    const auto s = sqrt_positive_diagonalizable(Mat::Constant(1, 1, 0.25), Mat::Identity(1, 1));
    CHECK(s.N(0, 0) == doctest::Approx(2.0));

    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = 3.0;
    const auto d = sqrt_positive_diagonalizable(0.1 * Mat::Identity(2, 2), A);
    CHECK((d.N - Vec((Vec(2) << std::sqrt(10.0), std::sqrt(30.0)).finished()).asDiagonal().toDenseMatrix()).norm() <
          1e-12);
    CHECK(d.lambda[0] > d.lambda[1]);

    oracle::Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = rng.integer(1, 4);
        const Mat S = rng.mat(m, m, -1, 1) + 2.0 * Mat::Identity(m, m);
        const Vec l = rng.vec(m, 0.2, 5.0);
        const Mat M = rng.mat(m, m, -0.2, 0.2) + Mat::Identity(m, m);
        const Mat K = S * l.asDiagonal() * S.inverse();
        const Mat Aa = M * K;
        const auto r = sqrt_positive_diagonalizable(M, Aa);
        const Mat MA = M.inverse() * Aa;
        CHECK((r.N * r.N - MA).norm() <= 1e-12 * MA.norm() * r.cond_S);
        for (int j = 0; j + 1 < m; ++j) CHECK(r.lambda[j] >= r.lambda[j + 1]);
        CHECK(r.lambda.minCoeff() > 0.0);
    }

    Mat rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK_THROWS_AS(sqrt_positive_diagonalizable(Mat::Identity(2, 2), rot), NotPositiveDiagonalizable);
    CHECK_THROWS_AS(sqrt_positive_diagonalizable(Mat::Identity(1, 1), Mat::Constant(1, 1, -1.0)),
                    NotPositiveDiagonalizable);
    Mat jordan(2, 2);
    jordan << 1, 1, 0, 1;
    CHECK_THROWS_AS(sqrt_positive_diagonalizable(Mat::Identity(2, 2), jordan), NotPositiveDiagonalizable);
}

TEST_CASE("first-order system construction")
{
    for (int which = 0; which < 2; ++which) {
        const ModelSpec model = which == 0 ? nagumo_wave_model(0.25, 0.25) : fhn_pulse_model();
        const FirstOrderSystem sys(model, 1.3);
        const int m = sys.m();
        const Mat L = sys.lambda().asDiagonal();
        const Mat D = sys.T().inverse() * sys.E() * sys.T();
        CHECK((D - blockdiag3(L, L, -L)).norm() <= 1e-10 * L.norm());
        CHECK(std::isfinite(sys.cond_T()));
        const Mat NN = sys.N() * sys.N();
        CHECK((NN - model.Minv() * model.A()).norm() <= 1e-10 * NN.norm());

        // F vanishes at the lifted rest states.
        const auto& st = model.require_states();
        for (const Vec& v : {st.v_minus, st.v_plus}) {
            Vec U(3 * m);
            U << v, Vec::Zero(m), sys.c() * v;
            CHECK(sys.F(U).norm() <= 1e-12);
        }

        // Elimination: the components of F reproduce the second-order equation.
        oracle::Rng rng(23 + which);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec u = rng.vec(m, -1.5, 1.5), ux = rng.vec(m, -1, 1), ut = rng.vec(m, -1, 1);
            Vec U(3 * m);
            U << u, ut + sys.N() * ux, ut - sys.N() * ux + sys.c() * u;
            const auto a = sys.args(U);
            CHECK((a.ux - ux).norm() <= 1e-12);
            CHECK((a.ut - ut).norm() <= 1e-12);
            const Vec F = sys.F(U);
            CHECK((F.head(m) - (ut - sys.c() * u + sys.c() * u - sys.N() * ux)).norm() <= 1e-12);
            CHECK((model.M() * F.segment(m, m) - model.f(u, ux, ut)).norm() <= 1e-12);
            CHECK((F.tail(m) - F.segment(m, m) - sys.c() * U.segment(m, m)).norm() <= 1e-12);
        }
    }
    const FirstOrderSystem nag(nagumo_wave_model(0.25, 0.25), 1.0);
    CHECK((nag.E() - blockdiag3(Mat::Constant(1, 1, 2), Mat::Constant(1, 1, 2), Mat::Constant(1, 1, -2))).norm() <
          1e-14);
}

TEST_CASE("Z matrices against finite differences of F")
{
    for (int which = 0; which < 2; ++which) {
        const ModelSpec model = which == 0 ? nagumo_wave_model(0.25, 0.25) : fhn_pulse_model();
        const FirstOrderSystem sys(model, 0.7);
        const int k = 3 * sys.m();
        oracle::Rng rng(31);
        std::vector<Vec> points;
        for (Side s : {Side::Minus, Side::Plus}) {
            const Vec v = s == Side::Minus ? model.require_states().v_minus : model.require_states().v_plus;
            Vec U(k);
            U << v, Vec::Zero(sys.m()), sys.c() * v;
            points.push_back(U);
            const Mat Zl = sys.Z_limit(s);
            CHECK((Zl - sys.Z(U)).norm() <= 1e-14);
        }
        for (int t = 0; t < 5; ++t) points.push_back(rng.vec(k, -1, 1));
        for (const Vec& U : points) {
            Mat fd(k, k);
            const double h = 1e-6;
            for (int j = 0; j < k; ++j) {
                Vec e = Vec::Zero(k);
                e[j] = h;
                fd.col(j) = (sys.F(U + e) - sys.F(U - e)) / (2 * h);
            }
            CHECK((sys.Z(U) - fd).cwiseAbs().maxCoeff() <= 1e-6 * (1 + fd.cwiseAbs().maxCoeff()));
        }
    }
    // Scalar Nagumo: Phi2 + Phi3 = M^-1 D3f = -1/eps.
    const FirstOrderSystem nag(nagumo_wave_model(0.25, 0.25), 0.7);
    const Mat Z = nag.Z_limit(Side::Minus);
    CHECK(Z(1, 1) + Z(1, 2) == doctest::Approx(-4.0));
}

TEST_CASE("Z along the exact front tends to the limits")
{
    const ModelSpec model = nagumo_wave_model(0.25, 0.25);
    const auto fr = nagumo_exact_front(0.25, 0.25);
    const FirstOrderSystem sys(model, 1.0);
    const Grid1D g = Grid1D::with_spacing(50, 0.1, Boundary::Neumann);
    const GridFunction v = sample(g, 1, [&](double x) { return Vec::Constant(1, fr.profile(x)); });
    const GridFunction V = lift_state(sys, v, GridFunction(g, 1), fr.mu);
    const Mat Zl = sys.Z(Vec(V.node_values(0))), Zr = sys.Z(Vec(V.node_values(g.N() - 1)));
    CHECK((Zl - sys.Z_limit(Side::Minus)).cwiseAbs().maxCoeff() <= 1e-3);
    CHECK((Zr - sys.Z_limit(Side::Plus)).cwiseAbs().maxCoeff() <= 1e-3);
    const Mat Zl1 = sys.Z(Vec(V.node_values(1)));
    CHECK((Zl1 - Zl).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("lift and project")
{
    oracle::Rng rng(41);
    for (int which = 0; which < 2; ++which) {
        const ModelSpec model = which == 0 ? nagumo_wave_model(0.25, 0.25) : fhn_pulse_model();
        const FirstOrderSystem sys(model, rng.uniform(-2, 2));
        const int m = sys.m();
        const Grid1D g = Grid1D::periodic(10, 64);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<oracle::TrigSeries> sv, sd;
            for (int c = 0; c < m; ++c) {
                sv.push_back(oracle::TrigSeries::random(rng, 10, 3));
                sd.push_back(oracle::TrigSeries::random(rng, 10, 3));
            }
            const GridFunction v = sample(g, m, [&](double x) {
                Vec r(m);
                for (int c = 0; c < m; ++c) r[c] = sv[c](x);
                return r;
            });
            const GridFunction vdot = sample(g, m, [&](double x) {
                Vec r(m);
                for (int c = 0; c < m; ++c) r[c] = sd[c](x);
                return r;
            });
            const double mu = rng.uniform(-1, 1);
            const GridFunction V = lift_state(sys, v, vdot, mu);
            const ProjectedState p = project_state(sys, V, mu);
            CHECK((p.v.values - v.values).cwiseAbs().maxCoeff() <= 1e-13);
            CHECK((p.vdot.values - vdot.values).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK((p.v_xi.values - d1(v).values).cwiseAbs().maxCoeff() <= 1e-12);
        }
        const Vec vp = model.require_states().v_plus;
        const GridFunction V = lift_state(sys, constant(g, vp), GridFunction(g, m), 0.4);
        for (int i = 0; i < g.N(); ++i) {
            CHECK((V.node_values(i).head(m) - vp).norm() == 0.0);
            CHECK(V.node_values(i).segment(m, m).norm() == 0.0);
            CHECK((V.node_values(i).tail(m) - sys.c() * vp).norm() <= 1e-15);
        }
    }

    // The lifted wave: V2 = (N - mu) v_xi.
    const FirstOrderSystem sys(nagumo_wave_model(0.25, 0.25), 1.0);
    const auto fr = nagumo_exact_front(0.25, 0.25);
    const Grid1D g = Grid1D::with_spacing(20, 0.1, Boundary::Neumann);
    const GridFunction v = sample(g, 1, [&](double x) { return Vec::Constant(1, fr.profile(x)); });
    const GridFunction V = lift_state(sys, v, GridFunction(g, 1), fr.mu);
    const GridFunction vx = d1(v);
    for (int i = 0; i < g.N(); ++i) CHECK(V.at(i, 1) == doctest::Approx((2.0 - fr.mu) * vx.at(i, 0)));
}

TEST_CASE("first-order traveling wave residual")
{
    const ModelSpec model = nagumo_wave_model(0.25, 0.25);
    const auto fr = nagumo_exact_front(0.25, 0.25);
    const FirstOrderSystem sys(model, 1.2);
    std::vector<double> res;
    for (double dx : {0.2, 0.1, 0.05}) {
        const Grid1D g = Grid1D::with_spacing(30, dx, Boundary::Neumann);
        const GridFunction v = sample(g, 1, [&](double x) { return Vec::Constant(1, fr.profile(x)); });
        res.push_back(first_order_tw_residual(sys, v, fr.mu));
        CHECK(first_order_tw_residual(sys, v, fr.mu + 0.1) > 0.1);
    }
    CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.15));
    CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.15));

    const Grid1D g = Grid1D::periodic(10, 40);
    CHECK(first_order_tw_residual(sys, constant(g, Vec::Ones(1)), fr.mu) <= 1e-14);
    CHECK_THROWS_AS(first_order_tw_residual(sys, constant(g, Vec::Ones(1)), 2.0), SingularCharacteristic);
    CHECK_THROWS_AS(first_order_tw_residual(sys, constant(g, Vec::Ones(1)), -2.0), SingularCharacteristic);
}

TEST_CASE("first-order dispersion: union with the extra line")
{
    for (int which = 0; which < 2; ++which) {
        const ModelSpec model = which == 0 ? nagumo_wave_model(0.25, 0.25) : fhn_pulse_model();
        const double mu = which == 0 ? kNagumoMu : kFhnMu;
        const FirstOrderSystem sys(model, default_shift(model, mu));
        CHECK(sys.c() > 1.0);
        for (Side side : {Side::Minus, Side::Plus})
            for (int k = 0; k <= 200; ++k) CHECK(union_defect(sys, mu, -5.0 + 0.05 * k, side) <= 1e-8);

        // Conjugate symmetry.
        for (double w : {0.3, 1.7, 4.2}) {
            const CVec a = first_order_symbol_eigs(sys, mu, w, Side::Minus);
            const CVec b = first_order_symbol_eigs(sys, mu, -w, Side::Minus).conjugate();
            CHECK(oracle::matched_distance({a.data(), a.data() + a.size()},
                                           {b.data(), b.data() + b.size()}) <= 1e-9);
        }
    }
    const FirstOrderSystem sys(nagumo_wave_model(0.25, 0.25), 1.5);
    const CVec ev = first_order_symbol_eigs(sys, kNagumoMu, 0.0, Side::Minus);
    const std::vector<cplx> expect{-1.5, -2.0 + std::sqrt(3.0), -2.0 - std::sqrt(3.0)};
    CHECK(oracle::matched_distance({ev.data(), ev.data() + ev.size()}, expect) <= 1e-12);

    // The union is insensitive to a shift placed on the dispersion line itself.
    const FirstOrderSystem odd(nagumo_wave_model(0.25, 0.25), 2.0);
    for (int k = 0; k <= 40; ++k) CHECK(union_defect(odd, kNagumoMu, -4.0 + 0.2 * k, Side::Minus) <= 1e-8);
}

TEST_CASE("symbol factorization")
{
    oracle::Rng rng(77);
    const FirstOrderSystem nag(nagumo_wave_model(0.25, 0.25), 1.27);
    const FirstOrderSystem fhn(fhn_pulse_model(), 1.23);
    CHECK(symbol_factorization_defect(nag, kNagumoMu, 0.0, 0.0, Side::Minus) <= 1e-14);
    for (int k = 0; k < 100; ++k) {
        const cplx l(rng.uniform(-3, 3), rng.uniform(-3, 3));
        const double w = rng.uniform(-5, 5);
        CHECK(symbol_factorization_defect(nag, kNagumoMu, l, w, k % 2 ? Side::Plus : Side::Minus) <= 1e-12);
        CHECK(symbol_factorization_defect(fhn, kFhnMu, l, w, k % 2 ? Side::Plus : Side::Minus) <= 1e-10);
    }
}

TEST_CASE("first-order run: rest states stay at rest")
{
    const ModelSpec model = fhn_pulse_model();
    const FirstOrderSystem sys(model, 1.0);
    const Grid1D g = Grid1D::with_spacing(10, 0.5, Boundary::Neumann);
    const Vec v = model.require_states().v_minus;
    const GridFunction V0 = lift_state(sys, constant(g, v), GridFunction(g, 2), 0.0);
    TimeStepperConfig cfg;
    cfg.dt = 0.1;
    cfg.T = 2.0;
    const auto tr = run_first_order(sys, V0, cfg);
    for (const auto& s : tr.samples) CHECK((s.V.values - V0.values).cwiseAbs().maxCoeff() <= 1e-12);

    cfg.T = 0.0;
    const auto t0 = run_first_order(sys, V0, cfg);
    CHECK(t0.samples.size() == 1);
    CHECK(t0.records.size() == 1);
    CHECK_THROWS_AS(run_first_order(sys, GridFunction(g, 2), cfg), GridMismatch);
}

TEST_CASE("first-order and second-order runs agree")
{
    const ModelSpec model = nagumo_wave_model(0.25, 0.25);
    const FirstOrderSystem sys(model, default_shift(model, kNagumoMu));
    const Grid1D g = Grid1D::with_spacing(50, 0.1, Boundary::Neumann);
    const GridFunction u0 = arctan_data(g), v0(g, 1);
    TimeStepperConfig cfg;
    cfg.dt = 0.05;
    cfg.T = 10.0;
    cfg.sample_every = 1;
    const auto second = run_cauchy(model, g, u0, v0, cfg);
    const auto first = run_first_order(sys, lift_state(sys, u0, v0, 0.0), cfg);
    REQUIRE(first.samples.size() == second.samples.size());
    double err = 0.0;
    for (std::size_t k = 0; k < first.samples.size(); ++k) {
        CHECK(first.samples[k].t == doctest::Approx(second.samples[k].t));
        const auto p = project_state(sys, first.samples[k].V, 0.0);
        GridFunction du = p.v, dv = p.vdot;
        du.values -= second.samples[k].v.values;
        dv.values -= second.samples[k].vdot.values;
        err = std::max({err, norm(du), norm(dv)});
    }
    CHECK(err <= 1e-2);

    const WFunctionals w = w_functionals(sys, first);
    REQUIRE(w.t.size() == first.samples.size() - 2);
    CHECK(*std::max_element(w.w2.begin(), w.w2.end()) <= 1e-2);
    CHECK(*std::max_element(w.w3.begin(), w.w3.end()) <= 1e-2);
    // With c > 0 the functionals decay along the run.
    CHECK(w.w2.back() < 1e-2 * w.w2.front());
}

TEST_CASE("frozen first-order run matches the frozen second-order speed")
{
    const ModelSpec model = nagumo_wave_model(0.25, 0.25);
    const FirstOrderSystem sys(model, default_shift(model, kNagumoMu));
    const Grid1D g = Grid1D::with_spacing(50, 0.1, Boundary::Neumann);
    const GridFunction u0 = arctan_data(g), v0(g, 1);
    const Template tmpl = make_template(u0);
    FreezeConfig fc;
    fc.time.dt = 0.1;
    fc.time.T = 150.0;
    fc.mu2_policy = Mu2Policy::Zero;
    const auto second = run_freezing(model, g, PhaseKind::Fix3, u0, v0, tmpl, fc);
    const auto first = run_first_order(sys, lift_state(sys, u0, v0, 0.0), fc.time, tmpl);
    CHECK(std::abs(first.records.back().mu - second.diagnostics.back().mu1) <= 1e-3);
    CHECK(std::abs(first.records.back().mu - kNagumoMu) <= 1e-2);
    for (const auto& r : first.records) CHECK(std::abs(r.phase_residual) <= 1e-9);
    // The projected profile is the frozen one.
    const auto p = project_state(sys, first.samples.back().V, first.samples.back().mu);
    GridFunction diff = p.v;
    diff.values -= second.final_state().v.values;
    CHECK(norm(diff) <= 1e-2);
}

TEST_CASE("first-order trajectory csv")
{
    const FirstOrderSystem sys(nagumo_wave_model(0.25, 0.25), 1.0);
    const Grid1D g = Grid1D::with_spacing(2, 0.5, Boundary::Neumann);
    TimeStepperConfig cfg;
    cfg.dt = 0.1;
    cfg.T = 0.2;
    cfg.sample_every = 1;
    const auto tr = run_first_order(sys, lift_state(sys, arctan_data(g), GridFunction(g, 1), 0.0), cfg);
    std::stringstream ss;
    write_csv(ss, tr);
    const auto t = csv::read(ss);
    CHECK(t.header == std::vector<std::string>{"t", "xi", "V1", "V2", "V3"});
    CHECK(t.rows.size() == 3 * 9);
    CHECK(t.rows.back()[0] == doctest::Approx(0.2));
    CHECK(t.rows[4][2] == tr.samples[0].V.at(4, 0));
}

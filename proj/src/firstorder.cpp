#include "dampwave/firstorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dampwave/csv.hpp"
#include "dampwave/errors.hpp"
#include "dampwave/newton.hpp"

namespace dampwave {

namespace {

constexpr cplx I1{0.0, 1.0};

bool re_im_less(const cplx& a, const cplx& b)
{
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

double condition_number(const Mat& S)
{
    Eigen::JacobiSVD<Mat> svd(S);
    const Vec& s = svd.singularValues();
    return s[0] / s[s.size() - 1];
}

}  // namespace

PositiveSqrt sqrt_positive_diagonalizable(const Mat& M, const Mat& A)
{
    const Mat K = M.inverse() * A;
    const double scale = std::max(K.norm(), 1e-300);
    Eigen::EigenSolver<Mat> es(K, true);
    if (es.info() != Eigen::Success) throw NotPositiveDiagonalizable("eigen decomposition of M^-1 A failed");
    const CVec ev = es.eigenvalues();
    const CMat evec = es.eigenvectors();
    for (const cplx& z : ev)
        if (std::abs(z.imag()) > 1e-10 * scale || !(z.real() > 1e-14 * scale))
            throw NotPositiveDiagonalizable("M^-1 A has an eigenvalue that is not real and positive");

    const int m = int(K.rows());
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ev[a].real() > ev[b].real(); });

    PositiveSqrt r{Mat(m, m), Mat(m, m), Vec(m), 0.0};
    for (int j = 0; j < m; ++j) {
        // Real eigenvalue, so the eigenvector can be taken real.
        CVec v = evec.col(order[j]);
        Eigen::Index k = 0;
        v.cwiseAbs().maxCoeff(&k);
        v *= std::conj(v[k]) / std::abs(v[k]);
        r.S.col(j) = v.real().normalized();
        r.lambda[j] = std::sqrt(ev[order[j]].real());
    }
    r.cond_S = condition_number(r.S);
    if (!(r.cond_S < 1e10)) throw NotPositiveDiagonalizable("M^-1 A is defective or nearly so");
    r.N = r.S * r.lambda.asDiagonal() * r.S.inverse();
    return r;
}

FirstOrderSystem::FirstOrderSystem(const ModelSpec& model, double c)
    : model_(model), c_(c), sqrt_(sqrt_positive_diagonalizable(model.M(), model.A()))
{
    const int n = m();
    Ninv_ = sqrt_.N.inverse();
    E_ = Mat::Zero(3 * n, 3 * n);
    T_ = Mat::Zero(3 * n, 3 * n);
    for (int b = 0; b < 3; ++b) {
        E_.block(b * n, b * n, n, n) = b == 2 ? Mat(-sqrt_.N) : sqrt_.N;
        T_.block(b * n, b * n, n, n) = sqrt_.S;
    }
}

FirstOrderSystem::Args FirstOrderSystem::args(const Vec& U) const
{
    const int n = m();
    const Vec U1 = U.head(n), U2 = U.segment(n, n), U3 = U.tail(n);
    return {U1, 0.5 * Ninv_ * (U2 - U3 + c_ * U1), 0.5 * (U2 + U3 - c_ * U1)};
}

Vec FirstOrderSystem::F(const Vec& U) const
{
    const int n = m();
    const Args a = args(U);
    const Vec ft = model_.Minv() * model_.f(a.u, a.ux, a.ut);
    Vec out(3 * n);
    out.head(n) = -c_ * U.head(n) + U.tail(n);
    out.segment(n, n) = ft;
    out.tail(n) = ft + c_ * U.segment(n, n);
    return out;
}

Mat FirstOrderSystem::Z(const Vec& u, const Vec& ux, const Vec& ut) const
{
    const int n = m();
    const PointJacobians J = model_.jacobians(u, ux, ut);
    const Mat& Minv = model_.Minv();
    const Mat phi3 = 0.5 * Minv * (-J.d2 * Ninv_ + J.d3);
    const Mat phi2 = 0.5 * Minv * (J.d2 * Ninv_ + J.d3);
    const Mat phi1 = Minv * J.d1 - c_ * phi3;
    const Mat Id = Mat::Identity(n, n);
    Mat Zm(3 * n, 3 * n);
    Zm << -c_ * Id, Mat::Zero(n, n), Id,  //
        phi1, phi2, phi3,                  //
        phi1, phi2 + c_ * Id, phi3;
    return Zm;
}

Mat FirstOrderSystem::Z(const Vec& U) const
{
    const Args a = args(U);
    return Z(a.u, a.ux, a.ut);
}

Mat FirstOrderSystem::Z_limit(Side side) const
{
    const auto& st = model_.require_states();
    const Vec z = Vec::Zero(m());
    return Z(side == Side::Minus ? st.v_minus : st.v_plus, z, z);
}

double default_shift(const ModelSpec& model, double mu)
{
    return spectral_gap(dispersion_curves(model, mu)).beta + 1.0;
}

// ---- lifting ----

namespace {

using NodeMap = Eigen::Map<Mat>;
using ConstNodeMap = Eigen::Map<const Mat>;

// Applies K to every node of a node-major vector with m components.
Vec apply_nodes(const Mat& K, const Vec& x)
{
    const Eigen::Index m = K.cols();
    Vec out(x.size() / m * K.rows());
    NodeMap(out.data(), K.rows(), x.size() / m).noalias() = K * ConstNodeMap(x.data(), m, x.size() / m);
    return out;
}

Mat block(const FirstOrderSystem& sys, int which, const Vec& V)
{
    const int m = sys.m();
    const Eigen::Index N = V.size() / (3 * m);
    return ConstNodeMap(V.data(), 3 * m, N).middleRows(which * m, m);
}

Vec flatten(const Mat& nodes) { return Eigen::Map<const Vec>(nodes.data(), nodes.size()); }

}  // namespace

GridFunction lift_state(const FirstOrderSystem& sys, const GridFunction& v, const GridFunction& vdot, double mu)
{
    const int m = sys.m();
    check_same_layout(v.grid, v.m, vdot.grid, vdot.m);
    if (v.m != m) throw GridMismatch("lift: profile has the wrong number of components");
    const Mat Id = Mat::Identity(m, m);
    const Vec vx = d1(v).values;
    const Vec V2 = vdot.values + apply_nodes(sys.N() - mu * Id, vx);
    const Vec V3 = vdot.values - apply_nodes(sys.N() + mu * Id, vx) + sys.c() * v.values;

    const int N = v.N();
    GridFunction out(v.grid, 3 * m);
    NodeMap nodes(out.values.data(), 3 * m, N);
    nodes.topRows(m) = ConstNodeMap(v.values.data(), m, N);
    nodes.middleRows(m, m) = ConstNodeMap(V2.data(), m, N);
    nodes.bottomRows(m) = ConstNodeMap(V3.data(), m, N);
    return out;
}

ProjectedState project_state(const FirstOrderSystem& sys, const GridFunction& V, double mu)
{
    const int m = sys.m();
    if (V.m != 3 * m) throw GridMismatch("project: state has the wrong number of components");
    const Mat V1 = block(sys, 0, V.values), V2 = block(sys, 1, V.values), V3 = block(sys, 2, V.values);
    const Mat vx = 0.5 * sys.Ninv() * (V2 - V3 + sys.c() * V1);
    const Mat vdot = 0.5 * (V2 + V3 - sys.c() * V1) + mu * vx;
    return {GridFunction(V.grid, m, flatten(V1)), GridFunction(V.grid, m, flatten(vdot)),
            GridFunction(V.grid, m, flatten(vx))};
}

namespace {

Vec F_nodes(const FirstOrderSystem& sys, const Vec& V)
{
    const int k = 3 * sys.m();
    Vec out(V.size());
    for (Eigen::Index i = 0; i < V.size() / k; ++i) out.segment(i * k, k) = sys.F(V.segment(i * k, k));
    return out;
}

SpMat Z_nodes(const FirstOrderSystem& sys, const Vec& V)
{
    const int k = 3 * sys.m();
    const Eigen::Index N = V.size() / k;
    Mat blocks(k, V.size());
    for (Eigen::Index i = 0; i < N; ++i) blocks.middleCols(i * k, k) = sys.Z(Vec(V.segment(i * k, k)));
    return block_diagonal(blocks);
}

void check_characteristics(const FirstOrderSystem& sys, double mu)
{
    for (double l : sys.lambda())
        if (std::abs(l - mu) <= 1e-10 || std::abs(l + mu) <= 1e-10)
            throw SingularCharacteristic("E + mu is singular: characteristic speed equals the wave speed");
}

}  // namespace

double first_order_tw_residual(const FirstOrderSystem& sys, const GridFunction& v, double mu)
{
    check_characteristics(sys, mu);
    const GridFunction V = lift_state(sys, v, GridFunction(v.grid, v.m), mu);
    const Mat K = sys.E() + mu * Mat::Identity(3 * sys.m(), 3 * sys.m());
    GridFunction r(V.grid, V.m, apply_nodes(K, d1(V).values) + F_nodes(sys, V.values));
    return norm(r);
}

// ---- symbols ----

CVec first_order_symbol_eigs(const FirstOrderSystem& sys, double mu, double omega, Side side)
{
    const int k = 3 * sys.m();
    const CMat L = I1 * omega * (sys.E() + mu * Mat::Identity(k, k)).cast<cplx>() + sys.Z_limit(side).cast<cplx>();
    Eigen::ComplexEigenSolver<CMat> es(L, false);
    CVec ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), re_im_less);
    return ev;
}

namespace {

using ld = long double;
using LMat = Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic>;
using LCMat = Eigen::Matrix<std::complex<ld>, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<std::complex<ld>> eigenvalues(const LCMat& A)
{
    Eigen::ComplexEigenSolver<LCMat> es(A, false);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

// Both spectra are recomputed in extended precision from M, A and the Jacobians: at a
// double root of the symbol the eigenvalues move like the square root of the round-off.
double union_defect(const FirstOrderSystem& sys, double mu, double omega, Side side)
{
    const int m = sys.m();
    const ModelSpec& model = sys.model();
    const auto& st = model.require_states();
    const Vec z = Vec::Zero(m);
    const PointJacobians J = model.jacobians(side == Side::Minus ? st.v_minus : st.v_plus, z, z);
    const LMat Minv = model.M().cast<ld>().inverse();
    const LMat D1f = J.d1.cast<ld>(), D2f = J.d2.cast<ld>(), D3f = J.d3.cast<ld>();
    const ld c = sys.c(), w = omega, mul = mu;
    const std::complex<ld> iw(0, w);

    // N from M^-1 A with the eigenvectors refined in extended precision.
    const LMat K = Minv * model.A().cast<ld>();
    Eigen::EigenSolver<LMat> es(K, true);
    const LMat S = es.eigenvectors().real();
    const LMat Sinv = S.inverse();
    const LMat Ld = (Sinv * K * S).diagonal().cwiseSqrt().asDiagonal();
    const LMat N = S * Ld * Sinv;
    const LMat Ninv = N.inverse();

    const LMat phi3 = 0.5L * Minv * (-D2f * Ninv + D3f);
    const LMat phi2 = 0.5L * Minv * (D2f * Ninv + D3f);
    const LMat phi1 = Minv * D1f - c * phi3;
    const LMat Id = LMat::Identity(m, m), O = LMat::Zero(m, m);
    LMat Zl(3 * m, 3 * m), El(3 * m, 3 * m);
    Zl << -c * Id, O, Id, phi1, phi2, phi3, phi1, phi2 + c * Id, phi3;
    El << N, O, O, O, N, O, O, O, -N;
    const LCMat first = iw * (El + mul * LMat::Identity(3 * m, 3 * m)).cast<std::complex<ld>>() +
                        Zl.cast<std::complex<ld>>();
    std::vector<std::complex<ld>> a = eigenvalues(first);

    const LMat Mld = model.M().cast<ld>();
    const LCMat A1 = -D3f.cast<std::complex<ld>>() - 2.0L * iw * mul * Mld.cast<std::complex<ld>>();
    const LCMat A0 = (w * w * (model.A().cast<ld>() - mul * mul * Mld) - D1f).cast<std::complex<ld>>() +
                     iw * (mul * D3f - D2f).cast<std::complex<ld>>();
    LCMat C = LCMat::Zero(2 * m, 2 * m);
    C.topRightCorner(m, m) = LCMat::Identity(m, m);
    C.bottomLeftCorner(m, m) = -Minv.cast<std::complex<ld>>() * A0;
    C.bottomRightCorner(m, m) = -Minv.cast<std::complex<ld>>() * A1;
    std::vector<std::complex<ld>> expect = eigenvalues(C);
    for (int j = 0; j < m; ++j) expect.push_back(-c + iw * (std::sqrt(std::real(Ld(j, j) * Ld(j, j))) + mul));

    // Greedy matching, closest pairs first.
    ld worst = 0;
    while (!a.empty()) {
        std::size_t ia = 0, ib = 0;
        ld best = INFINITY;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < expect.size(); ++j)
                if (std::abs(a[i] - expect[j]) < best) {
                    best = std::abs(a[i] - expect[j]);
                    ia = i;
                    ib = j;
                }
        worst = std::max(worst, best);
        a.erase(a.begin() + std::ptrdiff_t(ia));
        expect.erase(expect.begin() + std::ptrdiff_t(ib));
    }
    return double(worst);
}

double symbol_factorization_defect(const FirstOrderSystem& sys, double mu, cplx lambda, double omega, Side side)
{
    const int m = sys.m();
    const int k = 3 * m;
    const double c = sys.c();
    const CMat Id = CMat::Identity(m, m), O = CMat::Zero(m, m);
    const CMat Zc = sys.Z_limit(side).cast<cplx>();
    const CMat phi2 = Zc.block(m, m, m, m), phi3 = Zc.block(m, 2 * m, m, m);
    const CMat N = sys.N().cast<cplx>();
    const CMat Pm = lambda * Id - I1 * omega * (N + mu * Id);
    const CMat Pp = lambda * Id + I1 * omega * (N - mu * Id);

    const CMat P1st = lambda * CMat::Identity(k, k) - I1 * omega * (sys.E() + mu * Mat::Identity(k, k)).cast<cplx>() - Zc;
    CMat T1(k, k), R(k, k), T2(k, k);
    T1 << O, O, Id, O, Id, -Id, Id, O, O;
    const CMat MP = sys.model().Minv().cast<cplx>() * SymbolPencil(sys.model(), mu, side).matrix(lambda, omega);
    R << MP, -phi2 - c * Id, Pp - phi3,  //
        O, Pm + c * Id, -Pp,             //
        O, O, -Id;
    T2 << Id, O, O, -Pp, Id, O, -Pm - c * Id, O, Id;
    return (T1 * P1st - R * T2).cwiseAbs().maxCoeff();
}

// ---- time stepping ----

FirstOrderTrajectory run_first_order(const FirstOrderSystem& sys, const GridFunction& V0, const TimeStepperConfig& cfg,
                                     const std::optional<Template>& tmpl)
{
    cfg.validate();
    const int m = sys.m();
    const int k = 3 * m;
    if (V0.m != k) throw GridMismatch("first-order data needs 3m components");
    const Grid1D& grid = V0.grid;
    const int N = grid.N();
    if (tmpl) check_same_layout(tmpl->vhat.grid, tmpl->vhat.m, grid, m);

    const SpMat D1 = d1_matrix(grid, k);
    const SpMat Eb = block_diagonal(sys.E(), N);
    const SpMat Id = block_diagonal(Mat::Identity(k, k), N);
    const Vec W = weight_vector(grid, k);

    // Phase functional <V1 - vhat, vhat_xi> as s . V - s0.
    Vec s = Vec::Zero(Eigen::Index(N) * k);
    double s0 = 0.0;
    if (tmpl) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < m; ++j) {
                s[Eigen::Index(i) * k + j] = grid.weight(i) * tmpl->vhat_xi.at(i, j);
                s0 += grid.weight(i) * tmpl->vhat_xi.at(i, j) * tmpl->vhat.at(i, j);
            }
    }
    auto phase = [&](const Vec& V) { return tmpl ? s.dot(V) - s0 : 0.0; };

    // Speed making the phase condition stationary at t = 0.
    double mu0 = 0.0;
    if (tmpl) {
        const Vec DV = D1 * V0.values;
        const Vec rhs = Eb * DV + F_nodes(sys, V0.values);
        const double den = s.dot(DV);
        if (std::abs(den) < 1e-14) throw DegeneratePhase("first-order phase condition is degenerate");
        mu0 = -s.dot(rhs) / den;
    }

    FirstOrderTrajectory traj;
    auto record = [&](const FirstOrderSample& x, const Vec* prev) {
        double nvt = 0.0;
        if (prev) nvt = std::sqrt((W.array() * ((x.V.values - *prev) / cfg.dt).array().square()).sum());
        traj.records.push_back({x.t, x.mu, x.gamma, nvt, phase(x.V.values)});
    };

    auto rhs = [&](const Vec& V, double mu) {
        const Vec DV = D1 * V;
        return Vec(Eb * DV + mu * DV + F_nodes(sys, V));
    };

    // Y = hist + beta rhs(Y, mu), gamma = hg + beta mu. The start is a trapezoidal
    // step so that every stored step is second-order accurate.
    BorderedSolver solver;
    auto step = [&](const FirstOrderSample& curr, const FirstOrderSample* prev) {
        Vec hist;
        double beta, hg;
        if (prev) {
            const BdfFormula bdf = BdfFormula::bdf2(cfg.dt);
            hist = bdf.history(curr.V.values, prev->V.values);
            hg = bdf.history(curr.gamma, prev->gamma);
            beta = bdf.beta;
        } else {
            beta = 0.5 * cfg.dt;
            hist = curr.V.values + beta * rhs(curr.V.values, curr.mu);
            hg = curr.gamma + beta * curr.mu;
        }
        const double t_new = curr.t + cfg.dt;
        Vec Y = prev ? Vec(2.0 * curr.V.values - prev->V.values) : curr.V.values;
        double mu = prev ? 2.0 * curr.mu - prev->mu : curr.mu;
        for (int it = 0;; ++it) {
            const Vec G = Y - hist - beta * rhs(Y, mu);
            const double psi = phase(Y);
            const double res = std::max(G.lpNorm<Eigen::Infinity>(), std::abs(psi));
            if (!std::isfinite(res)) throw NewtonDiverged(t_new, res, "first-order Newton produced a non-finite residual");
            if (res <= cfg.newton_tol) {
                FirstOrderSample out{t_new, curr.V, mu, hg + beta * mu};
                out.V.values = Y;
                return out;
            }
            if (it == cfg.newton_max)
                throw NewtonDiverged(t_new, res,
                                     "first-order Newton did not converge at t=" + std::to_string(t_new) +
                                         " (residual " + std::to_string(res) + ")");
            const SpMat J = Id - beta * (SpMat(Eb * D1) + mu * D1 + Z_nodes(sys, Y));
            solver.factorize(J);
            if (tmpl) {
                Vec dx, dy;
                solver.solve(Mat(-beta * (D1 * Y)), s.transpose(), Mat::Zero(1, 1), -G, Vec::Constant(1, -psi), dx, dy);
                Y += dx;
                mu += dy[0];
            } else {
                Y -= solver.solve(G);
            }
        }
    };

    FirstOrderSample prev{0.0, V0, mu0, 0.0};
    record(prev, nullptr);
    traj.samples.push_back(prev);
    const int n = cfg.steps();
    if (n == 0) return traj;

    FirstOrderSample curr = step(prev, nullptr);
    for (int j = 1;; ++j) {
        record(curr, &prev.V.values);
        if (j % cfg.sample_every == 0 || j == n) traj.samples.push_back(curr);
        if (j == n) break;
        FirstOrderSample next = step(curr, &prev);
        prev = std::move(curr);
        curr = std::move(next);
    }
    return traj;
}

WFunctionals w_functionals(const FirstOrderSystem& sys, const FirstOrderTrajectory& traj)
{
    const int m = sys.m();
    const Mat Id = Mat::Identity(m, m);
    WFunctionals w;
    for (std::size_t j = 1; j + 1 < traj.samples.size(); ++j) {
        const auto& a = traj.samples[j - 1];
        const auto& b = traj.samples[j];
        const auto& c = traj.samples[j + 1];
        // Central difference on possibly unequal spacing.
        const double h0 = b.t - a.t, h1 = c.t - b.t;
        const Mat V1a = block(sys, 0, a.V.values), V1b = block(sys, 0, b.V.values), V1c = block(sys, 0, c.V.values);
        const Mat V1t = (h0 * h0 * V1c - h1 * h1 * V1a + (h1 * h1 - h0 * h0) * V1b) / (h0 * h1 * (h0 + h1));

        const GridFunction V1(b.V.grid, m, flatten(V1b));
        const Vec dV1 = d1(V1).values;
        const Mat DV1 = ConstNodeMap(dV1.data(), m, b.V.grid.N());
        const Mat W2 = block(sys, 1, b.V.values) - V1t - (sys.N() - b.mu * Id) * DV1;
        const Mat W3 = block(sys, 2, b.V.values) - V1t + (sys.N() + b.mu * Id) * DV1 - sys.c() * V1b;
        w.t.push_back(b.t);
        w.w2.push_back(norm(GridFunction(b.V.grid, m, flatten(W2))));
        w.w3.push_back(norm(GridFunction(b.V.grid, m, flatten(W3))));
    }
    return w;
}

void write_csv(std::ostream& os, const FirstOrderTrajectory& traj)
{
    if (traj.samples.empty()) throw InvalidArgument("empty first-order trajectory");
    const int k = traj.samples.front().V.m;
    std::vector<std::string> header{"t", "xi"};
    for (int j = 1; j <= k; ++j) header.push_back("V" + std::to_string(j));
    csv::Writer w(os, header);
    for (const auto& s : traj.samples)
        for (int i = 0; i < s.V.N(); ++i) {
            w << s.t << s.V.grid.node(i);
            for (int j = 0; j < k; ++j) w << s.V.at(i, j);
            w.end_row();
        }
}

}  // namespace dampwave

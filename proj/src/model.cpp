#include "dampwave/model.hpp"

#include <cmath>

#include "dampwave/errors.hpp"

namespace dampwave {

ModelSpec ModelSpec::semilinear(std::string name, Mat M, Mat A, Semilinear parts,
                                std::optional<AsymptoticStates> states, double tol_root)
{
    const Eigen::Index m = M.rows();
    if (parts.B.rows() != m || parts.B.cols() != m || parts.C.rows() != m || parts.C.cols() != m)
        throw InvalidArgument("semilinear B and C must be m x m");
    ModelSpec s;
    s.name_ = std::move(name);
    s.M_ = std::move(M);
    s.A_ = std::move(A);
    s.semi_ = std::move(parts);
    const Semilinear& p = *s.semi_;
    s.f_ = [p](CVecRef u, CVecRef v, CVecRef w, VecRef out) {
        p.g(u, out);
        out.noalias() += p.C * v;
        out.noalias() -= p.B * w;
    };
    s.df_ = [p](CVecRef u, CVecRef, CVecRef, MatRef d1, MatRef d2, MatRef d3) {
        p.dg(u, d1);
        d2 = p.C;
        d3 = -p.B;
    };
    s.states_ = std::move(states);
    s.validate(tol_root);
    return s;
}

ModelSpec ModelSpec::general(std::string name, Mat M, Mat A, Field f, FieldJacobian df,
                             std::optional<AsymptoticStates> states, double tol_root)
{
    ModelSpec s;
    s.name_ = std::move(name);
    s.M_ = std::move(M);
    s.A_ = std::move(A);
    s.f_ = std::move(f);
    s.df_ = std::move(df);
    s.states_ = std::move(states);
    s.validate(tol_root);
    return s;
}

void ModelSpec::validate(double tol_root)
{
    const Eigen::Index m = M_.rows();
    if (m < 1 || M_.cols() != m || A_.rows() != m || A_.cols() != m)
        throw InvalidArgument("M and A must be square of the same size");
    Eigen::FullPivLU<Mat> lu(M_);
    if (!lu.isInvertible()) throw InvalidArgument("mass matrix M is singular");
    Minv_ = lu.inverse();

    Eigen::EigenSolver<Mat> es(Minv_ * A_);
    if (es.info() != Eigen::Success) throw NotPositiveDiagonalizable("eigen-decomposition of M^-1 A failed");
    const double scale = (Minv_ * A_).norm();
    for (Eigen::Index i = 0; i < m; ++i) {
        cplx l = es.eigenvalues()[i];
        if (std::abs(l.imag()) > 1e-12 * scale || l.real() <= 0.0)
            throw NotPositiveDiagonalizable("M^-1 A must have real positive eigenvalues");
    }
    Eigen::JacobiSVD<CMat> svd(es.eigenvectors());
    const double cond = svd.singularValues()(0) / svd.singularValues()(m - 1);
    if (!(cond < 1e12)) throw NotPositiveDiagonalizable("M^-1 A is defective");

    if (states_) {
        const Vec zero = Vec::Zero(m);
        for (const Vec* v : {&states_->v_minus, &states_->v_plus}) {
            if (v->size() != m) throw InvalidArgument("asymptotic state has wrong dimension");
            if (f(*v, zero, zero).norm() > tol_root)
                throw InvalidArgument("asymptotic state is not a root of f(., 0, 0)");
        }
    }
}

const AsymptoticStates& ModelSpec::require_states() const
{
    if (!states_) throw InvalidArgument("model '" + name_ + "' has no asymptotic states");
    return *states_;
}

Vec ModelSpec::f(const Vec& u, const Vec& v, const Vec& w) const
{
    Vec out(m());
    f_(u, v, w, out);
    return out;
}

PointJacobians ModelSpec::jacobians(const Vec& u, const Vec& v, const Vec& w) const
{
    PointJacobians J{Mat(m(), m()), Mat(m(), m()), Mat(m(), m())};
    df_(u, v, w, J.d1, J.d2, J.d3);
    return J;
}

Vec ModelSpec::f_nodes(const Vec& u, const Vec& v, const Vec& w) const
{
    const int mm = m();
    const Eigen::Index N = u.size() / mm;
    Vec out(u.size());
    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::Index o = i * mm;
        f_(u.segment(o, mm), v.segment(o, mm), w.segment(o, mm), out.segment(o, mm));
    }
    return out;
}

GridJacobians ModelSpec::jacobians_nodes(const Vec& u, const Vec& v, const Vec& w) const
{
    const int mm = m();
    const Eigen::Index N = u.size() / mm;
    GridJacobians J{Mat(mm, u.size()), Mat(mm, u.size()), Mat(mm, u.size())};
    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::Index o = i * mm;
        df_(u.segment(o, mm), v.segment(o, mm), w.segment(o, mm), J.d1.middleCols(o, mm), J.d2.middleCols(o, mm),
            J.d3.middleCols(o, mm));
    }
    return J;
}

SpMat block_diagonal(const Mat& blocks)
{
    const Eigen::Index m = blocks.rows();
    const Eigen::Index n = blocks.cols();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(std::size_t(m * n));
    for (Eigen::Index i = 0; i < n / m; ++i)
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c)
                if (blocks(r, i * m + c) != 0.0) t.emplace_back(i * m + r, i * m + c, blocks(r, i * m + c));
    SpMat S(n, n);
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

SpMat block_diagonal(const Mat& K, int N)
{
    return block_diagonal(K.replicate(1, N));
}

// ---- Nagumo ----

ModelSpec nagumo_wave_model(double eps, double b)
{
    if (!(eps > 0.0)) throw InvalidArgument("nagumo: eps must be positive");
    if (!(b > 0.0 && b < 1.0)) throw InvalidArgument("nagumo: b must lie in (0, 1)");
    Semilinear s;
    s.g = [b](CVecRef u, VecRef out) { out[0] = u[0] * (1.0 - u[0]) * (u[0] - b); };
    s.dg = [b](CVecRef u, MatRef out) {
        const double x = u[0];
        out(0, 0) = -3.0 * x * x + 2.0 * (1.0 + b) * x - b;
    };
    s.B = Mat::Identity(1, 1);
    s.C = Mat::Zero(1, 1);
    AsymptoticStates st{Vec::Zero(1), Vec::Ones(1)};
    return ModelSpec::semilinear("nagumo", Mat::Constant(1, 1, eps), Mat::Identity(1, 1), std::move(s), st);
}

NagumoFront nagumo_exact_front(double eps, double b)
{
    if (!(eps >= 0.0)) throw InvalidArgument("nagumo front: eps must be nonnegative");
    NagumoFront fr{};
    fr.eps = eps;
    fr.b = b;
    fr.c_star = -std::sqrt(2.0) * (0.5 - b);
    fr.k = std::sqrt(1.0 + 2.0 * eps * (0.5 - b) * (0.5 - b));
    fr.mu = fr.c_star / fr.k;
    return fr;
}

double NagumoFront::profile(double xi) const
{
    return 1.0 / (1.0 + std::exp(-k * xi / std::sqrt(2.0)));
}

double NagumoFront::derivative(double xi) const
{
    const double v = profile(xi);
    return k / std::sqrt(2.0) * v * (1.0 - v);
}

double NagumoFront::second_derivative(double xi) const
{
    const double v = profile(xi);
    return 0.5 * k * k * v * (1.0 - v) * (1.0 - 2.0 * v);
}

// ---- FitzHugh-Nagumo ----

double fhn_a22(const FhnParams& p)
{
    const double cc = p.c_star * p.c_star * p.eps;
    return (p.rho + cc) / (1.0 + cc);
}

ModelSpec fhn_wave_model(const FhnParams& p, std::optional<AsymptoticStates> states)
{
    if (!(p.eps > 0.0 && p.rho > 0.0 && p.a > 0.0 && p.phi > 0.0 && p.b > 0.0))
        throw InvalidArgument("fhn: eps, rho, a, b, phi must be positive");
    Semilinear s;
    s.g = [p](CVecRef u, VecRef out) {
        out[0] = u[0] - u[0] * u[0] * u[0] / 3.0 - u[1];
        out[1] = p.phi * (u[0] + p.a - p.b * u[1]);
    };
    s.dg = [p](CVecRef u, MatRef out) {
        out << 1.0 - u[0] * u[0], -1.0, p.phi, -p.phi * p.b;
    };
    s.B = Mat::Identity(2, 2);
    s.C = Mat::Zero(2, 2);
    Mat A = Mat::Identity(2, 2);
    A(1, 1) = fhn_a22(p);
    return ModelSpec::semilinear("fhn", p.eps * Mat::Identity(2, 2), A, std::move(s), std::move(states), 1e-4);
}

FhnParams fhn_pulse_params(double eps)
{
    FhnParams p;
    p.eps = eps;
    return p;
}

FhnParams fhn_front_params(double eps)
{
    FhnParams p;
    p.eps = eps;
    p.b = 3.0;
    p.c_star = -0.8557;
    return p;
}

AsymptoticStates fhn_pulse_state_guess()
{
    Vec v(2);
    v << -1.19941, -0.62426;
    return {v, v};
}

AsymptoticStates fhn_front_state_guess()
{
    Vec wm(2), wp(2);
    wm << 1.18779, 0.62923;
    wp << -1.56443, -0.28814;
    return {wm, wp};
}

PolishedState polish_state(const ModelSpec& model, const Vec& guess, double tol, int max_iter)
{
    const Vec zero = Vec::Zero(model.m());
    PolishedState ps;
    ps.raw = guess;
    ps.raw_residual = model.f(guess, zero, zero).norm();
    Vec v = guess;
    for (int it = 0; it < max_iter; ++it) {
        Vec r = model.f(v, zero, zero);
        if (r.norm() <= tol) break;
        v -= model.jacobians(v, zero, zero).d1.fullPivLu().solve(r);
    }
    ps.polished = v;
    ps.polished_residual = model.f(v, zero, zero).norm();
    if (!(ps.polished_residual <= 1e3 * tol)) throw NewtonDiverged(0.0, ps.polished_residual, "state polish did not converge");
    return ps;
}

FhnStates polish_fhn_states(const FhnParams& p, const AsymptoticStates& guess)
{
    ModelSpec bare = fhn_wave_model(p);
    return {polish_state(bare, guess.v_minus), polish_state(bare, guess.v_plus)};
}

namespace {

ModelSpec fhn_with_polished(const FhnParams& p, const AsymptoticStates& guess)
{
    FhnStates s = polish_fhn_states(p, guess);
    return fhn_wave_model(p, AsymptoticStates{s.minus.polished, s.plus.polished});
}

}  // namespace

ModelSpec fhn_pulse_model(double eps) { return fhn_with_polished(fhn_pulse_params(eps), fhn_pulse_state_guess()); }

ModelSpec fhn_front_model(double eps) { return fhn_with_polished(fhn_front_params(eps), fhn_front_state_guess()); }

ModelSpec polynomial_model(const std::string& name, const PolynomialModelParams& p)
{
    const Eigen::Index m = p.M.rows();
    if (p.L.rows() != m || p.L.cols() != m || p.poly.rows() != m || p.poly.cols() != 4)
        throw InvalidArgument("polynomial model: L must be m x m and poly m x 4");
    Semilinear s;
    s.g = [L = p.L, P = p.poly](CVecRef u, VecRef out) {
        out.noalias() = L * u;
        for (Eigen::Index c = 0; c < u.size(); ++c) {
            const double x = u[c];
            out[c] += P(c, 0) + x * (P(c, 1) + x * (P(c, 2) + x * P(c, 3)));
        }
    };
    s.dg = [L = p.L, P = p.poly](CVecRef u, MatRef out) {
        out = L;
        for (Eigen::Index c = 0; c < u.size(); ++c) {
            const double x = u[c];
            out(c, c) += P(c, 1) + x * (2.0 * P(c, 2) + 3.0 * x * P(c, 3));
        }
    };
    s.B = p.B;
    s.C = p.C;
    return ModelSpec::semilinear(name, p.M, p.A, std::move(s), p.states, 1e-4);
}

// ---- traveling wave residual ----

GridFunction tw_defect(const ModelSpec& model, const TravelingWaveCandidate& c)
{
    const GridFunction& v = c.profile;
    if (v.m != model.m()) throw GridMismatch("profile dimension does not match the model");
    const double mu = c.speed;
    const GridFunction vx = d1(v);
    const GridFunction vxx = d2(v);
    const Mat K = model.A() - mu * mu * model.M();
    GridFunction out(v.grid, v.m);
    out.values = model.f_nodes(v.values, vx.values, -mu * vx.values);
    for (int i = 0; i < v.N(); ++i) out.node_values(i) += K * vxx.node_values(i);
    return out;
}

double tw_residual(const ModelSpec& model, const Grid1D& grid, const TravelingWaveCandidate& c)
{
    if (!(c.profile.grid == grid)) throw GridMismatch("candidate profile is not sampled on this grid");
    return norm(tw_defect(model, c));
}

}  // namespace dampwave

#include "dampwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "dampwave/csv.hpp"
#include "dampwave/errors.hpp"

namespace dampwave {

std::string to_string(Boundary bc)
{
    return bc == Boundary::Periodic ? "periodic" : "neumann";
}

Boundary boundary_from_string(const std::string& s)
{
    if (s == "neumann") return Boundary::Neumann;
    if (s == "periodic") return Boundary::Periodic;
    throw InvalidArgument("unknown boundary condition '" + s + "'");
}

Grid1D Grid1D::neumann(double R, int N)
{
    if (!(R > 0.0) || N < 5) throw InvalidArgument("grid needs R > 0 and N >= 5");
    return Grid1D(R, N, 2.0 * R / (N - 1), Boundary::Neumann);
}

Grid1D Grid1D::periodic(double R, int N)
{
    if (!(R > 0.0) || N < 5) throw InvalidArgument("grid needs R > 0 and N >= 5");
    return Grid1D(R, N, 2.0 * R / N, Boundary::Periodic);
}

Grid1D Grid1D::with_spacing(double R, double dx, Boundary bc)
{
    if (!(dx > 0.0) || !(R > 0.0)) throw InvalidArgument("grid needs R > 0 and dx > 0");
    double cells = 2.0 * R / dx;
    double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * cells)
        throw InvalidArgument("dx does not divide the interval [-R, R]");
    int n = static_cast<int>(rounded);
    return bc == Boundary::Periodic ? periodic(R, n) : neumann(R, n + 1);
}

bool Grid1D::operator==(const Grid1D& o) const
{
    return N_ == o.N_ && bc_ == o.bc_ && std::abs(R_ - o.R_) <= 1e-12 * R_ && std::abs(dx_ - o.dx_) <= 1e-12 * dx_;
}

double Grid1D::node(int i) const
{
    return periodic() ? -R_ + (i + 0.5) * dx_ : -R_ + i * dx_;
}

Vec Grid1D::nodes() const
{
    Vec x(N_);
    for (int i = 0; i < N_; ++i) x[i] = node(i);
    return x;
}

double Grid1D::weight(int i) const
{
    if (!periodic() && (i == 0 || i == N_ - 1)) return 0.5 * dx_;
    return dx_;
}

template <class Scalar>
BasicGridFunction<Scalar>::BasicGridFunction(const Grid1D& g, int m_, Values v) : grid(g), m(m_), values(std::move(v))
{
    if (values.size() != Eigen::Index(g.N()) * m_) throw GridMismatch("value count does not equal m*N");
}

template <class Scalar>
typename BasicGridFunction<Scalar>::Values BasicGridFunction<Scalar>::component(int c) const
{
    Values out(N());
    for (int i = 0; i < N(); ++i) out[i] = at(i, c);
    return out;
}

template struct BasicGridFunction<double>;
template struct BasicGridFunction<cplx>;

GridFunction sample(const Grid1D& grid, int m, const std::function<Vec(double)>& fn)
{
    GridFunction u(grid, m);
    for (int i = 0; i < grid.N(); ++i) {
        Vec v = fn(grid.node(i));
        if (v.size() != m) throw InvalidArgument("sampled function has wrong dimension");
        u.node_values(i) = v;
    }
    return u;
}

GridFunction constant(const Grid1D& grid, const Vec& value)
{
    return sample(grid, int(value.size()), [&](double) { return value; });
}

namespace {

// Neighbour indices with the boundary closure; Neumann reflects the ghost node.
inline int left_of(const Grid1D& g, int i)
{
    if (i > 0) return i - 1;
    return g.periodic() ? g.N() - 1 : 1;
}

inline int right_of(const Grid1D& g, int i)
{
    if (i < g.N() - 1) return i + 1;
    return g.periodic() ? 0 : g.N() - 2;
}

template <class Scalar>
BasicGridFunction<Scalar> apply_d1(const BasicGridFunction<Scalar>& u)
{
    const Grid1D& g = u.grid;
    BasicGridFunction<Scalar> out(g, u.m);
    const double s = 0.5 / g.dx();
    for (int i = 0; i < g.N(); ++i)
        out.node_values(i) = s * (u.node_values(right_of(g, i)) - u.node_values(left_of(g, i)));
    return out;
}

int positive_mod(long long a, int n)
{
    long long r = a % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

GridFunction d1(const GridFunction& u) { return apply_d1(u); }
CGridFunction d1(const CGridFunction& u) { return apply_d1(u); }

GridFunction d2(const GridFunction& u)
{
    const Grid1D& g = u.grid;
    GridFunction out(g, u.m);
    const double s = 1.0 / (g.dx() * g.dx());
    for (int i = 0; i < g.N(); ++i)
        out.node_values(i) =
            s * (u.node_values(right_of(g, i)) - 2.0 * u.node_values(i) + u.node_values(left_of(g, i)));
    return out;
}

SpMat d1_matrix(const Grid1D& g, int m)
{
    std::vector<Eigen::Triplet<double>> t;
    const double s = 0.5 / g.dx();
    for (int i = 0; i < g.N(); ++i)
        for (int c = 0; c < m; ++c) {
            t.emplace_back(i * m + c, right_of(g, i) * m + c, s);
            t.emplace_back(i * m + c, left_of(g, i) * m + c, -s);
        }
    SpMat D(g.N() * m, g.N() * m);
    D.setFromTriplets(t.begin(), t.end());
    D.prune(0.0);
    return D;
}

SpMat d2_matrix(const Grid1D& g, int m)
{
    std::vector<Eigen::Triplet<double>> t;
    const double s = 1.0 / (g.dx() * g.dx());
    for (int i = 0; i < g.N(); ++i)
        for (int c = 0; c < m; ++c) {
            t.emplace_back(i * m + c, right_of(g, i) * m + c, s);
            t.emplace_back(i * m + c, left_of(g, i) * m + c, s);
            t.emplace_back(i * m + c, i * m + c, -2.0 * s);
        }
    SpMat D(g.N() * m, g.N() * m);
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

Vec weight_vector(const Grid1D& g, int m)
{
    Vec w(Eigen::Index(g.N()) * m);
    for (int i = 0; i < g.N(); ++i) w.segment(Eigen::Index(i) * m, m).setConstant(g.weight(i));
    return w;
}

void check_same_layout(const Grid1D& a, int ma, const Grid1D& b, int mb)
{
    if (!(a == b) || ma != mb) throw GridMismatch("grid functions live on different grids or have different m");
}

double inner(const GridFunction& u, const GridFunction& w)
{
    check_same_layout(u.grid, u.m, w.grid, w.m);
    double s = 0.0;
    for (int i = 0; i < u.N(); ++i) s += u.grid.weight(i) * u.node_values(i).dot(w.node_values(i));
    return s;
}

cplx inner(const CGridFunction& u, const CGridFunction& w)
{
    check_same_layout(u.grid, u.m, w.grid, w.m);
    cplx s = 0.0;
    for (int i = 0; i < u.N(); ++i) s += u.grid.weight(i) * u.node_values(i).dot(w.node_values(i));
    return s;
}

double norm(const GridFunction& u) { return std::sqrt(inner(u, u)); }
double norm(const CGridFunction& u) { return std::sqrt(inner(u, u).real()); }

namespace {

// Cubic Lagrange interpolation of u at x; Neumann data is continued by its end values.
void interpolate_at(const GridFunction& u, double x, Eigen::Ref<Vec> out)
{
    const Grid1D& g = u.grid;
    const int N = g.N();
    if (!g.periodic()) {
        if (x <= g.node(0)) { out = u.node_values(0); return; }
        if (x >= g.node(N - 1)) { out = u.node_values(N - 1); return; }
    }
    double s = (x - g.node(0)) / g.dx();
    double jf = std::floor(s);
    double t = s - jf;
    long long j = static_cast<long long>(jf);
    if (!g.periodic() && j > N - 2) { j = N - 2; t = s - j; }
    const double w[4] = {
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    };
    out.setZero();
    for (int k = 0; k < 4; ++k) {
        long long idx = j - 1 + k;
        int jj = g.periodic() ? positive_mod(idx, N) : static_cast<int>(std::clamp<long long>(idx, 0, N - 1));
        out += w[k] * u.node_values(jj);
    }
}

}  // namespace

GridFunction resample(const GridFunction& u, double shift)
{
    GridFunction out(u.grid, u.m);
    for (int i = 0; i < u.N(); ++i) interpolate_at(u, u.grid.node(i) - shift, out.node_values(i));
    return out;
}

GridFunction interpolate_to(const GridFunction& u, const Grid1D& target)
{
    GridFunction out(target, u.m);
    for (int i = 0; i < target.N(); ++i) interpolate_at(u, target.node(i), out.node_values(i));
    return out;
}

Grid1D neumann_on_same_nodes(const Grid1D& periodic)
{
    if (!periodic.periodic()) throw InvalidArgument("neumann_on_same_nodes: grid is not periodic");
    return Grid1D::neumann(periodic.R() - 0.5 * periodic.dx(), periodic.N());
}

GridFunction rebind(const GridFunction& u, const Grid1D& target)
{
    if (u.N() != target.N() || std::abs(u.grid.node(0) - target.node(0)) > 1e-9 * target.R() ||
        std::abs(u.grid.dx() - target.dx()) > 1e-12 * target.dx())
        throw GridMismatch("rebind: node sets differ");
    return GridFunction(target, u.m, u.values);
}

void write_csv(std::ostream& os, const GridFunction& u)
{
    std::vector<std::string> header{"xi"};
    for (int c = 0; c < u.m; ++c) header.push_back("u" + std::to_string(c + 1));
    csv::Writer w(os, header);
    for (int i = 0; i < u.N(); ++i) {
        w << u.grid.node(i);
        for (int c = 0; c < u.m; ++c) w << u.at(i, c);
        w.end_row();
    }
}

void write_csv(std::ostream& os, const CGridFunction& u)
{
    std::vector<std::string> header{"xi"};
    for (int c = 0; c < u.m; ++c) {
        header.push_back("re_u" + std::to_string(c + 1));
        header.push_back("im_u" + std::to_string(c + 1));
    }
    csv::Writer w(os, header);
    for (int i = 0; i < u.N(); ++i) {
        w << u.grid.node(i);
        for (int c = 0; c < u.m; ++c) w << u.at(i, c).real() << u.at(i, c).imag();
        w.end_row();
    }
}

GridFunction read_csv(std::istream& is, Boundary bc)
{
    csv::Table t = csv::read(is);
    if (t.header.size() < 2 || t.header[0] != "xi") throw InvalidArgument("grid csv needs header xi,u1,...");
    const int N = static_cast<int>(t.rows.size());
    if (N < 5) throw InvalidArgument("grid csv has fewer than 5 nodes");
    const int m = static_cast<int>(t.header.size()) - 1;
    double dx = t.rows[1][0] - t.rows[0][0];
    Grid1D g = bc == Boundary::Periodic ? Grid1D::periodic(0.5 * N * dx, N) : Grid1D::neumann(-t.rows[0][0], N);
    for (int i = 0; i < N; ++i)
        if (std::abs(g.node(i) - t.rows[i][0]) > 1e-9 * (1.0 + g.R()))
            throw InvalidArgument("grid csv nodes are not uniform on a symmetric interval");
    GridFunction u(g, m);
    for (int i = 0; i < N; ++i)
        for (int c = 0; c < m; ++c) u.at(i, c) = t.rows[i][c + 1];
    return u;
}

}  // namespace dampwave

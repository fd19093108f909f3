#include "dampwave/transfer.hpp"

#include "dampwave/errors.hpp"

namespace dampwave {

namespace {

void require_positive(double k)
{
    if (!(k > 0.0)) throw InvalidArgument("transfer maps need a scale k > 0");
}

}  // namespace

DampedWave parabolic_to_wave(const ParabolicWave& p, double k, const Mat& M)
{
    require_positive(k);
    DampedWave d;
    d.v_star = [w = p.w_star, k](double xi) { return w(k * xi); };
    d.mu_star = p.c_star / k;
    d.A = (p.A_tilde + p.c_star * p.c_star * M) / (k * k);
    d.C = p.C_tilde / k;
    return d;
}

ParabolicWave wave_to_parabolic(const DampedWave& d, double k, const Mat& M)
{
    require_positive(k);
    ParabolicWave p;
    p.w_star = [v = d.v_star, k](double z) { return v(z / k); };
    p.c_star = d.mu_star * k;
    p.A_tilde = k * k * (d.A - d.mu_star * d.mu_star * M);
    p.C_tilde = k * d.C;
    return p;
}

}  // namespace dampwave

#pragma once

#include <functional>

#include "dampwave/types.hpp"

namespace dampwave {

using Profile = std::function<Vec(double)>;

// Traveling wave w(x - c t) of  u_t = A~ u_xx + g(u) + C~ u_x  (parabolic side).
struct ParabolicWave {
    Profile w_star;
    double c_star = 0.0;
    Mat A_tilde;
    Mat C_tilde;
};

// Traveling wave v(x - mu t) of  M u_tt = A u_xx + g(u) + C u_x - B u_t.
struct DampedWave {
    Profile v_star;
    double mu_star = 0.0;
    Mat A;
    Mat C;
};

// v(xi) = w(k xi), mu = c/k, A = (A~ + c^2 M)/k^2, C = C~/k. Only k > 0.
DampedWave parabolic_to_wave(const ParabolicWave& p, double k, const Mat& M);

// w(z) = v(z/k), c = mu k, A~ = k^2 (A - mu^2 M), C~ = k C. Only k > 0.
ParabolicWave wave_to_parabolic(const DampedWave& d, double k, const Mat& M);

}  // namespace dampwave

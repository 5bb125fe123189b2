#pragma once

// Two-body / synodic Delaunay machinery and the Melnikov persistence
// function M(g_i) that selects which n:m Keplerian resonant orbits survive
// for mu > 0. All conversions here assume mu = 0 (primary at the origin of
// the synodic frame, frame angular rate 1).

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rescon/dynamics.hpp"

namespace rescon {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ResonanceSpec {
    int n = 0, m = 0;  // spacecraft revolutions : secondary revolutions, coprime
    double e = 0.0;

    ResonanceSpec(int n_, int m_, double e_) : n(n_), m(m_), e(e_) {
        if (n <= 0 || m <= 0 || std::gcd(n, m) != 1)
            throw DomainError("resonance n:m must be coprime positive integers");
        if (!(e >= 0.05 && e <= 0.95))
            throw DomainError("eccentricity restricted to [0.05, 0.95], got " +
                              std::to_string(e));
    }

    // Resonance condition: spacecraft mean motion a^(-3/2) = n/m.
    double semimajor_axis() const {
        return std::pow(static_cast<double>(m) / static_cast<double>(n), 2.0 / 3.0);
    }
    double period() const { return kTwoPi * m; }
    double L() const { return std::sqrt(semimajor_axis()); }
    double G() const { return L() * std::sqrt(1.0 - e * e); }
};

struct SynodicDelaunay {
    double L = 1.0, G = 1.0;  // actions: L = sqrt(a), G = L sqrt(1-e^2)
    double ell = 0.0, g = 0.0;  // mean anomaly, synodic longitude of periapsis
};

inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a;
}

// Kepler equation E - e sin E = ell, by Newton iteration.
inline double solve_kepler(double ell, double e) {
    if (!(e > 0.0 && e < 1.0)) throw DomainError("solve_kepler needs 0 < e < 1");
    const double ellw = wrap_angle(ell);
    double E = (e < 0.8) ? ellw : std::numbers::pi;
    for (int it = 0; it < 50; ++it) {
        const double f = E - e * std::sin(E) - ellw;
        if (std::abs(f) < 1e-14) return E;
        E -= f / (1.0 - e * std::cos(E));
    }
    if (std::abs(E - e * std::sin(E) - ellw) < 1e-12) return E;
    throw std::runtime_error("solve_kepler: Newton iteration did not converge");
}

struct KeplerAux {
    double a, e, E, f, r1;
};

inline KeplerAux kepler_aux(const SynodicDelaunay& sd) {
    if (!(sd.L > 0.0) || !(sd.G > 0.0) || sd.G > sd.L)
        throw DomainError("Delaunay actions must satisfy 0 < G <= L");
    const double a = sd.L * sd.L;
    const double ecc2 = 1.0 - (sd.G * sd.G) / (sd.L * sd.L);
    const double e = std::sqrt(std::max(ecc2, 0.0));
    if (!(e > 0.0 && e < 1.0))
        throw DomainError("conversion needs a non-circular bound orbit");
    const double E = solve_kepler(sd.ell, e);
    const double r1 = a * (1.0 - e * std::cos(E));
    // true anomaly from eccentric anomaly
    const double f = 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(E / 2.0),
                                      std::sqrt(1.0 - e) * std::cos(E / 2.0));
    return {a, e, E, f, r1};
}

// Synodic cartesian state of a mu = 0 spacecraft orbit at the frame epoch
// (rotating and inertial axes aligned). Velocity gets the rotating-frame
// correction v_rot = v_inertial - omega x r with omega = 1.
inline State delaunay_to_cartesian(const SynodicDelaunay& sd) {
    const KeplerAux k = kepler_aux(sd);
    const double theta = sd.g + k.f;  // longitude from the synodic x-axis
    const double x = k.r1 * std::cos(theta);
    const double y = k.r1 * std::sin(theta);

    // Perifocal velocity with GM = 1, rotated by g.
    const double sa = std::sqrt(k.a);
    const double vxp = -sa / k.r1 * std::sin(k.E);
    const double vyp = sa / k.r1 * std::sqrt(1.0 - k.e * k.e) * std::cos(k.E);
    const double cg = std::cos(sd.g), sg = std::sin(sd.g);
    const double vxi = cg * vxp - sg * vyp;
    const double vyi = sg * vxp + cg * vyp;

    return {x, y, vxi + y, vyi - x};
}

inline SynodicDelaunay cartesian_to_delaunay(const State& s) {
    const double x = s.x, y = s.y;
    const double vxi = s.vx - y, vyi = s.vy + x;  // back to inertial velocity
    const double r = std::hypot(x, y);
    if (!(r > 0.0)) throw DomainError("cartesian_to_delaunay: at the primary");
    const double v2 = vxi * vxi + vyi * vyi;
    const double energy = 0.5 * v2 - 1.0 / r;
    if (!(energy < 0.0)) throw DomainError("cartesian_to_delaunay: unbound orbit");
    const double a = -0.5 / energy;
    const double h = x * vyi - y * vxi;  // angular momentum, must be direct
    if (!(h > 0.0)) throw DomainError("cartesian_to_delaunay: retrograde or rectilinear");
    const double e2 = std::max(1.0 - h * h / a, 0.0);
    const double e = std::sqrt(e2);
    if (!(e > 1e-12)) throw DomainError("cartesian_to_delaunay: circular orbit degenerate in g");

    // Eccentricity vector gives the periapsis direction.
    const double ex = (v2 - 1.0 / r) * x - (x * vxi + y * vyi) * vxi;
    const double ey = (v2 - 1.0 / r) * y - (x * vxi + y * vyi) * vyi;
    const double g = std::atan2(ey, ex);

    const double cosf = (ex * x + ey * y) / (e * r);
    const double sinf = (ex * y - ey * x) / (e * r);
    const double f = std::atan2(sinf, cosf);
    const double E = 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(f / 2.0),
                                      std::sqrt(1.0 + e) * std::cos(f / 2.0));
    const double ell = E - e * std::sin(E);

    // G = L sqrt(1-e^2) = sqrt(a(1-e^2)) = h for GM = 1.
    return {std::sqrt(a), h, wrap_angle(ell), wrap_angle(g)};
}

// H1(L, G, ell, g) = r1 cos(g+f) - 1/sqrt(1 + r1^2 - 2 r1 cos(g+f)), rho2 = 1.
inline double perturbation_H1(const SynodicDelaunay& sd) {
    const KeplerAux k = kepler_aux(sd);
    const double c = std::cos(sd.g + k.f);
    const double rad = 1.0 + k.r1 * k.r1 - 2.0 * k.r1 * c;
    if (!(rad > 0.0)) throw CollisionError("perturbation_H1: collision with secondary");
    return k.r1 * c - 1.0 / std::sqrt(rad);
}

// dH1/dell at fixed (L, G, g), central finite difference.
inline double perturbation_H1_dell(const SynodicDelaunay& sd, double h = 1e-6) {
    SynodicDelaunay p = sd, m = sd;
    p.ell = sd.ell + h;
    m.ell = sd.ell - h;
    return (perturbation_H1(p) - perturbation_H1(m)) / (2.0 * h);
}

// Same derivative through the standard identities dE/dell = a/r1,
// dr1/dE = a e sin E, df/dE = sqrt(1-e^2) a / r1. Near close approaches the
// finite difference loses accuracy to roundoff (|H1| is large there), which
// matters for the Melnikov quadrature, so the integral uses this form and the
// finite difference serves as a cross-check.
inline double perturbation_H1_dell_analytic(const SynodicDelaunay& sd) {
    const KeplerAux k = kepler_aux(sd);
    const double c = std::cos(sd.g + k.f), s = std::sin(sd.g + k.f);
    const double rad = 1.0 + k.r1 * k.r1 - 2.0 * k.r1 * c;
    if (!(rad > 0.0)) throw CollisionError("perturbation_H1_dell: collision with secondary");
    const double rho2 = std::sqrt(rad);

    const double dr1 = k.a * k.e * std::sin(k.E);
    const double df = std::sqrt(1.0 - k.e * k.e) * k.a / k.r1;
    const double d_r1c = dr1 * c - k.r1 * s * df;
    const double dH1_dE = d_r1c + (k.r1 * dr1 - d_r1c) / (rho2 * rad);
    return dH1_dE * k.a / k.r1;
}

// M(g_i) = int_0^{2 pi m} -(1/L^3) dH1/dell (L, G, t/L^3, g_i - t) dt,
// composite trapezoid over the full (periodic, smooth) integrand.
inline double melnikov_M(const ResonanceSpec& spec, double g_i, int quad_points = 4096) {
    if (quad_points < 256) throw DomainError("melnikov_M needs quad_points >= 256");
    const double L = spec.L(), G = spec.G();
    const double L3 = L * L * L;
    const double T = spec.period();
    const double h = T / quad_points;
    double acc = 0.0;
    for (int i = 0; i < quad_points; ++i) {  // endpoints coincide by periodicity
        const double t = i * h;
        const SynodicDelaunay sd{L, G, t / L3, g_i - t};
        acc += -(1.0 / L3) * perturbation_H1_dell_analytic(sd);
    }
    return acc * h;
}

struct MelnikovZero {
    double g = 0.0;
    double slope = 0.0;
    bool simple = false;
};

// Sign-change scan over [0, 2 pi / n) followed by bisection.
//
// Once the ellipse crosses the secondary's circle the integrand develops
// near-collision peaks, so each evaluation doubles the quadrature resolution
// until two consecutive levels agree. Evaluations that never converge sit at
// a collision singularity of M; sign flips across those are rejected (they
// are poles, not zeros).
inline std::vector<MelnikovZero> find_melnikov_zeros(const ResonanceSpec& spec,
                                                     int scan_points = 720,
                                                     int quad_points = 4096) {
    const double width = kTwoPi / spec.n;
    const double dg = width / scan_points;
    const int quad_cap = quad_points * 128;
    std::vector<MelnikovZero> zeros;

    struct Eval {
        double value;
        bool converged;
    };
    auto M_adaptive = [&](double g) -> Eval {
        double v = melnikov_M(spec, g, quad_points);
        for (int q = quad_points; q <= quad_cap; q *= 2) {
            const double v2 = melnikov_M(spec, g, 2 * q);
            if (std::abs(v2 - v) < 1e-8) return {v2, true};
            v = v2;
        }
        return {v, false};
    };
    auto M = [&](double g) { return M_adaptive(g).value; };

    // M(0) = 0 by oddness; the scan below finds interior sign changes, so
    // report the endpoint zero explicitly with its slope.
    {
        const double slope = (M(dg * 0.5) - M(-dg * 0.5)) / dg;
        zeros.push_back({0.0, slope, std::abs(slope) > 1e-6});
    }
    double g_prev = 0.0, M_prev = M(0.0);
    for (int i = 1; i <= scan_points; ++i) {
        const double g = i * dg;
        const double Mg = M(g);
        if (M_prev * Mg < 0.0) {
            double lo = g_prev, hi = g, Mlo = M_prev;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const double Mm = M(mid);
                if (Mlo * Mm <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    Mlo = Mm;
                }
            }
            const double z = 0.5 * (lo + hi);
            // z = width is the periodic copy of the zero at 0.
            if (M_adaptive(z).converged && z < width - 0.5 * dg) {
                const double slope = (M(z + dg * 0.5) - M(z - dg * 0.5)) / dg;
                zeros.push_back({z, slope, std::abs(slope) > 1e-6});
            }
        } else if (Mg == 0.0 && i < scan_points) {
            const double slope = (M(g + dg * 0.5) - M(g - dg * 0.5)) / dg;
            zeros.push_back({g, slope, std::abs(slope) > 1e-6});
        }
        g_prev = g;
        M_prev = Mg;
    }
    return zeros;
}

}  // namespace rescon

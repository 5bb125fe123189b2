#pragma once

// Order-by-order Taylor parameterization W(s) of the 1-D stable/unstable
// manifolds of the period-map fixed point: solve F(W(s)) = W(lambda s) one
// degree at a time, with E_k obtained by jet transport of W_{<k} over one
// period and the 4x4 correction solve (DF - lambda^k I) W_k = -E_k.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rescon/continuation.hpp"
#include "rescon/dynamics.hpp"
#include "rescon/jets.hpp"
#include "rescon/propagation.hpp"

namespace rescon {

enum class ManifoldKind { Stable, Unstable };

inline const char* to_string(ManifoldKind k) {
    return k == ManifoldKind::Stable ? "stable" : "unstable";
}

struct ManifoldExpansion {
    ResonantOrbit orbit;
    ManifoldKind kind = ManifoldKind::Stable;
    double lambda = 0.0;
    double alpha = 1.0;             // scale applied to the unit eigenvector
    std::vector<Vec4> coeffs;       // W_0 .. W_d
    double domain = 0.0;            // raw fundamental domain (in scaled s)
    double e_tol = 0.0;
    std::vector<double> order_residuals;  // max |[F(W_<k) - W_<k(lambda s)]_j|, j < k

    std::size_t degree() const { return coeffs.size() - 1; }

    // Domain comparable across scale choices: raw domain times alpha.
    double normalized_domain() const { return alpha * domain; }

    State eval(double s) const {
        Vec4 acc{};
        for (std::size_t k = coeffs.size(); k-- > 0;)
            for (int i = 0; i < 4; ++i) acc[i] = acc[i] * s + coeffs[k][i];
        return State::from_array(acc);
    }

    Jet4 to_jet(std::size_t degree_out) const {
        Jet4 j(degree_out);
        for (std::size_t k = 0; k <= degree_out && k < coeffs.size(); ++k)
            for (int i = 0; i < 4; ++i) j.ch[i][k] = coeffs[k][i];
        return j;
    }
};

struct SolveOptions {
    double alpha = 0.0;            // 0 = choose automatically
    double order_residual_tol = 1e-9;
    double condition_limit = 1e12;
    // Target for the automatic alpha. Kept at O(1): the sub-order residual
    // check is absolute, and jet-flow errors scale with coefficient size.
    double coeff_ceiling = 1.0;
    IntegratorConfig cfg{};
};

namespace detail {

inline ManifoldExpansion solve_expansion_fixed_alpha(const ResonantOrbit& orbit,
                                                     ManifoldKind kind, std::size_t degree,
                                                     double alpha, const SolveOptions& opt) {
    if (orbit.eigen.type != StabilityType::Hyperbolic)
        throw DomainError("manifold expansion needs a hyperbolic orbit");
    const MassRatio mu(orbit.mu);

    // Monodromy from degree-1 jet flows rather than the variational system:
    // jet transport replays the base-trajectory step sequence, so this DF
    // (and the eigenpair defining the linear term) is consistent to roundoff
    // with the linear channel of every jet flow below.
    Matrix4 M{};
    for (int col = 0; col < 4; ++col) {
        Jet4 j1(1);
        j1.ch[0][0] = orbit.point.x;
        j1.ch[1][0] = orbit.point.y;
        j1.ch[2][0] = orbit.point.vx;
        j1.ch[3][0] = orbit.point.vy;
        j1.ch[col][1] = 1.0;
        const Jet4 f1 = flow_jet(j1, orbit.period, mu, opt.cfg);
        for (int i = 0; i < 4; ++i) M[i][col] = f1.ch[i][1];
    }
    const EigenData eig = classify_monodromy(M);
    if (eig.type != StabilityType::Hyperbolic)
        throw ConvergenceError("jet-transport monodromy is not hyperbolic");
    const Eigen::Matrix4d DF = detail::to_eigen(M);

    const double lambda = kind == ManifoldKind::Stable ? eig.lambda_s : eig.lambda_u;
    const Vec4& v = kind == ManifoldKind::Stable ? eig.v_s : eig.v_u;

    ManifoldExpansion w;
    w.orbit = orbit;
    w.kind = kind;
    w.lambda = lambda;
    w.alpha = alpha;
    w.e_tol = 0.0;
    w.coeffs.resize(degree + 1);
    w.coeffs[0] = orbit.point.to_array();
    if (degree >= 1)
        for (int i = 0; i < 4; ++i) w.coeffs[1][i] = alpha * v[i];
    w.order_residuals.assign(degree + 1, 0.0);

    if (degree < 2) return w;

    double lam_k = lambda;  // lambda^1
    for (std::size_t k = 2; k <= degree; ++k) {
        lam_k *= lambda;

        // Degree-k jet carrying W_0 .. W_{k-1}; its image under the period
        // map exposes E_k as the degree-k coefficient.
        Jet4 jk(k);
        for (std::size_t j = 0; j < k; ++j)
            for (int i = 0; i < 4; ++i) jk.ch[i][j] = w.coeffs[j][i];
        const Jet4 fk = flow_jet(jk, orbit.period, mu, opt.cfg);

        // Coefficients below order k must already cancel against W_<k(lambda s).
        double worst = 0.0;
        double lam_j = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            for (int i = 0; i < 4; ++i)
                worst = std::max(worst, std::abs(fk.ch[i][j] - lam_j * w.coeffs[j][i]));
            lam_j *= lambda;
        }
        w.order_residuals[k] = worst;
        if (worst > opt.order_residual_tol)
            throw ConvergenceError("order " + std::to_string(k) +
                                   " sub-order residual " + std::to_string(worst) +
                                   "; try a smaller alpha or tighter integration");

        Eigen::Vector4d Ek;
        for (int i = 0; i < 4; ++i) Ek(i) = fk.ch[i][k];

        const Eigen::Matrix4d A = DF - lam_k * Eigen::Matrix4d::Identity();
        Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
        if (!lu.isInvertible())
            throw ConvergenceError("singular cohomology solve at order " + std::to_string(k));
        const Eigen::Vector4d wk = lu.solve(-Ek);
        const double cond = A.norm() * lu.inverse().norm();
        if (cond > opt.condition_limit)
            throw ConvergenceError("ill-conditioned cohomology solve at order " +
                                   std::to_string(k) + " (cond ~ " + std::to_string(cond) + ")");
        for (int i = 0; i < 4; ++i) w.coeffs[k][i] = wk(i);
    }
    return w;
}

}  // namespace detail

// Automatic scale: pilot solve at low degree, then pick the largest alpha
// keeping |alpha^k W_k| below the coefficient ceiling.
inline double choose_alpha(const ResonantOrbit& orbit, ManifoldKind kind,
                           const SolveOptions& opt, std::size_t pilot_degree = 10) {
    SolveOptions pilot_opt = opt;
    pilot_opt.order_residual_tol = 1e300;  // pilot only gauges coefficient growth
    const ManifoldExpansion pilot =
        detail::solve_expansion_fixed_alpha(orbit, kind, pilot_degree, 1.0, pilot_opt);
    double alpha = 1.0;
    for (std::size_t k = 2; k <= pilot.degree(); ++k) {
        double nrm = 0.0;
        for (int i = 0; i < 4; ++i) nrm = std::max(nrm, std::abs(pilot.coeffs[k][i]));
        if (nrm > opt.coeff_ceiling)
            alpha = std::min(alpha, std::pow(opt.coeff_ceiling / nrm, 1.0 / k));
    }
    return alpha;
}

inline ManifoldExpansion unstable_from_stable(const ManifoldExpansion& ws);

inline ManifoldExpansion solve_expansion(const ResonantOrbit& orbit, ManifoldKind kind,
                                         std::size_t degree, SolveOptions opt = {}) {
    // The absolute sub-order residual check is only attainable on the
    // contracting side: the flowed jet's order-j channel scales like
    // lambda^j, so for lambda_u > 1 roundoff alone outgrows any fixed
    // tolerance after a few orders. For orbits on the y = 0 symmetry line
    // (every orbit in this library) the unstable expansion is therefore
    // obtained from the stable one by the time-reversal reflection, which is
    // exact.
    if (kind == ManifoldKind::Unstable && std::abs(orbit.point.y) <= 1e-12)
        return unstable_from_stable(solve_expansion(orbit, ManifoldKind::Stable, degree, opt));
    double alpha = opt.alpha;
    if (alpha <= 0.0) alpha = choose_alpha(orbit, kind, opt, std::min<std::size_t>(degree, 10));
    return detail::solve_expansion_fixed_alpha(orbit, kind, degree, alpha, opt);
}

// Time-reversal symmetry: for a periodic point on y = 0, the unstable
// expansion is the stable one with the y and xdot coefficients negated,
// with eigenvalue 1/lambda_s = lambda_u.
inline ManifoldExpansion unstable_from_stable(const ManifoldExpansion& ws) {
    if (ws.kind != ManifoldKind::Stable)
        throw DomainError("unstable_from_stable expects a stable expansion");
    if (std::abs(ws.orbit.point.y) > 1e-12)
        throw DomainError("symmetry trick needs the orbit point on y = 0");
    ManifoldExpansion wu = ws;
    wu.kind = ManifoldKind::Unstable;
    wu.lambda = 1.0 / ws.lambda;
    for (auto& c : wu.coeffs) {
        c[1] = -c[1];
        c[2] = -c[2];
    }
    return wu;
}

// Pointwise conjugacy defect. For a contracting manifold this is
// || Phi_T(W(s)) - W(lambda s) ||; for an expanding one the equivalent
// backward form || Phi_{-T}(W(s)) - W(s / lambda) || is used so the
// polynomial is never evaluated outside |s|.
inline double invariance_residual(const ManifoldExpansion& w, double s,
                                  const IntegratorConfig& cfg = {}) {
    const bool expanding = w.lambda > 1.0;
    const double T = expanding ? -w.orbit.period : w.orbit.period;
    const double shrink = expanding ? 1.0 / w.lambda : w.lambda;
    const State a = flow_state(w.eval(s), T, MassRatio(w.orbit.mu), cfg);
    const State b = w.eval(shrink * s);
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                     (a.vx - b.vx) * (a.vx - b.vx) + (a.vy - b.vy) * (a.vy - b.vy));
}

// Largest D such that the invariance error stays below e_tol for |s| <= D.
// Geometric bracketing (x2 octaves, 32 samples each, both signs of s), then
// bisection to about 3 significant figures. Stores D and e_tol in w.
inline double fundamental_domain(ManifoldExpansion& w, double e_tol,
                                 const IntegratorConfig& cfg = {}) {
    constexpr int kSamples = 32;
    auto interval_ok = [&](double a, double b) {
        for (int i = 0; i < kSamples; ++i) {
            const double s = a + (b - a) * (i + 1) / kSamples;
            try {
                if (invariance_residual(w, s, cfg) > e_tol) return false;
                if (invariance_residual(w, -s, cfg) > e_tol) return false;
            } catch (const std::runtime_error&) {
                return false;  // collision or escape counts as invalid
            }
        }
        return true;
    };

    double lo = 0.0, hi = 1e-6;
    // Grow until the octave [hi, 2 hi] fails (or the residual check throws).
    while (interval_ok(lo, hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) break;
    }
    if (lo == 0.0) {
        w.domain = 0.0;
        w.e_tol = e_tol;
        return 0.0;
    }
    // Bisect inside the failing octave.
    while ((hi - lo) / lo > 5e-3) {
        const double mid = 0.5 * (lo + hi);
        if (interval_ok(lo, mid))
            lo = mid;
        else
            hi = mid;
    }
    w.domain = lo;
    w.e_tol = e_tol;
    return lo;
}

}  // namespace rescon

#pragma once

// Continuation of persisting mu = 0 Keplerian resonant orbits to a target
// mass ratio. Each homotopy step corrects a secant-predicted (point, period)
// guess by Newton shooting on Phi_T(x) - x = 0 with the variational Jacobian.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rescon/dynamics.hpp"
#include "rescon/melnikov.hpp"
#include "rescon/propagation.hpp"

namespace rescon {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class StabilityType { Hyperbolic, Elliptic, Degenerate };

struct EigenData {
    StabilityType type = StabilityType::Degenerate;
    double lambda_u = 0.0, lambda_s = 0.0;
    Vec4 v_u{}, v_s{};  // unit eigenvectors, ydot component oriented positive
};

namespace detail {

inline Eigen::Matrix4d to_eigen(const Matrix4& M) {
    Eigen::Matrix4d E;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) E(r, c) = M[r][c];
    return E;
}

inline Vec4 orient_eigenvector(Eigen::Vector4d v) {
    v.normalize();
    double s = 0.0;
    if (std::abs(v(3)) > 1e-12) {
        s = v(3) > 0 ? 1.0 : -1.0;
    } else if (std::abs(v(0)) > 1e-12) {
        s = v(0) > 0 ? 1.0 : -1.0;
    } else {
        s = 1.0;
    }
    v *= s;
    return {v(0), v(1), v(2), v(3)};
}

}  // namespace detail

// Classify the monodromy spectrum: two eigenvalues near 1 plus either a real
// reciprocal pair (hyperbolic) or a complex unit-modulus pair (elliptic).
inline EigenData classify_monodromy(const Matrix4& M) {
    const Eigen::Matrix4d E = detail::to_eigen(M);
    Eigen::EigenSolver<Eigen::Matrix4d> es(E);
    const auto evals = es.eigenvalues();
    const auto evecs = es.eigenvectors();

    // Drop the two eigenvalues closest to 1.
    std::vector<int> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(evals(a) - 1.0) > std::abs(evals(b) - 1.0);
    });
    const int i0 = idx[0], i1 = idx[1];

    EigenData out;
    const std::complex<double> l0 = evals(i0), l1 = evals(i1);
    const bool real_pair = std::abs(l0.imag()) < 1e-9 * std::max(1.0, std::abs(l0)) &&
                           std::abs(l1.imag()) < 1e-9 * std::max(1.0, std::abs(l1));
    if (real_pair && l0.real() > 0.0 && l1.real() > 0.0 &&
        std::abs(std::max(l0.real(), l1.real()) - 1.0) > 1e-6) {
        out.type = StabilityType::Hyperbolic;
        const int iu = l0.real() > l1.real() ? i0 : i1;
        const int is = l0.real() > l1.real() ? i1 : i0;
        out.lambda_u = evals(iu).real();
        out.lambda_s = evals(is).real();
        out.v_u = detail::orient_eigenvector(evecs.col(iu).real());
        out.v_s = detail::orient_eigenvector(evecs.col(is).real());
    } else if (!real_pair && std::abs(std::abs(l0) - 1.0) < 1e-4) {
        out.type = StabilityType::Elliptic;
    }
    return out;
}

struct ResonantOrbit {
    State point;
    double period = 0.0;
    double mu = 0.0;
    double residual = 0.0;
    double jacobi = 0.0;
    EigenData eigen;
    int n = 0, m = 0;
    double e = 0.0;      // seed eccentricity at mu = 0
    double g_seed = 0.0;
};

// Cartesian seed for the Keplerian orbit (L, G, ell0, g_seed); period 2 pi m.
inline std::pair<State, double> seed_orbit(const ResonanceSpec& spec, double g_seed,
                                           double ell0 = 0.0) {
    const State s = delaunay_to_cartesian({spec.L(), spec.G(), ell0, g_seed});
    return {s, spec.period()};
}

struct ShootingResult {
    State point;
    double period = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

// Newton shooting on the period map. When fix_y0 is set, y stays pinned to 0
// and the unknowns are (x, vx, vy, T); otherwise all of (x, y, vx, vy, T)
// vary and the step is the minimum-norm least-squares solution (the solution
// manifold is one-dimensional since the energy is not fixed).
inline ShootingResult solve_periodic(State guess, double period_guess, const MassRatio& mu,
                                     bool fix_y0, const IntegratorConfig& cfg = {},
                                     double residual_tol = 1e-9, int max_iter = 25) {
    if (fix_y0) guess.y = 0.0;
    double T = period_guess;
    State p = guess;
    for (int it = 1; it <= max_iter; ++it) {
        const auto [fp, M] = flow_with_transition(p, T, mu, cfg);
        Eigen::Vector4d F;
        F << fp.x - p.x, fp.y - p.y, fp.vx - p.vx, fp.vy - p.vy;
        const double res = F.norm();
        if (res < residual_tol) return {p, T, res, it};

        const Vec4 f_end = vector_field(fp, mu, cfg.collision_floor);
        const Eigen::Matrix4d DPhi = detail::to_eigen(M);

        const int ncols = fix_y0 ? 4 : 5;
        Eigen::MatrixXd J(4, ncols);
        int c = 0;
        for (int col = 0; col < 4; ++col) {
            if (fix_y0 && col == 1) continue;
            J.col(c) = DPhi.col(col) - Eigen::Matrix4d::Identity().col(col);
            ++c;
        }
        for (int r = 0; r < 4; ++r) J(r, c) = f_end[r];

        // The solution family is one-dimensional (energy is free), so the
        // Jacobian carries a structurally tiny singular value along the
        // family tangent. Truncate it: otherwise the min-norm solve divides
        // the quadratic residual terms by it and throws the iterate far off.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-6);
        Eigen::VectorXd step = svd.solve((-F).eval());

        auto residual_at = [&](const Eigen::VectorXd& st) {
            Vec4 pv = p.to_array();
            int cc = 0;
            for (int col = 0; col < 4; ++col) {
                if (fix_y0 && col == 1) continue;
                pv[col] += st(cc++);
            }
            const double Tt = T + st(cc);
            if (!(Tt > 0.0) || !std::isfinite(Tt))
                return std::make_tuple(std::numeric_limits<double>::infinity(),
                                       State{}, 0.0);
            const State q = State::from_array(pv);
            const State fq = flow_state(q, Tt, mu, cfg);
            const double r = std::hypot(std::hypot(fq.x - q.x, fq.y - q.y),
                                        std::hypot(fq.vx - q.vx, fq.vy - q.vy));
            return std::make_tuple(r, q, Tt);
        };

        // Backtrack while the step makes things worse.
        double r_new;
        State p_new;
        double T_new;
        std::tie(r_new, p_new, T_new) = residual_at(step);
        for (int half = 0; half < 10 && !(r_new < res); ++half) {
            step *= 0.5;
            std::tie(r_new, p_new, T_new) = residual_at(step);
        }
        if (!(r_new < res))
            throw ConvergenceError("solve_periodic: line search stalled, residual " +
                                   std::to_string(res));
        p = p_new;
        T = T_new;
        if (fix_y0) p.y = 0.0;
        if (r_new < residual_tol) return {p, T, r_new, it};
    }
    // Final residual check after max_iter.
    const State fp = flow_state(p, T, mu, cfg);
    const double res = std::hypot(std::hypot(fp.x - p.x, fp.y - p.y),
                                  std::hypot(fp.vx - p.vx, fp.vy - p.vy));
    if (res < residual_tol) return {p, T, res, max_iter};
    throw ConvergenceError("solve_periodic: no convergence, residual " + std::to_string(res));
}

// Newton shooting with the Jacobi constant pinned to C_target: the extra row
// C(x) - C_target = 0 removes the energy-family degeneracy, so this solves an
// isolated point of the family. The start point must lie on y = 0.
inline ShootingResult solve_periodic_jacobi(State guess, double period_guess,
                                            const MassRatio& mu, double C_target,
                                            const IntegratorConfig& cfg = {},
                                            double residual_tol = 1e-9, int max_iter = 40) {
    guess.y = 0.0;
    double T = period_guess;
    State p = guess;

    auto merit = [&](const State& q, double Tt) {
        const State fq = flow_state(q, Tt, mu, cfg);
        const double rp = std::hypot(std::hypot(fq.x - q.x, fq.y - q.y),
                                     std::hypot(fq.vx - q.vx, fq.vy - q.vy));
        return std::hypot(rp, jacobi_constant(q, mu) - C_target);
    };

    for (int it = 1; it <= max_iter; ++it) {
        const auto [fp, M] = flow_with_transition(p, T, mu, cfg);
        Eigen::Matrix<double, 5, 1> F;
        F << fp.x - p.x, fp.y - p.y, fp.vx - p.vx, fp.vy - p.vy,
            jacobi_constant(p, mu) - C_target;
        const double res = F.norm();
        const double res_orbit = F.head<4>().norm();
        if (res_orbit < residual_tol && std::abs(F(4)) < residual_tol)
            return {p, T, res_orbit, it};

        const Vec4 f_end = vector_field(fp, mu, cfg.collision_floor);
        const Vec4 gC = jacobi_gradient(p, mu, cfg.collision_floor);
        const Eigen::Matrix4d DPhi = detail::to_eigen(M);

        Eigen::Matrix<double, 5, 4> J;
        int c = 0;
        for (int col = 0; col < 4; ++col) {
            if (col == 1) continue;  // y stays pinned to 0
            J.block<4, 1>(0, c) = DPhi.col(col) - Eigen::Matrix4d::Identity().col(col);
            J(4, c) = gC[col];
            ++c;
        }
        for (int r = 0; r < 4; ++r) J(r, 3) = f_end[r];
        J(4, 3) = 0.0;

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-8);
        Eigen::VectorXd step = svd.solve((-F).eval());

        State p_new = p;
        double T_new = T, r_new = std::numeric_limits<double>::infinity();
        for (int half = 0; half < 12; ++half) {
            p_new = {p.x + step(0), 0.0, p.vx + step(1), p.vy + step(2)};
            T_new = T + step(3);
            if (T_new > 0.0 && std::isfinite(T_new)) {
                try {
                    r_new = merit(p_new, T_new);
                } catch (const std::runtime_error&) {
                    r_new = std::numeric_limits<double>::infinity();
                }
            }
            if (r_new < res) break;
            step *= 0.5;
        }
        if (!(r_new < res))
            throw ConvergenceError("solve_periodic_jacobi: line search stalled, residual " +
                                   std::to_string(res));
        p = p_new;
        T = T_new;
    }
    throw ConvergenceError("solve_periodic_jacobi: no convergence");
}

struct ContinuationRun {
    ResonanceSpec spec;
    double g_seed = 0.0;
    double ell0 = 0.0;      // anomaly of the seed point along the Kepler orbit
    double mu_target = 0.0;
    int steps = 100;
    IntegratorConfig cfg{};
    double residual_tol = 1e-9;
};

struct ContinuationEntry {
    double mu = 0.0;
    State point;
    double period = 0.0;
    double residual = 0.0;
};

inline ResonantOrbit continue_orbit(const ContinuationRun& run,
                                    std::vector<ContinuationEntry>* history = nullptr) {
    if (run.steps < 1) throw DomainError("continuation needs at least one step");
    const auto [seed, T0] = seed_orbit(run.spec, run.g_seed, run.ell0);
    const bool fix_y0 = std::abs(seed.y) < 1e-12;

    ContinuationEntry prev2{}, prev{0.0, seed, T0, 0.0};
    if (history) history->push_back(prev);
    bool have_two = false;

    const double dmu_nominal = run.mu_target / run.steps;
    double mu_done = 0.0;
    double dmu = dmu_nominal;
    int halvings = 0;

    while (mu_done < run.mu_target - 1e-300) {
        const double mu_next = std::min(mu_done + dmu, run.mu_target);
        // Secant predictor; trivial predictor for the first step.
        State guess = prev.point;
        double T_guess = prev.period;
        if (have_two) {
            const double scale = (mu_next - prev.mu) / (prev.mu - prev2.mu);
            Vec4 g = guess.to_array();
            const Vec4 a = prev.point.to_array(), b = prev2.point.to_array();
            for (int i = 0; i < 4; ++i) g[i] = a[i] + scale * (a[i] - b[i]);
            guess = State::from_array(g);
            T_guess = prev.period + scale * (prev.period - prev2.period);
        }
        // Near mu = 0 every eccentricity gives a periodic orbit, so the plain
        // shooting Jacobian is nearly singular along the family and Newton
        // drifts away from the seed. Pin the Jacobi constant: re-evaluating
        // the previous point's C under the new mu advances the pin with the
        // explicit mu-dependence of C each step, which keeps the stepped path
        // independent of step size while the pinned corrector cannot slide
        // along the family.
        const double C_pin = jacobi_constant(prev.point, MassRatio(mu_next));
        bool ok = false;
        try {
            const ShootingResult sr =
                fix_y0 ? solve_periodic_jacobi(guess, T_guess, MassRatio(mu_next), C_pin,
                                               run.cfg, run.residual_tol)
                       : solve_periodic(guess, T_guess, MassRatio(mu_next), fix_y0, run.cfg,
                                        run.residual_tol);
            prev2 = prev;
            prev = {mu_next, sr.point, sr.period, sr.residual};
            have_two = true;
            mu_done = mu_next;
            if (history) history->push_back(prev);
            if (dmu < dmu_nominal) dmu = std::min(dmu * 2.0, dmu_nominal);
            halvings = 0;
            ok = true;
        } catch (const ConvergenceError&) {
        } catch (const StepLimitError&) {  // close approach during a trial solve
        }
        if (!ok) {
            dmu *= 0.5;
            if (++halvings > 30)
                throw ConvergenceError("continue_orbit: stalled at mu = " +
                                       std::to_string(mu_done));
        }
    }

    ResonantOrbit orbit;
    orbit.point = prev.point;
    orbit.period = prev.period;
    orbit.mu = run.mu_target;
    orbit.residual = prev.residual;
    orbit.jacobi = jacobi_constant(prev.point, MassRatio(run.mu_target));
    orbit.eigen = classify_monodromy(monodromy(prev.point, prev.period,
                                               MassRatio(run.mu_target), run.cfg));
    orbit.n = run.spec.n;
    orbit.m = run.spec.m;
    orbit.e = run.spec.e;
    orbit.g_seed = run.g_seed;
    return orbit;
}

// Continue at the eccentricity suggested by the mu = 0 closed form
// C = 1/a + 2 sqrt(a (1-e^2)), then slide along the fixed-mu family of
// periodic orbits with Jacobi-pinned shooting until C hits the target.
inline ResonantOrbit continue_orbit_matching_jacobi(int n, int m, double g_seed, double ell0,
                                                    double mu_target, double C_target,
                                                    int steps, const IntegratorConfig& cfg = {},
                                                    double C_tol = 1e-10) {
    const double a = std::pow(static_cast<double>(m) / n, 2.0 / 3.0);
    const double arg = (C_target - 1.0 / a) / (2.0 * std::sqrt(a));
    if (!(arg > 0.0 && arg < 1.0))
        throw DomainError("no bound-orbit eccentricity reaches that Jacobi constant");
    const double e0 = std::sqrt(std::max(1.0 - arg * arg, 1e-8));

    ContinuationRun run{ResonanceSpec(n, m, e0), g_seed, ell0, mu_target, steps, cfg};
    ResonantOrbit o = continue_orbit(run);

    const MassRatio mu(mu_target);
    State p = o.point;
    double T = o.period;
    double C_cur = o.jacobi;
    // Slide along the one-parameter family of periodic orbits toward the
    // requested Jacobi constant.  The family can be steep in C (dx/dC ~ 10 for
    // strongly unstable orbits), so use a secant predictor across consecutive
    // family points and shrink the step whenever the corrector fails or lands
    // on a different branch (detected by a large period or position jump).
    State p_prev{};
    double T_prev = 0.0, C_prev = 0.0;
    bool have_prev = false;
    double step = 5e-4;
    constexpr double kMaxStep = 1e-3;
    constexpr double kMinStep = 1e-6;
    int guard = 0;
    while (std::abs(C_cur - C_target) > C_tol) {
        const double dC = C_target - C_cur;
        const double h = std::min(step, std::abs(dC));
        const double C_next = C_cur + std::copysign(h, dC);
        State guess = p;
        double T_guess = T;
        if (have_prev && std::abs(C_cur - C_prev) > 1e-14) {
            const double f = (C_next - C_cur) / (C_cur - C_prev);
            guess.x += f * (p.x - p_prev.x);
            guess.vx += f * (p.vx - p_prev.vx);
            guess.vy += f * (p.vy - p_prev.vy);
            T_guess += f * (T - T_prev);
        }
        bool accepted = false;
        try {
            const ShootingResult sr = solve_periodic_jacobi(guess, T_guess, mu, C_next, cfg);
            if (std::abs(sr.period - T_guess) < 0.2 && std::abs(sr.point.x - guess.x) < 0.05) {
                p_prev = p;
                T_prev = T;
                C_prev = C_cur;
                p = sr.point;
                T = sr.period;
                o.residual = sr.residual;
                C_cur = jacobi_constant(p, mu);
                have_prev = true;
                accepted = true;
                if (sr.iterations < 6 && step < kMaxStep) step *= 1.3;
            }
        } catch (const ConvergenceError&) {
        }
        if (!accepted) {
            step /= 2.0;
            if (step < kMinStep)
                throw ConvergenceError("Jacobi matching stalled at C = " + std::to_string(C_cur));
        }
        if (++guard > 400)
            throw ConvergenceError("Jacobi matching stalled at C = " + std::to_string(C_cur));
    }

    o.point = p;
    o.period = T;
    o.jacobi = C_cur;
    o.eigen = classify_monodromy(monodromy(p, T, mu, cfg));
    return o;
}

}  // namespace rescon

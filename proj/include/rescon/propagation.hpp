#pragma once

// Adaptive Runge-Kutta-Fehlberg 7(8) propagation of plain states, variational
// (state + transition matrix) systems, and Jet4 payloads (jet transport), plus
// refined Poincare-section event detection on y = 0, x < 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "rescon/dynamics.hpp"
#include "rescon/jets.hpp"

namespace rescon {

struct IntegratorConfig {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    double initial_step = 1e-4;
    std::size_t max_steps = 10'000'000;
    double collision_floor = kCollisionFloor;
};

struct NoCrossingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

using ODEState = std::vector<double>;
using ErrorStepper = boost::numeric::odeint::runge_kutta_fehlberg78<ODEState>;
using ControlledStepper = boost::numeric::odeint::controlled_runge_kutta<ErrorStepper>;

inline ControlledStepper make_stepper(const IntegratorConfig& cfg) {
    return boost::numeric::odeint::make_controlled<ErrorStepper>(cfg.abs_tol, cfg.rel_tol);
}

struct StateSystem {
    MassRatio mu;
    double floor;
    void operator()(const ODEState& q, ODEState& dq, double /*t*/) const {
        const State s{q[0], q[1], q[2], q[3]};
        const Vec4 f = vector_field(s, mu, floor);
        dq.assign(f.begin(), f.end());
    }
};

// State plus 4x4 transition matrix, column-major in q[4..19].
struct VariationalSystem {
    MassRatio mu;
    double floor;
    void operator()(const ODEState& q, ODEState& dq, double /*t*/) const {
        const State s{q[0], q[1], q[2], q[3]};
        const Vec4 f = vector_field(s, mu, floor);
        const auto A = field_jacobian(s, mu);
        dq.assign(20, 0.0);
        for (int i = 0; i < 4; ++i) dq[i] = f[i];
        for (int col = 0; col < 4; ++col)
            for (int row = 0; row < 4; ++row) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += A[row][k] * q[4 + 4 * col + k];
                dq[4 + 4 * col + row] = acc;
            }
    }
};

// 4(d+1) coefficients, channel-major: q[ch*(d+1) + k].
struct JetSystem {
    MassRatio mu;
    double floor;
    std::size_t degree;

    void operator()(const ODEState& q, ODEState& dq, double /*t*/) const {
        const std::size_t n = degree + 1;
        Jet4 v(degree);
        for (int ch = 0; ch < 4; ++ch)
            for (std::size_t k = 0; k < n; ++k) v.ch[ch][k] = q[ch * n + k];

        const Jet1 &x = v.ch[0], &y = v.ch[1], &vx = v.ch[2], &vy = v.ch[3];
        const double m = mu.mu;

        const Jet1 dx1 = x + m;
        const Jet1 dx2 = x - (1.0 - m);
        const Jet1 r1sq = dx1 * dx1 + y * y;
        const Jet1 r2sq = dx2 * dx2 + y * y;
        check_collision(std::sqrt(std::max(r1sq[0], 0.0)), std::sqrt(std::max(r2sq[0], 0.0)),
                        m, floor);
        const Jet1 r1m3 = jet_pow(r1sq, -1.5);

        Jet1 ax = 2.0 * vy + x - (1.0 - m) * (dx1 * r1m3);
        Jet1 ay = -2.0 * vx + y - (1.0 - m) * (y * r1m3);
        if (m > 0.0) {
            const Jet1 r2m3 = jet_pow(r2sq, -1.5);
            ax = ax - m * (dx2 * r2m3);
            ay = ay - m * (y * r2m3);
        }

        dq.resize(q.size());
        for (std::size_t k = 0; k < n; ++k) {
            dq[0 * n + k] = vx[k];
            dq[1 * n + k] = vy[k];
            dq[2 * n + k] = ax[k];
            dq[3 * n + k] = ay[k];
        }
    }
};

template <typename System>
inline void integrate_to(const System& sys, ODEState& q, double t0, double t1,
                         const IntegratorConfig& cfg) {
    if (t1 == t0) return;
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    auto stepper = make_stepper(cfg);
    double t = t0;
    double dt = dir * std::min(cfg.initial_step, std::abs(t1 - t0));
    std::size_t steps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (dir * (t + dt - t1) > 0.0) dt = t1 - t;
        auto res = stepper.try_step(sys, q, t, dt);
        if (res == boost::numeric::odeint::fail) {
            if (std::abs(dt) < 1e-16) throw StepLimitError("step size underflow");
            continue;
        }
        if (++steps > cfg.max_steps) throw StepLimitError("max_steps exhausted");
    }
}

// Step sizes accepted by the adaptive integrator along the base trajectory.
// Jet transport replays this sequence so that the steps taken depend only on
// the underlying orbit, never on the jet degree or coefficient scale; flows
// of different jets over the same arc then share their low-order channel
// errors exactly, which is what makes order-by-order residual checks clean.
inline std::vector<double> record_steps(const State& s0, double t0, double t1,
                                        const MassRatio& mu, const IntegratorConfig& cfg) {
    std::vector<double> hs;
    if (t1 == t0) return hs;
    const StateSystem sys{mu, cfg.collision_floor};
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    auto stepper = make_stepper(cfg);
    ODEState q{s0.x, s0.y, s0.vx, s0.vy};
    double t = t0;
    double dt = dir * std::min(cfg.initial_step, std::abs(t1 - t0));
    std::size_t steps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (dir * (t + dt - t1) > 0.0) dt = t1 - t;
        const double t_before = t;
        auto res = stepper.try_step(sys, q, t, dt);
        if (res == boost::numeric::odeint::fail) {
            if (std::abs(dt) < 1e-16) throw StepLimitError("step size underflow");
            continue;
        }
        hs.push_back(t - t_before);
        if (++steps > cfg.max_steps) throw StepLimitError("max_steps exhausted");
    }
    return hs;
}

template <typename System>
inline void replay_steps(const System& sys, ODEState& q, double t0,
                         const std::vector<double>& hs) {
    ErrorStepper stepper;
    double t = t0;
    for (const double h : hs) {
        stepper.do_step(sys, q, t, h);
        t += h;
    }
}

}  // namespace detail

inline State flow_state(const State& s0, double t, const MassRatio& mu,
                        const IntegratorConfig& cfg = {}) {
    detail::ODEState q{s0.x, s0.y, s0.vx, s0.vy};
    detail::integrate_to(detail::StateSystem{mu, cfg.collision_floor}, q, 0.0, t, cfg);
    return {q[0], q[1], q[2], q[3]};
}

inline Jet4 flow_jet(const Jet4& j0, double t, const MassRatio& mu,
                     const IntegratorConfig& cfg = {}) {
    const std::size_t d = j0.degree(), n = d + 1;
    const State base{j0.ch[0][0], j0.ch[1][0], j0.ch[2][0], j0.ch[3][0]};
    const auto hs = detail::record_steps(base, 0.0, t, mu, cfg);
    detail::ODEState q(4 * n);
    for (int ch = 0; ch < 4; ++ch)
        for (std::size_t k = 0; k < n; ++k) q[ch * n + k] = j0.ch[ch][k];
    detail::replay_steps(detail::JetSystem{mu, cfg.collision_floor, d}, q, 0.0, hs);
    Jet4 out(d);
    for (int ch = 0; ch < 4; ++ch)
        for (std::size_t k = 0; k < n; ++k) out.ch[ch][k] = q[ch * n + k];
    return out;
}

using Matrix4 = std::array<std::array<double, 4>, 4>;

// State transition matrix of the flow over [0, t].
inline Matrix4 transition_matrix(const State& s0, double t, const MassRatio& mu,
                                 const IntegratorConfig& cfg = {}) {
    detail::ODEState q(20, 0.0);
    q[0] = s0.x;
    q[1] = s0.y;
    q[2] = s0.vx;
    q[3] = s0.vy;
    for (int i = 0; i < 4; ++i) q[4 + 5 * i] = 1.0;
    detail::integrate_to(detail::VariationalSystem{mu, cfg.collision_floor}, q, 0.0, t, cfg);
    Matrix4 M{};
    for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 4; ++row) M[row][col] = q[4 + 4 * col + row];
    return M;
}

inline std::pair<State, Matrix4> flow_with_transition(const State& s0, double t,
                                                      const MassRatio& mu,
                                                      const IntegratorConfig& cfg = {}) {
    detail::ODEState q(20, 0.0);
    q[0] = s0.x;
    q[1] = s0.y;
    q[2] = s0.vx;
    q[3] = s0.vy;
    for (int i = 0; i < 4; ++i) q[4 + 5 * i] = 1.0;
    detail::integrate_to(detail::VariationalSystem{mu, cfg.collision_floor}, q, 0.0, t, cfg);
    Matrix4 M{};
    for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 4; ++row) M[row][col] = q[4 + 4 * col + row];
    return {State{q[0], q[1], q[2], q[3]}, M};
}

inline Matrix4 monodromy(const State& orbit_point, double period, const MassRatio& mu,
                         const IntegratorConfig& cfg = {}) {
    return transition_matrix(orbit_point, period, mu, cfg);
}

// Finite-difference cross-check for the variational monodromy.
inline Matrix4 monodromy_fd(const State& orbit_point, double period, const MassRatio& mu,
                            const IntegratorConfig& cfg = {}, double h = 1e-7) {
    Matrix4 M{};
    const Vec4 base = orbit_point.to_array();
    for (int col = 0; col < 4; ++col) {
        Vec4 p = base, m = base;
        p[col] += h;
        m[col] -= h;
        const State fp = flow_state(State::from_array(p), period, mu, cfg);
        const State fm = flow_state(State::from_array(m), period, mu, cfg);
        const Vec4 ap = fp.to_array(), am = fm.to_array();
        for (int row = 0; row < 4; ++row) M[row][col] = (ap[row] - am[row]) / (2.0 * h);
    }
    return M;
}

struct SectionEvent {
    State state;
    double time = 0.0;
    int direction = 0;  // sign of ydot at the crossing
};

struct SectionOptions {
    int time_direction = +1;  // +1 forward, -1 backward
    int vy_sign = +1;         // required sign of ydot at the crossing
    bool require_x_negative = true;
    double min_time = 1e-8;   // guard against re-reporting the departure crossing
    double max_time = 1e6;
    double y_tol = 1e-12;
};

// First y = 0 crossing matching the requested ydot sign (and x < 0 when
// required). The crossing time is refined by regula falsi on short
// re-integrations from the bracketing step start until |y| < y_tol.
inline SectionEvent next_section_crossing(const State& s0, const SectionOptions& opt,
                                          const MassRatio& mu, const IntegratorConfig& cfg = {}) {
    const double dir = opt.time_direction >= 0 ? 1.0 : -1.0;
    const detail::StateSystem sys{mu, cfg.collision_floor};
    auto stepper = detail::make_stepper(cfg);

    detail::ODEState q{s0.x, s0.y, s0.vx, s0.vy};
    double t = 0.0;
    double dt = dir * cfg.initial_step;
    std::size_t steps = 0;

    while (std::abs(t) < opt.max_time) {
        const detail::ODEState q_prev = q;
        const double t_prev = t;
        auto res = stepper.try_step(sys, q, t, dt);
        if (res == boost::numeric::odeint::fail) {
            if (std::abs(dt) < 1e-16) throw StepLimitError("step size underflow");
            continue;
        }
        if (++steps > cfg.max_steps) throw StepLimitError("max_steps exhausted");

        if (!(q_prev[1] == 0.0) && q_prev[1] * q[1] <= 0.0 && q[1] != q_prev[1]) {
            // Bracketed a crossing inside [t_prev, t]; refine from q_prev.
            const State anchor{q_prev[0], q_prev[1], q_prev[2], q_prev[3]};
            double lo = 0.0, hi = t - t_prev;
            double ylo = q_prev[1], yhi = q[1];
            double tau = hi, ytau = yhi;
            State ev{q[0], q[1], q[2], q[3]};
            for (int it = 0; it < 200 && std::abs(ytau) > opt.y_tol; ++it) {
                tau = (std::abs(yhi - ylo) > 0.0) ? lo - ylo * (hi - lo) / (yhi - ylo)
                                                  : 0.5 * (lo + hi);
                if (!(tau > std::min(lo, hi) && tau < std::max(lo, hi)))
                    tau = 0.5 * (lo + hi);
                ev = flow_state(anchor, tau, mu, cfg);
                ytau = ev.y;
                if (ylo * ytau <= 0.0) {
                    hi = tau;
                    yhi = ytau;
                } else {
                    lo = tau;
                    ylo = ytau;
                }
            }
            const double t_event = t_prev + tau;
            const bool sign_ok = (opt.vy_sign >= 0) ? (ev.vy > 0.0) : (ev.vy < 0.0);
            const bool x_ok = !opt.require_x_negative || ev.x < 0.0;
            if (std::abs(t_event) >= opt.min_time && sign_ok && x_ok)
                return SectionEvent{ev, t_event, ev.vy > 0.0 ? +1 : -1};
        }
    }
    throw NoCrossingError("no matching y=0 crossing within max_time");
}

}  // namespace rescon

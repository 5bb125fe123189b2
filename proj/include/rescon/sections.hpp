#pragma once

// Trace of a manifold expansion on the y = 0, x < 0 Poincare section, and
// globalization beyond the fundamental domain by iterating the forward or
// backward return map (s-labels multiply by lambda per iterate).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rescon/dynamics.hpp"
#include "rescon/manifolds.hpp"
#include "rescon/parallel.hpp"
#include "rescon/propagation.hpp"

namespace rescon {

struct SectionSample {
    double s = 0.0;
    double x = 0.0, vx = 0.0, vy = 0.0;
    int iterates = 0;

    State state() const { return {x, 0.0, vx, vy}; }
};

struct SectionCurve {
    std::vector<SectionSample> samples;  // sorted by s
    double lambda = 0.0;
    double jacobi = 0.0;
    int vy_sign = +1;
    ManifoldKind kind = ManifoldKind::Unstable;
    double domain = 0.0;  // raw fundamental domain of the source expansion
    double period = 0.0;
    double mu = 0.0;
    std::size_t dropped = 0;  // per-point failures during projection/globalization
};

struct SectionGridOptions {
    int grid = 2000;              // points per s-branch
    double dead_zone = 1e-3;      // skip |s| < dead_zone * D
    IntegratorConfig cfg{};
};

// Forward/backward return map on the section (y = 0, x < 0, matching vy sign).
inline State return_map(const State& s0, int time_direction, int vy_sign, double period,
                        const MassRatio& mu, const IntegratorConfig& cfg = {}) {
    SectionOptions opt;
    opt.time_direction = time_direction;
    opt.vy_sign = vy_sign;
    opt.max_time = 3.0 * period;
    return next_section_crossing(s0, opt, mu, cfg).state;
}

// Project one manifold point to its nearest section crossing; forwards or
// backwards, whichever arrives sooner. Points needing more than one period
// are treated as failures.
inline std::optional<SectionEvent> project_point(const State& p, int vy_sign, double period,
                                                 const MassRatio& mu,
                                                 const IntegratorConfig& cfg) {
    std::optional<SectionEvent> best;
    for (const int dir : {+1, -1}) {
        SectionOptions opt;
        opt.time_direction = dir;
        opt.vy_sign = vy_sign;
        opt.min_time = 0.0;  // the point sits off-section, time 0 cannot trigger
        opt.max_time = 1.05 * period;
        try {
            const SectionEvent ev = next_section_crossing(p, opt, mu, cfg);
            if (!best || std::abs(ev.time) < std::abs(best->time)) best = ev;
        } catch (const std::runtime_error&) {
        }
    }
    return best;
}

inline SectionCurve project_to_section(const ManifoldExpansion& w,
                                       const SectionGridOptions& opt = {}) {
    if (!(w.domain > 0.0)) throw DomainError("expansion has no computed fundamental domain");
    const MassRatio mu(w.orbit.mu);
    const int vy_sign = w.orbit.point.vy >= 0.0 ? +1 : -1;
    const double D = w.domain;

    SectionCurve curve;
    curve.lambda = w.lambda;
    curve.jacobi = w.orbit.jacobi;
    curve.vy_sign = vy_sign;
    curve.kind = w.kind;
    curve.domain = D;
    curve.period = w.orbit.period;
    curve.mu = w.orbit.mu;

    std::vector<double> grid;
    grid.reserve(2 * opt.grid);
    const double s_min = opt.dead_zone * D;
    for (int i = 0; i < opt.grid; ++i) {
        const double s = s_min + (D - s_min) * i / (opt.grid - 1);
        grid.push_back(s);
        grid.push_back(-s);
    }

    std::vector<std::optional<SectionSample>> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double s = grid[i];
        const State p = w.eval(s);
        const auto ev = project_point(p, vy_sign, w.orbit.period, mu, opt.cfg);
        if (ev && ev->state.x < 0.0)
            out[i] = SectionSample{s, ev->state.x, ev->state.vx, ev->state.vy, 0};
    });

    for (const auto& s : out) {
        if (s)
            curve.samples.push_back(*s);
        else
            ++curve.dropped;
    }
    std::sort(curve.samples.begin(), curve.samples.end(),
              [](const SectionSample& a, const SectionSample& b) { return a.s < b.s; });
    return curve;
}

// Extend the curve by applying the return map: forward (P+) for an unstable
// curve, backward (P-) for a stable one. Labels follow s -> lambda s for
// lambda > 1 and s -> s / lambda for lambda < 1; per-point failures are
// skipped and counted.
inline SectionCurve globalize(const SectionCurve& curve, int iterations,
                              const IntegratorConfig& cfg = {}) {
    SectionCurve out = curve;
    const MassRatio mu(curve.mu);
    const bool unstable = curve.lambda > 1.0;
    const int dir = unstable ? +1 : -1;
    const double factor = unstable ? curve.lambda : 1.0 / curve.lambda;

    std::vector<SectionSample> front = curve.samples;
    for (int it = 1; it <= iterations; ++it) {
        std::vector<std::optional<SectionSample>> next(front.size());
        parallel_for(front.size(), [&](std::size_t i) {
            const SectionSample& sm = front[i];
            try {
                const State img =
                    return_map(sm.state(), dir, curve.vy_sign, curve.period, mu, cfg);
                next[i] = SectionSample{sm.s * factor, img.x, img.vx, img.vy, sm.iterates + 1};
            } catch (const std::runtime_error&) {
            }
        });
        std::vector<SectionSample> kept;
        kept.reserve(front.size());
        for (const auto& s : next) {
            if (s)
                kept.push_back(*s);
            else
                ++out.dropped;
        }
        out.samples.insert(out.samples.end(), kept.begin(), kept.end());
        front = std::move(kept);
        if (front.empty()) break;
    }
    std::sort(out.samples.begin(), out.samples.end(),
              [](const SectionSample& a, const SectionSample& b) { return a.s < b.s; });
    return out;
}

}  // namespace rescon

#pragma once

// Heteroclinic connection search: join consecutive section-curve samples by
// (x, xdot) segments, intersect the unstable set against the stable set, and
// refine each candidate by bisection in the s-parameters. Midpoints are
// always evaluated through the manifold expansion (fundamental-domain
// preimage plus return-map iterates), never by chord interpolation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rescon/dynamics.hpp"
#include "rescon/manifolds.hpp"
#include "rescon/parallel.hpp"
#include "rescon/sections.hpp"

namespace rescon {

struct JumpHeuristic {
    double abs_gap = 0.05;  // (x, xdot) Euclidean units
    double rel_gap = 10.0;  // vs the previous gap along the curve
};

struct Segment {
    double s_a = 0.0, s_b = 0.0;
    double xa = 0.0, va = 0.0;  // (x, xdot) endpoints
    double xb = 0.0, vb = 0.0;
    std::size_t index = 0;  // position in the curve's segment sequence
};

inline std::vector<Segment> build_segments(const SectionCurve& curve,
                                           const JumpHeuristic& jump = {}) {
    if (curve.samples.empty()) throw DomainError("build_segments: empty curve");
    std::vector<Segment> segs;
    segs.reserve(curve.samples.size());
    double prev_gap = -1.0;
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        const auto& a = curve.samples[i];
        const auto& b = curve.samples[i + 1];
        const double gap = std::hypot(b.x - a.x, b.vx - a.vx);
        const bool discontinuity =
            gap > jump.abs_gap || (prev_gap > 0.0 && gap > jump.rel_gap * prev_gap);
        prev_gap = gap;
        if (discontinuity) continue;
        segs.push_back({a.s, b.s, a.x, a.vx, b.x, b.vx, segs.size()});
    }
    return segs;
}

namespace detail {

inline double orient(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

inline bool on_segment(double ax, double ay, double bx, double by, double px, double py) {
    return std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py &&
           py <= std::max(ay, by);
}

struct SegHit {
    bool hit = false;
    bool collinear = false;
    double x = 0.0, v = 0.0;  // approximate intersection point
};

inline SegHit segment_intersection(const Segment& p, const Segment& q) {
    // Bounding-box fast reject.
    if (std::max(p.xa, p.xb) < std::min(q.xa, q.xb) ||
        std::max(q.xa, q.xb) < std::min(p.xa, p.xb) ||
        std::max(p.va, p.vb) < std::min(q.va, q.vb) ||
        std::max(q.va, q.vb) < std::min(p.va, p.vb))
        return {};

    const double d1 = orient(q.xa, q.va, q.xb, q.vb, p.xa, p.va);
    const double d2 = orient(q.xa, q.va, q.xb, q.vb, p.xb, p.vb);
    const double d3 = orient(p.xa, p.va, p.xb, p.vb, q.xa, q.va);
    const double d4 = orient(p.xa, p.va, p.xb, p.vb, q.xb, q.vb);

    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        const double t = d1 / (d1 - d2);
        return {true, false, p.xa + t * (p.xb - p.xa), p.va + t * (p.vb - p.va)};
    }
    if (d1 == 0 && on_segment(q.xa, q.va, q.xb, q.vb, p.xa, p.va))
        return {true, true, p.xa, p.va};
    if (d2 == 0 && on_segment(q.xa, q.va, q.xb, q.vb, p.xb, p.vb))
        return {true, true, p.xb, p.vb};
    if (d3 == 0 && on_segment(p.xa, p.va, p.xb, p.vb, q.xa, q.va))
        return {true, true, q.xa, q.va};
    if (d4 == 0 && on_segment(p.xa, p.va, p.xb, p.vb, q.xb, q.vb))
        return {true, true, q.xb, q.vb};
    return {};
}

}  // namespace detail

struct Candidate {
    Segment u, s;
    double x = 0.0, v = 0.0;  // approximate (x, xdot) crossing
    bool collinear = false;
};

inline std::vector<Candidate> find_candidate_intersections(const std::vector<Segment>& u_segs,
                                                           const std::vector<Segment>& s_segs,
                                                           double jacobi_u, double jacobi_s,
                                                           double jacobi_tol = 1e-9) {
    if (std::abs(jacobi_u - jacobi_s) > jacobi_tol)
        throw DomainError("curves live on different Jacobi levels");
    std::vector<std::vector<Candidate>> per_u(u_segs.size());
    parallel_for(u_segs.size(), [&](std::size_t i) {
        for (const Segment& s : s_segs) {
            const auto hit = detail::segment_intersection(u_segs[i], s);
            if (hit.hit) per_u[i].push_back({u_segs[i], s, hit.x, hit.v, hit.collinear});
        }
    });
    std::vector<Candidate> out;
    for (auto& v : per_u) out.insert(out.end(), v.begin(), v.end());
    return out;
}

struct HeteroclinicConnection {
    State state;      // on the section, from the unstable curve midpoint
    double s_u = 0.0;
    double s_s = 0.0;
    double residual = 0.0;  // gap between the two curve points at termination
};

struct RefineOptions {
    double tol_xy = 1e-9;
    double tol_s_rel = 1e-12;
    int max_rounds = 200;
    // Strongly stretched curve regions need many neighbor rescues before a
    // genuine crossing stabilizes under subdivision; generous limits here only
    // cost time on candidates that are truly spurious.
    int max_neighbor_resets = 64;
    int neighbor_window = 200;
    IntegratorConfig cfg{};
};

enum class RefineStatus { Connection, Spurious, Unresolved };

struct RefineResult {
    RefineStatus status = RefineStatus::Spurious;
    std::optional<HeteroclinicConnection> connection;
    int rounds = 0;
};

// Curve point at parameter s: pull s back into the fundamental domain, take
// the expansion there to the section, then push forward/backward with the
// return map the matching number of iterates.
inline State evaluate_curve_point(const ManifoldExpansion& w, const SectionCurve& curve,
                                  double s, const IntegratorConfig& cfg = {}) {
    const bool unstable = w.lambda > 1.0;
    const double shrink = unstable ? 1.0 / w.lambda : w.lambda;
    int k = 0;
    double s0 = s;
    while (std::abs(s0) > w.domain && k < 64) {
        s0 *= shrink;
        ++k;
    }
    const auto ev = project_point(w.eval(s0), curve.vy_sign, curve.period,
                                  MassRatio(curve.mu), cfg);
    if (!ev) throw NoCrossingError("curve point did not reach the section");
    State p = ev->state;
    const int dir = unstable ? +1 : -1;
    for (int i = 0; i < k; ++i)
        p = return_map(p, dir, curve.vy_sign, curve.period, MassRatio(curve.mu), cfg);
    return p;
}

namespace detail {

inline Segment make_segment(double sa, const State& a, double sb, const State& b) {
    return {sa, sb, a.x, a.vx, b.x, b.vx, 0};
}

inline double gap3(const State& a, const State& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.vx - b.vx) * (a.vx - b.vx) +
                     (a.vy - b.vy) * (a.vy - b.vy));
}

}  // namespace detail

inline RefineResult refine(const Candidate& cand, const ManifoldExpansion& wu,
                           const ManifoldExpansion& ws, const SectionCurve& u_curve,
                           const SectionCurve& s_curve, const std::vector<Segment>& u_segs,
                           const std::vector<Segment>& s_segs, const RefineOptions& opt = {}) {
    auto eval_u = [&](double s) { return evaluate_curve_point(wu, u_curve, s, opt.cfg); };
    auto eval_s = [&](double s) { return evaluate_curve_point(ws, s_curve, s, opt.cfg); };

    double ua = cand.u.s_a, ub = cand.u.s_b;
    double sa = cand.s.s_a, sb = cand.s.s_b;
    State Ua, Ub, Sa, Sb;
    try {
        Ua = eval_u(ua);
        Ub = eval_u(ub);
        Sa = eval_s(sa);
        Sb = eval_s(sb);
    } catch (const std::runtime_error&) {
        return {RefineStatus::Unresolved, std::nullopt, 0};
    }

    std::size_t u_index = cand.u.index, s_index = cand.s.index;
    int resets = 0;

    for (int round = 1; round <= opt.max_rounds; ++round) {
        State Um, Sm;
        double um = 0.5 * (ua + ub), sm = 0.5 * (sa + sb);
        try {
            Um = eval_u(um);
            Sm = eval_s(sm);
        } catch (const std::runtime_error&) {
            return {RefineStatus::Unresolved, std::nullopt, round};
        }

        const double gap = detail::gap3(Um, Sm);
        const bool s_converged = std::abs(ub - ua) < opt.tol_s_rel * std::max(1.0, std::abs(um)) &&
                                 std::abs(sb - sa) < opt.tol_s_rel * std::max(1.0, std::abs(sm));
        if (gap < opt.tol_xy || s_converged) {
            HeteroclinicConnection conn{Um, um, sm, gap};
            return {RefineStatus::Connection, conn, round};
        }

        // Subdivide both segments at their curve midpoints and re-intersect.
        const Segment u1 = detail::make_segment(ua, Ua, um, Um);
        const Segment u2 = detail::make_segment(um, Um, ub, Ub);
        const Segment s1 = detail::make_segment(sa, Sa, sm, Sm);
        const Segment s2 = detail::make_segment(sm, Sm, sb, Sb);

        bool found = false;
        for (const auto* up : {&u1, &u2}) {
            for (const auto* sp : {&s1, &s2}) {
                if (detail::segment_intersection(*up, *sp).hit) {
                    ua = up->s_a;
                    ub = up->s_b;
                    Ua = (up == &u1) ? Ua : Um;
                    Ub = (up == &u1) ? Um : Ub;
                    sa = sp->s_a;
                    sb = sp->s_b;
                    Sa = (sp == &s1) ? Sa : Sm;
                    Sb = (sp == &s1) ? Sm : Sb;
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
        if (found) continue;

        // The intersection broke on subdivision: look for it against nearby
        // segments of the original curves before declaring it spurious.
        if (resets >= opt.max_neighbor_resets)
            return {RefineStatus::Spurious, std::nullopt, round};
        ++resets;
        bool rescued = false;
        const auto in_window = [&](std::size_t i, std::size_t center) {
            const std::size_t w = static_cast<std::size_t>(opt.neighbor_window);
            return (i + w >= center) && (i <= center + w);
        };
        for (const auto* up : {&u1, &u2}) {
            for (const Segment& sn : s_segs) {
                if (!in_window(sn.index, s_index)) continue;
                if (detail::segment_intersection(*up, sn).hit) {
                    try {
                        ua = up->s_a;
                        ub = up->s_b;
                        Ua = (up == &u1) ? Ua : Um;
                        Ub = (up == &u1) ? Um : Ub;
                        sa = sn.s_a;
                        sb = sn.s_b;
                        Sa = eval_s(sa);
                        Sb = eval_s(sb);
                        s_index = sn.index;
                        rescued = true;
                    } catch (const std::runtime_error&) {
                        return {RefineStatus::Unresolved, std::nullopt, round};
                    }
                    break;
                }
            }
            if (rescued) break;
        }
        if (!rescued) {
            for (const auto* sp : {&s1, &s2}) {
                for (const Segment& un : u_segs) {
                    if (!in_window(un.index, u_index)) continue;
                    if (detail::segment_intersection(un, *sp).hit) {
                        try {
                            sa = sp->s_a;
                            sb = sp->s_b;
                            Sa = (sp == &s1) ? Sa : Sm;
                            Sb = (sp == &s1) ? Sm : Sb;
                            ua = un.s_a;
                            ub = un.s_b;
                            Ua = eval_u(ua);
                            Ub = eval_u(ub);
                            u_index = un.index;
                            rescued = true;
                        } catch (const std::runtime_error&) {
                            return {RefineStatus::Unresolved, std::nullopt, round};
                        }
                        break;
                    }
                }
                if (rescued) break;
            }
        }
        if (!rescued) return {RefineStatus::Spurious, std::nullopt, round};
    }
    return {RefineStatus::Unresolved, std::nullopt, opt.max_rounds};
}

// Merge connections closer than dedup_xy in (x, xdot), keeping the smaller
// residual; output sorted by s_u.
inline std::vector<HeteroclinicConnection> deduplicate_connections(
    std::vector<HeteroclinicConnection> conns, double dedup_xy = 1e-6) {
    std::vector<HeteroclinicConnection> out;
    for (const auto& c : conns) {
        bool merged = false;
        for (auto& o : out) {
            if (std::hypot(c.state.x - o.state.x, c.state.vx - o.state.vx) < dedup_xy) {
                if (c.residual < o.residual) o = c;
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(c);
    }
    std::sort(out.begin(), out.end(),
              [](const HeteroclinicConnection& a, const HeteroclinicConnection& b) {
                  return a.s_u < b.s_u;
              });
    return out;
}

struct TrajectorySample {
    double t = 0.0;
    State state;
};

// Backward leg toward the unstable orbit, forward leg toward the stable one.
inline std::vector<TrajectorySample> connection_trajectory(const HeteroclinicConnection& conn,
                                                           double backward_time,
                                                           double forward_time,
                                                           const MassRatio& mu,
                                                           int samples_per_leg = 400,
                                                           const IntegratorConfig& cfg = {}) {
    std::vector<TrajectorySample> out;
    out.reserve(2 * samples_per_leg + 1);
    for (int i = samples_per_leg; i >= 1; --i) {
        const double t = -backward_time * i / samples_per_leg;
        out.push_back({t, flow_state(conn.state, t, mu, cfg)});
    }
    out.push_back({0.0, conn.state});
    for (int i = 1; i <= samples_per_leg; ++i) {
        const double t = forward_time * i / samples_per_leg;
        out.push_back({t, flow_state(conn.state, t, mu, cfg)});
    }
    return out;
}

}  // namespace rescon

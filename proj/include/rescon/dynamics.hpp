#pragma once

// Planar circular restricted 3-body problem in the synodic (rotating)
// barycentric frame. Primaries sit at x = -mu and x = 1 - mu.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rescon {

using Vec4 = std::array<double, 4>;

struct CollisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MassRatio {
    double mu = 0.0;

    explicit MassRatio(double mu_) : mu(mu_) {
        if (!(mu >= 0.0 && mu < 0.5))
            throw DomainError("mass ratio must lie in [0, 1/2): " + std::to_string(mu_));
    }
};

// Jupiter-Europa and Earth-Moon fixture values.
inline constexpr double kMuEuropa = 2.5266448850435028e-5;
inline constexpr double kMuMoon = 1.2150584270571545e-2;

// Trajectories must stay clear of both primaries.
inline constexpr double kCollisionFloor = 1e-12;

struct State {
    double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;

    Vec4 to_array() const { return {x, y, vx, vy}; }
    static State from_array(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
};

inline double r1_of(const State& s, double mu) { return std::hypot(s.x + mu, s.y); }
inline double r2_of(const State& s, double mu) { return std::hypot(s.x - 1.0 + mu, s.y); }

// A primary with zero mass exerts no force, so its distance is not checked.
inline void check_collision(double r1, double r2, double mu, double floor = kCollisionFloor) {
    if ((mu < 1.0 && r1 < floor) || (mu > 0.0 && r2 < floor))
        throw CollisionError("trajectory reached a primary: r1=" + std::to_string(r1) +
                             " r2=" + std::to_string(r2));
}

// (xdot, ydot, xddot, yddot)
inline Vec4 vector_field(const State& s, const MassRatio& m,
                         double collision_floor = kCollisionFloor) {
    const double mu = m.mu;
    const double r1 = r1_of(s, mu), r2 = r2_of(s, mu);
    check_collision(r1, r2, mu, collision_floor);
    const double r1c = r1 * r1 * r1, r2c = r2 * r2 * r2;
    double ax = 2.0 * s.vy + s.x - (1.0 - mu) * (s.x + mu) / r1c;
    double ay = -2.0 * s.vx + s.y - (1.0 - mu) * s.y / r1c;
    if (mu > 0.0) {
        ax -= mu * (s.x - 1.0 + mu) / r2c;
        ay -= mu * s.y / r2c;
    }
    return {s.vx, s.vy, ax, ay};
}

inline double jacobi_constant(const State& s, const MassRatio& m,
                              double collision_floor = kCollisionFloor) {
    const double mu = m.mu;
    const double r1 = r1_of(s, mu), r2 = r2_of(s, mu);
    check_collision(r1, r2, mu, collision_floor);
    const double pot = (1.0 - mu) / r1 + (mu > 0.0 ? mu / r2 : 0.0);
    return s.x * s.x + s.y * s.y + 2.0 * pot - (s.vx * s.vx + s.vy * s.vy);
}

inline Vec4 jacobi_gradient(const State& s, const MassRatio& m,
                            double collision_floor = kCollisionFloor) {
    const double mu = m.mu;
    const double r1 = r1_of(s, mu), r2 = r2_of(s, mu);
    check_collision(r1, r2, mu, collision_floor);
    const double c1 = (1.0 - mu) / (r1 * r1 * r1);
    const double c2 = mu > 0.0 ? mu / (r2 * r2 * r2) : 0.0;
    return {2.0 * s.x - 2.0 * c1 * (s.x + mu) - 2.0 * c2 * (s.x - 1.0 + mu),
            2.0 * s.y - 2.0 * c1 * s.y - 2.0 * c2 * s.y, -2.0 * s.vx, -2.0 * s.vy};
}

// (x, y, vx, vy) -> (x, -y, -vx, vy); conjugates forward and backward flow.
inline State time_reversal(const State& s) { return {s.x, -s.y, -s.vx, s.vy}; }

// Reconstruct ydot on the y = 0 section from (x, xdot) and the Jacobi constant.
inline double velocity_from_section(double x, double vx, double C, int sign,
                                    const MassRatio& m) {
    State s{x, 0.0, vx, 0.0};
    const double mu = m.mu;
    const double r1 = r1_of(s, mu), r2 = r2_of(s, mu);
    check_collision(r1, r2, mu);
    const double rad =
        x * x + 2.0 * ((1.0 - mu) / r1 + (mu > 0.0 ? mu / r2 : 0.0)) - vx * vx - C;
    if (rad < 0.0)
        throw DomainError("velocity_from_section: negative radicand " + std::to_string(rad));
    return (sign >= 0 ? 1.0 : -1.0) * std::sqrt(rad);
}

// Jacobian of the vector field; rows/cols ordered (x, y, vx, vy).
inline std::array<std::array<double, 4>, 4> field_jacobian(const State& s, const MassRatio& m) {
    const double mu = m.mu;
    const double dx1 = s.x + mu, dx2 = s.x - 1.0 + mu, y = s.y;
    const double r1sq = dx1 * dx1 + y * y, r2sq = dx2 * dx2 + y * y;
    const double r1 = std::sqrt(r1sq), r2 = std::sqrt(r2sq);
    check_collision(r1, r2, mu);
    const double r1c = r1sq * r1, r2c = r2sq * r2;
    const double r15 = r1c * r1sq, r25 = r2c * r2sq;
    const double om = 1.0 - mu;

    double Uxx = 1.0 - om * (1.0 / r1c - 3.0 * dx1 * dx1 / r15);
    double Uxy = 3.0 * om * dx1 * y / r15;
    double Uyy = 1.0 - om * (1.0 / r1c - 3.0 * y * y / r15);
    if (mu > 0.0) {
        Uxx -= mu * (1.0 / r2c - 3.0 * dx2 * dx2 / r25);
        Uxy += 3.0 * mu * dx2 * y / r25;
        Uyy -= mu * (1.0 / r2c - 3.0 * y * y / r25);
    }

    return {{{0, 0, 1, 0},
             {0, 0, 0, 1},
             {Uxx, Uxy, 0, 2},
             {Uxy, Uyy, -2, 0}}};
}

}  // namespace rescon

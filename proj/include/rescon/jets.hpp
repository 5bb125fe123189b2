#pragma once

// Truncated univariate Taylor polynomials ("jets") with the automatic
// differentiation recursions needed for jet transport: truncated product,
// quotient, and real powers. Coefficient k of every operation depends only
// on coefficients <= k of the operands.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rescon {

class Jet1 {
  public:
    Jet1() : c_(1, 0.0) {}
    explicit Jet1(std::size_t degree, double c0 = 0.0) : c_(degree + 1, 0.0) { c_[0] = c0; }
    explicit Jet1(std::vector<double> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.assign(1, 0.0);
    }

    std::size_t degree() const { return c_.size() - 1; }
    double& operator[](std::size_t k) { return c_[k]; }
    double operator[](std::size_t k) const { return c_[k]; }
    const std::vector<double>& coeffs() const { return c_; }

  private:
    std::vector<double> c_;
};

inline void require_same_degree(const Jet1& a, const Jet1& b) {
    if (a.degree() != b.degree())
        throw std::invalid_argument("jet degree mismatch: " + std::to_string(a.degree()) +
                                    " vs " + std::to_string(b.degree()));
}

inline Jet1 operator+(const Jet1& a, const Jet1& b) {
    require_same_degree(a, b);
    Jet1 r(a.degree());
    for (std::size_t k = 0; k <= a.degree(); ++k) r[k] = a[k] + b[k];
    return r;
}

inline Jet1 operator-(const Jet1& a, const Jet1& b) {
    require_same_degree(a, b);
    Jet1 r(a.degree());
    for (std::size_t k = 0; k <= a.degree(); ++k) r[k] = a[k] - b[k];
    return r;
}

inline Jet1 operator+(const Jet1& a, double s) {
    Jet1 r = a;
    r[0] += s;
    return r;
}
inline Jet1 operator-(const Jet1& a, double s) { return a + (-s); }

inline Jet1 operator*(double s, const Jet1& a) {
    Jet1 r(a.degree());
    for (std::size_t k = 0; k <= a.degree(); ++k) r[k] = s * a[k];
    return r;
}
inline Jet1 operator*(const Jet1& a, double s) { return s * a; }

inline Jet1 operator-(const Jet1& a) { return -1.0 * a; }

// Cauchy product truncated at the common degree.
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
    require_same_degree(a, b);
    const std::size_t d = a.degree();
    Jet1 r(d);
    for (std::size_t k = 0; k <= d; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k; ++j) acc += a[j] * b[k - j];
        r[k] = acc;
    }
    return r;
}

// d = f/g via d_k = (f_k - sum_{j<k} d_j g_{k-j}) / g_0.
inline Jet1 operator/(const Jet1& f, const Jet1& g) {
    require_same_degree(f, g);
    if (std::abs(g[0]) < 1e-300)
        throw std::domain_error("jet division by series with vanishing constant term");
    const std::size_t d = f.degree();
    Jet1 r(d);
    for (std::size_t k = 0; k <= d; ++k) {
        double acc = f[k];
        for (std::size_t j = 0; j < k; ++j) acc -= r[j] * g[k - j];
        r[k] = acc / g[0];
    }
    return r;
}

// h = f^alpha from f h' = alpha h f':
//   h_k = (1/(k f_0)) sum_{j=1..k} (alpha j - (k - j)) f_j h_{k-j}
inline Jet1 jet_pow(const Jet1& f, double alpha) {
    if (!(f[0] > 0.0))
        throw std::domain_error("jet_pow requires positive constant term, got " +
                                std::to_string(f[0]));
    const std::size_t d = f.degree();
    Jet1 h(d);
    h[0] = std::pow(f[0], alpha);
    for (std::size_t k = 1; k <= d; ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j)
            acc += (alpha * static_cast<double>(j) - static_cast<double>(k - j)) * f[j] * h[k - j];
        h[k] = acc / (static_cast<double>(k) * f[0]);
    }
    return h;
}

inline double jet_eval(const Jet1& f, double s) {
    double r = 0.0;
    for (std::size_t k = f.degree() + 1; k-- > 0;) r = r * s + f[k];
    return r;
}

// f(lambda * s): coefficient k becomes c_k * lambda^k.
inline Jet1 compose_scale(const Jet1& f, double lambda) {
    Jet1 r(f.degree());
    double p = 1.0;
    for (std::size_t k = 0; k <= f.degree(); ++k) {
        r[k] = f[k] * p;
        p *= lambda;
    }
    return r;
}

inline Jet1 truncate(const Jet1& f, std::size_t degree) {
    Jet1 r(degree);
    for (std::size_t k = 0; k <= degree && k <= f.degree(); ++k) r[k] = f[k];
    return r;
}

// Four jet channels (x, y, vx, vy) of a shared degree.
struct Jet4 {
    std::array<Jet1, 4> ch;

    Jet4() = default;
    explicit Jet4(std::size_t degree)
        : ch{Jet1(degree), Jet1(degree), Jet1(degree), Jet1(degree)} {}

    std::size_t degree() const { return ch[0].degree(); }

    std::array<double, 4> coeff(std::size_t k) const {
        return {ch[0][k], ch[1][k], ch[2][k], ch[3][k]};
    }

    std::array<double, 4> eval(double s) const {
        return {jet_eval(ch[0], s), jet_eval(ch[1], s), jet_eval(ch[2], s), jet_eval(ch[3], s)};
    }
};

}  // namespace rescon

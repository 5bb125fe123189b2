#pragma once

// File formats: JSON records for orbits and manifold expansions, CSV for
// section curves and connection tables, minimal SVG scatter plots. All
// numerics are written with 17 significant digits so doubles round-trip.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rescon/connections.hpp"
#include "rescon/continuation.hpp"
#include "rescon/manifolds.hpp"
#include "rescon/sections.hpp"

namespace rescon {

struct IOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// FNV-1a 64-bit, used for content-hash staleness checks between stages.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot open " + path + " for writing");
    out << data;
    if (!out) throw IOError("write failed: " + path);
}

// ---- orbit records ---------------------------------------------------------

inline nlohmann::json orbit_to_json(const ResonantOrbit& o) {
    nlohmann::json j;
    j["n"] = o.n;
    j["m"] = o.m;
    j["e"] = o.e;
    j["g_seed"] = o.g_seed;
    j["mu"] = o.mu;
    j["point"] = {o.point.x, o.point.y, o.point.vx, o.point.vy};
    j["period"] = o.period;
    j["residual"] = o.residual;
    j["jacobi"] = o.jacobi;
    j["stability"] = o.eigen.type == StabilityType::Hyperbolic   ? "hyperbolic"
                     : o.eigen.type == StabilityType::Elliptic ? "elliptic"
                                                               : "degenerate";
    if (o.eigen.type == StabilityType::Hyperbolic) {
        j["lambda_u"] = o.eigen.lambda_u;
        j["lambda_s"] = o.eigen.lambda_s;
        j["v_u"] = {o.eigen.v_u[0], o.eigen.v_u[1], o.eigen.v_u[2], o.eigen.v_u[3]};
        j["v_s"] = {o.eigen.v_s[0], o.eigen.v_s[1], o.eigen.v_s[2], o.eigen.v_s[3]};
    }
    return j;
}

inline ResonantOrbit orbit_from_json(const nlohmann::json& j) {
    ResonantOrbit o;
    o.n = j.at("n");
    o.m = j.at("m");
    o.e = j.at("e");
    o.g_seed = j.at("g_seed");
    o.mu = j.at("mu");
    const auto& p = j.at("point");
    o.point = {p[0], p[1], p[2], p[3]};
    o.period = j.at("period");
    o.residual = j.at("residual");
    o.jacobi = j.at("jacobi");
    const std::string st = j.at("stability");
    if (st == "hyperbolic") {
        o.eigen.type = StabilityType::Hyperbolic;
        o.eigen.lambda_u = j.at("lambda_u");
        o.eigen.lambda_s = j.at("lambda_s");
        const auto &vu = j.at("v_u"), &vs = j.at("v_s");
        for (int i = 0; i < 4; ++i) {
            o.eigen.v_u[i] = vu[i];
            o.eigen.v_s[i] = vs[i];
        }
    } else {
        o.eigen.type = st == "elliptic" ? StabilityType::Elliptic : StabilityType::Degenerate;
    }
    return o;
}

inline void save_orbit(const ResonantOrbit& o, const std::string& path) {
    write_file(path, orbit_to_json(o).dump(2) + "\n");
}

inline ResonantOrbit load_orbit(const std::string& path) {
    return orbit_from_json(nlohmann::json::parse(read_file(path)));
}

// ---- expansion records -----------------------------------------------------

inline nlohmann::json expansion_to_json(const ManifoldExpansion& w) {
    nlohmann::json j;
    j["kind"] = to_string(w.kind);
    j["lambda"] = w.lambda;
    j["alpha"] = w.alpha;
    j["degree"] = w.degree();
    j["domain"] = w.domain;
    j["e_tol"] = w.e_tol;
    j["orbit"] = orbit_to_json(w.orbit);
    j["orbit_hash"] = fnv1a(orbit_to_json(w.orbit).dump());
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : w.coeffs) coeffs.push_back({c[0], c[1], c[2], c[3]});
    j["coeffs"] = coeffs;
    j["order_residuals"] = w.order_residuals;
    return j;
}

inline ManifoldExpansion expansion_from_json(const nlohmann::json& j) {
    ManifoldExpansion w;
    w.kind = j.at("kind") == "stable" ? ManifoldKind::Stable : ManifoldKind::Unstable;
    w.lambda = j.at("lambda");
    w.alpha = j.at("alpha");
    w.domain = j.at("domain");
    w.e_tol = j.at("e_tol");
    w.orbit = orbit_from_json(j.at("orbit"));
    for (const auto& c : j.at("coeffs")) w.coeffs.push_back({c[0], c[1], c[2], c[3]});
    if (j.contains("order_residuals"))
        w.order_residuals = j.at("order_residuals").get<std::vector<double>>();
    return w;
}

inline void save_expansion(const ManifoldExpansion& w, const std::string& path) {
    write_file(path, expansion_to_json(w).dump(2) + "\n");
}

inline ManifoldExpansion load_expansion(const std::string& path) {
    return expansion_from_json(nlohmann::json::parse(read_file(path)));
}

// ---- section curves (CSV with '#' metadata header) --------------------------

inline void save_curve(const SectionCurve& c, const std::string& path) {
    std::ostringstream out;
    out << "# rescon section curve\n";
    out << "# lambda=" << format_full(c.lambda) << "\n";
    out << "# jacobi=" << format_full(c.jacobi) << "\n";
    out << "# vy_sign=" << c.vy_sign << "\n";
    out << "# kind=" << to_string(c.kind) << "\n";
    out << "# domain=" << format_full(c.domain) << "\n";
    out << "# period=" << format_full(c.period) << "\n";
    out << "# mu=" << format_full(c.mu) << "\n";
    out << "# dropped=" << c.dropped << "\n";
    out << "s,iterates,x,xdot,ydot\n";
    for (const auto& s : c.samples)
        out << format_full(s.s) << ',' << s.iterates << ',' << format_full(s.x) << ','
            << format_full(s.vx) << ',' << format_full(s.vy) << "\n";
    write_file(path, out.str());
}

inline SectionCurve load_curve(const std::string& path) {
    std::istringstream in(read_file(path));
    SectionCurve c;
    std::string line;
    auto meta = [&](const std::string& l, const char* key) -> std::optional<std::string> {
        const std::string prefix = std::string("# ") + key + "=";
        if (l.rfind(prefix, 0) == 0) return l.substr(prefix.size());
        return std::nullopt;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (auto v = meta(line, "lambda")) c.lambda = std::stod(*v);
            if (auto v = meta(line, "jacobi")) c.jacobi = std::stod(*v);
            if (auto v = meta(line, "vy_sign")) c.vy_sign = std::stoi(*v);
            if (auto v = meta(line, "kind"))
                c.kind = *v == "stable" ? ManifoldKind::Stable : ManifoldKind::Unstable;
            if (auto v = meta(line, "domain")) c.domain = std::stod(*v);
            if (auto v = meta(line, "period")) c.period = std::stod(*v);
            if (auto v = meta(line, "mu")) c.mu = std::stod(*v);
            if (auto v = meta(line, "dropped")) c.dropped = std::stoul(*v);
            continue;
        }
        if (line.rfind("s,", 0) == 0) continue;  // column header
        SectionSample sm;
        if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf", &sm.s, &sm.iterates, &sm.x, &sm.vx,
                        &sm.vy) == 5)
            c.samples.push_back(sm);
    }
    return c;
}

// ---- connections table -------------------------------------------------------

inline void save_connections(const std::vector<HeteroclinicConnection>& conns,
                             const std::string& path) {
    std::ostringstream out;
    out << "x,y,xdot,ydot,s_s,s_u,residual\n";
    for (const auto& c : conns)
        out << format_full(c.state.x) << ',' << format_full(c.state.y) << ','
            << format_full(c.state.vx) << ',' << format_full(c.state.vy) << ','
            << format_full(c.s_s) << ',' << format_full(c.s_u) << ','
            << format_full(c.residual) << "\n";
    write_file(path, out.str());
}

inline std::vector<HeteroclinicConnection> load_connections(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<HeteroclinicConnection> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'x') continue;
        HeteroclinicConnection c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &c.state.x, &c.state.y,
                        &c.state.vx, &c.state.vy, &c.s_s, &c.s_u, &c.residual) == 7)
            out.push_back(c);
    }
    return out;
}

// ---- SVG scatter/line plots --------------------------------------------------

struct PlotSeries {
    std::vector<std::pair<double, double>> points;
    std::string color = "#1f77b4";
    bool lines = false;
    std::string label;
};

inline void save_svg_plot(const std::vector<PlotSeries>& series, const std::string& path,
                          const std::string& xlabel = "", const std::string& ylabel = "") {
    constexpr double W = 860, H = 640, ML = 70, MR = 20, MT = 20, MB = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmin <= xmax)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    const double xpad = (xmax - xmin) * 0.05 + 1e-12, ypad = (ymax - ymin) * 0.05 + 1e-12;
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' viewBox='0 0 " << W << ' ' << H << "'>\n";
    svg << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
    svg << "<rect x='" << ML << "' y='" << MT << "' width='" << W - ML - MR << "' height='"
        << H - MT - MB << "' fill='none' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = xmin + (xmax - xmin) * i / 5.0, y = ymin + (ymax - ymin) * i / 5.0;
        svg << "<text x='" << px(x) << "' y='" << H - MB + 18
            << "' font-size='11' text-anchor='middle'>" << format_full(x).substr(0, 9)
            << "</text>\n";
        svg << "<text x='" << ML - 6 << "' y='" << py(y) + 4
            << "' font-size='11' text-anchor='end'>" << format_full(y).substr(0, 9)
            << "</text>\n";
    }
    if (!xlabel.empty())
        svg << "<text x='" << (ML + W - MR) / 2 << "' y='" << H - 10
            << "' font-size='13' text-anchor='middle'>" << xlabel << "</text>\n";
    if (!ylabel.empty())
        svg << "<text x='14' y='" << (MT + H - MB) / 2
            << "' font-size='13' text-anchor='middle' transform='rotate(-90 14 "
            << (MT + H - MB) / 2 << ")'>" << ylabel << "</text>\n";
    for (const auto& s : series) {
        if (s.lines) {
            svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1' points='";
            for (const auto& [x, y] : s.points) svg << px(x) << ',' << py(y) << ' ';
            svg << "'/>\n";
        } else {
            for (const auto& [x, y] : s.points)
                svg << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='1.2' fill='"
                    << s.color << "'/>\n";
        }
    }
    double ly = MT + 16;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        svg << "<circle cx='" << W - MR - 150 << "' cy='" << ly - 4 << "' r='4' fill='"
            << s.color << "'/>\n";
        svg << "<text x='" << W - MR - 140 << "' y='" << ly << "' font-size='12'>" << s.label
            << "</text>\n";
        ly += 18;
    }
    svg << "</svg>\n";
    write_file(path, svg.str());
}

}  // namespace rescon

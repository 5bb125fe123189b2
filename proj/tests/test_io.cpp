#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "rescon/continuation.hpp"
#include "rescon/io.hpp"

using namespace rescon;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

ResonantOrbit sample_orbit() {
    ResonantOrbit o;
    o.n = 3;
    o.m = 4;
    o.e = 0.1488;
    o.g_seed = 0.0;
    o.mu = 2.5266448850435028e-5;
    o.point = {-1.391929713356257, 0.0, 1.25e-13, 0.609863420586548};
    o.period = 25.338526603095760;
    o.residual = 3.7e-12;
    o.jacobi = 3.0024;
    o.eigen.type = StabilityType::Hyperbolic;
    o.eigen.lambda_u = 88.175093899915780;
    o.eigen.lambda_s = 0.011341070996024;
    o.eigen.v_u = {0.1, 0.2, 0.3, 0.4};
    o.eigen.v_s = {-0.4, 0.3, -0.2, 0.1};
    return o;
}

}  // namespace

TEST_CASE("doubles round-trip through the 17-digit formatter") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 1000; ++i) {
        const double v = mant(rng) * std::pow(10.0, expo(rng));
        CHECK(std::stod(format_full(v)) == v);
    }
    CHECK(std::stod(format_full(0.1)) == 0.1);
    CHECK(std::stod(format_full(-0.0)) == 0.0);
}

TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("orbit records survive a JSON round trip bit-for-bit") {
    const ResonantOrbit o = sample_orbit();
    const std::string path = tmp_path("rescon_orbit.json");
    save_orbit(o, path);
    const ResonantOrbit r = load_orbit(path);

    CHECK(r.n == o.n);
    CHECK(r.m == o.m);
    CHECK(r.e == o.e);
    CHECK(r.mu == o.mu);
    CHECK(r.point.x == o.point.x);
    CHECK(r.point.vx == o.point.vx);
    CHECK(r.point.vy == o.point.vy);
    CHECK(r.period == o.period);
    CHECK(r.residual == o.residual);
    CHECK(r.jacobi == o.jacobi);
    REQUIRE(r.eigen.type == StabilityType::Hyperbolic);
    CHECK(r.eigen.lambda_u == o.eigen.lambda_u);
    CHECK(r.eigen.lambda_s == o.eigen.lambda_s);
    for (int i = 0; i < 4; ++i) {
        CHECK(r.eigen.v_u[i] == o.eigen.v_u[i]);
        CHECK(r.eigen.v_s[i] == o.eigen.v_s[i]);
    }

    // Re-serializing the loaded record reproduces the file byte-for-byte.
    CHECK(orbit_to_json(r).dump(2) + "\n" == read_file(path));
}

TEST_CASE("elliptic orbits omit the eigen block and still round-trip") {
    ResonantOrbit o = sample_orbit();
    o.eigen = EigenData{};
    o.eigen.type = StabilityType::Elliptic;
    const std::string path = tmp_path("rescon_orbit_ell.json");
    save_orbit(o, path);
    const ResonantOrbit r = load_orbit(path);
    CHECK(r.eigen.type == StabilityType::Elliptic);
    CHECK_FALSE(orbit_to_json(o).contains("lambda_u"));
}

TEST_CASE("expansion records survive a JSON round trip bit-for-bit") {
    ManifoldExpansion w;
    w.kind = ManifoldKind::Stable;
    w.lambda = 0.011341070996024;
    w.alpha = 0.03125;
    w.domain = 0.7146;
    w.e_tol = 1e-5;
    w.orbit = sample_orbit();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k <= 10; ++k)
        w.coeffs.push_back({u(rng), u(rng), u(rng), u(rng)});
    w.order_residuals = {0.0, 0.0, 1e-12, 3e-12, 2e-11};

    const std::string path = tmp_path("rescon_expansion.json");
    save_expansion(w, path);
    const ManifoldExpansion r = load_expansion(path);

    CHECK(r.kind == ManifoldKind::Stable);
    CHECK(r.lambda == w.lambda);
    CHECK(r.alpha == w.alpha);
    CHECK(r.domain == w.domain);
    CHECK(r.e_tol == w.e_tol);
    REQUIRE(r.coeffs.size() == w.coeffs.size());
    for (std::size_t k = 0; k < w.coeffs.size(); ++k)
        for (int i = 0; i < 4; ++i) CHECK(r.coeffs[k][i] == w.coeffs[k][i]);
    CHECK(r.order_residuals == w.order_residuals);
    CHECK(r.orbit.point.x == w.orbit.point.x);

    // Evaluation agrees exactly after the round trip.
    const State a = w.eval(0.37), b = r.eval(0.37);
    CHECK(a.x == b.x);
    CHECK(a.vy == b.vy);
}

TEST_CASE("section curves survive the CSV round trip") {
    SectionCurve c;
    c.lambda = 88.175093899915780;
    c.jacobi = 3.0024;
    c.vy_sign = +1;
    c.kind = ManifoldKind::Unstable;
    c.domain = 0.7146;
    c.period = 25.338526603095760;
    c.mu = 2.5266448850435028e-5;
    c.dropped = 3;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 25; ++i)
        c.samples.push_back({u(rng), -1.0 + 0.4 * u(rng), 0.1 * u(rng), 0.5 + 0.1 * u(rng),
                             i % 3});

    const std::string path = tmp_path("rescon_curve.csv");
    save_curve(c, path);

    const std::string raw = read_file(path);
    CHECK(raw.rfind("# rescon section curve", 0) == 0);
    CHECK(raw.find("s,iterates,x,xdot,ydot") != std::string::npos);

    const SectionCurve r = load_curve(path);
    CHECK(r.lambda == c.lambda);
    CHECK(r.jacobi == c.jacobi);
    CHECK(r.vy_sign == c.vy_sign);
    CHECK(r.kind == c.kind);
    CHECK(r.domain == c.domain);
    CHECK(r.period == c.period);
    CHECK(r.mu == c.mu);
    CHECK(r.dropped == c.dropped);
    REQUIRE(r.samples.size() == c.samples.size());
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        CHECK(r.samples[i].s == c.samples[i].s);
        CHECK(r.samples[i].iterates == c.samples[i].iterates);
        CHECK(r.samples[i].x == c.samples[i].x);
        CHECK(r.samples[i].vx == c.samples[i].vx);
        CHECK(r.samples[i].vy == c.samples[i].vy);
    }
}

TEST_CASE("connection tables survive the CSV round trip") {
    std::vector<HeteroclinicConnection> conns;
    conns.push_back({{-1.2265598, 0.0, -0.060806259, 0.35908692}, -3785.98948, -301.609248,
                     4.2e-10});
    conns.push_back({{-1.1110838, 0.0, -0.10187786, 0.14762036}, -3874.28227, 14.24735921,
                     8.8e-11});

    const std::string path = tmp_path("rescon_connections.csv");
    save_connections(conns, path);
    const auto r = load_connections(path);
    REQUIRE(r.size() == conns.size());
    for (std::size_t i = 0; i < conns.size(); ++i) {
        CHECK(r[i].state.x == conns[i].state.x);
        CHECK(r[i].state.y == conns[i].state.y);
        CHECK(r[i].state.vx == conns[i].state.vx);
        CHECK(r[i].state.vy == conns[i].state.vy);
        CHECK(r[i].s_u == conns[i].s_u);
        CHECK(r[i].s_s == conns[i].s_s);
        CHECK(r[i].residual == conns[i].residual);
    }
}

TEST_CASE("writes are deterministic byte-for-byte") {
    const ResonantOrbit o = sample_orbit();
    const std::string p1 = tmp_path("rescon_det1.json"), p2 = tmp_path("rescon_det2.json");
    save_orbit(o, p1);
    save_orbit(o, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(fnv1a(read_file(p1)) == fnv1a(read_file(p2)));
}

TEST_CASE("SVG plots are well formed and deterministic") {
    PlotSeries line;
    line.lines = true;
    line.label = "line";
    for (int i = 0; i < 50; ++i) line.points.push_back({0.1 * i, std::sin(0.1 * i)});
    PlotSeries dots;
    dots.color = "#d62728";
    dots.label = "dots";
    for (int i = 0; i < 20; ++i) dots.points.push_back({0.2 * i, std::cos(0.2 * i)});

    const std::string p1 = tmp_path("rescon_plot1.svg"), p2 = tmp_path("rescon_plot2.svg");
    save_svg_plot({line, dots}, p1, "x", "y");
    save_svg_plot({line, dots}, p2, "x", "y");
    const std::string svg = read_file(p1);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg == read_file(p2));
}

TEST_CASE("missing files raise IO errors") {
    CHECK_THROWS_AS(read_file(tmp_path("rescon_does_not_exist.json")), IOError);
    CHECK_THROWS_AS(load_orbit(tmp_path("rescon_does_not_exist.json")), IOError);
}

#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/metric.hpp"
#include "core/table.hpp"
#include "core/wall.hpp"
#include "oracles.hpp"

using namespace hypb;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::shared_ptr<const MetricField> bump_metric(double a = 0.05) {
    // phi = a cos(2 pi x) cos(2 pi y) as two product modes.
    std::vector<PhiMode> modes{{1, 1, a / 2.0, 0.0}, {1, -1, a / 2.0, 0.0}};
    return std::make_shared<const MetricField>(1.0, 1.0, modes, KmaxSettings{128, 0.10});
}
}  // namespace

TEST_CASE("flat metric has exactly zero curvature") {
    MetricField m(1.0, 1.0);
    CHECK(m.is_flat());
    CHECK(m.curvature({0.3, 0.7}) == 0.0);
    CHECK(m.kmax() == 0.0);
}

TEST_CASE("constant conformal factor is flat") {
    MetricField m(1.0, 1.0, {{0, 0, 0.7, 0.0}}, KmaxSettings{32, 0.1});
    CHECK_FALSE(m.is_flat());  // not phi == 0, no exact-flat fast paths
    CHECK(m.curvature({0.2, 0.9}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.laplacian_phi({0.2, 0.9}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("single-mode curvature matches the symbolic Laplacian") {
    // phi = a cos(2 pi x / L); K(0,0) = e^{-2a} a (2 pi / L)^2.
    double a = 0.1, L = 1.0;
    MetricField m(L, 1.0, {{1, 0, a, 0.0}}, KmaxSettings{64, 0.1});
    double expected = std::exp(-2.0 * a) * a * (kTwoPi / L) * (kTwoPi / L);
    CHECK(m.curvature({0.0, 0.0}) == doctest::Approx(expected).epsilon(1e-12));

    // Cross-check against central finite differences of phi.
    double fd = oracle::fd_laplacian_phi(m, {0.0, 0.0}, 1e-5);
    CHECK(std::abs(fd - m.laplacian_phi({0.0, 0.0})) < 1e-5);
}

TEST_CASE("finite-difference Laplacian matches the symbolic one on a grid") {
    auto m = bump_metric(0.05);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 12; ++j) {
            Vec2 p{i / 12.0, j / 12.0};
            double sym = m->laplacian_phi(p);
            double fd = oracle::fd_laplacian_phi(*m, p, 1e-4);
            CHECK(std::abs(fd - sym) < 1e-5 * (1.0 + std::abs(sym)));
        }
    }
}

TEST_CASE("phi evaluation is periodic") {
    auto m = bump_metric(0.05);
    oracle::TestRng rng(11);
    for (int i = 0; i < 100; ++i) {
        Vec2 p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        CHECK(std::abs(m->phi({p.x + 1.0, p.y}) - m->phi(p)) < 1e-12);
        CHECK(std::abs(m->phi({p.x, p.y + 1.0}) - m->phi(p)) < 1e-12);
    }
}

TEST_CASE("kmax grid estimate carries the safety margin") {
    auto m = bump_metric(0.05);
    CHECK(m->kmax() > 0.0);
    CHECK(m->kmax() == doctest::Approx(m->kmax_raw() * 1.10));
    // Analytic maximum of |K| for the product bump is near 8 pi^2 a e^{2a}.
    double rough = 8.0 * 9.8696 * 0.05;
    CHECK(m->kmax_raw() > 0.8 * rough);
    CHECK(m->kmax_raw() < 1.5 * rough);
}

TEST_CASE("circle wall frame: exact curvature -1/R") {
    auto metric = std::make_shared<const MetricField>(1.0, 1.0);
    CircleWall wall(metric, {0.5, 0.5}, 0.3);
    CHECK(wall.length() == doctest::Approx(kTwoPi * 0.3));
    for (int i = 0; i < 32; ++i) {
        double r = wall.length() * i / 32.0;
        WallFrame f = wall.frame(r);
        CHECK(f.kappa == doctest::Approx(-1.0 / 0.3).epsilon(1e-12));
        CHECK(std::abs(metric->inner(f.point, f.tangent, f.tangent) - 1.0) < 1e-9);
        CHECK(std::abs(metric->inner(f.point, f.normal, f.normal) - 1.0) < 1e-9);
        CHECK(std::abs(metric->inner(f.point, f.tangent, f.normal)) < 1e-9);
        // N points away from the disk center (toward the billiard interior).
        CHECK(dot(f.normal, f.point - Vec2{0.5, 0.5}) > 0.0);
    }
    CircleWall unit(metric, {0.5, 0.5}, 0.45);
    CHECK(unit.frame(0.1).kappa == doctest::Approx(-1.0 / 0.45).epsilon(1e-12));
}

TEST_CASE("circle kappa matches finite differences of the tangent") {
    auto metric = std::make_shared<const MetricField>(1.0, 1.0);
    CircleWall wall(metric, {0.5, 0.5}, 0.3);
    double h = 1e-6;
    double r = 0.4;
    WallFrame f = wall.frame(r);
    WallFrame fp = wall.frame(r + h);
    WallFrame fm = wall.frame(r - h);
    Vec2 dT{(fp.tangent.x - fm.tangent.x) / (2.0 * h), (fp.tangent.y - fm.tangent.y) / (2.0 * h)};
    double kappa_fd = dot(dT, f.normal);  // flat metric: plain dot product
    CHECK(kappa_fd == doctest::Approx(-1.0 / 0.3).epsilon(1e-6));
}

TEST_CASE("circle walls are rejected on curved metrics") {
    auto curved = bump_metric(0.05);
    CHECK_THROWS_AS(CircleWall(curved, {0.5, 0.5}, 0.2), Error);
}

TEST_CASE("spline wall: unit speed and near-exact circle curvature") {
    auto metric = bump_metric(0.05);
    std::vector<Vec2> pts;
    for (int i = 0; i < 48; ++i) {
        double a = kTwoPi * i / 48.0;
        pts.push_back({0.5 + 0.2 * std::cos(a), 0.5 + 0.2 * std::sin(a)});
    }
    SplineWall wall(metric, pts);
    CHECK(wall.counterclockwise());
    double len = wall.length();
    CHECK(len > 0.0);

    for (int i = 0; i < 16; ++i) {
        double r = len * i / 16.0;
        WallFrame f = wall.frame(r);
        CHECK(std::abs(metric->inner(f.point, f.tangent, f.tangent) - 1.0) < 1e-9);
        CHECK(std::abs(metric->inner(f.point, f.normal, f.normal) - 1e0) < 1e-9);
        CHECK(std::abs(metric->inner(f.point, f.tangent, f.normal)) < 1e-9);
        // Unit-speed parametrization. Richardson-extrapolated central
        // difference: position() itself is only exact to ~1e-14, so a single
        // narrow stencil would drown the 1e-9 bound in rounding noise.
        double h = 4e-5 * len;
        auto diff = [&](double hh) {
            Vec2 pm = wall.position(r - hh), pp = wall.position(r + hh);
            return (pp - pm) * (1.0 / (2.0 * hh));
        };
        Vec2 d1 = diff(h), d2 = diff(h / 2.0);
        Vec2 deriv = (4.0 / 3.0) * d2 - (1.0 / 3.0) * d1;
        CHECK(std::abs(metric->speed(wall.position(r), deriv) - 1.0) < 1e-9);
        // Normal points away from the obstacle.
        CHECK(wall.signed_distance_raw(f.point + 1e-4 * f.normal) > 0.0);
    }

    // On the flat metric the same spline reproduces kappa = -1/R closely.
    auto flat = std::make_shared<const MetricField>(1.0, 1.0);
    SplineWall fw(flat, pts);
    for (int i = 0; i < 8; ++i) {
        WallFrame f = fw.frame(fw.length() * i / 8.0);
        CHECK(f.kappa == doctest::Approx(-5.0).epsilon(2e-3));
    }
}

TEST_CASE("is_dispersing: two-disk table") {
    auto table = parse_table(oracle::two_disk_table_text());
    DispersingReport rep = table->is_dispersing(256);
    CHECK(rep.dispersing);
    REQUIRE(rep.worst_kappa.has_value());
    CHECK(*rep.worst_kappa == doctest::Approx(-1.0 / 0.3).epsilon(1e-12));
}

TEST_CASE("is_dispersing: wall-free table is vacuous") {
    auto table = parse_table(oracle::flat_empty_table_text());
    DispersingReport rep = table->is_dispersing(16);
    CHECK(rep.dispersing);
    CHECK_FALSE(rep.worst_kappa.has_value());
}

TEST_CASE("is_dispersing: straight-sided stadium wall is not dispersing") {
    // Closed capsule: two straight sides and two semicircular caps. The
    // straight stretches have kappa ~ 0, so the max sampled kappa is ~ 0.
    std::vector<Vec2> pts;
    const double r = 0.08, cx0 = 0.35, cx1 = 0.65, cy = 0.5;
    const int side_n = 12, cap_n = 10;
    for (int i = 0; i < side_n; ++i)  // bottom side, left to right
        pts.push_back({cx0 + (cx1 - cx0) * i / side_n, cy - r});
    for (int i = 0; i < cap_n; ++i) {  // right cap, ccw
        double a = -1.5707963267948966 + 3.141592653589793 * i / cap_n;
        pts.push_back({cx1 + r * std::cos(a), cy + r * std::sin(a)});
    }
    for (int i = 0; i < side_n; ++i)  // top side, right to left
        pts.push_back({cx1 - (cx1 - cx0) * i / side_n, cy + r});
    for (int i = 0; i < cap_n; ++i) {  // left cap
        double a = 1.5707963267948966 + 3.141592653589793 * i / cap_n;
        pts.push_back({cx0 + r * std::cos(a), cy + r * std::sin(a)});
    }
    auto metric = std::make_shared<const MetricField>(1.0, 1.0);
    auto wall = std::make_shared<SplineWall>(metric, pts);
    BilliardTable table("stadium", metric, {wall});
    DispersingReport rep = table.is_dispersing(512);
    CHECK_FALSE(rep.dispersing);
    REQUIRE(rep.worst_kappa.has_value());
    CHECK(*rep.worst_kappa >= 0.0);
    // The middle of a straight side is a geodesic stretch: kappa ~ 0 there
    // (spline ringing concentrates at the side-cap junctions).
    double r_mid = wall->project({0.5 * (cx0 + cx1), cy - r});
    CHECK(std::abs(wall->frame(r_mid).kappa) < 1e-2);
}

TEST_CASE("table parsing: full definition") {
    auto table = parse_table("name = demo\n"
                             "metric.period_x = 2.0\n"
                             "metric.period_y = 1.0\n"
                             "metric.phi_modes = [(1, 0, 0.1, 0.0)]\n"
                             "walls = []\n");
    CHECK(table->name() == "demo");
    CHECK(table->metric().period_x() == 2.0);
    CHECK_FALSE(table->is_flat());
}

TEST_CASE("table parsing: errors name the offending key") {
    CHECK_THROWS_WITH_AS(parse_table("metric.period_x = 1.0\n"),
                         doctest::Contains("metric.period_y"), Error);
    CHECK_THROWS_WITH_AS(parse_table("metric.period_x = 1.0\nmetric.period_y = 1.0\nbogus = 3\n"),
                         doctest::Contains("bogus"), Error);
    CHECK_THROWS_WITH_AS(
        parse_table("metric.period_x = 1.0\nmetric.period_y = 1.0\n"
                    "walls = [{type=circle, center=(0.5, 0.5)}]\n"),
        doctest::Contains("radius"), Error);
    CHECK_THROWS_WITH_AS(
        parse_table("metric.period_x = 1.0\nmetric.period_y = 1.0\n"
                    "metric.phi_modes = [(0.5, 0, 0.1, 0.0)]\n"),
        doctest::Contains("integer"), Error);
}

TEST_CASE("table validation: touching walls are rejected") {
    CHECK_THROWS_AS(parse_table("metric.period_x = 1.0\nmetric.period_y = 1.0\n"
                                "walls = [{type=circle, center=(0.3, 0.5), radius=0.2},\n"
                                "         {type=circle, center=(0.7, 0.5), radius=0.2}]\n"),
                    Error);
    // Overlap through the periodic boundary.
    CHECK_THROWS_AS(parse_table("metric.period_x = 1.0\nmetric.period_y = 1.0\n"
                                "walls = [{type=circle, center=(0.05, 0.5), radius=0.3},\n"
                                "         {type=circle, center=(0.95, 0.5), radius=0.3}]\n"),
                    Error);
}

TEST_CASE("built-in scenarios parse and validate") {
    for (const Scenario& s : builtin_scenarios()) {
        auto table = parse_table(s.definition, s.name);
        CHECK(table->name() == s.name);
    }
    CHECK(builtin_scenarios().size() == 4);
}

TEST_CASE("signed distance sees periodic copies") {
    auto table = parse_table(oracle::two_disk_table_text());
    // The disk at (0,0) must be felt near (1,1) through wrapping.
    CHECK(table->signed_distance({0.95, 0.95}) ==
          doctest::Approx(std::hypot(0.05, 0.05) - 0.3).epsilon(1e-12));
}

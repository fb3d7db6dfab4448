#include <doctest.h>

#include <cmath>

#include "core/certify.hpp"
#include "core/cones.hpp"
#include "core/error.hpp"
#include "core/table.hpp"
#include "oracles.hpp"

using namespace hypb;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950;

TangentMatrix mat(double a, double b, double c, double d) {
    TangentMatrix m;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = d;
    return m;
}

// Random matrix with |det| = 1 and mostly positive entries; used to populate
// cone-passing cocycles.
TangentMatrix random_unimodular(oracle::TestRng& rng) {
    for (;;) {
        double a = rng.uniform(0.05, 2.0), b = rng.uniform(0.05, 2.0);
        double c = rng.uniform(0.05, 2.0), d = rng.uniform(0.05, 2.0);
        double det = a * d - b * c;
        if (std::abs(det) < 0.05) continue;
        double s = 1.0 / std::sqrt(std::abs(det));
        TangentMatrix m = mat(a * s, b * s, c * s, d * s);
        if (rng.uniform(0.0, 1.0) < 0.5) m = mat(-m.a, -m.b, -m.c, -m.d);
        return m;
    }
}
}  // namespace

TEST_CASE("cone membership and parameter validation") {
    CHECK_THROWS_AS(ConeParams(0.0), Error);
    CHECK_THROWS_AS(ConeParams(1.0), Error);
    CHECK(cone_contains(0.3, {1.0, 1.0}));
    CHECK(cone_contains(0.3, {-1.0, -1.0}));  // projective
    CHECK_FALSE(cone_contains(0.3, {1.0, -1.0}));
    CHECK_FALSE(cone_contains(0.3, {1.0, 0.0}));
}

TEST_CASE("cone_map_check examples") {
    CHECK(cone_map_check(mat(1, 1, 1, 2), 0.3));
    CHECK_FALSE(cone_map_check(mat(1, 0, 0, 1), 0.3));        // identity fixes the boundary ray
    CHECK_FALSE(cone_map_check(mat(1, 0.7, 0, 1), 0.3));      // flat free flight, parabolic
    CHECK(cone_map_check(mat(-1, -1, -1, -2), 0.3));          // -Id normalization
    CHECK(cone_map_check(mat(1, 2, 1, 1), 0.3));              // det -1, row swap
    CHECK_THROWS_AS(cone_map_check(mat(2, 0, 0, 1), 0.3), Error);  // det != +-1
}

TEST_CASE("expansion gain example and bound") {
    TangentMatrix m = mat(1, 1, 1, 2);
    CHECK(expansion_gain(m, {1.0, 1.0}) == doctest::Approx(6.0));
    CHECK(cone_gain_bound(0.3) == doctest::Approx(1.0 / 0.91));
    CHECK_THROWS_AS(expansion_gain(m, {1.0, -1.0}), Error);

    oracle::TestRng rng(41);
    int found = 0;
    while (found < 100) {
        TangentMatrix r = random_unimodular(rng);
        if (!cone_map_check(r, 0.3)) continue;
        ++found;
        for (int j = 0; j < 50; ++j) {
            double x = rng.uniform(0.3, 1.0 / 0.3);
            Vec2 v{x, 1.0};
            CHECK(expansion_gain(r, v) >= cone_gain_bound(0.3) - 1e-9);
        }
    }
}

TEST_CASE("invariant directions recover eigenvectors of constant cocycles") {
    SUBCASE("matrix (2,1;1,1)") {
        std::vector<TangentMatrix> cocycle(40, mat(2, 1, 1, 1));
        InvariantDirections dirs = invariant_directions(cocycle, 40);
        CHECK(dirs.contracting);
        // lambda_max = (3+sqrt5)/2, eigenvector (phi, 1), phi = (1+sqrt5)/2.
        double phi = 0.5 * (1.0 + std::sqrt(5.0));
        double expect_u = projective_angle({phi, 1.0});
        CHECK(projective_distance(dirs.at_mesh.back().unstable_angle, expect_u) < 1e-6);
        // Stable eigenvector for lambda_min: (x, 1) with x = 1/(lmin - 2)...
        double lmin = 0.5 * (3.0 - std::sqrt(5.0));
        double expect_s = projective_angle({1.0 / (lmin - 2.0), 1.0});
        CHECK(projective_distance(dirs.at_mesh.front().stable_angle, expect_s) < 1e-6);
    }
    SUBCASE("matrix (1,1;1,2)") {
        std::vector<TangentMatrix> cocycle(40, mat(1, 1, 1, 2));
        InvariantDirections dirs = invariant_directions(cocycle, 40);
        CHECK(dirs.contracting);
        double l = 0.5 * (3.0 + std::sqrt(5.0));
        // (1,1;1,2)(x,1) = l(x,1): x + 1 = l x -> x = 1/(l-1).
        double expect_u = projective_angle({1.0 / (l - 1.0), 1.0});
        CHECK(projective_distance(dirs.at_mesh.back().unstable_angle, expect_u) < 1e-6);
    }
    SUBCASE("identity cocycle warns") {
        std::vector<TangentMatrix> cocycle(10, mat(1, 0, 0, 1));
        InvariantDirections dirs = invariant_directions(cocycle, 10);
        CHECK_FALSE(dirs.contracting);
    }
}

TEST_CASE("invariant directions: equivariance along a random cone cocycle") {
    oracle::TestRng rng(43);
    std::vector<TangentMatrix> cocycle;
    while (cocycle.size() < 80) {
        TangentMatrix m = random_unimodular(rng);
        if (cone_map_check(m, 0.1)) cocycle.push_back(m);
    }
    InvariantDirections dirs = invariant_directions(cocycle, 60);
    for (std::size_t k = 60; k + 1 < dirs.at_mesh.size(); ++k) {
        double a = dirs.at_mesh[k].unstable_angle;
        Vec2 v{std::cos(a), std::sin(a)};
        const TangentMatrix& m = cocycle[k];
        Vec2 w{m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
        CHECK(projective_distance(projective_angle(w), dirs.at_mesh[k + 1].unstable_angle) < 1e-6);
    }
}

TEST_CASE("criterion constants: validation, derivation, clipping") {
    CHECK_THROWS_AS(CriterionConstants::make(1.5, 0.1, 0.5, 1.0, 0.0), Error);
    CHECK_THROWS_AS(CriterionConstants::make(2.0, 0.1, -0.5, 1.0, 0.0), Error);
    CHECK_THROWS_AS(CriterionConstants::make(2.0, 0.1, 1.5, 1.0, 0.0), Error);
    CHECK_THROWS_AS(CriterionConstants::make(2.0, 0.0, 0.5, 1.0, 0.0), Error);

    CriterionConstants k = CriterionConstants::make(2.0, 5.0, 0.5, 1.0, 0.0);
    CHECK(k.m_clipped);
    CHECK(k.m == doctest::Approx(std::exp(-8.0)));  // min(e^{-4AC}, 1/4)
    CHECK(k.eta == doctest::Approx(std::min(k.m * k.m * k.m / 4.0, 0.5 / 3.0)));
    CHECK(k.alpha == doctest::Approx(1.0 / k.eta));  // flat limit
    CHECK(k.epsilon == doctest::Approx(std::min({k.m / 2.0, k.m * k.m / 2.0, 1.0 / k.alpha})));

    CriterionConstants k2 = CriterionConstants::make(2.0, 1e-4, 0.5, 1.0, 2.0);
    CHECK_FALSE(k2.m_clipped);
    CHECK(k2.k_max == 2.0);
    CHECK(k2.alpha == doctest::Approx(alpha_bound(2.0, k2.eta)));
}

TEST_CASE("ensemble sampling is deterministic and avoids walls") {
    auto table = parse_table(oracle::two_disk_table_text());
    auto a = sample_ensemble(*table, 50, 9);
    auto b = sample_ensemble(*table, 50, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pos.x == b[i].pos.x);
        CHECK(a[i].vel.y == b[i].vel.y);
        CHECK(table->signed_distance(a[i].pos) > 1e-6);
    }
}

TEST_CASE("lyapunov: integrable flat flow is sub-exponential") {
    auto table = parse_table(oracle::flat_empty_table_text());
    LyapunovOptions opts;
    opts.ensemble = 8;
    opts.duration = 1000.0;
    opts.seed = 2;
    HyperbolicityEstimate est = lyapunov_estimate(*table, opts);
    CHECK(est.used == 8);
    CHECK(est.mean < 0.05);
    CHECK(est.mean > 0.0);
}

TEST_CASE("lyapunov: constant-K = -1 harness converges to 1") {
    auto table = parse_table(oracle::flat_empty_table_text());
    LyapunovOptions opts;
    opts.ensemble = 4;
    opts.duration = 200.0;
    opts.seed = 2;
    opts.constant_curvature = -1.0;
    HyperbolicityEstimate est = lyapunov_estimate(*table, opts);
    CHECK(est.mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("lyapunov: Sinai table is positive") {
    auto table = parse_table(oracle::two_disk_table_text());
    LyapunovOptions opts;
    opts.ensemble = 16;
    opts.duration = 200.0;
    opts.seed = 5;
    HyperbolicityEstimate est = lyapunov_estimate(*table, opts);
    CHECK(est.mean > 0.1);
    // Unstable-direction samples live in the closed quadrant cone.
    for (double a : est.unstable_angles) CHECK(a <= kPi / 2.0 + 1e-9);
}

TEST_CASE("certify thm1: harness and flat verdicts") {
    auto table = parse_table(oracle::flat_empty_table_text());
    CertifyOptions opts;
    opts.ensemble = 8;
    opts.seed = 3;
    opts.t0 = 1.0;

    SUBCASE("K = -1 certifies with margin tanh(t0)") {
        opts.constant_curvature = -1.0;
        Certificate cert = certify_theorem1(*table, opts);
        CHECK(cert.verdict == Verdict::certified);
        CHECK(cert.margin == doctest::Approx(std::tanh(1.0)).epsilon(1e-6));
    }
    SUBCASE("flat torus is refuted (u stays zero)") {
        Certificate cert = certify_theorem1(*table, opts);
        CHECK(cert.verdict == Verdict::refuted);
        CHECK(cert.margin == doctest::Approx(0.0));
    }
    SUBCASE("K = +1 blows up before t0 = 2") {
        opts.constant_curvature = 1.0;
        opts.t0 = 2.0;
        Certificate cert = certify_theorem1(*table, opts);
        CHECK(cert.verdict == Verdict::refuted);
        CHECK(cert.witness.find("blows up") != std::string::npos);
    }
    SUBCASE("walls are rejected") {
        auto sinai = parse_table(oracle::two_disk_table_text());
        CHECK_THROWS_AS(certify_theorem1(*sinai, opts), Error);
    }
}

TEST_CASE("theorem 4 hypothesis checker") {
    auto table = parse_table(oracle::flat_empty_table_text());
    CertifyOptions opts;
    opts.ensemble = 6;
    opts.seed = 3;
    opts.t0 = 1.0;
    opts.m = 0.5;

    SUBCASE("flat torus fails the integral clause") {
        Certificate cert = check_theorem4_hypothesis(*table, opts);
        CHECK(cert.verdict == Verdict::refuted);
        CHECK(cert.reason.find("integral") != std::string::npos);
        CHECK(cert.margin == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("positive curvature fails nonpositivity immediately") {
        auto bump = parse_table("metric.period_x = 1.0\nmetric.period_y = 1.0\n"
                                "metric.phi_modes = [(1, 0, 0.05, 0.0)]\n");
        Certificate cert = check_theorem4_hypothesis(*bump, opts);
        CHECK(cert.verdict == Verdict::refuted);
        CHECK(cert.reason.find("nonpositive") != std::string::npos);
    }
    SUBCASE("constant K = -1 passes with integral -t0") {
        opts.constant_curvature = -1.0;
        Certificate cert = check_theorem4_hypothesis(*table, opts);
        CHECK(cert.verdict == Verdict::certified);
        CHECK(cert.margin == doctest::Approx(-1.0).epsilon(1e-9));
    }
}

TEST_CASE("certify thm3: flat-empty stalls as inconclusive") {
    auto table = parse_table(oracle::flat_empty_table_text());
    CertifyOptions opts;
    opts.ensemble = 4;
    opts.duration = 20.0;
    opts.c = 0.5;
    opts.C = 1.5;
    opts.m = 0.01;
    Certificate cert = certify_theorem3(*table, opts);
    CHECK(cert.verdict == Verdict::inconclusive);
    CHECK(cert.reason.find("stalled") != std::string::npos);
}

TEST_CASE("certify thm3: constant-K harness certifies with c = C = 1") {
    auto table = parse_table(oracle::flat_empty_table_text());
    CertifyOptions opts;
    opts.ensemble = 4;
    opts.duration = 20.0;
    opts.c = 1.0;
    opts.C = 1.0;
    opts.m = 0.01;
    opts.constant_curvature = -1.0;
    Certificate cert = certify_theorem3(*table, opts);
    CHECK(cert.verdict == Verdict::certified);
    CHECK(cert.min_terminal_u == doctest::Approx(std::tanh(1.0)).epsilon(1e-6));
    REQUIRE(cert.constants.has_value());
    CHECK(cert.constants->m_clipped);  // 0.01 > e^{-4AC} = e^{-8}
    CHECK(revalidate_margin(cert, cert.constants->m / 2.0));

    SUBCASE("blow-up regime is refuted") {
        opts.constant_curvature = 2.0;  // u from 0 blows up within ~1.1
        opts.c = 1.2;
        opts.C = 1.4;
        Certificate bad = certify_theorem3(*table, opts);
        CHECK(bad.verdict == Verdict::refuted);
    }
}

TEST_CASE("certify thm3: metric scaling rescales the certified constants") {
    // On rho^2 g: K -> K / rho^2, times scale by rho, u by 1/rho.
    auto table = parse_table(oracle::flat_empty_table_text());
    double rho = 1.7;
    CertifyOptions base;
    base.ensemble = 3;
    base.duration = 12.0;
    base.c = 0.8;
    base.C = 1.0;
    base.m = 0.01;
    base.constant_curvature = -1.0;
    Certificate cert = certify_theorem3(*table, base);
    REQUIRE(cert.verdict == Verdict::certified);

    CertifyOptions scaled = base;
    scaled.duration = base.duration * rho;
    scaled.c = base.c * rho;
    scaled.C = base.C * rho;
    scaled.m = base.m / rho;
    scaled.constant_curvature = -1.0 / (rho * rho);
    Certificate cert2 = certify_theorem3(*table, scaled);
    REQUIRE(cert2.verdict == Verdict::certified);
    CHECK(cert2.min_terminal_u == doctest::Approx(cert.min_terminal_u / rho).epsilon(1e-6));
}

TEST_CASE("certify sinai: finite-horizon table certifies") {
    auto table = parse_table(oracle::finite_horizon_table_text());
    CertifyOptions opts;
    opts.ensemble = 12;
    opts.duration = 100.0;
    opts.seed = 7;
    opts.probe_directions = 720;
    opts.probe_origins = 30;
    opts.probe_t_cap = 30.0;
    Certificate cert = certify_sinai(*table, opts);
    CHECK(cert.verdict == Verdict::certified);
    REQUIRE(cert.constants.has_value());
    CHECK(cert.constants->m_clipped);  // -2 kappa_max = 5 clips to exp(-4AC)
    CHECK(cert.min_jump >= 2.0 / 0.4 - 1e-6);
    CHECK(cert.min_u == 0.0);
    CHECK(cert.min_gap > 0.1);  // disk surfaces are ~0.107 apart
    REQUIRE(cert.expansion.has_value());
    CHECK(cert.expansion->mean > 0.1);
    CHECK(revalidate_margin(cert, cert.constants->m / 2.0));
}

TEST_CASE("certified Sinai cocycle satisfies the cone contract at the certificate epsilon") {
    auto table = parse_table(oracle::finite_horizon_table_text());
    CertifyOptions opts;
    opts.ensemble = 4;
    opts.duration = 40.0;
    opts.seed = 7;
    opts.probe_directions = 360;
    opts.probe_origins = 20;
    opts.probe_t_cap = 20.0;
    Certificate cert = certify_sinai(*table, opts);
    REQUIRE(cert.verdict == Verdict::certified);
    double eps = cert.constants->epsilon;

    PhasePoint s = sample_ensemble(*table, 1, 21)[0];
    TrajectoryRecord rec = flow(*table, s, 40.0);
    REQUIRE(rec.events.size() > 10);
    std::vector<double> mesh;
    mesh.push_back(rec.events[0].t / 2.0);
    for (std::size_t i = 0; i + 1 < rec.events.size(); ++i)
        mesh.push_back(0.5 * (rec.events[i].t + rec.events[i + 1].t));
    std::vector<TangentMatrix> ms = cocycle(*table, rec, mesh);

    double bound = cone_gain_bound(eps);
    oracle::TestRng rng(47);
    for (const TangentMatrix& m : ms) {
        REQUIRE(cone_map_check(m, eps));
        for (int j = 0; j < 20; ++j) {
            double x = rng.uniform(eps, 1.0 / std::max(eps, 1e-3));
            CHECK(expansion_gain(m, {x, 1.0}) >= bound - 1e-9);
        }
    }

    // Telescoped expansion: Q along a tracked cone vector grows at least
    // like bound^k, which controls the leading singular value of the
    // products up to the cone norm-equivalence constant.
    Vec2 w{1.0, 1.0};
    double sum_log_gain = 0.0;
    for (const TangentMatrix& m : ms) {
        double q0 = w.x * w.y;
        Vec2 v{m.a * w.x + m.b * w.y, m.c * w.x + m.d * w.y};
        double q1 = v.x * v.y;
        REQUIRE(q1 > 0.0);
        sum_log_gain += std::log(q1 / q0);
        w = v * (1.0 / norm(v));
        if (w.x < 0.0) w = -w;
    }
    CHECK(sum_log_gain >= static_cast<double>(ms.size()) * std::log(bound) - 1e-9);
}

TEST_CASE("certify sinai: corridor tables are refused as inconclusive") {
    SUBCASE("symmetric two-disk table (diagonal corridor)") {
        auto table = parse_table(oracle::two_disk_table_text());
        CertifyOptions opts;
        opts.ensemble = 4;
        opts.duration = 50.0;
        opts.probe_directions = 720;
        opts.probe_origins = 30;
        opts.probe_t_cap = 30.0;
        Certificate cert = certify_sinai(*table, opts);
        CHECK(cert.verdict == Verdict::inconclusive);
        CHECK(cert.reason == "infinite-horizon-candidate");
        CHECK_FALSE(cert.witness.empty());
    }
    SUBCASE("single-disk table (horizontal corridor)") {
        auto table = parse_table(oracle::one_disk_table_text());
        CertifyOptions opts;
        opts.ensemble = 4;
        opts.duration = 50.0;
        opts.probe_directions = 360;
        opts.probe_origins = 20;
        opts.probe_t_cap = 20.0;
        Certificate cert = certify_sinai(*table, opts);
        CHECK(cert.verdict == Verdict::inconclusive);
        CHECK(cert.reason == "infinite-horizon-candidate");
    }
}

TEST_CASE("certify sinai: non-flat and non-dispersing tables are rejected") {
    CertifyOptions opts;
    opts.ensemble = 2;
    opts.duration = 10.0;
    for (const Scenario& s : builtin_scenarios()) {
        if (s.name != "curved-bump") continue;
        auto curved = parse_table(s.definition, s.name);
        CHECK_THROWS_AS(certify_sinai(*curved, opts), Error);
    }
    auto empty = parse_table(oracle::flat_empty_table_text());
    CHECK_THROWS_AS(certify_sinai(*empty, opts), Error);
}

TEST_CASE("certificate report has the stable key set") {
    auto table = parse_table(oracle::finite_horizon_table_text());
    CertifyOptions opts;
    opts.ensemble = 4;
    opts.duration = 30.0;
    opts.probe_directions = 360;
    opts.probe_origins = 10;
    opts.probe_t_cap = 20.0;
    Certificate cert = certify_sinai(*table, opts);
    std::string rep = render_report(cert);
    for (const char* key :
         {"mode = ", "verdict = ", "A = ", "m = ", "c = ", "C = ", "eta = ", "alpha = ",
          "epsilon = ", "min_jump = ", "lyapunov_mean = ", "witness = ", "trajectories = "})
        CHECK(rep.find(key) != std::string::npos);
}

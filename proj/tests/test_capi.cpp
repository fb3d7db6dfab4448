// Exercises the shared-library surface exactly as an external client would:
// only hypb/hypb.h, opaque handles, status codes.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "hypb/hypb.h"

namespace {
const char* kFiniteHorizonTable =
    "metric.period_x = 1.0\nmetric.period_y = 1.0\n"
    "walls = [{type=circle, center=(0.0, 0.0), radius=0.4},\n"
    "         {type=circle, center=(0.5, 0.5), radius=0.2}]\n";
}

TEST_CASE("version and scenario catalog") {
    CHECK(std::string(hypb_version()) == HYPB_VERSION_STRING);
    REQUIRE(hypb_scenario_count() == 4);
    bool found_two_disk = false;
    for (size_t i = 0; i < hypb_scenario_count(); ++i) {
        const char* name = nullptr;
        const char* desc = nullptr;
        REQUIRE(hypb_scenario_info(i, &name, &desc) == HYPB_OK);
        if (std::string(name) == "sinai-two-disk") found_two_disk = true;
        CHECK(std::strlen(desc) > 0);
    }
    CHECK(found_two_disk);
    const char* def = nullptr;
    CHECK(hypb_scenario_definition("flat-empty", &def) == HYPB_OK);
    CHECK(std::string(def).find("period_x") != std::string::npos);
    CHECK(hypb_scenario_definition("nope", &def) == HYPB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("table resolve, parse errors, accessors") {
    hypb_table* t = nullptr;
    REQUIRE(hypb_table_resolve("sinai-two-disk", &t) == HYPB_OK);
    CHECK(hypb_table_is_flat(t) == 1);
    CHECK(hypb_table_wall_count(t) == 2);
    double kmax = -1.0;
    CHECK(hypb_table_kmax(t, &kmax) == HYPB_OK);
    CHECK(kmax == 0.0);
    int disp = 0, has_walls = 0;
    double worst = 0.0;
    CHECK(hypb_table_is_dispersing(t, 64, &disp, &worst, &has_walls) == HYPB_OK);
    CHECK(disp == 1);
    CHECK(has_walls == 1);
    CHECK(worst == doctest::Approx(-1.0 / 0.3));
    hypb_table_free(t);

    hypb_table* bad = nullptr;
    CHECK(hypb_table_parse("metric.period_x = 1.0\n", "x", &bad) == HYPB_ERR_PARSE);
    CHECK(std::string(hypb_last_error()).find("period_y") != std::string::npos);
    CHECK(hypb_table_load("/nonexistent/table.txt", &bad) == HYPB_ERR_PARSE);
    CHECK(hypb_table_load(nullptr, &bad) == HYPB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulate: straight line on the flat empty torus") {
    hypb_table* t = nullptr;
    REQUIRE(hypb_table_resolve("flat-empty", &t) == HYPB_OK);
    hypb_trajectory* traj = nullptr;
    REQUIRE(hypb_simulate(t, 0.0, 0.0, 0.0, 3.0, 0.01, &traj) == HYPB_OK);
    CHECK(hypb_trajectory_termination(traj) == HYPB_TERM_TIME_LIMIT);
    CHECK(hypb_trajectory_collision_count(traj) == 0);
    size_t n = hypb_trajectory_sample_count(traj);
    REQUIRE(n > 100);
    double row[6];
    REQUIRE(hypb_trajectory_sample(traj, n - 1, row) == HYPB_OK);
    // Final position is 3 mod 1 on the torus.
    double dist = std::min(std::abs(row[1] - 0.0), 1.0 - std::abs(row[1] - 0.0));
    CHECK(dist < 1e-9);
    CHECK(std::abs(row[0] - 3.0) < 1e-9);
    CHECK(hypb_trajectory_sample(traj, n, row) == HYPB_ERR_INVALID_ARGUMENT);
    hypb_trajectory_free(traj);

    hypb_trajectory* inside = nullptr;
    hypb_table* sinai = nullptr;
    REQUIRE(hypb_table_resolve("sinai-one-disk", &sinai) == HYPB_OK);
    CHECK(hypb_simulate(sinai, 0.5, 0.5, 0.0, 1.0, 0.0, &inside) == HYPB_ERR_DOMAIN);
    hypb_table_free(sinai);
    hypb_table_free(t);
}

TEST_CASE("riccati trace via the C API: flat closed form") {
    hypb_table* t = nullptr;
    REQUIRE(hypb_table_resolve("flat-empty", &t) == HYPB_OK);
    hypb_riccati_trace* trace = nullptr;
    REQUIRE(hypb_riccati(t, 0.1, 0.1, 0.3, 1.0, 1.0, 0.05, &trace) == HYPB_OK);
    size_t n = hypb_riccati_sample_count(trace);
    REQUIRE(n > 2);
    double row[6];
    REQUIRE(hypb_riccati_sample(trace, n - 1, row) == HYPB_OK);
    CHECK(row[0] == doctest::Approx(1.0));
    CHECK(row[1] == doctest::Approx(0.5).epsilon(1e-10));  // u0/(1 + u0 t)
    CHECK(hypb_riccati_blowup_count(trace) == 0);
    hypb_riccati_trace_free(trace);
    hypb_table_free(t);
}

TEST_CASE("lyapunov and horizon through the C API") {
    hypb_table* t = nullptr;
    REQUIRE(hypb_table_parse(kFiniteHorizonTable, "fh", &t) == HYPB_OK);

    hypb_lyapunov_result* lres = nullptr;
    REQUIRE(hypb_lyapunov(t, 8, 100.0, 3, 0, &lres) == HYPB_OK);
    CHECK(hypb_lyapunov_used(lres) == 8);
    CHECK(hypb_lyapunov_mean(lres) > 0.1);
    double lam = 0.0;
    CHECK(hypb_lyapunov_exponent(lres, 0, &lam) == HYPB_OK);
    CHECK(lam > 0.0);
    CHECK(hypb_lyapunov_exponent(lres, 99, &lam) == HYPB_ERR_INVALID_ARGUMENT);
    hypb_lyapunov_result_free(lres);

    hypb_horizon_result* hres = nullptr;
    REQUIRE(hypb_horizon_probe(t, 360, 20, 20.0, 1, 0, &hres) == HYPB_OK);
    CHECK(hypb_horizon_capped_count(hres) == 0);
    CHECK(hypb_horizon_max_free_flight(hres) < 3.0);
    hypb_horizon_result_free(hres);
    hypb_table_free(t);
}

TEST_CASE("certification through the C API") {
    hypb_table* t = nullptr;
    REQUIRE(hypb_table_parse(kFiniteHorizonTable, "fh", &t) == HYPB_OK);
    hypb_certify_options opts;
    hypb_certify_options_init(&opts);
    opts.ensemble = 8;
    opts.duration = 60.0;
    opts.seed = 7;
    opts.probe_directions = 360;
    opts.probe_origins = 20;
    opts.probe_t_cap = 20.0;

    hypb_certificate* cert = nullptr;
    REQUIRE(hypb_certify(t, HYPB_MODE_SINAI, &opts, &cert) == HYPB_OK);
    CHECK(hypb_certificate_verdict(cert) == HYPB_VERDICT_CERTIFIED);
    double v = 0.0;
    CHECK(hypb_certificate_value(cert, "min_jump", &v) == HYPB_OK);
    CHECK(v >= 2.0 / 0.4 - 1e-6);
    CHECK(hypb_certificate_value(cert, "A", &v) == HYPB_OK);
    CHECK(v == 2.0);
    CHECK(hypb_certificate_value(cert, "nonsense", &v) == HYPB_ERR_INVALID_ARGUMENT);
    std::string report = hypb_certificate_report(cert);
    CHECK(report.find("verdict = certified") != std::string::npos);
    hypb_certificate_free(cert);

    // Unsupported: sinai mode on a wall-free table.
    hypb_table* flat = nullptr;
    REQUIRE(hypb_table_resolve("flat-empty", &flat) == HYPB_OK);
    hypb_certificate* c2 = nullptr;
    CHECK(hypb_certify(flat, HYPB_MODE_SINAI, &opts, &c2) == HYPB_ERR_UNSUPPORTED);
    hypb_table_free(flat);
    hypb_table_free(t);
}

TEST_CASE("cone report through the C API") {
    // Constant hyperbolic cocycle (2,1;1,1) x 40.
    std::vector<double> ms;
    for (int i = 0; i < 40; ++i) {
        ms.push_back(2.0);
        ms.push_back(1.0);
        ms.push_back(1.0);
        ms.push_back(1.0);
    }
    hypb_cone_report* rep = nullptr;
    REQUIRE(hypb_cone_report_create(ms.data(), 40, 0.3, 40, &rep) == HYPB_OK);
    CHECK(hypb_cone_all_pass(rep) == 1);
    CHECK(hypb_cone_pass_count(rep) == 40);
    CHECK(hypb_cone_min_gain(rep) >= hypb_cone_gain_bound(rep) - 1e-9);
    CHECK(hypb_cone_contracting(rep) == 1);
    double ua = 0.0, sa = 0.0, ud = 0.0, sd = 0.0;
    REQUIRE(hypb_cone_directions(rep, 40, &ua, &sa, &ud, &sd) == HYPB_OK);
    double phi = 0.5 * (1.0 + std::sqrt(5.0));
    double expect = std::atan2(1.0, phi);
    CHECK(std::abs(ua - expect) < 1e-6);
    hypb_cone_report_free(rep);

    // det != +-1 is rejected.
    double bad[4] = {2.0, 0.0, 0.0, 1.0};
    hypb_cone_report* r2 = nullptr;
    CHECK(hypb_cone_report_create(bad, 1, 0.3, 10, &r2) == HYPB_ERR_INVALID_ARGUMENT);
}

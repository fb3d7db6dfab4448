// hypb command-line front end. Talks to the core exclusively through the C
// API in hypb/hypb.h; owns CSV and report serialization plus the run
// manifests.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypb/hypb.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitRefuted = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitInput = 4;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// FNV-1a 64-bit over a file's bytes.
std::string checksum_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "unreadable";
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char out[20];
    std::snprintf(out, sizeof out, "%016" PRIx64, h);
    return out;
}

// Run manifest: resolved configuration plus output checksums. Re-running
// with the same configuration must reproduce byte-identical outputs.
class Manifest {
public:
    void set(const std::string& key, const std::string& value) {
        entries_.emplace_back(key, value);
    }
    void set_num(const std::string& key, double v) { set(key, fmt(v)); }
    void add_output(const std::string& path) { outputs_.push_back(path); }

    void write(const std::string& path, const std::string& status, double wall_seconds) const {
        std::ostringstream out;
        out << "hypb.manifest.version = 1\n";
        out << "tool_version = " << hypb_version() << "\n";
        out << "status = " << status << "\n";
        for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
        out << "wall_seconds = " << fmt(wall_seconds) << "\n";
        for (const auto& o : outputs_)
            out << "output." << fs::path(o).filename().string() << " = " << checksum_file(o)
                << "\n";
        if (path == "-") {
            std::cout << "---- manifest ----\n" << out.str();
            return;
        }
        fs::path p(path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream f(path);
        f << out.str();
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::string> outputs_;
};

int exit_code_for(hypb_status st) {
    switch (st) {
        case HYPB_OK:
            return kExitOk;
        case HYPB_ERR_INTERNAL:
            return kExitInternal;
        default:
            return kExitInput;
    }
}

[[noreturn]] void die(hypb_status st, const std::string& context) {
    std::cerr << "hypb: " << context << ": " << hypb_last_error() << "\n";
    std::exit(exit_code_for(st));
}

struct TableHandle {
    hypb_table* t = nullptr;
    ~TableHandle() { hypb_table_free(t); }
};

void resolve_table_or_die(const std::string& name, TableHandle& th) {
    hypb_status st = hypb_table_resolve(name.c_str(), &th.t);
    if (st != HYPB_OK) die(st, "table '" + name + "'");
}

void ensure_parent_dir(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

int resolve_jobs(int jobs_flag) {
    if (jobs_flag > 0) return jobs_flag;
    if (const char* env = std::getenv("HYPB_JOBS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // library default: available parallelism
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& table, double x0, double y0, double angle0, double duration,
                 std::uint64_t seed, const std::string& out_dir, double stride) {
    double t_start = now_seconds();
    fs::create_directories(out_dir);
    Manifest man;
    man.set("command", "simulate");
    man.set("table", table);
    man.set_num("x0", x0);
    man.set_num("y0", y0);
    man.set_num("angle0", angle0);
    man.set_num("duration", duration);
    man.set("seed", std::to_string(seed));
    man.set_num("stride", stride);
    std::string man_path = (fs::path(out_dir) / "manifest.txt").string();

    TableHandle th;
    resolve_table_or_die(table, th);

    hypb_trajectory* traj = nullptr;
    hypb_status st = hypb_simulate(th.t, x0, y0, angle0, duration, stride, &traj);
    if (st != HYPB_OK) {
        man.write(man_path, "failed", now_seconds() - t_start);
        die(st, "simulate");
    }

    std::string traj_path = (fs::path(out_dir) / "trajectory.csv").string();
    std::string coll_path = (fs::path(out_dir) / "collisions.csv").string();
    {
        std::ofstream f(traj_path);
        f << "t,x,y,vx,vy,event_flag\n";
        size_t n = hypb_trajectory_sample_count(traj);
        for (size_t i = 0; i < n; ++i) {
            double row[6];
            hypb_trajectory_sample(traj, i, row);
            f << fmt(row[0]) << ',' << fmt(row[1]) << ',' << fmt(row[2]) << ',' << fmt(row[3])
              << ',' << fmt(row[4]) << ',' << static_cast<int>(row[5]) << "\n";
        }
    }
    {
        std::ofstream f(coll_path);
        f << "t,wall_index,r,theta,kappa\n";
        size_t n = hypb_trajectory_collision_count(traj);
        for (size_t i = 0; i < n; ++i) {
            double row[5];
            hypb_trajectory_collision(traj, i, row);
            f << fmt(row[0]) << ',' << static_cast<int>(row[1]) << ',' << fmt(row[2]) << ','
              << fmt(row[3]) << ',' << fmt(row[4]) << "\n";
        }
    }
    man.add_output(traj_path);
    man.add_output(coll_path);
    const char* term = "time-limit";
    hypb_termination tm = hypb_trajectory_termination(traj);
    if (tm == HYPB_TERM_GRAZING) term = "grazing";
    if (tm == HYPB_TERM_ESCAPED) term = "escaped-domain-error";
    man.set("termination", term);
    man.set_num("t_end", hypb_trajectory_t_end(traj));
    man.set("collisions", std::to_string(hypb_trajectory_collision_count(traj)));
    hypb_trajectory_free(traj);

    bool escaped = tm == HYPB_TERM_ESCAPED;
    man.write(man_path, escaped ? "failed" : "ok", now_seconds() - t_start);
    if (escaped) {
        std::cerr << "hypb: simulate: escaped-domain-error (integrator failure)\n";
        return kExitInternal;
    }
    std::cout << "wrote " << traj_path << " and " << coll_path << "\n";
    return kExitOk;
}

int cmd_riccati(const std::string& table, double x0, double y0, double angle0, double u0,
                double duration, const std::string& out_file, double stride) {
    double t_start = now_seconds();
    ensure_parent_dir(out_file);
    Manifest man;
    man.set("command", "riccati");
    man.set("table", table);
    man.set_num("x0", x0);
    man.set_num("y0", y0);
    man.set_num("angle0", angle0);
    man.set_num("u0", u0);
    man.set_num("duration", duration);
    man.set_num("stride", stride);
    std::string man_path = out_file + ".manifest";

    TableHandle th;
    resolve_table_or_die(table, th);
    hypb_riccati_trace* trace = nullptr;
    hypb_status st = hypb_riccati(th.t, x0, y0, angle0, u0, duration, stride, &trace);
    if (st != HYPB_OK) {
        man.write(man_path, "failed", now_seconds() - t_start);
        die(st, "riccati");
    }
    {
        std::ofstream f(out_file);
        f << "t,u,y,ydot,blowup_flag,collision_flag\n";
        size_t n = hypb_riccati_sample_count(trace);
        for (size_t i = 0; i < n; ++i) {
            double row[6];
            hypb_riccati_sample(trace, i, row);
            f << fmt(row[0]) << ',' << fmt(row[1]) << ',' << fmt(row[2]) << ',' << fmt(row[3])
              << ',' << static_cast<int>(row[4]) << ',' << static_cast<int>(row[5]) << "\n";
        }
    }
    man.add_output(out_file);
    man.set("blowups", std::to_string(hypb_riccati_blowup_count(trace)));
    hypb_riccati_trace_free(trace);
    man.write(man_path, "ok", now_seconds() - t_start);
    std::cout << "wrote " << out_file << "\n";
    return kExitOk;
}

int cmd_lyapunov(const std::string& table, int ensemble, double duration, std::uint64_t seed,
                 int jobs, const std::string& out_file) {
    double t_start = now_seconds();
    Manifest man;
    man.set("command", "lyapunov");
    man.set("table", table);
    man.set("ensemble", std::to_string(ensemble));
    man.set_num("duration", duration);
    man.set("seed", std::to_string(seed));

    TableHandle th;
    resolve_table_or_die(table, th);
    hypb_lyapunov_result* res = nullptr;
    hypb_status st = hypb_lyapunov(th.t, ensemble, duration, seed, resolve_jobs(jobs), &res);
    if (st != HYPB_OK) {
        if (!out_file.empty()) man.write(out_file + ".manifest", "failed", now_seconds() - t_start);
        die(st, "lyapunov");
    }
    std::ostringstream rep;
    rep << "hypb.lyapunov.version = 1\n";
    rep << "table = " << table << "\n";
    rep << "ensemble = " << ensemble << "\n";
    rep << "duration = " << fmt(duration) << "\n";
    rep << "seed = " << seed << "\n";
    rep << "used = " << hypb_lyapunov_used(res) << "\n";
    rep << "dropped = " << hypb_lyapunov_dropped(res) << "\n";
    rep << "lyapunov_mean = " << fmt(hypb_lyapunov_mean(res)) << "\n";
    rep << "lyapunov_std_error = " << fmt(hypb_lyapunov_std_error(res)) << "\n";
    hypb_lyapunov_result_free(res);

    if (out_file.empty() || out_file == "-") {
        std::cout << rep.str();
        man.write("-", "ok", now_seconds() - t_start);
    } else {
        ensure_parent_dir(out_file);
        std::ofstream(out_file) << rep.str();
        man.add_output(out_file);
        man.write(out_file + ".manifest", "ok", now_seconds() - t_start);
        std::cout << "wrote " << out_file << "\n";
    }
    return kExitOk;
}

int cmd_certify(const std::string& table, const std::string& mode, int ensemble, double duration,
                double A, double m, double c, double C, double t0, std::uint64_t seed, int jobs,
                int probe_directions, int probe_origins, double probe_t_cap,
                const std::string& out_file) {
    double t_start = now_seconds();
    Manifest man;
    man.set("command", "certify");
    man.set("table", table);
    man.set("mode", mode);
    man.set("ensemble", std::to_string(ensemble));
    man.set_num("duration", duration);
    man.set_num("A", A);
    man.set_num("m", m);
    man.set_num("c", c);
    man.set_num("C", C);
    man.set_num("t0", t0);
    man.set("seed", std::to_string(seed));
    man.set("probe_directions", std::to_string(probe_directions));
    man.set("probe_origins", std::to_string(probe_origins));
    man.set_num("probe_t_cap", probe_t_cap);

    hypb_certify_mode cm;
    if (mode == "thm3")
        cm = HYPB_MODE_THM3;
    else if (mode == "thm1")
        cm = HYPB_MODE_THM1;
    else if (mode == "thm4")
        cm = HYPB_MODE_THM4;
    else if (mode == "sinai")
        cm = HYPB_MODE_SINAI;
    else {
        std::cerr << "hypb: certify: unknown mode '" << mode << "' (use thm3|thm1|thm4|sinai)\n";
        return kExitInput;
    }

    TableHandle th;
    resolve_table_or_die(table, th);

    hypb_certify_options opts;
    hypb_certify_options_init(&opts);
    opts.ensemble = ensemble;
    opts.duration = duration;
    opts.seed = seed;
    opts.jobs = resolve_jobs(jobs);
    opts.A = A;
    opts.m = m;
    opts.c = c;
    opts.C = C;
    opts.t0 = t0;
    opts.probe_directions = probe_directions;
    opts.probe_origins = probe_origins;
    opts.probe_t_cap = probe_t_cap;

    hypb_certificate* cert = nullptr;
    hypb_status st = hypb_certify(th.t, cm, &opts, &cert);
    if (st != HYPB_OK) {
        if (!out_file.empty() && out_file != "-")
            man.write(out_file + ".manifest", "failed", now_seconds() - t_start);
        die(st, "certify");
    }

    std::string report = hypb_certificate_report(cert);
    hypb_verdict verdict = hypb_certificate_verdict(cert);
    man.set("verdict", verdict == HYPB_VERDICT_CERTIFIED   ? "certified"
                       : verdict == HYPB_VERDICT_REFUTED   ? "refuted-witness"
                                                           : "inconclusive");
    hypb_certificate_free(cert);

    if (out_file.empty() || out_file == "-") {
        std::cout << report;
        man.write("-", "ok", now_seconds() - t_start);
    } else {
        ensure_parent_dir(out_file);
        std::ofstream(out_file) << report;
        man.add_output(out_file);
        man.write(out_file + ".manifest", "ok", now_seconds() - t_start);
        std::cout << "wrote " << out_file << "\n";
    }
    switch (verdict) {
        case HYPB_VERDICT_CERTIFIED:
            return kExitOk;
        case HYPB_VERDICT_REFUTED:
            return kExitRefuted;
        case HYPB_VERDICT_INCONCLUSIVE:
            return kExitInconclusive;
    }
    return kExitInternal;
}

int cmd_horizon(const std::string& table, int directions, int origins, double t_cap,
                std::uint64_t seed, int jobs, const std::string& out_file) {
    double t_start = now_seconds();
    Manifest man;
    man.set("command", "horizon");
    man.set("table", table);
    man.set("directions", std::to_string(directions));
    man.set("origins", std::to_string(origins));
    man.set_num("t_cap", t_cap);
    man.set("seed", std::to_string(seed));

    TableHandle th;
    resolve_table_or_die(table, th);
    hypb_horizon_result* res = nullptr;
    hypb_status st =
        hypb_horizon_probe(th.t, directions, origins, t_cap, seed, resolve_jobs(jobs), &res);
    if (st != HYPB_OK) {
        if (!out_file.empty()) man.write(out_file + ".manifest", "failed", now_seconds() - t_start);
        die(st, "horizon");
    }
    std::ostringstream rep;
    rep << "hypb.horizon.version = 1\n";
    rep << "table = " << table << "\n";
    rep << "directions = " << directions << "\n";
    rep << "origins = " << origins << "\n";
    rep << "t_cap = " << fmt(t_cap) << "\n";
    rep << "seed = " << seed << "\n";
    rep << "total_samples = " << hypb_horizon_total_samples(res) << "\n";
    rep << "max_free_flight = " << fmt(hypb_horizon_max_free_flight(res)) << "\n";
    rep << "capped_count = " << hypb_horizon_capped_count(res) << "\n";
    long n = std::min(16L, hypb_horizon_capped_count(res));
    for (long i = 0; i < n; ++i) {
        double row[3];
        hypb_horizon_capped_sample(res, i, row);
        rep << "candidate." << i << " = origin=(" << fmt(row[0]) << ", " << fmt(row[1])
            << ") angle=" << fmt(row[2]) << "\n";
    }
    hypb_horizon_result_free(res);

    if (out_file.empty() || out_file == "-") {
        std::cout << rep.str();
        man.write("-", "ok", now_seconds() - t_start);
    } else {
        ensure_parent_dir(out_file);
        std::ofstream(out_file) << rep.str();
        man.add_output(out_file);
        man.write(out_file + ".manifest", "ok", now_seconds() - t_start);
        std::cout << "wrote " << out_file << "\n";
    }
    return kExitOk;
}

int cmd_cones(const std::string& cocycle_file, double epsilon, int iterations,
              const std::string& out_file) {
    double t_start = now_seconds();
    Manifest man;
    man.set("command", "cones");
    man.set("cocycle", cocycle_file);
    man.set_num("epsilon", epsilon);
    man.set("iterations", std::to_string(iterations));

    std::ifstream in(cocycle_file);
    if (!in) {
        std::cerr << "hypb: cones: cannot open '" << cocycle_file << "'\n";
        return kExitInput;
    }
    std::vector<double> entries;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first && line.find_first_not_of("abcd, \t\r") == std::string::npos) {
            first = false;
            continue;  // header row
        }
        first = false;
        std::istringstream ls(line);
        std::string cell;
        int col = 0;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) {
                std::cerr << "hypb: cones: malformed number in '" << line << "'\n";
                return kExitInput;
            }
            entries.push_back(v);
            ++col;
        }
        if (col != 4) {
            std::cerr << "hypb: cones: expected 4 columns a,b,c,d in '" << line << "'\n";
            return kExitInput;
        }
    }
    if (entries.empty()) {
        std::cerr << "hypb: cones: no matrices in '" << cocycle_file << "'\n";
        return kExitInput;
    }

    hypb_cone_report* rep = nullptr;
    hypb_status st =
        hypb_cone_report_create(entries.data(), entries.size() / 4, epsilon, iterations, &rep);
    if (st != HYPB_OK) die(st, "cones");
    std::string text = hypb_cone_report_text(rep);
    hypb_cone_report_free(rep);

    if (out_file.empty() || out_file == "-") {
        std::cout << text;
        man.write("-", "ok", now_seconds() - t_start);
    } else {
        ensure_parent_dir(out_file);
        std::ofstream(out_file) << text;
        man.add_output(out_file);
        man.write(out_file + ".manifest", "ok", now_seconds() - t_start);
        std::cout << "wrote " << out_file << "\n";
    }
    return kExitOk;
}

int cmd_scenarios(const std::string& action, const std::string& name) {
    if (action == "list") {
        size_t n = hypb_scenario_count();
        for (size_t i = 0; i < n; ++i) {
            const char* nm = nullptr;
            const char* desc = nullptr;
            hypb_scenario_info(i, &nm, &desc);
            std::cout << nm << " - " << desc << "\n";
        }
        return kExitOk;
    }
    if (action == "show") {
        const char* def = nullptr;
        hypb_status st = hypb_scenario_definition(name.c_str(), &def);
        if (st != HYPB_OK) die(st, "scenarios show");
        std::cout << def;
        return kExitOk;
    }
    std::cerr << "hypb: scenarios: unknown action '" << action << "' (use list|show)\n";
    return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"billiard flows and hyperbolicity certification on flat and curved 2-tori"};
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker pool size (default: HYPB_JOBS or hardware)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate one billiard trajectory");
    std::string sim_table, sim_out;
    double sim_x0 = 0, sim_y0 = 0, sim_angle0 = 0, sim_duration = 10, sim_stride = 0.01;
    std::uint64_t sim_seed = 1;
    sim->add_option("--table", sim_table)->required();
    sim->add_option("--x0", sim_x0)->required();
    sim->add_option("--y0", sim_y0)->required();
    sim->add_option("--angle0", sim_angle0)->required();
    sim->add_option("--duration", sim_duration)->required();
    sim->add_option("--seed", sim_seed);
    sim->add_option("--stride", sim_stride, "dense output stride");
    sim->add_option("--out", sim_out, "output directory")->required();

    // riccati
    auto* ric = app.add_subcommand("riccati", "propagate the Riccati/Jacobi data");
    std::string ric_table, ric_out;
    double ric_x0 = 0, ric_y0 = 0, ric_angle0 = 0, ric_u0 = 0, ric_duration = 10,
           ric_stride = 0.01;
    ric->add_option("--table", ric_table)->required();
    ric->add_option("--x0", ric_x0)->required();
    ric->add_option("--y0", ric_y0)->required();
    ric->add_option("--angle0", ric_angle0)->required();
    ric->add_option("--u0", ric_u0);
    ric->add_option("--duration", ric_duration)->required();
    ric->add_option("--stride", ric_stride, "trace emission stride");
    ric->add_option("--out", ric_out, "output CSV file")->required();

    // lyapunov
    auto* lya = app.add_subcommand("lyapunov", "ensemble Lyapunov-exponent estimate");
    std::string lya_table, lya_out;
    int lya_ensemble = 100;
    double lya_duration = 1000;
    std::uint64_t lya_seed = 1;
    lya->add_option("--table", lya_table)->required();
    lya->add_option("--ensemble", lya_ensemble);
    lya->add_option("--duration", lya_duration);
    lya->add_option("--seed", lya_seed);
    lya->add_option("--out", lya_out, "report file (default stdout)");

    // certify
    auto* cer = app.add_subcommand("certify", "hyperbolicity certification");
    std::string cer_table, cer_mode = "thm3", cer_out;
    int cer_ensemble = 100;
    double cer_duration = 1000, cer_A = 2.0, cer_m = 0.01, cer_c = 0, cer_C = 0, cer_t0 = 0;
    std::uint64_t cer_seed = 1;
    int cer_pd = 720, cer_po = 50;
    double cer_pc = 50;
    cer->add_option("--table", cer_table)->required();
    cer->add_option("--mode", cer_mode, "thm3 | thm1 | thm4 | sinai")->required();
    cer->add_option("--ensemble", cer_ensemble);
    cer->add_option("--duration", cer_duration);
    cer->add_option("--A", cer_A);
    cer->add_option("--m", cer_m);
    cer->add_option("--c", cer_c);
    cer->add_option("--C", cer_C);
    cer->add_option("--t0", cer_t0, "thm1/thm4 window (default: duration)");
    cer->add_option("--seed", cer_seed);
    cer->add_option("--probe-directions", cer_pd);
    cer->add_option("--probe-origins", cer_po);
    cer->add_option("--probe-t-cap", cer_pc);
    cer->add_option("--out", cer_out, "certificate report file (default stdout)");

    // horizon
    auto* hor = app.add_subcommand("horizon", "hunt for collision-free corridors");
    std::string hor_table, hor_out;
    int hor_dirs = 3600, hor_origins = 100;
    double hor_cap = 50;
    std::uint64_t hor_seed = 1;
    hor->add_option("--table", hor_table)->required();
    hor->add_option("--directions", hor_dirs);
    hor->add_option("--origins", hor_origins);
    hor->add_option("--t-cap", hor_cap);
    hor->add_option("--seed", hor_seed);
    hor->add_option("--out", hor_out, "report file (default stdout)");

    // cones
    auto* con = app.add_subcommand("cones", "cone criterion on a stored cocycle");
    std::string con_file, con_out;
    double con_eps = 0.3;
    int con_iters = 40;
    con->add_option("--cocycle", con_file, "CSV with columns a,b,c,d")->required();
    con->add_option("--epsilon", con_eps)->required();
    con->add_option("--iterations", con_iters);
    con->add_option("--out", con_out, "report file (default stdout)");

    // scenarios
    auto* sce = app.add_subcommand("scenarios", "built-in scenario catalog");
    std::string sce_action = "list", sce_name;
    sce->add_option("action", sce_action, "list | show");
    sce->add_option("name", sce_name, "scenario name for show");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_table, sim_x0, sim_y0, sim_angle0, sim_duration, sim_seed,
                                sim_out, sim_stride);
        if (ric->parsed())
            return cmd_riccati(ric_table, ric_x0, ric_y0, ric_angle0, ric_u0, ric_duration,
                               ric_out, ric_stride);
        if (lya->parsed())
            return cmd_lyapunov(lya_table, lya_ensemble, lya_duration, lya_seed, jobs, lya_out);
        if (cer->parsed())
            return cmd_certify(cer_table, cer_mode, cer_ensemble, cer_duration, cer_A, cer_m,
                               cer_c, cer_C, cer_t0, cer_seed, jobs, cer_pd, cer_po, cer_pc,
                               cer_out);
        if (hor->parsed())
            return cmd_horizon(hor_table, hor_dirs, hor_origins, hor_cap, hor_seed, jobs, hor_out);
        if (con->parsed()) return cmd_cones(con_file, con_eps, con_iters, con_out);
        if (sce->parsed()) return cmd_scenarios(sce_action, sce_name);
    } catch (const std::exception& e) {
        std::cerr << "hypb: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInput;
}

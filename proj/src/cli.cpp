#include "skewlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "skewlab/entropy.hpp"
#include "skewlab/moran.hpp"
#include "skewlab/shadow.hpp"

namespace skewlab {

namespace {

struct CliState {
    RunConfig cfg;
    std::string out_dir = "out";
    std::string config_path;

    std::string artifact(const std::string& name) const {
        std::filesystem::create_directories(out_dir);
        return (std::filesystem::path(out_dir) / name).string();
    }
};

void set_param(CliState& st, const std::string& section, const std::string& key, double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    st.cfg.command[section][key] = s.str();
}

double get_d(const CliState& st, const std::string& sec, const std::string& key,
             const std::string& dflt) {
    return std::stod(st.cfg.command_param(sec, key, dflt));
}
long get_l(const CliState& st, const std::string& sec, const std::string& key,
           const std::string& dflt) {
    return std::stol(st.cfg.command_param(sec, key, dflt));
}
std::string get_s(const CliState& st, const std::string& sec, const std::string& key,
                  const std::string& dflt) {
    return st.cfg.command_param(sec, key, dflt);
}

Report base_report(const CliState& st, const std::string& command) {
    Report r;
    r.command = command;
    r.config_echo = st.cfg.flatten();
    return r;
}

void finish(Report& r, std::chrono::steady_clock::time_point t0) {
    r.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << r.to_json() << std::endl;
}

int cmd_simulate(CliState& st) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = base_report(st, "simulate");
    SkewSystem sys = st.cfg.make_system();
    NumericsContext ctx = st.cfg.make_context();
    long n = get_l(st, "simulate", "n", "100");
    TorusPoint x{get_d(st, "simulate", "x1", "0"), get_d(st, "simulate", "x2", "0")};
    Observable phi = Observable::parse(get_s(st, "simulate", "observable", "cos_x1"));

    std::vector<long> checkpoints;
    std::string cps = get_s(st, "simulate", "checkpoints", "");
    if (cps.empty()) {
        for (long c = 1; c < n; c *= 2) checkpoints.push_back(c);
        checkpoints.push_back(n);
    } else {
        std::istringstream in(cps);
        std::string tok;
        while (std::getline(in, tok, ',')) checkpoints.push_back(std::stol(tok));
    }

    BirkhoffTrace tr = birkhoff_trace(sys, 0, x, phi, checkpoints, ctx);
    TorusPoint fin = iterate(sys, 0, x, n, ctx);

    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < tr.times.size(); ++i)
        rows.push_back({double(tr.times[i]), tr.averages[i]});
    std::string csv = st.artifact("trace.csv");
    write_csv_atomic(csv, "n,average", rows);
    rep.artifacts.push_back(csv);
    rep.metrics["simulate.final_x1"] = fin.x1;
    rep.metrics["simulate.final_x2"] = fin.x2;
    rep.metrics["simulate.last_average"] = tr.averages.back();
    finish(rep, t0);
    return 0;
}

int cmd_entropy(CliState& st, bool deviation) {
    auto t0 = std::chrono::steady_clock::now();
    const std::string sec = deviation ? "deviation" : "entropy";
    Report rep = base_report(st, sec);
    SkewSystem sys = st.cfg.make_system();
    NumericsContext ctx = st.cfg.make_context();
    double eps = get_d(st, sec, "eps", "0.25");
    int nmin = int(get_l(st, sec, "nmin", "4"));
    int nmax = int(get_l(st, sec, "nmax", "10"));
    long grid = get_l(st, sec, "grid", "0"); // 0 = auto per depth
    double lam = sys.expansion();

    Observable phi = Observable::cos_x1();
    double alpha = 0.0, delta = 0.0;
    if (deviation) {
        alpha = get_d(st, sec, "alpha", "0");
        delta = get_d(st, sec, "delta", "0.3");
    }

    // A fixed grid caps the feasible depth; auto mode refines per depth.
    int nmax_eff = nmax;
    if (grid > 0) {
        while (nmax_eff >= nmin &&
               double(grid) < 2.0 * std::pow(lam, double(nmax_eff - 1)) / eps)
            --nmax_eff;
        if (nmax_eff < nmin)
            throw GridTooCoarse("grid " + std::to_string(grid) + " cannot honestly resolve depth " +
                                std::to_string(nmin));
        if (nmax_eff != nmax)
            std::cerr << "grid " << grid << " caps depth at n = " << nmax_eff << "\n";
    }

    std::vector<long> ns;
    std::vector<double> log_counts;
    std::vector<std::vector<double>> rows;
    for (int n = nmin; n <= nmax_eff; ++n) {
        long G = grid > 0 ? grid : auto_grid_cells(eps, n, lam);
        SeparatedSet set;
        if (deviation) {
            DeviationQuery q{alpha, delta, n, eps, 0};
            set = deviation_count(sys, q, phi, G, ctx);
        } else {
            set = max_separated(sys, 0, n, eps, G, ctx);
        }
        if (set.cardinality() == 0) continue;
        ns.push_back(n);
        log_counts.push_back(std::log(double(set.cardinality())));
        rows.push_back({double(n), double(set.cardinality()), log_counts.back()});
    }
    std::string csv = st.artifact(sec + "_counts.csv");
    write_csv_atomic(csv, "n,count,log_count", rows);
    rep.artifacts.push_back(csv);

    RateFit fit = entropy_rate(ns, log_counts);
    rep.metrics[sec + ".slope"] = fit.slope;
    rep.metrics[sec + ".stderr"] = fit.stderr_slope;
    rep.metrics[sec + ".nmax"] = nmax_eff;
    nlohmann::json j;
    j["ns"] = fit.ns;
    j["log_counts"] = fit.log_counts;
    j["slope"] = fit.slope;
    j["stderr"] = fit.stderr_slope;
    if (deviation) {
        j["alpha"] = alpha;
        j["delta"] = delta;
    }
    std::string fitpath = st.artifact(sec + "_fit.json");
    write_file_atomic(fitpath, j.dump(2));
    rep.artifacts.push_back(fitpath);
    finish(rep, t0);
    return 0;
}

int cmd_shadow(CliState& st) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = base_report(st, "shadow");
    SkewSystem sys = st.cfg.make_system();
    double eps = get_d(st, "shadow", "eps", "0.05");
    double clat = get_d(st, "shadow", "clat", "4");
    std::string spec_path = get_s(st, "shadow", "spec", "");
    if (spec_path.empty()) throw ConfigInvalid("shadow needs spec = <file.json>");
    std::ifstream in(spec_path);
    if (!in) throw ConfigInvalid("cannot read spec file " + spec_path);
    std::stringstream ss;
    ss << in.rdbuf();
    Specification spec = Specification::from_json(ss.str());

    NumericsContext ctx = st.cfg.make_context();
    if (!ctx.is_big())
        ctx = NumericsContext::for_depth(spec.last_time(), sys.expansion());
    SolveResult sol = solve_specification(sys, spec, eps, ctx, clat);
    VerifyResult ver = verify_shadowing_big(sys, spec, sol.x, eps, ctx);

    nlohmann::json j;
    j["x"] = {sol.x_double.x1, sol.x_double.x2};
    j["x1"] = sol.x.x1.to_decimal();
    j["x2"] = sol.x.x2.to_decimal();
    j["max_deviation"] = sol.max_deviation;
    j["block_deviation"] = sol.block_deviation;
    j["glue_sigma"] = sol.glue_sigma;
    j["glue_r"] = sol.glue_r;
    j["gap_budget"] = sol.gap_budget;
    j["verified"] = ver.ok;
    std::string path = st.artifact("shadow_result.json");
    write_file_atomic(path, j.dump(2));
    rep.artifacts.push_back(path);
    rep.metrics["shadow.max_deviation"] = sol.max_deviation;
    rep.metrics["shadow.verified"] = ver.ok ? 1.0 : 0.0;
    rep.metrics["shadow.heal_retries"] = sol.heal_retries;
    finish(rep, t0);
    return 0;
}

int cmd_irregular(CliState& st) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = base_report(st, "irregular");
    SkewSystem sys = st.cfg.make_system();
    const HyperbolicMatrix& H = sys.affine_family().matrix;
    double alpha0 = get_d(st, "irregular", "alpha0", "0");
    double alpha1 = get_d(st, "irregular", "alpha1", "1");
    int K = int(get_l(st, "irregular", "levels", "4"));
    double eta = get_d(st, "irregular", "eta", "0.2");
    double tol_target = get_d(st, "irregular", "tol_target", "0.09");
    Observable phi = Observable::parse(get_s(st, "irregular", "observable", "cos_x1"));

    MoranOptions opts;
    opts.mantissa_cap = get_l(st, "irregular", "mantissa_cap", "524288");
    opts.strict_paper_lengths = get_s(st, "irregular", "strict_lengths", "0") == "1";
    opts.delta1 = get_d(st, "irregular", "delta1", "0.01");
    double growth = get_d(st, "irregular", "growth", "0");

    MoranSchedule sched =
        growth > 0 ? build_schedule(eta, K, H, growth, opts)
                   : schedule_for_tolerance(H, phi, alpha0, alpha1, eta, K, tol_target, opts);
    NumericsContext ctx = NumericsContext::bigfloat(sched.mantissa_required(H.lambda_u));
    long anchor_grid = get_l(st, "irregular", "anchor_grid", "96");

    IrregularCertificate cert =
        construct_irregular_checked(sys, phi, alpha0, alpha1, sched, ctx, anchor_grid);

    std::string certpath = st.artifact("irregular_certificate.json");
    write_file_atomic(certpath, cert.to_json());
    rep.artifacts.push_back(certpath);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < cert.times.size(); ++i)
        rows.push_back({double(cert.times[i]), cert.averages[i]});
    std::string csv = st.artifact("irregular_trace.csv");
    write_csv_atomic(csv, "n,average", rows);
    rep.artifacts.push_back(csv);

    double max_dev = 0, min_diff = 2;
    for (double d : cert.deviations) max_dev = std::max(max_dev, d);
    for (size_t i = 0; i + 1 < cert.averages.size(); ++i)
        min_diff = std::min(min_diff, std::fabs(cert.averages[i + 1] - cert.averages[i]));
    rep.metrics["irregular.max_deviation"] = max_dev;
    rep.metrics["irregular.min_consecutive_diff"] = min_diff;
    rep.metrics["irregular.depth"] = double(sched.total_depth());
    rep.metrics["irregular.mantissa_bits"] = double(ctx.mantissa_bits);
    finish(rep, t0);
    return 0;
}

int cmd_dense(CliState& st) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = base_report(st, "dense-variant");
    SkewSystem sys = st.cfg.make_system();
    double eps = get_d(st, "dense-variant", "eps", "0.05");
    int K = int(get_l(st, "dense-variant", "levels", "3"));
    TorusPoint x{get_d(st, "dense-variant", "x1", "0.2"), get_d(st, "dense-variant", "x2", "0.7")};
    TorusPoint target{get_d(st, "dense-variant", "target1", "0.9"),
                      get_d(st, "dense-variant", "target2", "0.1")};
    Observable phi = Observable::parse(get_s(st, "dense-variant", "observable", "cos_x1"));

    DenseVariantResult r = construct_dense_variant(sys, 0, x, target, eps, K, phi, nullptr);

    nlohmann::json j;
    j["z"] = {r.z.x1, r.z.x2};
    j["z1"] = r.z1_decimal;
    j["z2"] = r.z2_decimal;
    j["target_distance"] = r.target_distance;
    j["average_difference"] = r.average_difference;
    j["ledger_bound"] = r.ledger_bound;
    j["gaps"] = r.gaps;
    j["blocks"] = r.blocks;
    j["l"] = r.l;
    j["certified"] = r.certified;
    std::string path = st.artifact("dense_variant.json");
    write_file_atomic(path, j.dump(2));
    rep.artifacts.push_back(path);
    rep.metrics["dense.target_distance"] = r.target_distance;
    rep.metrics["dense.average_difference"] = r.average_difference;
    rep.metrics["dense.ledger_bound"] = r.ledger_bound;
    if (!r.certified) {
        rep.error = "OscillationNotCertified";
        finish(rep, t0);
        return error_exit_code(rep.error);
    }
    finish(rep, t0);
    return 0;
}

int cmd_lyapunov(CliState& st) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = base_report(st, "lyapunov");
    long n = get_l(st, "lyapunov", "n", "10000");
    bool control = get_s(st, "lyapunov", "control", "1") == "1";

    SkewSystem sys = st.cfg.make_cocycle_system();
    std::vector<std::vector<double>> rows;
    for (long k = 10; k <= n; k *= 10) {
        double lam = lyapunov_exponent(sys, 0, k);
        rows.push_back({double(k), lam});
    }
    double lam_n = lyapunov_exponent(sys, 0, n);
    rep.metrics["lyapunov.estimate"] = lam_n;
    if (control) {
        const auto& fam = sys.cocycle_family();
        std::vector<uint8_t> word(size_t(n), 0);
        rep.metrics["lyapunov.control_constant_word"] = lyapunov_exponent(fam, word, n);
        rep.metrics["lyapunov.control_exact"] =
            eigen_split(fam.matrices[0]).expansion_log();
    }
    std::string csv = st.artifact("lyapunov.csv");
    write_csv_atomic(csv, "n,estimate", rows);
    rep.artifacts.push_back(csv);
    finish(rep, t0);
    return 0;
}

} // namespace

int error_exit_code(const std::string& code) {
    static const std::map<std::string, int> codes = {
        {"ConfigInvalid", 2},        {"DegenerateParameter", 3},
        {"NonHyperbolicMatrix", 4},  {"InsufficientWord", 5},
        {"PrecisionExhausted", 6},   {"GapTooSmall", 7},
        {"LatticeSearchFailed", 8},  {"InvalidSpecification", 9},
        {"GridTooCoarse", 10},       {"DegenerateFit", 11},
        {"ScheduleInfeasible", 12},  {"EmptyDeviationSet", 13},
        {"OscillationNotCertified", 14},
    };
    auto it = codes.find(code);
    return it == codes.end() ? 1 : it->second;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"skewlab: skew-product dynamics laboratory"};
    app.require_subcommand(1);

    CliState st;
    app.add_option("--config", st.config_path, "sectioned key=value config file");
    app.add_option("--out", st.out_dir, "artifact directory");

    struct Flag {
        std::string section, key, value;
    };
    std::vector<Flag> flags;
    auto opt = [&](CLI::App* sub, const std::string& section, const std::string& key,
                   const std::string& help) {
        auto cb = [&flags, section, key](const std::string& v) {
            flags.push_back({section, key, v});
        };
        sub->add_option_function<std::string>("--" + key, cb, help);
    };

    auto* sim = app.add_subcommand("simulate", "iterate an orbit and trace Birkhoff averages");
    for (const char* k : {"x1", "x2", "n", "observable", "checkpoints"})
        opt(sim, "simulate", k, "");
    auto* ent = app.add_subcommand("entropy", "separated-set entropy slope");
    for (const char* k : {"eps", "nmin", "nmax", "grid"}) opt(ent, "entropy", k, "");
    auto* dev = app.add_subcommand("deviation", "deviation-set growth slope");
    for (const char* k : {"alpha", "delta", "eps", "nmin", "nmax", "grid"})
        opt(dev, "deviation", k, "");
    auto* sha = app.add_subcommand("shadow", "solve and verify a specification");
    for (const char* k : {"spec", "eps", "clat"}) opt(sha, "shadow", k, "");
    auto* irr = app.add_subcommand("irregular", "construct an oscillation certificate");
    for (const char* k : {"alpha0", "alpha1", "levels", "eta", "observable", "tol_target",
                          "growth", "mantissa_cap", "anchor_grid", "strict_lengths", "delta1"})
        opt(irr, "irregular", k, "");
    auto* den = app.add_subcommand("dense-variant", "average-tracking point near a target");
    for (const char* k : {"x1", "x2", "target1", "target2", "eps", "levels", "observable"})
        opt(den, "dense-variant", k, "");
    auto* lya = app.add_subcommand("lyapunov", "cocycle Lyapunov exponent");
    for (const char* k : {"n", "control"}) opt(lya, "lyapunov", k, "");

    // System/numerics overrides available on every subcommand.
    std::map<std::string, std::string> sys_over;
    for (CLI::App* sub : {sim, ent, dev, sha, irr, den, lya}) {
        for (const char* k : {"driver", "rotation-alpha", "omega0", "matrix", "offset",
                              "matrices", "mode", "mantissa-bits", "seed"}) {
            std::string key = k;
            sub->add_option_function<std::string>(
                "--" + key, [&sys_over, key](const std::string& v) { sys_over[key] = v; }, "");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (!st.config_path.empty()) st.cfg = RunConfig::load(st.config_path);
        for (const auto& f : flags) st.cfg.command[f.section][f.key] = f.value;
        auto ov = [&](const char* k, std::string& field) {
            if (sys_over.count(k)) field = sys_over[k];
        };
        ov("driver", st.cfg.driver);
        ov("rotation-alpha", st.cfg.alpha);
        ov("omega0", st.cfg.omega0);
        ov("matrix", st.cfg.matrix);
        ov("offset", st.cfg.h);
        ov("matrices", st.cfg.matrices);
        ov("mode", st.cfg.mode);
        if (sys_over.count("mantissa-bits"))
            st.cfg.mantissa_bits = std::stol(sys_over["mantissa-bits"]);
        if (sys_over.count("seed")) st.cfg.seed = std::stoul(sys_over["seed"]);

        if (sim->parsed()) return cmd_simulate(st);
        if (ent->parsed()) return cmd_entropy(st, false);
        if (dev->parsed()) return cmd_entropy(st, true);
        if (sha->parsed()) return cmd_shadow(st);
        if (irr->parsed()) return cmd_irregular(st);
        if (den->parsed()) return cmd_dense(st);
        if (lya->parsed()) return cmd_lyapunov(st);
        return 1;
    } catch (const Error& e) {
        Report rep;
        rep.command = app.get_subcommands().empty() ? "" : app.get_subcommands()[0]->get_name();
        rep.config_echo = st.cfg.flatten();
        rep.error = e.code();
        rep.metrics["error.message_length"] = double(std::string(e.what()).size());
        std::cout << rep.to_json() << std::endl;
        std::cerr << e.code() << ": " << e.what() << "\n";
        return error_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace skewlab

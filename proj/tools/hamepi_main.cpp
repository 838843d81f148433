// hamepi command-line front end: JSON configs in, CSV trajectories and JSON
// reports out. Exit codes: 0 success, 2 validation error, 3 runtime domain
// error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "hamepi/biham.hpp"
#include "hamepi/json_io.hpp"
#include "hamepi/sampling.hpp"
#include "hamepi/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hamepi;

namespace {

int log_level() {
    static int level = [] {
        const char* env = std::getenv("HAMEPI_LOG");
        if (!env) return 1;
        std::string v(env);
        if (v == "off") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[hamepi] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[hamepi:debug] " << msg << "\n";
}

struct Options {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    int points = 500;
    double tol = 1e-10;
    bool tol_set = false;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config '" + path + "': " + e.what());
    }
    return j;
}

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << fmt17(row[i]);
        out << "\n";
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

json model_spec(const json& config) {
    const auto it = config.find("model");
    if (it == config.end()) throw ValidationError("config: missing field 'model'");
    if (it->is_string()) return load_config(it->get<std::string>());
    return *it;
}

std::vector<double> initial_state(const json& config, std::size_t dim) {
    const auto it = config.find("initial");
    if (it == config.end()) throw ValidationError("config: missing field 'initial'");
    if (!it->is_array() || it->size() != dim)
        throw ValidationError("config.initial: expected an array of " +
                              std::to_string(dim) + " numbers");
    std::vector<double> y;
    for (const auto& v : *it) y.push_back(v.get<double>());
    return y;
}

DomainPolicy domain_policy(const json& config) {
    std::string p = config.value("domain_policy", std::string("truncate"));
    if (p == "truncate") return DomainPolicy::Truncate;
    if (p == "flag") return DomainPolicy::Flag;
    throw ValidationError("config.domain_policy: expected 'truncate' or 'flag'");
}

int cmd_simulate(const Options& opt) {
    json config = load_config(opt.config);
    CompartmentalModel model = model_from_json(model_spec(config));
    HamiltonianSystem hs = canonical_poisson(model);
    const auto& vars = hs.structure().variables();
    std::vector<double> y0 = initial_state(config, vars.size());
    double t_end = config.value("t_end", 100.0);
    if (!(t_end > 0.0)) throw ValidationError("config.t_end: must be positive");

    IntegrateOptions iopt;
    iopt.domain = domain_policy(config);
    Trajectory traj;
    if (config.contains("dt")) {
        double dt = config["dt"].get<double>();
        if (!(dt > 0.0)) throw ValidationError("config.dt: must be positive");
        log_debug("rk4 dt=" + std::to_string(dt));
        traj = integrate_rk4(make_rhs(hs), y0, t_end, dt, iopt);
    } else {
        double rtol = config.value("rtol", 1e-8);
        double atol = config.value("atol", 1e-10);
        if (!(rtol > 0.0)) throw ValidationError("config.rtol: must be positive");
        if (!(atol > 0.0)) throw ValidationError("config.atol: must be positive");
        log_debug("adaptive rtol=" + std::to_string(rtol));
        traj = integrate_adaptive(make_rhs(hs), y0, t_end, rtol, atol, iopt);
    }

    Expr casimir;
    bool has_casimir = config.contains("casimir");
    if (has_casimir) {
        std::set<std::string> varset(vars.begin(), vars.end());
        casimir = Expr::parse(config["casimir"].get<std::string>(), varset);
    }

    std::vector<std::string> header{"t"};
    header.insert(header.end(), vars.begin(), vars.end());
    header.push_back("H");
    if (has_casimir) header.push_back("C");

    CompiledExpr h = hs.hamiltonian().compile(vars, hs.params());
    CompiledExpr c = has_casimir ? casimir.compile(vars, hs.params())
                                 : Expr::constant(0.0).compile(vars, hs.params());
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        std::vector<double> row{traj.times[k]};
        row.insert(row.end(), traj.states[k].begin(), traj.states[k].end());
        row.push_back(h(traj.states[k]));
        if (has_casimir) row.push_back(c(traj.states[k]));
        rows.push_back(std::move(row));
    }
    write_csv(fs::path(opt.out) / "trajectory.csv", header, rows);

    DriftReport rep = diagnostics(traj, hs.hamiltonian(), vars, hs.params(),
                                  has_casimir ? &casimir : nullptr);
    json diag{{"h_drift", rep.h_drift},
              {"casimir_drift", has_casimir ? json(rep.c_drift) : json()},
              {"domain_exit", traj.domain_exit}};
    if (traj.domain_exit) diag["domain_exit_time"] = traj.domain_exit_time;
    write_json(fs::path(opt.out) / "diagnostics.json", diag);
    log_info("simulate: " + std::to_string(traj.times.size()) + " samples, h_drift=" +
             fmt17(rep.h_drift));
    return 0;
}

int cmd_exact(const Options& opt) {
    json config = load_config(opt.config);
    std::string kind = config.value("kind", std::string());
    Params p;
    if (config.contains("params"))
        for (auto it = config["params"].begin(); it != config["params"].end(); ++it)
            p[it.key()] = it.value().get<double>();
    auto need = [&](const char* key) {
        auto it = p.find(key);
        if (it == p.end())
            throw ValidationError(std::string("config.params: missing '") + key + "'");
        return it->second;
    };
    double s0 = config.value("s0", 0.99);
    double t_end = config.value("t_end", 60.0);
    int samples = config.value("samples", 121);
    if (samples < 2) throw ValidationError("config.samples: need at least 2");

    ExactSolution ex = [&] {
        if (kind == "sirs") return exact_sirs(need("alpha"), need("beta"), need("mu"), s0);
        if (kind == "vacc_i") return exact_vacc_i(need("alpha"), need("beta"), need("v"), s0);
        if (kind == "vacc_s") return exact_vacc_s(need("alpha"), need("beta"), need("v"), s0);
        if (kind == "sir") return exact_sir(need("alpha"), need("beta"), s0);
        throw ValidationError("exact solution not available for kind '" + kind + "'");
    }();
    CompartmentalModel model = [&] {
        if (kind == "sirs") return models::sirs_endemic(need("alpha"), need("beta"), need("mu"));
        if (kind == "vacc_i") return models::sir_vacc_i(need("alpha"), need("beta"), need("v"));
        if (kind == "vacc_s") return models::sir_vacc_s(need("alpha"), need("beta"), need("v"));
        return models::sir(need("alpha"), need("beta"));
    }();

    std::vector<double> times;
    for (int i = 0; i < samples; ++i)
        times.push_back(t_end * static_cast<double>(i) / (samples - 1));

    HamiltonianSystem hs = canonical_poisson(model);
    IntegrateOptions iopt;
    iopt.domain = DomainPolicy::Flag; // compare past any S=0 crossing
    iopt.sample_times = times;
    Trajectory num = integrate_adaptive(make_rhs(hs), {s0, 1.0 - s0, 0.0}, t_end,
                                        1e-10, 1e-12, iopt);

    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        auto e = ex(times[k]);
        const auto& n = num.states[k];
        double diff = 0.0;
        for (int j = 0; j < 3; ++j)
            diff = std::max(diff, std::fabs(e[static_cast<std::size_t>(j)] - n[static_cast<std::size_t>(j)]));
        worst = std::max(worst, diff);
        rows.push_back({times[k], e[0], e[1], e[2], n[0], n[1], n[2], diff});
    }
    write_csv(fs::path(opt.out) / "exact.csv",
              {"t", "S_exact", "I_exact", "R_exact", "S_num", "I_num", "R_num",
               "max_abs_diff"},
              rows);
    write_json(fs::path(opt.out) / "exact_summary.json",
               json{{"kind", kind},
                    {"max_abs_diff", worst},
                    {"horizon", ex.horizon()},
                    {"s_infinity", ex.s_infinity()}});
    log_info("exact: max_abs_diff=" + fmt17(worst));
    return 0;
}

int cmd_verify(const Options& opt) {
    json config = load_config(opt.config);
    auto rng = make_rng(opt.seed);
    json checks = json::array();
    bool all_pass = true;
    auto add = [&](const std::string& name, double defect, double tol) {
        bool pass = defect <= tol;
        all_pass = all_pass && pass;
        checks.push_back({{"name", name}, {"max_defect", defect}, {"tol", tol},
                          {"pass", pass}});
        log_debug(name + ": " + fmt17(defect));
    };

    if (config.contains("poisson")) {
        PoissonStructure ps = poisson_from_json(config["poisson"]);
        Params params;
        if (config.contains("params"))
            for (auto it = config["params"].begin(); it != config["params"].end(); ++it)
                params[it.key()] = it.value().get<double>();
        auto pts = box_points(ps.dim(), opt.points, rng);
        add("jacobi", max_jacobi_residual(ps, params, pts), opt.tol);
    } else if (config.contains("coupling")) {
        InteractingSystem sys = coupling_from_json(config["coupling"]);
        auto pts = box_points(sys.system().structure().dim(), opt.points, rng);
        add("jacobi", max_jacobi_residual(sys.system().structure(),
                                          sys.system().params(), pts),
            opt.tol);
    } else {
        CompartmentalModel model = model_from_json(model_spec(config));
        HamiltonianSystem hs = canonical_poisson(model);
        OdeSystem ode = to_ode(model);
        const int dim = hs.structure().dim();

        auto box = box_points(dim, opt.points, rng);
        add("jacobi", max_jacobi_residual(hs.structure(), hs.params(), box), opt.tol);

        auto simplex = simplex_points(dim, opt.points, rng);
        auto field = hs.compile_field();
        auto rhs = ode.compile();
        double mismatch = 0.0;
        for (const auto& pt : simplex)
            for (std::size_t i = 0; i < field.size(); ++i)
                mismatch = std::max(mismatch, std::fabs(field[i](pt) - rhs[i](pt)));
        add("hamilton_vs_ode", mismatch, std::min(opt.tol, 1e-12));

        if (config.contains("pair_kind")) {
            std::string kind = config["pair_kind"].get<std::string>();
            auto needp = [&](const char* key) {
                auto it = model.params().find(key);
                if (it == model.params().end())
                    throw ValidationError(std::string("model params: missing '") + key + "'");
                return it->second;
            };
            BiHamiltonianPair pair = [&] {
                if (kind == "sirs")
                    return sirs_pair(needp("alpha"), needp("beta"), needp("mu"));
                if (kind == "vacc_i")
                    return vacc_i_pair(needp("alpha"), needp("beta"), needp("v"));
                if (kind == "vacc_s")
                    return vacc_s_pair(needp("alpha"), needp("beta"), needp("v"));
                throw ValidationError("unknown pair_kind '" + kind + "'");
            }();
            StructureId sid = kind == "sirs" ? StructureId::Sirs
                              : kind == "vacc_i" ? StructureId::VaccI
                                                 : StructureId::VaccS;
            add("pair_field_mismatch", pair.max_field_mismatch(box), opt.tol);
            add("pair_compatibility", pair.compatible(box, opt.tol).max_defect, opt.tol);
            Expr cas = casimir_of(sid, 0.5);
            add("casimir_defect",
                is_casimir(pair.first().structure(), cas, box, opt.tol, hs.params())
                    .max_defect,
                opt.tol);
            add("h1_casimir_of_second",
                is_casimir(pair.second().structure(), pair.first().hamiltonian(), box,
                           opt.tol, hs.params())
                    .max_defect,
                opt.tol);
        }
    }

    json report{{"pass", all_pass}, {"points", opt.points}, {"seed", opt.seed},
                {"checks", checks}};
    write_json(fs::path(opt.out) / "verify.json", report);
    std::cout << (all_pass ? "PASS" : "FAIL") << "\n";
    return 0;
}

int cmd_couple(const Options& opt) {
    json config = load_config(opt.config);
    if (!config.contains("coupling"))
        throw ValidationError("config: missing field 'coupling'");
    InteractingSystem sys = coupling_from_json(config["coupling"]);
    const auto& vars = sys.variables();
    std::vector<double> y0 = initial_state(config, vars.size());
    double t_end = config.value("t_end", 100.0);
    double dt = config.value("dt", 0.01);
    if (!(dt > 0.0)) throw ValidationError("config.dt: must be positive");

    IntegrateOptions iopt;
    iopt.domain = domain_policy(config);
    Trajectory traj = integrate_rk4(make_rhs(sys), y0, t_end, dt, iopt);

    const int n_pop = sys.populations();
    const int m = sys.compartments_per_population();
    for (int a = 0; a < n_pop; ++a) {
        std::vector<std::string> header{"t"};
        for (int mu = 0; mu < m; ++mu)
            header.push_back(vars[static_cast<std::size_t>(a * m + mu)]);
        header.push_back("N_" + std::to_string(a + 1));
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            std::vector<double> row{traj.times[k]};
            double total = 0.0;
            for (int mu = 0; mu < m; ++mu) {
                double v = traj.states[k][static_cast<std::size_t>(a * m + mu)];
                row.push_back(v);
                total += v;
            }
            row.push_back(total);
            rows.push_back(std::move(row));
        }
        write_csv(fs::path(opt.out) / ("population_" + std::to_string(a + 1) + ".csv"),
                  header, rows);
    }

    std::vector<std::string> theader{"t"};
    for (int a = 0; a < n_pop; ++a) theader.push_back("N_" + std::to_string(a + 1));
    theader.push_back("N_total");
    std::vector<std::vector<double>> trows;
    double grand0 = 0.0, drift = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        auto totals = sys.population_totals(traj.states[k]);
        std::vector<double> row{traj.times[k]};
        double grand = 0.0;
        for (double v : totals) {
            row.push_back(v);
            grand += v;
        }
        row.push_back(grand);
        if (k == 0) grand0 = grand;
        drift = std::max(drift, std::fabs(grand - grand0));
        trows.push_back(std::move(row));
    }
    write_csv(fs::path(opt.out) / "totals.csv", theader, trows);

    double audit_tol = opt.tol_set ? opt.tol : 1e-9;
    write_json(fs::path(opt.out) / "couple.json",
               json{{"grand_total_drift", drift}, {"tol", audit_tol},
                    {"pass", drift <= audit_tol},
                    {"domain_exit", traj.domain_exit}});
    if (drift > audit_tol)
        throw DomainError("grand total population drifted by " + fmt17(drift));
    log_info("couple: grand_total_drift=" + fmt17(drift));
    return 0;
}

int cmd_sweep(const Options& opt) {
    json config = load_config(opt.config);
    json base_model = model_spec(config);
    const json& grid = config.contains("grid") ? config["grid"] : json::array();
    if (!grid.is_array() || grid.empty())
        throw ValidationError("config.grid: expected a non-empty array");
    double t_end = config.value("t_end", 100.0);
    double dt = config.value("dt", 0.01);

    std::set<std::string> seen;
    json results = json::array();
    for (const auto& point : grid) {
        std::string key = point.dump();
        if (!seen.insert(key).second) {
            log_info("sweep: skipping duplicate grid point " + key);
            continue;
        }
        json spec = base_model;
        for (auto it = point.begin(); it != point.end(); ++it)
            spec["params"][it.key()] = it.value();
        CompartmentalModel model = model_from_json(spec);
        HamiltonianSystem hs = canonical_poisson(model);
        const auto& vars = hs.structure().variables();
        std::vector<double> y0 = initial_state(config, vars.size());

        Trajectory traj = integrate_rk4(make_rhs(hs), y0, t_end, dt);
        DriftReport rep = diagnostics(traj, hs.hamiltonian(), vars, hs.params());

        std::size_t i_col = 1;
        std::size_t s_col = 0;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] == "I") i_col = i;
            if (vars[i] == "S") s_col = i;
        }
        double peak = 0.0, peak_time = 0.0;
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            if (traj.states[k][i_col] > peak) {
                peak = traj.states[k][i_col];
                peak_time = traj.times[k];
            }
        }
        results.push_back({{"params", point},
                           {"peak_infection", peak},
                           {"peak_time", peak_time},
                           {"final_s", traj.states.back()[s_col]},
                           {"h_drift", rep.h_drift},
                           {"domain_exit", traj.domain_exit}});
    }
    write_json(fs::path(opt.out) / "sweep.json", results);
    log_info("sweep: " + std::to_string(results.size()) + " grid points");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamiltonian structure toolkit for compartmental epidemic models"};
    app.require_subcommand(1);

    Options opt;
    std::string command;
    for (const char* name : {"simulate", "exact", "verify", "couple", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "JSON config file")->required();
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "RNG seed for sample points");
        sub->add_option("--points", opt.points, "number of sample points");
        sub->add_option("--tol", opt.tol, "tolerance for checks");
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }
    opt.tol_set = app.get_subcommand(command)->count("--tol") > 0;

    try {
        fs::create_directories(opt.out);
        if (command == "simulate") return cmd_simulate(opt);
        if (command == "exact") return cmd_exact(opt);
        if (command == "verify") return cmd_verify(opt);
        if (command == "couple") return cmd_couple(opt);
        if (command == "sweep") return cmd_sweep(opt);
        std::cerr << "unknown command\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnboundNameError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

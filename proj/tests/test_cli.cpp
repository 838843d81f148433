#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("HAMEPI_CLI");
    REQUIRE_MESSAGE(p != nullptr, "HAMEPI_CLI must point at the built binary");
    return p;
}

// Returns the exit code; stdout goes to out_dir/stdout.txt.
int run_cli(const std::string& args, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::string cmd = "HAMEPI_LOG=off " + cli_path() + " " + args + " > " +
                      (out_dir / "stdout.txt").string() + " 2> " +
                      (out_dir / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return (rc >> 8) & 0xff;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("hamepi_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const json& j) {
    fs::path p = dir / "config.json";
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parses a CSV produced by the tool: header row then numeric rows.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        REQUIRE_MESSAGE(false, ("missing column " + name));
        return 0;
    }
};

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Csv csv;
    std::string line;
    REQUIRE(std::getline(in, line));
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) csv.header.push_back(field);
    while (std::getline(in, line)) {
        std::istringstream rs(line);
        std::vector<double> row;
        while (std::getline(rs, field, ',')) row.push_back(std::stod(field));
        REQUIRE(row.size() == csv.header.size());
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

json sir_model() {
    return json{{"compartments", {"S", "I", "R"}},
                {"params", {{"alpha", 0.1}, {"beta", 1.0}}},
                {"flows",
                 {{{"from", "S"}, {"to", "I"}, {"rate", "beta*S*I"}},
                  {{"from", "I"}, {"to", "R"}, {"rate", "alpha*I"}}}}};
}

json fig9_coupling(const std::string& extra_orientation = "") {
    json pops = json::array({sir_model(), sir_model(), sir_model()});
    json transfers = json::array();
    for (int a = 1; a <= 3; ++a)
        for (int b = a + 1; b <= 3; ++b) {
            std::string sa = "_" + std::to_string(a), sb = "_" + std::to_string(b);
            transfers.push_back({{"a", a}, {"b", b},
                                 {"rate", "kappa*(S" + sa + "+S" + sb + "+I" + sa +
                                              "-I" + sb + ")"}});
        }
    if (!extra_orientation.empty())
        transfers.push_back({{"a", 2}, {"b", 1}, {"rate", extra_orientation}});
    return json{{"populations", pops},
                {"transfers", transfers},
                {"params", {{"kappa", 0.1}}}};
}

} // namespace

TEST_CASE("simulate produces a conservative epidemic curve") {
    fs::path dir = fresh_dir("simulate");
    fs::path cfg = write_config(dir, json{{"model", sir_model()},
                                          {"initial", {0.99, 0.01, 0.0}},
                                          {"t_end", 100.0},
                                          {"dt", 0.01},
                                          {"casimir", "S+I-0.1*log(S)"}});
    int rc = run_cli("simulate --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(rc == 0);

    Csv traj = read_csv(dir / "trajectory.csv");
    CHECK(traj.header == std::vector<std::string>{"t", "S", "I", "R", "H", "C"});
    std::size_t ic = traj.col("I");
    int peaks = 0;
    for (std::size_t k = 1; k + 1 < traj.rows.size(); ++k)
        if (traj.rows[k][ic] > traj.rows[k - 1][ic] &&
            traj.rows[k][ic] > traj.rows[k + 1][ic])
            ++peaks;
    CHECK(peaks == 1);
    CHECK(traj.rows.back()[ic] < 1e-3);

    json diag = json::parse(slurp(dir / "diagnostics.json"));
    CHECK(diag["h_drift"].get<double>() <= 1e-9);
    CHECK_FALSE(diag["domain_exit"].get<bool>());
}

TEST_CASE("simulate rejects a non-positive step") {
    fs::path dir = fresh_dir("simulate_bad_dt");
    fs::path cfg = write_config(dir, json{{"model", sir_model()},
                                          {"initial", {0.99, 0.01, 0.0}},
                                          {"dt", -1.0}});
    int rc = run_cli("simulate --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(rc == 2);
    CHECK(slurp(dir / "stderr.txt").find("dt") != std::string::npos);
}

TEST_CASE("exact rejects kinds without a closed form") {
    fs::path dir = fresh_dir("exact_bad_kind");
    fs::path cfg = write_config(
        dir, json{{"kind", "seir"},
                  {"params", {{"alpha", 0.1}, {"beta", 1.0}, {"eps", 0.2}}}});
    CHECK(run_cli("exact --config " + cfg.string() + " --out " + dir.string(), dir) == 2);
}

TEST_CASE("exact cross-checks against the integrator") {
    fs::path dir = fresh_dir("exact_sirs");
    fs::path cfg = write_config(
        dir, json{{"kind", "sirs"},
                  {"params", {{"alpha", 0.1}, {"beta", 1.0}, {"mu", 0.1}}},
                  {"s0", 0.99},
                  {"t_end", 20.0},
                  {"samples", 21}});
    CHECK(run_cli("exact --config " + cfg.string() + " --out " + dir.string(), dir) == 0);
    json summary = json::parse(slurp(dir / "exact_summary.json"));
    CHECK(summary["max_abs_diff"].get<double>() <= 1e-6);
    Csv csv = read_csv(dir / "exact.csv");
    CHECK(csv.rows.size() == 21);
    CHECK(csv.rows.front()[csv.col("S_exact")] == 0.99);
}

TEST_CASE("verify passes a valid model and fails a corrupted structure") {
    fs::path dir = fresh_dir("verify_model");
    fs::path cfg = write_config(dir, json{{"model", sir_model()},
                                          {"pair_kind", "sirs"}});
    // sirs pair needs mu in the model params.
    json with_mu = json::parse(slurp(cfg));
    with_mu["model"]["params"]["mu"] = 0.1;
    with_mu["model"]["flows"].push_back(
        {{"from", "R"}, {"to", "S"}, {"rate", "mu*I"}});
    write_config(dir, with_mu);
    int rc = run_cli("verify --config " + cfg.string() + " --out " + dir.string() +
                         " --points 200",
                     dir);
    CHECK(rc == 0);
    CHECK(slurp(dir / "stdout.txt").find("PASS") != std::string::npos);
    json report = json::parse(slurp(dir / "verify.json"));
    CHECK(report["pass"].get<bool>());
    CHECK(report["checks"].size() == 6);

    fs::path bad_dir = fresh_dir("verify_bad");
    fs::path bad_cfg = write_config(
        bad_dir, json{{"poisson",
                       {{"vars", {"S", "I", "R"}},
                        {"brackets", {{"S,I", "R"}, {"S,R", "S"}}}}}});
    rc = run_cli("verify --config " + bad_cfg.string() + " --out " + bad_dir.string() +
                     " --points 100",
                 bad_dir);
    CHECK(rc == 0);
    CHECK(slurp(bad_dir / "stdout.txt").find("FAIL") != std::string::npos);
}

TEST_CASE("couple audits the grand total") {
    fs::path dir = fresh_dir("couple");
    fs::path cfg = write_config(
        dir, json{{"coupling", fig9_coupling()},
                  {"initial", {0.8, 0.1, 0.1, 0.7, 0.3, 0.0, 0.5, 0.1, 0.4}},
                  {"t_end", 5.0},
                  {"dt", 0.01}});
    CHECK(run_cli("couple --config " + cfg.string() + " --out " + dir.string(), dir) ==
          0);
    Csv totals = read_csv(dir / "totals.csv");
    CHECK(totals.header.back() == "N_total");
    for (const auto& row : totals.rows)
        CHECK(std::fabs(row.back() - 3.0) <= 1e-9);
    // Individual populations exchange mass.
    CHECK(std::fabs(totals.rows.back()[totals.col("N_1")] - 1.0) > 1e-3);
    CHECK(fs::exists(dir / "population_3.csv"));
}

TEST_CASE("couple rejects a transfer given in both orientations") {
    fs::path dir = fresh_dir("couple_dup");
    fs::path cfg = write_config(
        dir, json{{"coupling", fig9_coupling("kappa*(S_2+S_1+I_2-I_1)")},
                  {"initial", {0.8, 0.1, 0.1, 0.7, 0.3, 0.0, 0.5, 0.1, 0.4}},
                  {"t_end", 1.0}});
    CHECK(run_cli("couple --config " + cfg.string() + " --out " + dir.string(), dir) ==
          2);
}

TEST_CASE("sweep orders peaks by contact rate and drops duplicates") {
    fs::path dir = fresh_dir("sweep");
    fs::path cfg = write_config(
        dir, json{{"model", sir_model()},
                  {"initial", {0.99, 0.01, 0.0}},
                  {"t_end", 60.0},
                  {"dt", 0.01},
                  {"grid", {{{"beta", 0.5}}, {{"beta", 1.0}}, {{"beta", 2.0}},
                            {{"beta", 1.0}}}}});
    CHECK(run_cli("sweep --config " + cfg.string() + " --out " + dir.string(), dir) == 0);
    json results = json::parse(slurp(dir / "sweep.json"));
    REQUIRE(results.size() == 3); // duplicate beta=1 dropped
    double prev = 0.0;
    for (const auto& r : results) {
        double peak = r["peak_infection"].get<double>();
        CHECK(peak > prev);
        prev = peak;
        CHECK(r["h_drift"].get<double>() <= 1e-6);
    }

    fs::path empty_dir = fresh_dir("sweep_empty");
    fs::path empty_cfg = write_config(empty_dir,
                                      json{{"model", sir_model()},
                                           {"initial", {0.99, 0.01, 0.0}},
                                           {"grid", json::array()}});
    CHECK(run_cli("sweep --config " + empty_cfg.string() + " --out " +
                      empty_dir.string(),
                  empty_dir) == 2);
}

TEST_CASE("repeated runs are byte-identical") {
    json cfg_body{{"model", sir_model()},
                  {"initial", {0.99, 0.01, 0.0}},
                  {"t_end", 10.0},
                  {"dt", 0.05}};
    fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
    fs::path c1 = write_config(d1, cfg_body), c2 = write_config(d2, cfg_body);
    CHECK(run_cli("simulate --config " + c1.string() + " --out " + d1.string(), d1) == 0);
    CHECK(run_cli("simulate --config " + c2.string() + " --out " + d2.string(), d2) == 0);
    CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
}

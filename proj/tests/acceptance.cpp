// End-to-end acceptance checks, one pass/fail line each. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hamepi/biham.hpp"
#include "hamepi/sampling.hpp"
#include "hamepi/solver.hpp"

using namespace hamepi;

namespace {

using Points = std::vector<std::vector<double>>;

Points interior(int dim, int count, unsigned seed) {
    auto rng = make_rng(seed);
    return box_points(dim, count, rng, 0.15, 0.95);
}

std::vector<CompartmentalModel> builtins() {
    Expr i = Expr::variable("I");
    return {models::sir(0.1, 1.0),
            models::sirs_endemic(0.1, 1.0, 0.1),
            models::sir_vacc_i(0.1, 1.0, 0.1),
            models::sir_vacc_s(0.1, 1.0, 0.1),
            models::sir_vital(0.1, 1.0, 0.01, 0.2, 0.01),
            models::seir(0.1, 1.0, 0.2, Expr::parameter("mu") * i, Expr(), Expr(),
                         {{"mu", 0.05}}),
            models::rescale_nonconstant(0.1, 1.0, Expr::constant(0.02) * i, Expr(),
                                        0.03, 0.01)};
}

std::vector<BiHamiltonianPair> pairs() {
    return {sirs_pair(0.1, 1.0, 0.1), vacc_i_pair(0.1, 1.0, 0.1),
            vacc_s_pair(0.1, 1.0, 0.1)};
}

// 1. Every structure in the catalog satisfies Jacobi: canonical structures of
// all builtin models, the second structures of the bi-Hamiltonian pairs, and
// the pencils (1-lambda) pi1 + lambda pi2 for several lambda. Budget: 30 s.
bool criterion_1() {
    double worst = 0.0;
    auto rng = make_rng(101);
    for (const auto& m : builtins()) {
        HamiltonianSystem hs = canonical_poisson(m);
        auto pts = box_points(hs.structure().dim(), 1000, rng);
        worst = std::max(worst, max_jacobi_residual(hs.structure(), hs.params(), pts));
    }
    auto pts3 = box_points(3, 1000, rng);
    for (const auto& pair : pairs()) {
        worst = std::max(worst, max_jacobi_residual(pair.second().structure(),
                                                    pair.second().params(), pts3));
        for (double lambda : {0.25, 0.5, 0.75}) {
            PoissonStructure mix =
                pencil(pair.first().structure(), pair.second().structure(), lambda);
            worst = std::max(worst,
                             max_jacobi_residual(mix, pair.second().params(), pts3));
        }
    }
    std::printf("  max jacobi residual: %.3g\n", worst);
    return worst <= 1e-10;
}

// 2. Hamilton's equations reproduce the flow-induced ODE on the simplex.
bool criterion_2() {
    double worst = 0.0;
    auto rng = make_rng(102);
    for (const auto& m : builtins()) {
        HamiltonianSystem hs = canonical_poisson(m);
        auto field = hs.compile_field();
        auto rhs = to_ode(m).compile();
        auto pts = simplex_points(hs.structure().dim(), 1000, rng);
        for (const auto& p : pts)
            for (std::size_t i = 0; i < field.size(); ++i)
                worst = std::max(worst, std::fabs(field[i](p) - rhs[i](p)));
    }
    std::printf("  max |hamilton - ode|: %.3g\n", worst);
    return worst <= 1e-12;
}

// 3. Cataloged Casimirs annihilate their structures; the total population is
// a Casimir of the classic second structure.
bool criterion_3() {
    auto pts = interior(3, 500, 103);
    double worst = 0.0;
    struct Case { StructureId id; CompartmentalModel model; };
    std::vector<Case> cases{
        {StructureId::Sir, models::sir(0.1, 1.0)},
        {StructureId::Sirs, models::sirs_endemic(0.1, 1.0, 0.1)},
        {StructureId::VaccI, models::sir_vacc_i(0.1, 1.0, 0.1)},
        {StructureId::VaccS, models::sir_vacc_s(0.1, 1.0, 0.1)},
    };
    for (const auto& c : cases) {
        HamiltonianSystem hs = canonical_poisson(c.model);
        Expr cas = casimir_of(c.id, 0.5);
        worst = std::max(
            worst, is_casimir(hs.structure(), cas, pts, 1e-10, hs.params()).max_defect);
    }
    BiHamiltonianPair classic = sirs_pair(0.1, 1.0, 0.0);
    worst = std::max(worst, is_casimir(classic.second().structure(),
                                       classic.first().hamiltonian(), pts, 1e-10,
                                       classic.second().params())
                                .max_defect);
    std::printf("  max casimir defect: %.3g\n", worst);
    return worst <= 1e-10;
}

// 4. Bi-Hamiltonian pairs: both descriptions generate the same field and the
// structures are compatible, including one two-population coupling.
bool criterion_4() {
    auto pts = interior(3, 500, 104);
    double worst = 0.0;
    for (const auto& pair : pairs()) {
        worst = std::max(worst, pair.max_field_mismatch(pts));
        worst = std::max(worst, pair.compatible(pts, 1e-10).max_defect);
    }
    Params p{{"alpha", 0.1}, {"beta", 1.0}, {"mu", 0.1}};
    BiHamiltonianPair coupled = coupled_pair(PairKind::Sirs, {p, p}, {{{0, 1}, 0.05}});
    auto pts6 = interior(6, 500, 105);
    worst = std::max(worst, coupled.max_field_mismatch(pts6));
    worst = std::max(worst, coupled.compatible(pts6, 1e-10).max_defect);
    std::printf("  max pair defect: %.3g\n", worst);
    return worst <= 1e-10;
}

// 5. Exact solutions track a tight adaptive run, sit on the Casimir level set,
// conserve the total exactly, and degenerate correctly as mu, v -> 0.
// Budget: 60 s.
bool criterion_5() {
    const double s0 = 0.99;
    std::vector<double> times;
    for (int i = 0; i <= 120; ++i) times.push_back(60.0 * i / 120.0);

    struct Case {
        const char* name;
        ExactSolution ex;
        CompartmentalModel model;
        StructureId id;
        double tol;
    };
    std::vector<Case> cases;
    cases.push_back({"sir", exact_sir(0.1, 1.0, s0), models::sir(0.1, 1.0),
                     StructureId::Sir, 1e-6});
    cases.push_back({"sirs", exact_sirs(0.1, 1.0, 0.1, s0),
                     models::sirs_endemic(0.1, 1.0, 0.1), StructureId::Sirs, 1e-6});
    cases.push_back({"vacc_i", exact_vacc_i(0.1, 1.0, 0.1, s0),
                     models::sir_vacc_i(0.1, 1.0, 0.1), StructureId::VaccI, 1e-6});
    cases.push_back({"vacc_s", exact_vacc_s(0.1, 1.0, 0.1, s0),
                     models::sir_vacc_s(0.1, 1.0, 0.1), StructureId::VaccS, 1e-5});

    bool ok = true;
    for (const auto& c : cases) {
        IntegrateOptions opt;
        opt.domain = DomainPolicy::Flag;
        opt.sample_times = times;
        HamiltonianSystem hs = canonical_poisson(c.model);
        Trajectory num = integrate_adaptive(make_rhs(hs), {s0, 1.0 - s0, 0.0},
                                            times.back(), 1e-10, 1e-12, opt);
        Expr cas = casimir_of(c.id, s0);
        CompiledExpr cval = cas.compile(hs.structure().variables(), c.model.params());
        double diff = 0.0, cmax = 0.0, total = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            auto e = c.ex(times[k]);
            for (int i = 0; i < 3; ++i)
                diff = std::max(diff, std::fabs(e[static_cast<std::size_t>(i)] -
                                                num.states[k][static_cast<std::size_t>(i)]));
            total = std::max(total, std::fabs(e[0] + e[1] + e[2] - 1.0));
            cmax = std::max(cmax, std::fabs(cval(std::vector<double>{e[0], e[1], e[2]})));
        }
        std::printf("  %s: |exact-num| %.3g, |C| %.3g, |S+I+R-1| %.3g\n", c.name,
                    diff, cmax, total);
        ok = ok && diff <= c.tol && cmax <= 1e-9 && total <= 1e-12;
    }

    // Vanishing-rate limits collapse onto the classic solution.
    ExactSolution classic = exact_sir(0.1, 1.0, s0);
    ExactSolution mu_limit = exact_sirs(0.1, 1.0, 1e-12, s0);
    ExactSolution vi_limit = exact_vacc_i(0.1, 1.0, 0.0, s0);
    ExactSolution vs_limit = exact_vacc_s(0.1, 1.0, 0.0, s0);
    double lim = 0.0;
    for (double t : {5.0, 20.0, 45.0}) {
        auto a = classic(t);
        for (const auto* other : {&mu_limit, &vi_limit, &vs_limit}) {
            auto b = (*other)(t);
            for (int i = 0; i < 3; ++i)
                lim = std::max(lim, std::fabs(a[static_cast<std::size_t>(i)] -
                                              b[static_cast<std::size_t>(i)]));
        }
    }
    std::printf("  limit mismatch: %.3g\n", lim);
    return ok && lim <= 1e-6;
}

// 6. Conservation in practice: fixed-step runs keep H to 1e-9, adaptive runs
// keep the Casimir to 1e-6.
bool criterion_6() {
    IntegrateOptions opt;
    opt.domain = DomainPolicy::Flag;
    double hworst = 0.0;
    for (const auto& m : builtins()) {
        if (m.compartments().size() != 3 && m.compartments().size() != 4) continue;
        HamiltonianSystem hs = canonical_poisson(m);
        std::vector<double> y0(hs.structure().variables().size(), 0.0);
        y0[0] = 0.99;
        y0[1] = 0.01;
        Trajectory traj = integrate_rk4(make_rhs(hs), y0, 100.0, 0.01, opt);
        DriftReport rep = diagnostics(traj, hs.hamiltonian(),
                                      hs.structure().variables(), hs.params());
        hworst = std::max(hworst, rep.h_drift);
    }

    struct Case { StructureId id; CompartmentalModel model; };
    std::vector<Case> cases{
        {StructureId::Sir, models::sir(0.1, 1.0)},
        {StructureId::Sirs, models::sirs_endemic(0.1, 1.0, 0.1)},
        {StructureId::VaccI, models::sir_vacc_i(0.1, 1.0, 0.1)},
        {StructureId::VaccS, models::sir_vacc_s(0.1, 1.0, 0.1)},
    };
    double cworst = 0.0;
    for (const auto& c : cases) {
        HamiltonianSystem hs = canonical_poisson(c.model);
        Trajectory traj = integrate_adaptive(make_rhs(hs), {0.99, 0.01, 0.0}, 100.0,
                                             1e-8, 1e-10, opt);
        Expr cas = casimir_of(c.id, 0.99);
        DriftReport rep = diagnostics(traj, hs.hamiltonian(),
                                      hs.structure().variables(), hs.params(), &cas);
        cworst = std::max(cworst, rep.c_drift);
    }
    std::printf("  h drift %.3g, casimir drift %.3g\n", hworst, cworst);
    return hworst <= 1e-9 && cworst <= 1e-6;
}

// 7. Three interacting populations: individual totals move, the grand total
// does not.
bool criterion_7() {
    std::vector<CompartmentalModel> three{models::sir(0.1, 1.0), models::sir(0.1, 1.0),
                                          models::sir(0.1, 1.0)};
    std::map<std::pair<int, int>, Expr> transfers;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            std::string sa = "_" + std::to_string(a + 1);
            std::string sb = "_" + std::to_string(b + 1);
            transfers.emplace(std::make_pair(a, b),
                              Expr::parse("kappa*(S" + sa + "+S" + sb + "+I" + sa +
                                          "-I" + sb + ")"));
        }
    InteractingSystem sys =
        InteractingSystem::couple(three, transfers, {{"kappa", 0.1}});
    std::vector<double> y0{0.8, 0.1, 0.1, 0.7, 0.3, 0.0, 0.5, 0.1, 0.4};
    Trajectory traj = integrate_rk4(make_rhs(sys), y0, 100.0, 0.01);

    auto t0 = sys.population_totals(traj.states.front());
    double grand0 = t0[0] + t0[1] + t0[2];
    double drift = 0.0, change = 0.0;
    for (const auto& s : traj.states) {
        auto tot = sys.population_totals(s);
        drift = std::max(drift, std::fabs(tot[0] + tot[1] + tot[2] - grand0));
        for (int a = 0; a < 3; ++a)
            change = std::max(change, std::fabs(tot[static_cast<std::size_t>(a)] -
                                                t0[static_cast<std::size_t>(a)]));
    }
    std::printf("  grand total drift %.3g, max per-population change %.3g\n", drift,
                change);
    return drift <= 1e-9 && change > 1e-3;
}

// 8. Fractions of the growing-population system obey the rescaled
// constant-population model.
bool criterion_8() {
    const double alpha = 0.1, beta = 1.0, b = 0.03, d = 0.01, c = 0.02;
    RhsFn raw = [=](double, const std::vector<double>& y, std::vector<double>& dy) {
        double n = y[0] + y[1] + y[2];
        dy[0] = b * n - d * y[0] - beta * y[0] * y[1] / n + c * y[1];
        dy[1] = beta * y[0] * y[1] / n - alpha * y[1] - d * y[1];
        dy[2] = alpha * y[1] - d * y[2] - c * y[1];
    };
    std::vector<double> times;
    for (int i = 0; i <= 50; ++i) times.push_back(i);
    IntegrateOptions opt;
    opt.sample_times = times;
    Trajectory raw_traj = integrate_adaptive(raw, {0.8, 0.1, 0.1}, 50.0, 1e-12, 1e-14,
                                             opt);

    CompartmentalModel m = models::rescale_nonconstant(
        alpha, beta, Expr::constant(c) * Expr::variable("I"), Expr(), b, d);
    Trajectory frac_traj = integrate_adaptive(make_rhs(canonical_poisson(m)),
                                              {0.8, 0.1, 0.1}, 50.0, 1e-12, 1e-14, opt);

    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto& ry = raw_traj.states[k];
        double n = ry[0] + ry[1] + ry[2];
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst,
                             std::fabs(ry[static_cast<std::size_t>(i)] / n -
                                       frac_traj.states[k][static_cast<std::size_t>(i)]));
    }
    std::printf("  max |raw fraction - rescaled|: %.3g\n", worst);
    return worst <= 1e-8;
}

// 9. Qualitative epidemiology: a classic epidemic burns out, vital dynamics
// sustain an endemic level.
bool criterion_9() {
    Trajectory burst = integrate_rk4(make_rhs(canonical_poisson(models::sir(0.1, 1.0))),
                                     {0.99, 0.01, 0.0}, 100.0, 0.01);
    int peaks = 0;
    for (std::size_t k = 1; k + 1 < burst.states.size(); ++k)
        if (burst.states[k][1] > burst.states[k - 1][1] &&
            burst.states[k][1] > burst.states[k + 1][1])
            ++peaks;
    double i_end = burst.states.back()[1];

    Trajectory endemic = integrate_rk4(
        make_rhs(canonical_poisson(models::sir_vital(0.1, 1.0, 0.01, 0.2, 0.01))),
        {0.99, 0.01, 0.0}, 200.0, 0.01);
    double i_endemic = endemic.states.back()[1];
    std::printf("  peaks %d, I(100) %.3g, endemic I(200) %.3g\n", peaks, i_end,
                i_endemic);
    return peaks == 1 && i_end < 1e-3 && i_endemic > 0.01;
}

} // namespace

int main() {
    struct Criterion {
        const char* label;
        std::function<bool()> run;
        double budget_s; // 0 = untimed
    };
    std::vector<Criterion> criteria{
        {"jacobi identity across the catalog", criterion_1, 30.0},
        {"hamilton equations vs flow ODE", criterion_2, 0.0},
        {"casimir functions", criterion_3, 0.0},
        {"bi-hamiltonian pairs", criterion_4, 0.0},
        {"exact solutions", criterion_5, 60.0},
        {"conservation under integration", criterion_6, 0.0},
        {"interacting populations", criterion_7, 0.0},
        {"population rescaling", criterion_8, 0.0},
        {"epidemic phenomenology", criterion_9, 0.0},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        auto start = std::chrono::steady_clock::now();
        bool pass = false;
        try {
            pass = criteria[k].run();
        } catch (const std::exception& e) {
            std::printf("  exception: %s\n", e.what());
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (criteria[k].budget_s > 0.0 && elapsed > criteria[k].budget_s) {
            std::printf("  over time budget: %.1fs > %.0fs\n", elapsed,
                        criteria[k].budget_s);
            pass = false;
        }
        std::printf("criterion %zu (%s): %s [%.1fs]\n", k + 1, criteria[k].label,
                    pass ? "PASS" : "FAIL", elapsed);
        if (!pass) ++failures;
    }
    return failures;
}

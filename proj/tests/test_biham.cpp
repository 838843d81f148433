#include <doctest.h>

#include <cmath>

#include "hamepi/biham.hpp"
#include "hamepi/sampling.hpp"

using namespace hamepi;

namespace {

std::vector<std::vector<double>> interior_points(int dim, int count, unsigned seed = 21) {
    auto rng = make_rng(seed);
    // Stay away from beta*S - mu = 0 and other log singularities: with the
    // test parameters (beta=1, mu=v=0.1) every coordinate above 0.15 is safe.
    return box_points(dim, count, rng, 0.15, 0.95);
}

} // namespace

TEST_CASE("both descriptions generate the same flow") {
    std::vector<double> point{0.8, 0.1, 0.1};
    for (auto pair : {sirs_pair(0.1, 1.0, 0.1), vacc_i_pair(0.1, 1.0, 0.1),
                      vacc_s_pair(0.1, 1.0, 0.1)}) {
        auto v1 = pair.first().vector_field(point);
        auto v2 = pair.second().vector_field(point);
        for (int i = 0; i < 3; ++i)
            CHECK(v1[static_cast<std::size_t>(i)] ==
                  doctest::Approx(v2[static_cast<std::size_t>(i)]).epsilon(1e-12));
        auto pts = interior_points(3, 300);
        CHECK(pair.max_field_mismatch(pts) <= 1e-10);
        CHECK(pair.compatible(pts, 1e-10).ok);
    }
}

TEST_CASE("mu = 0 reduces the second structure to the classic block") {
    BiHamiltonianPair pair = sirs_pair(0.1, 1.0, 0.0);
    Environment env({{"S", 0.8}, {"I", 0.1}, {"R", 0.1}}, pair.second().params());
    CHECK(pair.second().structure().entry(0, 1).eval(env) ==
          doctest::Approx(-0.08).epsilon(1e-14));
    BiHamiltonianPair vi = vacc_i_pair(0.1, 1.0, 0.0);
    Environment venv({{"S", 0.8}, {"I", 0.1}, {"R", 0.1}}, vi.second().params());
    CHECK(vi.second().structure().entry(0, 1).eval(venv) ==
          doctest::Approx(-0.08).epsilon(1e-14));
}

TEST_CASE("total population is a casimir of every second structure") {
    Expr h1 = Expr::parse("S+I+R", {"S", "I", "R"});
    auto pts = interior_points(3, 300);
    for (auto pair : {sirs_pair(0.1, 1.0, 0.1), vacc_i_pair(0.1, 1.0, 0.1),
                      vacc_s_pair(0.1, 1.0, 0.1)}) {
        CHECK(is_casimir(pair.second().structure(), h1, pts, 1e-10,
                         pair.second().params())
                  .ok);
    }
}

TEST_CASE("cataloged casimirs annihilate their first structures") {
    auto pts = interior_points(3, 300);
    struct Case { StructureId id; BiHamiltonianPair pair; };
    std::vector<Case> cases{
        {StructureId::Sirs, sirs_pair(0.1, 1.0, 0.1)},
        {StructureId::VaccI, vacc_i_pair(0.1, 1.0, 0.1)},
        {StructureId::VaccS, vacc_s_pair(0.1, 1.0, 0.1)},
    };
    for (const auto& c : cases) {
        Expr cas = casimir_of(c.id, 0.99);
        auto res = is_casimir(c.pair.first().structure(), cas, pts, 1e-10,
                              c.pair.first().params());
        CHECK(res.ok);
        // Normalized to zero at the epidemic start (S0, 1-S0, 0).
        Environment start({{"S", 0.99}, {"I", 0.01}, {"R", 0.0}},
                          c.pair.first().params());
        CHECK(cas.eval(start) == doctest::Approx(0.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(casimir_of(StructureId::Sir, 1.5), ValidationError);
}

TEST_CASE("coupled pair with constant transfers") {
    Params p{{"alpha", 0.1}, {"beta", 1.0}, {"mu", 0.1}};
    BiHamiltonianPair pair = coupled_pair(PairKind::Sirs, {p, p}, {{{0, 1}, 0.05}});
    auto pts = interior_points(6, 200);
    CHECK(pair.max_field_mismatch(pts) <= 1e-10);
    CHECK(pair.compatible(pts, 1e-10).ok);
    // Constant cross brackets contribute no derivatives at all.
    CHECK(max_jacobi_residual(pair.second().structure(), pair.second().params(), pts) <=
          1e-12);

    // tau = 0 decouples into two independent pairs.
    BiHamiltonianPair flat = coupled_pair(PairKind::Sirs, {p, p}, {});
    CHECK(flat.max_field_mismatch(pts) <= 1e-10);
    CHECK(flat.compatible(pts, 1e-10).ok);

    CHECK_THROWS_AS(coupled_pair(PairKind::Sirs, {p, p},
                                 {{{0, 1}, 0.05}, {{1, 0}, 0.05}}),
                    ValidationError);
    CHECK_THROWS_AS(coupled_pair(PairKind::Sirs, {Params{{"alpha", 0.1}}}, {}),
                    ValidationError);
}

TEST_CASE("parameter sign checks") {
    CHECK_THROWS_AS(sirs_pair(0.0, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(vacc_i_pair(0.1, -1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(vacc_s_pair(0.1, 1.0, -0.1), ValidationError);
}

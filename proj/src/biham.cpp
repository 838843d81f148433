#include "hamepi/biham.hpp"

namespace hamepi {

namespace {

void require_positive(const char* name, double value) {
    if (!(value > 0.0))
        throw ValidationError(std::string(name) + " must be positive, got " +
                              std::to_string(value));
}

void require_nonnegative(const char* name, double value) {
    if (value < 0.0)
        throw ValidationError(std::string(name) + " must be non-negative, got " +
                              std::to_string(value));
}

const Expr S = Expr::variable("S");
const Expr I = Expr::variable("I");
const Expr R = Expr::variable("R");
const Expr ALPHA = Expr::parameter("alpha");
const Expr BETA = Expr::parameter("beta");
const Expr MU = Expr::parameter("mu");
const Expr V = Expr::parameter("v");

struct SecondDescription {
    Expr factor; // brackets are {S,I} = -F, {S,R} = F, {I,R} = -F
    Expr h2;
};

SecondDescription second_of(PairKind kind) {
    switch (kind) {
    case PairKind::Sirs:
        return {I * (BETA * S - MU),
                -(R + (ALPHA / BETA) * Expr::log(BETA * S - MU))};
    case PairKind::VaccI:
        return {I * (BETA * S + V),
                -(R + ((ALPHA + V) / BETA) * Expr::log(BETA * S + V))};
    case PairKind::VaccS:
        return {BETA * S * I,
                -(R + (ALPHA / BETA) * Expr::log(S) - (V / BETA) * Expr::log(I))};
    }
    throw ValidationError("unknown pair kind");
}

CompartmentalModel model_of(PairKind kind, const Params& p) {
    auto need = [&](const char* key) {
        auto it = p.find(key);
        if (it == p.end())
            throw ValidationError(std::string("missing parameter '") + key + "'");
        return it->second;
    };
    switch (kind) {
    case PairKind::Sirs: return models::sirs_endemic(need("alpha"), need("beta"), need("mu"));
    case PairKind::VaccI: return models::sir_vacc_i(need("alpha"), need("beta"), need("v"));
    case PairKind::VaccS: return models::sir_vacc_s(need("alpha"), need("beta"), need("v"));
    }
    throw ValidationError("unknown pair kind");
}

BiHamiltonianPair make_pair(PairKind kind, Params params) {
    HamiltonianSystem first = canonical_poisson(model_of(kind, params));
    SecondDescription d = second_of(kind);
    PoissonStructure pi2 = PoissonStructure::from_brackets(
        {"S", "I", "R"},
        {{"S", "I", -d.factor}, {"S", "R", d.factor}, {"I", "R", -d.factor}});
    return BiHamiltonianPair(std::move(first),
                             HamiltonianSystem(std::move(pi2), d.h2, std::move(params)));
}

} // namespace

BiHamiltonianPair sirs_pair(double alpha, double beta, double mu) {
    require_positive("alpha", alpha);
    require_positive("beta", beta);
    require_nonnegative("mu", mu);
    return make_pair(PairKind::Sirs, {{"alpha", alpha}, {"beta", beta}, {"mu", mu}});
}

BiHamiltonianPair vacc_i_pair(double alpha, double beta, double v) {
    require_positive("alpha", alpha);
    require_positive("beta", beta);
    require_nonnegative("v", v);
    return make_pair(PairKind::VaccI, {{"alpha", alpha}, {"beta", beta}, {"v", v}});
}

BiHamiltonianPair vacc_s_pair(double alpha, double beta, double v) {
    require_positive("alpha", alpha);
    require_positive("beta", beta);
    require_nonnegative("v", v);
    return make_pair(PairKind::VaccS, {{"alpha", alpha}, {"beta", beta}, {"v", v}});
}

BiHamiltonianPair coupled_pair(PairKind kind, const std::vector<Params>& per_population,
                               const std::map<std::pair<int, int>, double>& tau) {
    if (per_population.empty())
        throw ValidationError("at least one population required");
    const int n = static_cast<int>(per_population.size());

    std::map<std::pair<int, int>, double> taus;
    for (const auto& [idx, value] : tau) {
        auto [a, b] = idx;
        if (a < 0 || b < 0 || a >= n || b >= n || a == b)
            throw ValidationError("transfer indices out of range");
        std::pair<int, int> key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        double entry = a < b ? value : -value;
        if (taus.count(key))
            throw ValidationError("transfer given in both orientations");
        taus.emplace(key, entry);
    }

    std::vector<CompartmentalModel> models;
    models.reserve(per_population.size());
    for (const Params& p : per_population) models.push_back(model_of(kind, p));

    std::map<std::pair<int, int>, Expr> transfer_exprs;
    for (const auto& [idx, value] : taus)
        transfer_exprs.emplace(idx, Expr::constant(value));
    InteractingSystem coupled = InteractingSystem::couple(models, transfer_exprs);

    SecondDescription d = second_of(kind);
    std::map<std::pair<int, int>, Expr> entries;
    Expr h2;
    Params params;
    for (int a = 0; a < n; ++a) {
        const std::string suffix = "_" + std::to_string(a + 1);
        std::map<std::string, std::string> mapping{{"S", "S" + suffix},
                                                   {"I", "I" + suffix},
                                                   {"R", "R" + suffix}};
        for (const auto& [p, val] : per_population[static_cast<std::size_t>(a)]) {
            mapping[p] = p + suffix;
            params[p + suffix] = val;
        }
        Expr f = d.factor.rename(mapping);
        const int off = 3 * a;
        entries.emplace(std::make_pair(off, off + 1), -f);
        entries.emplace(std::make_pair(off, off + 2), f);
        entries.emplace(std::make_pair(off + 1, off + 2), -f);
        h2 = h2 + d.h2.rename(mapping);
    }
    for (const auto& [idx, value] : taus)
        entries.emplace(std::make_pair(3 * idx.first + 2, 3 * idx.second + 2),
                        Expr::constant(value));

    PoissonStructure pi2(coupled.variables(), std::move(entries));
    return BiHamiltonianPair(coupled.system(),
                             HamiltonianSystem(std::move(pi2), h2, std::move(params)));
}

Expr casimir_of(StructureId id, double s0) {
    if (!(s0 > 0.0 && s0 < 1.0))
        throw ValidationError("initial susceptible fraction must lie in (0,1)");
    Expr c0 = Expr::constant(s0);
    switch (id) {
    case StructureId::Sir:
        return S + I - Expr::constant(1.0) - (ALPHA / BETA) * Expr::log(S / c0);
    case StructureId::Sirs:
        return S + I - Expr::constant(1.0) -
               (ALPHA / BETA) * Expr::log((BETA * S - MU) / (BETA * c0 - MU));
    case StructureId::VaccI:
        return S + I - Expr::constant(1.0) -
               ((ALPHA + V) / BETA) * Expr::log((BETA * S + V) / (BETA * c0 + V));
    case StructureId::VaccS:
        return Expr::constant(1.0) - S - I + (ALPHA / BETA) * Expr::log(S / c0) -
               (V / BETA) * Expr::log(I / Expr::constant(1.0 - s0));
    }
    throw ValidationError("unknown structure id");
}

} // namespace hamepi

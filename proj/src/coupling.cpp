#include "hamepi/coupling.hpp"

#include <set>

namespace hamepi {

InteractingSystem InteractingSystem::couple(
    const std::vector<CompartmentalModel>& models,
    const std::map<std::pair<int, int>, Expr>& transfers, Params shared_params) {
    if (models.empty()) throw ValidationError("at least one population required");
    const int n_pop = static_cast<int>(models.size());
    const int m = static_cast<int>(models[0].compartments().size());
    for (const auto& mod : models)
        if (static_cast<int>(mod.compartments().size()) != m)
            throw ValidationError("all populations must have the same number of compartments");

    // Normalize transfer keys to a<b, negating the other orientation.
    std::map<std::pair<int, int>, Expr> taus;
    for (const auto& [idx, e] : transfers) {
        auto [a, b] = idx;
        if (a < 0 || b < 0 || a >= n_pop || b >= n_pop || a == b)
            throw ValidationError("transfer indices out of range");
        std::pair<int, int> key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        Expr entry = a < b ? e : -e;
        if (taus.count(key))
            throw ValidationError("transfer between populations " +
                                  std::to_string(key.first + 1) + " and " +
                                  std::to_string(key.second + 1) +
                                  " given in both orientations");
        if (!entry.is_zero()) taus.emplace(key, entry);
    }

    std::vector<std::string> vars;
    std::vector<int> distinguished;
    std::map<std::pair<int, int>, Expr> entries;
    Params params = std::move(shared_params);

    for (int a = 0; a < n_pop; ++a) {
        const CompartmentalModel& mod = models[static_cast<std::size_t>(a)];
        const std::string suffix = "_" + std::to_string(a + 1);
        const int offset = a * m;

        std::map<std::string, std::string> mapping;
        for (const auto& v : mod.compartments()) mapping[v] = v + suffix;
        for (const auto& [p, val] : mod.params()) {
            mapping[p] = p + suffix;
            params[p + suffix] = val;
        }

        HamiltonianSystem hs = canonical_poisson(mod);
        for (const auto& v : hs.structure().variables()) vars.push_back(v + suffix);
        distinguished.push_back(offset + mod.index_of(mod.distinguished()));
        for (const auto& [idx, e] : hs.structure().upper_entries())
            entries.emplace(std::make_pair(offset + idx.first, offset + idx.second),
                            e.rename(mapping));
    }

    // Names a transfer may reference: non-distinguished variables of its two
    // populations. Anything else in vars is rejected; unknown names are
    // treated as parameters and resolved when the field is compiled.
    for (const auto& [idx, e] : taus) {
        auto [a, b] = idx;
        std::set<std::string> evars, eparams;
        e.collect_names(evars, eparams);
        std::set<std::string> all_names = evars;
        all_names.insert(eparams.begin(), eparams.end());
        for (const auto& name : all_names) {
            for (int i = 0; i < n_pop * m; ++i) {
                if (vars[static_cast<std::size_t>(i)] != name) continue;
                int pop = i / m;
                if (pop != a && pop != b)
                    throw ValidationError("transfer between populations " +
                                          std::to_string(a + 1) + " and " +
                                          std::to_string(b + 1) +
                                          " references variable " + name +
                                          " of another population");
                if (i == distinguished[static_cast<std::size_t>(pop)])
                    throw ValidationError("transfer references distinguished variable " +
                                          name);
            }
        }
        entries.emplace(std::make_pair(distinguished[static_cast<std::size_t>(a)],
                                       distinguished[static_cast<std::size_t>(b)]),
                        -e);
    }

    Expr h;
    for (const auto& v : vars) h = h + Expr::variable(v);
    HamiltonianSystem sys(PoissonStructure(vars, std::move(entries)), h,
                          std::move(params));
    return InteractingSystem(n_pop, m, std::move(distinguished), std::move(taus),
                             std::move(sys));
}

Expr InteractingSystem::transfer(int a, int b) const {
    if (a == b) return Expr::constant(0.0);
    bool flip = a > b;
    if (flip) std::swap(a, b);
    auto it = transfers_.find({a, b});
    if (it == transfers_.end()) return Expr::constant(0.0);
    return flip ? -it->second : it->second;
}

std::vector<double> InteractingSystem::population_totals(
    std::span<const double> state) const {
    std::vector<double> totals(static_cast<std::size_t>(n_pop_), 0.0);
    for (int a = 0; a < n_pop_; ++a)
        for (int mu = 0; mu < m_; ++mu)
            totals[static_cast<std::size_t>(a)] +=
                state[static_cast<std::size_t>(a * m_ + mu)];
    return totals;
}

std::vector<std::vector<double>> per_population_balance(
    const InteractingSystem& sys, const std::vector<std::vector<double>>& states) {
    const int n_pop = sys.populations();
    std::vector<CompiledExpr> outflow;
    outflow.reserve(static_cast<std::size_t>(n_pop));
    for (int a = 0; a < n_pop; ++a) {
        Expr sum = Expr::constant(0.0);
        for (int k = 0; k < n_pop; ++k)
            if (k != a) sum = sum + sys.transfer(a, k);
        outflow.push_back(sum.compile(sys.variables(), sys.system().params()));
    }
    std::vector<std::vector<double>> series(static_cast<std::size_t>(n_pop));
    for (int a = 0; a < n_pop; ++a) {
        auto& row = series[static_cast<std::size_t>(a)];
        row.reserve(states.size());
        for (const auto& s : states) row.push_back(outflow[static_cast<std::size_t>(a)](s));
    }
    return series;
}

} // namespace hamepi

#include "hamepi/poisson.hpp"

#include <algorithm>
#include <cmath>

namespace hamepi {

PoissonStructure::PoissonStructure(std::vector<std::string> variables,
                                   std::map<std::pair<int, int>, Expr> upper_entries)
    : vars_(std::move(variables)) {
    const int n = dim();
    for (auto& [idx, e] : upper_entries) {
        auto [i, j] = idx;
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw ValidationError("bracket index out of range");
        if (i >= j)
            throw ValidationError("only upper-triangle (i < j) entries may be given");
        if (!e.is_zero()) entries_.emplace(idx, e);
    }

    // Cyclic Jacobi sums, one per triple i<j<k.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                Expr xi = Expr::variable(vars_[static_cast<std::size_t>(i)]);
                Expr xj = Expr::variable(vars_[static_cast<std::size_t>(j)]);
                Expr xk = Expr::variable(vars_[static_cast<std::size_t>(k)]);
                Expr sum = bracket(bracket(xi, xj), xk) +
                           bracket(bracket(xk, xi), xj) +
                           bracket(bracket(xj, xk), xi);
                jacobi_sums_.push_back(sum);
            }
}

PoissonStructure PoissonStructure::from_brackets(
    std::vector<std::string> variables,
    const std::vector<std::tuple<std::string, std::string, Expr>>& brackets) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < variables.size(); ++i)
        index[variables[i]] = static_cast<int>(i);
    std::map<std::pair<int, int>, Expr> entries;
    for (const auto& [a, b, e] : brackets) {
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end())
            throw ValidationError("bracket names a variable not in the structure: {" +
                                  a + "," + b + "}");
        int i = ia->second, j = ib->second;
        if (i == j)
            throw ValidationError("diagonal bracket {" + a + "," + a + "} must be zero");
        Expr entry = i < j ? e : -e;
        if (i > j) std::swap(i, j);
        if (entries.count({i, j}))
            throw ValidationError("duplicate bracket entry {" + a + "," + b + "}");
        entries.emplace(std::make_pair(i, j), entry);
    }
    return PoissonStructure(std::move(variables), std::move(entries));
}

int PoissonStructure::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return static_cast<int>(i);
    throw ValidationError("unknown variable '" + name + "'");
}

Expr PoissonStructure::entry(int i, int j) const {
    if (i == j) return Expr::constant(0.0);
    bool flip = i > j;
    if (flip) std::swap(i, j);
    auto it = entries_.find({i, j});
    if (it == entries_.end()) return Expr::constant(0.0);
    return flip ? -it->second : it->second;
}

Expr PoissonStructure::bracket(const Expr& f, const Expr& g) const {
    std::vector<Expr> df, dg;
    df.reserve(vars_.size());
    dg.reserve(vars_.size());
    for (const auto& v : vars_) {
        df.push_back(f.diff(v));
        dg.push_back(g.diff(v));
    }
    Expr sum = Expr::constant(0.0);
    for (const auto& [idx, pi] : entries_) {
        auto [i, j] = idx;
        auto si = static_cast<std::size_t>(i);
        auto sj = static_cast<std::size_t>(j);
        sum = sum + pi * (df[si] * dg[sj] - df[sj] * dg[si]);
    }
    return sum;
}

double PoissonStructure::jacobi_residual(std::span<const double> state,
                                         const Params& params) const {
    Environment env({}, params);
    for (std::size_t i = 0; i < vars_.size(); ++i)
        env.set_variable(vars_[i], state[i]);
    double worst = 0.0;
    for (const Expr& s : jacobi_sums_)
        worst = std::max(worst, std::fabs(s.eval(env)));
    return worst;
}

HamiltonianSystem::HamiltonianSystem(PoissonStructure structure, Expr hamiltonian,
                                     Params params)
    : structure_(std::move(structure)),
      hamiltonian_(std::move(hamiltonian)),
      params_(std::move(params)) {
    for (const auto& v : structure_.variables())
        field_.push_back(structure_.bracket(Expr::variable(v), hamiltonian_));
}

std::vector<double> HamiltonianSystem::vector_field(std::span<const double> state) const {
    Environment env({}, params_);
    const auto& vars = structure_.variables();
    for (std::size_t i = 0; i < vars.size(); ++i)
        env.set_variable(vars[i], state[i]);
    std::vector<double> out;
    out.reserve(field_.size());
    for (const Expr& f : field_) out.push_back(f.eval(env));
    return out;
}

std::vector<CompiledExpr> HamiltonianSystem::compile_field() const {
    std::vector<CompiledExpr> out;
    out.reserve(field_.size());
    for (const Expr& f : field_)
        out.push_back(f.compile(structure_.variables(), params_));
    return out;
}

double max_jacobi_residual(const PoissonStructure& ps, const Params& params,
                           const std::vector<std::vector<double>>& points) {
    std::vector<CompiledExpr> sums;
    sums.reserve(ps.jacobi_sums().size());
    for (const Expr& s : ps.jacobi_sums())
        sums.push_back(s.compile(ps.variables(), params));
    double worst = 0.0;
    for (const auto& p : points)
        for (const auto& s : sums)
            worst = std::max(worst, std::fabs(s(p)));
    return worst;
}

CheckResult is_casimir(const PoissonStructure& ps, const Expr& c,
                       const std::vector<std::vector<double>>& samples,
                       double tol, const Params& params) {
    const int n = ps.dim();
    std::vector<CompiledExpr> defects;
    for (int mu = 0; mu < n; ++mu) {
        Expr d = Expr::constant(0.0);
        for (int nu = 0; nu < n; ++nu)
            d = d + ps.entry(mu, nu) * c.diff(ps.variables()[static_cast<std::size_t>(nu)]);
        defects.push_back(d.compile(ps.variables(), params));
    }
    double worst = 0.0;
    for (const auto& p : samples)
        for (const auto& d : defects)
            worst = std::max(worst, std::fabs(d(p)));
    return {worst <= tol, worst};
}

PoissonStructure pencil(const PoissonStructure& ps1, const PoissonStructure& ps2,
                        double lambda) {
    if (ps1.dim() != ps2.dim() || ps1.variables() != ps2.variables())
        throw ValidationError("pencil requires equal dimension and variable order");
    std::map<std::pair<int, int>, Expr> entries;
    const int n = ps1.dim();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Expr e = Expr::constant(1.0 - lambda) * ps1.entry(i, j) +
                     Expr::constant(lambda) * ps2.entry(i, j);
            if (!e.is_zero()) entries.emplace(std::make_pair(i, j), e);
        }
    return PoissonStructure(ps1.variables(), std::move(entries));
}

CheckResult check_compatibility(const PoissonStructure& ps1,
                                const PoissonStructure& ps2,
                                const std::vector<std::vector<double>>& samples,
                                double tol, const Params& params) {
    // Jacobi for the entrywise sum; pencil(0.5) scaled by 2 gives the same
    // structure, and Jacobi scales cubically, so checking the sum directly is
    // equivalent and simpler.
    PoissonStructure half = pencil(ps1, ps2, 0.5);
    std::map<std::pair<int, int>, Expr> doubled;
    for (const auto& [idx, e] : half.upper_entries())
        doubled.emplace(idx, Expr::constant(2.0) * e);
    PoissonStructure sum(ps1.variables(), std::move(doubled));
    double worst = max_jacobi_residual(sum, params, samples);
    return {worst <= tol, worst};
}

double BiHamiltonianPair::max_field_mismatch(
    const std::vector<std::vector<double>>& points) const {
    auto f1 = first_.compile_field();
    auto f2 = second_.compile_field();
    double worst = 0.0;
    for (const auto& p : points)
        for (std::size_t i = 0; i < f1.size(); ++i)
            worst = std::max(worst, std::fabs(f1[i](p) - f2[i](p)));
    return worst;
}

CheckResult BiHamiltonianPair::compatible(const std::vector<std::vector<double>>& points,
                                          double tol) const {
    return check_compatibility(first_.structure(), second_.structure(), points, tol,
                               first_.params());
}

} // namespace hamepi

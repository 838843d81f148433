#include "hamepi/model.hpp"

#include <algorithm>

#include "hamepi/sampling.hpp"

namespace hamepi {

CompartmentalModel::CompartmentalModel(std::vector<std::string> compartments,
                                       Params params, std::vector<Flow> flows,
                                       std::string distinguished)
    : compartments_(std::move(compartments)),
      params_(std::move(params)),
      flows_(std::move(flows)),
      distinguished_(std::move(distinguished)) {
    if (compartments_.empty())
        throw ValidationError("model needs at least one compartment");
    if (distinguished_.empty()) distinguished_ = compartments_.back();
    index_of(distinguished_);
    for (const Flow& f : flows_) {
        index_of(f.from);
        index_of(f.to);
    }
}

int CompartmentalModel::index_of(const std::string& name) const {
    auto it = std::find(compartments_.begin(), compartments_.end(), name);
    if (it == compartments_.end())
        throw ValidationError("unknown compartment '" + name + "'");
    return static_cast<int>(it - compartments_.begin());
}

CompartmentalModel CompartmentalModel::with_distinguished(std::string name) const {
    return CompartmentalModel(compartments_, params_, flows_, std::move(name));
}

OdeSystem::OdeSystem(std::vector<std::string> variables, std::vector<Expr> rhs,
                     Params params)
    : vars_(std::move(variables)), rhs_(std::move(rhs)), params_(std::move(params)) {
    if (vars_.size() != rhs_.size())
        throw ValidationError("one right-hand side per variable required");
}

std::vector<double> OdeSystem::eval_rhs(std::span<const double> state) const {
    Environment env({}, params_);
    for (std::size_t i = 0; i < vars_.size(); ++i)
        env.set_variable(vars_[i], state[i]);
    std::vector<double> out;
    out.reserve(rhs_.size());
    for (const Expr& e : rhs_) out.push_back(e.eval(env));
    return out;
}

std::vector<CompiledExpr> OdeSystem::compile() const {
    std::vector<CompiledExpr> out;
    out.reserve(rhs_.size());
    for (const Expr& e : rhs_) out.push_back(e.compile(vars_, params_));
    return out;
}

OdeSystem to_ode(const CompartmentalModel& m) {
    std::vector<Expr> rhs(m.compartments().size());
    for (const Flow& f : m.flows()) {
        auto from = static_cast<std::size_t>(m.index_of(f.from));
        auto to = static_cast<std::size_t>(m.index_of(f.to));
        rhs[from] = rhs[from] - f.rate;
        rhs[to] = rhs[to] + f.rate;
    }
    return OdeSystem(m.compartments(), std::move(rhs), m.params());
}

namespace {

HamiltonianSystem canonical_from_rhs(const std::vector<std::string>& vars,
                                     std::vector<Expr> rhs, const Params& params,
                                     int d) {
    const int n = static_cast<int>(vars.size());

    // x^M = 1 - sum(others)
    Expr replacement = Expr::constant(1.0);
    for (int i = 0; i < n; ++i)
        if (i != d) replacement = replacement - Expr::variable(vars[static_cast<std::size_t>(i)]);

    std::map<std::pair<int, int>, Expr> entries;
    for (int mu = 0; mu < n; ++mu) {
        if (mu == d) continue;
        Expr f = rhs[static_cast<std::size_t>(mu)].substitute(vars[static_cast<std::size_t>(d)], replacement);
        if (f.depends_on(vars[static_cast<std::size_t>(d)]))
            throw DomainError("right-hand side of " + vars[static_cast<std::size_t>(mu)] +
                              " still depends on distinguished compartment " +
                              vars[static_cast<std::size_t>(d)] + " after substitution");
        if (f.is_zero()) continue;
        if (mu < d)
            entries.emplace(std::make_pair(mu, d), f);
        else
            entries.emplace(std::make_pair(d, mu), -f);
    }

    Expr h;
    for (const auto& v : vars) h = h + Expr::variable(v);
    return HamiltonianSystem(PoissonStructure(vars, std::move(entries)), h, params);
}

} // namespace

HamiltonianSystem canonical_poisson(const CompartmentalModel& m) {
    OdeSystem sys = to_ode(m);
    return canonical_from_rhs(sys.variables(), sys.rhs(), sys.params(),
                              m.index_of(m.distinguished()));
}

HamiltonianSystem canonical_poisson(const OdeSystem& sys,
                                    const std::string& distinguished) {
    // Raw right-hand sides carry no construction guarantee; verify the
    // zero-sum property numerically before building the structure.
    auto rng = make_rng(0);
    auto pts = box_points(static_cast<int>(sys.variables().size()), 100, rng);
    for (const auto& p : pts) {
        auto f = sys.eval_rhs(p);
        double sum = 0.0;
        for (double v : f) sum += v;
        if (std::fabs(sum) > 1e-10)
            throw ValidationError(
                "right-hand sides do not sum to zero (population not conserved)");
    }
    int d = -1;
    for (std::size_t i = 0; i < sys.variables().size(); ++i)
        if (sys.variables()[i] == distinguished) d = static_cast<int>(i);
    if (d < 0) throw ValidationError("unknown distinguished variable '" + distinguished + "'");
    return canonical_from_rhs(sys.variables(), sys.rhs(), sys.params(), d);
}

namespace models {

namespace {

void require_nonnegative(const char* name, double value) {
    if (value < 0.0)
        throw ValidationError(std::string(name) + " must be non-negative, got " +
                              std::to_string(value));
}

const Expr S = Expr::variable("S");
const Expr I = Expr::variable("I");
const Expr R = Expr::variable("R");

} // namespace

CompartmentalModel sir(double alpha, double beta) {
    require_nonnegative("alpha", alpha);
    require_nonnegative("beta", beta);
    return CompartmentalModel(
        {"S", "I", "R"}, {{"alpha", alpha}, {"beta", beta}},
        {{"S", "I", Expr::parameter("beta") * S * I},
         {"I", "R", Expr::parameter("alpha") * I}});
}

CompartmentalModel generalized_sir(double alpha, const Expr& beta_expr,
                                   const Expr& phi1, const Expr& phi2,
                                   Params extra_params) {
    require_nonnegative("alpha", alpha);
    Params params = std::move(extra_params);
    params["alpha"] = alpha;
    std::vector<Flow> flows{{"S", "I", beta_expr * S * I},
                            {"I", "R", Expr::parameter("alpha") * I}};
    if (!phi1.is_zero()) flows.push_back({"R", "S", phi1});
    if (!phi2.is_zero()) flows.push_back({"R", "I", phi2});
    return CompartmentalModel({"S", "I", "R"}, std::move(params), std::move(flows));
}

CompartmentalModel sirs_endemic(double alpha, double beta, double mu) {
    require_nonnegative("beta", beta);
    require_nonnegative("mu", mu);
    Expr m = Expr::parameter("mu");
    return generalized_sir(alpha, Expr::parameter("beta"), m * I, -(m * I),
                           {{"beta", beta}, {"mu", mu}});
}

CompartmentalModel sir_vacc_i(double alpha, double beta, double v) {
    require_nonnegative("beta", beta);
    require_nonnegative("v", v);
    return generalized_sir(alpha, Expr::parameter("beta"),
                           -(Expr::parameter("v") * I), Expr(),
                           {{"beta", beta}, {"v", v}});
}

CompartmentalModel sir_vacc_s(double alpha, double beta, double v) {
    require_nonnegative("beta", beta);
    require_nonnegative("v", v);
    return generalized_sir(alpha, Expr::parameter("beta"),
                           -(Expr::parameter("v") * S), Expr(),
                           {{"beta", beta}, {"v", v}});
}

CompartmentalModel sir_vital(double alpha, double beta, double d_s, double d_i,
                             double d_r) {
    require_nonnegative("alpha", alpha);
    require_nonnegative("beta", beta);
    require_nonnegative("d_S", d_s);
    require_nonnegative("d_I", d_i);
    require_nonnegative("d_R", d_r);
    // Deaths d_X * X leave each compartment and the matching births re-enter
    // S; the d_S S terms cancel, leaving net arrows I -> S and R -> S.
    return CompartmentalModel(
        {"S", "I", "R"},
        {{"alpha", alpha}, {"beta", beta}, {"d_S", d_s}, {"d_I", d_i}, {"d_R", d_r}},
        {{"S", "I", Expr::parameter("beta") * S * I},
         {"I", "R", Expr::parameter("alpha") * I},
         {"I", "S", Expr::parameter("d_I") * I},
         {"R", "S", Expr::parameter("d_R") * R}});
}

CompartmentalModel seir(double alpha, double beta, double eps, const Expr& phi1,
                        const Expr& phi2, const Expr& phi3, Params extra_params) {
    require_nonnegative("alpha", alpha);
    require_nonnegative("beta", beta);
    require_nonnegative("eps", eps);
    Params params = std::move(extra_params);
    params["alpha"] = alpha;
    params["beta"] = beta;
    params["eps"] = eps;
    const Expr E = Expr::variable("E");
    std::vector<Flow> flows{{"S", "E", Expr::parameter("beta") * S * I},
                            {"E", "I", Expr::parameter("eps") * E},
                            {"I", "R", Expr::parameter("alpha") * I}};
    if (!phi1.is_zero()) flows.push_back({"R", "S", phi1});
    if (!phi2.is_zero()) flows.push_back({"R", "E", phi2});
    if (!phi3.is_zero()) flows.push_back({"R", "I", phi3});
    return CompartmentalModel({"S", "E", "I", "R"}, std::move(params), std::move(flows));
}

CompartmentalModel rescale_nonconstant(double alpha, double beta, const Expr& phi1,
                                       const Expr& phi2, double b, double d,
                                       Params extra_params) {
    require_nonnegative("b", b);
    require_nonnegative("d", d);
    for (const Expr* phi : {&phi1, &phi2}) {
        if (phi->depends_on("R"))
            throw ValidationError("transfer functions must depend only on S and I");
        for (const char* x : {"S", "I"})
            for (const char* y : {"S", "I"})
                if (!phi->diff(x).diff(y).is_zero())
                    throw ValidationError(
                        "rescaling requires linear transfer functions; got a "
                        "nonlinear term in " + phi->str());
    }
    Expr phi1_t = Expr::constant(b) - Expr::constant(d) * S + phi1 -
                  Expr::constant(b - d) * S;
    Expr phi2_t = -(Expr::constant(d) * I) + phi2 - Expr::constant(b - d) * I;
    Params params = std::move(extra_params);
    params["beta"] = beta;
    params["b"] = b;
    params["d"] = d;
    return generalized_sir(alpha, Expr::parameter("beta"), phi1_t, phi2_t,
                           std::move(params));
}

} // namespace models

} // namespace hamepi

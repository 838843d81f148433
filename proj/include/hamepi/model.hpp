#ifndef HAMEPI_MODEL_HPP
#define HAMEPI_MODEL_HPP

#include <string>
#include <vector>

#include "hamepi/poisson.hpp"

namespace hamepi {

/// A directed transfer between compartments. Contributes -rate to the source
/// and +rate to the target of the induced ODE, so the total population is
/// conserved by construction.
struct Flow {
    std::string from;
    std::string to;
    Expr rate;
};

/// Compartments + parameters + flow arrows. The distinguished compartment
/// (default: last listed) carries the non-trivial brackets of the canonical
/// Poisson structure.
class CompartmentalModel {
public:
    CompartmentalModel(std::vector<std::string> compartments, Params params,
                       std::vector<Flow> flows, std::string distinguished = "");

    const std::vector<std::string>& compartments() const { return compartments_; }
    const Params& params() const { return params_; }
    const std::vector<Flow>& flows() const { return flows_; }
    const std::string& distinguished() const { return distinguished_; }
    int index_of(const std::string& name) const;

    CompartmentalModel with_distinguished(std::string name) const;

private:
    std::vector<std::string> compartments_;
    Params params_;
    std::vector<Flow> flows_;
    std::string distinguished_;
};

/// Explicit right-hand sides, one Expr per variable. For models built from
/// flows the right-hand sides sum to zero identically.
class OdeSystem {
public:
    OdeSystem(std::vector<std::string> variables, std::vector<Expr> rhs, Params params);

    const std::vector<std::string>& variables() const { return vars_; }
    const std::vector<Expr>& rhs() const { return rhs_; }
    const Params& params() const { return params_; }

    std::vector<double> eval_rhs(std::span<const double> state) const;
    std::vector<CompiledExpr> compile() const;

private:
    std::vector<std::string> vars_;
    std::vector<Expr> rhs_;
    Params params_;
};

/// x_dot^A = (flows into A) - (flows out of A).
OdeSystem to_ode(const CompartmentalModel& m);

/// The canonical structure: after substituting the distinguished compartment
/// x^M = 1 - sum(others) into every right-hand side, {x^mu, x^nu} = 0 for
/// mu,nu != M and {x^mu, x^M} = f^mu, with H = sum of all compartments.
/// Throws DomainError if a right-hand side still depends on x^M after the
/// substitution (naming the offending component).
HamiltonianSystem canonical_poisson(const CompartmentalModel& m);

/// Same construction from raw right-hand sides. The zero-sum property is
/// checked numerically (it is a construction guarantee only for flow models).
HamiltonianSystem canonical_poisson(const OdeSystem& sys,
                                    const std::string& distinguished);

namespace models {

/// Original SIR: S -> I at beta*S*I, I -> R at alpha*I.
CompartmentalModel sir(double alpha, double beta);

/// Generalized SIR: transmission rate beta_expr (an arbitrary expression in
/// S and I, typically of the form phi(S+I)/(S+I)), plus return flows R -> S
/// at phi1(S,I) and R -> I at phi2(S,I).
CompartmentalModel generalized_sir(double alpha, const Expr& beta_expr,
                                   const Expr& phi1, const Expr& phi2,
                                   Params extra_params = {});

/// Endemic SIRS: non-permanent immunity, R -> S return at mu*I.
CompartmentalModel sirs_endemic(double alpha, double beta, double mu);

/// SIR with vaccination at rate v*I (susceptibles move directly to R).
CompartmentalModel sir_vacc_i(double alpha, double beta, double v);

/// SIR with vaccination at rate v*S.
CompartmentalModel sir_vacc_s(double alpha, double beta, double v);

/// SIR with vital dynamics: per-compartment death rates d_S, d_I, d_R and a
/// birth inflow d_S*S + d_I*I + d_R*R into S keeping the population constant.
CompartmentalModel sir_vital(double alpha, double beta, double d_s, double d_i,
                             double d_r);

/// Generalized SEIR: S -> E at beta*S*I, E -> I at eps*E, I -> R at alpha*I,
/// plus return flows R -> {S,E,I} at phi1, phi2, phi3 (expressions in S,E,I).
CompartmentalModel seir(double alpha, double beta, double eps, const Expr& phi1,
                        const Expr& phi2, const Expr& phi3, Params extra_params = {});

/// Reduction of an exponentially growing population (birth rate b, death rate
/// d) to a constant-population model in fraction variables. phi1 and phi2
/// must be linear in S and I; the transformed transfer functions are
/// phi1~ = b - d*s + phi1 - (b-d)*s and phi2~ = -d*i + phi2 - (b-d)*i.
CompartmentalModel rescale_nonconstant(double alpha, double beta, const Expr& phi1,
                                       const Expr& phi2, double b, double d,
                                       Params extra_params = {});

} // namespace models

} // namespace hamepi

#endif

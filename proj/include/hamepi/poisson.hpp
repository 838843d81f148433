#ifndef HAMEPI_POISSON_HPP
#define HAMEPI_POISSON_HPP

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hamepi/expr.hpp"

namespace hamepi {

/// Skew-symmetric bracket matrix pi^{mu,nu} with Expr entries. Only the upper
/// triangle (mu < nu) is stored; the lower triangle and diagonal follow from
/// skew-symmetry, so the structure cannot fail to be skew. The Jacobi cyclic
/// sums {{x_i,x_j},x_k} + cyc are derived symbolically once at construction
/// and evaluated pointwise afterwards.
class PoissonStructure {
public:
    PoissonStructure(std::vector<std::string> variables,
                     std::map<std::pair<int, int>, Expr> upper_entries);

    /// Convenience: entries given by variable-name pairs, e.g. {"S","R",expr}.
    static PoissonStructure from_brackets(
        std::vector<std::string> variables,
        const std::vector<std::tuple<std::string, std::string, Expr>>& brackets);

    int dim() const { return static_cast<int>(vars_.size()); }
    const std::vector<std::string>& variables() const { return vars_; }
    int index_of(const std::string& name) const;

    /// Signed entry pi^{ij}; zero Expr when not stored.
    Expr entry(int i, int j) const;
    const std::map<std::pair<int, int>, Expr>& upper_entries() const { return entries_; }

    /// {f, g} = sum_{i<j} pi^{ij} (d_i f d_j g - d_j f d_i g), symbolically.
    Expr bracket(const Expr& f, const Expr& g) const;

    /// One cyclic Jacobi sum per index triple i<j<k, in lexicographic order.
    const std::vector<Expr>& jacobi_sums() const { return jacobi_sums_; }

    /// max over triples of |{{x_i,x_j},x_k} + cyc| at one state point.
    double jacobi_residual(std::span<const double> state, const Params& params) const;

private:
    std::vector<std::string> vars_;
    std::map<std::pair<int, int>, Expr> entries_;
    std::vector<Expr> jacobi_sums_;
};

/// A Poisson structure paired with a Hamiltonian function and bound parameter
/// values. The induced vector field components {x_mu, H} are derived
/// symbolically at construction.
class HamiltonianSystem {
public:
    HamiltonianSystem(PoissonStructure structure, Expr hamiltonian, Params params);

    const PoissonStructure& structure() const { return structure_; }
    const Expr& hamiltonian() const { return hamiltonian_; }
    const Params& params() const { return params_; }
    const std::vector<Expr>& field_exprs() const { return field_; }

    std::vector<double> vector_field(std::span<const double> state) const;
    std::vector<CompiledExpr> compile_field() const;

private:
    PoissonStructure structure_;
    Expr hamiltonian_;
    Params params_;
    std::vector<Expr> field_; // component mu = {x_mu, H}
};

struct CheckResult {
    bool ok = false;
    double max_defect = 0.0;
};

/// max Jacobi residual over a point set (entries compiled once).
double max_jacobi_residual(const PoissonStructure& ps, const Params& params,
                           const std::vector<std::vector<double>>& points);

/// Checks pi#(dc) = 0: defect is max over samples and components of
/// |sum_nu pi^{mu nu} d_nu c|.
CheckResult is_casimir(const PoissonStructure& ps, const Expr& c,
                       const std::vector<std::vector<double>>& samples,
                       double tol, const Params& params);

/// Entrywise (1-lambda) pi1 + lambda pi2. Dimensions and variable order must
/// match.
PoissonStructure pencil(const PoissonStructure& ps1, const PoissonStructure& ps2,
                        double lambda);

/// Compatibility: the entrywise sum pi1 + pi2 must satisfy Jacobi at samples.
CheckResult check_compatibility(const PoissonStructure& ps1,
                                const PoissonStructure& ps2,
                                const std::vector<std::vector<double>>& samples,
                                double tol, const Params& params);

/// Two Hamiltonian descriptions of the same flow. Verified means the vector
/// fields agree and the structures are compatible.
class BiHamiltonianPair {
public:
    BiHamiltonianPair(HamiltonianSystem first, HamiltonianSystem second)
        : first_(std::move(first)), second_(std::move(second)) {}

    const HamiltonianSystem& first() const { return first_; }
    const HamiltonianSystem& second() const { return second_; }

    /// max over points and components of |X1 - X2|.
    double max_field_mismatch(const std::vector<std::vector<double>>& points) const;

    CheckResult compatible(const std::vector<std::vector<double>>& points,
                           double tol) const;

private:
    HamiltonianSystem first_, second_;
};

} // namespace hamepi

#endif

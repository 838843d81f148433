#ifndef HAMEPI_COUPLING_HPP
#define HAMEPI_COUPLING_HPP

#include "hamepi/model.hpp"

namespace hamepi {

/// N populations, each an M-compartment constant-population model, coupled by
/// transfer functions tau_{ab} acting between the distinguished compartments:
/// {x^mu_a, x^M_a} = f^mu_a and {x^M_a, x^M_b} = -tau_{ab}, everything else
/// zero. Variables and per-population parameters carry a _a suffix (1-based
/// population index); shared parameters stay unsuffixed. Only a<b transfers
/// are stored, so tau_{ba} = -tau_{ab} holds structurally and the grand total
/// population is conserved by skew-symmetry.
class InteractingSystem {
public:
    /// Transfer keys are 0-based (a,b) population pairs. Either orientation
    /// may be given (the stored entry is negated for a>b), but not both.
    /// tau_{ab} may reference only non-distinguished variables of populations
    /// a and b (by their suffixed names) plus parameters.
    static InteractingSystem couple(const std::vector<CompartmentalModel>& models,
                                    const std::map<std::pair<int, int>, Expr>& transfers,
                                    Params shared_params = {});

    int populations() const { return n_pop_; }
    int compartments_per_population() const { return m_; }
    const HamiltonianSystem& system() const { return sys_; }
    const std::vector<std::string>& variables() const { return sys_.structure().variables(); }

    /// Signed transfer tau_{ab} (zero Expr if none); tau_{ba} = -tau_{ab}.
    Expr transfer(int a, int b) const;
    const std::map<std::pair<int, int>, Expr>& stored_transfers() const { return transfers_; }

    /// Combined index of population a's distinguished compartment.
    int distinguished_index(int a) const { return distinguished_[static_cast<std::size_t>(a)]; }

    /// Per-population totals N_a = sum of population a's compartments.
    std::vector<double> population_totals(std::span<const double> state) const;

private:
    InteractingSystem(int n_pop, int m, std::vector<int> distinguished,
                      std::map<std::pair<int, int>, Expr> transfers,
                      HamiltonianSystem sys)
        : n_pop_(n_pop), m_(m), distinguished_(std::move(distinguished)),
          transfers_(std::move(transfers)), sys_(std::move(sys)) {}

    int n_pop_;
    int m_;
    std::vector<int> distinguished_;
    std::map<std::pair<int, int>, Expr> transfers_;
    HamiltonianSystem sys_;
};

/// Net outflow sum_{k != a} tau_{ak}(state) for each population along a stored
/// trajectory; row a, column t. Satisfies d/dt N_a + outflow_a = 0 along exact
/// solutions of the coupled system.
std::vector<std::vector<double>> per_population_balance(
    const InteractingSystem& sys, const std::vector<std::vector<double>>& states);

} // namespace hamepi

#endif

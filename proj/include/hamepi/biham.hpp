#ifndef HAMEPI_BIHAM_HPP
#define HAMEPI_BIHAM_HPP

#include "hamepi/coupling.hpp"

namespace hamepi {

/// Cataloged first structures with known Casimir functions.
enum class StructureId { Sir, Sirs, VaccI, VaccS };

/// Model families with a known second Hamiltonian description.
enum class PairKind { Sirs, VaccI, VaccS };

/// Endemic SIRS: first structure canonical with H1 = S+I+R; second structure
/// has brackets proportional to I*(beta*S - mu) with H2 = -(R +
/// (alpha/beta) log(beta*S - mu)). H2 needs beta*S - mu > 0. mu = 0 recovers
/// the classic SIR pair.
BiHamiltonianPair sirs_pair(double alpha, double beta, double mu);

/// Vaccination at rate v*I: second brackets proportional to I*(beta*S + v),
/// H2 = -(R + ((alpha+v)/beta) log(beta*S + v)).
BiHamiltonianPair vacc_i_pair(double alpha, double beta, double v);

/// Vaccination at rate v*S: second structure is the classic {S,I}2 = -beta*S*I
/// block, H2 = -(R + (alpha/beta) log S - (v/beta) log I). Needs S, I > 0.
BiHamiltonianPair vacc_s_pair(double alpha, double beta, double v);

/// N coupled copies of one pair kind. Transfers must be constant reals
/// (0-based a<b keys, the other orientation is the negative); the second
/// structure adds {R_a, R_b}2 = tau_ab and H2 sums the per-population terms.
BiHamiltonianPair coupled_pair(PairKind kind, const std::vector<Params>& per_population,
                               const std::map<std::pair<int, int>, double>& tau);

/// A Casimir of the cataloged first structure, written without the
/// distinguished compartment R and normalized so C(S0, 1-S0, 0) = 0. Level
/// set C = 0 is the trajectory through that initial state. Parameter leaves
/// (alpha, beta, mu, v) stay symbolic; bind them at evaluation time.
Expr casimir_of(StructureId id, double s0);

} // namespace hamepi

#endif

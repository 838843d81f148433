#ifndef HAMEPI_JSON_IO_HPP
#define HAMEPI_JSON_IO_HPP

#include <json.hpp>

#include "hamepi/coupling.hpp"

namespace hamepi {

/// {"compartments": ["S","I","R"], "params": {"beta": 1.0, ...},
///  "flows": [{"from": "S", "to": "I", "rate": "beta*S*I"}, ...],
///  "distinguished": "R"}   (distinguished optional, defaults to last)
/// Rate expressions are parsed with the compartment list as the variable set;
/// every other identifier must appear in "params".
CompartmentalModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const CompartmentalModel& m);

/// {"dim": 3, "vars": ["S","I","R"], "brackets": {"S,I": "expr", ...}}
/// listing only upper-triangle entries by variable-name pair.
PoissonStructure poisson_from_json(const nlohmann::json& j);
nlohmann::json poisson_to_json(const PoissonStructure& ps);

/// {"populations": [model, ...],
///  "transfers": [{"a": 1, "b": 2, "rate": "kappa*(S_1+S_2+I_1-I_2)"}],
///  "params": {"kappa": 0.1}}
/// Population indices are 1-based; transfer expressions use the suffixed
/// variable names.
InteractingSystem coupling_from_json(const nlohmann::json& j);

} // namespace hamepi

#endif

#include "hamepi/json_io.hpp"

#include <set>

namespace hamepi {

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ValidationError(where + ": missing required field '" + key + "'");
    return *it;
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ValidationError(where + ": expected a non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string())
            throw ValidationError(where + ": expected a string");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Params params_from(const json& j, const std::string& where) {
    Params params;
    if (j.is_null()) return params;
    if (!j.is_object())
        throw ValidationError(where + ": expected an object of numbers");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number())
            throw ValidationError(where + "." + it.key() + ": expected a number");
        params[it.key()] = it.value().get<double>();
    }
    return params;
}

Expr parse_rate(const std::string& text, const std::vector<std::string>& variables,
                const Params& params, const std::string& where) {
    std::set<std::string> vars(variables.begin(), variables.end());
    Expr e;
    try {
        e = Expr::parse(text, vars);
    } catch (const ParseError& err) {
        throw ValidationError(where + ": " + err.what());
    }
    std::set<std::string> used_vars, used_params;
    e.collect_names(used_vars, used_params);
    for (const auto& p : used_params)
        if (!params.count(p))
            throw ValidationError(where + ": unknown parameter '" + p + "'");
    return e;
}

} // namespace

CompartmentalModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("model: expected an object");
    auto compartments = string_list(need(j, "compartments", "model"), "model.compartments");
    Params params = params_from(j.value("params", json::object()), "model.params");

    std::vector<Flow> flows;
    const json& jflows = need(j, "flows", "model");
    if (!jflows.is_array()) throw ValidationError("model.flows: expected an array");
    int k = 0;
    for (const auto& f : jflows) {
        std::string where = "model.flows[" + std::to_string(k++) + "]";
        if (!f.is_object()) throw ValidationError(where + ": expected an object");
        std::string from = need(f, "from", where).get<std::string>();
        std::string to = need(f, "to", where).get<std::string>();
        std::string rate = need(f, "rate", where).get<std::string>();
        flows.push_back({from, to, parse_rate(rate, compartments, params, where + ".rate")});
    }

    std::string distinguished = j.value("distinguished", std::string());
    return CompartmentalModel(std::move(compartments), std::move(params),
                              std::move(flows), std::move(distinguished));
}

nlohmann::json model_to_json(const CompartmentalModel& m) {
    json j;
    j["compartments"] = m.compartments();
    j["params"] = json::object();
    for (const auto& [k, v] : m.params()) j["params"][k] = v;
    j["flows"] = json::array();
    for (const Flow& f : m.flows())
        j["flows"].push_back({{"from", f.from}, {"to", f.to}, {"rate", f.rate.str()}});
    j["distinguished"] = m.distinguished();
    return j;
}

PoissonStructure poisson_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("poisson: expected an object");
    auto vars = string_list(need(j, "vars", "poisson"), "poisson.vars");
    if (j.contains("dim") && j["dim"].get<int>() != static_cast<int>(vars.size()))
        throw ValidationError("poisson.dim: does not match the number of vars");

    std::set<std::string> varset(vars.begin(), vars.end());
    std::vector<std::tuple<std::string, std::string, Expr>> brackets;
    const json& jb = need(j, "brackets", "poisson");
    if (!jb.is_object()) throw ValidationError("poisson.brackets: expected an object");
    for (auto it = jb.begin(); it != jb.end(); ++it) {
        std::string key = it.key();
        auto comma = key.find(',');
        if (comma == std::string::npos)
            throw ValidationError("poisson.brackets: key '" + key +
                                  "' must be of the form 'A,B'");
        std::string a = key.substr(0, comma), b = key.substr(comma + 1);
        Expr e;
        try {
            e = Expr::parse(it.value().get<std::string>(), varset);
        } catch (const ParseError& err) {
            throw ValidationError("poisson.brackets['" + key + "']: " + err.what());
        }
        brackets.emplace_back(a, b, e);
    }
    return PoissonStructure::from_brackets(std::move(vars), brackets);
}

nlohmann::json poisson_to_json(const PoissonStructure& ps) {
    json j;
    j["dim"] = ps.dim();
    j["vars"] = ps.variables();
    j["brackets"] = json::object();
    for (const auto& [idx, e] : ps.upper_entries()) {
        std::string key = ps.variables()[static_cast<std::size_t>(idx.first)] + "," +
                          ps.variables()[static_cast<std::size_t>(idx.second)];
        j["brackets"][key] = e.str();
    }
    return j;
}

InteractingSystem coupling_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("coupling: expected an object");
    const json& jpops = need(j, "populations", "coupling");
    if (!jpops.is_array() || jpops.empty())
        throw ValidationError("coupling.populations: expected a non-empty array");

    std::vector<CompartmentalModel> models;
    for (const auto& jm : jpops) models.push_back(model_from_json(jm));
    Params shared = params_from(j.value("params", json::object()), "coupling.params");

    // Combined variable names, for parsing transfer expressions.
    std::vector<std::string> combined;
    for (std::size_t a = 0; a < models.size(); ++a)
        for (const auto& v : models[a].compartments())
            combined.push_back(v + "_" + std::to_string(a + 1));
    std::set<std::string> varset(combined.begin(), combined.end());

    std::map<std::pair<int, int>, Expr> transfers;
    const json& jt = j.value("transfers", json::array());
    if (!jt.is_array()) throw ValidationError("coupling.transfers: expected an array");
    int k = 0;
    for (const auto& t : jt) {
        std::string where = "coupling.transfers[" + std::to_string(k++) + "]";
        if (!t.is_object()) throw ValidationError(where + ": expected an object");
        int a = need(t, "a", where).get<int>();
        int b = need(t, "b", where).get<int>();
        if (a < 1 || b < 1 || a > static_cast<int>(models.size()) ||
            b > static_cast<int>(models.size()) || a == b)
            throw ValidationError(where + ": population indices out of range");
        Expr e;
        try {
            e = Expr::parse(need(t, "rate", where).get<std::string>(), varset);
        } catch (const ParseError& err) {
            throw ValidationError(where + ".rate: " + err.what());
        }
        auto key = std::make_pair(a - 1, b - 1);
        if (transfers.count(key) || transfers.count({b - 1, a - 1}))
            throw ValidationError(where + ": transfer between populations " +
                                  std::to_string(a) + " and " + std::to_string(b) +
                                  " given more than once");
        transfers.emplace(key, e);
    }
    return InteractingSystem::couple(models, transfers, std::move(shared));
}

} // namespace hamepi

#ifndef HAMEPI_EXPR_HPP
#define HAMEPI_EXPR_HPP

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamepi/errors.hpp"

namespace hamepi {

using Params = std::map<std::string, double>;

/// Name -> value bindings used when evaluating an Expr. Variables and
/// parameters live in separate maps; every name referenced by the expression
/// must be bound, otherwise evaluation throws UnboundNameError.
class Environment {
public:
    Environment() = default;
    Environment(std::map<std::string, double> variables, Params parameters)
        : vars_(std::move(variables)), params_(std::move(parameters)) {}

    void set_variable(const std::string& name, double value) { vars_[name] = value; }
    void set_parameter(const std::string& name, double value) { params_[name] = value; }

    /// Looks up a name in both maps (variables first). Null if unbound.
    const double* find(const std::string& name) const {
        if (auto it = vars_.find(name); it != vars_.end()) return &it->second;
        if (auto it = params_.find(name); it != params_.end()) return &it->second;
        return nullptr;
    }

    const std::map<std::string, double>& variables() const { return vars_; }
    const Params& parameters() const { return params_; }

private:
    std::map<std::string, double> vars_;
    Params params_;
};

/// An Expr resolved against a fixed variable ordering and parameter set,
/// flattened to a postfix program over doubles. Evaluation takes a state
/// vector indexed by the variable ordering given at compile time.
class CompiledExpr {
public:
    double operator()(std::span<const double> state) const;

    enum class Op : unsigned char {
        PushConst, PushVar, Add, Sub, Mul, Div, Pow, Neg, Log, Exp
    };
    struct Instr {
        Op op;
        double value = 0.0; // PushConst / Pow exponent
        int index = 0;      // PushVar
    };

private:
    friend class Expr;
    std::vector<Instr> code_;
};

/// Immutable arithmetic expression tree over named variables and parameters.
/// Node kinds: constant, variable, parameter, {+,-,*,/,^}, {neg, log, exp}.
/// Exponents of ^ are restricted to real constants. Smart constructors apply
/// light simplification (0*x -> 0, x+0 -> x, 1*x -> x, constant folding).
class Expr {
public:
    /// The zero expression.
    Expr();

    static Expr constant(double value);
    static Expr variable(std::string name);
    static Expr parameter(std::string name);

    /// Parses infix text. Identifiers listed in `variables` become variable
    /// leaves; all other identifiers become parameters.
    static Expr parse(std::string_view text, const std::set<std::string>& variables);

    /// Convenience overload: identifiers starting with an uppercase letter
    /// become variables (S, I, R, E, S_1, ...), the rest parameters.
    static Expr parse(std::string_view text);

    double eval(const Environment& env) const;

    /// Exact symbolic partial derivative with respect to a variable name.
    /// Constants and parameters differentiate to zero.
    Expr diff(const std::string& var) const;

    /// Replaces every leaf (variable or parameter) named `name`.
    Expr substitute(const std::string& name, const Expr& replacement) const;

    /// Renames variable/parameter leaves according to the map.
    Expr rename(const std::map<std::string, std::string>& mapping) const;

    /// True if any leaf carries this name.
    bool depends_on(const std::string& name) const;

    void collect_names(std::set<std::string>& variables,
                       std::set<std::string>& parameters) const;

    bool is_constant() const;
    /// Valid only when is_constant().
    double constant_value() const;
    bool is_zero() const;

    std::string str() const;

    /// Resolves variable names to indices in `state_vars` and parameter names
    /// to values from `params`. Unknown names throw UnboundNameError here.
    CompiledExpr compile(std::span<const std::string> state_vars,
                         const Params& params) const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);

    static Expr pow(const Expr& base, double exponent);
    static Expr log(const Expr& arg);
    static Expr exp(const Expr& arg);

    // Node layout is an implementation detail (defined in expr.cpp).
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

private:
    explicit Expr(NodePtr node) : node_(std::move(node)) {}
    NodePtr node_;
};

inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }

} // namespace hamepi

#endif

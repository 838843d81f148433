#include "hamepi/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace hamepi {

enum class NodeKind : unsigned char {
    Constant, Variable, Parameter, Add, Sub, Mul, Div, Pow, Neg, Log, Exp
};

struct Expr::Node {
    NodeKind kind;
    double value = 0.0;   // Constant
    std::string name;     // Variable / Parameter
    NodePtr a, b;         // children; Pow stores the exponent in b (Constant)
};

namespace {

Expr::NodePtr make_node(NodeKind kind, double value, std::string name,
                        Expr::NodePtr a, Expr::NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = kind;
    n->value = value;
    n->name = std::move(name);
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

} // namespace

Expr::Expr() : node_(make_node(NodeKind::Constant, 0.0, {}, nullptr, nullptr)) {}

Expr Expr::constant(double value) {
    return Expr(make_node(NodeKind::Constant, value, {}, nullptr, nullptr));
}

Expr Expr::variable(std::string name) {
    return Expr(make_node(NodeKind::Variable, 0.0, std::move(name), nullptr, nullptr));
}

Expr Expr::parameter(std::string name) {
    return Expr(make_node(NodeKind::Parameter, 0.0, std::move(name), nullptr, nullptr));
}

bool Expr::is_constant() const { return node_->kind == NodeKind::Constant; }

double Expr::constant_value() const { return node_->value; }

bool Expr::is_zero() const { return is_constant() && node_->value == 0.0; }

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant())
        return Expr::constant(a.constant_value() + b.constant_value());
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return Expr(make_node(NodeKind::Add, 0.0, {}, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant())
        return Expr::constant(a.constant_value() - b.constant_value());
    if (b.is_zero()) return a;
    if (a.is_zero()) return -b;
    return Expr(make_node(NodeKind::Sub, 0.0, {}, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant())
        return Expr::constant(a.constant_value() * b.constant_value());
    if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
    if (a.is_constant() && a.constant_value() == 1.0) return b;
    if (b.is_constant() && b.constant_value() == 1.0) return a;
    return Expr(make_node(NodeKind::Mul, 0.0, {}, a.node_, b.node_));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_constant() && b.constant_value() == 1.0) return a;
    if (a.is_zero() && !b.is_zero()) return Expr::constant(0.0);
    if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
        return Expr::constant(a.constant_value() / b.constant_value());
    return Expr(make_node(NodeKind::Div, 0.0, {}, a.node_, b.node_));
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.constant_value());
    if (a.node_->kind == NodeKind::Neg) return Expr(a.node_->a);
    return Expr(make_node(NodeKind::Neg, 0.0, {}, a.node_, nullptr));
}

Expr Expr::pow(const Expr& base, double exponent) {
    if (exponent == 1.0) return base;
    if (exponent == 0.0) return Expr::constant(1.0);
    if (base.is_constant()) return Expr::constant(std::pow(base.constant_value(), exponent));
    return Expr(make_node(NodeKind::Pow, 0.0, {}, base.node_,
                          Expr::constant(exponent).node_));
}

Expr Expr::log(const Expr& arg) {
    if (arg.is_constant() && arg.constant_value() > 0.0)
        return Expr::constant(std::log(arg.constant_value()));
    return Expr(make_node(NodeKind::Log, 0.0, {}, arg.node_, nullptr));
}

Expr Expr::exp(const Expr& arg) {
    if (arg.is_constant()) return Expr::constant(std::exp(arg.constant_value()));
    return Expr(make_node(NodeKind::Exp, 0.0, {}, arg.node_, nullptr));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Expr::Node& n, const Environment& env) {
    switch (n.kind) {
    case NodeKind::Constant:
        return n.value;
    case NodeKind::Variable:
    case NodeKind::Parameter: {
        const double* v = env.find(n.name);
        if (!v) throw UnboundNameError(n.name);
        return *v;
    }
    case NodeKind::Add: return eval_node(*n.a, env) + eval_node(*n.b, env);
    case NodeKind::Sub: return eval_node(*n.a, env) - eval_node(*n.b, env);
    case NodeKind::Mul: return eval_node(*n.a, env) * eval_node(*n.b, env);
    case NodeKind::Div: {
        double num = eval_node(*n.a, env);
        double den = eval_node(*n.b, env);
        if (den == 0.0) throw DivisionByZeroError();
        return num / den;
    }
    case NodeKind::Pow:
        return std::pow(eval_node(*n.a, env), n.b->value);
    case NodeKind::Neg: return -eval_node(*n.a, env);
    case NodeKind::Log: {
        double x = eval_node(*n.a, env);
        if (x <= 0.0) throw LogDomainError(x);
        return std::log(x);
    }
    case NodeKind::Exp: return std::exp(eval_node(*n.a, env));
    }
    throw Error("corrupt expression node");
}

} // namespace

double Expr::eval(const Environment& env) const { return eval_node(*node_, env); }

// ---------------------------------------------------------------------------
// Differentiation

Expr Expr::diff(const std::string& var) const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Constant:
    case NodeKind::Parameter:
        return Expr::constant(0.0);
    case NodeKind::Variable:
        return Expr::constant(n.name == var ? 1.0 : 0.0);
    case NodeKind::Add: return Expr(n.a).diff(var) + Expr(n.b).diff(var);
    case NodeKind::Sub: return Expr(n.a).diff(var) - Expr(n.b).diff(var);
    case NodeKind::Mul:
        return Expr(n.a).diff(var) * Expr(n.b) + Expr(n.a) * Expr(n.b).diff(var);
    case NodeKind::Div: {
        Expr a(n.a), b(n.b);
        return (a.diff(var) * b - a * b.diff(var)) / (b * b);
    }
    case NodeKind::Pow: {
        Expr base(n.a);
        double k = n.b->value;
        return Expr::constant(k) * Expr::pow(base, k - 1.0) * base.diff(var);
    }
    case NodeKind::Neg: return -Expr(n.a).diff(var);
    case NodeKind::Log: {
        Expr a(n.a);
        return a.diff(var) / a;
    }
    case NodeKind::Exp: {
        Expr a(n.a);
        return a.diff(var) * Expr::exp(a);
    }
    }
    throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Substitution / renaming / inspection

Expr Expr::substitute(const std::string& name, const Expr& replacement) const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Constant: return *this;
    case NodeKind::Variable:
    case NodeKind::Parameter:
        return n.name == name ? replacement : *this;
    case NodeKind::Add: return Expr(n.a).substitute(name, replacement) + Expr(n.b).substitute(name, replacement);
    case NodeKind::Sub: return Expr(n.a).substitute(name, replacement) - Expr(n.b).substitute(name, replacement);
    case NodeKind::Mul: return Expr(n.a).substitute(name, replacement) * Expr(n.b).substitute(name, replacement);
    case NodeKind::Div: return Expr(n.a).substitute(name, replacement) / Expr(n.b).substitute(name, replacement);
    case NodeKind::Pow: return Expr::pow(Expr(n.a).substitute(name, replacement), n.b->value);
    case NodeKind::Neg: return -Expr(n.a).substitute(name, replacement);
    case NodeKind::Log: return Expr::log(Expr(n.a).substitute(name, replacement));
    case NodeKind::Exp: return Expr::exp(Expr(n.a).substitute(name, replacement));
    }
    throw Error("corrupt expression node");
}

Expr Expr::rename(const std::map<std::string, std::string>& mapping) const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Constant: return *this;
    case NodeKind::Variable:
    case NodeKind::Parameter: {
        auto it = mapping.find(n.name);
        if (it == mapping.end()) return *this;
        return n.kind == NodeKind::Variable ? Expr::variable(it->second)
                                            : Expr::parameter(it->second);
    }
    case NodeKind::Add: return Expr(n.a).rename(mapping) + Expr(n.b).rename(mapping);
    case NodeKind::Sub: return Expr(n.a).rename(mapping) - Expr(n.b).rename(mapping);
    case NodeKind::Mul: return Expr(n.a).rename(mapping) * Expr(n.b).rename(mapping);
    case NodeKind::Div: return Expr(n.a).rename(mapping) / Expr(n.b).rename(mapping);
    case NodeKind::Pow: return Expr::pow(Expr(n.a).rename(mapping), n.b->value);
    case NodeKind::Neg: return -Expr(n.a).rename(mapping);
    case NodeKind::Log: return Expr::log(Expr(n.a).rename(mapping));
    case NodeKind::Exp: return Expr::exp(Expr(n.a).rename(mapping));
    }
    throw Error("corrupt expression node");
}

bool Expr::depends_on(const std::string& name) const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Constant: return false;
    case NodeKind::Variable:
    case NodeKind::Parameter: return n.name == name;
    default:
        if (n.a && Expr(n.a).depends_on(name)) return true;
        if (n.b && Expr(n.b).depends_on(name)) return true;
        return false;
    }
}

void Expr::collect_names(std::set<std::string>& variables,
                         std::set<std::string>& parameters) const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Constant: return;
    case NodeKind::Variable: variables.insert(n.name); return;
    case NodeKind::Parameter: parameters.insert(n.name); return;
    default:
        if (n.a) Expr(n.a).collect_names(variables, parameters);
        if (n.b) Expr(n.b).collect_names(variables, parameters);
    }
}

// ---------------------------------------------------------------------------
// Printing (round-trips through parse)

namespace {

int precedence(NodeKind k) {
    switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
    }
}

void print_node(const Expr::Node& n, std::ostream& os, int parent_prec);

void print_child(const Expr::NodePtr& child, std::ostream& os, int min_prec) {
    print_node(*child, os, min_prec);
}

void print_node(const Expr::Node& n, std::ostream& os, int parent_prec) {
    int prec = precedence(n.kind);
    bool need_parens = prec < parent_prec;
    if (need_parens) os << '(';
    switch (n.kind) {
    case NodeKind::Constant: {
        if (n.value < 0 && !need_parens && parent_prec > 0) {
            os << '(';
            need_parens = true;
        }
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << n.value;
        os << tmp.str();
        break;
    }
    case NodeKind::Variable:
    case NodeKind::Parameter:
        os << n.name;
        break;
    case NodeKind::Add:
        print_child(n.a, os, 1); os << " + "; print_child(n.b, os, 1);
        break;
    case NodeKind::Sub:
        print_child(n.a, os, 1); os << " - "; print_child(n.b, os, 2);
        break;
    case NodeKind::Mul:
        print_child(n.a, os, 2); os << "*"; print_child(n.b, os, 2);
        break;
    case NodeKind::Div:
        print_child(n.a, os, 2); os << "/"; print_child(n.b, os, 3);
        break;
    case NodeKind::Neg:
        os << '-'; print_child(n.a, os, 3);
        break;
    case NodeKind::Pow:
        print_child(n.a, os, 5); os << '^'; print_child(n.b, os, 5);
        break;
    case NodeKind::Log:
        os << "log("; print_child(n.a, os, 0); os << ')';
        break;
    case NodeKind::Exp:
        os << "exp("; print_child(n.a, os, 0); os << ')';
        break;
    }
    if (need_parens) os << ')';
}

} // namespace

std::string Expr::str() const {
    std::ostringstream os;
    print_node(*node_, os, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// Parsing: recursive descent over
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?        exponent must fold to a constant
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'

namespace {

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string>* variables,
           bool uppercase_heuristic)
        : text_(text), vars_(variables), heuristic_(uppercase_heuristic) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    const std::set<std::string>* vars_;
    bool heuristic_;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume(char c) {
        if (peek_is(c)) { ++pos_; return true; }
        return false;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (consume('+')) e = e + parse_term();
            else if (consume('-')) e = e - parse_term();
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (consume('*')) e = e * parse_unary();
            else if (consume('/')) e = e / parse_unary();
            else return e;
        }
    }

    Expr parse_unary() {
        if (consume('-')) return -parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (consume('^')) {
            std::size_t at = pos_;
            Expr exponent = parse_unary();
            if (!exponent.is_constant())
                throw ParseError("exponent must be a real constant", at);
            return Expr::pow(base, exponent.constant_value());
        }
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return Expr::constant(v);
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek_is('(')) {
            if (name != "log" && name != "exp")
                throw ParseError("unknown function '" + name + "'", start);
            ++pos_; // '('
            Expr arg = parse_expr();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return name == "log" ? Expr::log(arg) : Expr::exp(arg);
        }
        if (vars_)
            return vars_->count(name) ? Expr::variable(name) : Expr::parameter(name);
        if (heuristic_ && std::isupper(static_cast<unsigned char>(name[0])))
            return Expr::variable(name);
        return Expr::parameter(name);
    }
};

} // namespace

Expr Expr::parse(std::string_view text, const std::set<std::string>& variables) {
    return Parser(text, &variables, false).run();
}

Expr Expr::parse(std::string_view text) {
    return Parser(text, nullptr, true).run();
}

// ---------------------------------------------------------------------------
// Compilation to a postfix program

namespace {

void compile_node(const Expr::Node& n, std::span<const std::string> vars,
                  const Params& params, std::vector<CompiledExpr::Instr>& out);

} // namespace

CompiledExpr Expr::compile(std::span<const std::string> state_vars,
                           const Params& params) const {
    CompiledExpr c;
    compile_node(*node_, state_vars, params, c.code_);
    return c;
}

namespace {

using Op = CompiledExpr::Op;

void compile_node(const Expr::Node& n, std::span<const std::string> vars,
                  const Params& params, std::vector<CompiledExpr::Instr>& out) {
    switch (n.kind) {
    case NodeKind::Constant:
        out.push_back({Op::PushConst, n.value, 0});
        return;
    case NodeKind::Variable:
    case NodeKind::Parameter: {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] == n.name) {
                out.push_back({Op::PushVar, 0.0, static_cast<int>(i)});
                return;
            }
        }
        if (auto it = params.find(n.name); it != params.end()) {
            out.push_back({Op::PushConst, it->second, 0});
            return;
        }
        throw UnboundNameError(n.name);
    }
    case NodeKind::Pow:
        compile_node(*n.a, vars, params, out);
        out.push_back({Op::Pow, n.b->value, 0});
        return;
    case NodeKind::Neg:
    case NodeKind::Log:
    case NodeKind::Exp: {
        compile_node(*n.a, vars, params, out);
        Op op = n.kind == NodeKind::Neg ? Op::Neg
              : n.kind == NodeKind::Log ? Op::Log : Op::Exp;
        out.push_back({op, 0.0, 0});
        return;
    }
    default: {
        compile_node(*n.a, vars, params, out);
        compile_node(*n.b, vars, params, out);
        Op op = n.kind == NodeKind::Add ? Op::Add
              : n.kind == NodeKind::Sub ? Op::Sub
              : n.kind == NodeKind::Mul ? Op::Mul : Op::Div;
        out.push_back({op, 0.0, 0});
        return;
    }
    }
}

} // namespace

double CompiledExpr::operator()(std::span<const double> state) const {
    double stack[64];
    int top = -1;
    for (const Instr& ins : code_) {
        switch (ins.op) {
        case Op::PushConst: stack[++top] = ins.value; break;
        case Op::PushVar: stack[++top] = state[static_cast<std::size_t>(ins.index)]; break;
        case Op::Add: --top; stack[top] += stack[top + 1]; break;
        case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
        case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
        case Op::Div:
            --top;
            if (stack[top + 1] == 0.0) throw DivisionByZeroError();
            stack[top] /= stack[top + 1];
            break;
        case Op::Pow: stack[top] = std::pow(stack[top], ins.value); break;
        case Op::Neg: stack[top] = -stack[top]; break;
        case Op::Log:
            if (stack[top] <= 0.0) throw LogDomainError(stack[top]);
            stack[top] = std::log(stack[top]);
            break;
        case Op::Exp: stack[top] = std::exp(stack[top]); break;
        }
    }
    return stack[0];
}

} // namespace hamepi

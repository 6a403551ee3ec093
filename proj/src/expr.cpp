#include "pwax/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

namespace pwax {

struct Expr::Node {
    ExprKind kind;
    double value = 0.0;   // Constant
    std::string name;     // Variable
    int exponent = 0;     // PowInt
    std::vector<Expr> children;
};

namespace {

struct ExprAccess;

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double ipow(double base, int n) {
    if (n < 0)
        return 1.0 / ipow(base, -n);
    double result = 1.0;
    double factor = base;
    for (int e = n; e > 0; e >>= 1) {
        if (e & 1)
            result *= factor;
        factor *= factor;
    }
    return result;
}

} // namespace

struct ExprFactory {
    static Expr make(ExprKind kind, std::vector<Expr> children, double value = 0.0,
                     std::string name = {}, int exponent = 0) {
        auto node = std::make_shared<Expr::Node>();
        node->kind = kind;
        node->value = value;
        node->name = std::move(name);
        node->exponent = exponent;
        node->children = std::move(children);
        return Expr(std::move(node));
    }
};

Expr Expr::constant(double value) {
    if (!std::isfinite(value))
        throw std::invalid_argument("expression constants must be finite");
    return ExprFactory::make(ExprKind::Constant, {}, value);
}

Expr Expr::variable(const std::string& name) {
    if (name.empty())
        throw std::invalid_argument("variable name must not be empty");
    return ExprFactory::make(ExprKind::Variable, {}, 0.0, name);
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
const std::string& Expr::variable_name() const { return node_->name; }
int Expr::exponent() const { return node_->exponent; }
std::size_t Expr::child_count() const { return node_->children.size(); }
const Expr& Expr::child(std::size_t i) const { return node_->children.at(i); }

Expr operator+(const Expr& a, const Expr& b) { return ExprFactory::make(ExprKind::Add, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return ExprFactory::make(ExprKind::Sub, {a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return ExprFactory::make(ExprKind::Mul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return ExprFactory::make(ExprKind::Div, {a, b}); }
Expr operator-(const Expr& a) { return ExprFactory::make(ExprKind::Neg, {a}); }

Expr pow_int(const Expr& a, int n) {
    if (n == 0)
        return Expr::constant(1.0);
    return ExprFactory::make(ExprKind::PowInt, {a}, 0.0, {}, n);
}

Expr sin(const Expr& a) { return ExprFactory::make(ExprKind::Sin, {a}); }
Expr cos(const Expr& a) { return ExprFactory::make(ExprKind::Cos, {a}); }
Expr sqrt(const Expr& a) { return ExprFactory::make(ExprKind::Sqrt, {a}); }
Expr exp(const Expr& a) { return ExprFactory::make(ExprKind::Exp, {a}); }
Expr log(const Expr& a) { return ExprFactory::make(ExprKind::Log, {a}); }
Expr abs(const Expr& a) { return ExprFactory::make(ExprKind::Abs, {a}); }

// ---------------------------------------------------------------------------
// evaluation

double Expr::eval(const std::map<std::string, double>& bindings) const {
    switch (kind()) {
    case ExprKind::Constant:
        return constant_value();
    case ExprKind::Variable: {
        auto it = bindings.find(variable_name());
        if (it == bindings.end())
            throw UnboundVariable("unbound variable: " + variable_name());
        return it->second;
    }
    case ExprKind::Add:
        return child(0).eval(bindings) + child(1).eval(bindings);
    case ExprKind::Sub:
        return child(0).eval(bindings) - child(1).eval(bindings);
    case ExprKind::Mul:
        return child(0).eval(bindings) * child(1).eval(bindings);
    case ExprKind::Div: {
        const double num = child(0).eval(bindings);
        const double den = child(1).eval(bindings);
        if (den == 0.0)
            throw EvalDomainError("division by zero");
        return num / den;
    }
    case ExprKind::PowInt: {
        const double base = child(0).eval(bindings);
        if (base == 0.0 && node_->exponent < 0)
            throw EvalDomainError("zero raised to a negative power");
        return ipow(base, node_->exponent);
    }
    case ExprKind::Neg:
        return -child(0).eval(bindings);
    case ExprKind::Sin:
        return std::sin(child(0).eval(bindings));
    case ExprKind::Cos:
        return std::cos(child(0).eval(bindings));
    case ExprKind::Sqrt: {
        const double v = child(0).eval(bindings);
        if (v < 0.0)
            throw EvalDomainError("sqrt of a negative value");
        return std::sqrt(v);
    }
    case ExprKind::Exp:
        return std::exp(child(0).eval(bindings));
    case ExprKind::Log: {
        const double v = child(0).eval(bindings);
        if (v <= 0.0)
            throw EvalDomainError("log of a non-positive value");
        return std::log(v);
    }
    case ExprKind::Abs:
        return std::abs(child(0).eval(bindings));
    }
    throw std::logic_error("unreachable expression kind");
}

Interval Expr::eval(const std::map<std::string, Interval>& bindings) const {
    switch (kind()) {
    case ExprKind::Constant:
        return Interval(constant_value());
    case ExprKind::Variable: {
        auto it = bindings.find(variable_name());
        if (it == bindings.end())
            throw UnboundVariable("unbound variable: " + variable_name());
        return it->second;
    }
    case ExprKind::Add:
        return add(child(0).eval(bindings), child(1).eval(bindings));
    case ExprKind::Sub:
        return sub(child(0).eval(bindings), child(1).eval(bindings));
    case ExprKind::Mul: {
        const Interval a = child(0).eval(bindings);
        const Interval b = child(1).eval(bindings);
        if (a.lo == a.hi)
            return scale(b, a.lo);
        if (b.lo == b.hi)
            return scale(a, b.lo);
        return mul(a, b);
    }
    case ExprKind::Div: {
        const Interval num = child(0).eval(bindings);
        const Interval den = child(1).eval(bindings);
        if (num.lo == 0.0 && num.hi == 0.0)
            return Interval(0.0);
        if (num.lo == num.hi)
            return scale(recip(den), num.lo);
        return mul(num, recip(den));
    }
    case ExprKind::PowInt: {
        const Interval base = child(0).eval(bindings);
        const int n = node_->exponent;
        if (n > 0)
            return pow_image(base, n);
        return recip(pow_image(base, -n));
    }
    case ExprKind::Neg:
        return neg(child(0).eval(bindings));
    case ExprKind::Sin:
        return sin_image(child(0).eval(bindings));
    case ExprKind::Cos:
        return cos_image(child(0).eval(bindings));
    case ExprKind::Sqrt:
        return sqrt_image(child(0).eval(bindings));
    case ExprKind::Exp:
        return exp_image(child(0).eval(bindings));
    case ExprKind::Log:
        return log_image(child(0).eval(bindings));
    case ExprKind::Abs:
        return abs_image(child(0).eval(bindings));
    }
    throw std::logic_error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// differentiation

namespace {

using DerivMemo = std::unordered_map<const Expr::Node*, Expr>;

Expr diff(const Expr& e, const std::string& var, DerivMemo& memo);

Expr diff_impl(const Expr& e, const std::string& var, DerivMemo& memo) {
    switch (e.kind()) {
    case ExprKind::Constant:
        return Expr::constant(0.0);
    case ExprKind::Variable:
        return Expr::constant(e.variable_name() == var ? 1.0 : 0.0);
    case ExprKind::Add:
        return diff(e.child(0), var, memo) + diff(e.child(1), var, memo);
    case ExprKind::Sub:
        return diff(e.child(0), var, memo) - diff(e.child(1), var, memo);
    case ExprKind::Mul:
        return diff(e.child(0), var, memo) * e.child(1) +
               e.child(0) * diff(e.child(1), var, memo);
    case ExprKind::Div: {
        const Expr& num = e.child(0);
        const Expr& den = e.child(1);
        return (diff(num, var, memo) * den - num * diff(den, var, memo)) / pow_int(den, 2);
    }
    case ExprKind::PowInt: {
        const Expr& base = e.child(0);
        const int n = e.exponent();
        return Expr::constant(static_cast<double>(n)) * pow_int(base, n - 1) *
               diff(base, var, memo);
    }
    case ExprKind::Neg:
        return -diff(e.child(0), var, memo);
    case ExprKind::Sin:
        return cos(e.child(0)) * diff(e.child(0), var, memo);
    case ExprKind::Cos:
        return -(sin(e.child(0)) * diff(e.child(0), var, memo));
    case ExprKind::Sqrt:
        return diff(e.child(0), var, memo) / (Expr::constant(2.0) * sqrt(e.child(0)));
    case ExprKind::Exp:
        return exp(e.child(0)) * diff(e.child(0), var, memo);
    case ExprKind::Log:
        return diff(e.child(0), var, memo) / e.child(0);
    case ExprKind::Abs:
        throw NotDifferentiable("abs is not differentiable");
    }
    throw std::logic_error("unreachable expression kind");
}

Expr diff(const Expr& e, const std::string& var, DerivMemo& memo) {
    auto it = memo.find(e.raw());
    if (it != memo.end())
        return it->second;
    Expr d = diff_impl(e, var, memo);
    memo.emplace(e.raw(), d);
    return d;
}

} // namespace

Expr Expr::derivative(const std::string& var) const {
    DerivMemo memo;
    return diff(*this, var, memo).simplified();
}

// ---------------------------------------------------------------------------
// simplification

namespace {

bool is_const(const Expr& e, double v) {
    return e.kind() == ExprKind::Constant && e.constant_value() == v;
}

using SimplifyMemo = std::unordered_map<const Expr::Node*, Expr>;

Expr simplify_node(const Expr& e, SimplifyMemo& memo);

Expr simplify_impl(const Expr& e, SimplifyMemo& memo) {
    if (e.kind() == ExprKind::Constant || e.kind() == ExprKind::Variable)
        return e;

    std::vector<Expr> kids;
    kids.reserve(e.child_count());
    bool all_const = true;
    for (std::size_t i = 0; i < e.child_count(); ++i) {
        kids.push_back(simplify_node(e.child(i), memo));
        all_const = all_const && kids.back().is_constant();
    }

    auto rebuilt = [&]() -> Expr {
        switch (e.kind()) {
        case ExprKind::Add: return kids[0] + kids[1];
        case ExprKind::Sub: return kids[0] - kids[1];
        case ExprKind::Mul: return kids[0] * kids[1];
        case ExprKind::Div: return kids[0] / kids[1];
        case ExprKind::PowInt: return pow_int(kids[0], e.exponent());
        case ExprKind::Neg: return -kids[0];
        case ExprKind::Sin: return sin(kids[0]);
        case ExprKind::Cos: return cos(kids[0]);
        case ExprKind::Sqrt: return sqrt(kids[0]);
        case ExprKind::Exp: return exp(kids[0]);
        case ExprKind::Log: return log(kids[0]);
        case ExprKind::Abs: return abs(kids[0]);
        default: throw std::logic_error("unreachable expression kind");
        }
    };

    if (all_const) {
        Expr folded = rebuilt();
        try {
            const double v = folded.eval(std::map<std::string, double>{});
            if (std::isfinite(v))
                return Expr::constant(v);
        } catch (const EvalDomainError&) {
            // keep the unfolded node; evaluation will report the violation
        }
        return folded;
    }

    switch (e.kind()) {
    case ExprKind::Add:
        if (is_const(kids[0], 0.0)) return kids[1];
        if (is_const(kids[1], 0.0)) return kids[0];
        break;
    case ExprKind::Sub:
        if (is_const(kids[1], 0.0)) return kids[0];
        if (is_const(kids[0], 0.0)) return -kids[1];
        if (kids[0].raw() == kids[1].raw()) return Expr::constant(0.0);
        break;
    case ExprKind::Mul:
        if (is_const(kids[0], 0.0) || is_const(kids[1], 0.0)) return Expr::constant(0.0);
        if (is_const(kids[0], 1.0)) return kids[1];
        if (is_const(kids[1], 1.0)) return kids[0];
        if (is_const(kids[0], -1.0)) return -kids[1];
        if (is_const(kids[1], -1.0)) return -kids[0];
        break;
    case ExprKind::Div:
        if (is_const(kids[0], 0.0)) return Expr::constant(0.0);
        if (is_const(kids[1], 1.0)) return kids[0];
        // powers in the denominator become negative exponents; interval
        // evaluation of a single power is far tighter than a quotient
        if (kids[1].kind() == ExprKind::PowInt)
            return simplify_node(kids[0] * pow_int(kids[1].child(0), -kids[1].exponent()),
                                 memo);
        if (kids[1].kind() == ExprKind::Variable)
            return simplify_node(kids[0] * pow_int(kids[1], -1), memo);
        break;
    case ExprKind::PowInt:
        if (e.exponent() == 1) return kids[0];
        if (kids[0].kind() == ExprKind::PowInt)
            return pow_int(kids[0].child(0), kids[0].exponent() * e.exponent());
        break;
    case ExprKind::Neg:
        if (kids[0].kind() == ExprKind::Neg) return kids[0].child(0);
        if (kids[0].is_constant()) return Expr::constant(-kids[0].constant_value());
        break;
    default:
        break;
    }
    return rebuilt();
}

Expr simplify_node(const Expr& e, SimplifyMemo& memo) {
    auto it = memo.find(e.raw());
    if (it != memo.end())
        return it->second;
    Expr s = simplify_impl(e, memo);
    memo.emplace(e.raw(), s);
    return s;
}

} // namespace

Expr Expr::simplified() const {
    SimplifyMemo memo;
    return simplify_node(*this, memo);
}

// ---------------------------------------------------------------------------
// printing (canonical infix form)

namespace {

// additive 1, multiplicative 2, unary minus 3, power 4, atom 5
int precedence(ExprKind k) {
    switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
        return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
        return 2;
    case ExprKind::Neg:
        return 3;
    case ExprKind::PowInt:
        return 4;
    default:
        return 5;
    }
}

void print_to(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out) {
    // a negative constant prints with a leading '-' and reparses as a
    // unary minus, so treat it with that precedence when parenthesizing
    int prec = precedence(child.kind());
    if (child.kind() == ExprKind::Constant && child.constant_value() < 0.0)
        prec = 3;
    const bool parens = prec < min_prec;
    if (parens)
        out += '(';
    print_to(child, out);
    if (parens)
        out += ')';
}

void print_binary(const Expr& e, const char* op, int prec, std::string& out) {
    // right operands are parenthesized one level tighter so the parsed
    // tree reproduces the original association exactly
    print_child(e.child(0), prec, out);
    out += op;
    print_child(e.child(1), prec + 1, out);
}

void print_to(const Expr& e, std::string& out) {
    switch (e.kind()) {
    case ExprKind::Constant:
        out += format_double(e.constant_value());
        return;
    case ExprKind::Variable:
        out += e.variable_name();
        return;
    case ExprKind::Add:
        print_binary(e, " + ", 1, out);
        return;
    case ExprKind::Sub:
        print_binary(e, " - ", 1, out);
        return;
    case ExprKind::Mul:
        print_binary(e, " * ", 2, out);
        return;
    case ExprKind::Div:
        print_binary(e, " / ", 2, out);
        return;
    case ExprKind::Neg:
        out += '-';
        print_child(e.child(0), 3, out);
        return;
    case ExprKind::PowInt:
        print_child(e.child(0), 5, out);
        out += '^';
        out += std::to_string(e.exponent());
        return;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Sqrt:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Abs: {
        switch (e.kind()) {
        case ExprKind::Sin: out += "sin"; break;
        case ExprKind::Cos: out += "cos"; break;
        case ExprKind::Sqrt: out += "sqrt"; break;
        case ExprKind::Exp: out += "exp"; break;
        case ExprKind::Log: out += "log"; break;
        default: out += "abs"; break;
        }
        out += '(';
        print_to(e.child(0), out);
        out += ')';
        return;
    }
    }
}

} // namespace

std::string Expr::str() const {
    std::string out;
    print_to(*this, out);
    return out;
}

// ---------------------------------------------------------------------------
// variables and size

namespace {

void collect_variables(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == ExprKind::Variable) {
        out.insert(e.variable_name());
        return;
    }
    for (std::size_t i = 0; i < e.child_count(); ++i)
        collect_variables(e.child(i), out);
}

std::size_t count_nodes(const Expr& e) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < e.child_count(); ++i)
        n += count_nodes(e.child(i));
    return n;
}

} // namespace

std::set<std::string> Expr::variables() const {
    std::set<std::string> out;
    collect_variables(*this, out);
    return out;
}

std::string Expr::single_variable() const {
    const auto vars = variables();
    if (vars.empty())
        return {};
    if (vars.size() > 1)
        throw std::invalid_argument("expression must have a single free variable");
    return *vars.begin();
}

std::size_t Expr::node_count() const { return count_nodes(*this); }

// ---------------------------------------------------------------------------
// parser

namespace {

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    TokKind kind;
    double number = 0.0;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& current() const { return tok_; }

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        tok_.pos = pos_;
        if (pos_ >= text_.size()) {
            tok_.kind = TokKind::End;
            return;
        }
        const char c = text_[pos_];
        switch (c) {
        case '+': tok_.kind = TokKind::Plus; ++pos_; return;
        case '-': tok_.kind = TokKind::Minus; ++pos_; return;
        case '*': tok_.kind = TokKind::Star; ++pos_; return;
        case '/': tok_.kind = TokKind::Slash; ++pos_; return;
        case '^': tok_.kind = TokKind::Caret; ++pos_; return;
        case '(': tok_.kind = TokKind::LParen; ++pos_; return;
        case ')': tok_.kind = TokKind::RParen; ++pos_; return;
        default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(start, &end);
            if (end == start)
                throw ParseError("malformed number at position " + std::to_string(pos_));
            tok_.kind = TokKind::Number;
            tok_.number = v;
            pos_ += static_cast<std::size_t>(end - start);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            tok_.kind = TokKind::Ident;
            tok_.text = text_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "' at position " +
                         std::to_string(pos_));
    }

  private:
    const std::string& text_;
    std::size_t pos_ = 0;
    Token tok_;
};

class Parser {
  public:
    explicit Parser(const std::string& text) : lex_(text) {}

    Expr parse() {
        Expr e = parse_sum();
        if (lex_.current().kind != TokKind::End)
            throw ParseError("unexpected trailing input at position " +
                             std::to_string(lex_.current().pos));
        return e;
    }

  private:
    Lexer lex_;

    Expr parse_sum() {
        Expr lhs = parse_term();
        for (;;) {
            if (lex_.current().kind == TokKind::Plus) {
                lex_.advance();
                lhs = lhs + parse_term();
            } else if (lex_.current().kind == TokKind::Minus) {
                lex_.advance();
                lhs = lhs - parse_term();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_factor();
        for (;;) {
            if (lex_.current().kind == TokKind::Star) {
                lex_.advance();
                lhs = lhs * parse_factor();
            } else if (lex_.current().kind == TokKind::Slash) {
                lex_.advance();
                lhs = lhs / parse_factor();
            } else {
                return lhs;
            }
        }
    }

    Expr parse_factor() {
        if (lex_.current().kind == TokKind::Minus) {
            lex_.advance();
            return -parse_factor();
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (lex_.current().kind != TokKind::Caret)
            return base;
        lex_.advance();
        bool negate = false;
        if (lex_.current().kind == TokKind::Minus) {
            negate = true;
            lex_.advance();
        }
        if (lex_.current().kind != TokKind::Number)
            throw ParseError("expected integer exponent after '^'");
        const double v = lex_.current().number;
        const int n = static_cast<int>(v);
        if (static_cast<double>(n) != v)
            throw ParseError("exponent must be an integer");
        lex_.advance();
        return pow_int(base, negate ? -n : n);
    }

    Expr parse_primary() {
        const Token tok = lex_.current();
        switch (tok.kind) {
        case TokKind::Number:
            lex_.advance();
            return Expr::constant(tok.number);
        case TokKind::LParen: {
            lex_.advance();
            Expr inner = parse_sum();
            expect(TokKind::RParen, "expected ')'");
            return inner;
        }
        case TokKind::Ident: {
            lex_.advance();
            if (lex_.current().kind != TokKind::LParen)
                return Expr::variable(tok.text);
            lex_.advance();
            Expr arg = parse_sum();
            expect(TokKind::RParen, "expected ')' after function argument");
            if (tok.text == "sin") return sin(arg);
            if (tok.text == "cos") return cos(arg);
            if (tok.text == "sqrt") return sqrt(arg);
            if (tok.text == "exp") return exp(arg);
            if (tok.text == "log") return log(arg);
            if (tok.text == "abs") return abs(arg);
            throw ParseError("unknown function: " + tok.text);
        }
        default:
            throw ParseError("unexpected token at position " + std::to_string(tok.pos));
        }
    }

    void expect(TokKind kind, const char* message) {
        if (lex_.current().kind != kind)
            throw ParseError(std::string(message) + " at position " +
                             std::to_string(lex_.current().pos));
        lex_.advance();
    }
};

} // namespace

Expr parse_expression(const std::string& text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// compiled evaluator

CompiledUnary::CompiledUnary(const Expr& e, const std::string& var) {
    // postorder flattening; depth tracking sizes the evaluation stack
    std::size_t depth = 0;
    std::size_t max_depth = 0;
    auto emit = [&](const Expr& node, auto&& self) -> void {
        for (std::size_t i = 0; i < node.child_count(); ++i)
            self(node.child(i), self);
        Instr instr;
        instr.op = node.kind();
        switch (node.kind()) {
        case ExprKind::Constant:
            instr.value = node.constant_value();
            ++depth;
            break;
        case ExprKind::Variable:
            if (node.variable_name() != var)
                throw UnboundVariable("compiled expression references variable '" +
                                      node.variable_name() + "', expected '" + var + "'");
            ++depth;
            break;
        case ExprKind::PowInt:
            instr.exponent = node.exponent();
            break;
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div:
            --depth;
            break;
        default:
            break;
        }
        max_depth = std::max(max_depth, depth);
        program_.push_back(instr);
    };
    emit(e, emit);
    stack_need_ = std::max<std::size_t>(max_depth, 1);
}

double CompiledUnary::operator()(double x) const {
    double local[64];
    local[0] = 0.0;
    std::vector<double> heap;
    double* stack = local;
    if (stack_need_ > 64) {
        heap.resize(stack_need_);
        stack = heap.data();
    }
    std::size_t top = 0;
    for (const Instr& instr : program_) {
        switch (instr.op) {
        case ExprKind::Constant:
            stack[top++] = instr.value;
            break;
        case ExprKind::Variable:
            stack[top++] = x;
            break;
        case ExprKind::Add:
            --top;
            stack[top - 1] += stack[top];
            break;
        case ExprKind::Sub:
            --top;
            stack[top - 1] -= stack[top];
            break;
        case ExprKind::Mul:
            --top;
            stack[top - 1] *= stack[top];
            break;
        case ExprKind::Div:
            --top;
            stack[top - 1] /= stack[top];
            break;
        case ExprKind::PowInt:
            stack[top - 1] = ipow(stack[top - 1], instr.exponent);
            break;
        case ExprKind::Neg:
            stack[top - 1] = -stack[top - 1];
            break;
        case ExprKind::Sin:
            stack[top - 1] = std::sin(stack[top - 1]);
            break;
        case ExprKind::Cos:
            stack[top - 1] = std::cos(stack[top - 1]);
            break;
        case ExprKind::Sqrt:
            stack[top - 1] = std::sqrt(stack[top - 1]);
            break;
        case ExprKind::Exp:
            stack[top - 1] = std::exp(stack[top - 1]);
            break;
        case ExprKind::Log:
            stack[top - 1] = std::log(stack[top - 1]);
            break;
        case ExprKind::Abs:
            stack[top - 1] = std::abs(stack[top - 1]);
            break;
        }
    }
    return stack[0];
}

} // namespace pwax

#pragma once

// Small complex-valued expression language used for black-box and separable
// symbols in configuration files.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'i' | 'pi' | identifier | func '(' expr ')' | '(' expr ')'
// Functions: sech cosh sinh tanh exp log sqrt sin cos abs re im conj.
// Identifiers are bound by the caller (e.g. x1, x2, x3 or x).

#include <cctype>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cubiclab {

class ExpressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Expression {
    using cd = std::complex<double>;

public:
    Expression() = default;

    static Expression parse(const std::string& text, std::vector<std::string> variables) {
        Expression e;
        e.source_ = text;
        e.variables_ = std::move(variables);
        Parser p{text, e.variables_, 0};
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size())
            throw ExpressionError("unexpected '" + std::string(1, text[p.pos]) + "' at offset " +
                                  std::to_string(p.pos) + " in \"" + text + "\"");
        return e;
    }

    cd operator()(const std::vector<cd>& args) const {
        if (args.size() != variables_.size())
            throw ExpressionError("expression expects " + std::to_string(variables_.size()) +
                                  " arguments");
        return root_->eval(args);
    }

    cd operator()(double a) const { return (*this)(std::vector<cd>{a}); }
    cd operator()(double a, double b, double c) const {
        return (*this)(std::vector<cd>{a, b, c});
    }

    const std::string& source() const { return source_; }
    bool valid() const { return static_cast<bool>(root_); }

private:
    struct Node {
        virtual ~Node() = default;
        virtual cd eval(const std::vector<cd>& args) const = 0;
    };
    using NodePtr = std::shared_ptr<const Node>;

    struct Constant final : Node {
        cd value;
        explicit Constant(cd v) : value(v) {}
        cd eval(const std::vector<cd>&) const override { return value; }
    };
    struct Variable final : Node {
        std::size_t index;
        explicit Variable(std::size_t i) : index(i) {}
        cd eval(const std::vector<cd>& args) const override { return args[index]; }
    };
    struct Unary final : Node {
        std::function<cd(cd)> fn;
        NodePtr arg;
        Unary(std::function<cd(cd)> f, NodePtr a) : fn(std::move(f)), arg(std::move(a)) {}
        cd eval(const std::vector<cd>& args) const override { return fn(arg->eval(args)); }
    };
    struct Binary final : Node {
        char op;
        NodePtr lhs, rhs;
        Binary(char o, NodePtr l, NodePtr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
        cd eval(const std::vector<cd>& args) const override {
            const cd a = lhs->eval(args);
            const cd b = rhs->eval(args);
            switch (op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': return a / b;
                default: {
                    // integer powers stay exact for real and negative bases
                    if (b.imag() == 0.0 && b.real() == std::round(b.real()) &&
                        std::abs(b.real()) <= 64.0) {
                        const int n = static_cast<int>(b.real());
                        cd r = 1.0;
                        for (int k = 0; k < std::abs(n); ++k) r *= a;
                        return n >= 0 ? r : 1.0 / r;
                    }
                    return std::pow(a, b);
                }
            }
        }
    };

    struct Parser {
        const std::string& s;
        const std::vector<std::string>& vars;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        [[noreturn]] void fail(const std::string& what) const {
            throw ExpressionError(what + " at offset " + std::to_string(pos) + " in \"" + s + "\"");
        }

        NodePtr parse_expr() {
            NodePtr lhs = parse_term();
            for (;;) {
                if (accept('+')) lhs = std::make_shared<Binary>('+', lhs, parse_term());
                else if (accept('-')) lhs = std::make_shared<Binary>('-', lhs, parse_term());
                else return lhs;
            }
        }
        NodePtr parse_term() {
            NodePtr lhs = parse_unary();
            for (;;) {
                if (accept('*')) lhs = std::make_shared<Binary>('*', lhs, parse_unary());
                else if (accept('/')) lhs = std::make_shared<Binary>('/', lhs, parse_unary());
                else return lhs;
            }
        }
        NodePtr parse_unary() {
            if (accept('-'))
                return std::make_shared<Unary>([](cd z) { return -z; }, parse_unary());
            if (accept('+')) return parse_unary();
            return parse_power();
        }
        NodePtr parse_power() {
            NodePtr base = parse_primary();
            if (accept('^')) return std::make_shared<Binary>('^', base, parse_unary());
            return base;
        }
        NodePtr parse_primary() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of expression");
            if (accept('(')) {
                NodePtr e = parse_expr();
                if (!accept(')')) fail("expected ')'");
                return e;
            }
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(s.substr(pos), &used);
                } catch (const std::exception&) {
                    fail("malformed number");
                }
                pos += used;
                return std::make_shared<Constant>(cd(v, 0.0));
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                    ++pos;
                const std::string name = s.substr(start, pos - start);
                for (std::size_t k = 0; k < vars.size(); ++k)
                    if (vars[k] == name) return std::make_shared<Variable>(k);
                if (name == "i") return std::make_shared<Constant>(cd(0.0, 1.0));
                if (name == "pi") return std::make_shared<Constant>(cd(std::acos(-1.0), 0.0));
                auto fn = function(name);
                if (!fn) fail("unknown identifier '" + name + "'");
                if (!accept('(')) fail("expected '(' after " + name);
                NodePtr arg = parse_expr();
                if (!accept(')')) fail("expected ')'");
                return std::make_shared<Unary>(fn, arg);
            }
            fail("unexpected character '" + std::string(1, c) + "'");
        }

        static std::function<cd(cd)> function(const std::string& name) {
            if (name == "sech") return [](cd z) { return 1.0 / std::cosh(z); };
            if (name == "cosh") return [](cd z) { return std::cosh(z); };
            if (name == "sinh") return [](cd z) { return std::sinh(z); };
            if (name == "tanh") return [](cd z) { return std::tanh(z); };
            if (name == "exp") return [](cd z) { return std::exp(z); };
            if (name == "log") return [](cd z) { return std::log(z); };
            if (name == "sqrt") return [](cd z) { return std::sqrt(z); };
            if (name == "sin") return [](cd z) { return std::sin(z); };
            if (name == "cos") return [](cd z) { return std::cos(z); };
            if (name == "abs") return [](cd z) { return cd(std::abs(z), 0.0); };
            if (name == "re") return [](cd z) { return cd(z.real(), 0.0); };
            if (name == "im") return [](cd z) { return cd(z.imag(), 0.0); };
            if (name == "conj") return [](cd z) { return std::conj(z); };
            return {};
        }
    };

    std::string source_;
    std::vector<std::string> variables_;
    NodePtr root_;
};

}  // namespace cubiclab

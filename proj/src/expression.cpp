#include "absorb/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "absorb/error.hpp"

namespace absorb {

struct Expression::Node {
    enum class Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0.0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    double eval(double x, double y) const
    {
        switch (kind) {
        case Kind::Number: return value;
        case Kind::VarX: return x;
        case Kind::VarY: return y;
        case Kind::Neg: return -lhs->eval(x, y);
        case Kind::Add: return lhs->eval(x, y) + rhs->eval(x, y);
        case Kind::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
        case Kind::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
        case Kind::Div: return lhs->eval(x, y) / rhs->eval(x, y);
        case Kind::Pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
        case Kind::Call: return fn(lhs->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr number(double v)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Number;
    n->value = v;
    return n;
}

double fn_abs(double v) { return std::fabs(v); }
double fn_sin(double v) { return std::sin(v); }
double fn_cos(double v) { return std::cos(v); }
double fn_tan(double v) { return std::tan(v); }
double fn_exp(double v) { return std::exp(v); }
double fn_log(double v) { return std::log(v); }
double fn_sqrt(double v) { return std::sqrt(v); }
double fn_atan(double v) { return std::atan(v); }
double fn_tanh(double v) { return std::tanh(v); }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse()
    {
        NodePtr e = expr();
        skip();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

    bool uses_y = false;

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("expression '" + std::string(text_) + "': " + what + " at offset " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Kind::Add, lhs, term());
            else if (accept('-')) lhs = make(Kind::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Kind::Mul, lhs, unary());
            else if (accept('/')) lhs = make(Kind::Div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return make(Kind::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        if (accept('^')) return make(Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (accept('(')) {
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number()
    {
        const std::string rest(text_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        return number(v);
    }

    NodePtr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "x") return make(Kind::VarX);
        if (name == "y") {
            uses_y = true;
            return make(Kind::VarY);
        }
        if (name == "pi") return number(std::numbers::pi);
        if (name == "e") return number(std::numbers::e);

        static const std::vector<std::pair<std::string, double (*)(double)>> functions = {
            {"abs", fn_abs}, {"sin", fn_sin}, {"cos", fn_cos},   {"tan", fn_tan},   {"exp", fn_exp},
            {"log", fn_log}, {"sqrt", fn_sqrt}, {"atan", fn_atan}, {"tanh", fn_tanh},
        };
        for (const auto& [fname, f] : functions) {
            if (fname == name) {
                if (!accept('(')) fail("expected '(' after " + name);
                auto call = std::make_shared<Expression::Node>();
                call->kind = Kind::Call;
                call->fn = f;
                call->lhs = expr();
                if (!accept(')')) fail("expected ')'");
                return call;
            }
        }
        fail("unknown identifier '" + name + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text)
{
    Parser parser(text);
    Expression e;
    e.root_ = parser.parse();
    e.text_ = std::string(text);
    e.uses_y_ = parser.uses_y;
    return e;
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

}  // namespace absorb

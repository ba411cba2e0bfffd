#include "sepvar/parser.hpp"

#include <cctype>

namespace sepvar {

namespace {

class Parser {
public:
    Parser(const std::string& text, const Chart& chart) : s_(text), chart_(chart) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_ + 1); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+'))
                e = e + parse_term();
            else if (eat('-'))
                e = e - parse_term();
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (eat('*'))
                e = e * parse_factor();
            else if (eat('/'))
                e = e / parse_factor();
            else
                return e;
        }
    }

    Expr parse_factor() {
        Expr e = parse_base();
        if (eat('^')) return e.pow(parse_signed_int());
        return e;
    }

    int parse_signed_int() {
        skip_ws();
        bool neg = false;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            neg = s_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
            fail("expected integer exponent");
        long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_] - '0');
            if (v > 1'000'000) fail("exponent too large");
            ++pos_;
        }
        return static_cast<int>(neg ? -v : v);
    }

    Expr parse_base() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            return Expr(Rational(-1)) * parse_base();
        }
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail("unexpected character");
    }

    Expr parse_number() {
        std::size_t start = pos_;
        auto digits = [&]() {
            std::string d;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                d += s_[pos_++];
            return d;
        };
        std::string intpart = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            std::string frac = digits();
            if (frac.empty()) {
                pos_ = start;
                fail("malformed decimal");
            }
            Rational num(boost::multiprecision::cpp_int(intpart + frac));
            Rational den(1);
            for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
            return Expr(num / den);
        }
        // rational literal p/q only when a digit immediately follows '/'
        if (pos_ + 1 < s_.size() && s_[pos_] == '/' &&
            std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
            ++pos_;
            std::string den = digits();
            if (boost::multiprecision::cpp_int(den) == 0) fail("zero denominator in literal");
            Rational q = Rational(boost::multiprecision::cpp_int(intpart)) /
                         Rational(boost::multiprecision::cpp_int(den));
            return Expr(q);
        }
        return Expr(Rational(boost::multiprecision::cpp_int(intpart)));
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        std::string id;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            id += s_[pos_++];
        for (int i = 0; i < chart_.dim; ++i)
            if (chart_.var_names[i] == id) return Expr::variable(i);
        static const std::pair<const char*, UnaryFn> fns[] = {
            {"sin", UnaryFn::Sin}, {"cos", UnaryFn::Cos}, {"exp", UnaryFn::Exp},
            {"log", UnaryFn::Log}, {"sqrt", UnaryFn::Sqrt}};
        for (const auto& [name, fn] : fns) {
            if (id == name) {
                if (!eat('(')) fail("expected '(' after function name");
                Expr arg = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return Expr::apply(fn, arg);
            }
        }
        throw UnknownIdentifierError(id, start + 1);
    }

    const std::string& s_;
    const Chart& chart_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(const std::string& text, const Chart& chart) {
    Parser p(text, chart);
    return p.run();
}

}  // namespace sepvar

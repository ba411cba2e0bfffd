#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace sepvar {

using Rational = boost::multiprecision::cpp_rational;

/// Coordinate chart: dimension plus variable names ("x1".."xn" by default).
struct Chart {
    int dim = 0;
    std::vector<std::string> var_names;

    static Chart standard(int n);

    bool operator==(const Chart& o) const {
        return dim == o.dim && var_names == o.var_names;
    }
};

enum class UnaryFn { Sin, Cos, Exp, Log, Sqrt };

const char* fn_name(UnaryFn f);

class EvalError : public std::runtime_error {
public:
    enum class Kind { DivisionByZero, DomainError };
    EvalError(Kind k, std::string subterm, std::string point_desc);
    Kind kind;
    std::string subterm;   // serialized offending subexpression
    std::string point;     // where it happened
};

/// Immutable scalar-field expression DAG. Construction folds constants and
/// eliminates neutral elements (x+0, x*1, x*0, x^1); nothing else is
/// simplified. Values are freely shareable across threads.
class Expr {
public:
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Fn };

    struct Node {
        Kind kind;
        Rational value;                    // Const
        int var = -1;                      // Var
        std::shared_ptr<const Node> a, b;  // children
        int exponent = 0;                  // Pow
        UnaryFn fn = UnaryFn::Sin;         // Fn
        bool has_fn = false;               // any transcendental node below
        int max_var = -1;                  // largest variable index used
    };

    Expr() : Expr(Rational(0)) {}
    explicit Expr(Rational r);
    explicit Expr(long v) : Expr(Rational(v)) {}
    explicit Expr(int v) : Expr(Rational(v)) {}

    static Expr constant(Rational r) { return Expr(std::move(r)); }
    static Expr variable(int index);
    static Expr apply(UnaryFn f, const Expr& arg);

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    Expr operator-() const { return Expr(Rational(-1)) * *this; }

    Expr pow(int k) const;

    Kind kind() const { return node_->kind; }
    const Node* raw() const { return node_.get(); }
    bool is_const() const { return node_->kind == Kind::Const; }
    bool is_zero() const { return is_const() && node_->value == 0; }
    bool is_one() const { return is_const() && node_->value == 1; }
    const Rational& const_value() const { return node_->value; }

    /// True when the DAG contains no transcendental function node, so exact
    /// rational evaluation is available.
    bool is_rational_expr() const { return !node_->has_fn; }
    int max_var() const { return node_->max_var; }

    bool structurally_equal(const Expr& o) const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
    friend struct ExprBuilder;
};

/// Exact symbolic partial derivative with respect to variable var_index.
Expr differentiate(const Expr& e, int var_index);

/// Replace every variable i by subs[i]; variables past subs.size() are an error.
Expr substitute(const Expr& e, std::span<const Expr> subs);

/// Serialize in the fully parenthesized expression grammar. Variable names
/// come from the chart when given, else "x1".."xn".
std::string to_string(const Expr& e, const Chart* chart = nullptr);

/// A point of a chart; each coordinate either exact rational or float.
struct Coord {
    bool exact = false;
    Rational q;
    double d = 0.0;

    static Coord rational(Rational r) {
        Coord c;
        c.exact = true;
        c.d = r.convert_to<double>();
        c.q = std::move(r);
        return c;
    }
    static Coord real(double v) {
        Coord c;
        c.d = v;
        return c;
    }
    double as_double() const { return exact ? q.convert_to<double>() : d; }
};

struct Point {
    std::vector<Coord> coords;

    static Point rational(std::vector<Rational> qs);
    static Point real(std::vector<double> ds);
    bool all_exact() const;
    std::size_t size() const { return coords.size(); }
    std::string describe() const;
};

/// Evaluation result: exact rational when the expression is rational and the
/// point's coordinates are exact, float otherwise.
struct Value {
    bool exact = false;
    Rational q;
    double d = 0.0;
    double as_double() const { return exact ? q.convert_to<double>() : d; }
    bool is_exact_zero() const { return exact && q == 0; }
};

Value evaluate(const Expr& e, const Point& p);

/// Shared-memo evaluators for batch evaluation of many expressions at one
/// point (DAG nodes are visited once across the whole batch).
class ExactEvaluator {
public:
    explicit ExactEvaluator(std::vector<Rational> coords) : coords_(std::move(coords)) {}
    Rational eval(const Expr& e);

private:
    std::vector<Rational> coords_;
    std::unordered_map<const Expr::Node*, Rational> memo_;
    const Rational& visit(const std::shared_ptr<const Expr::Node>& n);
};

class FloatEvaluator {
public:
    explicit FloatEvaluator(std::vector<double> coords) : coords_(std::move(coords)) {}
    double eval(const Expr& e);
    /// Magnitude of the largest intermediate value seen so far (all calls).
    double max_intermediate() const { return max_abs_; }

private:
    std::vector<double> coords_;
    std::unordered_map<const Expr::Node*, double> memo_;
    double max_abs_ = 0.0;
    double visit(const std::shared_ptr<const Expr::Node>& n);
};

}  // namespace sepvar

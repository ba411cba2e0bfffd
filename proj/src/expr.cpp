#include "sepvar/expr.hpp"

#include <cmath>
#include <sstream>

namespace sepvar {

Chart Chart::standard(int n) {
    Chart c;
    c.dim = n;
    for (int i = 1; i <= n; ++i) c.var_names.push_back("x" + std::to_string(i));
    return c;
}

const char* fn_name(UnaryFn f) {
    switch (f) {
        case UnaryFn::Sin: return "sin";
        case UnaryFn::Cos: return "cos";
        case UnaryFn::Exp: return "exp";
        case UnaryFn::Log: return "log";
        case UnaryFn::Sqrt: return "sqrt";
    }
    return "?";
}

EvalError::EvalError(Kind k, std::string subterm_, std::string point_desc)
    : std::runtime_error(std::string(k == Kind::DivisionByZero ? "division by zero" : "domain error") +
                         " in " + subterm_ + " at " + point_desc),
      kind(k),
      subterm(std::move(subterm_)),
      point(std::move(point_desc)) {}

struct ExprBuilder {
    static Expr make(Expr::Node n) {
        return Expr(std::make_shared<const Expr::Node>(std::move(n)));
    }
    static std::shared_ptr<const Expr::Node> ptr(const Expr& e) { return e.node_; }
    static Expr adopt(std::shared_ptr<const Expr::Node> p) { return Expr(std::move(p)); }
};

// Wrap an existing shared node in an Expr handle without copying the subtree.
static Expr wrap_node(std::shared_ptr<const Expr::Node> p) {
    return ExprBuilder::adopt(std::move(p));
}

namespace {

Expr make_binary(Expr::Kind k, const Expr& a, const Expr& b) {
    Expr::Node n;
    n.kind = k;
    n.a = ExprBuilder::ptr(a);
    n.b = ExprBuilder::ptr(b);
    n.has_fn = n.a->has_fn || n.b->has_fn;
    n.max_var = std::max(n.a->max_var, n.b->max_var);
    return ExprBuilder::make(std::move(n));
}

}  // namespace

Expr::Expr(Rational r) {
    Node n;
    n.kind = Kind::Const;
    n.value = std::move(r);
    node_ = std::make_shared<const Node>(std::move(n));
}

Expr Expr::variable(int index) {
    if (index < 0) throw std::invalid_argument("variable index must be non-negative");
    Node n;
    n.kind = Kind::Var;
    n.var = index;
    n.max_var = index;
    return ExprBuilder::make(std::move(n));
}

Expr Expr::apply(UnaryFn f, const Expr& arg) {
    Node n;
    n.kind = Kind::Fn;
    n.fn = f;
    n.a = ExprBuilder::ptr(arg);
    n.has_fn = true;
    n.max_var = n.a->max_var;
    return ExprBuilder::make(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return Expr(a.const_value() + b.const_value());
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return make_binary(Expr::Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return Expr(a.const_value() - b.const_value());
    if (b.is_zero()) return a;
    return make_binary(Expr::Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return Expr(a.const_value() * b.const_value());
    if (a.is_zero() || b.is_zero()) return Expr(Rational(0));
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    return make_binary(Expr::Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const() && b.const_value() != 0)
        return Expr(a.const_value() / b.const_value());
    if (b.is_one()) return a;
    return make_binary(Expr::Kind::Div, a, b);
}

Expr Expr::pow(int k) const {
    if (k == 0) return Expr(Rational(1));
    if (k == 1) return *this;
    if (is_const() && (k > 0 || const_value() != 0)) {
        Rational base = const_value();
        Rational r(1);
        int m = k < 0 ? -k : k;
        for (int i = 0; i < m; ++i) r *= base;
        if (k < 0) r = Rational(1) / r;
        return Expr(std::move(r));
    }
    Node n;
    n.kind = Kind::Pow;
    n.a = node_;
    n.exponent = k;
    n.has_fn = n.a->has_fn;
    n.max_var = n.a->max_var;
    return ExprBuilder::make(std::move(n));
}

namespace {

bool struct_eq(const Expr::Node* a, const Expr::Node* b,
               std::unordered_map<const Expr::Node*, const Expr::Node*>& memo) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    auto it = memo.find(a);
    if (it != memo.end() && it->second == b) return true;
    bool eq = false;
    switch (a->kind) {
        case Expr::Kind::Const: eq = a->value == b->value; break;
        case Expr::Kind::Var: eq = a->var == b->var; break;
        case Expr::Kind::Pow:
            eq = a->exponent == b->exponent && struct_eq(a->a.get(), b->a.get(), memo);
            break;
        case Expr::Kind::Fn:
            eq = a->fn == b->fn && struct_eq(a->a.get(), b->a.get(), memo);
            break;
        default:
            eq = struct_eq(a->a.get(), b->a.get(), memo) && struct_eq(a->b.get(), b->b.get(), memo);
            break;
    }
    if (eq) memo[a] = b;
    return eq;
}

}  // namespace

bool Expr::structurally_equal(const Expr& o) const {
    std::unordered_map<const Node*, const Node*> memo;
    return struct_eq(node_.get(), o.node_.get(), memo);
}

namespace {

class Differ {
public:
    Differ(int var) : var_(var) {}

    Expr diff(const std::shared_ptr<const Expr::Node>& n) {
        auto it = memo_.find(n.get());
        if (it != memo_.end()) return it->second;
        Expr result = compute(n);
        memo_.emplace(n.get(), result);
        return result;
    }

private:
    static Expr reinterpret_node(const std::shared_ptr<const Expr::Node>& n) {
        return wrap_node(n);
    }

    Expr compute(const std::shared_ptr<const Expr::Node>& n) {
        using K = Expr::Kind;
        switch (n->kind) {
            case K::Const: return Expr(Rational(0));
            case K::Var: return Expr(Rational(n->var == var_ ? 1 : 0));
            case K::Add: return diff(n->a) + diff(n->b);
            case K::Sub: return diff(n->a) - diff(n->b);
            case K::Mul: {
                Expr a = reinterpret_node(n->a), b = reinterpret_node(n->b);
                return diff(n->a) * b + a * diff(n->b);
            }
            case K::Div: {
                Expr a = reinterpret_node(n->a), b = reinterpret_node(n->b);
                return (diff(n->a) * b - a * diff(n->b)) / b.pow(2);
            }
            case K::Pow: {
                Expr a = reinterpret_node(n->a);
                return Expr(Rational(n->exponent)) * a.pow(n->exponent - 1) * diff(n->a);
            }
            case K::Fn: {
                Expr a = reinterpret_node(n->a);
                Expr da = diff(n->a);
                switch (n->fn) {
                    case UnaryFn::Sin: return Expr::apply(UnaryFn::Cos, a) * da;
                    case UnaryFn::Cos: return Expr(Rational(-1)) * Expr::apply(UnaryFn::Sin, a) * da;
                    case UnaryFn::Exp: return Expr::apply(UnaryFn::Exp, a) * da;
                    case UnaryFn::Log: return da / a;
                    case UnaryFn::Sqrt: return da / (Expr(Rational(2)) * Expr::apply(UnaryFn::Sqrt, a));
                }
            }
        }
        throw std::logic_error("unreachable expr kind");
    }

    int var_;
    std::unordered_map<const Expr::Node*, Expr> memo_;
};

}  // namespace

Expr differentiate(const Expr& e, int var_index) {
    if (var_index < 0) throw std::invalid_argument("var_index must be non-negative");
    Differ d(var_index);
    return d.diff(ExprBuilder::ptr(e));
}

namespace {

class Substituter {
public:
    explicit Substituter(std::span<const Expr> subs) : subs_(subs) {}

    Expr run(const std::shared_ptr<const Expr::Node>& n) {
        auto it = memo_.find(n.get());
        if (it != memo_.end()) return it->second;
        Expr r = compute(n);
        memo_.emplace(n.get(), r);
        return r;
    }

private:
    Expr compute(const std::shared_ptr<const Expr::Node>& n) {
        using K = Expr::Kind;
        switch (n->kind) {
            case K::Const: return Expr(n->value);
            case K::Var:
                if (n->var >= static_cast<int>(subs_.size()))
                    throw std::out_of_range("substitute: variable index out of range");
                return subs_[n->var];
            case K::Add: return run(n->a) + run(n->b);
            case K::Sub: return run(n->a) - run(n->b);
            case K::Mul: return run(n->a) * run(n->b);
            case K::Div: return run(n->a) / run(n->b);
            case K::Pow: return run(n->a).pow(n->exponent);
            case K::Fn: return Expr::apply(n->fn, run(n->a));
        }
        throw std::logic_error("unreachable expr kind");
    }

    std::span<const Expr> subs_;
    std::unordered_map<const Expr::Node*, Expr> memo_;
};

}  // namespace

Expr substitute(const Expr& e, std::span<const Expr> subs) {
    Substituter s(subs);
    return s.run(ExprBuilder::ptr(e));
}

namespace {

void print_node(std::ostream& os, const Expr::Node* n, const Chart* chart) {
    using K = Expr::Kind;
    switch (n->kind) {
        case K::Const: {
            Rational v = n->value;
            bool neg = v < 0;
            if (neg) {
                os << "(-";
                v = -v;
            }
            os << numerator(v);
            if (denominator(v) != 1) os << "/" << denominator(v);
            if (neg) os << ")";
            break;
        }
        case K::Var:
            if (chart && n->var < chart->dim)
                os << chart->var_names[n->var];
            else
                os << "x" << (n->var + 1);
            break;
        case K::Add:
        case K::Sub:
        case K::Mul:
        case K::Div: {
            const char* op = n->kind == K::Add   ? " + "
                             : n->kind == K::Sub ? " - "
                             : n->kind == K::Mul ? " * "
                                                 : " / ";
            os << "(";
            print_node(os, n->a.get(), chart);
            os << op;
            print_node(os, n->b.get(), chart);
            os << ")";
            break;
        }
        case K::Pow:
            os << "(";
            print_node(os, n->a.get(), chart);
            os << "^" << n->exponent << ")";
            break;
        case K::Fn:
            os << fn_name(n->fn) << "(";
            print_node(os, n->a.get(), chart);
            os << ")";
            break;
    }
}

}  // namespace

std::string to_string(const Expr& e, const Chart* chart) {
    std::ostringstream os;
    print_node(os, e.raw(), chart);
    return os.str();
}

Point Point::rational(std::vector<Rational> qs) {
    Point p;
    for (auto& q : qs) p.coords.push_back(Coord::rational(std::move(q)));
    return p;
}

Point Point::real(std::vector<double> ds) {
    Point p;
    for (double d : ds) p.coords.push_back(Coord::real(d));
    return p;
}

bool Point::all_exact() const {
    for (const auto& c : coords)
        if (!c.exact) return false;
    return true;
}

std::string Point::describe() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i) os << ", ";
        os << coords[i].as_double();
    }
    os << ")";
    return os.str();
}

const Rational& ExactEvaluator::visit(const std::shared_ptr<const Expr::Node>& n) {
    auto it = memo_.find(n.get());
    if (it != memo_.end()) return it->second;
    using K = Expr::Kind;
    Rational r;
    switch (n->kind) {
        case K::Const: r = n->value; break;
        case K::Var:
            if (n->var >= static_cast<int>(coords_.size()))
                throw std::out_of_range("evaluate: variable index out of range");
            r = coords_[n->var];
            break;
        case K::Add: r = visit(n->a) + visit(n->b); break;
        case K::Sub: r = visit(n->a) - visit(n->b); break;
        case K::Mul: r = visit(n->a) * visit(n->b); break;
        case K::Div: {
            const Rational& den = visit(n->b);
            if (den == 0)
                throw EvalError(EvalError::Kind::DivisionByZero, to_string(wrap_node(n)), "exact point");
            r = visit(n->a) / den;
            break;
        }
        case K::Pow: {
            Rational base = visit(n->a);
            int k = n->exponent;
            if (k < 0 && base == 0)
                throw EvalError(EvalError::Kind::DivisionByZero, to_string(wrap_node(n)), "exact point");
            Rational acc(1);
            for (int i = 0, m = k < 0 ? -k : k; i < m; ++i) acc *= base;
            r = k < 0 ? Rational(1) / acc : acc;
            break;
        }
        case K::Fn:
            throw EvalError(EvalError::Kind::DomainError,
                            to_string(wrap_node(n)), "exact evaluation of transcendental node");
    }
    return memo_.emplace(n.get(), std::move(r)).first->second;
}

Rational ExactEvaluator::eval(const Expr& e) { return visit(ExprBuilder::ptr(e)); }

double FloatEvaluator::visit(const std::shared_ptr<const Expr::Node>& n) {
    auto it = memo_.find(n.get());
    if (it != memo_.end()) return it->second;
    using K = Expr::Kind;
    double r = 0;
    switch (n->kind) {
        case K::Const: r = n->value.convert_to<double>(); break;
        case K::Var:
            if (n->var >= static_cast<int>(coords_.size()))
                throw std::out_of_range("evaluate: variable index out of range");
            r = coords_[n->var];
            break;
        case K::Add: r = visit(n->a) + visit(n->b); break;
        case K::Sub: r = visit(n->a) - visit(n->b); break;
        case K::Mul: r = visit(n->a) * visit(n->b); break;
        case K::Div: {
            double den = visit(n->b);
            if (den == 0.0)
                throw EvalError(EvalError::Kind::DivisionByZero, to_string(wrap_node(n)), "float point");
            r = visit(n->a) / den;
            break;
        }
        case K::Pow: r = std::pow(visit(n->a), n->exponent); break;
        case K::Fn: {
            double a = visit(n->a);
            switch (n->fn) {
                case UnaryFn::Sin: r = std::sin(a); break;
                case UnaryFn::Cos: r = std::cos(a); break;
                case UnaryFn::Exp: r = std::exp(a); break;
                case UnaryFn::Log:
                    if (a <= 0.0)
                        throw EvalError(EvalError::Kind::DomainError, to_string(wrap_node(n)),
                                        "log argument not positive");
                    r = std::log(a);
                    break;
                case UnaryFn::Sqrt:
                    if (a < 0.0)
                        throw EvalError(EvalError::Kind::DomainError, to_string(wrap_node(n)),
                                        "sqrt argument negative");
                    r = std::sqrt(a);
                    break;
            }
            break;
        }
    }
    if (!std::isfinite(r))
        throw EvalError(EvalError::Kind::DomainError, to_string(wrap_node(n)), "non-finite value");
    if (std::abs(r) > max_abs_) max_abs_ = std::abs(r);
    return memo_.emplace(n.get(), r).first->second;
}

double FloatEvaluator::eval(const Expr& e) { return visit(ExprBuilder::ptr(e)); }

Value evaluate(const Expr& e, const Point& p) {
    Value v;
    if (e.is_rational_expr() && p.all_exact()) {
        std::vector<Rational> qs;
        qs.reserve(p.coords.size());
        for (const auto& c : p.coords) qs.push_back(c.q);
        ExactEvaluator ev(std::move(qs));
        try {
            v.q = ev.eval(e);
        } catch (EvalError& err) {
            err.point = p.describe();
            throw;
        }
        v.exact = true;
        v.d = v.q.convert_to<double>();
        return v;
    }
    std::vector<double> ds;
    ds.reserve(p.coords.size());
    for (const auto& c : p.coords) ds.push_back(c.as_double());
    FloatEvaluator ev(std::move(ds));
    try {
        v.d = ev.eval(e);
    } catch (EvalError& err) {
        err.point = p.describe();
        throw;
    }
    return v;
}

}  // namespace sepvar

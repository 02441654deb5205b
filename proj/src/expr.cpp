#include "rdsym/expr.hpp"

#include "rdsym/error.hpp"
#include "rdsym/simd/kernels.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace rdsym::expr {
namespace {

using Kind = Node::Kind;

NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::number;
    n->value = v;
    return n;
}

NodePtr make_variable(std::size_t index) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::variable;
    n->index = index;
    return n;
}

NodePtr make_unary(Kind kind, NodePtr operand, Func func = Func::sin) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->func = func;
    n->lhs = std::move(operand);
    return n;
}

NodePtr make_binary(Kind kind, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

const char* func_name(Func f) {
    switch (f) {
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::exp: return "exp";
        case Func::ln: return "ln";
        case Func::sqrt: return "sqrt";
        case Func::abs: return "abs";
    }
    return "?";
}

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_space();
        if (pos_ != src_.size()) {
            throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
        }
        return e;
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                      src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make_binary(Kind::add, lhs, term());
            } else if (accept('-')) {
                lhs = make_binary(Kind::sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_binary(Kind::mul, lhs, unary());
            } else if (accept('/')) {
                lhs = make_binary(Kind::div, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make_unary(Kind::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make_binary(Kind::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = expression();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            // Exponent only when followed by digits (optionally signed);
            // otherwise "2e" is left for the identifier rule to reject.
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                pos_ = look;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    ++pos_;
                }
            }
        }
        double value = 0.0;
        const auto* first = src_.data() + start;
        const auto* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
        return make_number(value);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));

        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static constexpr std::array<std::pair<const char*, Func>, 6> kFuncs{{
                {"sin", Func::sin},
                {"cos", Func::cos},
                {"exp", Func::exp},
                {"ln", Func::ln},
                {"sqrt", Func::sqrt},
                {"abs", Func::abs},
            }};
            for (const auto& [fname, f] : kFuncs) {
                if (name == fname) {
                    ++pos_;
                    NodePtr arg = expression();
                    if (!accept(')')) throw ParseError("expected ')' after argument", pos_);
                    return make_unary(Kind::call, arg, f);
                }
            }
            throw ParseError("unknown function '" + name + "'", start);
        }

        const auto it = std::find(vars_.begin(), vars_.end(), name);
        if (it != vars_.end()) return make_variable(static_cast<std::size_t>(it - vars_.begin()));
        if (name == "pi") return make_number(std::numbers::pi);
        if (name == "e") return make_number(std::numbers::e);
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    std::string_view src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

[[noreturn]] void domain_fail(const char* what, double arg) {
    throw DomainError(std::string(what) + " (argument " + std::to_string(arg) + ")");
}

double apply_func(Func f, double x) {
    switch (f) {
        case Func::sin: return std::sin(x);
        case Func::cos: return std::cos(x);
        case Func::exp: return std::exp(x);
        case Func::ln:
            if (!(x > 0.0)) domain_fail("ln of non-positive argument", x);
            return std::log(x);
        case Func::sqrt:
            if (!(x >= 0.0)) domain_fail("sqrt of negative argument", x);
            return std::sqrt(x);
        case Func::abs: return std::fabs(x);
    }
    return 0.0;
}

double apply_pow(double base, double exponent) {
    if (base < 0.0 && exponent != std::trunc(exponent)) {
        domain_fail("fractional power of negative base", base);
    }
    if (base == 0.0 && exponent < 0.0) domain_fail("negative power of zero", base);
    return std::pow(base, exponent);
}

bool small_integer(double v) { return v == std::trunc(v) && std::fabs(v) <= 64.0; }

NodePtr fold(const NodePtr& n, const std::vector<std::ptrdiff_t>& remap,
             const std::vector<double>& bound) {
    switch (n->kind) {
        case Kind::number:
            return n;
        case Kind::variable: {
            const std::ptrdiff_t target = remap[n->index];
            if (target < 0) return make_number(bound[n->index]);
            return make_variable(static_cast<std::size_t>(target));
        }
        case Kind::neg:
        case Kind::call: {
            NodePtr a = fold(n->lhs, remap, bound);
            if (a->kind == Kind::number) {
                return make_number(n->kind == Kind::neg ? -a->value : apply_func(n->func, a->value));
            }
            return make_unary(n->kind, a, n->func);
        }
        default: {
            NodePtr a = fold(n->lhs, remap, bound);
            NodePtr b = fold(n->rhs, remap, bound);
            if (a->kind == Kind::number && b->kind == Kind::number) {
                const double x = a->value;
                const double y = b->value;
                switch (n->kind) {
                    case Kind::add: return make_number(x + y);
                    case Kind::sub: return make_number(x - y);
                    case Kind::mul: return make_number(x * y);
                    case Kind::div: return make_number(x / y);
                    case Kind::pow:
                        return make_number(small_integer(y)
                                               ? integer_power(x, static_cast<std::int32_t>(y))
                                               : apply_pow(x, y));
                    default: break;
                }
            }
            return make_binary(n->kind, a, b);
        }
    }
}

void print(const NodePtr& n, const std::vector<std::string>& vars, std::string& out) {
    switch (n->kind) {
        case Kind::number: {
            std::array<char, 64> buf{};
            auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n->value);
            (void)ec;
            const std::string text(buf.data(), ptr);
            if (n->value < 0.0 || text.find_first_of("in") != std::string::npos) {
                out += "(" + text + ")";
            } else {
                out += text;
            }
            return;
        }
        case Kind::variable:
            out += vars[n->index];
            return;
        case Kind::neg:
            out += "(-";
            print(n->lhs, vars, out);
            out += ")";
            return;
        case Kind::call:
            out += func_name(n->func);
            out += "(";
            print(n->lhs, vars, out);
            out += ")";
            return;
        default: {
            const char* op = n->kind == Kind::add   ? " + "
                             : n->kind == Kind::sub ? " - "
                             : n->kind == Kind::mul ? " * "
                             : n->kind == Kind::div ? " / "
                                                    : " ^ ";
            out += "(";
            print(n->lhs, vars, out);
            out += op;
            print(n->rhs, vars, out);
            out += ")";
            return;
        }
    }
}

void emit(const NodePtr& n, std::vector<Instr>& prog, std::size_t depth, std::size_t& max_depth) {
    max_depth = std::max(max_depth, depth + 1);
    switch (n->kind) {
        case Kind::number:
            prog.push_back({Instr::Op::constant, Func::sin, 0, 0, n->value});
            return;
        case Kind::variable:
            prog.push_back({Instr::Op::variable, Func::sin, 0, n->index, 0.0});
            return;
        case Kind::neg:
            emit(n->lhs, prog, depth, max_depth);
            prog.push_back({Instr::Op::neg});
            return;
        case Kind::call:
            emit(n->lhs, prog, depth, max_depth);
            prog.push_back({Instr::Op::call, n->func});
            return;
        case Kind::pow:
            if (n->rhs->kind == Kind::number && small_integer(n->rhs->value)) {
                emit(n->lhs, prog, depth, max_depth);
                prog.push_back({Instr::Op::ipow, Func::sin, static_cast<std::int32_t>(n->rhs->value)});
                return;
            }
            [[fallthrough]];
        default: {
            emit(n->lhs, prog, depth, max_depth);
            emit(n->rhs, prog, depth + 1, max_depth);
            Instr::Op op = Instr::Op::add;
            switch (n->kind) {
                case Kind::sub: op = Instr::Op::sub; break;
                case Kind::mul: op = Instr::Op::mul; break;
                case Kind::div: op = Instr::Op::div; break;
                case Kind::pow: op = Instr::Op::pow; break;
                default: break;
            }
            prog.push_back({op});
            return;
        }
    }
}

constexpr std::size_t kChunk = 256;

}  // namespace

double integer_power(double x, std::int32_t n) noexcept {
    if (n < 0) return 1.0 / integer_power(x, -n);
    double result = 1.0;
    double base = x;
    auto e = static_cast<std::uint32_t>(n);
    while (e != 0) {
        if ((e & 1u) != 0) result *= base;
        e >>= 1u;
        if (e != 0) base *= base;
    }
    return result;
}

Expression::Expression(NodePtr root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables)) {
    compile();
}

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
    Parser parser(source, variables);
    NodePtr root = parser.run();
    return Expression(std::move(root), std::move(variables));
}

Expression Expression::constant(double value, std::vector<std::string> variables) {
    return Expression(make_number(value), std::move(variables));
}

void Expression::compile() {
    program_.clear();
    max_depth_ = 0;
    emit(root_, program_, 0, max_depth_);
}

double Expression::evaluate(std::span<const double> values) const {
    if (values.size() != variables_.size()) {
        throw ValidationError("expression expects " + std::to_string(variables_.size()) +
                              " argument(s), got " + std::to_string(values.size()));
    }
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_depth_ > kInline) {
        large.resize(max_depth_);
        stack = large.data();
    }
    std::size_t top = 0;
    for (const Instr& ins : program_) {
        switch (ins.op) {
            case Instr::Op::constant: stack[top++] = ins.value; break;
            case Instr::Op::variable: stack[top++] = values[ins.index]; break;
            case Instr::Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Instr::Op::call: stack[top - 1] = apply_func(ins.func, stack[top - 1]); break;
            case Instr::Op::ipow:
                if (ins.exponent < 0 && stack[top - 1] == 0.0) domain_fail("negative power of zero", 0.0);
                stack[top - 1] = integer_power(stack[top - 1], ins.exponent);
                break;
            case Instr::Op::add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
            case Instr::Op::sub: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
            case Instr::Op::mul: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
            case Instr::Op::div: --top; stack[top - 1] = stack[top - 1] / stack[top]; break;
            case Instr::Op::pow: --top; stack[top - 1] = apply_pow(stack[top - 1], stack[top]); break;
        }
    }
    const double result = stack[0];
    if (!std::isfinite(result)) {
        throw DomainError("expression '" + to_string() + "' is not finite at the given point");
    }
    return result;
}

void Expression::evaluate_batch(std::span<const std::span<const double>> columns,
                                std::span<double> out) const {
    if (columns.size() != variables_.size()) {
        throw ValidationError("expression expects " + std::to_string(variables_.size()) +
                              " column(s), got " + std::to_string(columns.size()));
    }
    const std::size_t n = out.size();
    for (const auto& col : columns) {
        if (col.size() != n) throw ValidationError("batch columns differ in length");
    }
    const auto& k = simd::active();
    std::vector<double> stack(std::max<std::size_t>(max_depth_, 1) * kChunk);
    // A slot holding a broadcast constant is tracked as scalar to avoid
    // materialising it.
    std::vector<double> scalar_value(std::max<std::size_t>(max_depth_, 1));
    std::vector<char> is_scalar(std::max<std::size_t>(max_depth_, 1));

    for (std::size_t base = 0; base < n; base += kChunk) {
        const std::size_t len = std::min(kChunk, n - base);
        std::size_t top = 0;
        auto slot = [&](std::size_t s) { return stack.data() + s * kChunk; };
        auto materialise = [&](std::size_t s) {
            if (is_scalar[s]) {
                std::fill_n(slot(s), len, scalar_value[s]);
                is_scalar[s] = 0;
            }
        };
        for (const Instr& ins : program_) {
            switch (ins.op) {
                case Instr::Op::constant:
                    is_scalar[top] = 1;
                    scalar_value[top] = ins.value;
                    ++top;
                    break;
                case Instr::Op::variable:
                    std::copy_n(columns[ins.index].data() + base, len, slot(top));
                    is_scalar[top] = 0;
                    ++top;
                    break;
                case Instr::Op::neg:
                    if (is_scalar[top - 1]) {
                        scalar_value[top - 1] = -scalar_value[top - 1];
                    } else {
                        k.neg(slot(top - 1), slot(top - 1), len);
                    }
                    break;
                case Instr::Op::call:
                    if (is_scalar[top - 1]) {
                        scalar_value[top - 1] = apply_func(ins.func, scalar_value[top - 1]);
                    } else {
                        double* p = slot(top - 1);
                        for (std::size_t i = 0; i < len; ++i) p[i] = apply_func(ins.func, p[i]);
                    }
                    break;
                case Instr::Op::ipow:
                    if (is_scalar[top - 1]) {
                        scalar_value[top - 1] = integer_power(scalar_value[top - 1], ins.exponent);
                    } else {
                        double* p = slot(top - 1);
                        if (ins.exponent == 2) {
                            k.mul(p, p, p, len);
                        } else {
                            for (std::size_t i = 0; i < len; ++i) {
                                if (ins.exponent < 0 && p[i] == 0.0) domain_fail("negative power of zero", 0.0);
                                p[i] = integer_power(p[i], ins.exponent);
                            }
                        }
                    }
                    break;
                default: {
                    --top;
                    const std::size_t a = top - 1;
                    const std::size_t b = top;
                    if (is_scalar[a] && is_scalar[b]) {
                        const double x = scalar_value[a];
                        const double y = scalar_value[b];
                        double r = 0.0;
                        switch (ins.op) {
                            case Instr::Op::add: r = x + y; break;
                            case Instr::Op::sub: r = x - y; break;
                            case Instr::Op::mul: r = x * y; break;
                            case Instr::Op::div: r = x / y; break;
                            default: r = apply_pow(x, y); break;
                        }
                        scalar_value[a] = r;
                        break;
                    }
                    if (ins.op == Instr::Op::pow) {
                        materialise(a);
                        materialise(b);
                        double* pa = slot(a);
                        const double* pb = slot(b);
                        for (std::size_t i = 0; i < len; ++i) pa[i] = apply_pow(pa[i], pb[i]);
                        break;
                    }
                    if (is_scalar[b]) {
                        const double y = scalar_value[b];
                        double* pa = slot(a);
                        switch (ins.op) {
                            case Instr::Op::add: k.add_scalar(pa, y, pa, len); break;
                            case Instr::Op::sub: k.add_scalar(pa, -y, pa, len); break;
                            case Instr::Op::mul: k.mul_scalar(pa, y, pa, len); break;
                            default: {
                                // x / y is not x * (1/y) bitwise, keep the division.
                                materialise(b);
                                k.div(pa, slot(b), pa, len);
                                break;
                            }
                        }
                        break;
                    }
                    if (is_scalar[a]) {
                        const double x = scalar_value[a];
                        const double* pb = slot(b);
                        double* pa = slot(a);
                        switch (ins.op) {
                            case Instr::Op::add: k.add_scalar(pb, x, pa, len); break;
                            case Instr::Op::sub: k.scalar_sub(x, pb, pa, len); break;
                            case Instr::Op::mul: k.mul_scalar(pb, x, pa, len); break;
                            default: k.scalar_div(x, pb, pa, len); break;
                        }
                        is_scalar[a] = 0;
                        break;
                    }
                    double* pa = slot(a);
                    const double* pb = slot(b);
                    switch (ins.op) {
                        case Instr::Op::add: k.add(pa, pb, pa, len); break;
                        case Instr::Op::sub: k.sub(pa, pb, pa, len); break;
                        case Instr::Op::mul: k.mul(pa, pb, pa, len); break;
                        default: k.div(pa, pb, pa, len); break;
                    }
                    break;
                }
            }
        }
        materialise(0);
        double* result = slot(0);
        for (std::size_t i = 0; i < len; ++i) {
            if (!std::isfinite(result[i])) {
                throw DomainError("expression '" + to_string() + "' is not finite at batch index " +
                                  std::to_string(base + i));
            }
        }
        std::copy_n(result, len, out.data() + base);
    }
}

Expression Expression::bind(const std::map<std::string, double>& values) const {
    std::vector<std::ptrdiff_t> remap(variables_.size(), -1);
    std::vector<double> bound(variables_.size(), 0.0);
    std::vector<std::string> remaining;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto it = values.find(variables_[i]);
        if (it == values.end()) {
            remap[i] = static_cast<std::ptrdiff_t>(remaining.size());
            remaining.push_back(variables_[i]);
        } else {
            bound[i] = it->second;
        }
    }
    return Expression(fold(root_, remap, bound), std::move(remaining));
}

std::string Expression::to_string() const {
    std::string out;
    print(root_, variables_, out);
    return out;
}

}  // namespace rdsym::expr

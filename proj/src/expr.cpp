#include "tsoc/expr.hpp"

#include "tsoc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <system_error>

namespace tsoc {

namespace {

enum class NodeKind : unsigned char { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class FuncId : unsigned char { Sin, Cos, Exp, Log, Sqrt, Abs };

struct Node {
    NodeKind kind;
    FuncId func = FuncId::Sin;
    double number = 0.0;
    int lhs = -1;
    int rhs = -1;
    int var = -1; // index into Arena::var_names
};

} // namespace

/// Nodes are stored bottom-up (children precede parents); the last node is
/// the root, so evaluation is a single linear sweep.
struct Expr::Arena {
    std::vector<Node> nodes;
    std::vector<std::string> var_names; // unique, in first-appearance order
    std::vector<std::string> sorted_names;
};

namespace {

// --- tokenizer ---

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    TokKind kind;
    std::size_t offset;
    double number = 0.0;
    std::string_view text;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        current_.offset = pos_;
        if (pos_ >= text_.size()) {
            current_.kind = TokKind::End;
            return;
        }
        const char c = text_[pos_];
        switch (c) {
        case '+': current_.kind = TokKind::Plus; ++pos_; return;
        case '-': current_.kind = TokKind::Minus; ++pos_; return;
        case '*': current_.kind = TokKind::Star; ++pos_; return;
        case '/': current_.kind = TokKind::Slash; ++pos_; return;
        case '^': current_.kind = TokKind::Caret; ++pos_; return;
        case '(': current_.kind = TokKind::LParen; ++pos_; return;
        case ')': current_.kind = TokKind::RParen; ++pos_; return;
        default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
                ++end;
            }
            current_.kind = TokKind::Ident;
            current_.text = text_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        throw SyntaxError("syntax error at offset " + std::to_string(pos_) +
                              ": unexpected character '" + std::string(1, c) + "'",
                          pos_);
    }

    void lex_number() {
        std::size_t end = pos_;
        bool seen_digit = false;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) {
            ++end;
            seen_digit = true;
        }
        if (end < text_.size() && text_[end] == '.') {
            ++end;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) {
                ++end;
                seen_digit = true;
            }
        }
        if (!seen_digit) {
            throw SyntaxError("syntax error at offset " + std::to_string(pos_) +
                                  ": malformed number",
                              pos_);
        }
        // Exponent only when it is fully formed; "2exp" stays "2" then "exp".
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t exp_end = end + 1;
            if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) {
                ++exp_end;
            }
            std::size_t digits = exp_end;
            while (digits < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[digits]))) {
                ++digits;
            }
            if (digits > exp_end) {
                end = digits;
            }
        }
        const std::string literal(text_.substr(pos_, end - pos_));
        char* parse_end = nullptr;
        const double value = std::strtod(literal.c_str(), &parse_end);
        if (parse_end != literal.c_str() + literal.size()) {
            throw SyntaxError("syntax error at offset " + std::to_string(pos_) +
                                  ": malformed number '" + literal + "'",
                              pos_);
        }
        current_.kind = TokKind::Number;
        current_.number = value;
        pos_ = end;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token current_{TokKind::End, 0, 0.0, {}};
};

// --- parser ---

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) {}

    std::shared_ptr<Expr::Arena> run() {
        auto arena = std::make_shared<Expr::Arena>();
        arena_ = arena.get();
        const int root = parse_sum();
        const Token& t = lexer_.peek();
        if (t.kind != TokKind::End) {
            throw SyntaxError("syntax error at offset " + std::to_string(t.offset) +
                                  ": expected an operator or end of input",
                              t.offset);
        }
        (void)root; // root is by construction the last node
        arena->sorted_names = arena->var_names;
        std::sort(arena->sorted_names.begin(), arena->sorted_names.end());
        return arena;
    }

private:
    int push(Node n) {
        arena_->nodes.push_back(n);
        return static_cast<int>(arena_->nodes.size()) - 1;
    }

    int parse_sum() {
        int lhs = parse_product();
        while (true) {
            const TokKind k = lexer_.peek().kind;
            if (k != TokKind::Plus && k != TokKind::Minus) {
                return lhs;
            }
            lexer_.take();
            const int rhs = parse_product();
            Node n;
            n.kind = k == TokKind::Plus ? NodeKind::Add : NodeKind::Sub;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = push(n);
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        while (true) {
            const TokKind k = lexer_.peek().kind;
            if (k != TokKind::Star && k != TokKind::Slash) {
                return lhs;
            }
            lexer_.take();
            const int rhs = parse_unary();
            Node n;
            n.kind = k == TokKind::Star ? NodeKind::Mul : NodeKind::Div;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = push(n);
        }
    }

    int parse_unary() {
        if (lexer_.peek().kind == TokKind::Minus) {
            lexer_.take();
            const int operand = parse_unary();
            Node n;
            n.kind = NodeKind::Neg;
            n.lhs = operand;
            return push(n);
        }
        return parse_power();
    }

    int parse_power() {
        const int base = parse_atom();
        if (lexer_.peek().kind != TokKind::Caret) {
            return base;
        }
        lexer_.take();
        const int exponent = parse_unary(); // right-associative, minus allowed
        Node n;
        n.kind = NodeKind::Pow;
        n.lhs = base;
        n.rhs = exponent;
        return push(n);
    }

    int parse_atom() {
        const Token t = lexer_.take();
        switch (t.kind) {
        case TokKind::Number: {
            Node n;
            n.kind = NodeKind::Number;
            n.number = t.number;
            return push(n);
        }
        case TokKind::Ident: {
            if (lexer_.peek().kind == TokKind::LParen) {
                return parse_call(t);
            }
            Node n;
            n.kind = NodeKind::Variable;
            n.var = intern_variable(t.text);
            return push(n);
        }
        case TokKind::LParen: {
            const int inner = parse_sum();
            expect_rparen();
            return inner;
        }
        default:
            throw SyntaxError("syntax error at offset " + std::to_string(t.offset) +
                                  ": expected a number, variable, function call or '('",
                              t.offset);
        }
    }

    int parse_call(const Token& name) {
        static constexpr std::pair<std::string_view, FuncId> kFunctions[] = {
            {"sin", FuncId::Sin}, {"cos", FuncId::Cos},   {"exp", FuncId::Exp},
            {"log", FuncId::Log}, {"sqrt", FuncId::Sqrt}, {"abs", FuncId::Abs},
        };
        FuncId func = FuncId::Sin;
        bool known = false;
        for (auto [fname, id] : kFunctions) {
            if (name.text == fname) {
                func = id;
                known = true;
                break;
            }
        }
        if (!known) {
            throw UnknownFunction("unknown function '" + std::string(name.text) +
                                  "' at offset " + std::to_string(name.offset));
        }
        lexer_.take(); // '('
        const int arg = parse_sum();
        expect_rparen();
        Node n;
        n.kind = NodeKind::Call;
        n.func = func;
        n.lhs = arg;
        return push(n);
    }

    void expect_rparen() {
        const Token t = lexer_.take();
        if (t.kind != TokKind::RParen) {
            throw SyntaxError("syntax error at offset " + std::to_string(t.offset) +
                                  ": expected ')'",
                              t.offset);
        }
    }

    int intern_variable(std::string_view name) {
        auto& names = arena_->var_names;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                return static_cast<int>(i);
            }
        }
        names.emplace_back(name);
        return static_cast<int>(names.size()) - 1;
    }

    Lexer lexer_;
    Expr::Arena* arena_ = nullptr;
};

Dual apply_call(FuncId func, Dual x) {
    switch (func) {
    case FuncId::Sin: return sin(x);
    case FuncId::Cos: return cos(x);
    case FuncId::Exp: return exp(x);
    case FuncId::Log: return log(x);
    case FuncId::Sqrt: return sqrt(x);
    case FuncId::Abs: return abs(x);
    }
    throw Error("unreachable function id");
}

Dual eval_arena(const std::vector<Node>& nodes,
                const std::vector<std::size_t>* slot_of_var,
                std::span<const Dual> slots) {
    constexpr std::size_t kStackNodes = 64;
    Dual local[kStackNodes];
    std::vector<Dual> heap;
    Dual* out = local;
    if (nodes.size() > kStackNodes) {
        heap.resize(nodes.size());
        out = heap.data();
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        switch (n.kind) {
        case NodeKind::Number: out[i] = Dual::constant(n.number); break;
        case NodeKind::Variable:
            out[i] = slots[slot_of_var ? (*slot_of_var)[static_cast<std::size_t>(n.var)]
                                       : static_cast<std::size_t>(n.var)];
            break;
        case NodeKind::Neg: out[i] = -out[n.lhs]; break;
        case NodeKind::Add: out[i] = out[n.lhs] + out[n.rhs]; break;
        case NodeKind::Sub: out[i] = out[n.lhs] - out[n.rhs]; break;
        case NodeKind::Mul: out[i] = out[n.lhs] * out[n.rhs]; break;
        case NodeKind::Div: out[i] = out[n.lhs] / out[n.rhs]; break;
        case NodeKind::Pow: out[i] = pow(out[n.lhs], out[n.rhs]); break;
        case NodeKind::Call: out[i] = apply_call(n.func, out[n.lhs]); break;
        }
    }
    return out[nodes.size() - 1];
}

} // namespace

Expr Expr::parse(std::string_view text) {
    std::size_t first = 0;
    while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) {
        ++first;
    }
    if (first == text.size()) {
        throw SyntaxError("syntax error at offset 0: empty expression", 0);
    }
    return Expr(Parser(text).run());
}

Expr Expr::number(double value) {
    auto arena = std::make_shared<Arena>();
    Node n;
    n.kind = NodeKind::Number;
    n.number = value;
    arena->nodes.push_back(n);
    return Expr(std::move(arena));
}

const std::vector<std::string>& Expr::variables() const { return arena_->sorted_names; }

bool Expr::references(std::string_view name) const {
    for (const auto& v : arena_->var_names) {
        if (v == name) {
            return true;
        }
    }
    return false;
}

namespace {

std::vector<Dual> duals_from_env(const std::vector<std::string>& names, const Env& env,
                                 std::string_view seed_name) {
    std::vector<Dual> duals;
    duals.reserve(names.size());
    for (const auto& name : names) {
        auto it = env.find(name);
        if (it == env.end()) {
            throw UnknownVariable("variable '" + name + "' is not bound");
        }
        duals.emplace_back(it->second, name == seed_name ? 1.0 : 0.0);
    }
    return duals;
}

} // namespace

double Expr::eval(const Env& env) const {
    const auto duals = duals_from_env(arena_->var_names, env, {});
    return eval_arena(arena_->nodes, nullptr, duals).v;
}

double Expr::partial(std::string_view wrt, const Env& env) const {
    if (env.find(wrt) == env.end()) {
        throw UnknownVariable("variable '" + std::string(wrt) + "' is not bound");
    }
    const auto duals = duals_from_env(arena_->var_names, env, wrt);
    return eval_arena(arena_->nodes, nullptr, duals).d;
}

Expr::Bound Expr::bind(std::span<const std::string> slot_names) const {
    std::vector<std::size_t> mapping;
    mapping.reserve(arena_->var_names.size());
    auto find_slot = [&](std::string_view name) -> int {
        for (std::size_t i = 0; i < slot_names.size(); ++i) {
            if (slot_names[i] == name) {
                return static_cast<int>(i);
            }
        }
        return -1;
    };
    for (const auto& name : arena_->var_names) {
        int slot = find_slot(name);
        if (slot < 0 && name == "x") {
            slot = find_slot("x1");
        }
        if (slot < 0 && name == "u") {
            slot = find_slot("u1");
        }
        if (slot < 0) {
            throw UnknownVariable("variable '" + name + "' is not declared here");
        }
        mapping.push_back(static_cast<std::size_t>(slot));
    }
    return Bound(arena_, std::move(mapping));
}

double Expr::Bound::eval(std::span<const double> slots) const {
    constexpr std::size_t kStackSlots = 32;
    Dual local[kStackSlots];
    std::vector<Dual> heap;
    Dual* duals = local;
    if (slots.size() > kStackSlots) {
        heap.resize(slots.size());
        duals = heap.data();
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        duals[i] = Dual::constant(slots[i]);
    }
    return eval_arena(arena_->nodes, &slot_of_var_, {duals, slots.size()}).v;
}

Dual Expr::Bound::eval_dual(std::span<const Dual> slots) const {
    return eval_arena(arena_->nodes, &slot_of_var_, slots);
}

double Expr::Bound::partial(std::size_t slot, std::span<const double> slots) const {
    constexpr std::size_t kStackSlots = 32;
    Dual local[kStackSlots];
    std::vector<Dual> heap;
    Dual* duals = local;
    if (slots.size() > kStackSlots) {
        heap.resize(slots.size());
        duals = heap.data();
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        duals[i] = Dual(slots[i], i == slot ? 1.0 : 0.0);
    }
    return eval_arena(arena_->nodes, &slot_of_var_, {duals, slots.size()}).d;
}

// --- pretty printing ---

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

std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void print_node(const Expr::Arena& arena, int idx, int required_prec, std::string& out) {
    const Node& n = arena.nodes[static_cast<std::size_t>(idx)];
    const int prec = precedence(n.kind);
    const bool parens = prec < required_prec;
    if (parens) {
        out += '(';
    }
    switch (n.kind) {
    case NodeKind::Number: out += format_number(n.number); break;
    case NodeKind::Variable: out += arena.var_names[static_cast<std::size_t>(n.var)]; break;
    case NodeKind::Neg:
        out += '-';
        print_node(arena, n.lhs, 3, out);
        break;
    case NodeKind::Add:
    case NodeKind::Sub:
        print_node(arena, n.lhs, 1, out);
        out += n.kind == NodeKind::Add ? " + " : " - ";
        print_node(arena, n.rhs, 2, out);
        break;
    case NodeKind::Mul:
    case NodeKind::Div:
        print_node(arena, n.lhs, 2, out);
        out += n.kind == NodeKind::Mul ? "*" : "/";
        print_node(arena, n.rhs, 3, out);
        break;
    case NodeKind::Pow:
        print_node(arena, n.lhs, 5, out);
        out += '^';
        print_node(arena, n.rhs, 3, out);
        break;
    case NodeKind::Call: {
        switch (n.func) {
        case FuncId::Sin: out += "sin"; break;
        case FuncId::Cos: out += "cos"; break;
        case FuncId::Exp: out += "exp"; break;
        case FuncId::Log: out += "log"; break;
        case FuncId::Sqrt: out += "sqrt"; break;
        case FuncId::Abs: out += "abs"; break;
        }
        out += '(';
        print_node(arena, n.lhs, 0, out);
        out += ')';
        break;
    }
    }
    if (parens) {
        out += ')';
    }
}

} // namespace

std::string Expr::to_string() const {
    std::string out;
    print_node(*arena_, static_cast<int>(arena_->nodes.size()) - 1, 0, out);
    return out;
}

} // namespace tsoc

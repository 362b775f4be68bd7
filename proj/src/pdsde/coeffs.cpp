#include "pdsde/coeffs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pdsde/error.hpp"

namespace pdsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double checked(double x, const char* op) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite intermediate in ") + op);
    return x;
}

void append_double(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

class Parser {
public:
    Parser(std::string_view src, std::size_t dim, const TimeGrid& grid) : src_(src), dim_(dim), grid_(grid) {}

    CoeffExpr run() {
        if (src_.find_first_not_of(" \t\r\n") == std::string_view::npos) fail("empty expression", 0);
        const std::uint32_t root = expr(0);
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
        return CoeffExpr(dim_, grid_.segment_columns(), std::move(nodes_), root);
    }

private:
    using Op = CoeffExpr::Op;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(msg, at + 1); }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'", pos_);
    }

    std::uint32_t add(CoeffExpr::Node n) {
        nodes_.push_back(n);
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    void enter(std::size_t depth) const {
        if (depth >= kMaxExprDepth) fail("expression nesting exceeds depth limit", pos_);
    }

    std::uint32_t expr(std::size_t depth) {
        enter(depth);
        std::uint32_t lhs = term(depth + 1);
        for (;;) {
            if (accept('+')) {
                lhs = add({Op::Add, lhs, term(depth + 1)});
            } else if (accept('-')) {
                lhs = add({Op::Sub, lhs, term(depth + 1)});
            } else {
                return lhs;
            }
        }
    }

    std::uint32_t term(std::size_t depth) {
        enter(depth);
        std::uint32_t lhs = factor(depth + 1);
        for (;;) {
            if (accept('*')) {
                lhs = add({Op::Mul, lhs, factor(depth + 1)});
            } else if (accept('/')) {
                lhs = add({Op::Div, lhs, factor(depth + 1)});
            } else {
                return lhs;
            }
        }
    }

    std::uint32_t factor(std::size_t depth) {
        enter(depth);
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const std::uint32_t inner = expr(depth + 1);
            expect(')');
            return inner;
        }
        if (c == '-') {
            ++pos_;
            return add({Op::Neg, factor(depth + 1)});
        }
        if ((c >= '0' && c <= '9') || c == '.') return add({Op::Number, 0, 0, number(false)});
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier(depth);
        fail("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    double number(bool allow_sign) {
        skip_ws();
        const std::size_t start = pos_;
        if (allow_sign && pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) ++pos_;
        const std::size_t digits_start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
        if (pos_ == digits_start) fail("expected a number", pos_);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t k = pos_ + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                pos_ = k;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        const char* first = src_.data() + (src_[start] == '+' ? start + 1 : start);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(first, src_.data() + pos_, value);
        if (ec != std::errc() || ptr != src_.data() + pos_) fail("malformed number", start);
        return value;
    }

    std::size_t coordinate() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected a coordinate index", pos_);
        std::size_t idx = 0;
        std::from_chars(src_.data() + start, src_.data() + pos_, idx);
        coord_pos_ = start;
        return idx;
    }

    // Parses "x[i](theta)" after the 'x'; the index and lag are validated once
    // the reference is syntactically complete.
    CoeffExpr::Node lagref(Op op) {
        expect('[');
        const std::size_t idx = coordinate();
        const std::size_t idx_pos = coord_pos_;
        expect(']');
        expect('(');
        skip_ws();
        const std::size_t lag_pos = pos_;
        const double theta = number(true);
        expect(')');
        if (idx < 1 || idx > dim_) {
            fail("coordinate index " + std::to_string(idx) + " out of range [1, " + std::to_string(dim_) + "]", idx_pos);
        }
        std::size_t col = 0;
        try {
            col = grid_.column_of_lag(theta);
        } catch (const DomainError& e) {
            fail(e.what(), lag_pos);
        }
        return {op, static_cast<std::uint32_t>(idx - 1), static_cast<std::uint32_t>(col), theta};
    }

    std::uint32_t identifier(std::size_t depth) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "t") return add({Op::Time});
        if (name == "x") return add(lagref(Op::Lag));
        if (name == "E") {
            expect('[');
            skip_ws();
            const std::size_t inner = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            const std::string_view what = src_.substr(inner, pos_ - inner);
            std::uint32_t node = 0;
            if (what == "supnorm") {
                node = add({Op::MeanSupnorm});
            } else if (what == "x") {
                node = add(lagref(Op::MeanLag));
            } else {
                fail("unknown measure terminal '" + std::string(what) + "'", inner);
            }
            expect(']');
            return node;
        }
        Op op;
        int arity = 1;
        if (name == "min") {
            op = Op::Min;
            arity = 2;
        } else if (name == "max") {
            op = Op::Max;
            arity = 2;
        } else if (name == "exp") {
            op = Op::Exp;
        } else if (name == "tanh") {
            op = Op::Tanh;
        } else if (name == "abs") {
            op = Op::Abs;
        } else {
            fail("unknown identifier '" + std::string(name) + "'", start);
        }
        expect('(');
        const std::uint32_t a = expr(depth + 1);
        std::uint32_t b = 0;
        if (arity == 2) {
            if (!accept(',')) fail(std::string(name) + " takes two arguments", pos_);
            b = expr(depth + 1);
        }
        expect(')');
        return add({op, a, b});
    }

    std::string_view src_;
    std::size_t dim_;
    const TimeGrid& grid_;
    std::size_t pos_ = 0;
    std::size_t coord_pos_ = 0;
    std::vector<CoeffExpr::Node> nodes_;
};

void collect_terminals(const std::vector<CoeffExpr::Node>& nodes, MeasureTerminals& out) {
    for (const auto& n : nodes) {
        if (n.op == CoeffExpr::Op::MeanLag) out.means.emplace_back(n.a, n.b);
        if (n.op == CoeffExpr::Op::MeanSupnorm) out.supnorm = true;
    }
    std::sort(out.means.begin(), out.means.end());
    out.means.erase(std::unique(out.means.begin(), out.means.end()), out.means.end());
}

}  // namespace

void MeasureTerminals::merge(const MeasureTerminals& other) {
    means.insert(means.end(), other.means.begin(), other.means.end());
    std::sort(means.begin(), means.end());
    means.erase(std::unique(means.begin(), means.end()), means.end());
    supnorm = supnorm || other.supnorm;
}

LawMoments LawMoments::compute(const MeasureTerminals& need, std::span<const SegmentView> atoms) {
    return compute(need, atoms, {});
}

LawMoments LawMoments::compute(const MeasureTerminals& need, std::span<const SegmentView> atoms,
                               std::span<const double> weights) {
    LawMoments m;
    if (atoms.empty()) throw DomainError("law has no atoms");
    if (!weights.empty() && weights.size() != atoms.size()) throw DimensionError("law weight count mismatch");
    const SegmentView first = atoms.front();
    m.dim_ = first.dim;
    m.means_.assign(first.dim * first.cols, kNaN);
    const double uniform = 1.0 / static_cast<double>(atoms.size());
    for (const auto& [coord, col] : need.means) {
        if (coord >= first.dim || col >= first.cols) throw DimensionError("measure terminal outside the law's shape");
        double acc = 0.0;
        if (weights.empty()) {
            for (const auto& a : atoms) acc += a(coord, col);
            acc *= uniform;
        } else {
            for (std::size_t k = 0; k < atoms.size(); ++k) acc += weights[k] * atoms[k](coord, col);
        }
        m.means_[col * m.dim_ + coord] = acc;
    }
    if (need.supnorm) {
        double acc = 0.0;
        if (weights.empty()) {
            for (const auto& a : atoms) acc += sup_norm(a);
            acc *= uniform;
        } else {
            for (std::size_t k = 0; k < atoms.size(); ++k) acc += weights[k] * sup_norm(atoms[k]);
        }
        m.supnorm_ = acc;
        m.has_supnorm_ = true;
    }
    return m;
}

LawMoments LawMoments::compute(const MeasureTerminals& need, const EmpiricalMeasure& law) {
    std::vector<SegmentView> views;
    views.reserve(law.size());
    for (const auto& a : law.atoms()) views.push_back(a.view());
    return compute(need, views);
}

LawMoments LawMoments::compute(const MeasureTerminals& need, const WeightedMeasure& law) {
    std::vector<SegmentView> views;
    views.reserve(law.size());
    for (const auto& a : law.atoms()) views.push_back(a.view());
    return compute(need, views, law.weights());
}

double LawMoments::mean(std::size_t coord, std::size_t col) const {
    const std::size_t k = col * dim_ + coord;
    if (k >= means_.size() || std::isnan(means_[k])) throw DomainError("law moment was not computed");
    return means_[k];
}

double LawMoments::supnorm() const {
    if (!has_supnorm_) throw DomainError("law supnorm moment was not computed");
    return supnorm_;
}

CoeffExpr::CoeffExpr(std::size_t dim, std::size_t cols, std::vector<Node> nodes, std::uint32_t root)
    : dim_(dim), cols_(cols), nodes_(std::move(nodes)), root_(root) {
    collect_terminals(nodes_, terminals_);
}

double CoeffExpr::eval(double t, SegmentView seg, const LawMoments& law) const {
    if (seg.dim != dim_ || seg.cols != cols_) {
        throw DimensionError("segment shape does not match the expression's (d, L+1)");
    }
    return eval_node(root_, t, seg, law);
}

double CoeffExpr::eval_node(std::uint32_t k, double t, SegmentView seg, const LawMoments& law) const {
    const Node& n = nodes_[k];
    switch (n.op) {
    case Op::Number: return n.value;
    case Op::Time: return t;
    case Op::Lag:
        if (n.b >= seg.cols) throw DimensionError("lag column outside the segment");
        return seg(n.a, n.b);
    case Op::MeanLag: return law.mean(n.a, n.b);
    case Op::MeanSupnorm: return law.supnorm();
    case Op::Add: return checked(eval_node(n.a, t, seg, law) + eval_node(n.b, t, seg, law), "+");
    case Op::Sub: return checked(eval_node(n.a, t, seg, law) - eval_node(n.b, t, seg, law), "-");
    case Op::Mul: return checked(eval_node(n.a, t, seg, law) * eval_node(n.b, t, seg, law), "*");
    case Op::Div: {
        const double num = eval_node(n.a, t, seg, law);
        const double den = eval_node(n.b, t, seg, law);
        if (den == 0.0) throw NumericError("division by zero");
        return checked(num / den, "/");
    }
    case Op::Neg: return -eval_node(n.a, t, seg, law);
    case Op::Min: return std::min(eval_node(n.a, t, seg, law), eval_node(n.b, t, seg, law));
    case Op::Max: return std::max(eval_node(n.a, t, seg, law), eval_node(n.b, t, seg, law));
    case Op::Exp: return checked(std::exp(eval_node(n.a, t, seg, law)), "exp");
    case Op::Tanh: return std::tanh(eval_node(n.a, t, seg, law));
    case Op::Abs: return std::abs(eval_node(n.a, t, seg, law));
    }
    return kNaN;
}

std::string CoeffExpr::print() const {
    std::string out;
    print_node(root_, out);
    return out;
}

void CoeffExpr::print_node(std::uint32_t k, std::string& out) const {
    const Node& n = nodes_[k];
    auto binary = [&](const char* op) {
        out += '(';
        print_node(n.a, out);
        out += op;
        print_node(n.b, out);
        out += ')';
    };
    auto call = [&](const char* name, bool two) {
        out += name;
        out += '(';
        print_node(n.a, out);
        if (two) {
            out += ", ";
            print_node(n.b, out);
        }
        out += ')';
    };
    switch (n.op) {
    case Op::Number: append_double(out, n.value); break;
    case Op::Time: out += 't'; break;
    case Op::Lag:
    case Op::MeanLag:
        if (n.op == Op::MeanLag) out += "E[";
        out += "x[" + std::to_string(n.a + 1) + "](";
        append_double(out, n.value);
        out += ')';
        if (n.op == Op::MeanLag) out += ']';
        break;
    case Op::MeanSupnorm: out += "E[supnorm]"; break;
    case Op::Add: binary(" + "); break;
    case Op::Sub: binary(" - "); break;
    case Op::Mul: binary(" * "); break;
    case Op::Div: binary(" / "); break;
    case Op::Neg:
        out += "(-";
        print_node(n.a, out);
        out += ')';
        break;
    case Op::Min: call("min", true); break;
    case Op::Max: call("max", true); break;
    case Op::Exp: call("exp", false); break;
    case Op::Tanh: call("tanh", false); break;
    case Op::Abs: call("abs", false); break;
    }
}

bool CoeffExpr::depends_only_on_current(std::size_t coord) const {
    if (!terminals_.empty()) return false;
    // The current value is the last segment column; lag 0 parses to it.
    return std::all_of(nodes_.begin(), nodes_.end(), [&](const Node& n) {
        return n.op != Op::Lag || (n.a == coord && n.value == 0.0);
    });
}

CoeffExpr parse_coeff(std::string_view src, std::size_t dim, const TimeGrid& grid) {
    if (dim == 0) throw DomainError("expression dimension must be >= 1");
    return Parser(src, dim, grid).run();
}

double eval_coeff(const CoeffExpr& expr, double t, SegmentView seg, const EmpiricalMeasure& law) {
    if (law.dim() != expr.dim() || law.cols() != expr.cols()) {
        throw DimensionError("law shape does not match the expression's (d, L+1)");
    }
    return expr.eval(t, seg, LawMoments::compute(expr.terminals(), law));
}

double eval_coeff(const CoeffExpr& expr, double t, SegmentView seg, const WeightedMeasure& law) {
    if (law.dim() != expr.dim() || law.cols() != expr.cols()) {
        throw DimensionError("law shape does not match the expression's (d, L+1)");
    }
    return expr.eval(t, seg, LawMoments::compute(expr.terminals(), law));
}

CoeffModel::CoeffModel(std::size_t dim, std::size_t noise_dim, std::vector<CoeffExpr> drift,
                       std::vector<CoeffExpr> diffusion)
    : dim_(dim), noise_dim_(noise_dim), drift_(std::move(drift)), diffusion_(std::move(diffusion)) {
    if (dim == 0 || noise_dim == 0) throw DomainError("model needs d >= 1 and m >= 1");
    if (drift_.size() != dim) throw DimensionError("drift must have d expressions");
    if (diffusion_.size() != dim * noise_dim) throw DimensionError("diffusion must have d x m expressions");
    for (const auto& e : drift_) {
        if (e.dim() != dim) throw DimensionError("drift expression parsed for a different dimension");
        terminals_.merge(e.terminals());
    }
    for (const auto& e : diffusion_) {
        if (e.dim() != dim) throw DimensionError("diffusion expression parsed for a different dimension");
        terminals_.merge(e.terminals());
    }
}

CoeffModel CoeffModel::parse(std::span<const std::string> drift, std::span<const std::string> diffusion,
                             std::size_t dim, std::size_t noise_dim, const TimeGrid& grid) {
    std::vector<CoeffExpr> b, s;
    for (const auto& src : drift) b.push_back(parse_coeff(src, dim, grid));
    for (const auto& src : diffusion) s.push_back(parse_coeff(src, dim, grid));
    return CoeffModel(dim, noise_dim, std::move(b), std::move(s));
}

std::string CoeffModel::canonical() const {
    std::string out = "d=" + std::to_string(dim_) + ";m=" + std::to_string(noise_dim_) + "\n";
    for (const auto& e : drift_) out += "b:" + e.print() + "\n";
    for (const auto& e : diffusion_) out += "s:" + e.print() + "\n";
    return out;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string model_hash(const CoeffModel& model) { return fnv1a_hex(model.canonical()); }

}  // namespace pdsde

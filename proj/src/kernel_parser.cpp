#include <cctype>
#include <charconv>
#include <optional>

#include "kremu/kernels.hpp"

namespace kremu {

namespace {

struct LeafName {
    std::string_view name;
    KernelKind kind;
};

constexpr LeafName kLeafNames[] = {
    {"linear", KernelKind::Linear},     {"rbf", KernelKind::Rbf},           {"exp", KernelKind::Matern12},
    {"matern12", KernelKind::Matern12}, {"matern32", KernelKind::Matern32}, {"matern52", KernelKind::Matern52},
    {"white", KernelKind::White},       {"bias", KernelKind::Bias},
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    KernelExpr parse() {
        KernelExpr k = expr();
        skip_space();
        if (pos_ != text_.size()) throw SyntaxError(pos_, "'+', '*' or end of input");
        return k;
    }

private:
    KernelExpr expr() {
        KernelExpr k = term();
        while (accept('+')) k = KernelExpr::sum(std::move(k), term());
        return k;
    }

    KernelExpr term() {
        KernelExpr k = atom();
        while (accept('*')) k = KernelExpr::product(std::move(k), atom());
        return k;
    }

    KernelExpr atom() {
        skip_space();
        if (accept('(')) {
            KernelExpr k = expr();
            expect(')', "')'");
            return k;
        }
        const std::size_t name_pos = pos_;
        std::string_view name = identifier();
        if (name.empty()) throw SyntaxError(pos_, "kernel name or '('");

        std::optional<KernelKind> kind;
        for (const auto& entry : kLeafNames)
            if (entry.name == name) kind = entry.kind;
        if (!kind) {
            throw Error(ErrorCode::UnknownKernelName,
                        "'" + std::string(name) + "' at position " + std::to_string(name_pos));
        }

        expect('(', "'('");
        std::optional<double> ls;
        std::optional<double> var;
        do {
            skip_space();
            const std::size_t key_pos = pos_;
            std::string_view key = identifier();
            if (key != "ls" && key != "var") {
                pos_ = key_pos;
                throw SyntaxError(key_pos, "'ls' or 'var'");
            }
            expect('=', "'='");
            const std::size_t value_pos = pos_;
            const double value = number();
            auto& slot = key == "ls" ? ls : var;
            if (slot) {
                throw Error(ErrorCode::InvalidHyperparameter,
                            "duplicate '" + std::string(key) + "' at position " + std::to_string(key_pos));
            }
            if (key == "ls" && !(*kind == KernelKind::Rbf || *kind == KernelKind::Matern12 ||
                                 *kind == KernelKind::Matern32 || *kind == KernelKind::Matern52)) {
                throw Error(ErrorCode::InvalidHyperparameter,
                            std::string(name) + " takes no lengthscale (position " + std::to_string(key_pos) + ")");
            }
            if (key == "ls" && value <= 0.0) {
                throw Error(ErrorCode::InvalidHyperparameter,
                            "ls must be > 0 at position " + std::to_string(value_pos));
            }
            if (key == "var" && value < 0.0) {
                throw Error(ErrorCode::InvalidHyperparameter,
                            "var must be >= 0 at position " + std::to_string(value_pos));
            }
            slot = value;
        } while (accept(','));
        expect(')', "',' or ')'");
        return KernelExpr::leaf(*kind, ls.value_or(1.0), var.value_or(1.0));
    }

    std::string_view identifier() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    // FLOAT := [+-]? (digits ('.' digits?)? | '.' digits) ([eE] [+-]? digits)?
    double number() {
        skip_space();
        const std::size_t start = pos_;
        std::size_t p = pos_;
        auto digits = [&] {
            const std::size_t s = p;
            while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
            return p - s;
        };
        if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
        std::size_t mantissa = digits();
        if (p < text_.size() && text_[p] == '.') {
            ++p;
            mantissa += digits();
        }
        if (mantissa == 0) throw SyntaxError(start, "number");
        if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
            std::size_t q = p + 1;
            if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
            const std::size_t exp_start = q;
            while (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) ++q;
            if (q == exp_start) throw SyntaxError(q, "exponent digits");
            p = q;
        }
        std::size_t from = start;
        if (text_[from] == '+') ++from;
        double value = 0.0;
        const auto res = std::from_chars(text_.data() + from, text_.data() + p, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + p) throw SyntaxError(start, "finite number");
        pos_ = p;
        return value;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!accept(c)) throw SyntaxError(pos_, what);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void print_into(const KernelExpr& k, std::string& out) {
    switch (k.kind()) {
        case KernelKind::Sum: {
            print_into(k.left(), out);
            out += " + ";
            const bool wrap = k.right().kind() == KernelKind::Sum;
            if (wrap) out += '(';
            print_into(k.right(), out);
            if (wrap) out += ')';
            return;
        }
        case KernelKind::Product: {
            const bool wrap_left = k.left().kind() == KernelKind::Sum;
            const bool wrap_right = !k.right().is_leaf();
            if (wrap_left) out += '(';
            print_into(k.left(), out);
            if (wrap_left) out += ')';
            out += " * ";
            if (wrap_right) out += '(';
            print_into(k.right(), out);
            if (wrap_right) out += ')';
            return;
        }
        default:
            out += kernel_kind_name(k.kind());
            out += '(';
            if (k.has_lengthscale()) {
                out += "ls=";
                out += format_double(k.lengthscale());
                out += ", ";
            }
            out += "var=";
            out += format_double(k.variance());
            out += ')';
    }
}

}  // namespace

KernelExpr parse_kernel(std::string_view text) { return Parser(text).parse(); }

std::string print_kernel(const KernelExpr& k) {
    std::string out;
    print_into(k, out);
    return out;
}

}  // namespace kremu

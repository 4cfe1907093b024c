#pragma once

#include "retsets/exactnum.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace retsets {

using Exponents = std::vector<unsigned>;

/// Multivariate polynomial with integer coefficients in x1..xd.
/// Zero coefficients are never stored; the zero polynomial has no terms.
class IntPoly {
public:
    explicit IntPoly(unsigned num_vars = 1) : nvars_(num_vars)
    {
        if (num_vars == 0) {
            throw Error("polynomial needs at least one variable");
        }
    }

    static IntPoly constant(unsigned num_vars, const Integer& c)
    {
        IntPoly p(num_vars);
        p.add_term(Exponents(num_vars, 0), c);
        return p;
    }

    /// The variable x_{index+1}.
    static IntPoly variable(unsigned num_vars, unsigned index)
    {
        if (index >= num_vars) {
            throw Error("variable index out of range");
        }
        IntPoly p(num_vars);
        Exponents e(num_vars, 0);
        e[index] = 1;
        p.add_term(e, Integer(1));
        return p;
    }

    unsigned num_vars() const { return nvars_; }
    const std::map<Exponents, Integer>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const
    {
        return terms_.empty() || (terms_.size() == 1 && total(terms_.begin()->first) == 0);
    }

    Integer constant_term() const
    {
        auto it = terms_.find(Exponents(nvars_, 0));
        return it == terms_.end() ? Integer(0) : it->second;
    }

    /// Total degree; -1 for the zero polynomial.
    int total_degree() const
    {
        int deg = -1;
        for (const auto& [e, c] : terms_) {
            deg = std::max(deg, static_cast<int>(total(e)));
        }
        return deg;
    }

    /// Homogeneous part of top degree.
    IntPoly top_form() const
    {
        IntPoly out(nvars_);
        const int deg = total_degree();
        for (const auto& [e, c] : terms_) {
            if (static_cast<int>(total(e)) == deg) {
                out.terms_.emplace(e, c);
            }
        }
        return out;
    }

    void add_term(const Exponents& e, const Integer& c)
    {
        if (e.size() != nvars_) {
            throw Error("exponent vector has wrong length");
        }
        if (c == 0) {
            return;
        }
        auto [it, inserted] = terms_.emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) {
                terms_.erase(it);
            }
        }
    }

    IntPoly operator-() const
    {
        IntPoly out(nvars_);
        for (const auto& [e, c] : terms_) {
            out.terms_.emplace(e, -c);
        }
        return out;
    }

    friend IntPoly operator+(const IntPoly& a, const IntPoly& b)
    {
        check_same(a, b);
        IntPoly out = a;
        for (const auto& [e, c] : b.terms_) {
            out.add_term(e, c);
        }
        return out;
    }

    friend IntPoly operator-(const IntPoly& a, const IntPoly& b) { return a + (-b); }

    friend IntPoly operator*(const IntPoly& a, const IntPoly& b)
    {
        check_same(a, b);
        IntPoly out(a.nvars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(a.nvars_);
                for (unsigned i = 0; i < a.nvars_; ++i) {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        return out;
    }

    friend IntPoly operator*(const Integer& s, const IntPoly& p)
    {
        IntPoly out(p.nvars_);
        if (s == 0) {
            return out;
        }
        for (const auto& [e, c] : p.terms_) {
            out.terms_.emplace(e, s * c);
        }
        return out;
    }

    IntPoly pow(unsigned e) const
    {
        IntPoly out = constant(nvars_, Integer(1));
        for (unsigned i = 0; i < e; ++i) {
            out = out * *this;
        }
        return out;
    }

    Integer evaluate(const IntVec& point) const
    {
        if (point.size() != nvars_) {
            throw Error("evaluate: point has " + std::to_string(point.size()) + " coordinates, polynomial has " +
                        std::to_string(nvars_) + " variables");
        }
        Integer sum(0);
        for (const auto& [e, c] : terms_) {
            Integer term = c;
            for (unsigned i = 0; i < nvars_; ++i) {
                if (e[i] != 0) {
                    term *= pow_int(point[i], e[i]);
                }
            }
            sum += term;
        }
        return sum;
    }

    /// Value mod m in [0, m) at a residue vector. Requires 1 <= m < 2^31.
    long long evaluate_mod(const std::vector<long long>& point, long long m) const
    {
        if (point.size() != nvars_) {
            throw Error("evaluate_mod: dimension mismatch");
        }
        long long sum = 0;
        for (const auto& [e, c] : terms_) {
            long long term = mod_floor(c, m);
            for (unsigned i = 0; i < nvars_ && term != 0; ++i) {
                const long long base = mod_floor(point[i], m);
                for (unsigned k = 0; k < e[i]; ++k) {
                    term = term * base % m;
                }
            }
            sum = (sum + term) % m;
        }
        return sum;
    }

    /// Graded-lex descending, e.g. "3*x1^2*x2 - x2 + 7". Zero prints as "0".
    std::string to_string() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::vector<std::pair<Exponents, Integer>> order(terms_.begin(), terms_.end());
        std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            const unsigned da = total(a.first);
            const unsigned db = total(b.first);
            if (da != db) {
                return da > db;
            }
            return a.first > b.first;
        });
        std::string out;
        bool first = true;
        for (const auto& [e, c] : order) {
            const bool negative = c < 0;
            Integer mag = negative ? Integer(-c) : c;
            if (first) {
                out += negative ? "-" : "";
            } else {
                out += negative ? " - " : " + ";
            }
            first = false;
            std::string mono;
            for (unsigned i = 0; i < nvars_; ++i) {
                if (e[i] == 0) {
                    continue;
                }
                if (!mono.empty()) {
                    mono += "*";
                }
                mono += "x" + std::to_string(i + 1);
                if (e[i] > 1) {
                    mono += "^" + std::to_string(e[i]);
                }
            }
            if (mono.empty()) {
                out += mag.get_str();
            } else if (mag == 1) {
                out += mono;
            } else {
                out += mag.get_str() + "*" + mono;
            }
        }
        return out;
    }

    friend bool operator==(const IntPoly&, const IntPoly&) = default;

private:
    static unsigned total(const Exponents& e)
    {
        unsigned s = 0;
        for (unsigned v : e) {
            s += v;
        }
        return s;
    }

    static void check_same(const IntPoly& a, const IntPoly& b)
    {
        if (a.nvars_ != b.nvars_) {
            throw Error("polynomials in different numbers of variables");
        }
    }

    unsigned nvars_;
    std::map<Exponents, Integer> terms_;
};

namespace detail {

// Recursive descent over
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := power (['*'] power)*      juxtaposition such as "2n" is a product
//   power  := atom ['^' digits]
//   atom   := digits | var | '(' expr ')'
//   var    := 'x' digits | 'n' | 'x'    (bare n and x mean x1)
class PolyParser {
public:
    PolyParser(std::string_view text, unsigned num_vars) : text_(text), nvars_(num_vars) {}

    IntPoly parse()
    {
        IntPoly p = expr();
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return p;
    }

    /// Largest variable index mentioned (1 for n or bare x).
    static unsigned scan_num_vars(std::string_view text)
    {
        unsigned d = 1;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == 'x' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                std::size_t j = i + 1;
                unsigned long v = 0;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    v = v * 10 + static_cast<unsigned long>(text[j] - '0');
                    if (v > 64) {
                        throw ParseError("variable index too large in '" + std::string(text) + "'");
                    }
                    ++j;
                }
                d = std::max(d, static_cast<unsigned>(v));
                i = j - 1;
            }
        }
        return d;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError("polynomial '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " +
                         what);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool peek(char c)
    {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    IntPoly expr()
    {
        IntPoly sum(nvars_);
        bool negate = false;
        if (peek('+') || peek('-')) {
            negate = text_[pos_] == '-';
            ++pos_;
        }
        IntPoly t = term();
        sum = negate ? sum - t : sum + t;
        while (peek('+') || peek('-')) {
            negate = text_[pos_] == '-';
            ++pos_;
            t = term();
            sum = negate ? sum - t : sum + t;
        }
        return sum;
    }

    bool starts_atom()
    {
        skip_ws();
        if (pos_ >= text_.size()) {
            return false;
        }
        const char c = text_[pos_];
        return c == '(' || c == 'x' || c == 'n' || std::isdigit(static_cast<unsigned char>(c));
    }

    IntPoly term()
    {
        IntPoly prod = power();
        while (true) {
            if (peek('*')) {
                ++pos_;
                prod = prod * power();
            } else if (starts_atom()) {
                prod = prod * power();
            } else {
                return prod;
            }
        }
    }

    IntPoly power()
    {
        IntPoly base = atom();
        if (peek('^')) {
            ++pos_;
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
            if (start == pos_) {
                fail("expected exponent after '^'");
            }
            const auto digits = text_.substr(start, pos_ - start);
            if (digits.size() > 3) {
                fail("exponent too large");
            }
            base = base.pow(static_cast<unsigned>(std::stoul(std::string(digits))));
        }
        return base;
    }

    IntPoly atom()
    {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            IntPoly inner = expr();
            if (!peek(')')) {
                fail("expected ')'");
            }
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
            return IntPoly::constant(nvars_, Integer(std::string(text_.substr(start, pos_ - start))));
        }
        if (c == 'n' || c == 'x') {
            ++pos_;
            unsigned index = 1;
            if (c == 'x' && pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                index = 0;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    index = index * 10 + static_cast<unsigned>(text_[pos_] - '0');
                    ++pos_;
                }
            } else if (nvars_ != 1) {
                fail(std::string("'") + c + "' is only allowed for univariate polynomials");
            }
            if (index == 0 || index > nvars_) {
                fail("variable index out of range");
            }
            return IntPoly::variable(nvars_, index - 1);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    unsigned nvars_;
};

} // namespace detail

/// Parses "c*x1^e1*...*xd^ed" sums. num_vars = 0 infers d from the largest index.
inline IntPoly parse_poly(std::string_view text, unsigned num_vars = 0)
{
    if (num_vars == 0) {
        num_vars = detail::PolyParser::scan_num_vars(text);
    }
    return detail::PolyParser(text, num_vars).parse();
}

/// Parses a family into a common number of variables.
inline std::vector<IntPoly> parse_family(const std::vector<std::string>& texts, unsigned num_vars = 0)
{
    if (num_vars == 0) {
        num_vars = 1;
        for (const auto& t : texts) {
            num_vars = std::max(num_vars, detail::PolyParser::scan_num_vars(t));
        }
    }
    std::vector<IntPoly> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(parse_poly(t, num_vars));
    }
    return out;
}

inline unsigned family_num_vars(const std::vector<IntPoly>& family)
{
    if (family.empty()) {
        throw Error("empty polynomial family");
    }
    const unsigned d = family.front().num_vars();
    for (const auto& p : family) {
        if (p.num_vars() != d) {
            throw Error("polynomials in family have different numbers of variables");
        }
    }
    return d;
}

/// Divides by the gcd of the entries and makes the first nonzero entry positive.
inline IntVec make_primitive(IntVec v)
{
    Integer g(0);
    for (const auto& x : v) {
        g = gcd_of(g, x);
    }
    if (g == 0) {
        return v;
    }
    auto first = std::find_if(v.begin(), v.end(), [](const Integer& x) { return x != 0; });
    if (*first < 0) {
        g = -g;
    }
    for (auto& x : v) {
        x /= g;
    }
    return v;
}

struct LinearDependence {
    bool independent = true;
    /// Primitive, first nonzero entry positive; present iff dependent.
    std::optional<IntVec> dependency;
    /// Primitive integer basis of {a : sum a_j p_j = 0}, one vector per free column.
    std::vector<IntVec> nullspace;
};

/// Exact rank test of the coefficient matrix (rows = monomials, columns = family)
/// by fraction-free Gauss-Jordan elimination.
inline LinearDependence q_linear_independence(const std::vector<IntPoly>& family)
{
    family_num_vars(family);
    std::map<Exponents, std::size_t> row_of;
    for (const auto& p : family) {
        for (const auto& [e, c] : p.terms()) {
            row_of.emplace(e, 0);
        }
    }
    std::size_t rows = 0;
    for (auto& [e, r] : row_of) {
        r = rows++;
    }
    const std::size_t cols = family.size();
    std::vector<IntVec> m(rows, IntVec(cols, Integer(0)));
    for (std::size_t j = 0; j < cols; ++j) {
        for (const auto& [e, c] : family[j].terms()) {
            m[row_of[e]][j] = c;
        }
    }

    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && m[p][c] == 0) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(m[p], m[r]);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) {
                continue;
            }
            const Integer a = m[r][c];
            const Integer b = m[i][c];
            Integer g(0);
            for (std::size_t k = 0; k < cols; ++k) {
                m[i][k] = a * m[i][k] - b * m[r][k];
                g = gcd_of(g, m[i][k]);
            }
            if (g > 1) {
                for (auto& x : m[i]) {
                    x /= g;
                }
            }
        }
        pivot_col.push_back(c);
        ++r;
    }

    LinearDependence out;
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivot_col) {
        is_pivot[c] = true;
    }
    Integer l(1);
    for (std::size_t i = 0; i < pivot_col.size(); ++i) {
        l = lcm_of(l, m[i][pivot_col[i]]);
    }
    if (l < 0) {
        l = -l;
    }
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) {
            continue;
        }
        IntVec v(cols, Integer(0));
        v[f] = l;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) {
            v[pivot_col[i]] = -(l / m[i][pivot_col[i]]) * m[i][f];
        }
        out.nullspace.push_back(make_primitive(std::move(v)));
    }
    out.independent = out.nullspace.empty();
    if (!out.independent) {
        out.dependency = out.nullspace.front();
    }
    return out;
}

/// True iff p_j - p_i is non-constant for every pair i != j.
inline bool essentially_distinct(const std::vector<IntPoly>& family)
{
    family_num_vars(family);
    for (std::size_t i = 0; i < family.size(); ++i) {
        for (std::size_t j = i + 1; j < family.size(); ++j) {
            if ((family[j] - family[i]).is_constant()) {
                return false;
            }
        }
    }
    return true;
}

/// Lexicographically least common root mod m with entries in [0, m), if any.
inline std::optional<std::vector<long long>> common_root_mod(const std::vector<IntPoly>& family, long long m)
{
    const unsigned d = family_num_vars(family);
    if (m < 1 || m >= (1LL << 31)) {
        throw Error("modulus out of range");
    }
    std::vector<long long> x(d, 0);
    while (true) {
        bool ok = true;
        for (const auto& p : family) {
            if (p.evaluate_mod(x, m) != 0) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return x;
        }
        std::size_t i = d;
        while (i > 0) {
            --i;
            if (++x[i] < m) {
                break;
            }
            x[i] = 0;
            if (i == 0) {
                return std::nullopt;
            }
        }
    }
}

/// Prime powers q with 2 <= q <= bound, ascending.
inline std::vector<long long> prime_powers_up_to(long long bound)
{
    std::vector<long long> out;
    for (long long q = 2; q <= bound; ++q) {
        long long p = 2;
        while (q % p != 0) {
            ++p;
        }
        long long r = q;
        while (r % p == 0) {
            r /= p;
        }
        if (r == 1) {
            out.push_back(q);
        }
    }
    return out;
}

struct IntersectivityVerdict {
    long long jointly_intersective_up_to = 0;
    std::optional<long long> witness_modulus;
    /// Common root for each prime power tested before any failure.
    std::map<long long, std::vector<long long>> witness_roots;
    bool bounded() const { return !witness_modulus.has_value(); }
};

/// Bounded test of joint intersectivity. Only prime powers are searched: a
/// common root mod m exists iff one exists mod every prime power dividing m,
/// so the least failing modulus is always a prime power.
inline IntersectivityVerdict joint_intersectivity(const std::vector<IntPoly>& family, long long modulus_bound)
{
    if (modulus_bound < 2) {
        throw Error("modulus bound must be at least 2");
    }
    family_num_vars(family);
    IntersectivityVerdict v;
    v.jointly_intersective_up_to = modulus_bound;
    for (long long q : prime_powers_up_to(modulus_bound)) {
        auto root = common_root_mod(family, q);
        if (!root) {
            v.witness_modulus = q;
            v.jointly_intersective_up_to = q - 1;
            return v;
        }
        v.witness_roots.emplace(q, std::move(*root));
    }
    return v;
}

/// x -> p(a1 x, ..., ad x) as a polynomial in one variable.
inline IntPoly restrict_to_line(const IntPoly& p, const IntVec& direction)
{
    if (direction.size() != p.num_vars()) {
        throw Error("restrict_to_line: direction has wrong length");
    }
    IntPoly out(1);
    for (const auto& [e, c] : p.terms()) {
        Integer coeff = c;
        unsigned deg = 0;
        for (unsigned i = 0; i < p.num_vars(); ++i) {
            coeff *= pow_int(direction[i], e[i]);
            deg += e[i];
        }
        out.add_term(Exponents{deg}, coeff);
    }
    return out;
}

/// Lexicographically least nonzero a in [-box, box]^d along which p keeps its degree.
inline IntVec find_degree_preserving_direction(const IntPoly& p, long long search_box)
{
    if (p.is_constant()) {
        throw Error("find_degree_preserving_direction: polynomial is constant");
    }
    if (search_box < 1) {
        throw Error("search box must be at least 1");
    }
    const unsigned d = p.num_vars();
    const IntPoly u = p.top_form();
    const Integer box = make_integer(search_box);
    IntVec a(d, Integer(-box));
    while (true) {
        const bool nonzero = std::any_of(a.begin(), a.end(), [](const Integer& x) { return x != 0; });
        if (nonzero && u.evaluate(a) != 0) {
            return a;
        }
        std::size_t i = d;
        while (true) {
            if (i == 0) {
                throw Error("no degree-preserving direction in box " + std::to_string(search_box) +
                            "; enlarge the box");
            }
            --i;
            if (a[i] < box) {
                ++a[i];
                break;
            }
            a[i] = -box;
        }
    }
}

} // namespace retsets

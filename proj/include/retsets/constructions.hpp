#pragma once

#include "retsets/box.hpp"
#include "retsets/exactnum.hpp"
#include "retsets/interval_set.hpp"
#include "retsets/polyring.hpp"
#include "retsets/systems.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace retsets {

// ---------------------------------------------------------------------------
// Behrend-type sets

struct BehrendParams {
    unsigned n = 0;
    long long d = 0;
};

/// n is the largest integer with b^(n^2) <= N^b, i.e. n = floor(sqrt(b log N / log b));
/// d is the largest integer with (d b)^n <= N. Empty when d < 2.
inline std::optional<BehrendParams> behrend_params(long long b, long long N)
{
    if (b < 2) {
        throw Error("behrend: b must be at least 2");
    }
    if (N < 2) {
        return std::nullopt;
    }
    const Integer B = make_integer(b);
    const Integer target = pow_int(make_integer(N), static_cast<unsigned long>(b));
    unsigned n = 0;
    while (pow_int(B, static_cast<unsigned long>(n + 1) * (n + 1)) <= target) {
        ++n;
    }
    if (n == 0) {
        return std::nullopt;
    }
    long long d = 1;
    while (pow_int(make_integer((d + 1) * b), n) <= make_integer(N)) {
        ++d;
    }
    if (d < 2) {
        return std::nullopt;
    }
    return BehrendParams{n, d};
}

/// Smallest N admitting d >= 2.
inline long long behrend_min_admissible(long long b)
{
    for (long long N = 2;; ++N) {
        if (behrend_params(b, N)) {
            return N;
        }
    }
}

/// Smallest N' > N at which (n, d) may change.
inline long long behrend_next_transition(long long b, long long N)
{
    const Integer B = make_integer(b);
    const Integer target = pow_int(make_integer(N), static_cast<unsigned long>(b));
    unsigned n = 0;
    while (pow_int(B, static_cast<unsigned long>(n + 1) * (n + 1)) <= target) {
        ++n;
    }
    // n grows at the least N' with N'^b >= b^((n+1)^2).
    const Integer need = pow_int(B, static_cast<unsigned long>(n + 1) * (n + 1));
    Integer root;
    mpz_root(root.get_mpz_t(), need.get_mpz_t(), static_cast<unsigned long>(b));
    if (pow_int(root, static_cast<unsigned long>(b)) < need) {
        ++root;
    }
    Integer next = root;
    if (n >= 1) {
        long long d = 1;
        while (pow_int(make_integer((d + 1) * b), n) <= make_integer(N)) {
            ++d;
        }
        const Integer dnext = pow_int(make_integer((d + 1) * b), n);
        if (dnext < next) {
            next = dnext;
        }
    }
    if (next <= make_integer(N)) {
        next = make_integer(N + 1);
    }
    return to_int64(next);
}

/// Sizes |Λ_{d,k,n}| for k = 0..n(d-1)^2 (level k collects digit vectors with Σγ_i^2 = k).
inline std::vector<long long> behrend_level_sizes(long long d, unsigned n)
{
    if (d < 1) {
        throw Error("behrend: d must be positive");
    }
    const long long top = static_cast<long long>(n) * (d - 1) * (d - 1);
    // counts[k] after processing i digits.
    std::vector<long long> counts(static_cast<std::size_t>(top + 1), 0);
    counts[0] = 1;
    for (unsigned i = 0; i < n; ++i) {
        std::vector<long long> next(counts.size(), 0);
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] == 0) {
                continue;
            }
            for (long long g = 0; g < d; ++g) {
                next[k + static_cast<std::size_t>(g * g)] += counts[k];
            }
        }
        counts = std::move(next);
    }
    return counts;
}

/// Λ_{d,k,n} = { Σ γ_i (b d - 1)^i : γ_i in {0..d-1}, Σ γ_i^2 = k }, sorted.
inline std::vector<long long> behrend_level(long long b, long long d, unsigned n, long long k)
{
    const long long base = b * d - 1;
    std::vector<long long> out;
    std::vector<long long> digits(n, 0);
    while (true) {
        long long norm = 0;
        for (long long g : digits) {
            norm += g * g;
        }
        if (norm == k) {
            Integer v(0);
            for (unsigned i = n; i > 0; --i) {
                v = v * make_integer(base) + make_integer(digits[i - 1]);
            }
            out.push_back(to_int64(v));
        }
        unsigned i = 0;
        while (i < n && ++digits[i] == d) {
            digits[i] = 0;
            ++i;
        }
        if (i == n) {
            break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct BehrendSet {
    long long b = 0;
    long long N = 0;
    unsigned n = 0;
    long long d = 0;
    long long k = 0;
    long long base = 0;
    std::vector<long long> elements;
    std::vector<long long> level_sizes;
    /// (d^n - 1) / (n (d-1)^2): the largest level is at least this large.
    Rational pigeonhole_bound;
    Rational density;
};

/// The level of maximal size (ties to the smallest k) for the parameters of N.
inline BehrendSet behrend_lambda(long long b, long long N)
{
    const auto params = behrend_params(b, N);
    if (!params) {
        throw Error("behrend: N = " + std::to_string(N) + " is too small for d >= 2 with b = " + std::to_string(b) +
                    "; the smallest admissible N is " + std::to_string(behrend_min_admissible(b)));
    }
    BehrendSet s;
    s.b = b;
    s.N = N;
    s.n = params->n;
    s.d = params->d;
    s.base = b * s.d - 1;
    s.level_sizes = behrend_level_sizes(s.d, s.n);
    s.k = 1;
    for (std::size_t k = 1; k < s.level_sizes.size(); ++k) {
        if (s.level_sizes[k] > s.level_sizes[static_cast<std::size_t>(s.k)]) {
            s.k = static_cast<long long>(k);
        }
    }
    s.elements = behrend_level(b, s.d, s.n, s.k);
    const Integer dn = pow_int(make_integer(s.d), s.n);
    s.pigeonhole_bound = make_rational(dn - 1, make_integer(static_cast<long long>(s.n) * (s.d - 1) * (s.d - 1)));
    s.density = make_rational(static_cast<long long>(s.elements.size()), N);
    return s;
}

struct SolutionFreeResult {
    bool free = true;
    /// (x_1, ..., x_t, x_{t+1}) of the first violation.
    std::vector<long long> counterexample;
    std::vector<long long> weights;
};

/// Exhaustive search for a_1 x_1 + ... + a_t x_t = (Σ a_j) x_{t+1} with Σ a_j <= b,
/// a_j >= 1, not all x equal. Order: t ascending, weights lexicographic, tuples lexicographic.
inline SolutionFreeResult verify_solution_free(const std::vector<long long>& set, long long b)
{
    if (b < 2) {
        throw Error("verify_solution_free: b must be at least 2");
    }
    const std::set<long long> members(set.begin(), set.end());
    const std::vector<long long> xs(members.begin(), members.end());
    SolutionFreeResult res;
    if (xs.empty()) {
        return res;
    }
    for (long long t = 1; t <= b; ++t) {
        std::vector<long long> a(static_cast<std::size_t>(t), 1);
        while (true) {
            long long sa = 0;
            for (long long v : a) {
                sa += v;
            }
            if (sa <= b) {
                std::vector<std::size_t> idx(static_cast<std::size_t>(t), 0);
                while (true) {
                    Integer lhs(0);
                    bool all_equal = true;
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                        lhs += make_integer(a[i]) * make_integer(xs[idx[i]]);
                        all_equal = all_equal && xs[idx[i]] == xs[idx[0]];
                    }
                    if (lhs % make_integer(sa) == 0) {
                        const long long target = to_int64(lhs / make_integer(sa));
                        if (members.count(target) && !(all_equal && target == xs[idx[0]])) {
                            res.free = false;
                            for (auto i : idx) {
                                res.counterexample.push_back(xs[i]);
                            }
                            res.counterexample.push_back(target);
                            res.weights = a;
                            return res;
                        }
                    }
                    std::size_t i = idx.size();
                    while (i > 0 && ++idx[i - 1] == xs.size()) {
                        idx[i - 1] = 0;
                        --i;
                    }
                    if (i == 0) {
                        break;
                    }
                }
            }
            // Next weight vector in lexicographic order with entries 1..b.
            std::size_t i = a.size();
            while (i > 0 && ++a[i - 1] > b) {
                a[i - 1] = 1;
                --i;
            }
            if (i == 0) {
                break;
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Interval families

struct IntervalFamily {
    long long m = 0;
    long long c = 0;
    long long b = 0;
    BehrendSet lambda;
    IntervalSet result;

    Rational spacing() const { return make_rational(1, 2 * m * (c + 1)); }
    Rational length() const { return make_rational(1, 8 * m * (c + 1) * (c + 1)); }

    /// The j in Λ_m with x in I(j), if any.
    std::optional<long long> which(const Rational& x) const
    {
        const Rational y = frac(x);
        const Integer j = floor_of(y / spacing());
        if (!j.fits_slong_p()) {
            return std::nullopt;
        }
        const long long jj = j.get_si();
        if (!std::binary_search(lambda.elements.begin(), lambda.elements.end(), jj)) {
            return std::nullopt;
        }
        if (y - Rational(j) * spacing() < length()) {
            return jj;
        }
        return std::nullopt;
    }
};

/// ⋃_{j in Λ_m} [ j / (2m(c+1)), j / (2m(c+1)) + 1 / (8m(c+1)^2) ).
inline IntervalFamily interval_family(long long m, long long c, long long b)
{
    if (c < 0) {
        throw Error("interval_family: c must be non-negative");
    }
    IntervalFamily f;
    f.m = m;
    f.c = c;
    f.b = b;
    f.lambda = behrend_lambda(b, m);
    std::vector<Interval> pieces;
    for (long long j : f.lambda.elements) {
        const Rational lo = Rational(make_integer(j)) * f.spacing();
        pieces.push_back({lo, lo + f.length()});
    }
    f.result = IntervalSet::from_intervals(std::move(pieces));
    return f;
}

struct StructuredSolutionReport {
    long long exhaustive_checked = 0;
    long long exhaustive_violations = 0;
    long long sampled_triples = 0;
    long long sample_violations = 0;
};

/// Integer reduction over Λ^3 and random rational triples of the family
/// satisfying (b-a) x1 + a x2 = b x3 mod 1, for a = 1..b-1.
inline StructuredSolutionReport verify_structured_solutions(const IntervalFamily& fam, long long samples,
                                                            std::uint64_t seed)
{
    StructuredSolutionReport rep;
    const auto& L = fam.lambda.elements;
    const long long b = fam.b;
    for (long long a = 1; a < b; ++a) {
        for (long long n1 : L) {
            for (long long n2 : L) {
                for (long long n3 : L) {
                    ++rep.exhaustive_checked;
                    if ((b - a) * n1 + a * n2 == b * n3 && !(n1 == n2 && n2 == n3)) {
                        ++rep.exhaustive_violations;
                    }
                }
            }
        }
    }
    if (L.empty() || b < 2) {
        return rep;
    }
    std::mt19937_64 rng(seed);
    const long long resolution = 1LL << 20;
    std::uniform_int_distribution<std::size_t> pick_j(0, L.size() - 1);
    std::uniform_int_distribution<long long> pick_off(0, resolution - 1);
    std::uniform_int_distribution<long long> pick_a(1, b - 1);
    auto random_point = [&](std::size_t ji) -> Rational {
        const Rational off = make_rational(pick_off(rng), resolution) * fam.length();
        return Rational(make_integer(L[ji])) * fam.spacing() + off;
    };
    long long attempts = 0;
    while (rep.sampled_triples < samples && attempts < samples * 1000) {
        ++attempts;
        const long long a = pick_a(rng);
        const Rational x1 = random_point(pick_j(rng));
        const Rational x2 = random_point(pick_j(rng));
        const Rational s = frac(Rational(make_integer(b - a)) * x1 + Rational(make_integer(a)) * x2);
        for (long long t = 0; t < b && rep.sampled_triples < samples; ++t) {
            const Rational x3 = (s + Rational(make_integer(t))) / Rational(make_integer(b));
            if (!fam.which(x3)) {
                continue;
            }
            ++rep.sampled_triples;
            const auto j1 = fam.which(x1);
            const auto j2 = fam.which(x2);
            const auto j3 = fam.which(x3);
            if (!(j1 && j2 && *j1 == *j2 && *j2 == *j3)) {
                ++rep.sample_violations;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Counterexample for linearly dependent families

/// Full-support dependency if one exists among small combinations of the
/// nullspace basis: most nonzero entries, then least L1 norm, then lexicographic.
inline IntVec choose_dependency(const std::vector<IntVec>& basis, long long coeff_box = 3)
{
    if (basis.empty()) {
        throw Error("choose_dependency: family is linearly independent");
    }
    if (basis.size() == 1) {
        return basis.front();
    }
    const std::size_t dim = basis.size();
    const std::size_t len = basis.front().size();
    std::optional<IntVec> best;
    std::size_t best_support = 0;
    Integer best_l1;
    std::vector<long long> c(dim, -coeff_box);
    while (true) {
        IntVec v(len, Integer(0));
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t k = 0; k < len; ++k) {
                v[k] += make_integer(c[i]) * basis[i][k];
            }
        }
        if (std::any_of(v.begin(), v.end(), [](const Integer& x) { return x != 0; })) {
            v = make_primitive(std::move(v));
            std::size_t support = 0;
            Integer l1(0);
            for (const auto& x : v) {
                support += x != 0 ? 1 : 0;
                l1 += x < 0 ? Integer(-x) : x;
            }
            if (!best || support > best_support || (support == best_support && l1 < best_l1) ||
                (support == best_support && l1 == best_l1 && v < *best)) {
                best = v;
                best_support = support;
                best_l1 = l1;
            }
        }
        std::size_t i = dim;
        while (i > 0 && ++c[i - 1] > coeff_box) {
            c[i - 1] = -coeff_box;
            --i;
        }
        if (i == 0) {
            break;
        }
    }
    return *best;
}

struct CounterexampleOptions {
    Box window = Box::interval(-30, 30);
    long long grid = 1024;
    long long grid_cap = 1LL << 14;
    bool exact_fallback = true;
    long long m_cap = 10'000'000;
};

struct SmallIntersectionCounterexample {
    std::vector<IntPoly> polys;
    unsigned r = 2;
    IntVec dependency;
    std::vector<std::size_t> support;
    IntVec exponents;
    long long m = 0;
    long long c = 0;
    long long b = 0;
    IntervalFamily family;
    SkewSystem system;
    Rational measure;
    Rational threshold;
    /// |Λ_m| / [8m(c+1)^2]^2, the bound at every n with some p_j(n) != 0 (j in the support).
    Rational bound;
    bool admissible = false;
    ReturnSetReport report;
    std::vector<Point> expected;
    bool members_subset_of_expected = false;
    bool members_equal_expected = false;
    std::vector<Point> bound_violations;
    bool certified = false;
};

/// Smallest m (from the Behrend parameter changes of weight b) with 2 K^(r-2) <= |Λ_m|^(r-1), K = 8m(c+1)^2.
inline std::pair<long long, BehrendSet> choose_counterexample_m(long long b, long long c, unsigned r, long long m_cap)
{
    std::map<std::pair<unsigned, long long>, long long> sizes;
    Rational best_gap;
    bool have_gap = false;
    for (long long m = behrend_min_admissible(b); m <= m_cap; m = behrend_next_transition(b, m)) {
        const auto params = behrend_params(b, m);
        if (!params) {
            continue;
        }
        const auto key = std::make_pair(params->n, params->d);
        auto it = sizes.find(key);
        if (it == sizes.end()) {
            const auto levels = behrend_level_sizes(params->d, params->n);
            it = sizes.emplace(key, *std::max_element(levels.begin() + 1, levels.end())).first;
        }
        const Integer L = make_integer(it->second);
        const Integer K = make_integer(8 * m * (c + 1) * (c + 1));
        const Integer lhs = 2 * pow_int(K, r - 2);
        const Integer rhs = pow_int(L, r - 1);
        if (lhs <= rhs) {
            return {m, behrend_lambda(b, m)};
        }
        const Rational gap = make_rational(rhs, lhs);
        if (!have_gap || gap > best_gap) {
            best_gap = gap;
            have_gap = true;
        }
    }
    throw Error("counterexample: no admissible m up to " + std::to_string(m_cap) +
                "; best ratio |Λ|^(r-1) / (2 K^(r-2)) was " + (have_gap ? to_string(best_gap) : std::string("n/a")));
}

/// The skew-product system A = [0,1) x I_m with T_j = T^{a_j} for a dependency
/// Σ a_j p_j = 0, checked over a window at threshold μ^r(A)/2.
inline SmallIntersectionCounterexample build_small_intersection_counterexample(const std::vector<IntPoly>& polys,
                                                                              unsigned r,
                                                                              const CounterexampleOptions& opt = {})
{
    if (r < 2) {
        throw Error("counterexample: r must be at least 2");
    }
    const unsigned dvars = family_num_vars(polys);
    if (opt.window.dim() != dvars) {
        throw Error("counterexample: window dimension differs from the number of variables");
    }
    for (const auto& p : polys) {
        if (p.is_constant()) {
            throw Error("counterexample: polynomial " + p.to_string() + " is constant");
        }
    }
    const auto dep = q_linear_independence(polys);
    if (dep.independent) {
        throw Error("counterexample: the family is linearly independent; use the modulus construction instead");
    }
    SmallIntersectionCounterexample out;
    out.polys = polys;
    out.r = r;
    out.dependency = choose_dependency(dep.nullspace);
    for (std::size_t j = 0; j < polys.size(); ++j) {
        if (out.dependency[j] != 0) {
            out.support.push_back(j);
            out.exponents.push_back(out.dependency[j]);
        } else {
            out.exponents.push_back(Integer(1));
        }
    }
    const long long ell = static_cast<long long>(polys.size());
    out.b = std::max<long long>(ell, 2);
    out.c = ell;
    auto [m, lambda] = choose_counterexample_m(out.b, out.c, r, opt.m_cap);
    out.m = m;
    out.family = interval_family(m, out.c, out.b);
    out.system = SkewSystem{out.family.result, out.exponents};
    out.measure = out.system.measure();
    out.threshold = pow_rat(out.measure, r) / 2;
    const Integer K = make_integer(8 * m * (out.c + 1) * (out.c + 1));
    out.bound = make_rational(make_integer(static_cast<long long>(out.family.lambda.elements.size())), K * K);
    out.admissible = out.bound <= out.threshold;

    ReturnSetOptions ro;
    ro.grid = opt.grid;
    ro.grid_cap = opt.grid_cap;
    ro.exact_fallback = opt.exact_fallback;
    out.report = return_set_window_threshold(out.system, polys, out.threshold, opt.window, ro);

    std::set<Point> members(out.report.members.begin(), out.report.members.end());
    bool subset = true;
    for (const auto& d : out.report.decisions) {
        const IntVec x = to_integers(d.n);
        bool all_zero = true;
        for (auto j : out.support) {
            if (polys[j].evaluate(x) != 0) {
                all_zero = false;
                break;
            }
        }
        if (all_zero) {
            out.expected.push_back(d.n);
        } else {
            if (d.hi > out.bound) {
                out.bound_violations.push_back(d.n);
            }
            if (members.count(d.n)) {
                subset = false;
            }
        }
    }
    out.members_subset_of_expected = subset;
    out.members_equal_expected = out.report.members == out.expected;
    const bool full_support = out.support.size() == polys.size();
    out.certified = out.admissible && out.report.inconclusive.empty() && out.bound_violations.empty() &&
                    (full_support ? out.members_equal_expected : out.members_subset_of_expected);
    return out;
}

// ---------------------------------------------------------------------------
// Counterexample for families that are not jointly intersective

struct ModulusCounterexample {
    FiniteCyclicSystem system;
    Rational epsilon;
    ReturnSetReport report;
    bool certified_empty = false;
};

/// T_M x = x + 1 on Z/MZ with A = {0} and ε = 1 / (2 M^(ℓ+1)).
inline ModulusCounterexample modulus_counterexample(const std::vector<IntPoly>& polys, long long witness_m,
                                                    const Box& window)
{
    if (witness_m < 2) {
        throw Error("modulus counterexample: modulus must be at least 2");
    }
    if (auto root = common_root_mod(polys, witness_m)) {
        std::string r;
        for (std::size_t i = 0; i < root->size(); ++i) {
            r += (i ? "," : "") + std::to_string((*root)[i]);
        }
        throw Error("modulus counterexample: " + std::to_string(witness_m) +
                    " is not a witness; the family has the common root (" + r + ") mod " +
                    std::to_string(witness_m));
    }
    ModulusCounterexample out;
    out.system = FiniteCyclicSystem(witness_m, {0});
    out.epsilon = make_rational(Integer(1), 2 * pow_int(make_integer(witness_m),
                                                        static_cast<unsigned long>(polys.size() + 1)));
    out.report = return_set_window(out.system, polys, out.epsilon, window);
    out.certified_empty = out.report.members.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Diophantine return sets

namespace detail {

inline bool diophantine_ok(const std::vector<IntPoly>& polys, const std::vector<Rational>& alphas,
                           const Rational& bound, const Point& n)
{
    const IntVec x = to_integers(n);
    for (const auto& p : polys) {
        const Rational v(p.evaluate(x));
        for (const auto& a : alphas) {
            if (!(nearest_integer_distance(v * a) < bound)) {
                return false;
            }
        }
    }
    return true;
}

} // namespace detail

/// { n in window : ||p_j(n) α_s|| < ε for all j, s }.
inline std::vector<Point> diophantine_set(const std::vector<IntPoly>& polys, const std::vector<Rational>& alphas,
                                          const Rational& epsilon, const Box& window)
{
    if (epsilon <= 0) {
        throw Error("diophantine_set: epsilon must be positive");
    }
    if (family_num_vars(polys) != window.dim()) {
        throw Error("diophantine_set: window dimension differs from the number of variables");
    }
    std::vector<Point> out;
    for (const auto& n : window.points()) {
        if (detail::diophantine_ok(polys, alphas, epsilon, n)) {
            out.push_back(n);
        }
    }
    return out;
}

/// First u with ||p_j(u) α_s|| < ε/2, scanning max-norm shells 0, 1, ..., box
/// and lexicographically within a shell.
inline std::optional<Point> find_diophantine_shift(const std::vector<IntPoly>& polys,
                                                   const std::vector<Rational>& alphas, const Rational& epsilon,
                                                   long long search_box)
{
    if (epsilon <= 0) {
        throw Error("find_diophantine_shift: epsilon must be positive");
    }
    if (search_box < 0) {
        throw Error("find_diophantine_shift: negative search box");
    }
    const unsigned d = family_num_vars(polys);
    const Rational half = epsilon / 2;
    for (long long shell = 0; shell <= search_box; ++shell) {
        for (const auto& u : Box::cube(d, -shell, shell).points()) {
            long long norm = 0;
            for (long long v : u) {
                norm = std::max(norm, v < 0 ? -v : v);
            }
            if (norm == shell && detail::diophantine_ok(polys, alphas, half, u)) {
                return u;
            }
        }
    }
    return std::nullopt;
}

/// Fourier coefficient of the uniform measure on {j/M}: 1 if M divides a, else 0.
inline Rational lambda_fourier(long long M, long long a)
{
    if (M < 1) {
        throw Error("lambda_fourier: M must be positive");
    }
    return Rational(a % M == 0 ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Density polynomial Hales-Jewett: definitional search

/// Subset of {1..N}^D as a bitmask over cells; cell (i_1..i_D) has index Σ (i_k - 1) N^(k-1).
using GridMask = std::uint32_t;
using DphjTuple = std::vector<GridMask>;

inline constexpr long long kDphjMaxBits = 20;

struct DphjInstance {
    unsigned q = 1;
    unsigned D = 1;
    unsigned N = 1;
    std::set<DphjTuple> S;

    unsigned cells() const
    {
        unsigned c = 1;
        for (unsigned i = 0; i < D; ++i) {
            c *= N;
        }
        return c;
    }

    void validate() const
    {
        if (q == 0 || D == 0 || N == 0) {
            throw Error("dphj: q, D and N must be positive");
        }
        long long c = 1;
        for (unsigned i = 0; i < D; ++i) {
            c *= N;
            if (c * q > kDphjMaxBits) {
                break;
            }
        }
        if (c * q > kDphjMaxBits) {
            throw Error("dphj: q * N^D exceeds the exhaustive cap of " + std::to_string(kDphjMaxBits));
        }
        const GridMask all = cells() == 32 ? ~GridMask{0} : ((GridMask{1} << cells()) - 1);
        for (const auto& t : S) {
            if (t.size() != q) {
                throw Error("dphj: tuple of wrong length in S");
            }
            for (auto m : t) {
                if ((m & ~all) != 0) {
                    throw Error("dphj: tuple entry outside {1..N}^D");
                }
            }
        }
    }

    /// gamma^D for gamma ⊆ {1..N} given as a bitmask (element i is bit i-1).
    GridMask power(std::uint32_t gamma) const
    {
        GridMask out = 0;
        const unsigned c = cells();
        for (unsigned cell = 0; cell < c; ++cell) {
            unsigned rest = cell;
            bool inside = true;
            for (unsigned k = 0; k < D; ++k) {
                if (!((gamma >> (rest % N)) & 1U)) {
                    inside = false;
                    break;
                }
                rest /= N;
            }
            if (inside) {
                out |= GridMask{1} << cell;
            }
        }
        return out;
    }

    /// Every q-tuple of subsets, i.e. all of M_{q,D,N}.
    static std::set<DphjTuple> everything(unsigned q, unsigned D, unsigned N)
    {
        DphjInstance probe{q, D, N, {}};
        probe.validate();
        const std::uint64_t per = std::uint64_t{1} << probe.cells();
        std::set<DphjTuple> out;
        DphjTuple t(q, 0);
        while (true) {
            out.insert(t);
            std::size_t i = q;
            while (i > 0 && ++t[i - 1] == per) {
                t[i - 1] = 0;
                --i;
            }
            if (i == 0) {
                return out;
            }
        }
    }
};

struct DphjWitness {
    std::uint32_t gamma = 0;
    DphjTuple alpha;
};

/// Conditions (i) α_j ∩ γ^D = ∅ for all j and (ii) α ∈ S together with each
/// of the q tuples obtained by adjoining γ^D to one coordinate.
inline bool dphj_validate(const DphjInstance& inst, const DphjWitness& w)
{
    if (w.gamma == 0 || w.alpha.size() != inst.q || (w.gamma >> inst.N) != 0) {
        return false;
    }
    const GridMask g = inst.power(w.gamma);
    for (auto a : w.alpha) {
        if ((a & g) != 0) {
            return false;
        }
    }
    if (!inst.S.count(w.alpha)) {
        return false;
    }
    for (unsigned j = 0; j < inst.q; ++j) {
        DphjTuple shifted = w.alpha;
        shifted[j] |= g;
        if (!inst.S.count(shifted)) {
            return false;
        }
    }
    return true;
}

/// First γ (ascending bitmask) and then first tuple of S (set order) satisfying (i) and (ii).
inline std::optional<DphjWitness> dphj_search(const DphjInstance& inst)
{
    inst.validate();
    for (std::uint32_t gamma = 1; gamma < (1U << inst.N); ++gamma) {
        for (const auto& alpha : inst.S) {
            DphjWitness w{gamma, alpha};
            if (dphj_validate(inst, w)) {
                return w;
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Constants of the conditional theorem

struct ConditionalConstants {
    Integer r;
    /// ℓ r^D + r + 1.
    Integer exponent;
    /// δ / 2^exponent; absent when the exponent is too large to expand.
    std::optional<Rational> c;
    bool degenerate = false;
};

inline constexpr unsigned long kMaxExpandedExponent = 1UL << 20;

inline ConditionalConstants conditional_constants(long long ell, long long D, const Rational& delta,
                                                  const Integer& C_value)
{
    if (ell < 1 || D < 1) {
        throw Error("conditional_constants: ell and D must be positive");
    }
    if (C_value < 1) {
        throw Error("conditional_constants: C must be positive");
    }
    if (delta < 0 || delta > 1) {
        throw Error("conditional_constants: delta must lie in [0, 1]");
    }
    ConditionalConstants out;
    out.r = C_value;
    out.exponent = make_integer(ell) * pow_int(C_value, static_cast<unsigned long>(D)) + C_value + 1;
    out.degenerate = delta == 0;
    if (out.exponent <= kMaxExpandedExponent) {
        const Integer two_pow = pow_int(Integer(2), out.exponent.get_ui());
        out.c = delta / Rational(two_pow);
        out.c->canonicalize();
    }
    return out;
}

} // namespace retsets

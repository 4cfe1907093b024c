#pragma once

#include "retsets/box.hpp"
#include "retsets/exactnum.hpp"
#include "retsets/interval_set.hpp"
#include "retsets/polyring.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace retsets {

/// Rotation x -> x + 1 on Z/MZ with a distinguished subset A.
struct FiniteCyclicSystem {
    long long modulus = 1;
    std::set<long long> subset;

    FiniteCyclicSystem() = default;
    FiniteCyclicSystem(long long m, std::set<long long> a) : modulus(m), subset(std::move(a))
    {
        if (m < 1) {
            throw Error("cyclic system: modulus must be positive");
        }
        for (long long x : subset) {
            if (x < 0 || x >= m) {
                throw Error("cyclic system: residue " + std::to_string(x) + " outside 0.." + std::to_string(m - 1));
            }
        }
    }

    Rational measure() const { return make_rational(static_cast<long long>(subset.size()), modulus); }
};

/// Skew product T(x, y) = (x, y + x) on the 2-torus, T_j = T^{a_j}, A = [0,1) x B.
struct SkewSystem {
    IntervalSet base_set;
    IntVec exponents;

    Rational measure() const { return base_set.measure(); }
};

/// |A ∩ (A - s_1) ∩ ... ∩ (A - s_l)| / M.
inline Rational cyclic_correlation(const FiniteCyclicSystem& sys, const IntVec& shifts)
{
    std::vector<long long> s;
    s.reserve(shifts.size());
    for (const auto& v : shifts) {
        s.push_back(mod_floor(v, sys.modulus));
    }
    long long count = 0;
    for (long long x : sys.subset) {
        bool all = true;
        for (long long sj : s) {
            if (!sys.subset.count((x + sj) % sys.modulus)) {
                all = false;
                break;
            }
        }
        count += all ? 1 : 0;
    }
    return make_rational(count, sys.modulus);
}

/// Certified bracket lo <= value <= hi of a correlation integral.
struct Enclosure {
    Rational lo;
    Rational hi;
    long long grid = 0;
    /// Lipschitz constant of the inner integral after reduction; hi - lo <= lipschitz / grid.
    Rational lipschitz;

    bool is_exact() const { return lo == hi; }
};

namespace detail {

// Reduction of a shift tuple that leaves the integral unchanged: zero shifts
// repeat the factor 1_B(y); the common gcd g is removed because the inner
// integral F is 1-periodic and x -> g x mod 1 preserves Lebesgue measure; a
// global sign flip is x -> -x; repeated shifts repeat a factor.
inline IntVec canonical_shifts(const IntVec& ks)
{
    IntVec v;
    Integer g(0);
    for (const auto& k : ks) {
        if (k != 0) {
            v.push_back(k);
            g = gcd_of(g, k);
        }
    }
    if (v.empty()) {
        return v;
    }
    for (auto& k : v) {
        k /= g;
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    IntVec neg;
    for (auto it = v.rbegin(); it != v.rend(); ++it) {
        neg.push_back(-*it);
    }
    return std::max(v, neg);
}

// Inner integral F(x) = measure(B ∩ ⋂ (B - k_j x)).
inline Rational inner_measure(const IntervalSet& B, const IntVec& ks, const Rational& x)
{
    IntervalSet acc = B;
    for (const auto& k : ks) {
        if (acc.empty()) {
            break;
        }
        acc = acc.intersect(B.rotate_preimage(Rational(k) * x));
    }
    return acc.measure();
}

// Union (sweep) or intersection (erosion) of B - k x over x in [x0, x0 + w).
// Arcs are translated rigidly, so both are again finite unions of arcs.
inline IntervalSet moving_hull(const std::vector<std::pair<Rational, Rational>>& arcs, const Integer& k,
                               const Rational& x0, const Rational& w, bool sweep)
{
    const Rational kq(k);
    const Rational speed = k > 0 ? kq : -kq;
    std::vector<Interval> pieces;
    for (const auto& [s, len] : arcs) {
        // Start of B - k x is s - k x.
        const Rational start_at_x0 = s - kq * x0;
        const Rational start_at_x1 = s - kq * (x0 + w);
        const Rational& earliest = k > 0 ? start_at_x1 : start_at_x0;
        const Rational& latest = k > 0 ? start_at_x0 : start_at_x1;
        if (sweep) {
            IntervalSet::append_arc(pieces, earliest, len + speed * w);
        } else {
            IntervalSet::append_arc(pieces, latest, len - speed * w);
        }
    }
    return IntervalSet::from_intervals(std::move(pieces));
}

inline Enclosure raw_enclosure(const IntervalSet& B, const IntVec& ks, long long grid)
{
    Enclosure e;
    e.grid = grid;
    if (ks.empty() || B.empty() || B.is_full()) {
        e.lo = e.hi = B.measure();
        e.lipschitz = 0;
        return e;
    }
    const auto arcs = circle_arcs(B);
    Integer total(0);
    for (const auto& k : ks) {
        total += k > 0 ? k : Integer(-k);
    }
    e.lipschitz = Rational(total * static_cast<long>(arcs.size()));

    const Rational w = make_rational(1, grid);
    const Rational slack = e.lipschitz * w * w / 2;
    Rational lo(0);
    Rational hi(0);
    for (long long i = 0; i < grid; ++i) {
        const Rational x0 = make_rational(i, grid);
        const Rational f = inner_measure(B, ks, x0) * w;
        IntervalSet up = B;
        IntervalSet down = B;
        for (const auto& k : ks) {
            if (!up.empty()) {
                up = up.intersect(moving_hull(arcs, k, x0, w, true));
            }
            if (!down.empty()) {
                down = down.intersect(moving_hull(arcs, k, x0, w, false));
            }
        }
        const Rational up_bound = up.measure() * w;
        const Rational down_bound = down.measure() * w;
        const Rational lip_hi = f + slack;
        const Rational lip_lo = f - slack;
        hi += up_bound < lip_hi ? up_bound : lip_hi;
        lo += down_bound > lip_lo ? down_bound : lip_lo;
    }
    e.lo = lo < 0 ? Rational(0) : lo;
    e.hi = hi;
    return e;
}

} // namespace detail

/// Memo of enclosures keyed by (canonical shift tuple, grid).
class CorrelationCache {
public:
    const Enclosure* find(const IntVec& key, long long grid) const
    {
        auto it = map_.find({key, grid});
        return it == map_.end() ? nullptr : &it->second;
    }

    const Enclosure& insert(const IntVec& key, long long grid, Enclosure e)
    {
        return map_.insert_or_assign({key, grid}, std::move(e)).first->second;
    }

    std::size_t size() const { return map_.size(); }

private:
    std::map<std::pair<IntVec, long long>, Enclosure> map_;
};

inline constexpr std::size_t kSubtupleMinMaxFactors = 10;

/// Certified enclosure of ∫∫ 1_B(y) Π 1_B(y + k_j x) dy dx over the unit square.
///
/// Each grid cell [i/N, (i+1)/N) is bracketed twice: by the Lipschitz bound
/// around the left-endpoint value, and by the measures of B intersected with
/// the erosions and sweeps of the moving copies over the cell. The tighter of
/// the two is kept. The upper end is also capped by the enclosure of every
/// sub-tuple, since dropping factors can only enlarge the integral.
inline Enclosure correlation_enclosure(const IntervalSet& B, const IntVec& ks, long long grid,
                                       CorrelationCache* cache = nullptr)
{
    if (grid < 1) {
        throw Error("correlation_enclosure: grid must be positive");
    }
    auto compute = [&](const IntVec& raw) -> Enclosure {
        IntVec key = detail::canonical_shifts(raw);
        if (cache) {
            if (const Enclosure* hit = cache->find(key, grid)) {
                return *hit;
            }
        }
        Enclosure e = detail::raw_enclosure(B, key, grid);
        if (cache) {
            cache->insert(key, grid, e);
        }
        return e;
    };

    const IntVec key = detail::canonical_shifts(ks);
    Enclosure e = compute(key);
    if (key.size() >= 2 && key.size() <= kSubtupleMinMaxFactors) {
        const std::uint32_t full = (1U << key.size()) - 1;
        for (std::uint32_t s = 1; s < full; ++s) {
            IntVec sub;
            for (std::size_t i = 0; i < key.size(); ++i) {
                if ((s >> i) & 1U) {
                    sub.push_back(key[i]);
                }
            }
            const Enclosure es = compute(sub);
            if (es.hi < e.hi) {
                e.hi = es.hi;
            }
        }
    }
    if (e.hi < e.lo) {
        throw Error("internal: inconsistent correlation enclosure");
    }
    return e;
}

/// skew_correlation with k_j = a_j c_j.
inline Enclosure skew_correlation(const SkewSystem& sys, const IntVec& powers, long long grid,
                                  CorrelationCache* cache = nullptr)
{
    if (powers.size() != sys.exponents.size()) {
        throw Error("skew_correlation: " + std::to_string(powers.size()) + " powers for " +
                    std::to_string(sys.exponents.size()) + " transformations");
    }
    IntVec ks;
    for (std::size_t j = 0; j < powers.size(); ++j) {
        ks.push_back(sys.exponents[j] * powers[j]);
    }
    return correlation_enclosure(sys.base_set, ks, grid, cache);
}

/// Exact value of ∫∫ 1_B(y) Π 1_B(y + k_j x) dy dx.
///
/// The inner integral F is continuous and piecewise linear in x, with kinks
/// only where an endpoint of B - k_i x meets an endpoint of B - k_j x, i.e. at
/// x = (e_b - e_a + m) / (k_i - k_j). The trapezoid rule on those pieces is exact.
inline Rational correlation_exact(const IntervalSet& B, const IntVec& ks)
{
    const IntVec key = detail::canonical_shifts(ks);
    if (key.empty() || B.empty() || B.is_full()) {
        return B.measure();
    }
    std::set<Rational> ends;
    for (const auto& p : B.intervals()) {
        ends.insert(p.lo);
        ends.insert(frac(p.hi));
    }
    IntVec speeds = key;
    speeds.push_back(Integer(0));
    std::set<Rational> xs{Rational(0), Rational(1)};
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        for (std::size_t j = i + 1; j < speeds.size(); ++j) {
            Integer delta = speeds[i] - speeds[j];
            if (delta < 0) {
                delta = -delta;
            }
            const Rational dq(delta);
            for (const auto& ea : ends) {
                for (const auto& eb : ends) {
                    // x = (eb - ea + m) / delta with 0 <= x < 1 and m an integer.
                    const Rational base = frac(eb - ea);
                    for (Integer m(0); Rational(m) + base < dq; ++m) {
                        xs.insert((base + Rational(m)) / dq);
                    }
                }
            }
        }
    }
    Rational total(0);
    std::optional<Rational> prev_x;
    Rational prev_f;
    for (const auto& x : xs) {
        const Rational f = detail::inner_measure(B, key, x);
        if (prev_x) {
            total += (x - *prev_x) * (prev_f + f) / 2;
        }
        prev_x = x;
        prev_f = f;
    }
    return total;
}

enum class Decision { member, non_member, inconclusive };

inline const char* to_string(Decision d)
{
    switch (d) {
    case Decision::member:
        return "member";
    case Decision::non_member:
        return "non-member";
    case Decision::inconclusive:
        return "inconclusive";
    }
    return "?";
}

enum class Exactness { exact, enclosure_certified, enclosure_inconclusive };

inline const char* to_string(Exactness e)
{
    switch (e) {
    case Exactness::exact:
        return "exact";
    case Exactness::enclosure_certified:
        return "enclosure-certified";
    case Exactness::enclosure_inconclusive:
        return "enclosure-inconclusive";
    }
    return "?";
}

struct PointDecision {
    Point n;
    Decision decision = Decision::inconclusive;
    Rational lo;
    Rational hi;
    /// 0 for exact values.
    long long grid = 0;
    /// "exact", "enclosure" or "exact-fallback".
    std::string method;
};

struct ReturnSetReport {
    Box window;
    Rational epsilon;
    Rational threshold;
    std::vector<Point> members;
    std::vector<Point> inconclusive;
    std::vector<PointDecision> decisions;
    std::vector<long long> max_gap;
    Exactness exactness = Exactness::exact;
    std::size_t distinct_shift_tuples = 0;
};

struct ReturnSetOptions {
    long long grid = 1024;
    long long grid_cap = 1LL << 14;
    /// Decide points still inconclusive at the cap with the exact integrator.
    bool exact_fallback = false;
};

struct SyndeticityReport {
    std::vector<long long> max_gap;
    bool heuristic = true;
    bool no_members = false;
    bool possibly_zero_only = false;
    std::vector<std::string> flags;
};

/// Per-axis largest gap between consecutive member coordinates, counting the
/// distance from each window edge to the nearest member. A finite window
/// cannot certify syndeticity, so the result is always marked heuristic.
inline SyndeticityReport syndeticity_report(const Box& window, const std::vector<Point>& members)
{
    SyndeticityReport out;
    out.flags.push_back("HEURISTIC");
    if (members.empty()) {
        out.no_members = true;
        out.flags.push_back("no members: gap is the window width");
        for (const auto& [lo, hi] : window.ranges) {
            out.max_gap.push_back(hi - lo + 1);
        }
        return out;
    }
    for (unsigned axis = 0; axis < window.dim(); ++axis) {
        std::set<long long> coords;
        for (const auto& p : members) {
            coords.insert(p[axis]);
        }
        const auto [lo, hi] = window.ranges[axis];
        long long gap = std::max(*coords.begin() - lo, hi - *coords.rbegin());
        long long prev = *coords.begin();
        for (long long c : coords) {
            gap = std::max(gap, c - prev);
            prev = c;
        }
        out.max_gap.push_back(gap);
    }
    if (members.size() == 1 && std::all_of(members[0].begin(), members[0].end(), [](long long v) { return v == 0; })) {
        out.possibly_zero_only = true;
        out.flags.push_back("possibly {0}");
    }
    return out;
}

inline SyndeticityReport syndeticity_report(const ReturnSetReport& report)
{
    return syndeticity_report(report.window, report.members);
}

namespace detail {

inline void check_window(const std::vector<IntPoly>& polys, const Box& window)
{
    if (window.empty()) {
        throw Error("return set: empty window");
    }
    if (family_num_vars(polys) != window.dim()) {
        throw Error("return set: polynomials have " + std::to_string(polys.front().num_vars()) +
                    " variables but the window has dimension " + std::to_string(window.dim()));
    }
}

inline void finish_report(ReturnSetReport& rep, bool any_enclosure)
{
    for (const auto& d : rep.decisions) {
        if (d.decision == Decision::member) {
            rep.members.push_back(d.n);
        } else if (d.decision == Decision::inconclusive) {
            rep.inconclusive.push_back(d.n);
        }
    }
    if (!rep.inconclusive.empty()) {
        rep.exactness = Exactness::enclosure_inconclusive;
    } else {
        rep.exactness = any_enclosure ? Exactness::enclosure_certified : Exactness::exact;
    }
    rep.max_gap = syndeticity_report(rep.window, rep.members).max_gap;
}

} // namespace detail

/// Return set {n : correlation > threshold} over the window, decided exactly.
inline ReturnSetReport return_set_window_threshold(const FiniteCyclicSystem& sys, const std::vector<IntPoly>& polys,
                                                   const Rational& threshold, const Box& window)
{
    detail::check_window(polys, window);
    ReturnSetReport rep;
    rep.window = window;
    rep.threshold = threshold;
    rep.epsilon = pow_rat(sys.measure(), static_cast<unsigned long>(polys.size() + 1)) - threshold;
    std::map<std::vector<long long>, Rational> memo;
    for (const auto& n : window.points()) {
        const IntVec x = to_integers(n);
        std::vector<long long> key;
        IntVec shifts;
        for (const auto& p : polys) {
            Integer s = p.evaluate(x);
            key.push_back(mod_floor(s, sys.modulus));
            shifts.push_back(std::move(s));
        }
        auto it = memo.find(key);
        if (it == memo.end()) {
            it = memo.emplace(key, cyclic_correlation(sys, shifts)).first;
        }
        PointDecision d;
        d.n = n;
        d.lo = d.hi = it->second;
        d.method = "exact";
        d.decision = it->second > threshold ? Decision::member : Decision::non_member;
        rep.decisions.push_back(std::move(d));
    }
    rep.distinct_shift_tuples = memo.size();
    detail::finish_report(rep, false);
    return rep;
}

inline ReturnSetReport return_set_window(const FiniteCyclicSystem& sys, const std::vector<IntPoly>& polys,
                                         const Rational& epsilon, const Box& window)
{
    const Rational threshold = pow_rat(sys.measure(), static_cast<unsigned long>(polys.size() + 1)) - epsilon;
    ReturnSetReport rep = return_set_window_threshold(sys, polys, threshold, window);
    rep.epsilon = epsilon;
    return rep;
}

/// Skew-product return set. Points are decided by enclosures at doubling
/// grids; a point is a member only if lo > threshold and a non-member only if
/// hi <= threshold.
inline ReturnSetReport return_set_window_threshold(const SkewSystem& sys, const std::vector<IntPoly>& polys,
                                                   const Rational& threshold, const Box& window,
                                                   const ReturnSetOptions& opt = {})
{
    detail::check_window(polys, window);
    if (polys.size() != sys.exponents.size()) {
        throw Error("return set: " + std::to_string(polys.size()) + " polynomials for " +
                    std::to_string(sys.exponents.size()) + " transformations");
    }
    if (opt.grid < 1 || opt.grid_cap < opt.grid) {
        throw Error("return set: need 1 <= grid <= grid cap");
    }
    ReturnSetReport rep;
    rep.window = window;
    rep.threshold = threshold;
    rep.epsilon = pow_rat(sys.measure(), static_cast<unsigned long>(polys.size() + 1)) - threshold;

    CorrelationCache cache;
    std::map<IntVec, PointDecision> memo;
    bool any_enclosure = false;
    for (const auto& n : window.points()) {
        const IntVec x = to_integers(n);
        IntVec ks;
        for (std::size_t j = 0; j < polys.size(); ++j) {
            ks.push_back(sys.exponents[j] * polys[j].evaluate(x));
        }
        const IntVec key = detail::canonical_shifts(ks);
        auto it = memo.find(key);
        if (it == memo.end()) {
            PointDecision d;
            if (key.empty() || sys.base_set.empty() || sys.base_set.is_full()) {
                d.lo = d.hi = sys.measure();
                d.method = "exact";
                d.decision = d.lo > threshold ? Decision::member : Decision::non_member;
            } else {
                any_enclosure = true;
                d.method = "enclosure";
                for (long long g = opt.grid;; g *= 2) {
                    const Enclosure e = correlation_enclosure(sys.base_set, key, g, &cache);
                    d.lo = e.lo;
                    d.hi = e.hi;
                    d.grid = g;
                    if (e.lo > threshold) {
                        d.decision = Decision::member;
                        break;
                    }
                    if (e.hi <= threshold) {
                        d.decision = Decision::non_member;
                        break;
                    }
                    if (g * 2 > opt.grid_cap) {
                        d.decision = Decision::inconclusive;
                        break;
                    }
                }
                if (d.decision == Decision::inconclusive && opt.exact_fallback) {
                    const Rational v = correlation_exact(sys.base_set, key);
                    d.lo = d.hi = v;
                    d.grid = 0;
                    d.method = "exact-fallback";
                    d.decision = v > threshold ? Decision::member : Decision::non_member;
                }
            }
            it = memo.emplace(key, std::move(d)).first;
        }
        PointDecision d = it->second;
        d.n = n;
        rep.decisions.push_back(std::move(d));
    }
    rep.distinct_shift_tuples = memo.size();
    detail::finish_report(rep, any_enclosure);
    return rep;
}

inline ReturnSetReport return_set_window(const SkewSystem& sys, const std::vector<IntPoly>& polys,
                                         const Rational& epsilon, const Box& window,
                                         const ReturnSetOptions& opt = {})
{
    const Rational threshold = pow_rat(sys.measure(), static_cast<unsigned long>(polys.size() + 1)) - epsilon;
    ReturnSetReport rep = return_set_window_threshold(sys, polys, threshold, window, opt);
    rep.epsilon = epsilon;
    return rep;
}

} // namespace retsets

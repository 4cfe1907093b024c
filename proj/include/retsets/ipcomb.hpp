#pragma once

#include "retsets/box.hpp"
#include "retsets/exactnum.hpp"
#include "retsets/polyring.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace retsets {

/// Subset of {1..r} as a bitmask; element k is bit k-1.
using FinSubset = std::uint32_t;

inline constexpr unsigned kMaxVipR = 16;

inline unsigned subset_size(FinSubset s)
{
    return static_cast<unsigned>(std::popcount(s));
}

inline std::vector<unsigned> subset_elements(FinSubset s)
{
    std::vector<unsigned> out;
    for (unsigned k = 0; s != 0; ++k, s >>= 1U) {
        if (s & 1U) {
            out.push_back(k + 1);
        }
    }
    return out;
}

inline FinSubset subset_of(const std::vector<unsigned>& elements)
{
    FinSubset s = 0;
    for (unsigned k : elements) {
        if (k == 0 || k > 32) {
            throw Error("subset element out of range");
        }
        s |= FinSubset{1} << (k - 1);
    }
    return s;
}

inline IntVec& add_into(IntVec& acc, const IntVec& v)
{
    for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i] += v[i];
    }
    return acc;
}

inline bool is_zero_vector(const IntVec& v)
{
    for (const auto& x : v) {
        if (x != 0) {
            return false;
        }
    }
    return true;
}

/// A map from all subsets of {1..r} to vectors in Z^dim.
struct VipSample {
    unsigned r = 0;
    unsigned dim = 1;
    std::vector<IntVec> values;

    VipSample() = default;

    VipSample(unsigned r_, unsigned dim_) : r(r_), dim(dim_)
    {
        if (r_ > kMaxVipR) {
            throw Error("VipSample: r = " + std::to_string(r_) + " exceeds the cap " + std::to_string(kMaxVipR));
        }
        values.assign(std::size_t{1} << r_, IntVec(dim_, Integer(0)));
    }

    template <class F>
    static VipSample tabulate(unsigned r_, unsigned dim_, F&& f)
    {
        VipSample s(r_, dim_);
        for (FinSubset a = 0; a < s.values.size(); ++a) {
            s.values[a] = f(a);
            if (s.values[a].size() != dim_) {
                throw Error("VipSample: value has wrong dimension");
            }
        }
        return s;
    }

    const IntVec& operator()(FinSubset a) const { return values.at(a); }
    bool anchored() const { return is_zero_vector(values.at(0)); }
    FinSubset full() const { return static_cast<FinSubset>((std::size_t{1} << r) - 1); }

    friend bool operator==(const VipSample&, const VipSample&) = default;
};

inline IntVec subset_sum(const std::vector<IntVec>& generators, FinSubset alpha)
{
    if (generators.empty()) {
        throw Error("subset_sum: no generators");
    }
    if (generators.size() < 32 && (alpha >> generators.size()) != 0) {
        throw Error("subset_sum: subset exceeds the number of generators");
    }
    IntVec sum(generators.front().size(), Integer(0));
    for (unsigned k : subset_elements(alpha)) {
        add_into(sum, generators[k - 1]);
    }
    return sum;
}

/// The 2^r - 1 nonempty subset sums, collapsed to a set.
inline std::set<IntVec> ip_r_set(const std::vector<IntVec>& generators)
{
    if (generators.size() > kMaxVipR) {
        throw Error("ip_r_set: too many generators");
    }
    std::set<IntVec> out;
    const FinSubset full = static_cast<FinSubset>((std::size_t{1} << generators.size()) - 1);
    for (FinSubset a = 1; a <= full && a != 0; ++a) {
        out.insert(subset_sum(generators, a));
    }
    return out;
}

/// phi(alpha) = (p_1(n_alpha), ..., p_k(n_alpha)) for polynomials along generator sums.
inline VipSample polynomial_sample(const std::vector<IntPoly>& polys, const std::vector<IntVec>& generators)
{
    const unsigned d = family_num_vars(polys);
    for (const auto& g : generators) {
        if (g.size() != d) {
            throw Error("generator dimension does not match the polynomials");
        }
    }
    const unsigned r = static_cast<unsigned>(generators.size());
    return VipSample::tabulate(r, static_cast<unsigned>(polys.size()), [&](FinSubset a) {
        IntVec n = a == 0 ? IntVec(d, Integer(0)) : subset_sum(generators, a);
        IntVec v;
        for (const auto& p : polys) {
            v.push_back(p.evaluate(n));
        }
        return v;
    });
}

/// D_beta phi on the complement of beta, whose elements are relabelled 1..r-|beta| in increasing order.
inline VipSample discrete_derivative(const VipSample& phi, FinSubset beta)
{
    if ((beta & ~phi.full()) != 0) {
        throw Error("discrete_derivative: beta is not a subset of {1..r}");
    }
    std::vector<unsigned> rest;
    for (unsigned k = 0; k < phi.r; ++k) {
        if (!((beta >> k) & 1U)) {
            rest.push_back(k);
        }
    }
    return VipSample::tabulate(static_cast<unsigned>(rest.size()), phi.dim, [&](FinSubset a) {
        FinSubset alpha = 0;
        for (unsigned i = 0; i < rest.size(); ++i) {
            if ((a >> i) & 1U) {
                alpha |= FinSubset{1} << rest[i];
            }
        }
        IntVec v = phi(alpha | beta);
        for (unsigned i = 0; i < phi.dim; ++i) {
            v[i] -= phi(alpha)[i];
        }
        return v;
    });
}

namespace detail {

// Sum over S of (-1)^{t+1-|S|} phi(union of blocks in S), t+1 = blocks.size().
inline bool alternating_sum_vanishes(const VipSample& phi, const std::vector<FinSubset>& blocks)
{
    const unsigned k = static_cast<unsigned>(blocks.size());
    IntVec acc(phi.dim, Integer(0));
    for (std::uint32_t s = 0; s < (1U << k); ++s) {
        FinSubset u = 0;
        for (unsigned i = 0; i < k; ++i) {
            if ((s >> i) & 1U) {
                u |= blocks[i];
            }
        }
        const bool negative = ((k - static_cast<unsigned>(std::popcount(s))) & 1U) != 0;
        const IntVec& v = phi(u);
        for (unsigned i = 0; i < phi.dim; ++i) {
            if (negative) {
                acc[i] -= v[i];
            } else {
                acc[i] += v[i];
            }
        }
    }
    return is_zero_vector(acc);
}

} // namespace detail

inline constexpr unsigned kVipCheckOrderedMaxR = 6;
inline constexpr unsigned kVipCheckMaxR = 8;

/// True iff D_{beta_0} ... D_{beta_t} phi vanishes for all pairwise disjoint
/// nonempty beta_0..beta_t. The check runs at alpha = empty; vanishing there for
/// every family of size t+1 forces vanishing at every alpha disjoint from the
/// family (D_a D_b = D_{a u b} - D_a - D_b at the empty set).
inline bool vip_degree_check(const VipSample& phi, unsigned t)
{
    if (phi.r > kVipCheckMaxR) {
        throw Error("vip_degree_check: r = " + std::to_string(phi.r) + " exceeds the exhaustive cap " +
                    std::to_string(kVipCheckMaxR));
    }
    const unsigned blocks = t + 1;
    if (blocks > phi.r) {
        return true;
    }
    const unsigned r = phi.r;
    std::vector<FinSubset> fam(blocks, 0);

    if (r <= kVipCheckOrderedMaxR) {
        // Every element goes to no block or to one of the labelled blocks.
        std::function<bool(unsigned)> rec = [&](unsigned k) -> bool {
            if (k == r) {
                for (auto b : fam) {
                    if (b == 0) {
                        return true;
                    }
                }
                return detail::alternating_sum_vanishes(phi, fam);
            }
            if (!rec(k + 1)) {
                return false;
            }
            for (unsigned b = 0; b < blocks; ++b) {
                fam[b] |= FinSubset{1} << k;
                const bool ok = rec(k + 1);
                fam[b] &= ~(FinSubset{1} << k);
                if (!ok) {
                    return false;
                }
            }
            return true;
        };
        return rec(0);
    }

    // Canonical order: blocks are opened in order of their least element.
    std::function<bool(unsigned, unsigned)> rec = [&](unsigned k, unsigned opened) -> bool {
        if (k == r) {
            return opened < blocks || detail::alternating_sum_vanishes(phi, fam);
        }
        if (opened + (r - k) < blocks) {
            return true;
        }
        if (!rec(k + 1, opened)) {
            return false;
        }
        for (unsigned b = 0; b < opened; ++b) {
            fam[b] |= FinSubset{1} << k;
            const bool ok = rec(k + 1, opened);
            fam[b] &= ~(FinSubset{1} << k);
            if (!ok) {
                return false;
            }
        }
        if (opened < blocks) {
            fam[opened] |= FinSubset{1} << k;
            const bool ok = rec(k + 1, opened + 1);
            fam[opened] &= ~(FinSubset{1} << k);
            if (!ok) {
                return false;
            }
        }
        return true;
    };
    return rec(0, 0);
}

struct EtaDecomposition {
    unsigned r = 0;
    unsigned D = 0;
    unsigned dim = 1;
    /// levels[t-1] maps each t-element subset to eta_t of it.
    std::vector<std::map<FinSubset, IntVec>> levels;

    const IntVec& eta(FinSubset gamma) const
    {
        const unsigned t = subset_size(gamma);
        if (t == 0 || t > D) {
            throw Error("eta: subset size outside 1..D");
        }
        return levels[t - 1].at(gamma);
    }

    /// Sum of eta over nonempty subsets of alpha with at most D elements.
    IntVec reconstruct(FinSubset alpha) const
    {
        IntVec sum(dim, Integer(0));
        for (FinSubset g = alpha; g != 0; g = (g - 1) & alpha) {
            if (subset_size(g) <= D) {
                add_into(sum, eta(g));
            }
        }
        return sum;
    }
};

/// Bottom-up inversion: eta_t(gamma) = phi(gamma) minus the eta values of all
/// proper nonempty subsets of gamma. The identity phi(alpha) = sum of eta over
/// subsets of size <= D is then verified on every alpha.
inline EtaDecomposition eta_decompose(const VipSample& phi, unsigned D)
{
    if (D == 0) {
        throw Error("eta_decompose: D must be positive");
    }
    if (!phi.anchored()) {
        throw Error("eta_decompose: sample is not anchored (phi(empty) != 0)");
    }
    EtaDecomposition out;
    out.r = phi.r;
    out.D = D;
    out.dim = phi.dim;
    out.levels.resize(D);
    std::vector<FinSubset> by_size;
    for (FinSubset g = 1; g <= phi.full() && g != 0; ++g) {
        if (subset_size(g) <= D) {
            by_size.push_back(g);
        }
    }
    std::stable_sort(by_size.begin(), by_size.end(),
                     [](FinSubset a, FinSubset b) { return subset_size(a) < subset_size(b); });
    for (FinSubset g : by_size) {
        IntVec v = phi(g);
        for (FinSubset s = (g - 1) & g; s != 0; s = (s - 1) & g) {
            const IntVec& e = out.eta(s);
            for (unsigned i = 0; i < phi.dim; ++i) {
                v[i] -= e[i];
            }
        }
        out.levels[subset_size(g) - 1].emplace(g, std::move(v));
    }
    for (FinSubset a = 0; a <= phi.full(); ++a) {
        if (out.reconstruct(a) != phi(a)) {
            throw Error("eta_decompose: reconstruction fails at alpha = " + std::to_string(a) +
                        "; the sample is not a VIP system of degree <= " + std::to_string(D));
        }
        if (a == phi.full()) {
            break;
        }
    }
    return out;
}

/// D-tuples over {1..r}, entries 1-based.
using GridSet = std::set<std::vector<unsigned>>;

/// Set function eta(A) = sum over tuples i_1 < ... < i_t = i_{t+1} = ... = i_D
/// in A of eta_t({i_1, ..., i_t}). Each tuple has at most one such t, so the
/// function is additive on disjoint sets.
inline IntVec eta_set_function(const EtaDecomposition& decomp, const GridSet& A)
{
    IntVec sum(decomp.dim, Integer(0));
    for (const auto& tuple : A) {
        if (tuple.size() != decomp.D) {
            throw Error("eta_set_function: tuple length differs from D");
        }
        for (unsigned i : tuple) {
            if (i == 0 || i > decomp.r) {
                throw Error("eta_set_function: tuple entry outside 1..r");
            }
        }
        unsigned t = 1;
        while (t < decomp.D && tuple[t - 1] < tuple[t]) {
            ++t;
        }
        bool tail_constant = true;
        for (unsigned j = t; j < decomp.D; ++j) {
            if (tuple[j] != tuple[t - 1]) {
                tail_constant = false;
                break;
            }
        }
        if (!tail_constant) {
            continue;
        }
        FinSubset gamma = 0;
        for (unsigned j = 0; j < t; ++j) {
            gamma |= FinSubset{1} << (tuple[j] - 1);
        }
        add_into(sum, decomp.eta(gamma));
    }
    return sum;
}

/// alpha^D as a grid set.
inline GridSet subset_power(FinSubset alpha, unsigned D)
{
    const auto elems = subset_elements(alpha);
    GridSet out;
    if (elems.empty()) {
        return out;
    }
    std::vector<std::size_t> idx(D, 0);
    while (true) {
        std::vector<unsigned> t(D);
        for (unsigned j = 0; j < D; ++j) {
            t[j] = elems[idx[j]];
        }
        out.insert(std::move(t));
        std::size_t j = D;
        while (true) {
            if (j == 0) {
                return out;
            }
            --j;
            if (++idx[j] < elems.size()) {
                break;
            }
            idx[j] = 0;
        }
    }
}

struct IpWitness {
    std::vector<Point> generators;
    std::vector<Point> subset_sums;
};

inline constexpr unsigned kIpWitnessMaxR = 5;

/// Searches r distinct generators in [-box, box]^d whose nonempty subset sums
/// all lie in the window and outside the target. Returns the least such
/// tuple (g_1 < ... < g_r in lexicographic order, tuples compared
/// lexicographically), or nothing when the box holds no witness.
inline std::optional<IpWitness> ip_r_star_witness_search(const std::function<bool(const Point&)>& target,
                                                          const Box& window, unsigned r, long long generator_box)
{
    if (r == 0 || r > kIpWitnessMaxR) {
        throw Error("ip_r_star_witness_search: r must be in 1.." + std::to_string(kIpWitnessMaxR));
    }
    if (generator_box < 1) {
        throw Error("ip_r_star_witness_search: generator box must be at least 1");
    }
    if (window.empty()) {
        throw Error("ip_r_star_witness_search: empty window");
    }
    const unsigned d = window.dim();
    const auto candidates = Box::cube(d, -generator_box, generator_box).points();

    std::vector<std::size_t> chosen;
    std::vector<std::vector<Point>> sums{{}};

    // Depth-first over increasing candidate indices; sums.back() holds the
    // nonempty subset sums of the chosen prefix. With use_target unset the
    // search only asks whether any admissible tuple exists.
    std::function<bool(std::size_t, bool)> rec = [&](std::size_t start, bool use_target) -> bool {
        if (chosen.size() == r) {
            return true;
        }
        for (std::size_t c = start; c < candidates.size(); ++c) {
            const Point& g = candidates[c];
            if (!window.contains(g) || (use_target && target(g))) {
                continue;
            }
            const auto& prev = sums.back();
            std::vector<Point> next = prev;
            next.push_back(g);
            bool ok = true;
            for (const auto& s0 : prev) {
                Point s = s0;
                for (unsigned i = 0; i < d; ++i) {
                    s[i] += g[i];
                }
                if (!window.contains(s) || (use_target && target(s))) {
                    ok = false;
                    break;
                }
                next.push_back(std::move(s));
            }
            if (!ok) {
                continue;
            }
            chosen.push_back(c);
            sums.push_back(std::move(next));
            if (rec(c + 1, use_target)) {
                return true;
            }
            chosen.pop_back();
            sums.pop_back();
        }
        return false;
    };

    if (!rec(0, true)) {
        if (!rec(0, false)) {
            throw Error("ip_r_star_witness_search: window " + window.to_string() +
                        " contains no admissible IP_" + std::to_string(r) + " set with generators in the box");
        }
        return std::nullopt;
    }
    IpWitness w;
    for (auto c : chosen) {
        w.generators.push_back(candidates[c]);
    }
    std::set<Point> distinct(sums.back().begin(), sums.back().end());
    w.subset_sums.assign(distinct.begin(), distinct.end());
    return w;
}

/// Re-checks a certificate: distinct generators, every nonempty subset sum in the window and outside the target.
inline bool validate_ip_witness(const IpWitness& w, const std::function<bool(const Point&)>& target, const Box& window)
{
    const std::size_t r = w.generators.size();
    if (r == 0 || r > kMaxVipR) {
        return false;
    }
    std::set<Point> distinct(w.generators.begin(), w.generators.end());
    if (distinct.size() != r) {
        return false;
    }
    for (std::uint32_t a = 1; a < (1U << r); ++a) {
        Point s(window.dim(), 0);
        for (std::size_t k = 0; k < r; ++k) {
            if ((a >> k) & 1U) {
                if (w.generators[k].size() != s.size()) {
                    return false;
                }
                for (std::size_t i = 0; i < s.size(); ++i) {
                    s[i] += w.generators[k][i];
                }
            }
        }
        if (!window.contains(s) || target(s)) {
            return false;
        }
    }
    return true;
}

} // namespace retsets

#pragma once

#include "retsets/exactnum.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace retsets {

struct Interval {
    Rational lo;
    Rational hi;

    Rational length() const { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of half-open intervals [lo, hi) on the circle [0, 1).
///
/// Canonical form: 0 <= lo < hi <= 1, sorted by lo, pairwise disjoint, and
/// no two intervals touch (touching pieces are merged). An arc that wraps
/// past 1 is stored as two pieces, [s, 1) and [0, e). Every constructor
/// returns canonical form, so equality is structural.
class IntervalSet {
public:
    IntervalSet() = default;

    static IntervalSet full()
    {
        IntervalSet s;
        s.pieces_.push_back({Rational(0), Rational(1)});
        return s;
    }

    /// Canonical union of pieces with 0 <= lo <= hi <= 1. Empty pieces are dropped.
    static IntervalSet from_intervals(std::vector<Interval> pieces)
    {
        for (const auto& p : pieces) {
            if (p.lo < 0 || p.hi > 1 || p.lo > p.hi) {
                throw Error("interval [" + to_string(p.lo) + ", " + to_string(p.hi) + ") is not inside [0, 1)");
            }
        }
        IntervalSet s;
        s.pieces_ = std::move(pieces);
        s.canonicalize();
        return s;
    }

    /// The arc {start + s mod 1 : 0 <= s < length}. A length of 1 or more covers the circle.
    static IntervalSet arc(const Rational& start, const Rational& length)
    {
        std::vector<Interval> pieces;
        append_arc(pieces, start, length);
        IntervalSet s;
        s.pieces_ = std::move(pieces);
        s.canonicalize();
        return s;
    }

    const std::vector<Interval>& intervals() const { return pieces_; }
    std::size_t size() const { return pieces_.size(); }
    bool empty() const { return pieces_.empty(); }
    bool is_full() const { return pieces_.size() == 1 && pieces_[0].lo == 0 && pieces_[0].hi == 1; }

    Rational measure() const
    {
        Rational total(0);
        for (const auto& p : pieces_) {
            total += p.hi - p.lo;
        }
        return total;
    }

    /// Membership of t mod 1.
    bool contains(const Rational& t) const
    {
        Rational x = frac(t);
        auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                                   [](const Rational& v, const Interval& p) { return v < p.lo; });
        if (it == pieces_.begin()) {
            return false;
        }
        --it;
        return x < it->hi;
    }

    IntervalSet intersect(const IntervalSet& other) const
    {
        IntervalSet out;
        std::size_t i = 0;
        std::size_t j = 0;
        const auto& a = pieces_;
        const auto& b = other.pieces_;
        while (i < a.size() && j < b.size()) {
            const Rational& lo = a[i].lo < b[j].lo ? b[j].lo : a[i].lo;
            const Rational& hi = a[i].hi < b[j].hi ? a[i].hi : b[j].hi;
            if (lo < hi) {
                out.pieces_.push_back({lo, hi});
            }
            if (a[i].hi < b[j].hi) {
                ++i;
            } else {
                ++j;
            }
        }
        // Pieces of canonical inputs cannot touch after intersection, so no merge pass.
        return out;
    }

    IntervalSet unite(const IntervalSet& other) const
    {
        IntervalSet out;
        out.pieces_ = pieces_;
        out.pieces_.insert(out.pieces_.end(), other.pieces_.begin(), other.pieces_.end());
        out.canonicalize();
        return out;
    }

    IntervalSet complement() const
    {
        IntervalSet out;
        Rational cursor(0);
        for (const auto& p : pieces_) {
            if (cursor < p.lo) {
                out.pieces_.push_back({cursor, p.lo});
            }
            cursor = p.hi;
        }
        if (cursor < 1) {
            out.pieces_.push_back({cursor, Rational(1)});
        }
        return out;
    }

    /// {t in [0,1) : (t + c) mod 1 in this}.
    IntervalSet rotate_preimage(const Rational& c) const
    {
        if (is_full()) {
            return *this;
        }
        std::vector<Interval> pieces;
        pieces.reserve(pieces_.size() + 1);
        for (const auto& p : pieces_) {
            append_arc(pieces, p.lo - c, p.hi - p.lo);
        }
        IntervalSet out;
        out.pieces_ = std::move(pieces);
        out.canonicalize();
        return out;
    }

    /// {t in [0,1) : (k t + c) mod 1 in this}.
    ///
    /// For k = 0 the answer is empty or the full circle. For negative k the
    /// exact preimage of [lo, hi) is left-open; it is stored as [a, b), which
    /// differs from the true set in finitely many points and has the same measure.
    IntervalSet preimage_affine(const Integer& k, const Rational& c) const
    {
        if (k == 0) {
            return contains(c) ? full() : IntervalSet{};
        }
        if (k == 1) {
            return rotate_preimage(c);
        }
        const Rational kq(k);
        const Rational range_lo = k > 0 ? c : c + kq;
        const Rational range_hi = k > 0 ? c + kq : c;
        const Integer m_first = floor_of(range_lo) - 1;
        const Integer m_last = floor_of(range_hi) + 1;

        std::vector<Interval> pieces;
        for (const auto& p : pieces_) {
            for (Integer m = m_first; m <= m_last; ++m) {
                Rational a = (p.lo + Rational(m) - c) / kq;
                Rational b = (p.hi + Rational(m) - c) / kq;
                if (b < a) {
                    std::swap(a, b);
                }
                if (a < 0) {
                    a = 0;
                }
                if (b > 1) {
                    b = 1;
                }
                if (a < b) {
                    pieces.push_back({std::move(a), std::move(b)});
                }
            }
        }
        IntervalSet out;
        out.pieces_ = std::move(pieces);
        out.canonicalize();
        return out;
    }

    /// Forward image {(k t + c) mod 1 : t in this}. A constant map (k = 0)
    /// collapses the set to at most one point, which has no interval
    /// representation; the result is then empty.
    IntervalSet image_affine(const Integer& k, const Rational& c) const
    {
        if (k == 0) {
            return {};
        }
        const Rational kq(k);
        std::vector<Interval> pieces;
        for (const auto& p : pieces_) {
            const Rational start = k > 0 ? kq * p.lo + c : kq * p.hi + c;
            const Rational len = (k > 0 ? kq : -kq) * (p.hi - p.lo);
            append_arc(pieces, start, len);
        }
        IntervalSet out;
        out.pieces_ = std::move(pieces);
        out.canonicalize();
        return out;
    }

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

    /// Appends the canonical pieces of an arc (not merged with existing pieces).
    static void append_arc(std::vector<Interval>& pieces, const Rational& start, const Rational& length)
    {
        if (length <= 0) {
            return;
        }
        if (length >= 1) {
            pieces.push_back({Rational(0), Rational(1)});
            return;
        }
        Rational s = frac(start);
        Rational e = s + length;
        if (e <= 1) {
            pieces.push_back({std::move(s), std::move(e)});
        } else {
            pieces.push_back({std::move(s), Rational(1)});
            pieces.push_back({Rational(0), e - 1});
        }
    }

private:
    void canonicalize()
    {
        std::erase_if(pieces_, [](const Interval& p) { return !(p.lo < p.hi); });
        std::sort(pieces_.begin(), pieces_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::vector<Interval> merged;
        merged.reserve(pieces_.size());
        for (auto& p : pieces_) {
            if (!merged.empty() && p.lo <= merged.back().hi) {
                if (merged.back().hi < p.hi) {
                    merged.back().hi = std::move(p.hi);
                }
            } else {
                merged.push_back(std::move(p));
            }
        }
        pieces_ = std::move(merged);
    }

    std::vector<Interval> pieces_;
};

/// Circle arcs of a canonical set: pieces [0, a) and [b, 1) are joined into
/// one arc starting at b. Each arc is (start, length) with start in [0, 1).
/// The full circle yields a single arc of length 1.
inline std::vector<std::pair<Rational, Rational>> circle_arcs(const IntervalSet& s)
{
    std::vector<std::pair<Rational, Rational>> arcs;
    const auto& p = s.intervals();
    if (p.empty()) {
        return arcs;
    }
    if (s.is_full()) {
        arcs.emplace_back(Rational(0), Rational(1));
        return arcs;
    }
    const bool wraps = p.size() >= 2 && p.front().lo == 0 && p.back().hi == 1;
    const std::size_t first = wraps ? 1 : 0;
    const std::size_t last = wraps ? p.size() - 1 : p.size();
    for (std::size_t i = first; i < last; ++i) {
        arcs.emplace_back(p[i].lo, p[i].hi - p[i].lo);
    }
    if (wraps) {
        arcs.emplace_back(p.back().lo, (p.back().hi - p.back().lo) + (p.front().hi - p.front().lo));
    }
    return arcs;
}

} // namespace retsets

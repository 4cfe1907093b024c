#pragma once

#include "retsets/exactnum.hpp"

#include <string>
#include <utility>
#include <vector>

namespace retsets {

using Point = std::vector<long long>;

/// Integer window [lo_1, hi_1] x ... x [lo_d, hi_d], bounds inclusive.
struct Box {
    std::vector<std::pair<long long, long long>> ranges;

    Box() = default;
    explicit Box(std::vector<std::pair<long long, long long>> r) : ranges(std::move(r)) {}

    static Box interval(long long lo, long long hi) { return Box({{lo, hi}}); }

    static Box cube(unsigned d, long long lo, long long hi)
    {
        return Box(std::vector<std::pair<long long, long long>>(d, {lo, hi}));
    }

    unsigned dim() const { return static_cast<unsigned>(ranges.size()); }

    bool empty() const
    {
        if (ranges.empty()) {
            return true;
        }
        for (const auto& [lo, hi] : ranges) {
            if (lo > hi) {
                return true;
            }
        }
        return false;
    }

    bool contains(const Point& p) const
    {
        if (p.size() != ranges.size()) {
            return false;
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] < ranges[i].first || p[i] > ranges[i].second) {
                return false;
            }
        }
        return true;
    }

    /// All points in lexicographic order.
    std::vector<Point> points() const
    {
        std::vector<Point> out;
        if (empty()) {
            return out;
        }
        Point x(ranges.size());
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            x[i] = ranges[i].first;
        }
        while (true) {
            out.push_back(x);
            std::size_t i = ranges.size();
            while (true) {
                if (i == 0) {
                    return out;
                }
                --i;
                if (x[i] < ranges[i].second) {
                    ++x[i];
                    break;
                }
                x[i] = ranges[i].first;
            }
        }
    }

    std::string to_string() const
    {
        std::string s;
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            if (i != 0) {
                s += " x ";
            }
            s += "[" + std::to_string(ranges[i].first) + ", " + std::to_string(ranges[i].second) + "]";
        }
        return s;
    }

    friend bool operator==(const Box&, const Box&) = default;
};

inline IntVec to_integers(const Point& p)
{
    IntVec v;
    v.reserve(p.size());
    for (long long x : p) {
        v.push_back(make_integer(x));
    }
    return v;
}

} // namespace retsets

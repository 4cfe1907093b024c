#pragma once

// Independent oracle for the skew correlation
//   ∫∫ 1_B(y) Π_j 1_B(y + k_j x) dx dy   over [0,1)^2.
// The integrand region is cut out of the unit square by strips
// lo <= y + k x - t < hi, one per interval of B and integer wrap t. Each strip
// is the intersection of two half-planes, so the region is a disjoint union of
// convex polygons obtained by repeated clipping; the area is the shoelace sum.
// Nothing here shares code with the 1D slicing used by the library.

#include <gmpxx.h>

#include <utility>
#include <vector>

namespace oracle {

using Q = mpq_class;

struct Pt {
    Q x, y;
};
using Polygon = std::vector<Pt>;

// keep the part where a*x + b*y + c >= 0
inline Polygon clip(const Polygon& poly, const Q& a, const Q& b, const Q& c)
{
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Pt& p = poly[i];
        const Pt& q = poly[(i + 1) % n];
        const Q fp = a * p.x + b * p.y + c;
        const Q fq = a * q.x + b * q.y + c;
        if (fp >= 0) {
            out.push_back(p);
        }
        if ((fp > 0 && fq < 0) || (fp < 0 && fq > 0)) {
            const Q s = fp / (fp - fq);
            out.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
        }
    }
    return out.size() >= 3 ? out : Polygon{};
}

inline Q area(const Polygon& poly)
{
    Q twice = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Pt& p = poly[i];
        const Pt& q = poly[(i + 1) % poly.size()];
        twice += p.x * q.y - q.x * p.y;
    }
    if (twice < 0) {
        twice = -twice;
    }
    return twice / 2;
}

// B given as disjoint [lo, hi) pairs inside [0,1)
inline Q skew_correlation_area(const std::vector<std::pair<Q, Q>>& B, const std::vector<long long>& ks)
{
    std::vector<Polygon> region;
    for (const auto& [lo, hi] : B) {
        region.push_back({{0, lo}, {1, lo}, {1, hi}, {0, hi}});
    }
    for (long long k : ks) {
        const long long tmin = std::min(0LL, k) - 1;
        const long long tmax = std::max(0LL, k) + 1;
        std::vector<Polygon> next;
        for (const auto& poly : region) {
            for (long long t = tmin; t <= tmax; ++t) {
                for (const auto& [lo, hi] : B) {
                    // y + k x - t - lo >= 0  and  hi - (y + k x - t) >= 0
                    Polygon piece = clip(poly, Q(static_cast<long>(k)), Q(1), Q(static_cast<long>(-t)) - lo);
                    if (piece.empty()) {
                        continue;
                    }
                    piece = clip(piece, Q(static_cast<long>(-k)), Q(-1), hi + Q(static_cast<long>(t)));
                    if (!piece.empty()) {
                        next.push_back(std::move(piece));
                    }
                }
            }
        }
        region = std::move(next);
    }
    Q total = 0;
    for (const auto& poly : region) {
        total += area(poly);
    }
    return total;
}

} // namespace oracle

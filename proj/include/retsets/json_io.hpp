#pragma once

// JSON encoding of library values. Rationals are "p/q" strings; nlohmann's
// default object type is an ordered map, so keys come out sorted.

#include "retsets/constructions.hpp"
#include "retsets/interval_set.hpp"
#include "retsets/ipcomb.hpp"
#include "retsets/polyring.hpp"
#include "retsets/systems.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace retsets {

using Json = nlohmann::json;

inline Json to_json(const Rational& q)
{
    return to_string(q);
}

/// Integers that fit in 64 bits are JSON numbers, larger ones decimal strings.
inline Json to_json(const Integer& z)
{
    if (z.fits_slong_p()) {
        return static_cast<long long>(z.get_si());
    }
    return z.get_str();
}

inline Json to_json(const IntVec& v)
{
    Json a = Json::array();
    for (const auto& x : v) {
        a.push_back(to_json(x));
    }
    return a;
}

inline Json to_json(const IntervalSet& s)
{
    Json a = Json::array();
    for (const auto& p : s.intervals()) {
        a.push_back(Json::array({to_string(p.lo), to_string(p.hi)}));
    }
    return a;
}

inline Json point_json(const Point& p)
{
    if (p.size() == 1) {
        return p[0];
    }
    return Json(p);
}

inline Json points_json(const std::vector<Point>& ps)
{
    Json a = Json::array();
    for (const auto& p : ps) {
        a.push_back(point_json(p));
    }
    return a;
}

inline Json to_json(const Box& b)
{
    if (b.dim() == 1) {
        return Json::array({b.ranges[0].first, b.ranges[0].second});
    }
    Json a = Json::array();
    for (const auto& [lo, hi] : b.ranges) {
        a.push_back(Json::array({lo, hi}));
    }
    return a;
}

inline Json polys_json(const std::vector<IntPoly>& polys)
{
    Json a = Json::array();
    for (const auto& p : polys) {
        a.push_back(p.to_string());
    }
    return a;
}

inline Json to_json(const Enclosure& e)
{
    return Json{{"lo", to_json(e.lo)}, {"hi", to_json(e.hi)}, {"grid", e.grid}, {"lipschitz", to_json(e.lipschitz)}};
}

inline Json to_json(const SyndeticityReport& s)
{
    return Json{{"max_gap", s.max_gap},
                {"heuristic", s.heuristic},
                {"no_members", s.no_members},
                {"possibly_zero_only", s.possibly_zero_only},
                {"flags", s.flags}};
}

inline Json to_json(const ReturnSetReport& r)
{
    Json decisions = Json::array();
    for (const auto& d : r.decisions) {
        decisions.push_back(Json{{"n", point_json(d.n)},
                                 {"decision", to_string(d.decision)},
                                 {"lo", to_json(d.lo)},
                                 {"hi", to_json(d.hi)},
                                 {"grid", d.grid},
                                 {"method", d.method}});
    }
    return Json{{"window", to_json(r.window)},
                {"epsilon", to_json(r.epsilon)},
                {"threshold", to_json(r.threshold)},
                {"members", points_json(r.members)},
                {"inconclusive", points_json(r.inconclusive)},
                {"max_gap", r.max_gap},
                {"exactness", to_string(r.exactness)},
                {"distinct_shift_tuples", r.distinct_shift_tuples},
                {"decisions", decisions}};
}

inline Json to_json(const BehrendSet& s)
{
    return Json{{"b", s.b},
                {"N", s.N},
                {"n", s.n},
                {"d", s.d},
                {"k", s.k},
                {"base", s.base},
                {"elements", s.elements},
                {"size", s.elements.size()},
                {"level_sizes", s.level_sizes},
                {"pigeonhole_bound", to_json(s.pigeonhole_bound)},
                {"density", to_json(s.density)}};
}

inline Json to_json(const IntervalFamily& f)
{
    return Json{{"m", f.m},
                {"c", f.c},
                {"b", f.b},
                {"lambda", to_json(f.lambda)},
                {"intervals", to_json(f.result)},
                {"measure", to_json(f.result.measure())},
                {"interval_length", to_json(f.length())},
                {"spacing", to_json(f.spacing())}};
}

inline Json to_json(const SmallIntersectionCounterexample& c)
{
    Json support = Json::array();
    for (auto j : c.support) {
        support.push_back(j + 1);
    }
    return Json{{"polys", polys_json(c.polys)},
                {"r", c.r},
                {"dependency", to_json(c.dependency)},
                {"support", support},
                {"system",
                 Json{{"type", "skew"},
                      {"base_set", to_json(c.system.base_set)},
                      {"exponents", to_json(c.system.exponents)}}},
                {"m", c.m},
                {"b", c.b},
                {"c", c.c},
                {"lambda", c.family.lambda.elements},
                {"measure", to_json(c.measure)},
                {"threshold", to_json(c.threshold)},
                {"bound", to_json(c.bound)},
                {"admissible", c.admissible},
                {"expected", points_json(c.expected)},
                {"members_subset_of_expected", c.members_subset_of_expected},
                {"members_equal_expected", c.members_equal_expected},
                {"bound_violations", points_json(c.bound_violations)},
                {"certified", c.certified},
                {"report", to_json(c.report)}};
}

inline Json to_json(const IntersectivityVerdict& v)
{
    Json roots = Json::object();
    for (const auto& [m, root] : v.witness_roots) {
        roots[std::to_string(m)] = root;
    }
    Json out{{"jointly_intersective_up_to", v.jointly_intersective_up_to},
             {"bounded_verdict", v.bounded()},
             {"witness_roots", roots}};
    out["witness_modulus"] = v.witness_modulus ? Json(*v.witness_modulus) : Json(nullptr);
    return out;
}

inline Json to_json(const VipSample& s)
{
    Json vals = Json::array();
    for (const auto& v : s.values) {
        vals.push_back(to_json(v));
    }
    return Json{{"r", s.r}, {"dim", s.dim}, {"anchored", s.anchored()}, {"values", vals}};
}

inline Json subset_json(FinSubset s)
{
    return Json(subset_elements(s));
}

inline Json to_json(const EtaDecomposition& e)
{
    Json levels = Json::array();
    for (unsigned t = 1; t <= e.D; ++t) {
        Json level = Json::array();
        for (const auto& [g, v] : e.levels[t - 1]) {
            level.push_back(Json{{"gamma", subset_json(g)}, {"eta", to_json(v)}});
        }
        levels.push_back(Json{{"t", t}, {"values", level}});
    }
    return Json{{"r", e.r}, {"D", e.D}, {"dim", e.dim}, {"levels", levels}};
}

inline Json to_json(const IpWitness& w)
{
    return Json{{"generators", points_json(w.generators)}, {"subset_sums", points_json(w.subset_sums)}};
}

// --- decoding ---------------------------------------------------------------

inline Rational rational_from_json(const Json& j)
{
    if (j.is_string()) {
        return parse_rational(j.get<std::string>());
    }
    if (j.is_number_integer()) {
        return make_rational(j.get<long long>());
    }
    throw ParseError("expected a rational \"p/q\" string or an integer, got " + j.dump());
}

inline Integer integer_from_json(const Json& j)
{
    if (j.is_string()) {
        return parse_integer(j.get<std::string>());
    }
    if (j.is_number_integer()) {
        return make_integer(j.get<long long>());
    }
    throw ParseError("expected an integer, got " + j.dump());
}

inline IntervalSet interval_set_from_json(const Json& j)
{
    if (!j.is_array()) {
        throw ParseError("interval set must be an array of [lo, hi] pairs");
    }
    std::vector<Interval> pieces;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2) {
            throw ParseError("interval must be a [lo, hi] pair, got " + p.dump());
        }
        pieces.push_back({rational_from_json(p[0]), rational_from_json(p[1])});
    }
    return IntervalSet::from_intervals(std::move(pieces));
}

/// [lo, hi] for one dimension or [[lo, hi], ...] for several.
inline Box box_from_json(const Json& j)
{
    if (!j.is_array() || j.empty()) {
        throw ParseError("window must be [lo, hi] or [[lo, hi], ...]");
    }
    if (j[0].is_number_integer()) {
        if (j.size() != 2 || !j[1].is_number_integer()) {
            throw ParseError("window must be [lo, hi]");
        }
        return Box::interval(j[0].get<long long>(), j[1].get<long long>());
    }
    std::vector<std::pair<long long, long long>> ranges;
    for (const auto& r : j) {
        if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
            throw ParseError("window range must be [lo, hi], got " + r.dump());
        }
        ranges.emplace_back(r[0].get<long long>(), r[1].get<long long>());
    }
    return Box(std::move(ranges));
}

} // namespace retsets

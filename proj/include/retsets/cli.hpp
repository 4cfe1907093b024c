#pragma once

// Batch front end shared by the retsets tool and the tests: per-command
// parameter schemas, dispatch, and deterministic serialization.

#include "retsets/constructions.hpp"
#include "retsets/ipcomb.hpp"
#include "retsets/json_io.hpp"
#include "retsets/polyring.hpp"
#include "retsets/systems.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace retsets::cli {

inline constexpr const char* kToolVersion = "retsets 1.0.0";

enum class ExitCode : int { ok = 0, error = 1, inconclusive = 2 };

class SchemaError : public Error {
public:
    SchemaError(const std::string& key, const std::string& what) : Error("parameter '" + key + "': " + what), key_(key)
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class ParamType { integer, integer_list, string, string_list, rational, rational_list, boolean, window, json };

struct ParamSpec {
    std::string name;
    ParamType type;
    bool required = false;
    Json fallback = nullptr;
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
};

inline const std::vector<CommandSpec>& command_specs()
{
    using T = ParamType;
    static const std::vector<CommandSpec> specs = {
        {"behrend",
         "Behrend-type solution-free set for weight b inside {1..N}",
         {{"b", T::integer, true, nullptr, "largest weight sum of the equations avoided"},
          {"N", T::integer, true, nullptr, "ambient bound"}}},
        {"verify-free",
         "Exhaustive check of a set against a_1x_1+...+a_tx_t = (sum a)x_{t+1}",
         {{"set", T::integer_list, true, nullptr, "the set, comma separated"},
          {"b", T::integer, true, nullptr, "bound on the weight sum"}}},
        {"family",
         "Interval family: union of j/(2m(c+1)) + [0, 1/(8m(c+1)^2)) over the Behrend set",
         {{"m", T::integer, true, nullptr, "Behrend bound"},
          {"c", T::integer, true, nullptr, "spacing parameter"},
          {"b", T::integer, true, nullptr, "Behrend weight"}}},
        {"counterexample",
         "Skew-product counterexample for a linearly dependent family",
         {{"polys", T::string_list, true, nullptr, "polynomials"},
          {"r", T::integer, false, 2, "power in the threshold mu^r(A)/2"},
          {"window", T::window, false, Json::array({-30, 30}), "window of n"},
          {"grid", T::integer, false, 1024, "initial enclosure grid"},
          {"grid_cap", T::integer, false, 16384, "largest enclosure grid"},
          {"exact_fallback", T::boolean, false, true, "decide leftover points with the exact integrator"},
          {"m_cap", T::integer, false, 10000000, "largest m tried"}}},
        {"modulus",
         "Cyclic counterexample for a family without common roots mod m",
         {{"polys", T::string_list, true, nullptr, "polynomials"},
          {"m", T::integer, false, nullptr, "witness modulus (searched when absent)"},
          {"bound", T::integer, false, 50, "modulus bound for the witness search"},
          {"window", T::window, false, Json::array({-50, 50}), "window of n"}}},
        {"return-set",
         "Return set of a cyclic or skew-product system over a window",
         {{"type", T::string, true, nullptr, "cyclic or skew"},
          {"modulus", T::integer, false, nullptr, "cyclic: M"},
          {"subset", T::integer_list, false, nullptr, "cyclic: residues of A"},
          {"base_set", T::json, false, nullptr, "skew: [[lo, hi], ...] with p/q strings"},
          {"exponents", T::integer_list, false, nullptr, "skew: a_j with T_j = T^{a_j}"},
          {"polys", T::string_list, true, nullptr, "polynomials"},
          {"epsilon", T::rational, true, nullptr, "epsilon as p/q"},
          {"window", T::window, true, nullptr, "window of n"},
          {"grid", T::integer, false, 1024, "skew: initial enclosure grid"},
          {"grid_cap", T::integer, false, 16384, "skew: largest enclosure grid"},
          {"exact_fallback", T::boolean, false, false, "skew: decide leftover points exactly"}}},
        {"diophantine",
         "Points with ||p_j(n) alpha_s|| < epsilon, and a shift u with ||p_j(u) alpha_s|| < epsilon/2",
         {{"polys", T::string_list, true, nullptr, "polynomials"},
          {"alphas", T::rational_list, true, nullptr, "rationals alpha_s"},
          {"epsilon", T::rational, true, nullptr, "epsilon as p/q"},
          {"window", T::window, true, nullptr, "window of n"},
          {"search_box", T::integer, false, 10, "box for the shift search"}}},
        {"vip-check",
         "Degree check of phi(alpha) = p(n_alpha) by exhaustive derivatives",
         {{"polys", T::string_list, true, nullptr, "polynomials (one coordinate each)"},
          {"generators", T::json, true, nullptr, "n_1..n_r as integers or integer vectors"},
          {"t", T::integer, true, nullptr, "number of derivatives minus one"}}},
        {"eta",
         "Level decomposition eta_t of phi(alpha) = p(n_alpha) and its set function",
         {{"polys", T::string_list, true, nullptr, "polynomials (one coordinate each)"},
          {"generators", T::json, true, nullptr, "n_1..n_r as integers or integer vectors"},
          {"D", T::integer, true, nullptr, "degree bound"},
          {"sets", T::json, false, Json::array(), "grid sets: lists of D-tuples over 1..r"}}},
        {"ipr-witness",
         "Search for an IP_r set avoiding a target set (refutes IP_r*)",
         {{"target", T::string, true, nullptr, "odd, even, nonzero, all, none, multiples:K or non-multiples:K"},
          {"window", T::window, true, nullptr, "window that must contain all subset sums"},
          {"r", T::integer, true, nullptr, "number of generators (at most 5)"},
          {"box", T::integer, true, nullptr, "generators range over [-box, box]^d"}}},
        {"dphj",
         "First wildcard set gamma and tuple satisfying the two DPHJ conditions",
         {{"q", T::integer, true, nullptr, "tuple length"},
          {"D", T::integer, true, nullptr, "dimension of the grid {1..N}^D"},
          {"N", T::integer, true, nullptr, "grid side"},
          {"S", T::json, true, nullptr, "\"all\" or a list of tuples of cell lists"}}},
        {"constants",
         "r = C and c = delta / 2^(ell r^D + r + 1)",
         {{"ell", T::integer, true, nullptr, "number of VIP systems"},
          {"D", T::integer, true, nullptr, "degree bound"},
          {"delta", T::rational, true, nullptr, "density as p/q"},
          {"C", T::integer, true, nullptr, "value of the DPHJ constant (an input)"}}},
    };
    return specs;
}

inline const CommandSpec& command_spec(const std::string& name)
{
    for (const auto& s : command_specs()) {
        if (s.name == name) {
            return s;
        }
    }
    throw SchemaError("command", "unknown command '" + name + "'");
}

namespace detail {

inline void check_type(const ParamSpec& p, const Json& v)
{
    auto is_int = [](const Json& x) {
        return x.is_number_integer() || (x.is_string() && retsets::detail::is_integer_literal(x.get<std::string>()));
    };
    auto is_rat = [](const Json& x) {
        if (x.is_number_integer()) {
            return true;
        }
        if (!x.is_string()) {
            return false;
        }
        try {
            parse_rational(x.get<std::string>());
            return true;
        } catch (const ParseError&) {
            return false;
        }
    };
    bool ok = true;
    switch (p.type) {
    case ParamType::integer:
        ok = is_int(v);
        break;
    case ParamType::integer_list:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_number_integer(); });
        break;
    case ParamType::string:
        ok = v.is_string();
        break;
    case ParamType::string_list:
        ok = v.is_array() && !v.empty() &&
             std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_string(); });
        break;
    case ParamType::rational:
        ok = is_rat(v);
        break;
    case ParamType::rational_list:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), is_rat);
        break;
    case ParamType::boolean:
        ok = v.is_boolean();
        break;
    case ParamType::window:
        try {
            box_from_json(v);
        } catch (const Error&) {
            ok = false;
        }
        break;
    case ParamType::json:
        break;
    }
    if (!ok) {
        throw SchemaError(p.name, "bad value " + v.dump());
    }
}

} // namespace detail

/// Checks params against the command schema: rejects unknown keys, requires
/// required keys, type-checks values and fills defaults.
inline Json validate_params(const std::string& command, const Json& params)
{
    const auto& spec = command_spec(command);
    if (!params.is_object()) {
        throw SchemaError("params", "must be an object");
    }
    for (const auto& [k, v] : params.items()) {
        const bool known =
            std::any_of(spec.params.begin(), spec.params.end(), [&](const ParamSpec& p) { return p.name == k; });
        if (!known) {
            throw SchemaError(k, "not a parameter of '" + command + "'");
        }
    }
    Json out = Json::object();
    for (const auto& p : spec.params) {
        if (params.contains(p.name) && !params.at(p.name).is_null()) {
            detail::check_type(p, params.at(p.name));
            out[p.name] = params.at(p.name);
        } else if (p.required) {
            throw SchemaError(p.name, "required by '" + command + "'");
        } else if (!p.fallback.is_null()) {
            out[p.name] = p.fallback;
        }
    }
    return out;
}

/// Converts a command-line flag value into the JSON the schema expects.
inline Json flag_value(const ParamSpec& p, const std::vector<std::string>& raw)
{
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : s) {
            if (ch == sep) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        parts.push_back(cur);
        return parts;
    };
    auto integer = [&](const std::string& s) -> Json {
        const Integer z = parse_integer(s);
        return to_json(z);
    };
    const std::string& text = raw.empty() ? std::string() : raw.back();
    try {
        switch (p.type) {
        case ParamType::integer:
            return integer(text);
        case ParamType::integer_list: {
            Json a = Json::array();
            if (text.empty()) {
                return a;
            }
            for (const auto& s : split(text, ',')) {
                a.push_back(parse_integer(s).get_si());
            }
            return a;
        }
        case ParamType::string:
            return text;
        case ParamType::string_list: {
            Json a = Json::array();
            for (const auto& r : raw) {
                for (const auto& s : split(r, ';')) {
                    if (!retsets::detail::trim(s).empty()) {
                        a.push_back(std::string(retsets::detail::trim(s)));
                    }
                }
            }
            return a;
        }
        case ParamType::rational:
            return to_string(parse_rational(text));
        case ParamType::rational_list: {
            Json a = Json::array();
            for (const auto& s : split(text, ',')) {
                a.push_back(to_string(parse_rational(s)));
            }
            return a;
        }
        case ParamType::boolean:
            if (text == "true" || text == "1") {
                return true;
            }
            if (text == "false" || text == "0") {
                return false;
            }
            throw ParseError("expected true or false");
        case ParamType::window: {
            if (!text.empty() && text.front() == '[') {
                return Json::parse(text);
            }
            Json ranges = Json::array();
            for (const auto& part : split(text, ';')) {
                const char sep = part.find(':') != std::string::npos ? ':' : ',';
                const auto ends = split(part, sep);
                if (ends.size() != 2) {
                    throw ParseError("window range must be lo,hi or lo:hi");
                }
                ranges.push_back(Json::array({parse_integer(ends[0]).get_si(), parse_integer(ends[1]).get_si()}));
            }
            return ranges.size() == 1 ? ranges[0] : ranges;
        }
        case ParamType::json: {
            Json j = Json::parse(text, nullptr, false);
            return j.is_discarded() ? Json(text) : j; // bare words such as all
        }
        }
    } catch (const Json::exception& e) {
        throw SchemaError(p.name, std::string("bad JSON: ") + e.what());
    } catch (const Error& e) {
        throw SchemaError(p.name, e.what());
    }
    return nullptr;
}

struct JobConfig {
    std::string command;
    Json params = Json::object();
    std::string format = "json";
    std::string out_path;
    bool timing = false;
};

/// Reads {"command": ..., "params": {...}, "output": {"format", "path"}}.
/// Parameters may also sit at the top level next to "command".
inline JobConfig config_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw SchemaError("config", "must be a JSON object");
    }
    JobConfig c;
    if (j.contains("command")) {
        if (!j["command"].is_string()) {
            throw SchemaError("command", "must be a string");
        }
        c.command = j["command"].get<std::string>();
    }
    if (j.contains("params")) {
        c.params = j["params"];
    } else {
        for (const auto& [k, v] : j.items()) {
            if (k != "command" && k != "output") {
                c.params[k] = v;
            }
        }
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        if (o.contains("format")) {
            c.format = o["format"].get<std::string>();
        }
        if (o.contains("path")) {
            c.out_path = o["path"].get<std::string>();
        }
    }
    return c;
}

struct RunReport {
    std::string command;
    Json params;
    std::string inputs_digest;
    Json results;
    Json exactness;
    std::string version = kToolVersion;
    std::optional<double> timing_ms;
    ExitCode exit_code = ExitCode::ok;

    /// Everything except timing; equal configs give byte-identical payloads.
    Json payload() const
    {
        return Json{{"command", command},
                    {"params", params},
                    {"inputs_digest", inputs_digest},
                    {"results", results},
                    {"exactness", exactness},
                    {"tool_version", version}};
    }
};

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

inline long long get_ll(const Json& params, const std::string& key)
{
    const Integer z = integer_from_json(params.at(key));
    return to_int64(z);
}

inline std::vector<IntPoly> get_polys(const Json& params)
{
    std::vector<std::string> texts;
    for (const auto& p : params.at("polys")) {
        texts.push_back(p.get<std::string>());
    }
    try {
        return parse_family(texts);
    } catch (const ParseError& e) {
        throw SchemaError("polys", e.what());
    }
}

inline std::vector<IntVec> get_generators(const Json& params, unsigned dim)
{
    const Json& g = params.at("generators");
    if (!g.is_array() || g.empty()) {
        throw SchemaError("generators", "must be a nonempty array");
    }
    std::vector<IntVec> out;
    for (const auto& v : g) {
        IntVec x;
        if (v.is_array()) {
            for (const auto& c : v) {
                x.push_back(integer_from_json(c));
            }
        } else {
            x.push_back(integer_from_json(v));
        }
        if (x.size() != dim) {
            throw SchemaError("generators", "generator " + v.dump() + " does not have " + std::to_string(dim) +
                                                " coordinates");
        }
        out.push_back(std::move(x));
    }
    return out;
}

inline std::function<bool(const Point&)> target_predicate(const std::string& spec)
{
    auto any_coord = [](auto pred) {
        return [pred](const Point& p) { return std::any_of(p.begin(), p.end(), pred); };
    };
    auto all_coord = [](auto pred) {
        return [pred](const Point& p) { return std::all_of(p.begin(), p.end(), pred); };
    };
    if (spec == "odd") {
        return any_coord([](long long v) { return v % 2 != 0; });
    }
    if (spec == "even") {
        return all_coord([](long long v) { return v % 2 == 0; });
    }
    if (spec == "nonzero") {
        return any_coord([](long long v) { return v != 0; });
    }
    if (spec == "all") {
        return [](const Point&) { return true; };
    }
    if (spec == "none") {
        return [](const Point&) { return false; };
    }
    for (const std::string prefix : {"multiples:", "non-multiples:"}) {
        if (spec.rfind(prefix, 0) == 0) {
            const long long k = parse_integer(spec.substr(prefix.size())).get_si();
            if (k < 1) {
                throw SchemaError("target", "K must be positive");
            }
            if (prefix == "multiples:") {
                return all_coord([k](long long v) { return v % k == 0; });
            }
            return any_coord([k](long long v) { return v % k != 0; });
        }
    }
    throw SchemaError("target", "unknown target '" + spec + "'");
}

inline std::vector<unsigned> grid_tuple(const Json& t, unsigned D, unsigned limit, const std::string& key)
{
    std::vector<unsigned> out;
    if (t.is_number_integer() && D == 1) {
        out.push_back(t.get<unsigned>());
    } else if (t.is_array() && t.size() == D) {
        for (const auto& x : t) {
            if (!x.is_number_integer()) {
                throw SchemaError(key, "cell entries must be integers");
            }
            out.push_back(x.get<unsigned>());
        }
    } else {
        throw SchemaError(key, "cell " + t.dump() + " is not a " + std::to_string(D) + "-tuple");
    }
    for (unsigned v : out) {
        if (v < 1 || v > limit) {
            throw SchemaError(key, "cell entry outside 1.." + std::to_string(limit));
        }
    }
    return out;
}

inline Json run_behrend(const Json& p, RunReport& rep)
{
    const auto set = behrend_lambda(get_ll(p, "b"), get_ll(p, "N"));
    const auto check = verify_solution_free(set.elements, set.b);
    Json out = to_json(set);
    out["verify_free"] = check.free;
    rep.exactness = Json{{"verdict", "exact"}, {"density_bound", "reported, not asserted"}};
    return out;
}

inline Json run_verify_free(const Json& p, RunReport& rep)
{
    const auto set = p.at("set").get<std::vector<long long>>();
    const auto res = verify_solution_free(set, get_ll(p, "b"));
    rep.exactness = Json{{"verdict", "exact"}};
    Json out{{"free", res.free}};
    out["counterexample"] = res.free ? Json(nullptr) : Json(res.counterexample);
    out["weights"] = res.free ? Json(nullptr) : Json(res.weights);
    return out;
}

inline Json run_family(const Json& p, RunReport& rep)
{
    const auto fam = interval_family(get_ll(p, "m"), get_ll(p, "c"), get_ll(p, "b"));
    Json out = to_json(fam);
    out["measure_identity"] =
        fam.result.measure() * Rational(make_integer(8 * fam.m * (fam.c + 1) * (fam.c + 1))) ==
        Rational(make_integer(static_cast<long long>(fam.lambda.elements.size())));
    rep.exactness = Json{{"verdict", "exact"}};
    return out;
}

inline Json run_counterexample(const Json& p, RunReport& rep)
{
    CounterexampleOptions opt;
    opt.window = box_from_json(p.at("window"));
    opt.grid = get_ll(p, "grid");
    opt.grid_cap = get_ll(p, "grid_cap");
    opt.exact_fallback = p.at("exact_fallback").get<bool>();
    opt.m_cap = get_ll(p, "m_cap");
    const auto r = get_ll(p, "r");
    if (r < 2 || r > 64) {
        throw SchemaError("r", "must be in 2..64");
    }
    const auto ce = build_small_intersection_counterexample(get_polys(p), static_cast<unsigned>(r), opt);
    rep.exactness = Json{{"report", to_string(ce.report.exactness)}, {"certified", ce.certified}};
    if (!ce.report.inconclusive.empty()) {
        rep.exit_code = ExitCode::inconclusive;
    }
    return to_json(ce);
}

inline Json run_modulus(const Json& p, RunReport& rep)
{
    const auto polys = get_polys(p);
    Json out;
    long long m = 0;
    if (p.contains("m")) {
        m = get_ll(p, "m");
    } else {
        const auto verdict = joint_intersectivity(polys, get_ll(p, "bound"));
        out["intersectivity"] = to_json(verdict);
        if (!verdict.witness_modulus) {
            throw Error("the family has common roots modulo every m up to " + std::to_string(get_ll(p, "bound")) +
                        "; no witness modulus, refusing to build a counterexample");
        }
        m = *verdict.witness_modulus;
    }
    const auto ce = modulus_counterexample(polys, m, box_from_json(p.at("window")));
    out["witness_m"] = m;
    out["system"] = Json{{"type", "cyclic"}, {"modulus", ce.system.modulus}, {"subset", ce.system.subset}};
    out["epsilon"] = to_json(ce.epsilon);
    out["report"] = to_json(ce.report);
    out["members"] = points_json(ce.report.members);
    out["certified_empty"] = ce.certified_empty;
    rep.exactness = Json{{"report", to_string(ce.report.exactness)}};
    return out;
}

inline Json run_return_set(const Json& p, RunReport& rep)
{
    const auto polys = get_polys(p);
    const Rational eps = rational_from_json(p.at("epsilon"));
    const Box window = box_from_json(p.at("window"));
    const std::string type = p.at("type").get<std::string>();
    ReturnSetReport report;
    Json system;
    if (type == "cyclic") {
        if (!p.contains("modulus") || !p.contains("subset")) {
            throw SchemaError(p.contains("modulus") ? "subset" : "modulus", "required for type cyclic");
        }
        const auto sub = p.at("subset").get<std::vector<long long>>();
        const FiniteCyclicSystem sys(get_ll(p, "modulus"), std::set<long long>(sub.begin(), sub.end()));
        report = return_set_window(sys, polys, eps, window);
        system = Json{{"type", "cyclic"}, {"modulus", sys.modulus}, {"subset", sys.subset}};
    } else if (type == "skew") {
        if (!p.contains("base_set") || !p.contains("exponents")) {
            throw SchemaError(p.contains("base_set") ? "exponents" : "base_set", "required for type skew");
        }
        SkewSystem sys;
        try {
            sys.base_set = interval_set_from_json(p.at("base_set"));
        } catch (const Error& e) {
            throw SchemaError("base_set", e.what());
        }
        for (const auto& a : p.at("exponents")) {
            sys.exponents.push_back(integer_from_json(a));
        }
        ReturnSetOptions opt;
        opt.grid = get_ll(p, "grid");
        opt.grid_cap = get_ll(p, "grid_cap");
        opt.exact_fallback = p.at("exact_fallback").get<bool>();
        report = return_set_window(sys, polys, eps, window, opt);
        system = Json{{"type", "skew"}, {"base_set", to_json(sys.base_set)}, {"exponents", to_json(sys.exponents)}};
    } else {
        throw SchemaError("type", "must be cyclic or skew");
    }
    if (!report.inconclusive.empty()) {
        rep.exit_code = ExitCode::inconclusive;
    }
    rep.exactness = Json{{"report", to_string(report.exactness)}};
    return Json{{"system", system},
                {"report", to_json(report)},
                {"syndeticity", to_json(syndeticity_report(report))}};
}

inline Json run_diophantine(const Json& p, RunReport& rep)
{
    const auto polys = get_polys(p);
    std::vector<Rational> alphas;
    for (const auto& a : p.at("alphas")) {
        alphas.push_back(rational_from_json(a));
    }
    const Rational eps = rational_from_json(p.at("epsilon"));
    const auto members = diophantine_set(polys, alphas, eps, box_from_json(p.at("window")));
    const auto shift = find_diophantine_shift(polys, alphas, eps, get_ll(p, "search_box"));
    rep.exactness = Json{{"verdict", "exact"}, {"shift_search", "bounded"}};
    Json out{{"members", points_json(members)}};
    out["shift"] = shift ? point_json(*shift) : Json(nullptr);
    return out;
}

inline VipSample sample_from(const Json& p)
{
    const auto polys = get_polys(p);
    const auto gens = get_generators(p, polys.front().num_vars());
    if (gens.size() > kMaxVipR) {
        throw SchemaError("generators", "at most " + std::to_string(kMaxVipR) + " generators");
    }
    return polynomial_sample(polys, gens);
}

inline Json run_vip_check(const Json& p, RunReport& rep)
{
    const auto phi = sample_from(p);
    const long long t = get_ll(p, "t");
    if (t < 0) {
        throw SchemaError("t", "must be non-negative");
    }
    rep.exactness = Json{{"verdict", "exhaustive"}};
    return Json{{"r", phi.r},
                {"dim", phi.dim},
                {"t", t},
                {"anchored", phi.anchored()},
                {"passes", vip_degree_check(phi, static_cast<unsigned>(t))}};
}

inline Json run_eta(const Json& p, RunReport& rep)
{
    const auto phi = sample_from(p);
    const long long D = get_ll(p, "D");
    if (D < 1 || D > 16) {
        throw SchemaError("D", "must be in 1..16");
    }
    const auto dec = eta_decompose(phi, static_cast<unsigned>(D));
    bool p1 = true;
    for (FinSubset a = 0;; ++a) {
        if (eta_set_function(dec, subset_power(a, dec.D)) != phi(a)) {
            p1 = false;
        }
        if (a == phi.full()) {
            break;
        }
    }
    Json values = Json::array();
    for (const auto& s : p.at("sets")) {
        if (!s.is_array()) {
            throw SchemaError("sets", "each set must be a list of tuples");
        }
        GridSet A;
        for (const auto& t : s) {
            A.insert(grid_tuple(t, dec.D, dec.r, "sets"));
        }
        values.push_back(to_json(eta_set_function(dec, A)));
    }
    rep.exactness = Json{{"verdict", "exact"}, {"reconstruction", "verified on all subsets"}};
    return Json{{"decomposition", to_json(dec)}, {"p1_holds", p1}, {"set_values", values}};
}

inline Json run_ipr_witness(const Json& p, RunReport& rep)
{
    const std::string target = p.at("target").get<std::string>();
    const auto pred = target_predicate(target);
    const Box window = box_from_json(p.at("window"));
    const long long r = get_ll(p, "r");
    if (r < 1 || r > static_cast<long long>(kIpWitnessMaxR)) {
        throw SchemaError("r", "must be in 1.." + std::to_string(kIpWitnessMaxR));
    }
    const auto w = ip_r_star_witness_search(pred, window, static_cast<unsigned>(r), get_ll(p, "box"));
    Json out{{"avoided_set_id", target}};
    if (w) {
        out["witness"] = to_json(*w);
        out["validated"] = validate_ip_witness(*w, pred, window);
        out["verdict"] = "not IP_r*";
        rep.exactness = Json{{"verdict", "certificate"}};
    } else {
        out["witness"] = nullptr;
        out["verdict"] = "inconclusive: no witness in box";
        rep.exactness = Json{{"verdict", "inconclusive"}};
        rep.exit_code = ExitCode::inconclusive;
    }
    return out;
}

inline Json run_dphj(const Json& p, RunReport& rep)
{
    const long long q = get_ll(p, "q");
    const long long D = get_ll(p, "D");
    const long long N = get_ll(p, "N");
    if (q < 1 || D < 1 || N < 1 || q > kDphjMaxBits || D > kDphjMaxBits || N > kDphjMaxBits) {
        throw SchemaError("q", "q, D and N must be in 1.." + std::to_string(kDphjMaxBits));
    }
    DphjInstance inst{static_cast<unsigned>(q), static_cast<unsigned>(D), static_cast<unsigned>(N), {}};
    inst.validate();
    const Json& S = p.at("S");
    if (S.is_string() && S.get<std::string>() == "all") {
        inst.S = DphjInstance::everything(inst.q, inst.D, inst.N);
    } else if (S.is_array()) {
        for (const auto& tuple : S) {
            if (!tuple.is_array() || tuple.size() != inst.q) {
                throw SchemaError("S", "tuple " + tuple.dump() + " does not have q entries");
            }
            DphjTuple t;
            for (const auto& subset : tuple) {
                if (!subset.is_array()) {
                    throw SchemaError("S", "each tuple entry is a list of cells");
                }
                GridMask mask = 0;
                for (const auto& cell : subset) {
                    const auto c = grid_tuple(cell, inst.D, inst.N, "S");
                    unsigned index = 0;
                    for (unsigned k = inst.D; k > 0; --k) {
                        index = index * inst.N + (c[k - 1] - 1);
                    }
                    mask |= GridMask{1} << index;
                }
                t.push_back(mask);
            }
            inst.S.insert(std::move(t));
        }
    } else {
        throw SchemaError("S", "must be \"all\" or a list of tuples");
    }
    const auto w = dphj_search(inst);
    rep.exactness = Json{{"verdict", "exhaustive"}};
    Json out{{"S_size", inst.S.size()}};
    if (!w) {
        out["witness"] = nullptr;
        return out;
    }
    auto cells = [&](GridMask m) {
        Json a = Json::array();
        for (unsigned idx = 0; idx < inst.cells(); ++idx) {
            if ((m >> idx) & 1U) {
                Json cell = Json::array();
                unsigned rest = idx;
                for (unsigned k = 0; k < inst.D; ++k) {
                    cell.push_back(rest % inst.N + 1);
                    rest /= inst.N;
                }
                a.push_back(inst.D == 1 ? cell[0] : cell);
            }
        }
        return a;
    };
    Json alpha = Json::array();
    for (auto m : w->alpha) {
        alpha.push_back(cells(m));
    }
    out["witness"] = Json{{"gamma", subset_json(w->gamma)}, {"alpha", alpha}};
    out["validated"] = dphj_validate(inst, *w);
    return out;
}

inline Json run_constants(const Json& p, RunReport& rep)
{
    const auto res = conditional_constants(get_ll(p, "ell"), get_ll(p, "D"), rational_from_json(p.at("delta")),
                                           integer_from_json(p.at("C")));
    rep.exactness = Json{{"verdict", "exact"}, {"degenerate", res.degenerate}};
    Json out{{"r", to_json(res.r)}, {"exponent", to_json(res.exponent)}, {"degenerate", res.degenerate}};
    out["c"] = res.c ? to_json(*res.c) : Json(nullptr);
    return out;
}

} // namespace detail

/// Validates and dispatches one job.
inline RunReport run(const JobConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.command = config.command;
    rep.params = validate_params(config.command, config.params);
    rep.inputs_digest = fnv1a64(Json{{"command", rep.command}, {"params", rep.params}}.dump());

    using Handler = Json (*)(const Json&, RunReport&);
    static const std::vector<std::pair<std::string, Handler>> handlers = {
        {"behrend", detail::run_behrend},         {"verify-free", detail::run_verify_free},
        {"family", detail::run_family},           {"counterexample", detail::run_counterexample},
        {"modulus", detail::run_modulus},         {"return-set", detail::run_return_set},
        {"diophantine", detail::run_diophantine}, {"vip-check", detail::run_vip_check},
        {"eta", detail::run_eta},                 {"ipr-witness", detail::run_ipr_witness},
        {"dphj", detail::run_dphj},               {"constants", detail::run_constants},
    };
    for (const auto& [name, fn] : handlers) {
        if (name == config.command) {
            try {
                rep.results = fn(rep.params, rep);
            } catch (const SchemaError&) {
                throw;
            } catch (const Error& e) {
                throw Error(config.command + ": " + e.what());
            }
            break;
        }
    }
    if (config.timing) {
        rep.timing_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return rep;
}

namespace detail {

inline std::string csv_point(const Json& n)
{
    if (n.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < n.size(); ++i) {
            s += (i ? " " : "") + n[i].dump();
        }
        return s;
    }
    return n.dump();
}

inline std::string csv_decisions(const Json& report)
{
    std::string out = "n,decision,lo,hi,grid\n";
    for (const auto& d : report.at("decisions")) {
        out += csv_point(d.at("n")) + "," + d.at("decision").get<std::string>() + "," +
               d.at("lo").get<std::string>() + "," + d.at("hi").get<std::string>() + "," + d.at("grid").dump() + "\n";
    }
    return out;
}

inline std::string emit_csv(const RunReport& rep)
{
    const Json& r = rep.results;
    if (rep.command == "behrend") {
        std::string out = "element\n";
        for (const auto& e : r.at("elements")) {
            out += e.dump() + "\n";
        }
        return out;
    }
    if (rep.command == "family") {
        std::string out = "j,lo,hi\n";
        const auto& js = r.at("lambda").at("elements");
        const auto& iv = r.at("intervals");
        for (std::size_t i = 0; i < js.size(); ++i) {
            out += js[i].dump() + "," + iv[i][0].get<std::string>() + "," + iv[i][1].get<std::string>() + "\n";
        }
        return out;
    }
    if (rep.command == "return-set" || rep.command == "modulus") {
        return csv_decisions(r.at("report"));
    }
    if (rep.command == "diophantine") {
        std::string out = "n\n";
        for (const auto& n : r.at("members")) {
            out += csv_point(n) + "\n";
        }
        return out;
    }
    if (rep.command == "constants") {
        std::string out = "key,value\n";
        for (const auto& [k, v] : r.items()) {
            out += k + "," + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
        }
        return out;
    }
    throw Error("format csv is unsupported for command '" + rep.command + "'");
}

inline std::string emit_text(const RunReport& rep)
{
    constexpr std::size_t kMaxLines = 40;
    constexpr std::size_t kMaxWidth = 100;
    std::vector<std::string> lines;
    lines.push_back(rep.command + " (" + rep.version + ")");
    lines.push_back("inputs digest: " + rep.inputs_digest);
    lines.push_back("exactness: " + rep.exactness.dump());
    auto add = [&](const std::string& key, const Json& v) {
        std::string s = v.is_string() ? v.get<std::string>() : v.dump();
        if (s.size() > kMaxWidth) {
            s = s.substr(0, kMaxWidth - 3) + "...";
        }
        lines.push_back(key + ": " + s);
    };
    for (const auto& [k, v] : rep.results.items()) {
        if (v.is_object()) {
            for (const auto& [k2, v2] : v.items()) {
                if (k2 != "decisions") {
                    add(k + "." + k2, v2);
                }
            }
        } else {
            add(k, v);
        }
    }
    if (lines.size() > kMaxLines) {
        const std::size_t dropped = lines.size() - (kMaxLines - 1);
        lines.resize(kMaxLines - 1);
        lines.push_back("... " + std::to_string(dropped) + " more lines; use --format json");
    }
    std::string out;
    for (const auto& l : lines) {
        out += l + "\n";
    }
    return out;
}

} // namespace detail

/// Canonical serialization. JSON keys are sorted; CSV columns are fixed per command.
inline std::string emit(const RunReport& rep, const std::string& format)
{
    if (format == "json") {
        Json j = rep.payload();
        if (rep.timing_ms) {
            j["timing_ms"] = *rep.timing_ms;
        }
        return j.dump(2) + "\n";
    }
    if (format == "csv") {
        return detail::emit_csv(rep);
    }
    if (format == "text") {
        return detail::emit_text(rep);
    }
    throw Error("unknown format '" + format + "' (json, csv or text)");
}

} // namespace retsets::cli

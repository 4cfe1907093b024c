// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails. Runtime budgets are part of each criterion.

#include "retsets/cli.hpp"

#include "oracles/cyclotomic.hpp"
#include "oracles/polygon_area.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace retsets;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

Rational q(long long p, long long d = 1) { return make_rational(p, d); }

IntVec iv(std::initializer_list<long long> xs)
{
    IntVec v;
    for (long long x : xs) {
        v.push_back(make_integer(x));
    }
    return v;
}

Outcome behrend_soundness()
{
    Outcome o;
    int sets = 0;
    for (long long b : {2, 3}) {
        for (long long N = 2; N <= 500; ++N) {
            if (!behrend_params(b, N)) {
                continue;
            }
            const auto s = behrend_lambda(b, N);
            const auto r = verify_solution_free(s.elements, b);
            o.require(r.free, "b=" + std::to_string(b) + " N=" + std::to_string(N) + " has a solution");
            ++sets;
        }
    }
    o.require(sets > 0, "no constructible N");
    if (o.ok) {
        o.detail = std::to_string(sets) + " sets checked";
    }
    return o;
}

Outcome level_partition()
{
    Outcome o;
    for (long long d = 1; d <= 5; ++d) {
        for (unsigned n = 1; n <= 6; ++n) {
            const auto sizes = behrend_level_sizes(d, n);
            Integer total = 0;
            for (std::size_t k = 1; k < sizes.size(); ++k) {
                total += make_integer(sizes[k]);
            }
            o.require(total == pow_int(make_integer(d), n) - 1,
                      "d=" + std::to_string(d) + " n=" + std::to_string(n) + " sum " + total.get_str());
        }
    }
    return o;
}

Outcome structured_solutions()
{
    Outcome o;
    long long triples = 0;
    for (long long m : {16, 64, 300, 1000, 5000}) {
        const auto fam = interval_family(m, 2, 2);
        if (fam.lambda.elements.size() < 2) {
            continue;
        }
        const auto rep = verify_structured_solutions(fam, 10000, static_cast<std::uint64_t>(m));
        o.require(rep.exhaustive_violations == 0, "integer reduction violated at m=" + std::to_string(m));
        o.require(rep.sampled_triples == 10000, "only " + std::to_string(rep.sampled_triples) + " triples sampled");
        o.require(rep.sample_violations == 0, "sampled triple split across intervals at m=" + std::to_string(m));
        triples += rep.sampled_triples;
    }
    if (o.ok) {
        o.detail = std::to_string(triples) + " random triples, 0 violations";
    }
    return o;
}

Outcome theorem_window()
{
    Outcome o;
    CounterexampleOptions opt;
    opt.window = Box::interval(-30, 30);
    opt.grid = 1024;
    opt.grid_cap = 1LL << 14;
    opt.exact_fallback = false;
    const auto ce = build_small_intersection_counterexample(parse_family({"n^2", "2*n^2"}), 2, opt);
    o.require(ce.report.inconclusive.empty(), "inconclusive points remain");
    o.require(ce.report.members == std::vector<Point>{{0}}, "members differ from {0}");
    const Integer K = make_integer(8 * ce.m * (ce.c + 1) * (ce.c + 1));
    const Rational bound = make_rational(make_integer(static_cast<long long>(ce.family.lambda.elements.size())), K * K);
    o.require(ce.bound == bound, "bound is not |Λ_m|/K^2");
    o.require(bound <= ce.threshold, "bound exceeds threshold");
    o.require(ce.threshold == pow_rat(ce.measure, 2) / 2, "threshold is not μ^2/2");
    for (const auto& d : ce.report.decisions) {
        if (d.n[0] != 0) {
            o.require(d.hi <= bound, "hi above bound at n=" + std::to_string(d.n[0]));
            o.require(d.method != "exact-fallback", "exact fallback used");
        }
    }
    // zero set of n^2, 2n^2 in the window
    o.require(ce.expected == std::vector<Point>{{0}}, "common zero set is not {0}");
    if (o.ok) {
        o.detail = "m=" + std::to_string(ce.m) + " threshold " + to_string(ce.threshold) + " bound " + to_string(bound);
    }
    return o;
}

Outcome modulus_counterexamples()
{
    Outcome o;
    const auto a = modulus_counterexample(parse_family({"2*n+1"}), 2, Box::interval(-50, 50));
    o.require(a.epsilon == q(1, 8), "epsilon is not 1/8");
    o.require(a.report.members.empty() && a.report.exactness == Exactness::exact, "parity return set not empty");
    const auto fam = parse_family({"n^2-n", "3*n+3"});
    const auto v = joint_intersectivity(fam, 10);
    o.require(v.witness_modulus && *v.witness_modulus == 4, "witness modulus is not 4");
    if (v.witness_modulus) {
        const auto b = modulus_counterexample(fam, *v.witness_modulus, Box::interval(-50, 50));
        o.require(b.report.members.empty() && b.report.exactness == Exactness::exact, "M=4 return set not empty");
    }
    return o;
}

Outcome enclosure_convergence()
{
    Outcome o;
    const auto B = IntervalSet::from_intervals({{q(0), q(1, 2)}});
    const Rational truth = oracle::skew_correlation_area({{q(0), q(1, 2)}}, {1, 2});
    Rational prev_bound = -1;
    for (long long N = 16; N <= 4096; N *= 2) {
        const auto e = correlation_enclosure(B, iv({1, 2}), N);
        const Rational width_bound = e.lipschitz / Rational(make_integer(N));
        o.require(e.lo <= truth && truth <= e.hi, "oracle value outside enclosure at N=" + std::to_string(N));
        o.require(e.hi - e.lo <= width_bound, "width above bound at N=" + std::to_string(N));
        if (prev_bound >= 0) {
            o.require(width_bound <= prev_bound / 2, "width bound did not halve at N=" + std::to_string(N));
        }
        prev_bound = width_bound;
    }
    if (o.ok) {
        o.detail = "oracle value " + to_string(truth);
    }
    return o;
}

IntPoly random_poly(std::mt19937_64& rng, unsigned d, int& degree)
{
    IntPoly p(d);
    while (p.is_zero()) {
        for (int i = 0; i < 4; ++i) {
            Exponents e(d, 0);
            unsigned total = 0;
            for (unsigned k = 0; k < d; ++k) {
                e[k] = std::uniform_int_distribution<unsigned>(0, 3)(rng);
                total += e[k];
            }
            if (total == 0 || total > 3) {
                continue;
            }
            p.add_term(e, make_integer(std::uniform_int_distribution<int>(-4, 4)(rng)));
        }
    }
    degree = p.total_degree();
    return p;
}

Outcome vip_identities()
{
    Outcome o;
    std::mt19937_64 rng(2024);
    const unsigned r = 6;
    for (int i = 0; i < 50; ++i) {
        const unsigned d = 1 + static_cast<unsigned>(i % 2);
        int deg = 0;
        const IntPoly p = random_poly(rng, d, deg);
        std::vector<IntVec> gens(r);
        for (auto& g : gens) {
            for (unsigned k = 0; k < d; ++k) {
                g.push_back(make_integer(std::uniform_int_distribution<long long>(-9, 9)(rng)));
            }
        }
        const auto phi = polynomial_sample({p}, gens);
        const std::string tag = p.to_string();
        o.require(vip_degree_check(phi, static_cast<unsigned>(deg)), "degree check fails for " + tag);
        const auto dec = eta_decompose(phi, static_cast<unsigned>(deg));
        for (FinSubset a = 0; a <= phi.full(); ++a) {
            o.require(dec.reconstruct(a) == phi(a), "reconstruction fails for " + tag);
            o.require(eta_set_function(dec, subset_power(a, dec.D)) == phi(a), "P.1 fails for " + tag);
        }
        for (int j = 0; j < 4; ++j) {
            GridSet A;
            GridSet B;
            for (int k = 0; k < 10; ++k) {
                std::vector<unsigned> cell(dec.D);
                for (auto& c : cell) {
                    c = std::uniform_int_distribution<unsigned>(1, r)(rng);
                }
                (std::bernoulli_distribution(0.5)(rng) ? A : B).insert(cell);
            }
            for (const auto& c : A) {
                B.erase(c);
            }
            GridSet U = A;
            U.insert(B.begin(), B.end());
            IntVec sum = eta_set_function(dec, A);
            add_into(sum, eta_set_function(dec, B));
            o.require(eta_set_function(dec, U) == sum, "P.2 fails for " + tag);
        }
    }
    if (o.ok) {
        o.detail = "50 samples, 200 disjoint pairs";
    }
    return o;
}

Outcome ipr_certificate()
{
    Outcome o;
    const auto odd = [](const Point& p) { return p[0] % 2 != 0; };
    const Box window = Box::interval(-100, 100);
    const auto w = ip_r_star_witness_search(odd, window, 3, 10);
    o.require(w.has_value(), "no witness");
    if (w) {
        for (const auto& g : w->generators) {
            o.require(g[0] % 2 == 0, "odd generator");
        }
        o.require(w->subset_sums.size() == 7, "not 7 subset sums");
        for (const auto& s : w->subset_sums) {
            o.require(s[0] % 2 == 0, "odd subset sum");
        }
        o.require(validate_ip_witness(*w, odd, window), "re-validation failed");
        o.detail = "generators " + points_json(w->generators).dump();
    }
    return o;
}

Outcome fourier_table()
{
    Outcome o;
    for (long long M = 1; M <= 20; ++M) {
        for (long long a = -100; a <= 100; ++a) {
            const Rational closed = lambda_fourier(M, a);
            o.require(closed == oracle::root_of_unity_average(M, a),
                      "M=" + std::to_string(M) + " a=" + std::to_string(a));
            o.require(closed == (a % M == 0 ? 1 : 0), "closed form");
        }
    }
    return o;
}

Outcome dphj_examples()
{
    Outcome o;
    const DphjInstance one{1, 1, 1, DphjInstance::everything(1, 1, 1)};
    auto w = dphj_search(one);
    o.require(w && w->gamma == 1 && w->alpha == DphjTuple{0} && dphj_validate(one, *w), "example 1");

    const DphjInstance empty_only{1, 1, 1, {DphjTuple{0}}};
    o.require(!dphj_search(empty_only), "example 2");

    const DphjInstance full{2, 1, 2, DphjInstance::everything(2, 1, 2)};
    w = dphj_search(full);
    o.require(w && w->gamma == 1 && w->alpha == (DphjTuple{0, 0}) && dphj_validate(full, *w), "example 3");
    if (w) {
        // (i) and (ii) by direct membership
        const GridMask g = full.power(w->gamma);
        for (auto a : w->alpha) {
            o.require((a & g) == 0, "condition (i)");
        }
        o.require(full.S.count(w->alpha) == 1, "condition (ii), base tuple");
        for (unsigned j = 0; j < full.q; ++j) {
            DphjTuple t = w->alpha;
            t[j] |= g;
            o.require(full.S.count(t) == 1, "condition (ii), shifted tuple");
        }
    }
    return o;
}

int run_tool(const std::string& args)
{
    const std::string cmd = std::string(RETSETS_TOOL) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism()
{
    Outcome o;
    const std::vector<std::string> jobs = {"behrend",         "family",         "counterexample_n2_2n2",
                                           "modulus_parity",  "modulus_search", "return_set_skew",
                                           "ipr_witness_odd", "dphj_full",      "vip_check",
                                           "eta_square",      "constants",      "diophantine"};
    const auto dir = std::filesystem::temp_directory_path() / "retsets_acceptance";
    std::filesystem::create_directories(dir);
    for (const auto& name : jobs) {
        const std::string cfg = std::string(RETSETS_JOBS) + "/" + name + ".json";
        std::string first;
        for (int pass = 0; pass < 2; ++pass) {
            const auto out = dir / (name + "_" + std::to_string(pass) + ".json");
            const int rc = run_tool("--config " + cfg + " --out " + out.string());
            o.require(rc == 0, name + " exited with " + std::to_string(rc));
            const std::string bytes = slurp(out);
            o.require(!bytes.empty(), name + " produced no output");
            if (pass == 0) {
                first = bytes;
            } else {
                o.require(bytes == first, name + " differs between runs");
            }
        }
    }
    if (o.ok) {
        o.detail = std::to_string(jobs.size()) + " jobs, byte-identical";
    }
    return o;
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        std::string name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria = {
        {1, "Behrend soundness", 10, behrend_soundness},
        {2, "level partition identity", 1, level_partition},
        {3, "structured solutions of interval families", 5, structured_solutions},
        {4, "window certification for (n^2, 2n^2)", 60, theorem_window},
        {5, "modulus counterexamples", 1, modulus_counterexamples},
        {6, "enclosure convergence and oracle containment", 10, enclosure_convergence},
        {7, "VIP identities", 5, vip_identities},
        {8, "IP_r* refutation certificate", 1, ipr_certificate},
        {9, "lambda_M Fourier table", 1, fourier_table},
        {10, "DPHJ definitional search", 1, dphj_examples},
        {11, "CLI determinism", 120, cli_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.ok && secs > c.budget_s) {
            o.ok = false;
            o.detail = "over the " + std::to_string(static_cast<int>(c.budget_s)) + " s budget";
        }
        failures += o.ok ? 0 : 1;
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.2fs", secs);
        std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " [" << timing << "]"
                  << (o.detail.empty() ? "" : " - " + o.detail) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

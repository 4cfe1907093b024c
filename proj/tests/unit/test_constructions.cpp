#include "retsets/constructions.hpp"

#include "oracles/cyclotomic.hpp"

#include <gtest/gtest.h>

#include <random>
#include <unordered_set>

using namespace retsets;

namespace {

Rational q(long long p, long long d = 1) { return make_rational(p, d); }

std::vector<IntPoly> F(std::vector<std::string> s) { return parse_family(s); }

// Hand-listed equations of weight at most 3 with not-all-equal solutions
// checked by hash lookup of the forced last variable.
bool free_oracle(const std::vector<long long>& set, long long b)
{
    const std::unordered_set<long long> in(set.begin(), set.end());
    for (long long x : set) {
        for (long long y : set) {
            if (x == y) {
                continue;
            }
            // x + y = 2z
            if ((x + y) % 2 == 0 && in.count((x + y) / 2)) {
                return false;
            }
            if (b >= 3) {
                // x + 2y = 3z
                if ((x + 2 * y) % 3 == 0 && in.count((x + 2 * y) / 3)) {
                    return false;
                }
                for (long long z : set) {
                    if ((x + y + z) % 3 == 0 && in.count((x + y + z) / 3)) {
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

std::vector<long long> digits_of(long long v, long long base)
{
    std::vector<long long> out;
    while (v > 0) {
        out.push_back(v % base);
        v /= base;
    }
    return out;
}

} // namespace

TEST(Behrend, LevelSubConstruction)
{
    EXPECT_EQ(behrend_level(2, 2, 2, 1), (std::vector<long long>{1, 3}));
    EXPECT_EQ(behrend_level(2, 2, 2, 2), (std::vector<long long>{4}));
}

TEST(Behrend, LevelSizesPartition)
{
    for (long long d = 2; d <= 5; ++d) {
        for (unsigned n = 1; n <= 6; ++n) {
            const auto sizes = behrend_level_sizes(d, n);
            long long total = 0;
            for (std::size_t k = 1; k < sizes.size(); ++k) {
                total += sizes[k];
            }
            EXPECT_EQ(make_integer(total), pow_int(make_integer(d), n) - 1);
            // enumeration oracle
            std::vector<long long> count(sizes.size(), 0);
            std::vector<long long> g(n, 0);
            while (true) {
                long long norm = 0;
                for (auto x : g) {
                    norm += x * x;
                }
                ++count[norm];
                unsigned i = 0;
                while (i < n && ++g[i] == d) {
                    g[i++] = 0;
                }
                if (i == n) {
                    break;
                }
            }
            count[0] = sizes[0];
            EXPECT_EQ(count, sizes) << d << " " << n;
        }
    }
}

TEST(Behrend, ParametersAndDigits)
{
    for (long long b : {2, 3}) {
        for (long long N = behrend_min_admissible(b); N <= 500; N = behrend_next_transition(b, N)) {
            if (!behrend_params(b, N)) {
                EXPECT_THROW(behrend_lambda(b, N), Error);
                continue;
            }
            const auto s = behrend_lambda(b, N);
            EXPECT_GE(s.d, 2);
            EXPECT_EQ(s.base, b * s.d - 1);
            for (long long x : s.elements) {
                EXPECT_GE(x, 1);
                EXPECT_LE(x, N);
                long long norm = 0;
                for (long long g : digits_of(x, s.base)) {
                    EXPECT_LT(g, s.d);
                    norm += g * g;
                }
                EXPECT_EQ(norm, s.k);
            }
            EXPECT_TRUE(std::is_sorted(s.elements.begin(), s.elements.end()));
        }
    }
    EXPECT_THROW(behrend_lambda(2, behrend_min_admissible(2) - 1), Error);
}

TEST(Behrend, SolutionFreeAgainstOracle)
{
    for (long long b : {2, 3}) {
        for (long long N = 2; N <= 500; ++N) {
            if (!behrend_params(b, N)) {
                continue;
            }
            const auto s = behrend_lambda(b, N);
            EXPECT_TRUE(verify_solution_free(s.elements, b).free) << b << " " << N;
            EXPECT_TRUE(free_oracle(s.elements, b)) << b << " " << N;
        }
    }
}

TEST(VerifyFree, Examples)
{
    EXPECT_TRUE(verify_solution_free({1, 3}, 2).free);
    const auto r = verify_solution_free({1, 2, 3}, 2);
    ASSERT_FALSE(r.free);
    EXPECT_EQ(r.counterexample, (std::vector<long long>{1, 3, 2}));
    EXPECT_EQ(r.weights, (std::vector<long long>{1, 1}));
    EXPECT_TRUE(verify_solution_free({5}, 3).free);
    // 1 + 2*4 = 3*3 has weight 3 and is invisible at b = 2
    EXPECT_TRUE(verify_solution_free({1, 3, 4}, 2).free);
    EXPECT_FALSE(verify_solution_free({1, 3, 4}, 3).free);
}

TEST(VerifyFree, AgreesWithOracleOnRandomSets)
{
    std::mt19937_64 rng(41);
    for (int i = 0; i < 300; ++i) {
        std::set<long long> s;
        const int size = std::uniform_int_distribution<int>(1, 7)(rng);
        while (static_cast<int>(s.size()) < size) {
            s.insert(std::uniform_int_distribution<long long>(1, 60)(rng));
        }
        const std::vector<long long> v(s.begin(), s.end());
        for (long long b : {2, 3}) {
            EXPECT_EQ(verify_solution_free(v, b).free, free_oracle(v, b));
        }
    }
}

TEST(IntervalFamily, MeasureAndDisjointness)
{
    for (long long m : {16, 64, 300, 1000}) {
        const auto f = interval_family(m, 2, 2);
        const long long L = static_cast<long long>(f.lambda.elements.size());
        EXPECT_EQ(f.result.measure() * Rational(make_integer(8 * m * 9)), q(L));
        EXPECT_EQ(f.result.size(), static_cast<std::size_t>(L));
        EXPECT_GT(f.spacing(), f.length());
        for (std::size_t i = 0; i < f.result.size(); ++i) {
            EXPECT_EQ(f.which(f.result.intervals()[i].lo), f.lambda.elements[i]);
        }
    }
}

TEST(IntervalFamily, StructuredSolutions)
{
    const auto f = interval_family(200, 2, 2);
    ASSERT_GE(f.lambda.elements.size(), 2U);
    const auto rep = verify_structured_solutions(f, 2000, 7);
    EXPECT_GT(rep.exhaustive_checked, 0);
    EXPECT_EQ(rep.exhaustive_violations, 0);
    EXPECT_EQ(rep.sampled_triples, 2000);
    EXPECT_EQ(rep.sample_violations, 0);
}

TEST(Counterexample, SquareAndDoubleSquare)
{
    const auto ce = build_small_intersection_counterexample(F({"n^2", "2n^2"}), 2);
    EXPECT_TRUE(ce.admissible);
    EXPECT_TRUE(ce.certified);
    EXPECT_EQ(ce.report.members, (std::vector<Point>{{0}}));
    EXPECT_TRUE(ce.report.inconclusive.empty());
    EXPECT_TRUE(ce.bound_violations.empty());
    EXPECT_LE(ce.bound, ce.threshold);
    // r = 2: admissibility is |Λ_m| >= 2, first met at the smallest constructible m
    EXPECT_EQ(ce.m, behrend_min_admissible(ce.b));
    EXPECT_EQ(ce.family.lambda.elements.size(), 2U);
    // the value at n = 0 is μ(A), far above μ(A)^2/2
    EXPECT_EQ(ce.report.decisions[30].lo, ce.measure);
}

TEST(Counterexample, DependentTriple)
{
    CounterexampleOptions opt;
    opt.window = Box::interval(-4, 4);
    const auto ce = build_small_intersection_counterexample(F({"n", "2n", "3n"}), 2, opt);
    EXPECT_EQ(ce.dependency, (IntVec{1, 1, -1}));
    EXPECT_EQ(ce.system.exponents.size(), 3U);
    EXPECT_TRUE(ce.certified);
    EXPECT_EQ(ce.report.members, (std::vector<Point>{{0}}));
}

TEST(Counterexample, HigherPowerOutOfReach)
{
    // r = 3 needs |Λ_m|^2 >= 2 * 8m(c+1)^2, which Behrend sizes do not reach below the cap
    EXPECT_THROW(build_small_intersection_counterexample(F({"n", "2n"}), 3, {Box::interval(-5, 5)}), Error);
}

TEST(Counterexample, RejectsIndependentFamilies)
{
    EXPECT_THROW(build_small_intersection_counterexample(F({"n", "n^2"}), 2), Error);
    EXPECT_THROW(build_small_intersection_counterexample(F({"n", "2n"}), 1), Error);
}

TEST(Modulus, Examples)
{
    auto ce = modulus_counterexample(F({"2n+1"}), 2, Box::interval(-20, 20));
    EXPECT_TRUE(ce.report.members.empty());
    EXPECT_TRUE(ce.certified_empty);
    EXPECT_EQ(ce.epsilon, q(1, 8));

    ce = modulus_counterexample(F({"n^2-n", "3n+3"}), 4, Box::interval(-50, 50));
    EXPECT_TRUE(ce.report.members.empty());
    EXPECT_EQ(ce.epsilon, q(1, 128));

    EXPECT_THROW(modulus_counterexample(F({"n"}), 2, Box::interval(-5, 5)), Error);
}

TEST(Diophantine, Examples)
{
    auto s = diophantine_set(F({"n^2"}), {q(1, 3)}, q(1, 4), Box::interval(0, 6));
    EXPECT_EQ(s, (std::vector<Point>{{0}, {3}, {6}}));
    // epsilon 1/2 admits everything except exact half-integers
    s = diophantine_set(F({"n^3 + n"}), {q(2, 7), q(1, 5)}, q(1, 2), Box::interval(-4, 4));
    EXPECT_EQ(s.size(), 9U);
    s = diophantine_set(F({"n"}), {q(1, 2)}, q(1, 2), Box::interval(0, 3));
    EXPECT_EQ(s, (std::vector<Point>{{0}, {2}}));
    s = diophantine_set(F({"n^2", "3n"}), {q(2, 9)}, q(1, 20), Box::interval(-9, 9));
    EXPECT_NE(std::find(s.begin(), s.end(), Point{0}), s.end());
}

TEST(Diophantine, ShiftExamples)
{
    EXPECT_EQ(find_diophantine_shift(F({"n^2", "n"}), {q(1, 5)}, q(1, 10), 5), (Point{0}));
    EXPECT_FALSE(find_diophantine_shift(F({"2n+1"}), {q(1, 2)}, q(1, 2), 10));
    EXPECT_EQ(find_diophantine_shift(F({"n+1"}), {q(1, 3)}, q(1, 4), 10), (Point{-1}));
}

TEST(LambdaFourier, ExamplesAndCyclotomicOracle)
{
    EXPECT_EQ(lambda_fourier(4, 8), 1);
    EXPECT_EQ(lambda_fourier(4, 2), 0);
    EXPECT_EQ(lambda_fourier(1, 17), 1);
    for (long long M = 1; M <= 12; ++M) {
        for (long long a = -30; a <= 30; ++a) {
            EXPECT_EQ(lambda_fourier(M, a), oracle::root_of_unity_average(M, a)) << M << " " << a;
        }
    }
    EXPECT_THROW(lambda_fourier(0, 1), Error);
}

TEST(Dphj, Examples)
{
    DphjInstance one{1, 1, 1, DphjInstance::everything(1, 1, 1)};
    auto w = dphj_search(one);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->gamma, 1U);
    EXPECT_EQ(w->alpha, (DphjTuple{0}));

    DphjInstance empty_only{1, 1, 1, {DphjTuple{0}}};
    EXPECT_FALSE(dphj_search(empty_only));

    DphjInstance all{2, 1, 2, DphjInstance::everything(2, 1, 2)};
    w = dphj_search(all);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->gamma, 1U);
    EXPECT_EQ(w->alpha, (DphjTuple{0, 0}));
    EXPECT_TRUE(dphj_validate(all, *w));

    DphjInstance big{3, 2, 3, {}};
    EXPECT_THROW(dphj_search(big), Error);
}

TEST(Dphj, WitnessesRevalidate)
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 50; ++i) {
        DphjInstance inst{2, 2, 2, {}};
        const auto all = DphjInstance::everything(2, 2, 2);
        for (const auto& t : all) {
            if (std::bernoulli_distribution(0.6)(rng)) {
                inst.S.insert(t);
            }
        }
        const auto w = dphj_search(inst);
        if (w) {
            EXPECT_TRUE(dphj_validate(inst, *w));
            const GridMask g = inst.power(w->gamma);
            for (auto a : w->alpha) {
                EXPECT_EQ(a & g, 0U);
            }
        }
    }
}

TEST(Constants, Examples)
{
    auto c = conditional_constants(1, 1, q(1, 2), 1);
    EXPECT_EQ(c.r, 1);
    ASSERT_TRUE(c.c);
    EXPECT_EQ(*c.c, q(1, 16));

    c = conditional_constants(2, 1, q(3, 4), 2);
    EXPECT_EQ(c.exponent, 7);
    EXPECT_EQ(*c.c, q(3, 4) / 128);

    c = conditional_constants(1, 2, q(0), 5);
    EXPECT_TRUE(c.degenerate);
    EXPECT_EQ(*c.c, 0);

    c = conditional_constants(3, 5, q(1, 2), 40);
    EXPECT_FALSE(c.c);
    EXPECT_EQ(c.exponent, 3 * pow_int(40, 5) + 41);
}

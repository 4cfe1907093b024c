#include "retsets/polyring.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace retsets;

namespace {

IntVec iv(std::initializer_list<long long> xs)
{
    IntVec v;
    for (long long x : xs) {
        v.push_back(make_integer(x));
    }
    return v;
}

IntPoly P(const std::string& s, unsigned d = 0) { return parse_poly(s, d); }

std::vector<IntPoly> F(std::vector<std::string> s) { return parse_family(s); }

// brute force: does the family have a common root mod m
bool has_root_brute(const std::vector<IntPoly>& fam, long long m)
{
    const unsigned d = fam.front().num_vars();
    std::vector<long long> x(d, 0);
    while (true) {
        bool ok = true;
        for (const auto& p : fam) {
            IntVec xv;
            for (auto v : x) {
                xv.push_back(make_integer(v));
            }
            if (mod_floor(p.evaluate(xv), m) != 0) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return true;
        }
        std::size_t i = 0;
        while (i < d && ++x[i] == m) {
            x[i++] = 0;
        }
        if (i == d) {
            return false;
        }
    }
}

} // namespace

TEST(IntPoly, ParseAndPrint)
{
    EXPECT_EQ(P("2n^2 - n + 7").to_string(), "2*x1^2 - x1 + 7");
    EXPECT_EQ(P("x1*x2 + x2").num_vars(), 2U);
    EXPECT_EQ(P("(n+1)^2").to_string(), "x1^2 + 2*x1 + 1");
    EXPECT_EQ(P("3*x1^2*x2 - x2^3").total_degree(), 3);
    EXPECT_TRUE(P("n - n").is_zero());
    EXPECT_THROW(P("n^"), ParseError);
    EXPECT_THROW(P("2*"), ParseError);
    EXPECT_THROW(P("y"), ParseError);
}

TEST(IntPoly, Evaluate)
{
    EXPECT_EQ(P("x^2").evaluate(iv({7})), 49);
    EXPECT_EQ(P("x1*x2 + x2").evaluate(iv({2, 3})), 9);
    EXPECT_EQ(P("5*x1^3*x2 - 4*x2").evaluate(iv({0, 0})), 0);
    EXPECT_THROW(P("x1*x2").evaluate(iv({1})), Error);
}

TEST(IntPoly, ArithmeticMatchesEvaluation)
{
    std::mt19937_64 rng(11);
    const auto a = P("3*x1^2 - x1*x2 + 2", 2);
    const auto b = P("x2^2 - 5*x1 + 1", 2);
    for (int i = 0; i < 50; ++i) {
        const IntVec x = iv({std::uniform_int_distribution<long long>(-20, 20)(rng),
                             std::uniform_int_distribution<long long>(-20, 20)(rng)});
        EXPECT_EQ((a * b).evaluate(x), a.evaluate(x) * b.evaluate(x));
        EXPECT_EQ((a - b).evaluate(x), a.evaluate(x) - b.evaluate(x));
        EXPECT_EQ(a.pow(3).evaluate(x), pow_int(a.evaluate(x), 3));
    }
}

TEST(LinearIndependence, Examples)
{
    auto r = q_linear_independence(F({"n", "2n"}));
    ASSERT_FALSE(r.independent);
    EXPECT_EQ(*r.dependency, iv({2, -1}));

    EXPECT_TRUE(q_linear_independence(F({"n", "n^2"})).independent);

    r = q_linear_independence(F({"n^2+n", "n^2-n", "n"}));
    ASSERT_FALSE(r.independent);
    EXPECT_EQ(*r.dependency, iv({1, -1, -2}));
    EXPECT_THROW(q_linear_independence({}), Error);
}

TEST(LinearIndependence, DependencyVanishesIdentically)
{
    std::mt19937_64 rng(12);
    const std::vector<std::vector<std::string>> families = {
        {"x1^2 + x2", "x2 - x1*x2", "2*x1^2 + x2 + x1*x2"},
        {"n^3 - n", "n", "n^3"},
        {"x1 + x2", "x1 - x2", "x1", "x2^2"},
    };
    for (const auto& texts : families) {
        const auto fam = parse_family(texts);
        const auto r = q_linear_independence(fam);
        ASSERT_FALSE(r.independent);
        const IntVec& a = *r.dependency;
        Integer g = 0;
        for (const auto& x : a) {
            g = gcd_of(g, x);
        }
        EXPECT_EQ(g, 1);
        IntPoly sum(fam.front().num_vars());
        for (std::size_t j = 0; j < fam.size(); ++j) {
            sum = sum + a[j] * fam[j];
        }
        EXPECT_TRUE(sum.is_zero());
        for (int t = 0; t < 100; ++t) {
            IntVec x;
            for (unsigned k = 0; k < fam.front().num_vars(); ++k) {
                x.push_back(make_integer(std::uniform_int_distribution<long long>(-1000, 1000)(rng)));
            }
            Integer v = 0;
            for (std::size_t j = 0; j < fam.size(); ++j) {
                v += a[j] * fam[j].evaluate(x);
            }
            EXPECT_EQ(v, 0);
        }
    }
}

TEST(EssentiallyDistinct, Examples)
{
    EXPECT_FALSE(essentially_distinct(F({"n", "n+1"})));
    EXPECT_TRUE(essentially_distinct(F({"n", "2n"})));
    EXPECT_FALSE(essentially_distinct(F({"n^2", "n^2"})));
}

TEST(Intersectivity, Examples)
{
    auto v = joint_intersectivity(F({"n", "n^3"}), 30);
    EXPECT_TRUE(v.bounded());
    EXPECT_EQ(v.jointly_intersective_up_to, 30);

    v = joint_intersectivity(F({"2n+1"}), 10);
    ASSERT_TRUE(v.witness_modulus);
    EXPECT_EQ(*v.witness_modulus, 2);

    v = joint_intersectivity(F({"n^2-n", "3n+3"}), 10);
    ASSERT_TRUE(v.witness_modulus);
    EXPECT_EQ(*v.witness_modulus, 4);
    EXPECT_THROW(joint_intersectivity(F({"n"}), 1), Error);
}

TEST(Intersectivity, ZeroConstantTermsHaveRootZero)
{
    for (const auto& texts : std::vector<std::vector<std::string>>{{"n^2", "2n"}, {"x1*x2", "x1 - 3*x2"}}) {
        const auto v = joint_intersectivity(parse_family(texts), 25);
        EXPECT_TRUE(v.bounded());
        for (const auto& [m, root] : v.witness_roots) {
            EXPECT_TRUE(std::all_of(root.begin(), root.end(), [](long long x) { return x == 0; })) << m;
        }
    }
}

TEST(Intersectivity, CrtSoundness)
{
    const std::vector<std::vector<std::string>> families = {
        {"n^2-n", "3n+3"}, {"n^2+1"}, {"n^2-2", "n^3-n"}, {"2n+1", "n^2+n+1"}, {"x1^2 + x2^2 + 1"}};
    for (const auto& texts : families) {
        const auto fam = parse_family(texts);
        for (long long m = 2; m <= 60; ++m) {
            bool all_parts = true;
            long long rest = m;
            for (long long p = 2; p <= rest; ++p) {
                if (rest % p == 0) {
                    long long pk = 1;
                    while (rest % p == 0) {
                        rest /= p;
                        pk *= p;
                    }
                    all_parts = all_parts && common_root_mod(fam, pk).has_value();
                }
            }
            EXPECT_EQ(common_root_mod(fam, m).has_value(), all_parts) << texts[0] << " m=" << m;
            EXPECT_EQ(common_root_mod(fam, m).has_value(), has_root_brute(fam, m)) << texts[0] << " m=" << m;
        }
    }
}

TEST(Lines, RestrictExamples)
{
    EXPECT_EQ(restrict_to_line(P("x1*x2"), iv({1, 1})).to_string(), "x1^2");
    EXPECT_TRUE(restrict_to_line(P("x1 - x2"), iv({1, 1})).is_zero());
    EXPECT_EQ(restrict_to_line(P("x1^2 + x2"), iv({2, 3})).to_string(), "4*x1^2 + 3*x1");
    EXPECT_THROW(restrict_to_line(P("x1 - x2"), iv({1})), Error);
}

TEST(Lines, RestrictCommutesWithEvaluation)
{
    const auto p = P("x1^3*x2 - 4*x1*x2^2 + x2 - 7", 2);
    for (const auto& a : {iv({1, 2}), iv({-3, 1}), iv({0, 5})}) {
        const auto q = restrict_to_line(p, a);
        for (long long t = -50; t <= 50; ++t) {
            const Integer T = make_integer(t);
            EXPECT_EQ(q.evaluate(IntVec{T}), p.evaluate(IntVec{a[0] * T, a[1] * T}));
        }
    }
}

TEST(Lines, DegreePreservingDirection)
{
    EXPECT_EQ(find_degree_preserving_direction(P("x1^2 - x2^2"), 1), iv({-1, 0}));
    EXPECT_EQ(find_degree_preserving_direction(P("x^2"), 1), iv({-1}));
    EXPECT_EQ(find_degree_preserving_direction(P("x1*x2"), 1), iv({-1, -1}));
    const auto p = P("x1^2*x2 - x2^3 + x1", 2);
    const auto a = find_degree_preserving_direction(p, 2);
    EXPECT_EQ(restrict_to_line(p, a).total_degree(), p.total_degree());
    EXPECT_THROW(find_degree_preserving_direction(P("5"), 2), Error);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "cloneaudit/merge.hpp"
#include "support.hpp"
#include "oracles.hpp"

using namespace cloneaudit;
using namespace cloneaudit::merge;
using testsupport::Rng;

using namespace testsupport;
namespace {

CodeFragment frag(const std::string& unit, std::uint32_t s, std::uint32_t e, const std::string& corpus = "c") {
    return {unit, corpus, s, e};
}

ClonePair pair(CodeFragment l, CodeFragment r, DetectorKind d = DetectorKind::token) {
    return {std::move(l), std::move(r), d, 1.0};
}

}  // namespace

TEST(Contained, WorkedValues) {
    EXPECT_DOUBLE_EQ(contained(frag("A", 10, 19), frag("A", 10, 19)), 1.0);
    EXPECT_NEAR(contained(frag("A", 10, 19), frag("A", 15, 24)), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(contained(frag("A", 10, 19), frag("B", 10, 19)), 0.0);
    EXPECT_DOUBLE_EQ(contained(frag("A", 10, 19, "x"), frag("A", 10, 19, "y")), 0.0);
}

TEST(OkValue, WorkedValues) {
    auto cp1 = pair(frag("A", 10, 19), frag("B", 100, 109));
    auto cp2 = pair(frag("A", 15, 24), frag("B", 105, 114));
    auto cp3 = pair(frag("A", 10, 19), frag("C", 1, 10));
    EXPECT_DOUBLE_EQ(ok_value(cp1, cp1), 1.0);
    EXPECT_NEAR(ok_value(cp1, cp2), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(ok_value(cp1, cp3), 0.0);
}

TEST(OkMatch, ThresholdIsInclusive) {
    auto cp1 = pair(frag("A", 10, 19), frag("B", 100, 109));
    auto cp2 = pair(frag("A", 15, 24), frag("B", 105, 114));
    EXPECT_TRUE(is_ok_match(cp1, cp2, 0.5));
    EXPECT_FALSE(is_ok_match(cp1, cp2, 0.51));
    // 49 of 100 lines shared on each side
    auto big1 = pair(frag("A", 1, 100), frag("B", 1, 100));
    auto big2 = pair(frag("A", 52, 151), frag("B", 52, 151));
    EXPECT_NEAR(ok_value(big1, big2), 0.49, 1e-12);
    EXPECT_FALSE(is_ok_match(big1, big2, 0.5));
    EXPECT_TRUE(is_ok_match(cp1, pair(frag("A", 1, 2), frag("B", 1, 2)), 0.0));
}

TEST(OkValueProperty, MatchesLineSetOracleSymmetricReflexive) {
    Rng rng(31);
    for (int i = 0; i < 5000; ++i) {
        auto p = random_clone_pair(rng, DetectorKind::token);
        auto q = random_clone_pair(rng, DetectorKind::line);
        double ok = ok_value(p, q);
        ASSERT_NEAR(ok, ref_ok(p, q), 1e-12);
        ASSERT_DOUBLE_EQ(ok, ok_value(q, p));
        ASSERT_GE(ok, 0.0);
        ASSERT_LE(ok, 1.0);
        ASSERT_DOUBLE_EQ(contained(p.left, p.left), 1.0);
    }
}

TEST(MergeConfig, Validation) {
    MergeConfig c;
    EXPECT_NO_THROW(c.validate());
    c.t = -0.1;
    EXPECT_THROW(c.validate(), ValidationError);
    c.t = 1.5;
    EXPECT_THROW(c.validate(), ValidationError);
    EXPECT_EQ(parse_strategy("greedy"), MergeStrategy::greedy);
    EXPECT_EQ(parse_strategy("components"), MergeStrategy::components);
    EXPECT_FALSE(parse_strategy("other"));
}

TEST(MergeReports, DisjointReportsPassThrough) {
    std::vector<ClonePair> tok{pair(frag("s1", 1, 10, "so"), frag("f", 1, 10, "p"))};
    std::vector<ClonePair> line{pair(frag("s2", 1, 10, "so"), frag("f", 1, 10, "p"), DetectorKind::line)};
    auto merged = merge_reports(tok, line, {});
    ASSERT_EQ(merged.size(), 2u);
    for (const auto& m : merged) EXPECT_EQ(m.contributors.size(), 1u);
}

TEST(MergeReports, IdenticalPairsUnify) {
    std::vector<ClonePair> tok{pair(frag("s1", 1, 10, "so"), frag("f", 1, 10, "p"))};
    std::vector<ClonePair> line{pair(frag("s1", 1, 10, "so"), frag("f", 1, 10, "p"), DetectorKind::line)};
    auto merged = merge_reports(tok, line, {});
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].contributors, (std::set<DetectorKind>{DetectorKind::token, DetectorKind::line}));
    EXPECT_EQ(merged[0].representative.detector, DetectorKind::token);
    ASSERT_EQ(merged[0].ok_partners.size(), 1u);
    EXPECT_DOUBLE_EQ(merged[0].ok_partners[0].ok, 1.0);
}

TEST(MergeReports, TenPerSideWithThreePlantedMatches) {
    std::vector<ClonePair> tok, line;
    for (int i = 0; i < 10; ++i) {
        auto s = static_cast<std::uint32_t>(1 + 40 * i);
        tok.push_back(pair(frag("s", s, s + 9, "so"), frag("f", s, s + 9, "p")));
        // line pairs 0..2 overlap their token counterparts by 6 of 10 lines, the rest are far away
        auto ls = i < 3 ? s + 4 : static_cast<std::uint32_t>(1000 + 40 * i);
        line.push_back(pair(frag("s", ls, ls + 9, "so"), frag("f", ls, ls + 9, "p"), DetectorKind::line));
    }
    auto merged = merge_reports(tok, line, {});
    EXPECT_EQ(merged.size(), 17u);
    EXPECT_EQ(groups_of(merged), ref_components(tok, line, 0.5));
    auto s = summarize(tok, line, merged);
    EXPECT_EQ(s.common, 3u);
    EXPECT_EQ(s.token_only, 7u);
    EXPECT_EQ(s.line_only, 7u);
    EXPECT_EQ(s.merged, 17u);
}

TEST(MergeReports, ComponentsAreTransitive) {
    // one token pair matching two line pairs joins all three
    std::vector<ClonePair> tok{pair(frag("s", 1, 20, "so"), frag("f", 1, 20, "p"))};
    std::vector<ClonePair> line{pair(frag("s", 1, 10, "so"), frag("f", 1, 10, "p"), DetectorKind::line),
                                pair(frag("s", 11, 20, "so"), frag("f", 11, 20, "p"), DetectorKind::line)};
    auto merged = merge_reports(tok, line, {});
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].line_members.size(), 2u);

    MergeConfig greedy{0.5, MergeStrategy::greedy};
    EXPECT_EQ(merge_reports(tok, line, greedy).size(), 2u);
}

TEST(MergeReportsProperty, EqualsBruteForceComponents) {
    Rng rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ClonePair> tok, line;
        for (int i = rng.uniform(0, 12); i > 0; --i) tok.push_back(random_clone_pair(rng, DetectorKind::token));
        for (int i = rng.uniform(0, 12); i > 0; --i) line.push_back(random_clone_pair(rng, DetectorKind::line));
        double t = rng.pick(std::vector<double>{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0});
        auto merged = merge_reports(tok, line, {t, MergeStrategy::components}, static_cast<unsigned>(rng.uniform(1, 3)));
        ASSERT_EQ(groups_of(merged), ref_components(tok, line, t)) << "trial " << trial;
        for (const auto& m : merged) {
            bool both = !m.token_members.empty() && !m.line_members.empty();
            ASSERT_EQ(m.contributors.size(), both ? 2u : 1u);
        }
    }
}

TEST(MergeReportsProperty, HigherThresholdMatchesAreSubsets) {
    Rng rng(17);
    const std::vector<double> ts{0.1, 0.3, 0.5, 0.7, 0.9};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ClonePair> tok, line;
        for (int i = rng.uniform(0, 10); i > 0; --i) tok.push_back(random_clone_pair(rng, DetectorKind::token));
        for (int i = rng.uniform(0, 10); i > 0; --i) line.push_back(random_clone_pair(rng, DetectorKind::line));
        std::vector<std::set<std::pair<std::size_t, std::size_t>>> edges;
        for (double t : ts) {
            std::set<std::pair<std::size_t, std::size_t>> e;
            for (const auto& m : merge_reports(tok, line, {t, MergeStrategy::components}))
                for (const auto& p : m.ok_partners) e.insert({p.token_pair, p.line_pair});
            edges.push_back(e);
        }
        for (std::size_t k = 1; k < edges.size(); ++k)
            ASSERT_TRUE(std::includes(edges[k - 1].begin(), edges[k - 1].end(), edges[k].begin(), edges[k].end()));
    }
}

TEST(MergeReportsProperty, GreedyUsesEachPairAtMostOnce) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ClonePair> tok, line;
        for (int i = rng.uniform(0, 10); i > 0; --i) tok.push_back(random_clone_pair(rng, DetectorKind::token));
        for (int i = rng.uniform(0, 10); i > 0; --i) line.push_back(random_clone_pair(rng, DetectorKind::line));
        auto merged = merge_reports(tok, line, {0.3, MergeStrategy::greedy});
        std::size_t members = 0;
        for (const auto& m : merged) {
            ASSERT_LE(m.token_members.size(), 1u);
            ASSERT_LE(m.line_members.size(), 1u);
            members += m.token_members.size() + m.line_members.size();
        }
        ASSERT_EQ(members, tok.size() + line.size());
    }
}

TEST(Consolidate, GroupsBySnippetFragment) {
    std::vector<ClonePair> tok{pair(frag("S", 1, 11, "so"), frag("a", 1, 11, "p")),
                               pair(frag("S", 1, 11, "so"), frag("b", 1, 11, "p")),
                               pair(frag("S", 1, 11, "so"), frag("c", 5, 15, "p")),
                               pair(frag("S", 3, 13, "so"), frag("d", 1, 11, "p"))};
    auto consolidated = consolidate(merge_reports(tok, {}, {}));
    ASSERT_EQ(consolidated.size(), 2u);
    EXPECT_EQ(consolidated[0].pair_id, 1u);
    EXPECT_EQ(consolidated[0].origins.size(), 3u);
    EXPECT_EQ(consolidated[1].pair_id, 2u);
    EXPECT_EQ(consolidated[1].snippet_fragment.start_line, 3u);
    EXPECT_TRUE(consolidate({}).empty());
}

TEST(ConsolidateProperty, PreservesDistinctSnippetFragments) {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ClonePair> tok, line;
        for (int i = rng.uniform(0, 15); i > 0; --i) tok.push_back(random_clone_pair(rng, DetectorKind::token));
        for (int i = rng.uniform(0, 15); i > 0; --i) line.push_back(random_clone_pair(rng, DetectorKind::line));
        auto merged = merge_reports(tok, line, {});
        std::set<CodeFragment> expected;
        for (const auto& m : merged) expected.insert(m.representative.left);
        auto consolidated = consolidate(merged);
        std::set<CodeFragment> got;
        for (std::size_t k = 0; k < consolidated.size(); ++k) {
            ASSERT_EQ(consolidated[k].pair_id, k + 1);
            got.insert(consolidated[k].snippet_fragment);
        }
        ASSERT_EQ(got, expected);
        ASSERT_EQ(consolidated.size(), expected.size());
    }
}

TEST(ClonedRatio, Arithmetic) {
    EXPECT_DOUBLE_EQ(cloned_ratio(20, {frag("S", 1, 10)}), 50.0);
    EXPECT_DOUBLE_EQ(cloned_ratio(20, {frag("S", 1, 10), frag("S", 6, 15)}), 75.0);
    EXPECT_DOUBLE_EQ(cloned_ratio(20, {frag("S", 1, 20)}), 100.0);
    EXPECT_DOUBLE_EQ(cloned_ratio(0, {}), 0.0);
}

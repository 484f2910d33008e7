#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "iknn/error.hpp"
#include "iknn/metrics.hpp"
#include "support/oracle.hpp"

using namespace iknn;

namespace {

using G = std::vector<double>;

InteractionDataset test_set(std::vector<std::pair<std::string, std::string>> pairs, const IdIndex& users,
                            const IdIndex& items) {
    std::vector<Interaction> records;
    for (auto& [u, i] : pairs) records.push_back({u, i, 1.0, 0.0});
    return InteractionDataset::with_indices(std::move(records), users, items, true);
}

IdIndex index_of(std::initializer_list<const char*> ids) {
    IdIndex index;
    for (const auto* id : ids) index.intern(id);
    return index;
}

} // namespace

TEST(Dcg, Examples) {
    EXPECT_EQ(dcg(G{1}), 1.0);
    EXPECT_DOUBLE_EQ(dcg(G{1, 0, 1}), 1.5);
    EXPECT_EQ(dcg(G{}), 0.0);
}

TEST(Ndcg, TruncatedPerfectLists) {
    EXPECT_DOUBLE_EQ(ndcg_at_n(G{1}, 1, 10, IdcgMode::truncated), 1.0);
    EXPECT_DOUBLE_EQ(ndcg_at_n(G{1, 1}, 2, 10, IdcgMode::truncated), 1.0);
}

TEST(Ndcg, FixedKPenalisesShortRelevantSets) {
    // (1 + 1/log2 3) / sum_{i=1..10} 1/log2(i+1)
    EXPECT_NEAR(ndcg_at_n(G{1, 1}, 2, 10, IdcgMode::fixed_k), 0.3589542101716347, 1e-12);
}

TEST(Ndcg, HitAtThirdPosition) {
    EXPECT_DOUBLE_EQ(ndcg_at_n(G{0, 0, 1}, 1, 10, IdcgMode::truncated), 0.5);
}

TEST(Ndcg, Preconditions) {
    EXPECT_THROW(ndcg_at_n(G{1}, 0, 10, IdcgMode::truncated), ContractError);
    EXPECT_THROW(ndcg_at_n(G(11, 0.0), 1, 10, IdcgMode::truncated), ContractError);
}

TEST(Precision, Examples) {
    EXPECT_DOUBLE_EQ(precision_at_n(G{1, 0, 1, 0, 1, 0, 0, 0, 0, 0}, 10), 0.3);
    EXPECT_EQ(precision_at_n(G{}, 10), 0.0);
    EXPECT_EQ(precision_at_n(G(10, 1.0), 10), 1.0);
    EXPECT_DOUBLE_EQ(precision_at_n(G{1}, 10), 0.1);  // short list keeps denominator n
}

TEST(Recall, Examples) {
    EXPECT_DOUBLE_EQ(recall_at_n(G{1, 1, 1, 0}, 5), 0.6);
    EXPECT_EQ(recall_at_n(G{1, 1}, 2), 1.0);
    EXPECT_EQ(recall_at_n(G{0, 0}, 2), 0.0);
    EXPECT_THROW(recall_at_n(G{1}, 0), ContractError);
}

TEST(IdcgNames, RoundTrip) {
    for (auto m : {IdcgMode::truncated, IdcgMode::fixed_k}) EXPECT_EQ(parse_idcg(idcg_name(m)), m);
    EXPECT_FALSE(parse_idcg("both"));
}

TEST(Evaluate, MeanOfTwoUsers) {
    const auto users = index_of({"u1", "u2"});
    const auto items = index_of({"a", "b", "c"});
    const auto test = test_set({{"u1", "a"}, {"u2", "c"}}, users, items);
    // u1 hit at 1 -> 1.0; u2 hit at 3 -> 0.5
    const std::vector<RecommendationList> recs{{0, {{0, 0.9}}}, {1, {{0, 0.9}, {1, 0.8}, {2, 0.7}}}};
    const auto report = evaluate(recs, test, 10, IdcgMode::truncated);
    ASSERT_EQ(report.per_user.size(), 2u);
    EXPECT_DOUBLE_EQ(report.per_user[0].ndcg, 1.0);
    EXPECT_DOUBLE_EQ(report.per_user[1].ndcg, 0.5);
    EXPECT_DOUBLE_EQ(report.mean_ndcg, 0.75);
    EXPECT_DOUBLE_EQ(report.mean_precision, 0.1);
    EXPECT_DOUBLE_EQ(report.mean_recall, 1.0);
    EXPECT_EQ(report.config.n, 10u);
}

TEST(Evaluate, EmptyListsScoreZero) {
    const auto users = index_of({"u1", "u2"});
    const auto items = index_of({"a"});
    const auto test = test_set({{"u1", "a"}, {"u2", "a"}}, users, items);
    const std::vector<RecommendationList> recs{{0, {}}, {1, {}}};
    const auto report = evaluate(recs, test, 10, IdcgMode::fixed_k);
    EXPECT_EQ(report.mean_ndcg, 0.0);
    EXPECT_EQ(report.mean_precision, 0.0);
    EXPECT_EQ(report.mean_recall, 0.0);
}

TEST(Evaluate, ThreeUserFixture) {
    const auto users = index_of({"u1", "u2", "u3"});
    const auto items = index_of({"a", "b", "c", "d"});
    const auto test = test_set({{"u1", "a"}, {"u1", "b"}, {"u2", "c"}, {"u3", "a"}, {"u3", "b"}, {"u3", "c"},
                                {"u3", "d"}},
                               users, items);
    const std::vector<RecommendationList> recs{
        {0, {{0, 1.0}, {1, 0.9}}},            // both hits in front: ndcg 1
        {1, {{0, 1.0}, {3, 0.9}, {2, 0.8}}},  // hit at 3
        {2, {{2, 1.0}}},                      // 1 hit of 4 relevant
    };
    const auto r = evaluate(recs, test, 3, IdcgMode::truncated);
    EXPECT_DOUBLE_EQ(r.per_user[0].ndcg, 1.0);
    EXPECT_DOUBLE_EQ(r.per_user[1].ndcg, 0.5);
    EXPECT_NEAR(r.per_user[2].ndcg, 1.0 / oracle::series_idcg(3), 1e-15);
    EXPECT_DOUBLE_EQ(r.per_user[0].precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.per_user[2].recall, 0.25);
    EXPECT_EQ(r.per_user[2].hits, 1u);
}

TEST(Evaluate, RejectsUsersWithoutTestItems) {
    const auto users = index_of({"u1", "u2"});
    const auto items = index_of({"a"});
    const auto test = test_set({{"u1", "a"}}, users, items);
    const std::vector<RecommendationList> recs{{1, {}}};
    EXPECT_THROW(evaluate(recs, test, 10, IdcgMode::truncated), ContractError);
    const std::vector<RecommendationList> twice{{0, {}}, {0, {}}};
    EXPECT_THROW(evaluate(twice, test, 10, IdcgMode::truncated), ContractError);
    const std::vector<RecommendationList> repeated{{0, {{0, 0.5}, {0, 0.4}}}};
    EXPECT_THROW(evaluate(repeated, test, 10, IdcgMode::truncated), ContractError);
}

// Brute-force series agreement, ordering between IDCG modes, ranges and
// permutation invariance on random fixtures.
TEST(Evaluate, PropertiesOnRandomFixtures) {
    std::mt19937_64 rng(53);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n_items = 5 + rng() % 30;
        const std::size_t n_users = 1 + rng() % 20;
        const std::size_t cutoff = 1 + rng() % 12;
        IdIndex users, items;
        for (std::size_t u = 0; u < n_users; ++u) users.intern("u" + std::to_string(u));
        for (std::size_t i = 0; i < n_items; ++i) items.intern("i" + std::to_string(i));

        std::vector<std::pair<std::string, std::string>> pairs;
        std::vector<std::vector<ItemIndex>> relevant(n_users);
        std::vector<RecommendationList> recs;
        for (std::size_t u = 0; u < n_users; ++u) {
            std::vector<ItemIndex> perm(n_items);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            const std::size_t n_rel = 1 + rng() % (n_items / 2);
            relevant[u].assign(perm.begin(), perm.begin() + n_rel);
            for (const auto i : relevant[u]) pairs.push_back({users.id(u), items.id(i)});
            std::shuffle(perm.begin(), perm.end(), rng);
            RecommendationList list{UserIndex(u), {}};
            const std::size_t len = std::min<std::size_t>(rng() % (cutoff + 1), n_items);
            for (std::size_t p = 0; p < len; ++p) list.entries.push_back({perm[p], 1.0 / double(p + 1)});
            recs.push_back(list);
        }
        const auto test = test_set(pairs, users, items);
        const auto trunc = evaluate(recs, test, cutoff, IdcgMode::truncated);
        const auto fixed = evaluate(recs, test, cutoff, IdcgMode::fixed_k);

        for (std::size_t u = 0; u < n_users; ++u) {
            std::vector<double> gains;
            for (const auto& e : recs[u].entries) {
                gains.push_back(std::count(relevant[u].begin(), relevant[u].end(), e.item) ? 1.0 : 0.0);
            }
            const double d = oracle::series_dcg(gains);
            const std::size_t n_rel = relevant[u].size();
            EXPECT_NEAR(trunc.per_user[u].ndcg, d / oracle::series_idcg(std::min(cutoff, n_rel)), 1e-12);
            EXPECT_NEAR(fixed.per_user[u].ndcg, d / oracle::series_idcg(cutoff), 1e-12);
            EXPECT_LE(fixed.per_user[u].ndcg, trunc.per_user[u].ndcg);
            if (n_rel >= cutoff) EXPECT_EQ(fixed.per_user[u].ndcg, trunc.per_user[u].ndcg);
            if (n_rel < cutoff && d > 0.0) EXPECT_LT(fixed.per_user[u].ndcg, trunc.per_user[u].ndcg);
            for (const double v : {trunc.per_user[u].ndcg, trunc.per_user[u].precision, trunc.per_user[u].recall}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
            EXPECT_EQ(std::lround(trunc.per_user[u].precision * double(cutoff)), long(trunc.per_user[u].hits));
            EXPECT_NEAR(trunc.per_user[u].precision * double(cutoff), double(trunc.per_user[u].hits), 1e-12);
        }

        auto shuffled = recs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(evaluate(shuffled, test, cutoff, IdcgMode::truncated), trunc);
    }
}

TEST(PairwiseMean, MatchesPlainMeanOnSmallInputs) {
    EXPECT_EQ(pairwise_mean(G{}), 0.0);
    EXPECT_DOUBLE_EQ(pairwise_mean(G{1.0, 0.5}), 0.75);
    G many(1000, 0.1);
    EXPECT_NEAR(pairwise_mean(many), 0.1, 1e-15);
}

#include "iknn/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "iknn/error.hpp"
#include "iknn/parallel.hpp"

namespace iknn {

std::size_t train_count(double train_ratio, std::size_t n) {
    // The epsilon absorbs products such as 0.8 * 35 = 28.000000000000004.
    const double raw = train_ratio * static_cast<double>(n);
    const auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::min(count, n);
}

SplitPair split_holdout(const InteractionDataset& ds, const SplitConfig& cfg, unsigned threads) {
    if (!(cfg.train_ratio > 0.0 && cfg.train_ratio <= 1.0)) {
        throw ContractError("train_ratio must lie in (0, 1]");
    }
    if (!ds.all_ratings_one()) throw ContractError("split_holdout requires an implicit dataset");

    const auto user_of = ds.user_of();
    const auto item_of = ds.item_of();
    const auto& records = ds.interactions();

    std::vector<std::vector<std::size_t>> rows_of_user(ds.n_users());
    for (std::size_t n = 0; n < ds.size(); ++n) rows_of_user[user_of[n]].push_back(n);

    std::vector<char> in_train(ds.size(), 0);
    parallel_for(rows_of_user.size(), threads, [&](std::size_t u) {
        auto& rows = rows_of_user[u];
        std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            if (records[a].timestamp != records[b].timestamp) {
                return records[a].timestamp < records[b].timestamp;
            }
            return item_of[a] < item_of[b];
        });
        SplitMix64 rng(user_stream_seed(cfg.seed, static_cast<UserIndex>(u)));
        for (std::size_t i = rows.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.next() % i);
            std::swap(rows[i - 1], rows[j]);
        }
        const std::size_t keep = train_count(cfg.train_ratio, rows.size());
        for (std::size_t r = 0; r < keep; ++r) in_train[rows[r]] = 1;
    });

    std::vector<Interaction> train;
    std::vector<Interaction> test;
    for (std::size_t n = 0; n < ds.size(); ++n) (in_train[n] ? train : test).push_back(records[n]);

    return SplitPair{
        InteractionDataset::with_indices(std::move(train), ds.users(), ds.items(), ds.implicit()),
        InteractionDataset::with_indices(std::move(test), ds.users(), ds.items(), ds.implicit()),
    };
}

void write_split(const std::filesystem::path& prefix, const SplitPair& split) {
    write_atomic(prefix.string() + ".train.inter", split.train);
    write_atomic(prefix.string() + ".test.inter", split.test);
}

SplitPair load_split(const std::filesystem::path& train_path, const std::filesystem::path& test_path) {
    auto train = load_interactions(train_path, FileFormat::atomic);
    auto test = load_interactions(test_path, FileFormat::atomic);

    IdIndex users = train.users();
    IdIndex items = train.items();
    for (const auto& r : test.interactions()) {
        users.intern(r.user);
        items.intern(r.item);
    }
    const bool implicit = train.all_ratings_one() && test.all_ratings_one();
    return SplitPair{
        InteractionDataset::with_indices(train.interactions(), users, items, implicit),
        InteractionDataset::with_indices(test.interactions(), std::move(users), std::move(items), implicit),
    };
}

} // namespace iknn

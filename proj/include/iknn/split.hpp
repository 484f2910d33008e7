#pragma once

#include <cstdint>
#include <filesystem>

#include "iknn/ingest.hpp"

namespace iknn {

struct SplitConfig {
    double train_ratio = 0.8;
    std::uint64_t seed = 42;
};

// Both sides share the source's user and item indices, so dense indices
// agree between train and test.
struct SplitPair {
    InteractionDataset train;
    InteractionDataset test;

    bool operator==(const SplitPair&) const = default;
};

// splitmix64 generator; the split's shuffle stream.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Seed of the per-user shuffle stream.
constexpr std::uint64_t user_stream_seed(std::uint64_t seed, UserIndex user) noexcept {
    return seed ^ (std::uint64_t{user} * 0x9E3779B97F4A7C15ULL);
}

// Number of a user's n interactions that go to train: ceil(ratio * n).
std::size_t train_count(double train_ratio, std::size_t n);

// Per-user holdout. Each user's interactions are put in canonical order
// (timestamp ascending, item index ascending), shuffled with Fisher-Yates
// driven by SplitMix64(user_stream_seed(seed, user)) drawing j = next() % (i + 1)
// for i = n-1 .. 1, and the first train_count() go to train.
// Both output datasets keep the source's row order.
// Throws ContractError unless every rating equals 1 and 0 < train_ratio <= 1.
SplitPair split_holdout(const InteractionDataset& ds, const SplitConfig& cfg, unsigned threads = 1);

// Writes `<prefix>.train.inter` and `<prefix>.test.inter`.
void write_split(const std::filesystem::path& prefix, const SplitPair& split);

// Loads a persisted split. Train ids are indexed first, then test-only ids.
SplitPair load_split(const std::filesystem::path& train_path, const std::filesystem::path& test_path);

} // namespace iknn

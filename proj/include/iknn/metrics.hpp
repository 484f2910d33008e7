#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iknn/recommend.hpp"

namespace iknn {

// How the ideal DCG treats users with fewer relevant items than the cutoff.
enum class IdcgMode {
    truncated,  // ideal list of min(n, n_relevant) hits
    fixed_k,    // ideal list of n hits regardless of n_relevant
};

std::string_view idcg_name(IdcgMode mode);
std::optional<IdcgMode> parse_idcg(std::string_view name);

// Sum of (2^rel_i - 1) / log2(i + 1) over positions i = 1..len.
double dcg(std::span<const double> gains);

// Ideal DCG with binary gains. Throws ContractError when n_relevant == 0.
double idcg(std::size_t n_relevant, std::size_t n, IdcgMode mode);

// dcg(gains) / idcg(n_relevant, n, mode). Requires gains.size() <= n.
double ndcg_at_n(std::span<const double> gains, std::size_t n_relevant, std::size_t n, IdcgMode mode);

// Hits over n, even when the list is shorter than n.
double precision_at_n(std::span<const double> gains, std::size_t n);

// Hits over n_relevant, capped at 1.
double recall_at_n(std::span<const double> gains, std::size_t n_relevant);

struct UserMetrics {
    UserIndex user = 0;
    std::size_t n_relevant = 0;
    std::size_t hits = 0;
    double ndcg = 0.0;
    double precision = 0.0;
    double recall = 0.0;

    bool operator==(const UserMetrics&) const = default;
};

// Echo of the settings a report was computed under. preset and seed are
// filled by the experiment runner.
struct MetricConfig {
    std::size_t n = 10;
    IdcgMode idcg = IdcgMode::truncated;
    std::string preset;
    std::uint64_t seed = 0;

    bool operator==(const MetricConfig&) const = default;
};

struct MetricReport {
    MetricConfig config;
    std::vector<UserMetrics> per_user;  // ascending user index
    double mean_ndcg = 0.0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;

    bool operator==(const MetricReport&) const = default;
};

// Pairwise (cascade) summation divided by the count; 0 for an empty span.
double pairwise_mean(std::span<const double> values);

// Relevance is membership of a recommended item in the user's test items.
// Every list's user must have test interactions (ContractError otherwise),
// lists longer than n are cut to n, a user may appear only once and a list
// may not repeat an item.
MetricReport evaluate(std::span<const RecommendationList> recs, const InteractionDataset& test, std::size_t n,
                      IdcgMode mode);

} // namespace iknn

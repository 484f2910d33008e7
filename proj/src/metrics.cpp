#include "iknn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "iknn/error.hpp"

namespace iknn {

std::string_view idcg_name(IdcgMode mode) {
    return mode == IdcgMode::truncated ? "truncated" : "fixed-k";
}

std::optional<IdcgMode> parse_idcg(std::string_view name) {
    if (name == "truncated") return IdcgMode::truncated;
    if (name == "fixed-k") return IdcgMode::fixed_k;
    return std::nullopt;
}

double dcg(std::span<const double> gains) {
    double sum = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        sum += (std::exp2(gains[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
}

double idcg(std::size_t n_relevant, std::size_t n, IdcgMode mode) {
    if (n_relevant == 0) throw ContractError("IDCG is undefined for a user without relevant items");
    const std::size_t length = mode == IdcgMode::truncated ? std::min(n, n_relevant) : n;
    double sum = 0.0;
    for (std::size_t i = 0; i < length; ++i) sum += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return sum;
}

double ndcg_at_n(std::span<const double> gains, std::size_t n_relevant, std::size_t n, IdcgMode mode) {
    if (gains.size() > n) throw ContractError("ranked list longer than the cutoff");
    return dcg(gains) / idcg(n_relevant, n, mode);
}

namespace {

std::size_t count_hits(std::span<const double> gains) {
    return static_cast<std::size_t>(std::count_if(gains.begin(), gains.end(), [](double g) { return g > 0.0; }));
}

double cascade_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (const double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return cascade_sum(v.first(half)) + cascade_sum(v.subspan(half));
}

} // namespace

double precision_at_n(std::span<const double> gains, std::size_t n) {
    if (n == 0) throw ContractError("precision requires n >= 1");
    return static_cast<double>(count_hits(gains)) / static_cast<double>(n);
}

double recall_at_n(std::span<const double> gains, std::size_t n_relevant) {
    if (n_relevant == 0) throw ContractError("recall is undefined for a user without relevant items");
    return std::min(1.0, static_cast<double>(count_hits(gains)) / static_cast<double>(n_relevant));
}

double pairwise_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return cascade_sum(values) / static_cast<double>(values.size());
}

MetricReport evaluate(std::span<const RecommendationList> recs, const InteractionDataset& test, std::size_t n,
                      IdcgMode mode) {
    if (n == 0) throw ContractError("evaluate requires n >= 1");

    std::vector<std::vector<ItemIndex>> relevant(test.n_users());
    const auto users = test.user_of();
    const auto items = test.item_of();
    for (std::size_t r = 0; r < test.size(); ++r) relevant[users[r]].push_back(items[r]);
    for (auto& items_of_user : relevant) {
        std::sort(items_of_user.begin(), items_of_user.end());
        items_of_user.erase(std::unique(items_of_user.begin(), items_of_user.end()), items_of_user.end());
    }

    MetricReport report;
    report.config.n = n;
    report.config.idcg = mode;
    report.per_user.reserve(recs.size());

    std::vector<double> gains;
    std::vector<ScoredItem> listed;
    for (const auto& list : recs) {
        if (list.user >= relevant.size() || relevant[list.user].empty()) {
            throw ContractError("recommendation list for user " + std::to_string(list.user) +
                                " who has no test interactions");
        }
        const auto& rel = relevant[list.user];
        const std::size_t length = std::min(n, list.entries.size());
        gains.assign(length, 0.0);
        listed.assign(list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(length));
        std::sort(listed.begin(), listed.end(), [](const ScoredItem& a, const ScoredItem& b) { return a.item < b.item; });
        if (std::adjacent_find(listed.begin(), listed.end(), [](const ScoredItem& a, const ScoredItem& b) {
                return a.item == b.item;
            }) != listed.end()) {
            throw ContractError("recommendation list for user " + std::to_string(list.user) + " repeats an item");
        }
        for (std::size_t p = 0; p < length; ++p) {
            if (std::binary_search(rel.begin(), rel.end(), list.entries[p].item)) gains[p] = 1.0;
        }
        UserMetrics m;
        m.user = list.user;
        m.n_relevant = rel.size();
        m.hits = count_hits(gains);
        m.ndcg = ndcg_at_n(gains, rel.size(), n, mode);
        m.precision = precision_at_n(gains, n);
        m.recall = recall_at_n(gains, rel.size());
        report.per_user.push_back(m);
    }

    std::sort(report.per_user.begin(), report.per_user.end(),
              [](const UserMetrics& a, const UserMetrics& b) { return a.user < b.user; });
    for (std::size_t i = 1; i < report.per_user.size(); ++i) {
        if (report.per_user[i].user == report.per_user[i - 1].user) {
            throw ContractError("user " + std::to_string(report.per_user[i].user) + " evaluated twice");
        }
    }

    std::vector<double> column(report.per_user.size());
    auto mean_of = [&](double UserMetrics::*field) {
        std::transform(report.per_user.begin(), report.per_user.end(), column.begin(),
                       [field](const UserMetrics& m) { return m.*field; });
        return pairwise_mean(column);
    };
    report.mean_ndcg = mean_of(&UserMetrics::ndcg);
    report.mean_precision = mean_of(&UserMetrics::precision);
    report.mean_recall = mean_of(&UserMetrics::recall);
    return report;
}

} // namespace iknn

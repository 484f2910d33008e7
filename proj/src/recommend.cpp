#include "iknn/recommend.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "iknn/error.hpp"
#include "iknn/format.hpp"
#include "iknn/parallel.hpp"

namespace iknn {

std::string_view preset_name(Preset preset) {
    switch (preset) {
    case Preset::lenskit_original: return "lenskit-original";
    case Preset::lenskit_adjusted: return "lenskit-adjusted";
    case Preset::recbole: return "recbole";
    }
    return "unknown";
}

std::optional<Preset> parse_preset(std::string_view name) {
    for (auto p : {Preset::lenskit_original, Preset::lenskit_adjusted, Preset::recbole}) {
        if (preset_name(p) == name) return p;
    }
    return std::nullopt;
}

PresetSetup preset_setup(Preset preset, std::size_t k) {
    switch (preset) {
    case Preset::lenskit_original: return {SimilarityStrategy::full, {ScoringKind::profile_topk, k}};
    case Preset::lenskit_adjusted: return {SimilarityStrategy::topk, {ScoringKind::profile_topk, k}};
    case Preset::recbole: return {SimilarityStrategy::topk, {ScoringKind::sum_all, k}};
    }
    throw ContractError("unknown preset");
}

Scorer::Scorer(const SimilarityMatrix& s, ScoringMode mode) : matrix_(&s), mode_(mode) {
    if (mode_.kind == ScoringKind::profile_topk && mode_.k == 0) {
        throw ContractError("profile-topk scoring requires k >= 1");
    }
    const std::size_t n = s.n_items();
    col_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : s.row(static_cast<ItemIndex>(i))) ++col_offsets_[e.column + 1];
    }
    for (std::size_t j = 0; j < n; ++j) col_offsets_[j + 1] += col_offsets_[j];
    by_column_.resize(col_offsets_.back());
    auto fill = col_offsets_;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : s.row(static_cast<ItemIndex>(i))) {
            by_column_[fill[e.column]++] = {static_cast<ItemIndex>(i), e.value};
        }
    }
}

std::vector<double> Scorer::score(std::span<const ItemIndex> profile) const {
    const std::size_t n = matrix_->n_items();
    std::vector<ItemIndex> items(profile.begin(), profile.end());
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (!items.empty() && items.back() >= n) throw ContractError("profile item outside the similarity matrix");

    std::vector<double> scores(n, 0.0);
    if (mode_.kind == ScoringKind::sum_all) {
        for (const auto j : items) {
            for (std::size_t e = col_offsets_[j]; e < col_offsets_[j + 1]; ++e) {
                scores[by_column_[e].row] += by_column_[e].value;
            }
        }
        return scores;
    }

    // Gather per candidate in ascending profile order, then keep the k
    // largest (ties to the smaller profile item) and sum them in that order.
    struct Gathered {
        ItemIndex column;
        double value;
    };
    std::vector<std::vector<Gathered>> gathered(n);
    for (const auto j : items) {
        for (std::size_t e = col_offsets_[j]; e < col_offsets_[j + 1]; ++e) {
            gathered[by_column_[e].row].push_back({j, by_column_[e].value});
        }
    }
    const std::size_t k = mode_.k;
    for (std::size_t i = 0; i < n; ++i) {
        auto& g = gathered[i];
        if (g.size() > k) {
            std::nth_element(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k - 1), g.end(),
                             [](const Gathered& a, const Gathered& b) {
                                 return a.value != b.value ? a.value > b.value : a.column < b.column;
                             });
            g.resize(k);
            std::sort(g.begin(), g.end(), [](const Gathered& a, const Gathered& b) { return a.column < b.column; });
        }
        double sum = 0.0;
        for (const auto& x : g) sum += x.value;
        scores[i] = sum;
    }
    return scores;
}

std::vector<double> score_user(const SimilarityMatrix& s, std::span<const ItemIndex> profile, ScoringMode mode) {
    return Scorer(s, mode).score(profile);
}

RecommendationList recommend_topn(std::span<const double> scores, std::span<const ItemIndex> seen, std::size_t n,
                                  UserIndex user) {
    if (n == 0) throw ContractError("recommend_topn requires n >= 1");
    std::vector<char> excluded(scores.size(), 0);
    for (const auto i : seen) {
        if (i < excluded.size()) excluded[i] = 1;
    }
    std::vector<ScoredItem> candidates;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!excluded[i] && scores[i] > 0.0) candidates.push_back({static_cast<ItemIndex>(i), scores[i]});
    }
    const auto better = [](const ScoredItem& a, const ScoredItem& b) {
        return a.score != b.score ? a.score > b.score : a.item < b.item;
    };
    const std::size_t keep = std::min(n, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      better);
    candidates.resize(keep);
    return RecommendationList{user, std::move(candidates)};
}

std::vector<RecommendationList> recommend_all(const SimilarityMatrix& s, const SplitPair& split, ScoringMode mode,
                                              std::size_t n, unsigned threads) {
    const auto profiles = build_matrix(split.train);
    std::vector<char> has_test(split.test.n_users(), 0);
    for (const auto u : split.test.user_of()) has_test[u] = 1;

    std::vector<UserIndex> users;
    for (std::size_t u = 0; u < has_test.size(); ++u) {
        if (has_test[u]) users.push_back(static_cast<UserIndex>(u));
    }

    const Scorer scorer(s, mode);
    std::vector<RecommendationList> lists(users.size());
    parallel_for(users.size(), threads, [&](std::size_t slot) {
        const UserIndex u = users[slot];
        const auto& profile = profiles.rows[u];
        const auto scores = scorer.score(profile);
        lists[slot] = recommend_topn(scores, profile, n, u);
    });
    return lists;
}

void write_recommendations(std::ostream& out, std::span<const RecommendationList> lists, const IdIndex& users,
                           const IdIndex& items) {
    for (const auto& list : lists) {
        std::size_t rank = 0;
        for (const auto& e : list.entries) {
            out << users.id(list.user) << '\t' << ++rank << '\t' << items.id(e.item) << '\t' << format_full(e.score)
                << '\n';
        }
    }
}

void write_recommendations(const std::filesystem::path& path, std::span<const RecommendationList> lists,
                           const IdIndex& users, const IdIndex& items) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_recommendations(out, lists, users, items);
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<RecommendationList> read_recommendations(const std::filesystem::path& path, IdIndex& users,
                                                     IdIndex& items) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::map<UserIndex, RecommendationList> by_user;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string user;
        std::string item;
        std::string score_text;
        std::size_t rank = 0;
        double score = 0.0;
        if (!(fields >> user >> rank >> item >> score_text) || !parse_double(score_text, score)) {
            throw ParseError("malformed recommendation entry", line_no);
        }
        const auto u = users.intern(user);
        auto& list = by_user[u];
        list.user = u;
        if (rank != list.entries.size() + 1) throw ParseError("ranks must be consecutive from 1", line_no);
        list.entries.push_back({items.intern(item), score});
    }
    std::vector<RecommendationList> lists;
    lists.reserve(by_user.size());
    for (auto& [u, list] : by_user) lists.push_back(std::move(list));
    return lists;
}

} // namespace iknn

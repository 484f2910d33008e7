#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iknn/knn.hpp"
#include "iknn/split.hpp"

namespace iknn {

enum class ScoringKind {
    profile_topk,  // sum of the k largest similarities to profile items
    sum_all,       // sum of all similarities to profile items
};

struct ScoringMode {
    ScoringKind kind = ScoringKind::sum_all;
    std::size_t k = 0;  // used by profile_topk only; must be >= 1 there
};

// Named (similarity strategy, scoring mode) pairs emulating the two libraries.
enum class Preset {
    lenskit_original,  // full matrix, profile top-k
    lenskit_adjusted,  // top-k matrix, profile top-k
    recbole,           // top-k matrix, sum of all
};

std::string_view preset_name(Preset preset);
std::optional<Preset> parse_preset(std::string_view name);

struct PresetSetup {
    SimilarityStrategy strategy;
    ScoringMode mode;
};
PresetSetup preset_setup(Preset preset, std::size_t k);

struct ScoredItem {
    ItemIndex item;
    double score;
    bool operator==(const ScoredItem&) const = default;
};

struct RecommendationList {
    UserIndex user = 0;
    std::vector<ScoredItem> entries;
    bool operator==(const RecommendationList&) const = default;
};

// Scores every candidate item of a matrix for many profiles. Holds a
// column-major view of `s`, which must outlive the scorer.
class Scorer {
public:
    Scorer(const SimilarityMatrix& s, ScoringMode mode);

    // profile: item indices, any order, duplicates ignored. Throws
    // ContractError for indices outside the matrix.
    std::vector<double> score(std::span<const ItemIndex> profile) const;

private:
    struct Source {
        ItemIndex row;
        double value;
    };

    const SimilarityMatrix* matrix_;
    ScoringMode mode_;
    std::vector<std::size_t> col_offsets_;
    std::vector<Source> by_column_;  // column j: rows i with s[i, j] != 0, ascending i
};

// Gathered values {s[i, j] : j in profile} are combined per candidate i
// in ascending j order, so equal gathered sets give bit-identical scores.
std::vector<double> score_user(const SimilarityMatrix& s, std::span<const ItemIndex> profile, ScoringMode mode);

// Up to n unseen items with positive score ordered by (score desc, item asc).
// Throws ContractError when n == 0.
RecommendationList recommend_topn(std::span<const double> scores, std::span<const ItemIndex> seen, std::size_t n,
                                  UserIndex user = 0);

// One list per user with at least one test interaction, ascending user index,
// scored from the user's train profile with the profile excluded.
std::vector<RecommendationList> recommend_all(const SimilarityMatrix& s, const SplitPair& split, ScoringMode mode,
                                              std::size_t n, unsigned threads = 1);

// `user<TAB>rank<TAB>item<TAB>score` lines with external ids, rank from 1.
void write_recommendations(std::ostream& out, std::span<const RecommendationList> lists, const IdIndex& users,
                           const IdIndex& items);
void write_recommendations(const std::filesystem::path& path, std::span<const RecommendationList> lists,
                           const IdIndex& users, const IdIndex& items);

// Reads a dump back; ids unknown to the indices are appended to them.
std::vector<RecommendationList> read_recommendations(const std::filesystem::path& path, IdIndex& users,
                                                     IdIndex& items);

} // namespace iknn

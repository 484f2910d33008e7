#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "iknn/ingest.hpp"

namespace iknn {

// Binary user-item matrix; row u lists the user's items in ascending order.
struct UserItemMatrix {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::vector<std::vector<ItemIndex>> rows;
};

// Sized by the dataset's indices. Throws ContractError unless the dataset is implicit.
UserItemMatrix build_matrix(const InteractionDataset& train);

enum class SimilarityStrategy { full, topk };

// Item-item similarities in compressed sparse rows. Row i holds the
// neighbours of candidate item i, sorted by column; the diagonal and exact
// zeros are never stored.
class SimilarityMatrix {
public:
    struct Entry {
        ItemIndex column;
        double value;
        bool operator==(const Entry&) const = default;
    };

    SimilarityMatrix() = default;

    // Validates the CSR invariants (sorted unique columns, no diagonal,
    // values in (0, 1]); throws ContractError on violation.
    SimilarityMatrix(std::size_t n_items, std::vector<std::size_t> row_offsets, std::vector<Entry> entries,
                     SimilarityStrategy strategy, std::size_t k);

    std::size_t n_items() const noexcept { return n_items_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    SimilarityStrategy strategy() const noexcept { return strategy_; }
    // Neighbourhood size for topk matrices, 0 for full ones.
    std::size_t k() const noexcept { return k_; }

    std::span<const Entry> row(ItemIndex i) const;
    // 0 when (i, j) is not stored.
    double at(ItemIndex i, ItemIndex j) const;

    // Same entries with extra empty rows appended up to n_items.
    SimilarityMatrix padded_to(std::size_t n_items) const;

    bool operator==(const SimilarityMatrix&) const = default;

private:
    std::size_t n_items_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<Entry> entries_;
    SimilarityStrategy strategy_ = SimilarityStrategy::full;
    std::size_t k_ = 0;
};

// Binary cosine |U_i ∩ U_j| / (sqrt|U_i| sqrt|U_j|), clamped to 1.
// Items nobody interacted with get empty rows.
SimilarityMatrix cosine_similarity(const UserItemMatrix& m, unsigned threads = 1);

// Keeps the k largest entries of every row, ties to the smaller column.
// Throws ContractError unless `s` is a full matrix and k >= 1.
SimilarityMatrix truncate_topk(const SimilarityMatrix& s, std::size_t k, unsigned threads = 1);

// Text persistence: header `items=<n> strategy=<full|topk> k=<k>`, then one
// `row<TAB>col<TAB>value` line per stored entry, values with 17 significant digits.
void write_similarity(std::ostream& out, const SimilarityMatrix& s);
void write_similarity(const std::filesystem::path& path, const SimilarityMatrix& s);
SimilarityMatrix read_similarity(std::istream& in, const std::string& source = "<stream>");
SimilarityMatrix read_similarity(const std::filesystem::path& path);

} // namespace iknn

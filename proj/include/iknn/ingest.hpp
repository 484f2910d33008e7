#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iknn {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

struct Interaction {
    std::string user;
    std::string item;
    double rating = 0.0;
    double timestamp = 0.0;

    bool operator==(const Interaction&) const = default;
};

// Bijection between external string ids and dense indices [0, size()),
// assigned in first-appearance order.
class IdIndex {
public:
    std::uint32_t intern(std::string_view id);
    std::optional<std::uint32_t> find(std::string_view id) const;
    const std::string& id(std::uint32_t index) const { return ids_.at(index); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::size_t size() const noexcept { return ids_.size(); }

    bool operator==(const IdIndex& other) const { return ids_ == other.ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> lookup_;
};

// Immutable ordered list of interactions plus user and item index maps.
// Dense indices of each row are cached alongside the records.
class InteractionDataset {
public:
    InteractionDataset() = default;

    // Builds both indices from the records in first-appearance order.
    static InteractionDataset from_records(std::vector<Interaction> records, bool implicit = false);

    // Uses the given indices, which must contain every id in `records`
    // (they may also contain ids without interactions). Throws ContractError otherwise.
    static InteractionDataset with_indices(std::vector<Interaction> records, IdIndex users,
                                           IdIndex items, bool implicit);

    const std::vector<Interaction>& interactions() const noexcept { return records_; }
    std::span<const UserIndex> user_of() const noexcept { return user_of_; }
    std::span<const ItemIndex> item_of() const noexcept { return item_of_; }
    const IdIndex& users() const noexcept { return users_; }
    const IdIndex& items() const noexcept { return items_; }

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t n_users() const noexcept { return users_.size(); }
    std::size_t n_items() const noexcept { return items_.size(); }

    // Set on datasets produced by to_implicit (and carried through splitting).
    bool implicit() const noexcept { return implicit_; }
    bool all_ratings_one() const noexcept;

    bool operator==(const InteractionDataset&) const = default;

private:
    std::vector<Interaction> records_;
    std::vector<UserIndex> user_of_;
    std::vector<ItemIndex> item_of_;
    IdIndex users_;
    IdIndex items_;
    bool implicit_ = false;
};

enum class FileFormat { atomic, csv };

// Base column names (atomic-file type suffixes such as ":token" are ignored).
// An empty timestamp name, or a timestamp column absent from the file, yields 0.
struct ColumnMap {
    std::string user = "user_id";
    std::string item = "item_id";
    std::string rating = "rating";
    std::string timestamp = "timestamp";
};

InteractionDataset load_interactions(const std::filesystem::path& path, FileFormat format,
                                     const ColumnMap& columns = {});

// Same as load_interactions over an already opened stream; `source` names it in errors.
InteractionDataset read_interactions(std::istream& in, FileFormat format, const ColumnMap& columns,
                                     const std::string& source);

// Writes an atomic TSV with header `user_id:token item_id:token rating:float timestamp:float`.
void write_atomic(const std::filesystem::path& path, const InteractionDataset& ds);
void write_atomic(std::ostream& out, const InteractionDataset& ds);

enum class ThresholdMode { greater, greater_equal };

struct ImplicitThreshold {
    double cutoff = 3.0;
    ThresholdMode mode = ThresholdMode::greater;

    bool passes(double rating) const noexcept {
        return mode == ThresholdMode::greater ? rating > cutoff : rating >= cutoff;
    }
};

// Keeps interactions passing the threshold with rating rewritten to 1,
// collapses duplicate (user, item) pairs to the earliest timestamp and rebuilds
// both indices so that only users and items with surviving interactions remain.
// A dataset already marked implicit is returned unchanged.
InteractionDataset to_implicit(const InteractionDataset& ds, const ImplicitThreshold& threshold);

struct DatasetStats {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::size_t n_interactions = 0;
    double avg_per_user = 0.0;
    double avg_per_item = 0.0;
    double sparsity = 0.0;

    bool operator==(const DatasetStats&) const = default;
};

// Counts users and items that actually occur in the interaction list.
DatasetStats stats(const InteractionDataset& ds);

} // namespace iknn

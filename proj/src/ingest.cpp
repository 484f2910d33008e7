#include "iknn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "iknn/error.hpp"
#include "iknn/format.hpp"

namespace iknn {

std::uint32_t IdIndex::intern(std::string_view id) {
    std::string key(id);
    if (auto it = lookup_.find(key); it != lookup_.end()) return it->second;
    const auto index = static_cast<std::uint32_t>(ids_.size());
    ids_.push_back(key);
    lookup_.emplace(std::move(key), index);
    return index;
}

std::optional<std::uint32_t> IdIndex::find(std::string_view id) const {
    if (auto it = lookup_.find(std::string(id)); it != lookup_.end()) return it->second;
    return std::nullopt;
}

InteractionDataset InteractionDataset::from_records(std::vector<Interaction> records, bool implicit) {
    InteractionDataset ds;
    ds.user_of_.reserve(records.size());
    ds.item_of_.reserve(records.size());
    for (const auto& r : records) {
        ds.user_of_.push_back(ds.users_.intern(r.user));
        ds.item_of_.push_back(ds.items_.intern(r.item));
    }
    ds.records_ = std::move(records);
    ds.implicit_ = implicit;
    return ds;
}

InteractionDataset InteractionDataset::with_indices(std::vector<Interaction> records, IdIndex users,
                                                    IdIndex items, bool implicit) {
    InteractionDataset ds;
    ds.user_of_.reserve(records.size());
    ds.item_of_.reserve(records.size());
    for (const auto& r : records) {
        const auto u = users.find(r.user);
        const auto i = items.find(r.item);
        if (!u || !i) {
            throw ContractError("interaction (" + r.user + ", " + r.item + ") not covered by the index");
        }
        ds.user_of_.push_back(*u);
        ds.item_of_.push_back(*i);
    }
    ds.records_ = std::move(records);
    ds.users_ = std::move(users);
    ds.items_ = std::move(items);
    ds.implicit_ = implicit;
    return ds;
}

bool InteractionDataset::all_ratings_one() const noexcept {
    return std::all_of(records_.begin(), records_.end(),
                       [](const Interaction& r) { return r.rating == 1.0; });
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string_view unquote(std::string_view field) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
        field = field.substr(1, field.size() - 2);
    }
    return field;
}

// "user_id:token" -> "user_id"
std::string_view base_name(std::string_view header) {
    header = unquote(header);
    if (const auto colon = header.find(':'); colon != std::string_view::npos) {
        header = header.substr(0, colon);
    }
    return header;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

} // namespace

InteractionDataset read_interactions(std::istream& in, FileFormat format, const ColumnMap& columns,
                                     const std::string& source) {
    const char sep = format == FileFormat::atomic ? '\t' : ',';

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(columns.user, source + " (no header row)");
    strip_cr(line);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_fields(line, sep);
    auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (base_name(header[c]) == name) return c;
        }
        return std::nullopt;
    };
    auto require = [&](const std::string& name) {
        const auto c = column_of(name);
        if (!c) throw SchemaError(name, source);
        return *c;
    };

    const std::size_t user_col = require(columns.user);
    const std::size_t item_col = require(columns.item);
    const std::size_t rating_col = require(columns.rating);
    const std::optional<std::size_t> time_col =
        columns.timestamp.empty() ? std::nullopt : column_of(columns.timestamp);
    const std::size_t needed =
        1 + std::max({user_col, item_col, rating_col, time_col.value_or(0)});

    std::vector<Interaction> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line, sep);
        if (fields.size() < needed) {
            throw ParseError("expected at least " + std::to_string(needed) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        Interaction r;
        r.user = std::string(unquote(fields[user_col]));
        r.item = std::string(unquote(fields[item_col]));
        if (r.user.empty() || r.item.empty()) throw ParseError("empty user or item id", line_no);
        if (!parse_double(fields[rating_col], r.rating) || !std::isfinite(r.rating)) {
            throw ParseError("unparseable rating '" + std::string(fields[rating_col]) + "'", line_no);
        }
        if (time_col) {
            const auto field = unquote(fields[*time_col]);
            if (!field.empty() && !parse_double(field, r.timestamp)) {
                throw ParseError("unparseable timestamp '" + std::string(field) + "'", line_no);
            }
        }
        records.push_back(std::move(r));
    }
    return InteractionDataset::from_records(std::move(records));
}

InteractionDataset load_interactions(const std::filesystem::path& path, FileFormat format,
                                     const ColumnMap& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_interactions(in, format, columns, path.string());
}

void write_atomic(std::ostream& out, const InteractionDataset& ds) {
    out << "user_id:token\titem_id:token\trating:float\ttimestamp:float\n";
    for (const auto& r : ds.interactions()) {
        out << r.user << '\t' << r.item << '\t' << format_full(r.rating) << '\t'
            << format_full(r.timestamp) << '\n';
    }
}

void write_atomic(const std::filesystem::path& path, const InteractionDataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_atomic(out, ds);
    if (!out) throw IoError("write failed for " + path.string());
}

InteractionDataset to_implicit(const InteractionDataset& ds, const ImplicitThreshold& threshold) {
    if (ds.implicit()) return ds;

    // Position in `kept` of each surviving (user, item) pair, keyed by source dense indices.
    std::unordered_map<std::uint64_t, std::size_t> slot;
    std::vector<Interaction> kept;
    const auto users = ds.user_of();
    const auto items = ds.item_of();
    for (std::size_t n = 0; n < ds.size(); ++n) {
        const auto& r = ds.interactions()[n];
        if (!threshold.passes(r.rating)) continue;
        const std::uint64_t key = (std::uint64_t{users[n]} << 32) | items[n];
        if (auto it = slot.find(key); it != slot.end()) {
            auto& first = kept[it->second];
            first.timestamp = std::min(first.timestamp, r.timestamp);
            continue;
        }
        slot.emplace(key, kept.size());
        kept.push_back(Interaction{r.user, r.item, 1.0, r.timestamp});
    }
    return InteractionDataset::from_records(std::move(kept), true);
}

DatasetStats stats(const InteractionDataset& ds) {
    std::vector<char> user_seen(ds.n_users(), 0);
    std::vector<char> item_seen(ds.n_items(), 0);
    for (const auto u : ds.user_of()) user_seen[u] = 1;
    for (const auto i : ds.item_of()) item_seen[i] = 1;

    DatasetStats s;
    s.n_users = static_cast<std::size_t>(std::count(user_seen.begin(), user_seen.end(), 1));
    s.n_items = static_cast<std::size_t>(std::count(item_seen.begin(), item_seen.end(), 1));
    s.n_interactions = ds.size();
    if (s.n_users > 0 && s.n_items > 0) {
        const auto n = static_cast<double>(s.n_interactions);
        s.avg_per_user = n / static_cast<double>(s.n_users);
        s.avg_per_item = n / static_cast<double>(s.n_items);
        s.sparsity = 1.0 - n / (static_cast<double>(s.n_users) * static_cast<double>(s.n_items));
    }
    return s;
}

} // namespace iknn

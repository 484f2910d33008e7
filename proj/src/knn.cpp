#include "iknn/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "iknn/error.hpp"
#include "iknn/format.hpp"
#include "iknn/parallel.hpp"

namespace iknn {

UserItemMatrix build_matrix(const InteractionDataset& train) {
    if (!train.all_ratings_one()) throw ContractError("build_matrix requires an implicit dataset");
    UserItemMatrix m;
    m.n_users = train.n_users();
    m.n_items = train.n_items();
    m.rows.resize(m.n_users);
    const auto users = train.user_of();
    const auto items = train.item_of();
    for (std::size_t n = 0; n < train.size(); ++n) m.rows[users[n]].push_back(items[n]);
    for (auto& row : m.rows) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return m;
}

SimilarityMatrix::SimilarityMatrix(std::size_t n_items, std::vector<std::size_t> row_offsets,
                                   std::vector<Entry> entries, SimilarityStrategy strategy, std::size_t k)
    : n_items_(n_items),
      offsets_(std::move(row_offsets)),
      entries_(std::move(entries)),
      strategy_(strategy),
      k_(strategy == SimilarityStrategy::topk ? k : 0) {
    if (offsets_.size() != n_items_ + 1 || offsets_.front() != 0 || offsets_.back() != entries_.size()) {
        throw ContractError("similarity matrix: malformed row offsets");
    }
    if (strategy_ == SimilarityStrategy::topk && k_ == 0) {
        throw ContractError("similarity matrix: topk strategy requires k >= 1");
    }
    for (std::size_t i = 0; i < n_items_; ++i) {
        if (offsets_[i] > offsets_[i + 1]) throw ContractError("similarity matrix: decreasing row offsets");
        if (strategy_ == SimilarityStrategy::topk && offsets_[i + 1] - offsets_[i] > k_) {
            throw ContractError("similarity matrix: row " + std::to_string(i) + " exceeds k entries");
        }
        for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
            const auto& entry = entries_[e];
            if (entry.column >= n_items_ || entry.column == i) {
                throw ContractError("similarity matrix: bad column in row " + std::to_string(i));
            }
            if (e > offsets_[i] && entries_[e - 1].column >= entry.column) {
                throw ContractError("similarity matrix: unsorted row " + std::to_string(i));
            }
            if (!(entry.value > 0.0 && entry.value <= 1.0)) {
                throw ContractError("similarity matrix: value out of (0, 1] in row " + std::to_string(i));
            }
        }
    }
}

std::span<const SimilarityMatrix::Entry> SimilarityMatrix::row(ItemIndex i) const {
    if (i >= n_items_) throw ContractError("similarity row out of range");
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

double SimilarityMatrix::at(ItemIndex i, ItemIndex j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.begin(), r.end(), j,
                                     [](const Entry& e, ItemIndex col) { return e.column < col; });
    return it != r.end() && it->column == j ? it->value : 0.0;
}

SimilarityMatrix SimilarityMatrix::padded_to(std::size_t n_items) const {
    if (n_items < n_items_) throw ContractError("padded_to cannot shrink a similarity matrix");
    auto offsets = offsets_;
    offsets.resize(n_items + 1, entries_.size());
    return SimilarityMatrix(n_items, std::move(offsets), entries_, strategy_, k_);
}

namespace {

SimilarityMatrix assemble(std::size_t n_items, std::vector<std::vector<SimilarityMatrix::Entry>>& rows,
                          SimilarityStrategy strategy, std::size_t k) {
    std::vector<std::size_t> offsets(n_items + 1, 0);
    for (std::size_t i = 0; i < n_items; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
    std::vector<SimilarityMatrix::Entry> entries;
    entries.reserve(offsets.back());
    for (auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
    return SimilarityMatrix(n_items, std::move(offsets), std::move(entries), strategy, k);
}

} // namespace

SimilarityMatrix cosine_similarity(const UserItemMatrix& m, unsigned threads) {
    const std::size_t n_items = m.n_items;

    std::vector<std::vector<UserIndex>> users_of_item(n_items);
    for (std::size_t u = 0; u < m.rows.size(); ++u) {
        for (const auto i : m.rows[u]) users_of_item[i].push_back(static_cast<UserIndex>(u));
    }
    std::vector<double> root(n_items);
    for (std::size_t i = 0; i < n_items; ++i) root[i] = std::sqrt(static_cast<double>(users_of_item[i].size()));

    std::vector<std::vector<SimilarityMatrix::Entry>> rows(n_items);
    // One co-occurrence buffer per contiguous chunk of rows.
    const unsigned workers = std::max(1u, std::min<unsigned>(threads == 0 ? default_threads() : threads,
                                                             static_cast<unsigned>(std::max<std::size_t>(n_items, 1))));
    const std::size_t chunk = (n_items + workers - 1) / workers;
    parallel_for(workers, workers, [&](std::size_t w) {
        std::vector<std::uint32_t> overlap(n_items, 0);
        std::vector<ItemIndex> touched;
        const std::size_t end = std::min(n_items, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) {
            touched.clear();
            for (const auto u : users_of_item[i]) {
                for (const auto j : m.rows[u]) {
                    if (j == i) continue;
                    if (overlap[j]++ == 0) touched.push_back(j);
                }
            }
            std::sort(touched.begin(), touched.end());
            auto& row = rows[i];
            row.reserve(touched.size());
            for (const auto j : touched) {
                const double sim = static_cast<double>(overlap[j]) / (root[i] * root[j]);
                row.push_back({j, std::min(sim, 1.0)});
                overlap[j] = 0;
            }
        }
    });
    return assemble(n_items, rows, SimilarityStrategy::full, 0);
}

SimilarityMatrix truncate_topk(const SimilarityMatrix& s, std::size_t k, unsigned threads) {
    if (s.strategy() != SimilarityStrategy::full) throw ContractError("truncate_topk expects a full matrix");
    if (k == 0) throw ContractError("truncate_topk requires k >= 1");

    const std::size_t n_items = s.n_items();
    std::vector<std::vector<SimilarityMatrix::Entry>> rows(n_items);
    parallel_for(n_items, threads, [&](std::size_t i) {
        const auto src = s.row(static_cast<ItemIndex>(i));
        std::vector<SimilarityMatrix::Entry> row(src.begin(), src.end());
        if (row.size() > k) {
            std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end(),
                             [](const auto& a, const auto& b) {
                                 return a.value != b.value ? a.value > b.value : a.column < b.column;
                             });
            row.resize(k);
            std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.column < b.column; });
        }
        rows[i] = std::move(row);
    });
    return assemble(n_items, rows, SimilarityStrategy::topk, k);
}

void write_similarity(std::ostream& out, const SimilarityMatrix& s) {
    out << "items=" << s.n_items() << " strategy=" << (s.strategy() == SimilarityStrategy::full ? "full" : "topk")
        << " k=" << s.k() << '\n';
    for (std::size_t i = 0; i < s.n_items(); ++i) {
        for (const auto& e : s.row(static_cast<ItemIndex>(i))) {
            out << i << '\t' << e.column << '\t' << format_full(e.value) << '\n';
        }
    }
}

void write_similarity(const std::filesystem::path& path, const SimilarityMatrix& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_similarity(out, s);
    if (!out) throw IoError("write failed for " + path.string());
}

SimilarityMatrix read_similarity(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header in " + source, 1);
    std::size_t n_items = 0;
    std::size_t k = 0;
    std::string strategy;
    {
        std::istringstream header(line);
        std::string field;
        while (header >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) throw ParseError("bad header field '" + field + "'", 1);
            const auto key = field.substr(0, eq);
            const auto value = field.substr(eq + 1);
            try {
                if (key == "items") n_items = std::stoull(value);
                else if (key == "k") k = std::stoull(value);
                else if (key == "strategy") strategy = value;
            } catch (const std::exception&) {
                throw ParseError("bad header value '" + field + "'", 1);
            }
        }
    }
    if (strategy != "full" && strategy != "topk") throw ParseError("unknown strategy '" + strategy + "'", 1);

    std::vector<std::vector<SimilarityMatrix::Entry>> rows(n_items);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::size_t r = 0;
        std::size_t c = 0;
        std::string value_text;
        double value = 0.0;
        if (!(fields >> r >> c >> value_text) || !parse_double(value_text, value)) {
            throw ParseError("malformed similarity entry", line_no);
        }
        if (r >= n_items) throw ParseError("row index out of range", line_no);
        rows[r].push_back({static_cast<ItemIndex>(c), value});
    }
    return assemble(n_items, rows, strategy == "full" ? SimilarityStrategy::full : SimilarityStrategy::topk, k);
}

SimilarityMatrix read_similarity(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_similarity(in, path.string());
}

} // namespace iknn

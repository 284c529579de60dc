#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rep/core.hpp"

namespace rep {

struct CorruptJournal : std::runtime_error {
    CorruptJournal(const std::string& what, std::uint64_t last_good)
        : std::runtime_error(what), last_good_sequence(last_good) {}
    std::uint64_t last_good_sequence;
};

struct RecordFilter {
    std::optional<TransferStatus> status;
    std::optional<Site> source;
    std::optional<Site> destination;
    std::optional<std::string> dataset;  // formatted path
};

/// Tracking table backed by an append-only journal of full-record snapshots.
/// Single writer; replaying the journal reproduces the in-memory table.
class Table {
public:
    static Table open(const std::string& location);
    ~Table();

    Table(Table&&) noexcept;
    Table& operator=(Table&&) noexcept;
    Table(const Table&) = delete;
    Table& operator=(const Table&) = delete;

    /// Append the record; enforces status-transition legality. Returns the
    /// sequence number. The line is flushed and fsynced before return.
    std::uint64_t upsert(const TransferRecord& r);

    /// Tombstone a row (used when a path is split into children).
    std::uint64_t remove(const DatasetPath& dataset, Site destination);

    std::vector<TransferRecord> query(const RecordFilter& f = {}) const;

    /// Visit every current row in deterministic order without copying.
    template <typename F>
    void for_each(F&& f) const {
        for (const auto& key : order_) f(rows_.at(key));
    }
    std::optional<TransferRecord> find(const DatasetPath& dataset, Site destination) const;
    std::size_t size() const { return rows_.size(); }
    std::uint64_t last_sequence() const { return seq_; }

    /// Rewrite the journal with one entry per current row.
    void compact();

    void close();

private:
    Table() = default;
    void append_line(const std::string& body);

    std::string location_;
    std::FILE* file_ = nullptr;
    std::uint64_t seq_ = 0;
    std::map<std::string, TransferRecord> rows_;  // key: dataset|dest
    std::vector<std::string> order_;              // first-insertion order of keys
};

std::string record_key(const DatasetPath& dataset, Site destination);

/// Journal line serialization; field order is part of the public contract.
std::string encode_record(std::uint64_t seq, SimMs time, bool tombstone,
                          const TransferRecord& r);

}  // namespace rep

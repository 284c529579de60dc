#include "rep/store.hpp"

#include <zlib.h>

#include <cerrno>
#include <cinttypes>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#ifdef _WIN32
#include <io.h>
#define rep_fileno _fileno
#else
#include <unistd.h>
#define rep_fileno fileno
#endif

namespace rep {

namespace {

std::uint32_t line_crc(const std::string& body) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                static_cast<uInt>(body.size())));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '|') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string format_rate(double r) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", r);
    return buf;
}

}  // namespace

std::string record_key(const DatasetPath& dataset, Site destination) {
    return format_drs_path(dataset) + "|" + site_key(destination);
}

std::string encode_record(std::uint64_t seq, SimMs time, bool tombstone,
                          const TransferRecord& r) {
    std::ostringstream os;
    os << seq << '|' << time << '|' << (tombstone ? 'R' : 'U') << '|'
       << format_drs_path(r.dataset) << '|' << site_key(r.source) << '|'
       << site_key(r.destination) << '|' << r.uuid << '|' << r.requested << '|'
       << r.completed << '|' << status_key(r.status) << '|' << r.directories << '|'
       << r.files << '|' << format_rate(r.rate) << '|' << r.faults << '|'
       << r.bytes_transferred << '|' << r.attempts << '|'
       << (r.missing_metadata ? 1 : 0);
    return os.str();
}

Table Table::open(const std::string& location) {
    Table t;
    t.location_ = location;

    std::ifstream in(location);
    if (in) {
        std::string line;
        std::size_t lineno = 0;
        bool torn_tail = false;
        std::uintmax_t good_bytes = 0;  // offset just past the last intact line
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) {
                good_bytes += 1;
                continue;
            }
            auto fields = split_fields(line);
            bool torn = fields.size() != 18;
            std::uint64_t seq = 0;
            std::uint32_t crc = 0;
            if (!torn) {
                try {
                    seq = std::stoull(fields[0]);
                    crc = static_cast<std::uint32_t>(std::stoul(fields[17]));
                } catch (...) {
                    torn = true;
                }
            }
            if (!torn) {
                std::string body = line.substr(0, line.rfind('|'));
                if (line_crc(body) != crc) torn = true;
            }
            if (torn) {
                // a torn final line is discarded; anywhere else it is corruption
                std::string rest;
                if (std::getline(in, rest))
                    throw CorruptJournal("corrupt journal line " +
                                             std::to_string(lineno) + " in " + location,
                                         t.seq_);
                std::fprintf(stderr,
                             "warning: discarding torn final journal line %zu in %s\n",
                             lineno, location.c_str());
                torn_tail = true;
                break;
            }
            if (seq <= t.seq_)
                throw CorruptJournal("non-increasing sequence at line " +
                                         std::to_string(lineno) + " in " + location,
                                     t.seq_);
            TransferRecord r;
            try {
                r.dataset = dataset_path_from_formatted(fields[3]);
                r.source = site_from_key(fields[4]);
                r.destination = site_from_key(fields[5]);
                r.uuid = fields[6];
                r.requested = std::stoll(fields[7]);
                r.completed = std::stoll(fields[8]);
                r.status = status_from_key(fields[9]);
                r.directories = std::stoull(fields[10]);
                r.files = std::stoull(fields[11]);
                r.rate = std::stod(fields[12]);
                r.faults = std::stoull(fields[13]);
                r.bytes_transferred = std::stoull(fields[14]);
                r.attempts = static_cast<std::uint32_t>(std::stoul(fields[15]));
                r.missing_metadata = fields[16] == "1";
            } catch (const std::exception& e) {
                throw CorruptJournal("unparseable journal line " +
                                         std::to_string(lineno) + ": " + e.what(),
                                     t.seq_);
            }
            t.seq_ = seq;
            std::string key = fields[3] + "|" + fields[5];
            if (fields[2] == "R") {
                t.rows_.erase(key);
                std::erase(t.order_, key);
            } else {
                if (!t.rows_.count(key)) t.order_.push_back(key);
                t.rows_[key] = std::move(r);
            }
            good_bytes += line.size() + 1;
        }
        in.close();
        if (torn_tail) {
            // drop the torn bytes so the next append starts on a clean line
            std::error_code ec;
            std::filesystem::resize_file(location, good_bytes, ec);
            if (ec)
                throw std::runtime_error("cannot truncate torn journal " + location +
                                         ": " + ec.message());
        }
    }

    t.file_ = std::fopen(location.c_str(), "ab");
    if (!t.file_)
        throw std::runtime_error("cannot open journal for append: " + location +
                                 ": " + std::strerror(errno));
    return t;
}

Table::~Table() { close(); }

Table::Table(Table&& o) noexcept
    : location_(std::move(o.location_)),
      file_(o.file_),
      seq_(o.seq_),
      rows_(std::move(o.rows_)),
      order_(std::move(o.order_)) {
    o.file_ = nullptr;
}

Table& Table::operator=(Table&& o) noexcept {
    if (this != &o) {
        close();
        location_ = std::move(o.location_);
        file_ = o.file_;
        seq_ = o.seq_;
        rows_ = std::move(o.rows_);
        order_ = std::move(o.order_);
        o.file_ = nullptr;
    }
    return *this;
}

void Table::close() {
    if (file_) {
        std::fflush(file_);
        ::fsync(rep_fileno(file_));
        std::fclose(file_);
        file_ = nullptr;
    }
}

void Table::append_line(const std::string& body) {
    std::string line = body + "|" + std::to_string(line_crc(body)) + "\n";
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size())
        throw std::runtime_error("journal write failed: " + location_);
    std::fflush(file_);
    ::fsync(rep_fileno(file_));
}

std::uint64_t Table::upsert(const TransferRecord& r) {
    const std::string key = record_key(r.dataset, r.destination);
    auto it = rows_.find(key);
    TransferStatus from = it == rows_.end() ? TransferStatus::Null : it->second.status;
    if (!legal_transition(from, r.status))
        throw IllegalTransition("illegal transition " + status_key(from) + " -> " +
                                status_key(r.status) + " for " + key);
    ++seq_;
    SimMs t = r.completed > 0 ? r.completed : r.requested;
    append_line(encode_record(seq_, t, false, r));
    if (it == rows_.end()) order_.push_back(key);
    rows_[key] = r;
    return seq_;
}

std::uint64_t Table::remove(const DatasetPath& dataset, Site destination) {
    const std::string key = record_key(dataset, destination);
    auto it = rows_.find(key);
    if (it == rows_.end()) throw UnknownPath("no row to remove: " + key);
    ++seq_;
    TransferRecord tomb;
    tomb.dataset = dataset;
    tomb.destination = destination;
    append_line(encode_record(seq_, 0, true, tomb));
    rows_.erase(it);
    std::erase(order_, key);
    return seq_;
}

std::vector<TransferRecord> Table::query(const RecordFilter& f) const {
    std::vector<TransferRecord> out;
    for (const auto& key : order_) {
        const TransferRecord& r = rows_.at(key);
        if (f.status && r.status != *f.status) continue;
        if (f.source && r.source != *f.source) continue;
        if (f.destination && r.destination != *f.destination) continue;
        if (f.dataset && format_drs_path(r.dataset) != *f.dataset) continue;
        out.push_back(r);
    }
    return out;
}

std::optional<TransferRecord> Table::find(const DatasetPath& dataset,
                                          Site destination) const {
    auto it = rows_.find(record_key(dataset, destination));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
}

void Table::compact() {
    std::string tmp = location_ + ".compact";
    {
        std::FILE* old = file_;
        file_ = std::fopen(tmp.c_str(), "wb");
        if (!file_) {
            file_ = old;
            throw std::runtime_error("cannot write compacted journal: " + tmp);
        }
        std::uint64_t s = 0;
        for (const auto& key : order_) {
            const TransferRecord& r = rows_.at(key);
            SimMs t = r.completed > 0 ? r.completed : r.requested;
            append_line(encode_record(++s, t, false, r));
        }
        std::fclose(file_);
        file_ = old;
        seq_ = s;
    }
    close();
    if (std::rename(tmp.c_str(), location_.c_str()) != 0)
        throw std::runtime_error("cannot replace journal: " + location_);
    file_ = std::fopen(location_.c_str(), "ab");
    if (!file_) throw std::runtime_error("cannot reopen journal: " + location_);
}

}  // namespace rep

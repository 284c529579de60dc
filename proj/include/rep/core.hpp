#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rep/catalog.hpp"

namespace rep {

/// Simulation clock value, integer milliseconds.
using SimMs = std::int64_t;

enum class Site { SourceHub, LcfA, LcfB };

constexpr Site kAllSites[] = {Site::SourceHub, Site::LcfA, Site::LcfB};

std::string site_key(Site s);                  // stable identifier: HUB, LCF_A, LCF_B
Site site_from_key(const std::string& key);
std::string site_display_name(Site s);         // defaults LLNL, ALCF, OLCF
void set_site_display_name(Site s, std::string name);

struct Route {
    Site source;
    Site destination;
    bool operator==(const Route&) const = default;
    auto operator<=>(const Route&) const = default;
};

std::string route_key(const Route& r);

enum class TransferStatus {
    Null,
    Queued,
    Active,
    Succeeded,
    Failed,
    Paused,
    PermanentFailed,
};

std::string status_key(TransferStatus s);
TransferStatus status_from_key(const std::string& key);

bool is_terminal(TransferStatus s);
bool legal_transition(TransferStatus from, TransferStatus to);

struct IllegalTransition : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyCatalog : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One row of the tracking table: a dataset path bound for one destination.
struct TransferRecord {
    DatasetPath dataset;
    Site source = Site::SourceHub;
    Site destination = Site::LcfA;
    std::string uuid;           // backend transfer id, empty until submitted
    SimMs requested = 0;
    SimMs completed = 0;
    TransferStatus status = TransferStatus::Null;
    std::uint64_t directories = 0;
    std::uint64_t files = 0;
    double rate = 0.0;          // lifetime mean, B/s
    std::uint64_t faults = 0;
    std::uint64_t bytes_transferred = 0;
    std::uint32_t attempts = 0;  // submissions so far, drives the retry budget
    bool missing_metadata = false;

    Route route() const { return {source, destination}; }
};

/// Rows for a fresh plan: one NULL row per (path, destination), hub-sourced.
std::vector<TransferRecord> build_plan(const Catalog& catalog,
                                       const std::vector<Site>& destinations);

}  // namespace rep

#include "rep/core.hpp"

#include <array>
#include <set>

namespace rep {

namespace {
std::array<std::string, 3> g_display = {"LLNL", "ALCF", "OLCF"};
}

std::string site_key(Site s) {
    switch (s) {
        case Site::SourceHub: return "HUB";
        case Site::LcfA: return "LCF_A";
        case Site::LcfB: return "LCF_B";
    }
    return "?";
}

Site site_from_key(const std::string& key) {
    if (key == "HUB") return Site::SourceHub;
    if (key == "LCF_A") return Site::LcfA;
    if (key == "LCF_B") return Site::LcfB;
    throw std::runtime_error("unknown site key: " + key);
}

std::string site_display_name(Site s) { return g_display[static_cast<int>(s)]; }

void set_site_display_name(Site s, std::string name) {
    g_display[static_cast<int>(s)] = std::move(name);
}

std::string route_key(const Route& r) {
    return site_key(r.source) + ">" + site_key(r.destination);
}

std::string status_key(TransferStatus s) {
    switch (s) {
        case TransferStatus::Null: return "NULL";
        case TransferStatus::Queued: return "QUEUED";
        case TransferStatus::Active: return "ACTIVE";
        case TransferStatus::Succeeded: return "SUCCEEDED";
        case TransferStatus::Failed: return "FAILED";
        case TransferStatus::Paused: return "PAUSED";
        case TransferStatus::PermanentFailed: return "PERMANENT_FAILED";
    }
    return "?";
}

TransferStatus status_from_key(const std::string& key) {
    if (key == "NULL") return TransferStatus::Null;
    if (key == "QUEUED") return TransferStatus::Queued;
    if (key == "ACTIVE") return TransferStatus::Active;
    if (key == "SUCCEEDED") return TransferStatus::Succeeded;
    if (key == "FAILED") return TransferStatus::Failed;
    if (key == "PAUSED") return TransferStatus::Paused;
    if (key == "PERMANENT_FAILED") return TransferStatus::PermanentFailed;
    throw std::runtime_error("unknown status key: " + key);
}

bool is_terminal(TransferStatus s) {
    return s == TransferStatus::Succeeded || s == TransferStatus::PermanentFailed;
}

bool legal_transition(TransferStatus from, TransferStatus to) {
    using S = TransferStatus;
    if (from == to) return true;  // idempotent re-record of the same state
    switch (from) {
        case S::Null: return to == S::Queued;
        case S::Queued: return to == S::Active;
        case S::Active:
            return to == S::Succeeded || to == S::Failed || to == S::Paused;
        case S::Paused: return to == S::Active;
        case S::Failed: return to == S::Queued || to == S::PermanentFailed;
        case S::Succeeded:
        case S::PermanentFailed: return false;
    }
    return false;
}

std::vector<TransferRecord> build_plan(const Catalog& catalog,
                                       const std::vector<Site>& destinations) {
    if (catalog.paths().empty()) throw EmptyCatalog("catalog has no paths");
    if (destinations.empty())
        throw std::invalid_argument("destinations must be non-empty");
    std::set<Site> uniq(destinations.begin(), destinations.end());
    if (uniq.size() != destinations.size())
        throw std::invalid_argument("destinations must be distinct");
    if (uniq.count(Site::SourceHub))
        throw std::invalid_argument("destinations must exclude the source hub");

    std::vector<TransferRecord> rows;
    rows.reserve(catalog.paths().size() * destinations.size());
    for (const auto& p : catalog.paths()) {
        for (Site d : destinations) {
            TransferRecord r;
            r.dataset = p;
            r.source = Site::SourceHub;
            r.destination = d;
            r.status = TransferStatus::Null;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

}  // namespace rep

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rep/catalog.hpp"
#include "rep/core.hpp"

namespace rep {

struct UnknownTransfer : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SourceMissingData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SiteSpec {
    Site site = Site::SourceHub;
    double egress_cap = 0;   // B/s
    double ingress_cap = 0;  // B/s
    double scan_cost = 0;    // seconds per 1000 entries
    std::uint64_t scan_entry_cap = UINT64_MAX;
    std::vector<std::pair<SimMs, SimMs>> maintenance;  // [start, end) windows, sorted
};

struct FaultModel {
    double transient_rate = 0;        // expected transient faults per transfer
    double transient_delay_s = 0;     // stall per transient fault
    double file_corruption_prob = 0;  // first-checksum failure probability per file
    double persistent_fail_prob = 0;  // probability a path is unreadable at first
    double persistent_autofix_after_s = 0;  // sim time at which unreadable paths heal
    double missing_metadata_prob = 0;  // transfers reported without fault metadata
};

struct FabricConfig {
    std::map<Site, SiteSpec> sites;
    std::map<Route, double> route_caps;  // B/s
    FaultModel faults;
    std::uint64_t seed = 0;

    static FabricConfig from_json_file(const std::string& path);
    void validate() const;
};

constexpr double kGiB = 1073741824.0;  // rates are quoted in 2^30 B/s

struct TransferStatusReport {
    std::string uuid;
    TransferStatus status = TransferStatus::Queued;
    std::uint64_t directories = 0;
    std::uint64_t files = 0;
    std::uint64_t bytes_transferred = 0;
    std::uint64_t faults = 0;
    double rate = 0;  // lifetime mean, B/s
    std::optional<std::string> paused_reason;
    std::string failure_reason;  // "SCAN_OOM", "UNREADABLE", "" when not failed
    bool missing_metadata = false;
};

enum class EventKind {
    Submit,
    ScanStart,
    ScanDone,
    ScanOom,
    BytesProgress,
    Fault,
    FileRetransmit,
    Pause,
    Resume,
    Succeed,
    Fail,
};

std::string event_kind_key(EventKind k);
EventKind event_kind_from_key(const std::string& key);

struct EventLogEntry {
    SimMs time = 0;
    EventKind kind = EventKind::Submit;
    std::string uuid;
    Route route{Site::SourceHub, Site::LcfA};
    std::string path;
    std::uint64_t bytes = 0;  // delta wire bytes for progress; payload for Succeed
    std::uint64_t files = 0;
    std::uint64_t directories = 0;
};

std::string encode_event(const EventLogEntry& e);
EventLogEntry decode_event(const std::string& line);
std::vector<EventLogEntry> load_event_log(const std::string& file);

/// Transfer backend the scheduler drives. submit/poll/advance are serialized
/// by the caller.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string submit(Site source, Site destination, const DatasetPath& path) = 0;
    virtual TransferStatusReport poll(const std::string& uuid) = 0;
    virtual std::vector<EventLogEntry> advance(SimMs until) = 0;
    virtual bool endpoint_paused(Site s, SimMs t) const = 0;
    virtual SimMs now() const = 0;
};

/// Deterministic discrete-event simulated transfer fabric.
///
/// Bandwidth: each unpaused transfer in its data phase receives
/// min(egress/n_src, ingress/n_dst, route_cap/n_route), with equal split
/// recomputed at every event boundary. Scans and fault stalls move no bytes.
class SimFabric : public Backend {
public:
    SimFabric(FabricConfig config, const Catalog& catalog);

    std::string submit(Site source, Site destination, const DatasetPath& path) override;
    TransferStatusReport poll(const std::string& uuid) override;
    std::vector<EventLogEntry> advance(SimMs until) override;
    bool endpoint_paused(Site s, SimMs t) const override;
    SimMs now() const override { return now_; }

    void set_maintenance(Site s, std::vector<std::pair<SimMs, SimMs>> windows);

    /// Formatted dataset paths fully delivered to a site.
    const std::set<std::string>& holdings(Site s) const;
    bool site_holds(Site s, const DatasetPath& path) const;

    const FabricConfig& config() const { return config_; }

    /// Full engine state, for checkpoint/resume.
    void save_state(const std::string& file) const;
    void load_state(const std::string& file);

private:
    struct Xfer {
        std::uint64_t index = 0;
        std::string uuid;
        Route route{Site::SourceHub, Site::LcfA};
        DatasetPath path;
        TransferStatus status = TransferStatus::Queued;
        int phase = 0;  // 0 scan, 1 data, 2 done
        SimMs submitted = 0;
        SimMs active_start = 0;
        SimMs completed = 0;
        double scan_total_ms = 0;
        double scan_done_ms = 0;
        bool scan_oom = false;
        double scan_oom_at_ms = 0;
        bool unreadable = false;
        std::uint64_t payload_bytes = 0;
        std::uint64_t wire_total = 0;
        double wire_done = 0;
        std::uint64_t last_progress_mark = 0;  // floor(wire_done) at last progress event
        std::uint64_t faults = 0;
        std::vector<double> stalls;       // wire-byte thresholds, ascending, unconsumed
        std::vector<double> retransmits;  // likewise, for corrupted-file events
        double stall_remaining_ms = 0;
        std::uint64_t manifest_files = 0;
        std::uint64_t manifest_dirs = 0;
        std::string failure_reason;
        bool missing_metadata = false;
    };

    bool route_paused(const Route& r, SimMs t) const;
    void log(std::vector<EventLogEntry>& out, SimMs t, EventKind k, const Xfer& x,
             std::uint64_t bytes = 0, std::uint64_t files = 0,
             std::uint64_t dirs = 0);
    void finish_success(std::vector<EventLogEntry>& out, Xfer& x, SimMs t);
    void finish_failure(std::vector<EventLogEntry>& out, Xfer& x, SimMs t,
                        const std::string& reason, EventKind pre = EventKind::Fail);

    FabricConfig config_;
    const Catalog* catalog_;
    SimMs now_ = 0;
    std::uint64_t next_index_ = 0;
    std::map<std::uint64_t, Xfer> xfers_;  // ordered by submission index
    std::map<std::string, std::uint64_t> by_uuid_;
    std::map<Site, std::set<std::string>> holdings_;
};

}  // namespace rep

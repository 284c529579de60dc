#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rep/catalog.hpp"
#include "rep/core.hpp"
#include "rep/simnet.hpp"
#include "rep/store.hpp"

namespace rep {

struct UnsplittablePath : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchedulerPolicy {
    int per_route_active_limit = 2;
    int retry_limit = 5;
    bool split_on_scan_oom = true;
    double poll_interval_s = 30;
    bool cascade_enabled = true;

    static SchedulerPolicy from_json_file(const std::string& path);
    void validate() const;
};

struct Action {
    enum class Kind { Submit, Update, Split, Alert, Terminate };
    Kind kind = Kind::Update;
    SimMs time = 0;
    Route route{Site::SourceHub, Site::LcfA};
    std::string path;
    std::string detail;  // uuid, status, or failure reason
};

std::string encode_action(const Action& a);

/// Source for the next transfer of `path`: the LCF already holding it when
/// cascading is on, otherwise the hub.
Site choose_source(const DatasetPath& path, const Table& table, bool cascade_enabled);

/// True if a row (q, site) with q == path or an ancestor of path has SUCCEEDED.
bool succeeded_at(const Table& table, const DatasetPath& path, Site site);

/// Resolution for a FAILED row: split, requeue (stay FAILED), or give up.
enum class FailureResolution { Requeue, Split, PermanentFail };
FailureResolution handle_failed(const TransferRecord& r, const SchedulerPolicy& policy,
                                const std::string& failure_reason);

/// Immediate children of `path`; throws UnsplittablePath if the subtree cannot
/// be partitioned into child directories.
std::vector<DatasetPath> split_path(const DatasetPath& path, const Catalog& catalog);

/// One NULL row per (new path, destination); returns rows added.
std::size_t ingest_new_paths(Table& table, const Catalog& catalog,
                             const std::vector<DatasetPath>& paths,
                             const std::vector<Site>& destinations);

/// One pass of the control loop at the backend's current sim time. Applies
/// every action (submissions, table updates, splits) before returning them.
std::vector<Action> step(Table& table, Backend& backend, const Catalog& catalog,
                         const SchedulerPolicy& policy);

struct RunSummary {
    SimMs elapsed_ms = 0;
    std::size_t rows = 0;
    std::size_t succeeded = 0;
    std::size_t permanent_failed = 0;
    std::uint64_t total_faults = 0;
    bool terminated = false;  // false when stopped early by `until`
};

struct RunOptions {
    std::optional<SimMs> until;  // stop (checkpointably) once sim time reaches this
    std::ostream* action_log = nullptr;
    std::function<void(const std::vector<EventLogEntry>&)> event_sink;
};

RunSummary run(Table& table, Backend& backend, const Catalog& catalog,
               const SchedulerPolicy& policy, const RunOptions& opts = {});

}  // namespace rep

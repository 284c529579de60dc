#include "rep/scheduler.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rep {

using nlohmann::json;

SchedulerPolicy SchedulerPolicy::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read policy file: " + path);
    json j = json::parse(in);
    SchedulerPolicy p;
    p.per_route_active_limit = j.value("per_route_active_limit", 2);
    p.retry_limit = j.value("retry_limit", 5);
    p.split_on_scan_oom = j.value("split_on_scan_oom", true);
    p.poll_interval_s = j.value("poll_interval_s", 30.0);
    p.cascade_enabled = j.value("cascade_enabled", true);
    p.validate();
    return p;
}

void SchedulerPolicy::validate() const {
    if (per_route_active_limit < 1)
        throw InvalidSpec("per_route_active_limit must be >= 1");
    if (retry_limit < 0) throw InvalidSpec("retry_limit must be >= 0");
    if (poll_interval_s <= 0) throw InvalidSpec("poll_interval_s must be > 0");
}

std::string encode_action(const Action& a) {
    const char* kind = "?";
    switch (a.kind) {
        case Action::Kind::Submit: kind = "SUBMIT"; break;
        case Action::Kind::Update: kind = "UPDATE"; break;
        case Action::Kind::Split: kind = "SPLIT"; break;
        case Action::Kind::Alert: kind = "ALERT"; break;
        case Action::Kind::Terminate: kind = "TERMINATE"; break;
    }
    std::ostringstream os;
    os << a.time << '|' << kind << '|' << route_key(a.route) << '|' << a.path << '|'
       << a.detail;
    return os.str();
}

bool succeeded_at(const Table& table, const DatasetPath& path, Site site) {
    if (auto r = table.find(path, site);
        r && r->status == TransferStatus::Succeeded)
        return true;
    // an ancestor row delivered the whole subtree
    std::string fp = format_drs_path(path);
    for (std::size_t i = fp.size(); i > 1; --i) {
        if (fp[i - 1] != '/') continue;
        DatasetPath anc = dataset_path_from_formatted(fp.substr(0, i - 1));
        if (auto r = table.find(anc, site);
            r && r->status == TransferStatus::Succeeded)
            return true;
    }
    return false;
}

Site choose_source(const DatasetPath& path, const Table& table, bool cascade_enabled) {
    if (cascade_enabled) {
        if (succeeded_at(table, path, Site::LcfA)) return Site::LcfA;
        if (succeeded_at(table, path, Site::LcfB)) return Site::LcfB;
    }
    return Site::SourceHub;
}

FailureResolution handle_failed(const TransferRecord& r, const SchedulerPolicy& policy,
                                const std::string& failure_reason) {
    if (failure_reason == "SCAN_OOM" && policy.split_on_scan_oom)
        return FailureResolution::Split;
    if (static_cast<int>(r.attempts) < policy.retry_limit)
        return FailureResolution::Requeue;
    return FailureResolution::PermanentFail;
}

std::vector<DatasetPath> split_path(const DatasetPath& path, const Catalog& catalog) {
    Manifest parent = catalog.manifest(path);
    auto children = catalog.children(path);
    if (children.empty())
        throw UnsplittablePath("leaf directory cannot be split: " +
                               format_drs_path(path));
    std::uint64_t child_bytes = 0, child_files = 0;
    for (const auto& c : children) {
        Manifest m = catalog.manifest(c);
        child_bytes += m.bytes;
        child_files += m.files;
    }
    if (child_bytes != parent.bytes || child_files != parent.files)
        throw UnsplittablePath("children do not partition " + format_drs_path(path));
    return children;
}

std::size_t ingest_new_paths(Table& table, const Catalog& catalog,
                             const std::vector<DatasetPath>& paths,
                             const std::vector<Site>& destinations) {
    std::size_t added = 0;
    for (const auto& p : paths) {
        catalog.manifest(p);  // MalformedPath/UnknownPath surface here
        for (Site d : destinations) {
            if (table.find(p, d)) continue;
            TransferRecord r;
            r.dataset = p;
            r.source = Site::SourceHub;
            r.destination = d;
            r.status = TransferStatus::Null;
            table.upsert(r);
            ++added;
        }
    }
    return added;
}

namespace {

Site other_lcf(Site s) { return s == Site::LcfA ? Site::LcfB : Site::LcfA; }

bool in_flight(TransferStatus s) {
    return s == TransferStatus::Queued || s == TransferStatus::Active ||
           s == TransferStatus::Paused;
}

int route_load(const Table& table, const Route& r) {
    int n = 0;
    table.for_each([&](const TransferRecord& row) {
        if (row.route() == r && in_flight(row.status)) ++n;
    });
    return n;
}

/// A hub-sourced submission of `path` to `dest` is allowed only if no
/// hub-sourced transfer of the same path is in flight or succeeded toward the
/// other destination; the slower hub file system is crossed once per path.
bool hub_eligible(const Table& table, const TransferRecord& row) {
    Site other = other_lcf(row.destination);
    if (auto o = table.find(row.dataset, other)) {
        if (o->source == Site::SourceHub &&
            (in_flight(o->status) || o->status == TransferStatus::Succeeded))
            return false;
    }
    return true;
}

void submit_row(Table& table, Backend& backend, TransferRecord row, Site source,
                std::vector<Action>& acts) {
    SimMs now = backend.now();
    std::string uuid = backend.submit(source, row.destination, row.dataset);
    row.source = source;
    row.uuid = uuid;
    row.requested = now;
    row.completed = 0;
    row.status = TransferStatus::Queued;
    row.directories = 0;
    row.files = 0;
    row.rate = 0;
    row.faults = 0;
    row.bytes_transferred = 0;
    row.attempts += 1;
    table.upsert(row);
    acts.push_back({Action::Kind::Submit, now, {source, row.destination},
                    format_drs_path(row.dataset), uuid});
}

/// Fill a hub-sourced route up to the concurrency limit from rows with
/// status NULL or FAILED. `allow` further restricts the candidates (used by
/// the rerouting step, which admits rows only under specific conditions).
void fill_hub_route(Table& table, Backend& backend, const SchedulerPolicy& policy,
                    Site dest, std::vector<Action>& acts,
                    const std::function<bool(const TransferRecord&)>& allow = {}) {
    SimMs now = backend.now();
    if (backend.endpoint_paused(Site::SourceHub, now) ||
        backend.endpoint_paused(dest, now))
        return;
    int load = route_load(table, {Site::SourceHub, dest});
    if (load >= policy.per_route_active_limit) return;
    std::vector<TransferRecord> candidates;
    table.for_each([&](const TransferRecord& row) {
        if (row.destination != dest) return;
        if (row.status != TransferStatus::Null && row.status != TransferStatus::Failed)
            return;
        if (allow && !allow(row)) return;
        candidates.push_back(row);
    });
    for (const auto& row : candidates) {
        if (load >= policy.per_route_active_limit) break;
        if (choose_source(row.dataset, table, policy.cascade_enabled) !=
            Site::SourceHub)
            continue;  // cascade routes handle rows already held at an LCF
        if (!hub_eligible(table, row)) continue;
        submit_row(table, backend, row, Site::SourceHub, acts);
        ++load;
    }
}

void fill_cascade_route(Table& table, Backend& backend, const SchedulerPolicy& policy,
                        Site from, Site dest, std::vector<Action>& acts) {
    SimMs now = backend.now();
    if (backend.endpoint_paused(from, now) || backend.endpoint_paused(dest, now))
        return;
    int load = route_load(table, {from, dest});
    if (load >= policy.per_route_active_limit) return;
    std::vector<TransferRecord> candidates;
    table.for_each([&](const TransferRecord& row) {
        if (row.destination != dest) return;
        if (row.status != TransferStatus::Null && row.status != TransferStatus::Failed)
            return;
        if (!succeeded_at(table, row.dataset, from)) return;
        candidates.push_back(row);
    });
    for (const auto& row : candidates) {
        if (load >= policy.per_route_active_limit) break;
        submit_row(table, backend, row, from, acts);
        ++load;
    }
}

void apply_split(Table& table, const Catalog& catalog, const TransferRecord& row,
                 std::vector<Action>& acts, SimMs now) {
    auto children = split_path(row.dataset, catalog);
    // replace rows for every destination still pending on the parent
    for (Site dest : {Site::LcfA, Site::LcfB}) {
        auto r = table.find(row.dataset, dest);
        if (!r) continue;
        if (r->status != TransferStatus::Null && r->status != TransferStatus::Failed)
            continue;
        table.remove(row.dataset, dest);
        for (const auto& c : children) {
            if (table.find(c, dest)) continue;
            TransferRecord cr;
            cr.dataset = c;
            cr.source = Site::SourceHub;
            cr.destination = dest;
            cr.status = TransferStatus::Null;
            table.upsert(cr);
        }
    }
    std::ostringstream os;
    os << children.size() << " children";
    acts.push_back({Action::Kind::Split, now, row.route(),
                    format_drs_path(row.dataset), os.str()});
}

/// Upsert through any intermediate status needed to keep the transition legal
/// (a poll can observe several backend transitions at once).
void upsert_bridged(Table& table, TransferStatus current, TransferRecord up) {
    bool needs_active =
        (current == TransferStatus::Queued || current == TransferStatus::Paused) &&
        (up.status == TransferStatus::Succeeded || up.status == TransferStatus::Failed ||
         (up.status == TransferStatus::Paused && current == TransferStatus::Queued));
    if (needs_active) {
        TransferRecord mid = up;
        mid.status = TransferStatus::Active;
        mid.completed = 0;
        table.upsert(mid);
    }
    table.upsert(up);
}

}  // namespace

std::vector<Action> step(Table& table, Backend& backend, const Catalog& catalog,
                         const SchedulerPolicy& policy) {
    std::vector<Action> acts;
    SimMs now = backend.now();

    // (a) start hub -> LCF_A transfers if possible
    fill_hub_route(table, backend, policy, Site::LcfA, acts);

    // (b) poll in-flight rows; fold backend state into the table
    std::vector<TransferRecord> inflight;
    table.for_each([&](const TransferRecord& row) {
        if (in_flight(row.status)) inflight.push_back(row);
    });
    for (const auto& row : inflight) {
        TransferStatusReport rep = backend.poll(row.uuid);
        TransferRecord up = row;
        bool changed = false;
        switch (rep.status) {
            case TransferStatus::Queued:
                break;
            case TransferStatus::Active:
            case TransferStatus::Paused:
                up.status = rep.status;
                up.directories = rep.directories;
                up.files = rep.files;
                up.bytes_transferred = rep.bytes_transferred;
                up.faults = rep.faults;
                up.rate = rep.rate;
                // a paused transfer reports no movement; skip the no-op journal line
                changed = up.status != row.status ||
                          up.bytes_transferred != row.bytes_transferred ||
                          up.faults != row.faults;
                break;
            case TransferStatus::Succeeded: {
                Manifest m = catalog.manifest(row.dataset);
                up.status = TransferStatus::Succeeded;
                up.completed = now;
                up.directories = m.directories;
                up.files = m.files;
                up.bytes_transferred = m.bytes;  // payload, not wire bytes
                up.faults = rep.faults;
                up.rate = rep.rate;
                up.missing_metadata = rep.missing_metadata;
                changed = true;
                break;
            }
            case TransferStatus::Failed: {
                up.status = TransferStatus::Failed;
                up.completed = now;
                up.faults = rep.faults;
                up.rate = rep.rate;
                up.missing_metadata = rep.missing_metadata;
                upsert_bridged(table, row.status, up);
                acts.push_back({Action::Kind::Update, now, up.route(),
                                format_drs_path(up.dataset),
                                "FAILED:" + rep.failure_reason});
                FailureResolution res = handle_failed(up, policy, rep.failure_reason);
                if (res == FailureResolution::Split) {
                    try {
                        apply_split(table, catalog, up, acts, now);
                        continue;
                    } catch (const UnsplittablePath&) {
                        res = static_cast<int>(up.attempts) < policy.retry_limit
                                  ? FailureResolution::Requeue
                                  : FailureResolution::PermanentFail;
                    }
                }
                switch (res) {
                    case FailureResolution::Requeue:
                        break;  // FAILED rows re-enter steps (a)/(c)/(d)/(e)
                    case FailureResolution::Split:
                        break;  // handled above
                    case FailureResolution::PermanentFail: {
                        up.status = TransferStatus::PermanentFailed;
                        table.upsert(up);
                        acts.push_back({Action::Kind::Alert, now, up.route(),
                                        format_drs_path(up.dataset),
                                        "retry budget exhausted after " +
                                            std::to_string(up.attempts) +
                                            " attempts"});
                        break;
                    }
                }
                continue;
            }
            default:
                break;
        }
        if (changed) {
            upsert_bridged(table, row.status, up);
            acts.push_back({Action::Kind::Update, now, up.route(),
                            format_drs_path(up.dataset), status_key(up.status)});
        }
    }

    // (c) reroute hub -> LCF_B while LCF_A is paused; a row whose LCF_A
    // counterpart is permanently failed can never arrive by cascade, so it is
    // admitted here regardless of pause state
    bool lcf_a_paused = backend.endpoint_paused(Site::LcfA, now);
    if (!lcf_a_paused) {
        table.for_each([&](const TransferRecord& row) {
            if (row.destination == Site::LcfA && row.status == TransferStatus::Paused)
                lcf_a_paused = true;
        });
    }
    fill_hub_route(table, backend, policy, Site::LcfB, acts,
                   [&](const TransferRecord& row) {
                       if (lcf_a_paused) return true;
                       auto other = table.find(row.dataset, Site::LcfA);
                       return other &&
                              other->status == TransferStatus::PermanentFailed;
                   });

    // (d)/(e) cascade between the LCFs
    if (policy.cascade_enabled) {
        fill_cascade_route(table, backend, policy, Site::LcfA, Site::LcfB, acts);
        fill_cascade_route(table, backend, policy, Site::LcfB, Site::LcfA, acts);
    }

    // (f) termination
    bool open_rows = false;
    table.for_each([&](const TransferRecord& row) {
        if (!is_terminal(row.status)) open_rows = true;
    });
    if (!open_rows)
        acts.push_back({Action::Kind::Terminate, now, {}, "", ""});
    return acts;
}

RunSummary run(Table& table, Backend& backend, const Catalog& catalog,
               const SchedulerPolicy& policy, const RunOptions& opts) {
    policy.validate();
    const SimMs poll_ms = static_cast<SimMs>(policy.poll_interval_s * 1000);
    SimMs start = backend.now();
    bool terminated = false;

    while (true) {
        auto acts = step(table, backend, catalog, policy);
        if (opts.action_log) {
            for (const auto& a : acts) *opts.action_log << encode_action(a) << "\n";
        }
        if (!acts.empty() && acts.back().kind == Action::Kind::Terminate) {
            terminated = true;
            break;
        }
        auto events = backend.advance(backend.now() + poll_ms);
        if (opts.event_sink) opts.event_sink(events);
        if (opts.until && backend.now() >= *opts.until) break;
    }

    RunSummary s;
    s.elapsed_ms = backend.now() - start;
    s.terminated = terminated;
    table.for_each([&](const TransferRecord& row) {
        ++s.rows;
        if (row.status == TransferStatus::Succeeded) ++s.succeeded;
        if (row.status == TransferStatus::PermanentFailed) ++s.permanent_failed;
        if (!row.missing_metadata) s.total_faults += row.faults;
    });
    return s;
}

}  // namespace rep

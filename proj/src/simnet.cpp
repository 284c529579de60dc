#include "rep/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace rep {

using nlohmann::json;

std::string event_kind_key(EventKind k) {
    switch (k) {
        case EventKind::Submit: return "SUBMIT";
        case EventKind::ScanStart: return "SCAN_START";
        case EventKind::ScanDone: return "SCAN_DONE";
        case EventKind::ScanOom: return "SCAN_OOM";
        case EventKind::BytesProgress: return "BYTES_PROGRESS";
        case EventKind::Fault: return "FAULT";
        case EventKind::FileRetransmit: return "FILE_RETRANSMIT";
        case EventKind::Pause: return "PAUSE";
        case EventKind::Resume: return "RESUME";
        case EventKind::Succeed: return "SUCCEED";
        case EventKind::Fail: return "FAIL";
    }
    return "?";
}

EventKind event_kind_from_key(const std::string& key) {
    static const std::map<std::string, EventKind> m = {
        {"SUBMIT", EventKind::Submit},
        {"SCAN_START", EventKind::ScanStart},
        {"SCAN_DONE", EventKind::ScanDone},
        {"SCAN_OOM", EventKind::ScanOom},
        {"BYTES_PROGRESS", EventKind::BytesProgress},
        {"FAULT", EventKind::Fault},
        {"FILE_RETRANSMIT", EventKind::FileRetransmit},
        {"PAUSE", EventKind::Pause},
        {"RESUME", EventKind::Resume},
        {"SUCCEED", EventKind::Succeed},
        {"FAIL", EventKind::Fail},
    };
    auto it = m.find(key);
    if (it == m.end()) throw std::runtime_error("unknown event kind: " + key);
    return it->second;
}

std::string encode_event(const EventLogEntry& e) {
    std::ostringstream os;
    os << e.time << '|' << event_kind_key(e.kind) << '|' << e.uuid << '|'
       << site_key(e.route.source) << '|' << site_key(e.route.destination) << '|'
       << e.path << '|' << e.bytes << '|' << e.files << '|' << e.directories;
    return os.str();
}

EventLogEntry decode_event(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == '|') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    f.push_back(cur);
    if (f.size() != 9) throw std::runtime_error("bad event line: " + line);
    EventLogEntry e;
    e.time = std::stoll(f[0]);
    e.kind = event_kind_from_key(f[1]);
    e.uuid = f[2];
    e.route = {site_from_key(f[3]), site_from_key(f[4])};
    e.path = f[5];
    e.bytes = std::stoull(f[6]);
    e.files = std::stoull(f[7]);
    e.directories = std::stoull(f[8]);
    return e;
}

std::vector<EventLogEntry> load_event_log(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read event log: " + file);
    std::vector<EventLogEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(decode_event(line));
    }
    return out;
}

namespace {

Site site_from_json(const json& j) { return site_from_key(j.get<std::string>()); }

std::vector<std::pair<SimMs, SimMs>> windows_from_json(const json& j) {
    std::vector<std::pair<SimMs, SimMs>> w;
    for (const auto& e : j) {
        // config windows are in seconds
        w.emplace_back(static_cast<SimMs>(e.at(0).get<double>() * 1000),
                       static_cast<SimMs>(e.at(1).get<double>() * 1000));
    }
    return w;
}

}  // namespace

FabricConfig FabricConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read fabric config: " + path);
    json j = json::parse(in);
    FabricConfig c;
    c.seed = j.value("seed", std::uint64_t{0});
    for (const auto& js : j.at("sites")) {
        SiteSpec s;
        s.site = site_from_json(js.at("site"));
        s.egress_cap = js.at("egress_gibps").get<double>() * kGiB;
        s.ingress_cap = js.at("ingress_gibps").get<double>() * kGiB;
        s.scan_cost = js.value("scan_cost_s_per_1000", 0.0);
        s.scan_entry_cap = js.value("scan_entry_cap", std::uint64_t{UINT64_MAX});
        if (js.contains("maintenance")) s.maintenance = windows_from_json(js["maintenance"]);
        if (js.contains("display_name"))
            set_site_display_name(s.site, js["display_name"].get<std::string>());
        c.sites[s.site] = std::move(s);
    }
    for (const auto& jr : j.at("routes")) {
        Route r{site_from_json(jr.at("source")), site_from_json(jr.at("destination"))};
        c.route_caps[r] = jr.at("cap_gibps").get<double>() * kGiB;
    }
    if (j.contains("faults")) {
        const auto& jf = j["faults"];
        c.faults.transient_rate = jf.value("transient_rate", 0.0);
        c.faults.transient_delay_s = jf.value("transient_delay_s", 0.0);
        c.faults.file_corruption_prob = jf.value("file_corruption_prob", 0.0);
        c.faults.persistent_fail_prob = jf.value("persistent_fail_prob", 0.0);
        c.faults.persistent_autofix_after_s = jf.value("persistent_autofix_after_s", 0.0);
        c.faults.missing_metadata_prob = jf.value("missing_metadata_prob", 0.0);
    }
    c.validate();
    return c;
}

void FabricConfig::validate() const {
    for (const auto& [site, s] : sites) {
        if (s.egress_cap <= 0 || s.ingress_cap <= 0)
            throw InvalidSpec("site caps must be > 0 for " + site_key(site));
        SimMs prev_end = -1;
        for (const auto& [a, b] : s.maintenance) {
            if (a >= b || a <= prev_end)
                throw InvalidSpec("maintenance windows must be sorted, non-overlapping");
            prev_end = b;
        }
    }
    for (const auto& [r, cap] : route_caps) {
        if (r.source == r.destination) throw InvalidSpec("route source == destination");
        if (cap <= 0) throw InvalidSpec("route cap must be > 0 for " + route_key(r));
    }
    auto p01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!p01(faults.file_corruption_prob) || !p01(faults.persistent_fail_prob) ||
        !p01(faults.missing_metadata_prob) ||
        faults.transient_rate < 0 || faults.transient_delay_s < 0)
        throw InvalidSpec("fault model parameters out of range");
}

SimFabric::SimFabric(FabricConfig config, const Catalog& catalog)
    : config_(std::move(config)), catalog_(&catalog) {
    config_.validate();
    for (Site s : kAllSites) holdings_[s];
}

bool SimFabric::endpoint_paused(Site s, SimMs t) const {
    auto it = config_.sites.find(s);
    if (it == config_.sites.end()) return false;
    for (const auto& [a, b] : it->second.maintenance) {
        if (t >= a && t < b) return true;
        if (t < a) break;
    }
    return false;
}

bool SimFabric::route_paused(const Route& r, SimMs t) const {
    return endpoint_paused(r.source, t) || endpoint_paused(r.destination, t);
}

void SimFabric::set_maintenance(Site s, std::vector<std::pair<SimMs, SimMs>> windows) {
    config_.sites.at(s).maintenance = std::move(windows);
    config_.validate();
}

const std::set<std::string>& SimFabric::holdings(Site s) const {
    return holdings_.at(s);
}

bool SimFabric::site_holds(Site s, const DatasetPath& path) const {
    if (s == Site::SourceHub) {
        try {
            catalog_->manifest(path);
            return true;
        } catch (const UnknownPath&) {
            return false;
        }
    }
    const std::string fp = format_drs_path(path);
    const auto& held = holdings_.at(s);
    if (held.count(fp)) return true;
    // a held ancestor covers the subtree
    for (std::size_t i = fp.size(); i > 1; --i) {
        if (fp[i - 1] == '/' && held.count(fp.substr(0, i - 1))) return true;
    }
    return false;
}

std::string SimFabric::submit(Site source, Site destination, const DatasetPath& path) {
    Manifest m = catalog_->manifest(path);  // throws UnknownPath
    if (!site_holds(source, path))
        throw SourceMissingData("site " + site_key(source) + " does not hold " +
                                format_drs_path(path));

    Xfer x;
    x.index = next_index_++;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "xfer-%06llu",
                  static_cast<unsigned long long>(x.index));
    x.uuid = buf;
    x.route = {source, destination};
    x.path = path;
    x.submitted = now_;
    x.payload_bytes = m.bytes;
    x.manifest_files = m.files;
    x.manifest_dirs = m.directories;

    const SiteSpec& src = config_.sites.at(source);
    std::uint64_t entries = scan_entries(m);
    x.scan_total_ms = std::ceil(src.scan_cost * entries);  // cost s/1000 entries -> ms
    if (entries > src.scan_entry_cap) {
        x.scan_oom = true;
        x.scan_oom_at_ms = std::ceil(src.scan_cost * src.scan_entry_cap);
    }

    const FaultModel& fm = config_.faults;
    if (source == Site::SourceHub && fm.persistent_fail_prob > 0) {
        std::uint64_t h = mix_seed(config_.seed, "broken/" + format_drs_path(path));
        if (static_cast<double>(h) / 18446744073709551616.0 < fm.persistent_fail_prob)
            x.unreadable = true;
    }

    std::mt19937_64 rng(mix_seed(config_.seed, "xfer/" + std::to_string(x.index)));
    std::uint64_t corrupt_extra = 0;
    std::uint64_t corrupt_files = 0;
    if (fm.file_corruption_prob > 0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const auto& e : m.entries) {
            if (u(rng) < fm.file_corruption_prob) {
                corrupt_extra += e.size;
                ++corrupt_files;
            }
        }
    }
    x.wire_total = x.payload_bytes + corrupt_extra;
    if (fm.transient_rate > 0) {
        // per-transfer rate is exponentially distributed around the configured
        // mean, giving the observed zero-heavy, long-tailed fault counts
        std::exponential_distribution<double> ed(1.0 / fm.transient_rate);
        std::poisson_distribution<long> pd(ed(rng));
        long k = pd(rng);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (long i = 0; i < k; ++i)
            x.stalls.push_back(u(rng) * static_cast<double>(x.wire_total));
        std::sort(x.stalls.begin(), x.stalls.end());
    }
    if (fm.missing_metadata_prob > 0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x.missing_metadata = u(rng) < fm.missing_metadata_prob;
    }
    if (corrupt_files > 0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::uint64_t i = 0; i < corrupt_files; ++i)
            x.retransmits.push_back(u(rng) * static_cast<double>(x.wire_total));
        std::sort(x.retransmits.begin(), x.retransmits.end());
    }

    std::string uuid = x.uuid;
    by_uuid_[uuid] = x.index;
    xfers_.emplace(x.index, std::move(x));
    return uuid;
}

void SimFabric::log(std::vector<EventLogEntry>& out, SimMs t, EventKind k,
                    const Xfer& x, std::uint64_t bytes, std::uint64_t files,
                    std::uint64_t dirs) {
    out.push_back({t, k, x.uuid, x.route, format_drs_path(x.path), bytes, files, dirs});
}

void SimFabric::finish_success(std::vector<EventLogEntry>& out, Xfer& x, SimMs t) {
    x.status = TransferStatus::Succeeded;
    x.phase = 2;
    x.completed = t;
    x.wire_done = static_cast<double>(x.wire_total);
    holdings_[x.route.destination].insert(format_drs_path(x.path));
    log(out, t, EventKind::Succeed, x, x.payload_bytes, x.manifest_files,
        x.manifest_dirs);
}

void SimFabric::finish_failure(std::vector<EventLogEntry>& out, Xfer& x, SimMs t,
                               const std::string& reason, EventKind pre) {
    if (pre != EventKind::Fail) log(out, t, pre, x);
    x.status = TransferStatus::Failed;
    x.phase = 2;
    x.completed = t;
    x.failure_reason = reason;
    log(out, t, EventKind::Fail, x);
}

std::vector<EventLogEntry> SimFabric::advance(SimMs until) {
    if (until < now_) throw std::invalid_argument("advance: until < now");
    std::vector<EventLogEntry> out;

    // maintenance boundaries, across all sites
    std::vector<SimMs> bounds;
    for (const auto& [site, s] : config_.sites) {
        for (const auto& [a, b] : s.maintenance) {
            bounds.push_back(a);
            bounds.push_back(b);
        }
    }
    std::sort(bounds.begin(), bounds.end());

    while (true) {
        // live transfers, in submission order
        std::vector<Xfer*> live;
        for (auto& [i, x] : xfers_) {
            if (x.phase != 2) live.push_back(&x);
        }

        // activations and pause/resume transitions at the current instant
        for (Xfer* x : live) {
            bool paused = route_paused(x->route, now_);
            if (x->status == TransferStatus::Queued) {
                x->status = TransferStatus::Active;
                x->active_start = now_;
                log(out, now_, EventKind::ScanStart, *x);
                if (paused) {
                    x->status = TransferStatus::Paused;
                    log(out, now_, EventKind::Pause, *x);
                }
            } else if (paused && x->status == TransferStatus::Active) {
                x->status = TransferStatus::Paused;
                log(out, now_, EventKind::Pause, *x);
            } else if (!paused && x->status == TransferStatus::Paused) {
                x->status = TransferStatus::Active;
                log(out, now_, EventKind::Resume, *x);
            }
        }

        // scans that finish instantly (zero cost)
        for (Xfer* x : live) {
            if (x->status != TransferStatus::Active || x->phase != 0) continue;
            double target = x->scan_oom ? x->scan_oom_at_ms : x->scan_total_ms;
            if (x->scan_done_ms >= target - 1e-9) {
                if (x->scan_oom) {
                    finish_failure(out, *x, now_, "SCAN_OOM", EventKind::ScanOom);
                } else {
                    log(out, now_, EventKind::ScanDone, *x, 0, x->manifest_files,
                        x->manifest_dirs);
                    SimMs autofix =
                        static_cast<SimMs>(config_.faults.persistent_autofix_after_s * 1000);
                    if (x->unreadable && now_ < autofix) {
                        finish_failure(out, *x, now_, "UNREADABLE");
                    } else {
                        x->phase = 1;
                    }
                }
            }
        }

        if (now_ >= until) break;

        // bandwidth shares over transfers currently moving bytes
        std::map<Site, int> n_src, n_dst;
        std::map<Route, int> n_route;
        for (Xfer* x : live) {
            if (x->status == TransferStatus::Active && x->phase == 1 &&
                x->stall_remaining_ms <= 0) {
                ++n_src[x->route.source];
                ++n_dst[x->route.destination];
                ++n_route[x->route];
            }
        }
        auto rate_of = [&](const Xfer& x) {
            double r = config_.sites.at(x.route.source).egress_cap /
                       n_src[x.route.source];
            r = std::min(r, config_.sites.at(x.route.destination).ingress_cap /
                                n_dst[x.route.destination]);
            auto rc = config_.route_caps.find(x.route);
            if (rc != config_.route_caps.end())
                r = std::min(r, rc->second / n_route[x.route]);
            return r;
        };

        // next event boundary
        SimMs next = until;
        for (SimMs b : bounds) {
            if (b > now_) {
                next = std::min(next, b);
                break;
            }
        }
        for (Xfer* x : live) {
            if (x->status != TransferStatus::Active) continue;
            if (x->phase == 0) {
                double target = x->scan_oom ? x->scan_oom_at_ms : x->scan_total_ms;
                next = std::min(next, now_ + static_cast<SimMs>(std::ceil(
                                          target - x->scan_done_ms)));
            } else if (x->stall_remaining_ms > 0) {
                next = std::min(next, now_ + static_cast<SimMs>(std::ceil(
                                          x->stall_remaining_ms)));
            } else {
                double r = rate_of(*x);
                if (r <= 0) continue;
                auto cross = [&](double threshold) {
                    double ms = (threshold - x->wire_done) / r * 1000.0;
                    return now_ + static_cast<SimMs>(std::ceil(std::max(ms, 0.0)));
                };
                if (!x->stalls.empty() && x->stalls.front() > x->wire_done)
                    next = std::min(next, cross(x->stalls.front()));
                if (!x->retransmits.empty() && x->retransmits.front() > x->wire_done)
                    next = std::min(next, cross(x->retransmits.front()));
                next = std::min(next, cross(static_cast<double>(x->wire_total)));
            }
        }
        if (next <= now_) next = now_ + 1;
        SimMs dt = next - now_;

        // progress the interval
        for (Xfer* x : live) {
            if (x->status != TransferStatus::Active) continue;
            if (x->phase == 0) {
                x->scan_done_ms += static_cast<double>(dt);
                // completion handled at top of next iteration
            } else if (x->stall_remaining_ms > 0) {
                x->stall_remaining_ms =
                    std::max(0.0, x->stall_remaining_ms - static_cast<double>(dt));
            } else {
                double r = rate_of(*x);
                x->wire_done = std::min(static_cast<double>(x->wire_total),
                                        x->wire_done + r * dt / 1000.0);
                auto mark = static_cast<std::uint64_t>(x->wire_done);
                if (mark > x->last_progress_mark) {
                    log(out, next, EventKind::BytesProgress, *x,
                        mark - x->last_progress_mark,
                        std::min(x->manifest_files,
                                 static_cast<std::uint64_t>(
                                     x->manifest_files * x->wire_done /
                                     static_cast<double>(x->wire_total))),
                        0);
                    x->last_progress_mark = mark;
                }
                bool stalled = false;
                while (!x->stalls.empty() && x->wire_done >= x->stalls.front() - 1e-6) {
                    x->stalls.erase(x->stalls.begin());
                    ++x->faults;
                    x->stall_remaining_ms += config_.faults.transient_delay_s * 1000.0;
                    log(out, next, EventKind::Fault, *x);
                    stalled = true;
                }
                while (!x->retransmits.empty() &&
                       x->wire_done >= x->retransmits.front() - 1e-6) {
                    x->retransmits.erase(x->retransmits.begin());
                    ++x->faults;
                    log(out, next, EventKind::FileRetransmit, *x);
                }
                if (!stalled && x->stall_remaining_ms <= 0 &&
                    x->wire_done >= static_cast<double>(x->wire_total) - 0.5) {
                    finish_success(out, *x, next);
                }
            }
        }
        now_ = next;
    }
    return out;
}

TransferStatusReport SimFabric::poll(const std::string& uuid) {
    auto it = by_uuid_.find(uuid);
    if (it == by_uuid_.end()) throw UnknownTransfer("unknown transfer: " + uuid);
    const Xfer& x = xfers_.at(it->second);
    TransferStatusReport r;
    r.uuid = uuid;
    r.status = x.status;
    r.faults = x.faults;
    r.bytes_transferred = static_cast<std::uint64_t>(x.wire_done);
    if (x.status == TransferStatus::Succeeded) r.bytes_transferred = x.wire_total;
    double frac = x.wire_total > 0
                      ? x.wire_done / static_cast<double>(x.wire_total)
                      : 0.0;
    if (x.phase >= 1 || x.status == TransferStatus::Succeeded) {
        r.files = static_cast<std::uint64_t>(x.manifest_files * std::min(1.0, frac));
        r.directories =
            static_cast<std::uint64_t>(x.manifest_dirs * std::min(1.0, frac));
    }
    if (x.status == TransferStatus::Succeeded) {
        r.files = x.manifest_files;
        r.directories = x.manifest_dirs;
    }
    SimMs end = x.phase == 2 ? x.completed : now_;
    if (end > x.active_start && x.status != TransferStatus::Queued) {
        r.rate = static_cast<double>(r.bytes_transferred) /
                 (static_cast<double>(end - x.active_start) / 1000.0);
    }
    if (x.status == TransferStatus::Paused) {
        if (endpoint_paused(x.route.source, now_))
            r.paused_reason = site_key(x.route.source) + " maintenance";
        else
            r.paused_reason = site_key(x.route.destination) + " maintenance";
    }
    r.failure_reason = x.failure_reason;
    r.missing_metadata = x.missing_metadata;
    return r;
}

void SimFabric::save_state(const std::string& file) const {
    json j;
    j["now"] = now_;
    j["next_index"] = next_index_;
    json jh = json::object();
    for (const auto& [site, held] : holdings_)
        jh[site_key(site)] = std::vector<std::string>(held.begin(), held.end());
    j["holdings"] = std::move(jh);
    json jx = json::array();
    for (const auto& [i, x] : xfers_) {
        json e;
        e["index"] = x.index;
        e["uuid"] = x.uuid;
        e["src"] = site_key(x.route.source);
        e["dst"] = site_key(x.route.destination);
        e["path"] = format_drs_path(x.path);
        e["status"] = status_key(x.status);
        e["phase"] = x.phase;
        e["submitted"] = x.submitted;
        e["active_start"] = x.active_start;
        e["completed"] = x.completed;
        e["scan_total_ms"] = x.scan_total_ms;
        e["scan_done_ms"] = x.scan_done_ms;
        e["scan_oom"] = x.scan_oom;
        e["scan_oom_at_ms"] = x.scan_oom_at_ms;
        e["unreadable"] = x.unreadable;
        e["payload_bytes"] = x.payload_bytes;
        e["wire_total"] = x.wire_total;
        e["wire_done"] = x.wire_done;
        e["last_progress_mark"] = x.last_progress_mark;
        e["faults"] = x.faults;
        e["stalls"] = x.stalls;
        e["retransmits"] = x.retransmits;
        e["stall_remaining_ms"] = x.stall_remaining_ms;
        e["manifest_files"] = x.manifest_files;
        e["manifest_dirs"] = x.manifest_dirs;
        e["failure_reason"] = x.failure_reason;
        e["missing_metadata"] = x.missing_metadata;
        jx.push_back(std::move(e));
    }
    j["transfers"] = std::move(jx);
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write fabric state: " + file);
    out << j.dump() << "\n";
}

void SimFabric::load_state(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read fabric state: " + file);
    json j = json::parse(in);
    now_ = j.at("now").get<SimMs>();
    next_index_ = j.at("next_index").get<std::uint64_t>();
    holdings_.clear();
    for (Site s : kAllSites) holdings_[s];
    for (const auto& [key, held] : j.at("holdings").items()) {
        for (const auto& p : held)
            holdings_[site_from_key(key)].insert(p.get<std::string>());
    }
    xfers_.clear();
    by_uuid_.clear();
    for (const auto& e : j.at("transfers")) {
        Xfer x;
        x.index = e.at("index").get<std::uint64_t>();
        x.uuid = e.at("uuid").get<std::string>();
        x.route = {site_from_key(e.at("src")), site_from_key(e.at("dst"))};
        x.path = dataset_path_from_formatted(e.at("path").get<std::string>());
        x.status = status_from_key(e.at("status"));
        x.phase = e.at("phase").get<int>();
        x.submitted = e.at("submitted").get<SimMs>();
        x.active_start = e.at("active_start").get<SimMs>();
        x.completed = e.at("completed").get<SimMs>();
        x.scan_total_ms = e.at("scan_total_ms").get<double>();
        x.scan_done_ms = e.at("scan_done_ms").get<double>();
        x.scan_oom = e.at("scan_oom").get<bool>();
        x.scan_oom_at_ms = e.at("scan_oom_at_ms").get<double>();
        x.unreadable = e.at("unreadable").get<bool>();
        x.payload_bytes = e.at("payload_bytes").get<std::uint64_t>();
        x.wire_total = e.at("wire_total").get<std::uint64_t>();
        x.wire_done = e.at("wire_done").get<double>();
        x.last_progress_mark = e.at("last_progress_mark").get<std::uint64_t>();
        x.faults = e.at("faults").get<std::uint64_t>();
        x.stalls = e.at("stalls").get<std::vector<double>>();
        x.retransmits = e.at("retransmits").get<std::vector<double>>();
        x.stall_remaining_ms = e.at("stall_remaining_ms").get<double>();
        x.manifest_files = e.at("manifest_files").get<std::uint64_t>();
        x.manifest_dirs = e.at("manifest_dirs").get<std::uint64_t>();
        x.failure_reason = e.at("failure_reason").get<std::string>();
        x.missing_metadata = e.value("missing_metadata", false);
        by_uuid_[x.uuid] = x.index;
        xfers_.emplace(x.index, std::move(x));
    }
}

}  // namespace rep

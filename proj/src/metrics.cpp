#include "rep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace rep {

using nlohmann::json;

TimeSeries cumulative_bytes(const std::vector<EventLogEntry>& log, Site destination) {
    TimeSeries ts;
    ts.label = "cumulative bytes to " + site_key(destination);
    double cum = 0;
    for (const auto& e : log) {
        if (e.kind != EventKind::Succeed || e.route.destination != destination)
            continue;
        cum += static_cast<double>(e.bytes);
        if (!ts.points.empty() && ts.points.back().first == e.time)
            ts.points.back().second = cum;
        else
            ts.points.emplace_back(e.time, cum);
    }
    return ts;
}

TimeSeries instantaneous_rate(const std::vector<EventLogEntry>& log, const Route& route,
                              double window_s) {
    if (window_s <= 0) throw std::invalid_argument("rate window must be > 0");
    TimeSeries ts;
    ts.label = "rate " + route_key(route);
    if (log.empty()) return ts;
    const SimMs w = static_cast<SimMs>(window_s * 1000);
    const SimMs end = log.back().time;
    std::size_t lo = 0, hi = 0;
    double in_window = 0;
    auto counted = [&](const EventLogEntry& e) {
        return e.kind == EventKind::BytesProgress && e.route == route;
    };
    for (SimMs t = w; t - w <= end; t += w) {
        while (hi < log.size() && log[hi].time <= t) {
            if (counted(log[hi])) in_window += static_cast<double>(log[hi].bytes);
            ++hi;
        }
        while (lo < hi && log[lo].time <= t - w) {
            if (counted(log[lo])) in_window -= static_cast<double>(log[lo].bytes);
            ++lo;
        }
        ts.points.emplace_back(t, in_window / window_s);
    }
    return ts;
}

std::map<std::uint64_t, std::uint64_t> fault_histogram(const Table& table) {
    std::map<std::uint64_t, std::uint64_t> hist;
    table.for_each([&](const TransferRecord& r) {
        if (r.uuid.empty() || r.missing_metadata) return;
        ++hist[r.faults];
    });
    return hist;
}

std::vector<RouteStats> route_summary(const Table& table) {
    std::map<Route, RouteStats> by_route;
    std::map<Route, double> rate_sum;
    std::map<Route, std::uint64_t> fault_sum;
    table.for_each([&](const TransferRecord& r) {
        if (r.uuid.empty()) return;  // never submitted
        Route rt = r.route();
        auto& s = by_route[rt];
        s.route = rt;
        ++s.transfers;
        rate_sum[rt] += r.rate;
        if (r.missing_metadata) {
            ++s.missing_metadata;
        } else {
            fault_sum[rt] += r.faults;
            s.faults_max = std::max(s.faults_max, r.faults);
        }
    });
    std::vector<RouteStats> out;
    for (auto& [rt, s] : by_route) {
        s.mean_rate_gibps = rate_sum[rt] / s.transfers / kGiB;
        std::uint64_t with_meta = s.transfers - s.missing_metadata;
        s.faults_mean =
            with_meta > 0 ? static_cast<double>(fault_sum[rt]) / with_meta : 0.0;
        out.push_back(s);
    }
    return out;
}

ManifestSet site_manifests(const Catalog& catalog, const std::set<std::string>& held) {
    ManifestSet out;
    for (const auto& fp : held)
        out.emplace(fp, catalog.manifest(dataset_path_from_formatted(fp)));
    return out;
}

namespace {

// Entries delivered under `fp` at a site: from a manifest of fp itself, of an
// ancestor (restricted to the subtree), or of descendants (re-prefixed).
std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> entries_under(
    const std::string& fp, const ManifestSet& held) {
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& [hp, m] : held) {
        if (hp == fp) {
            for (const auto& e : m.entries) out[e.rel_path] = {e.size, e.checksum};
        } else if (hp.size() > fp.size() && hp.compare(0, fp.size(), fp) == 0 &&
                   hp[fp.size()] == '/') {
            std::string sub = hp.substr(fp.size() + 1);
            for (const auto& e : m.entries)
                out[sub + "/" + e.rel_path] = {e.size, e.checksum};
        } else if (fp.size() > hp.size() && fp.compare(0, hp.size(), hp) == 0 &&
                   fp[hp.size()] == '/') {
            std::string sub = fp.substr(hp.size() + 1) + "/";
            for (const auto& e : m.entries) {
                if (e.rel_path.size() > sub.size() &&
                    e.rel_path.compare(0, sub.size(), sub) == 0)
                    out[e.rel_path.substr(sub.size())] = {e.size, e.checksum};
            }
        }
    }
    return out;
}

}  // namespace

VerificationReport verify_replicas(const Catalog& catalog, const ManifestSet& holdings_a,
                                   const ManifestSet& holdings_b) {
    VerificationReport rep;
    for (const auto& p : catalog.paths()) {
        ++rep.paths_checked;
        const std::string fp = format_drs_path(p);
        auto ea = entries_under(fp, holdings_a);
        auto eb = entries_under(fp, holdings_b);
        std::string differing;
        auto ia = ea.begin();
        auto ib = eb.begin();
        while (ia != ea.end() || ib != eb.end()) {
            if (ib == eb.end() || (ia != ea.end() && ia->first < ib->first)) {
                differing = ia->first;
                break;
            }
            if (ia == ea.end() || ib->first < ia->first) {
                differing = ib->first;
                break;
            }
            if (ia->second != ib->second) {
                differing = ia->first;
                break;
            }
            ++ia;
            ++ib;
        }
        if (!differing.empty()) rep.mismatches.push_back({fp, differing});
    }
    return rep;
}

namespace {

json report_json(const ReportInputs& in) {
    json j;
    j["generated_at_ms"] = in.now;
    const std::uint64_t total = in.catalog->totals().bytes;
    j["catalog"] = {{"paths", in.catalog->paths().size()},
                    {"directories", in.catalog->totals().directories},
                    {"files", in.catalog->totals().files},
                    {"bytes", total}};

    std::map<Site, std::uint64_t> done;
    json active = json::array();
    std::vector<const TransferRecord*> completed;
    in.table->for_each([&](const TransferRecord& r) {
        if (r.status == TransferStatus::Succeeded) {
            done[r.destination] += r.bytes_transferred;
            completed.push_back(&r);
        }
        if (r.status == TransferStatus::Active || r.status == TransferStatus::Queued ||
            r.status == TransferStatus::Paused) {
            active.push_back({{"path", format_drs_path(r.dataset)},
                              {"route", route_key(r.route())},
                              {"status", status_key(r.status)},
                              {"bytes", r.bytes_transferred}});
        }
    });
    json dests = json::object();
    for (Site d : {Site::LcfA, Site::LcfB}) {
        double frac = total > 0 ? static_cast<double>(done[d]) / total : 0.0;
        dests[site_key(d)] = {{"display", site_display_name(d)},
                              {"completed_bytes", done[d]},
                              {"total_bytes", total},
                              {"fraction", frac}};
    }
    j["destinations"] = std::move(dests);

    std::sort(completed.begin(), completed.end(),
              [](const TransferRecord* a, const TransferRecord* b) {
                  return a->completed > b->completed;
              });
    json recent = json::array();
    for (std::size_t i = 0; i < completed.size() && i < 8; ++i) {
        const auto* r = completed[i];
        recent.push_back({{"path", format_drs_path(r->dataset)},
                          {"route", route_key(r->route())},
                          {"completed_ms", r->completed},
                          {"bytes", r->bytes_transferred},
                          {"rate_gibps", r->rate / kGiB}});
    }
    j["recent_transfers"] = std::move(recent);
    j["active_transfers"] = std::move(active);

    json routes = json::array();
    for (const auto& s : route_summary(*in.table)) {
        routes.push_back({{"route", route_key(s.route)},
                          {"mean_rate_gibps", s.mean_rate_gibps},
                          {"mean_rate_bps", s.mean_rate_gibps * kGiB},
                          {"transfers", s.transfers},
                          {"missing_metadata", s.missing_metadata},
                          {"faults_mean", s.faults_mean},
                          {"faults_max", s.faults_max}});
    }
    j["routes"] = std::move(routes);

    json series = json::object();
    if (in.log != nullptr) {
        json cum = json::object();
        for (Site d : {Site::LcfA, Site::LcfB}) {
            TimeSeries ts = cumulative_bytes(*in.log, d);
            json pts = json::array();
            for (const auto& [t, v] : ts.points) pts.push_back({t, v});
            cum[site_key(d)] = std::move(pts);
        }
        series["cumulative_bytes"] = std::move(cum);
        json rates = json::object();
        for (const Route& r : {Route{Site::SourceHub, Site::LcfA},
                               Route{Site::SourceHub, Site::LcfB},
                               Route{Site::LcfA, Site::LcfB},
                               Route{Site::LcfB, Site::LcfA}}) {
            TimeSeries ts = instantaneous_rate(*in.log, r, in.rate_window_s);
            json pts = json::array();
            for (const auto& [t, v] : ts.points) pts.push_back({t, v});
            rates[route_key(r)] = std::move(pts);
        }
        series["rates"] = std::move(rates);
    }
    j["series"] = std::move(series);
    return j;
}

std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string emit_report(const ReportInputs& in, ReportFormat format) {
    if (!in.catalog || !in.table)
        throw std::invalid_argument("report needs a catalog and a table");
    json j = report_json(in);
    if (format == ReportFormat::Structured) return j.dump(2) + "\n";

    std::ostringstream os;
    os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
       << "<title>Replication progress</title><style>"
       << "body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}"
       << "td,th{border:1px solid #999;padding:4px 8px;text-align:right}"
       << "th{background:#eee}td:first-child,th:first-child{text-align:left}"
       << "</style></head><body>\n<h1>Replication progress</h1>\n";
    os << "<p>Sim time: " << j["generated_at_ms"].get<SimMs>() / 1000 << " s</p>\n";
    os << "<h2>Destinations</h2>\n<table><tr><th>Site</th><th>Completed bytes</th>"
       << "<th>Total bytes</th><th>Fraction</th></tr>\n";
    for (const auto& [key, d] : j["destinations"].items()) {
        os << "<tr><td>" << html_escape(d["display"].get<std::string>()) << "</td><td>"
           << d["completed_bytes"].get<std::uint64_t>() << "</td><td>"
           << d["total_bytes"].get<std::uint64_t>() << "</td><td>"
           << d["fraction"].get<double>() << "</td></tr>\n";
    }
    os << "</table>\n<h2>Routes</h2>\n<table><tr><th>Route</th><th>Mean GB/s</th>"
       << "<th>Transfers</th><th>Missing</th><th>Faults mean</th><th>Faults max</th>"
       << "</tr>\n";
    for (const auto& r : j["routes"]) {
        os << "<tr><td>" << html_escape(r["route"].get<std::string>()) << "</td><td>"
           << r["mean_rate_gibps"].get<double>() << "</td><td>"
           << r["transfers"].get<std::uint64_t>() << "</td><td>"
           << r["missing_metadata"].get<std::uint64_t>() << "</td><td>"
           << r["faults_mean"].get<double>() << "</td><td>"
           << r["faults_max"].get<std::uint64_t>() << "</td></tr>\n";
    }
    os << "</table>\n<h2>Active transfers</h2>\n<table><tr><th>Path</th><th>Route</th>"
       << "<th>Status</th><th>Bytes</th></tr>\n";
    for (const auto& a : j["active_transfers"]) {
        os << "<tr><td>" << html_escape(a["path"].get<std::string>()) << "</td><td>"
           << a["route"].get<std::string>() << "</td><td>"
           << a["status"].get<std::string>() << "</td><td>"
           << a["bytes"].get<std::uint64_t>() << "</td></tr>\n";
    }
    os << "</table>\n<h2>Recently completed</h2>\n<table><tr><th>Path</th>"
       << "<th>Route</th><th>Completed (ms)</th><th>Bytes</th><th>GB/s</th></tr>\n";
    for (const auto& r : j["recent_transfers"]) {
        os << "<tr><td>" << html_escape(r["path"].get<std::string>()) << "</td><td>"
           << r["route"].get<std::string>() << "</td><td>"
           << r["completed_ms"].get<SimMs>() << "</td><td>"
           << r["bytes"].get<std::uint64_t>() << "</td><td>"
           << r["rate_gibps"].get<double>() << "</td></tr>\n";
    }
    os << "</table>\n";
    // the full structured payload rides along so the two formats carry
    // exactly the same numbers
    os << "<script type=\"application/json\" id=\"report-data\">\n"
       << j.dump(2) << "\n</script>\n</body></html>\n";
    return os.str();
}

}  // namespace rep

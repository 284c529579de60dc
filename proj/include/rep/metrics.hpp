#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rep/core.hpp"
#include "rep/simnet.hpp"
#include "rep/store.hpp"

namespace rep {

struct RouteStats {
    Route route{Site::SourceHub, Site::LcfA};
    double mean_rate_gibps = 0;  // mean of per-transfer lifetime rates, 2^30 B/s
    std::uint64_t transfers = 0;
    std::uint64_t missing_metadata = 0;
    double faults_mean = 0;  // over transfers with metadata
    std::uint64_t faults_max = 0;
};

struct TimeSeries {
    std::string label;
    std::vector<std::pair<SimMs, double>> points;  // times strictly increasing
};

/// Non-decreasing payload bytes delivered to `destination`, sampled at each
/// successful transfer completion.
TimeSeries cumulative_bytes(const std::vector<EventLogEntry>& log, Site destination);

/// Trailing-window mean wire rate on `route`, sampled per window.
TimeSeries instantaneous_rate(const std::vector<EventLogEntry>& log, const Route& route,
                              double window_s);

/// faults-per-transfer -> number of transfers, over rows with metadata.
std::map<std::uint64_t, std::uint64_t> fault_histogram(const Table& table);

std::vector<RouteStats> route_summary(const Table& table);

struct VerificationMismatch {
    std::string path;
    std::string first_differing_entry;
};

struct VerificationReport {
    std::size_t paths_checked = 0;
    std::vector<VerificationMismatch> mismatches;
};

/// Delivered manifests at a site, keyed by formatted dataset path.
using ManifestSet = std::map<std::string, Manifest>;

/// Expand a set of delivered path names into their manifests.
ManifestSet site_manifests(const Catalog& catalog, const std::set<std::string>& held);

/// Compare each catalog path's content across the two destinations' holdings.
VerificationReport verify_replicas(const Catalog& catalog, const ManifestSet& holdings_a,
                                   const ManifestSet& holdings_b);

enum class ReportFormat { Structured, Html };

struct ReportInputs {
    const Catalog* catalog = nullptr;
    const Table* table = nullptr;
    const std::vector<EventLogEntry>* log = nullptr;
    SimMs now = 0;
    double rate_window_s = 600;
};

/// Progress report: per-destination completed bytes and completion fraction,
/// per-route statistics, active and recently completed transfers.
std::string emit_report(const ReportInputs& in, ReportFormat format);

}  // namespace rep

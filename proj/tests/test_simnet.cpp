#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rep/simnet.hpp"

using namespace rep;
namespace fs = std::filesystem;

namespace {

DatasetPath path_of(const std::string& text) {
    return parse_drs_path(text, DrsFlavor::Generic);
}

Catalog flat_catalog(const std::vector<std::pair<std::string, std::uint64_t>>& specs) {
    Catalog c;
    for (const auto& [p, size] : specs) {
        FileEntry f{"data.nc", size, fnv1a64(p)};
        c.add_path(path_of(p), {f});
    }
    return c;
}

// all caps equal, zero scan cost, no faults
FabricConfig simple_config(double cap_gibps = 1.5) {
    FabricConfig c;
    for (Site s : kAllSites) {
        SiteSpec spec;
        spec.site = s;
        spec.egress_cap = cap_gibps * kGiB;
        spec.ingress_cap = cap_gibps * kGiB;
        c.sites[s] = spec;
    }
    return c;
}

std::string encode_log(const std::vector<EventLogEntry>& log) {
    std::string out;
    for (const auto& e : log) out += encode_event(e) + "\n";
    return out;
}

constexpr std::uint64_t kPayload = static_cast<std::uint64_t>(1.5 * kGiB);

}  // namespace

TEST_CASE("submit preconditions") {
    Catalog c = flat_catalog({{"/d/a", 1000}});
    SimFabric f(simple_config(), c);
    CHECK_THROWS_AS(f.submit(Site::SourceHub, Site::LcfA, path_of("/d/zzz")),
                    UnknownPath);
    CHECK_THROWS_AS(f.submit(Site::LcfA, Site::LcfB, path_of("/d/a")),
                    SourceMissingData);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    CHECK(!uuid.empty());
    auto rep = f.poll(uuid);
    CHECK(rep.status == TransferStatus::Queued);
    CHECK(rep.bytes_transferred == 0);
    CHECK_THROWS_AS(f.poll("nope"), UnknownTransfer);
}

TEST_CASE("one 1.5 GiB transfer at 1.5 GiB/s completes at exactly 1.0 s") {
    Catalog c = flat_catalog({{"/d/a", kPayload}});
    SimFabric f(simple_config(1.5), c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    auto log = f.advance(10'000);
    auto rep = f.poll(uuid);
    CHECK(rep.status == TransferStatus::Succeeded);
    CHECK(rep.bytes_transferred == kPayload);
    CHECK(rep.files == 1);
    SimMs done = 0;
    for (const auto& e : log)
        if (e.kind == EventKind::Succeed) done = e.time;
    CHECK(done == 1000);
    CHECK(f.holdings(Site::LcfA).count("/d/a") == 1);
}

TEST_CASE("two concurrent 1.5 GiB transfers share egress and finish at 2.0 s") {
    Catalog c = flat_catalog({{"/d/a", kPayload}, {"/d/b", kPayload}});
    FabricConfig cfg = simple_config(1.5);
    cfg.sites[Site::LcfB].ingress_cap = 10 * kGiB;  // only hub egress binds
    SimFabric f(cfg, c);
    std::string u1 = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    std::string u2 = f.submit(Site::SourceHub, Site::LcfB, path_of("/d/b"));
    auto log = f.advance(10'000);
    std::vector<SimMs> done;
    for (const auto& e : log)
        if (e.kind == EventKind::Succeed) done.push_back(e.time);
    REQUIRE(done.size() == 2);
    CHECK(done[0] == 2000);
    CHECK(done[1] == 2000);
}

TEST_CASE("three transfers on one route split the route cap") {
    Catalog c = flat_catalog(
        {{"/d/a", kPayload}, {"/d/b", kPayload}, {"/d/c", kPayload}});
    FabricConfig cfg = simple_config(100.0);
    cfg.route_caps[{Site::SourceHub, Site::LcfA}] = 1.5 * kGiB;
    SimFabric f(cfg, c);
    for (const char* p : {"/d/a", "/d/b", "/d/c"})
        f.submit(Site::SourceHub, Site::LcfA, path_of(p));
    auto log = f.advance(100'000);
    for (const auto& e : log)
        if (e.kind == EventKind::Succeed) CHECK(e.time == 3000);
}

TEST_CASE("full campaign byte total through 1.5*2^30 B/s respects the bound") {
    const std::uint64_t total = 8'182'644'448'359'330ull;
    Catalog c = flat_catalog({{"/d/all", total}});
    SimFabric f(simple_config(1.5), c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/all"));
    const double bound_s = static_cast<double>(total) / (1.5 * kGiB);
    f.advance(static_cast<SimMs>(bound_s * 1000) + 10'000);
    auto rep = f.poll(uuid);
    REQUIRE(rep.status == TransferStatus::Succeeded);
    double done_s = 0;
    // lifetime rate gives back the completion time
    done_s = static_cast<double>(rep.bytes_transferred) / rep.rate;
    CHECK(done_s >= bound_s - 1e-3);
    CHECK(done_s <= bound_s + 1.0);
    CHECK(bound_s / 86400.0 > 58.0);  // the 58-day floor at full scale
    CHECK(bound_s >= 5.08e6);
}

TEST_CASE("maintenance window delays a straddling transfer by its full length") {
    Catalog c = flat_catalog({{"/d/a", 5 * kPayload}});  // 7.5 GiB -> 5 s of flow
    FabricConfig cfg = simple_config(1.5);
    cfg.sites[Site::LcfA].maintenance = {{3'000, 13'000}};
    SimFabric f(cfg, c);
    CHECK_FALSE(f.endpoint_paused(Site::LcfA, 0));
    CHECK(f.endpoint_paused(Site::LcfA, 3'000));
    CHECK(f.endpoint_paused(Site::LcfA, 12'999));
    CHECK_FALSE(f.endpoint_paused(Site::LcfA, 13'000));

    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    auto log = f.advance(60'000);
    SimMs done = 0;
    bool paused_seen = false, resumed_seen = false;
    for (const auto& e : log) {
        if (e.kind == EventKind::Succeed) done = e.time;
        if (e.kind == EventKind::Pause) paused_seen = true;
        if (e.kind == EventKind::Resume) resumed_seen = true;
        if (e.kind == EventKind::BytesProgress) {
            // no bytes may move inside the window
            CHECK_FALSE((e.time > 3'000 && e.time <= 13'000));
        }
    }
    CHECK(done == 15'000);  // 5 s of flow + 10 s outage
    CHECK(paused_seen);
    CHECK(resumed_seen);
    auto rep = f.poll(uuid);
    CHECK(rep.status == TransferStatus::Succeeded);
}

TEST_CASE("a transfer submitted during source maintenance waits for the window end") {
    Catalog c = flat_catalog({{"/d/a", kPayload}});
    FabricConfig cfg = simple_config(1.5);
    cfg.sites[Site::SourceHub].maintenance = {{0, 5'000}};
    SimFabric f(cfg, c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(1'000);
    CHECK(f.poll(uuid).status == TransferStatus::Paused);
    CHECK(f.poll(uuid).paused_reason.has_value());
    auto log = f.advance(20'000);
    SimMs done = 0;
    for (const auto& e : log)
        if (e.kind == EventKind::Succeed) done = e.time;
    CHECK(done == 6'000);
}

TEST_CASE("poll rate equals bytes over active lifetime") {
    Catalog c = flat_catalog({{"/d/a", 3 * kPayload}});
    SimFabric f(simple_config(1.5), c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(30'000);
    auto rep = f.poll(uuid);
    REQUIRE(rep.status == TransferStatus::Succeeded);
    // active from t=0, completed at 3 s
    double expect = static_cast<double>(rep.bytes_transferred) / 3.0;
    CHECK(std::abs(rep.rate - expect) / expect < 1e-9);
}

TEST_CASE("counters are monotone across polls") {
    Catalog c = flat_catalog({{"/d/a", 4 * kPayload}});
    FabricConfig cfg = simple_config(1.5);
    cfg.faults.transient_rate = 2.0;
    cfg.faults.transient_delay_s = 0.5;
    cfg.faults.file_corruption_prob = 0.5;
    cfg.seed = 5;
    SimFabric f(cfg, c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    TransferStatusReport prev = f.poll(uuid);
    for (int i = 0; i < 40; ++i) {
        f.advance(f.now() + 250);
        auto rep = f.poll(uuid);
        CHECK(rep.bytes_transferred >= prev.bytes_transferred);
        CHECK(rep.files >= prev.files);
        CHECK(rep.faults >= prev.faults);
        prev = rep;
    }
}

TEST_CASE("scan phase precedes any byte movement") {
    Catalog c;
    std::vector<FileEntry> files;
    for (int i = 0; i < 999; ++i)
        files.push_back({"f" + std::to_string(1000 + i) + ".nc", 1024, 1u});
    c.add_path(path_of("/d/big"), files);
    // 999 files + 1 directory = 1000 entries; 2 s per 1000 entries -> 2000 ms scan
    FabricConfig cfg = simple_config(1.5);
    cfg.sites[Site::SourceHub].scan_cost = 2.0;
    SimFabric f(cfg, c);
    f.submit(Site::SourceHub, Site::LcfA, path_of("/d/big"));
    auto log = f.advance(60'000);
    SimMs scan_done = -1, first_bytes = -1, done = -1;
    for (const auto& e : log) {
        if (e.kind == EventKind::ScanDone) scan_done = e.time;
        if (e.kind == EventKind::BytesProgress && first_bytes < 0) first_bytes = e.time;
        if (e.kind == EventKind::Succeed) done = e.time;
    }
    CHECK(scan_done == 2000);
    CHECK(first_bytes > 2000);
    // 999 KiB of payload moves in well under a second after the scan
    CHECK(done > 2000);
    CHECK(done < 4000);
}

TEST_CASE("oversized scans fail with SCAN_OOM at the cap crossing") {
    Catalog c;
    std::vector<FileEntry> files;
    for (int i = 0; i < 199; ++i)
        files.push_back({"f" + std::to_string(100 + i) + ".nc", 1024, 1u});
    c.add_path(path_of("/d/huge"), files);  // 200 entries with the directory
    FabricConfig cfg = simple_config(1.5);
    cfg.sites[Site::SourceHub].scan_cost = 10.0;  // 10 ms per entry
    cfg.sites[Site::SourceHub].scan_entry_cap = 100;
    SimFabric f(cfg, c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/huge"));
    auto log = f.advance(60'000);
    bool oom = false;
    SimMs fail_at = -1;
    for (const auto& e : log) {
        if (e.kind == EventKind::ScanOom) oom = true;
        if (e.kind == EventKind::Fail) fail_at = e.time;
    }
    CHECK(oom);
    CHECK(fail_at == 1000);  // cap of 100 entries at 10 ms each
    auto rep = f.poll(uuid);
    CHECK(rep.status == TransferStatus::Failed);
    CHECK(rep.failure_reason == "SCAN_OOM");
}

TEST_CASE("unreadable paths fail after scan and heal at the autofix time") {
    Catalog c = flat_catalog({{"/d/a", kPayload}});
    FabricConfig cfg = simple_config(1.5);
    cfg.faults.persistent_fail_prob = 1.0;
    cfg.faults.persistent_autofix_after_s = 30.0;
    cfg.seed = 3;
    SimFabric f(cfg, c);
    std::string u1 = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(5'000);
    auto r1 = f.poll(u1);
    CHECK(r1.status == TransferStatus::Failed);
    CHECK(r1.failure_reason == "UNREADABLE");

    // resubmission before the fix fails again
    std::string u2 = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(10'000);
    CHECK(f.poll(u2).status == TransferStatus::Failed);

    f.advance(30'000);
    std::string u3 = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(40'000);
    CHECK(f.poll(u3).status == TransferStatus::Succeeded);
}

TEST_CASE("transient faults stall for the configured delay") {
    Catalog c = flat_catalog({{"/d/a", 2 * kPayload}});  // 2 s of flow
    FabricConfig cfg = simple_config(1.5);
    cfg.faults.transient_rate = 6.0;
    cfg.faults.transient_delay_s = 3.0;
    cfg.seed = 11;
    SimFabric f(cfg, c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    auto log = f.advance(600'000);
    auto rep = f.poll(uuid);
    REQUIRE(rep.status == TransferStatus::Succeeded);
    std::uint64_t n_faults = 0;
    SimMs done = 0;
    for (const auto& e : log) {
        if (e.kind == EventKind::Fault) ++n_faults;
        if (e.kind == EventKind::Succeed) done = e.time;
    }
    CHECK(n_faults == rep.faults);
    // 2 s of flow plus 3 s per stall, modulo ms rounding at each boundary
    SimMs expect = 2000 + static_cast<SimMs>(n_faults) * 3000;
    CHECK(std::abs(done - expect) <= static_cast<SimMs>(n_faults) + 2);
}

TEST_CASE("corrupted files are retransmitted and masked") {
    Catalog c;
    std::vector<FileEntry> files;
    for (int i = 0; i < 8; ++i)
        files.push_back({"f" + std::to_string(i) + ".nc", kPayload / 8, 99u});
    c.add_path(path_of("/d/a"), files);
    FabricConfig cfg = simple_config(1.5);
    cfg.faults.file_corruption_prob = 1.0;  // every file fails its first checksum
    cfg.seed = 2;
    SimFabric f(cfg, c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    auto log = f.advance(60'000);
    auto rep = f.poll(uuid);
    REQUIRE(rep.status == TransferStatus::Succeeded);
    // wire bytes doubled, payload delivered once
    CHECK(rep.bytes_transferred == 2 * kPayload);
    std::uint64_t retransmits = 0, progress = 0;
    for (const auto& e : log) {
        if (e.kind == EventKind::FileRetransmit) ++retransmits;
        if (e.kind == EventKind::BytesProgress) progress += e.bytes;
    }
    CHECK(retransmits == 8);
    CHECK(rep.faults == 8);
    CHECK(progress == 2 * kPayload);
    for (const auto& e : log)
        if (e.kind == EventKind::Succeed) CHECK(e.bytes == kPayload);
    CHECK(f.holdings(Site::LcfA).count("/d/a") == 1);
}

TEST_CASE("resubmitting a delivered path is allowed and idempotent") {
    Catalog c = flat_catalog({{"/d/a", kPayload}});
    SimFabric f(simple_config(1.5), c);
    f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(5'000);
    std::string u2 = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(10'000);
    CHECK(f.poll(u2).status == TransferStatus::Succeeded);
    CHECK(f.holdings(Site::LcfA).count("/d/a") == 1);
    CHECK(f.holdings(Site::LcfA).size() == 1);
    // and the delivered copy can seed a cascade
    std::string u3 = f.submit(Site::LcfA, Site::LcfB, path_of("/d/a"));
    f.advance(15'000);
    CHECK(f.poll(u3).status == TransferStatus::Succeeded);
}

TEST_CASE("missing metadata flag is reported") {
    Catalog c = flat_catalog({{"/d/a", 1024}});
    FabricConfig cfg = simple_config(1.5);
    cfg.faults.missing_metadata_prob = 1.0;
    SimFabric f(cfg, c);
    std::string uuid = f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    f.advance(5'000);
    CHECK(f.poll(uuid).missing_metadata);
}

TEST_CASE("event lines encode and decode losslessly") {
    EventLogEntry e{12345, EventKind::BytesProgress, "xfer-000007",
                    {Site::LcfB, Site::LcfA}, "/d/a/b", 987654321, 12, 3};
    EventLogEntry d = decode_event(encode_event(e));
    CHECK(d.time == e.time);
    CHECK(d.kind == e.kind);
    CHECK(d.uuid == e.uuid);
    CHECK(d.route == e.route);
    CHECK(d.path == e.path);
    CHECK(d.bytes == e.bytes);
    CHECK(d.files == e.files);
    CHECK(d.directories == e.directories);

    auto file = fs::temp_directory_path() / "rep_events_test.log";
    {
        std::ofstream out(file);
        out << encode_event(e) << "\n" << encode_event(d) << "\n";
    }
    auto loaded = load_event_log(file.string());
    REQUIRE(loaded.size() == 2);
    CHECK(encode_event(loaded[0]) == encode_event(e));
    fs::remove(file);
}

TEST_CASE("identical config and submissions give identical event logs") {
    auto run_once = [] {
        Catalog c = flat_catalog({{"/d/a", kPayload}, {"/d/b", 2 * kPayload}});
        FabricConfig cfg = simple_config(1.5);
        cfg.faults.transient_rate = 1.0;
        cfg.faults.transient_delay_s = 1.0;
        cfg.faults.file_corruption_prob = 0.3;
        cfg.seed = 77;
        SimFabric f(cfg, c);
        std::string log;
        f.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
        log += encode_log(f.advance(1'500));
        f.submit(Site::SourceHub, Site::LcfB, path_of("/d/b"));
        for (int i = 0; i < 30; ++i) log += encode_log(f.advance(f.now() + 1'000));
        return log;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("checkpointed state resumes into the identical future") {
    Catalog c = flat_catalog(
        {{"/d/a", 3 * kPayload}, {"/d/b", 2 * kPayload}, {"/d/c", kPayload}});
    FabricConfig cfg = simple_config(1.5);
    cfg.faults.transient_rate = 1.5;
    cfg.faults.transient_delay_s = 2.0;
    cfg.faults.file_corruption_prob = 0.5;
    cfg.seed = 31;

    SimFabric a(cfg, c);
    a.submit(Site::SourceHub, Site::LcfA, path_of("/d/a"));
    a.submit(Site::SourceHub, Site::LcfB, path_of("/d/b"));
    a.advance(2'000);
    a.submit(Site::SourceHub, Site::LcfA, path_of("/d/c"));
    a.advance(3'500);

    auto state = fs::temp_directory_path() / "rep_fabric_state_test.json";
    a.save_state(state.string());
    SimFabric b(cfg, c);
    b.load_state(state.string());
    fs::remove(state);

    CHECK(b.now() == a.now());
    std::string la = encode_log(a.advance(120'000));
    std::string lb = encode_log(b.advance(120'000));
    CHECK(la == lb);
    CHECK(a.holdings(Site::LcfA) == b.holdings(Site::LcfA));
    CHECK(a.holdings(Site::LcfB) == b.holdings(Site::LcfB));
}

TEST_CASE("config files parse into the documented schema") {
    auto file = fs::temp_directory_path() / "rep_fabric_cfg_test.json";
    {
        std::ofstream out(file);
        out << R"({
          "seed": 9,
          "sites": [
            {"site": "HUB", "egress_gibps": 1.5, "ingress_gibps": 2.0,
             "scan_cost_s_per_1000": 0.25, "scan_entry_cap": 1000,
             "maintenance": [[10, 20]]},
            {"site": "LCF_A", "egress_gibps": 4.0, "ingress_gibps": 4.0},
            {"site": "LCF_B", "egress_gibps": 4.0, "ingress_gibps": 4.0}
          ],
          "routes": [
            {"source": "HUB", "destination": "LCF_A", "cap_gibps": 0.648}
          ],
          "faults": {"transient_rate": 1.05, "transient_delay_s": 60}
        })";
    }
    FabricConfig cfg = FabricConfig::from_json_file(file.string());
    fs::remove(file);
    CHECK(cfg.seed == 9);
    CHECK(cfg.sites.at(Site::SourceHub).egress_cap == doctest::Approx(1.5 * kGiB));
    CHECK(cfg.sites.at(Site::SourceHub).scan_entry_cap == 1000);
    REQUIRE(cfg.sites.at(Site::SourceHub).maintenance.size() == 1);
    CHECK(cfg.sites.at(Site::SourceHub).maintenance[0] ==
          std::pair<SimMs, SimMs>{10'000, 20'000});
    CHECK(cfg.route_caps.at({Site::SourceHub, Site::LcfA}) ==
          doctest::Approx(0.648 * kGiB));
    CHECK(cfg.faults.transient_rate == doctest::Approx(1.05));

    FabricConfig bad = cfg;
    bad.sites[Site::SourceHub].egress_cap = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidSpec);
    bad = cfg;
    bad.faults.file_corruption_prob = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidSpec);
    bad = cfg;
    bad.sites[Site::SourceHub].maintenance = {{20'000, 10'000}};
    CHECK_THROWS_AS(bad.validate(), InvalidSpec);
}

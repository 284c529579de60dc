// repctl: operate the replication artifact end to end.
//
// Subcommands: gen-catalog, run, resume, report, verify, ingest.
// Exit status: 0 success, 1 configuration/usage error, 2 domain failure
// (permanent-failed rows, replica mismatch).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "rep/catalog.hpp"
#include "rep/core.hpp"
#include "rep/metrics.hpp"
#include "rep/scheduler.hpp"
#include "rep/simnet.hpp"
#include "rep/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rep;

namespace {

struct RunConfig {
    std::string catalog_file;       // pre-built catalog (from gen-catalog)
    std::string catalog_spec_file;  // or: generate on the fly
    std::string path_list_file;     // or: path list with synthesized contents
    std::string fabric_file;
    std::string policy_file;
    std::string journal = "journal.log";
    std::string state_file = "fabric_state.json";
    std::string event_log = "events.log";
    std::string action_log = "actions.log";
    std::string report_out;
    std::string report_format = "structured";
    std::optional<std::uint64_t> seed;
};

RunConfig load_run_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open run config: " + file);
    json j = json::parse(in);
    RunConfig c;
    c.catalog_file = j.value("catalog", "");
    c.catalog_spec_file = j.value("catalog_spec", "");
    c.path_list_file = j.value("path_list", "");
    c.fabric_file = j.value("fabric", "");
    c.policy_file = j.value("policy", "");
    c.journal = j.value("journal", c.journal);
    c.state_file = j.value("state", c.state_file);
    c.event_log = j.value("event_log", c.event_log);
    c.action_log = j.value("action_log", c.action_log);
    c.report_out = j.value("report_out", "");
    c.report_format = j.value("report_format", c.report_format);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    return c;
}

Catalog build_catalog(const RunConfig& c) {
    if (!c.catalog_file.empty()) return Catalog::load(c.catalog_file);
    if (!c.catalog_spec_file.empty())
        return generate_catalog(catalog_spec_from_json_file(c.catalog_spec_file));
    if (!c.path_list_file.empty()) {
        // Path lists carry no sizes; synthesize one log-normal file per path,
        // deterministic in the seed.
        Catalog cat;
        std::uint64_t seed = c.seed.value_or(0);
        for (const auto& p : load_path_list_file(c.path_list_file)) {
            std::mt19937_64 rng(mix_seed(seed, "pathlist/" + format_drs_path(p)));
            std::lognormal_distribution<double> sz(20.0, 1.0);
            std::uint64_t bytes = std::max<std::uint64_t>(1, (std::uint64_t)sz(rng));
            FileEntry f;
            f.rel_path = "data.nc";
            f.size = bytes;
            f.checksum = fnv1a64(format_drs_path(p) + "/data.nc", seed ^ bytes);
            cat.add_path(p, {f});
        }
        return cat;
    }
    throw std::runtime_error("run config needs one of catalog, catalog_spec, path_list");
}

int cmd_gen_catalog(const std::string& spec_file, const std::string& out) {
    Catalog cat = generate_catalog(catalog_spec_from_json_file(spec_file));
    cat.save(out);
    const auto& t = cat.totals();
    std::cout << "paths=" << cat.paths().size() << " directories=" << t.directories
              << " files=" << t.files << " bytes=" << t.bytes << "\n";
    return 0;
}

int write_report(const RunConfig& c, const Catalog& cat, const Table& table, SimMs now,
                 const std::string& format, const std::string& out) {
    std::vector<EventLogEntry> log;
    if (fs::exists(c.event_log)) log = load_event_log(c.event_log);
    if (now == 0 && !log.empty()) now = log.back().time;
    ReportInputs in;
    in.catalog = &cat;
    in.table = &table;
    in.log = &log;
    in.now = now;
    ReportFormat f = format == "html" ? ReportFormat::Html : ReportFormat::Structured;
    std::string doc = emit_report(in, f);
    if (out.empty() || out == "-") {
        std::cout << doc;
    } else {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot write report: " + out);
        os << doc;
    }
    return 0;
}

int do_run(const RunConfig& c, bool resume, std::optional<double> until_s) {
    if (c.fabric_file.empty())
        throw std::runtime_error("run config needs a fabric file");
    Catalog cat = build_catalog(c);

    FabricConfig fab = FabricConfig::from_json_file(c.fabric_file);
    if (c.seed) fab.seed = *c.seed;
    fab.validate();

    SchedulerPolicy policy;
    if (!c.policy_file.empty()) policy = SchedulerPolicy::from_json_file(c.policy_file);
    policy.validate();

    SimFabric fabric(fab, cat);
    if (resume) {
        if (!fs::exists(c.state_file))
            throw std::runtime_error("no saved state to resume: " + c.state_file);
        fabric.load_state(c.state_file);
    } else if (fs::exists(c.state_file)) {
        // an interrupted run left a checkpoint behind; pick it up
        fabric.load_state(c.state_file);
    }

    Table table = Table::open(c.journal);
    if (table.size() == 0) {
        for (const auto& r : build_plan(cat, {Site::LcfA, Site::LcfB})) table.upsert(r);
    }

    std::ofstream actions(c.action_log, std::ios::app);
    std::ofstream events(c.event_log, std::ios::app);
    RunOptions opts;
    opts.action_log = &actions;
    opts.event_sink = [&](const std::vector<EventLogEntry>& es) {
        for (const auto& e : es) events << encode_event(e) << "\n";
        events.flush();
    };
    if (until_s) opts.until = static_cast<SimMs>(*until_s * 1000);

    RunSummary sum = run(table, fabric, cat, policy, opts);
    fabric.save_state(c.state_file);

    std::cout << "elapsed_s=" << sum.elapsed_ms / 1000.0 << " rows=" << sum.rows
              << " succeeded=" << sum.succeeded
              << " permanent_failed=" << sum.permanent_failed
              << " faults=" << sum.total_faults
              << " terminated=" << (sum.terminated ? "yes" : "no") << "\n";

    if (!c.report_out.empty())
        write_report(c, cat, table, fabric.now(), c.report_format, c.report_out);
    table.close();

    if (sum.terminated && sum.permanent_failed > 0) return 2;
    return 0;
}

int cmd_report(const RunConfig& c, const std::string& format, const std::string& out) {
    Catalog cat = build_catalog(c);
    Table table = Table::open(c.journal);
    return write_report(c, cat, table, 0, format, out);
}

int cmd_verify(const RunConfig& c) {
    Catalog cat = build_catalog(c);
    FabricConfig fab = FabricConfig::from_json_file(c.fabric_file);
    if (c.seed) fab.seed = *c.seed;
    SimFabric fabric(fab, cat);
    if (!fs::exists(c.state_file))
        throw std::runtime_error("no fabric state to verify against: " + c.state_file);
    fabric.load_state(c.state_file);
    auto a = site_manifests(cat, fabric.holdings(Site::LcfA));
    auto b = site_manifests(cat, fabric.holdings(Site::LcfB));
    VerificationReport rep = verify_replicas(cat, a, b);
    std::cout << "paths_checked=" << rep.paths_checked
              << " mismatches=" << rep.mismatches.size() << "\n";
    for (const auto& m : rep.mismatches)
        std::cout << "mismatch path=" << m.path << " entry=" << m.first_differing_entry
                  << "\n";
    return rep.mismatches.empty() ? 0 : 2;
}

int cmd_ingest(const RunConfig& c, const std::string& list_file) {
    Catalog cat = build_catalog(c);
    Table table = Table::open(c.journal);
    auto paths = load_path_list_file(list_file);
    std::size_t added = ingest_new_paths(table, cat, paths, {Site::LcfA, Site::LcfB});
    std::cout << "added=" << added << "\n";
    table.close();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bulk dataset replication driver"};
    app.require_subcommand(1);

    std::string spec_file, out_file, config_file, journal_override, report_out;
    std::string format = "structured", list_file;
    std::optional<std::uint64_t> seed;
    std::optional<double> until_s;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_file, "run config (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed, "override the simulation seed");
        cmd->add_option("--journal", journal_override, "override the journal location");
        cmd->add_option("--report-out", report_out, "report output file ('-' = stdout)");
        cmd->add_option("--format", format, "report format")
            ->check(CLI::IsMember({"structured", "html"}));
    };

    auto* gen = app.add_subcommand("gen-catalog", "generate a synthetic catalog");
    gen->add_option("--spec", spec_file, "catalog spec (JSON)")->required();
    gen->add_option("--out", out_file, "output catalog file")->required();

    auto* runc = app.add_subcommand("run", "run the replication loop to completion");
    add_common(runc, true);
    runc->add_option("--until", until_s, "stop once sim time reaches this (seconds)");

    auto* resume = app.add_subcommand("resume", "resume an interrupted run");
    add_common(resume, true);
    resume->add_option("--until", until_s, "stop once sim time reaches this (seconds)");

    auto* report = app.add_subcommand("report", "emit a progress report");
    add_common(report, true);

    auto* verify = app.add_subcommand("verify", "compare destination replicas");
    add_common(verify, true);

    auto* ingest = app.add_subcommand("ingest", "add paths to an existing plan");
    add_common(ingest, true);
    ingest->add_option("--paths", list_file, "path list file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_catalog(spec_file, out_file);

        RunConfig c = load_run_config(config_file);
        if (seed) c.seed = seed;
        if (!journal_override.empty()) c.journal = journal_override;
        if (!report_out.empty()) c.report_out = report_out;
        for (auto* cmd : {runc, resume, report}) {
            if (cmd->parsed() && cmd->count("--format")) c.report_format = format;
        }

        if (runc->parsed()) return do_run(c, false, until_s);
        if (resume->parsed()) return do_run(c, true, until_s);
        if (report->parsed())
            return cmd_report(c, c.report_format,
                              report_out.empty() ? c.report_out : report_out);
        if (verify->parsed()) return cmd_verify(c);
        if (ingest->parsed()) return cmd_ingest(c, list_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

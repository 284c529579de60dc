#include "rep/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rep {

using nlohmann::json;

DrsFlavor parse_flavor(const std::string& name) {
    if (name == "cmip5") return DrsFlavor::Cmip5;
    if (name == "cmip6") return DrsFlavor::Cmip6;
    if (name == "generic") return DrsFlavor::Generic;
    throw InvalidSpec("unknown DRS flavor: " + name);
}

const std::vector<std::string>& cmip6_facets() {
    static const std::vector<std::string> facets = {
        "mip_era",       "activity_drs",  "institution_id", "source_id",
        "experiment_id", "member_id",     "table_id",       "variable_id",
        "grid_label",    "version"};
    return facets;
}

std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& label) {
    std::uint64_t z = fnv1a64(label) ^ (seed + 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

bool valid_segment(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

std::vector<std::string> split_segments(const std::string& raw) {
    std::vector<std::string> segs;
    std::string cur;
    for (char c : raw) {
        if (c == '/') {
            if (!cur.empty()) {
                segs.push_back(cur);
                cur.clear();
            } else if (!segs.empty()) {
                throw MalformedPath("empty path segment in '" + raw + "'");
            }
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) segs.push_back(cur);
    return segs;
}

}  // namespace

DatasetPath parse_drs_path(const std::string& raw, DrsFlavor flavor,
                           const std::vector<std::string>* facet_names) {
    auto segs = split_segments(raw);
    if (segs.empty()) throw MalformedPath("empty path");
    for (const auto& s : segs) {
        if (!valid_segment(s))
            throw MalformedPath("illegal path segment '" + s + "' in '" + raw + "'");
    }

    const std::vector<std::string>* names = nullptr;
    if (flavor == DrsFlavor::Cmip6) {
        names = &cmip6_facets();
    } else if (flavor == DrsFlavor::Cmip5) {
        if (facet_names == nullptr)
            throw InvalidSpec("cmip5 flavor requires a configured facet list");
        names = facet_names;
    }

    DatasetPath p;
    if (names != nullptr) {
        if (segs.size() < names->size())
            throw MalformedPath("expected at least " + std::to_string(names->size()) +
                                " facet segments, got " + std::to_string(segs.size()) +
                                " in '" + raw + "'");
        std::size_t n_prefix = segs.size() - names->size();
        for (std::size_t i = 0; i < n_prefix; ++i) {
            if (!p.prefix.empty()) p.prefix += '/';
            p.prefix += segs[i];
        }
        for (std::size_t i = 0; i < names->size(); ++i)
            p.components.emplace_back((*names)[i], segs[n_prefix + i]);
    } else {
        if (segs.size() > 11)
            throw MalformedPath("path deeper than 11 levels: '" + raw + "'");
        for (std::size_t i = 0; i < segs.size(); ++i)
            p.components.emplace_back("level" + std::to_string(i + 1), segs[i]);
    }
    return p;
}

DatasetPath dataset_path_from_formatted(const std::string& text) {
    auto segs = split_segments(text);
    if (segs.empty()) throw MalformedPath("empty path");
    DatasetPath p;
    for (std::size_t i = 0; i < segs.size(); ++i)
        p.components.emplace_back("level" + std::to_string(i + 1), segs[i]);
    return p;
}

std::string format_drs_path(const DatasetPath& p) {
    std::string out;
    if (!p.prefix.empty()) out += "/" + p.prefix;
    for (const auto& [name, value] : p.components) out += "/" + value;
    return out;
}

bool Catalog::contains(const DatasetPath& p) const {
    return tree_.count(format_drs_path(p)) != 0;
}

const std::vector<FileEntry>& Catalog::files_of(const DatasetPath& p) const {
    auto it = tree_.find(format_drs_path(p));
    if (it == tree_.end()) throw UnknownPath("not in catalog: " + format_drs_path(p));
    return it->second;
}

namespace {

std::uint64_t count_directories(const std::vector<FileEntry>& entries) {
    std::set<std::string> dirs;
    for (const auto& e : entries) {
        std::string d;
        for (std::size_t i = 0; i < e.rel_path.size(); ++i) {
            if (e.rel_path[i] == '/') dirs.insert(e.rel_path.substr(0, i));
        }
    }
    return 1 + dirs.size();  // the dataset directory itself plus subdirectories
}

Manifest make_manifest(const DatasetPath& p, std::vector<FileEntry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const FileEntry& a, const FileEntry& b) { return a.rel_path < b.rel_path; });
    Manifest m;
    m.path = p;
    m.directories = count_directories(entries);
    m.files = entries.size();
    for (const auto& e : entries) m.bytes += e.size;
    m.entries = std::move(entries);
    return m;
}

}  // namespace

Manifest Catalog::manifest(const DatasetPath& p) const {
    const std::string fp = format_drs_path(p);
    auto it = tree_.find(fp);
    if (it != tree_.end()) return make_manifest(p, it->second);

    // Subdirectory of a catalog path: find the owning path and filter.
    for (const auto& [cp, files] : tree_) {
        if (fp.size() > cp.size() && fp.compare(0, cp.size(), cp) == 0 && fp[cp.size()] == '/') {
            std::string rel = fp.substr(cp.size() + 1) + "/";
            std::vector<FileEntry> sub;
            for (const auto& e : files) {
                if (e.rel_path.size() > rel.size() &&
                    e.rel_path.compare(0, rel.size(), rel) == 0) {
                    sub.push_back({e.rel_path.substr(rel.size()), e.size, e.checksum});
                }
            }
            if (!sub.empty()) return make_manifest(p, std::move(sub));
        }
    }
    throw UnknownPath("not in catalog: " + fp);
}

std::vector<DatasetPath> Catalog::children(const DatasetPath& p) const {
    Manifest m = manifest(p);
    std::set<std::string> names;
    for (const auto& e : m.entries) {
        auto slash = e.rel_path.find('/');
        if (slash != std::string::npos) names.insert(e.rel_path.substr(0, slash));
    }
    std::vector<DatasetPath> out;
    for (const auto& n : names) {
        DatasetPath c = p;
        c.components.emplace_back("dir", n);
        out.push_back(std::move(c));
    }
    return out;
}

void Catalog::add_path(const DatasetPath& p, std::vector<FileEntry> files) {
    const std::string fp = format_drs_path(p);
    if (tree_.count(fp)) throw InvalidSpec("duplicate catalog path: " + fp);
    std::sort(files.begin(), files.end(),
              [](const FileEntry& a, const FileEntry& b) { return a.rel_path < b.rel_path; });
    for (const auto& f : files) {
        if (f.size == 0) throw InvalidSpec("zero-size file in " + fp);
    }
    paths_.push_back(p);
    tree_.emplace(fp, std::move(files));
    recount();
}

void Catalog::recount() {
    totals_ = {};
    for (const auto& [fp, files] : tree_) {
        totals_.directories += count_directories(files);
        totals_.files += files.size();
        for (const auto& f : files) totals_.bytes += f.size;
    }
}

std::uint64_t scan_entries(const Manifest& m) { return m.directories + m.files; }

namespace {

const char* kActivities[] = {"CMIP", "ScenarioMIP", "DAMIP", "RFMIP"};
const char* kExperiments[] = {"historical", "ssp245", "ssp585", "piControl", "amip"};
const char* kTables[] = {"Amon", "day", "EdayZ", "Omon", "fx", "6hrLev"};
const char* kVariables[] = {"tas", "pr", "hus", "psl", "ua", "va", "zg", "tos"};
const char* kGrids[] = {"gn", "gr", "gr1"};

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const T (&arr)[N]) {
    return arr[rng() % N];
}

}  // namespace

Catalog generate_catalog(const CatalogSpec& spec) {
    if (spec.n_paths < 1) throw InvalidSpec("n_paths must be >= 1");
    if (spec.files_min < 1 || spec.files_max < spec.files_min)
        throw InvalidSpec("files_per_path range invalid");
    if (!spec.fixed_size && spec.size_log_sigma < 0)
        throw InvalidSpec("size_log_sigma must be >= 0");

    Catalog c;
    c.seed_ = spec.seed;
    struct PendingFile {
        std::string path;
        FileEntry entry;
    };
    std::vector<PendingFile> all;

    const std::uint64_t cksum_seed = mix_seed(spec.seed, "checksum");
    for (std::size_t i = 0; i < spec.n_paths; ++i) {
        std::mt19937_64 rng(mix_seed(spec.seed, "path/" + std::to_string(i)));
        DatasetPath p;
        p.prefix = "css03_data";
        const auto& facets = cmip6_facets();
        std::string inst = "INST-" + std::to_string(rng() % 40);
        std::string model = "MODEL-" + std::to_string(rng() % 90);
        // member_id carries the path index so generated paths are unique
        std::string member = "r" + std::to_string(i + 1) + "i1p1f1";
        std::string version = "v2021" + std::to_string(100 + rng() % 12).substr(1) +
                              std::to_string(100 + 1 + rng() % 28).substr(1);
        std::string table = pick(rng, kTables);
        std::string var = pick(rng, kVariables);
        std::vector<std::string> values = {
            "CMIP6", pick(rng, kActivities), inst,  model, pick(rng, kExperiments),
            member,  table,                  var,   pick(rng, kGrids), version};
        for (std::size_t f = 0; f < facets.size(); ++f)
            p.components.emplace_back(facets[f], values[f]);

        std::uint32_t n_files =
            spec.files_min + static_cast<std::uint32_t>(
                                 rng() % (spec.files_max - spec.files_min + 1));
        std::lognormal_distribution<double> size_dist(spec.size_log_mean, spec.size_log_sigma);
        const std::string fp = format_drs_path(p);
        c.paths_.push_back(p);
        c.tree_.emplace(fp, std::vector<FileEntry>{});
        for (std::uint32_t f = 0; f < n_files; ++f) {
            FileEntry e;
            std::string name = var + "_" + table + "_" + member + "_" +
                               std::to_string(1850 + f) + ".nc";
            if (spec.subdirs > 0) {
                e.rel_path = "part" + std::to_string(f % spec.subdirs) + "/" + name;
            } else {
                e.rel_path = name;
            }
            if (spec.fixed_size) {
                e.size = *spec.fixed_size;
            } else {
                e.size = std::max<std::uint64_t>(
                    1, static_cast<std::uint64_t>(size_dist(rng)));
            }
            e.checksum = fnv1a64(fp + "/" + e.rel_path, cksum_seed);
            all.push_back({fp, e});
        }
    }

    if (spec.total_bytes) {
        long double cur = 0;
        for (const auto& pf : all) cur += pf.entry.size;
        if (cur <= 0) throw InvalidSpec("cannot rescale empty catalog");
        long double factor = static_cast<long double>(*spec.total_bytes) / cur;
        std::uint64_t assigned = 0;
        for (auto& pf : all) {
            pf.entry.size = std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(pf.entry.size * factor));
            assigned += pf.entry.size;
        }
        // remainder lands on the last file
        if (assigned < *spec.total_bytes) {
            all.back().entry.size += *spec.total_bytes - assigned;
        } else if (assigned > *spec.total_bytes) {
            std::uint64_t excess = assigned - *spec.total_bytes;
            if (all.back().entry.size <= excess)
                throw InvalidSpec("total_bytes too small for file count");
            all.back().entry.size -= excess;
        }
    }

    for (auto& pf : all) c.tree_[pf.path].push_back(std::move(pf.entry));
    for (auto& [fp, files] : c.tree_) {
        std::sort(files.begin(), files.end(),
                  [](const FileEntry& a, const FileEntry& b) { return a.rel_path < b.rel_path; });
    }
    c.recount();
    return c;
}

void Catalog::save(const std::string& file) const {
    json j;
    j["seed"] = seed_;
    j["paths"] = json::array();
    for (const auto& p : paths_) {
        json jp;
        jp["prefix"] = p.prefix;
        jp["facets"] = json::array();
        for (const auto& [name, value] : p.components)
            jp["facets"].push_back({name, value});
        jp["files"] = json::array();
        for (const auto& e : tree_.at(format_drs_path(p)))
            jp["files"].push_back({e.rel_path, e.size, e.checksum});
        j["paths"].push_back(std::move(jp));
    }
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write catalog file: " + file);
    out << j.dump() << "\n";
}

Catalog Catalog::load(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read catalog file: " + file);
    json j = json::parse(in);
    Catalog c;
    c.seed_ = j.at("seed").get<std::uint64_t>();
    for (const auto& jp : j.at("paths")) {
        DatasetPath p;
        p.prefix = jp.at("prefix").get<std::string>();
        for (const auto& f : jp.at("facets"))
            p.components.emplace_back(f.at(0).get<std::string>(), f.at(1).get<std::string>());
        std::vector<FileEntry> files;
        for (const auto& f : jp.at("files"))
            files.push_back({f.at(0).get<std::string>(), f.at(1).get<std::uint64_t>(),
                             f.at(2).get<std::uint64_t>()});
        c.paths_.push_back(p);
        c.tree_.emplace(format_drs_path(p), std::move(files));
    }
    c.recount();
    return c;
}

CatalogSpec catalog_spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot read catalog spec: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("bad catalog spec json: ") + e.what());
    }
    CatalogSpec s;
    s.n_paths = j.value("n_paths", std::size_t{1});
    s.files_min = j.value("files_min", 1u);
    s.files_max = j.value("files_max", s.files_min);
    s.size_log_mean = j.value("size_log_mean", 20.0);
    s.size_log_sigma = j.value("size_log_sigma", 1.0);
    if (j.contains("fixed_size")) s.fixed_size = j["fixed_size"].get<std::uint64_t>();
    if (j.contains("total_bytes")) s.total_bytes = j["total_bytes"].get<std::uint64_t>();
    s.subdirs = j.value("subdirs", 0u);
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
}

std::vector<DatasetPath> load_path_list(std::istream& in, DrsFlavor flavor) {
    std::vector<DatasetPath> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        std::string t = line.substr(start, end - start + 1);
        if (t.empty() || t[0] == '#') continue;
        try {
            DatasetPath p = parse_drs_path(t, flavor);
            if (seen.insert(format_drs_path(p)).second) out.push_back(std::move(p));
        } catch (const MalformedPath& e) {
            throw MalformedPath("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<DatasetPath> load_path_list_file(const std::string& file, DrsFlavor flavor) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read path list: " + file);
    return load_path_list(in, flavor);
}

void save_path_list(std::ostream& out, const std::vector<DatasetPath>& paths) {
    for (const auto& p : paths) out << format_drs_path(p) << "\n";
}

}  // namespace rep

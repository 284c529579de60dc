#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rep {

enum class DrsFlavor { Cmip5, Cmip6, Generic };

DrsFlavor parse_flavor(const std::string& name);

/// The ten CMIP6 facet names, in hierarchy order.
const std::vector<std::string>& cmip6_facets();

struct MalformedPath : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownPath : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A DRS-structured directory path; the unit of replication.
struct DatasetPath {
    std::string prefix;  // leading storage-root segment, may be empty
    std::vector<std::pair<std::string, std::string>> components;  // (facet, value)

    std::size_t depth() const { return components.size(); }
    bool operator==(const DatasetPath&) const = default;
};

DatasetPath parse_drs_path(const std::string& raw, DrsFlavor flavor,
                           const std::vector<std::string>* facet_names = nullptr);
std::string format_drs_path(const DatasetPath& p);

/// Reconstruct a path from its canonical text without flavor or depth checks.
/// Used when deserializing rows whose paths may include split-child levels.
DatasetPath dataset_path_from_formatted(const std::string& text);

struct FileEntry {
    std::string rel_path;  // may contain '/' for subdirectories
    std::uint64_t size = 0;
    std::uint64_t checksum = 0;

    bool operator==(const FileEntry&) const = default;
};

struct CatalogTotals {
    std::uint64_t directories = 0;
    std::uint64_t files = 0;
    std::uint64_t bytes = 0;
    bool operator==(const CatalogTotals&) const = default;
};

struct Manifest {
    DatasetPath path;
    std::vector<FileEntry> entries;  // sorted by rel_path
    std::uint64_t directories = 0;
    std::uint64_t files = 0;
    std::uint64_t bytes = 0;

    bool operator==(const Manifest&) const = default;
};

struct CatalogSpec {
    std::size_t n_paths = 1;
    // files per path: uniform integer range
    std::uint32_t files_min = 1;
    std::uint32_t files_max = 1;
    // file sizes: log-normal (of ln-bytes) unless fixed_size set
    double size_log_mean = 20.0;  // ~e^20 B ≈ 485 MB
    double size_log_sigma = 1.0;
    std::optional<std::uint64_t> fixed_size;
    // when set, sizes are rescaled so the catalog totals exactly this
    std::optional<std::uint64_t> total_bytes;
    // subdirectories under each dataset path (0 = flat)
    std::uint32_t subdirs = 0;
    std::uint64_t seed = 0;
};

CatalogSpec catalog_spec_from_json_file(const std::string& path);

class Catalog {
public:
    Catalog() = default;

    const std::vector<DatasetPath>& paths() const { return paths_; }
    const CatalogTotals& totals() const { return totals_; }
    std::uint64_t seed() const { return seed_; }

    bool contains(const DatasetPath& p) const;
    const std::vector<FileEntry>& files_of(const DatasetPath& p) const;

    /// Manifest of a catalog path or of a subdirectory of one.
    Manifest manifest(const DatasetPath& p) const;

    /// Immediate child directory paths of p. Empty if p is a leaf.
    std::vector<DatasetPath> children(const DatasetPath& p) const;

    void add_path(const DatasetPath& p, std::vector<FileEntry> files);

    void save(const std::string& file) const;
    static Catalog load(const std::string& file);

private:
    friend Catalog generate_catalog(const CatalogSpec&);
    void recount();

    std::vector<DatasetPath> paths_;
    std::map<std::string, std::vector<FileEntry>> tree_;  // formatted path -> files
    CatalogTotals totals_;
    std::uint64_t seed_ = 0;
};

Catalog generate_catalog(const CatalogSpec& spec);

/// Directory + file count of a manifest; what a source-side scan enumerates.
std::uint64_t scan_entries(const Manifest& m);

std::vector<DatasetPath> load_path_list(std::istream& in, DrsFlavor flavor = DrsFlavor::Generic);
std::vector<DatasetPath> load_path_list_file(const std::string& file, DrsFlavor flavor = DrsFlavor::Generic);
void save_path_list(std::ostream& out, const std::vector<DatasetPath>& paths);

/// 64-bit FNV-1a. Deterministic identity hash used for synthetic checksums.
std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed = 0xcbf29ce484222325ull);

/// Stateless mix of a seed and a label into a fresh 64-bit stream seed.
std::uint64_t mix_seed(std::uint64_t seed, const std::string& label);

}  // namespace rep

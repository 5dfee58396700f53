#pragma once

// Critical-value table files and the on-disk cache keyed by
// CriticalValueTable::key().
//
// File layout (JSON, keys in this order):
//   {"schema": "tailshift.critvals/1", "functional": "g",
//    "params": {"trim": 0.0275}, "steps": 5000, "paths": 10000, "seed": 7,
//    "quantiles": [{"q": 0.95, "value": 39.63...}, ...], "created": null}
// Doubles are printed in shortest round-trip form, so reading a file back
// reproduces every value bit for bit.

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "tailshift/limitsim.hpp"

namespace tailshift {

std::string table_to_json(const CriticalValueTable& t);
CriticalValueTable table_from_json(const std::string& text);

CriticalValueTable read_table(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it into place.
void write_table(const CriticalValueTable& t, const std::filesystem::path& path);

// Directory named by TAILSHIFT_CACHE_DIR, else ".tailshift-cache".
std::filesystem::path default_cache_dir();

class TableCache {
public:
    explicit TableCache(std::filesystem::path dir = default_cache_dir());

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::filesystem::path path_for(const CriticalValueTable& key_only) const;

    // Exact-key lookup; nullopt when absent.
    std::optional<CriticalValueTable> load(const FunctionalSpec& f, std::size_t steps, std::size_t paths,
                                           std::uint64_t seed) const;
    void store(const CriticalValueTable& t) const;

    // Loads the table, or simulates and stores it when absent. A cached table
    // lacking a requested quantile is re-simulated with the union of levels.
    CriticalValueTable get_or_simulate(const FunctionalSpec& f, std::size_t steps, std::size_t paths,
                                       std::uint64_t seed, std::span<const double> qs, unsigned threads = 0) const;

private:
    std::filesystem::path dir_;
};

}  // namespace tailshift

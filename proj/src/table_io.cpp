#include "tailshift/table_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "tailshift/error.hpp"

namespace tailshift {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSchema = "tailshift.critvals/1";

std::string norm_name(HtildeNormalization n) {
    return n == HtildeNormalization::AsPrinted ? "as-printed" : "data-consistent";
}

bool has_level(const CriticalValueTable& t, double q) {
    return std::any_of(t.quantiles.begin(), t.quantiles.end(),
                       [q](const auto& e) { return std::abs(e.first - q) <= 1e-12; });
}

}  // namespace

std::string table_to_json(const CriticalValueTable& t) {
    json j;
    j["schema"] = kSchema;
    j["functional"] = functional_name(t.functional.id);
    json params = json::object();
    if (t.functional.id == FunctionalId::G) params["trim"] = t.functional.param;
    if (t.functional.id == FunctionalId::Htilde) {
        params["delta"] = t.functional.param;
        params["normalization"] = norm_name(t.functional.norm);
    }
    j["params"] = params;
    j["steps"] = t.steps;
    j["paths"] = t.paths;
    j["seed"] = t.seed;
    json qs = json::array();
    for (const auto& [q, v] : t.quantiles) qs.push_back(json{{"q", q}, {"value", v}});
    j["quantiles"] = qs;
    j["created"] = t.created ? json(*t.created) : json(nullptr);
    return j.dump(2) + "\n";
}

CriticalValueTable table_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        require(j.at("schema").get<std::string>() == kSchema, ErrorCategory::Io,
                "unsupported critical-value table schema");
        CriticalValueTable t;
        t.functional.id = parse_functional(j.at("functional").get<std::string>());
        const json& params = j.at("params");
        if (t.functional.id == FunctionalId::G) t.functional.param = params.at("trim").get<double>();
        if (t.functional.id == FunctionalId::Htilde) {
            t.functional.param = params.at("delta").get<double>();
            const auto n = params.at("normalization").get<std::string>();
            require(n == "as-printed" || n == "data-consistent", ErrorCategory::Io, "unknown normalization " + n);
            t.functional.norm = n == "as-printed" ? HtildeNormalization::AsPrinted : HtildeNormalization::DataConsistent;
        }
        t.steps = j.at("steps").get<std::size_t>();
        t.paths = j.at("paths").get<std::size_t>();
        t.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& e : j.at("quantiles")) {
            t.quantiles.emplace_back(e.at("q").get<double>(), e.at("value").get<double>());
        }
        if (!j.at("created").is_null()) t.created = j.at("created").get<std::string>();
        return t;
    } catch (const json::exception& e) {
        fail(ErrorCategory::Io, std::string("malformed critical-value table: ") + e.what());
    }
}

CriticalValueTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCategory::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return table_from_json(ss.str());
}

void write_table(const CriticalValueTable& t, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCategory::Io, "cannot write " + tmp);
        out << table_to_json(t);
        out.flush();
        require(static_cast<bool>(out), ErrorCategory::Io, "short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        fail(ErrorCategory::Io, "cannot move table into " + path.string() + ": " + ec.message());
    }
}

std::filesystem::path default_cache_dir() {
    if (const char* d = std::getenv("TAILSHIFT_CACHE_DIR"); d != nullptr && *d != '\0') return d;
    return ".tailshift-cache";
}

TableCache::TableCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path TableCache::path_for(const CriticalValueTable& key_only) const {
    return dir_ / (key_only.key() + ".json");
}

std::optional<CriticalValueTable> TableCache::load(const FunctionalSpec& f, std::size_t steps, std::size_t paths,
                                                   std::uint64_t seed) const {
    CriticalValueTable k;
    k.functional = f;
    k.steps = steps;
    k.paths = paths;
    k.seed = seed;
    const auto p = path_for(k);
    if (!std::filesystem::exists(p)) return std::nullopt;
    CriticalValueTable t = read_table(p);
    require(t.key() == k.key(), ErrorCategory::Io, "cached table " + p.string() + " does not match its key");
    return t;
}

void TableCache::store(const CriticalValueTable& t) const { write_table(t, path_for(t)); }

CriticalValueTable TableCache::get_or_simulate(const FunctionalSpec& f, std::size_t steps, std::size_t paths,
                                               std::uint64_t seed, std::span<const double> qs,
                                               unsigned threads) const {
    std::vector<double> levels(qs.begin(), qs.end());
    if (auto t = load(f, steps, paths, seed)) {
        if (std::all_of(levels.begin(), levels.end(), [&](double q) { return has_level(*t, q); })) return *t;
        for (const auto& e : t->quantiles) levels.push_back(e.first);
    }
    CriticalValueTable t = estimate_quantiles(f, paths, steps, levels, seed, threads);
    store(t);
    return t;
}

}  // namespace tailshift

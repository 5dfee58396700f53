#pragma once

// CSV ingestion and the rolling-window interval band.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tailshift/intervals.hpp"
#include "tailshift/series.hpp"

namespace tailshift {

// A column chosen by header name or by 1-based position.
struct ColumnSelector {
    std::optional<std::string> name;
    std::optional<std::size_t> position;

    static ColumnSelector parse(const std::string& s);  // digits select a position
    std::string describe() const;
};

struct CsvOptions {
    ColumnSelector value{std::nullopt, 2};
    std::optional<ColumnSelector> date;  // kept as opaque timestamps
    bool has_header = true;
};

// Comma-delimited, '.' decimal point, optional double quotes around cells.
// Rows are counted from 1 at the first line of the file.
TimeSeries read_csv(const std::filesystem::path& path, const CsvOptions& options);
TimeSeries parse_csv(const std::string& text, const CsvOptions& options);

struct BandRow {
    std::size_t first = 0;  // 1-based window bounds
    std::size_t last = 0;
    std::string first_label, last_label;
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool degenerate = false;  // lo = hi = center when the interval collapsed
};

struct RollingBandResult {
    IntervalMethod method = IntervalMethod::SelfNorm;
    std::size_t window = 0;
    std::size_t shift = 0;
    double level = 0.95;
    std::vector<BandRow> rows;
};

// Windows start at 1, 1 + shift, 1 + 2 shift, ... while a full window fits.
// `critvals` is required for the self-normalized method.
RollingBandResult rolling_band(const TimeSeries& series, const RiskSpec& spec, std::size_t window,
                               std::size_t shift, IntervalMethod method, double level,
                               const CriticalValueTable* critvals, std::size_t sections = 10);

}  // namespace tailshift

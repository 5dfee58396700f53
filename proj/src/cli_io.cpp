#include "tailshift/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tailshift/error.hpp"

namespace tailshift {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i < line.size() && line[i] == '"') quoted = !quoted;
        if (i == line.size() || (line[i] == ',' && !quoted)) {
            cells.push_back(trim(std::string_view(line).substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

std::size_t resolve(const ColumnSelector& sel, const std::vector<std::string>& header) {
    if (sel.name) {
        const auto it = std::find(header.begin(), header.end(), *sel.name);
        require(it != header.end(), ErrorCategory::InvalidInput, "missing column " + sel.describe());
        return static_cast<std::size_t>(it - header.begin());
    }
    require(sel.position && *sel.position >= 1, ErrorCategory::InvalidInput, "column positions start at 1");
    return *sel.position - 1;
}

}  // namespace

ColumnSelector ColumnSelector::parse(const std::string& s) {
    require(!s.empty(), ErrorCategory::InvalidInput, "empty column selector");
    if (std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
        return {std::nullopt, static_cast<std::size_t>(std::stoul(s))};
    }
    return {s, std::nullopt};
}

std::string ColumnSelector::describe() const {
    if (name) return "'" + *name + "'";
    return position ? std::to_string(*position) : "?";
}

TimeSeries parse_csv(const std::string& text, const CsvOptions& options) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    std::optional<std::size_t> value_col, date_col;
    std::vector<double> values;
    std::vector<std::string> dates;

    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (options.has_header && header.empty()) {
            header = cells;
            value_col = resolve(options.value, header);
            if (options.date) date_col = resolve(*options.date, header);
            continue;
        }
        if (!value_col) {
            require(!options.value.name, ErrorCategory::InvalidInput,
                    "column " + options.value.describe() + " selected by name but the file has no header");
            value_col = resolve(options.value, {});
            if (options.date) {
                require(!options.date->name, ErrorCategory::InvalidInput,
                        "date column selected by name but the file has no header");
                date_col = resolve(*options.date, {});
            }
        }
        require(*value_col < cells.size(), ErrorCategory::InvalidInput,
                "row " + std::to_string(row) + " has no column " + options.value.describe());
        const std::string& cell = cells[*value_col];
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
            fail(ErrorCategory::InvalidInput, "row " + std::to_string(row) + ", column " + options.value.describe() +
                                                  ": cannot parse '" + cell + "' as a finite number");
        }
        values.push_back(v);
        if (date_col) {
            require(*date_col < cells.size(), ErrorCategory::InvalidInput,
                    "row " + std::to_string(row) + " has no date column");
            dates.push_back(cells[*date_col]);
        }
    }
    require(!values.empty(), ErrorCategory::InvalidInput, "the CSV input has no data rows");
    if (date_col) return TimeSeries(std::move(values), std::move(dates));
    return TimeSeries(std::move(values));
}

TimeSeries read_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCategory::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), options);
}

RollingBandResult rolling_band(const TimeSeries& series, const RiskSpec& spec, std::size_t window,
                               std::size_t shift, IntervalMethod method, double level,
                               const CriticalValueTable* critvals, std::size_t sections) {
    const std::size_t n = series.size();
    require(window >= 1 && window <= n, ErrorCategory::InvalidInput,
            "window must lie in [1, " + std::to_string(n) + "]");
    require(shift >= 1 && shift <= window, ErrorCategory::InvalidInput, "shift must lie in [1, window]");
    if (method == IntervalMethod::SelfNorm) {
        require(critvals != nullptr, ErrorCategory::MissingTable, "self-normalized bands need a lobato table");
    }
    RollingBandResult out;
    out.method = method;
    out.window = window;
    out.shift = shift;
    out.level = level;
    for (std::size_t first = 1; first + window - 1 <= n; first += shift) {
        const std::size_t last = first + window - 1;
        const TimeSeries w = series.slice(first, last);
        BandRow row;
        row.first = first;
        row.last = last;
        if (series.has_timestamps()) {
            row.first_label = series.timestamps()[first - 1];
            row.last_label = series.timestamps()[last - 1];
        }
        try {
            const IntervalResult r = method == IntervalMethod::Sectioning
                                         ? sectioning_interval(w, spec, sections, level)
                                         : selfnorm_interval(w, spec, level, *critvals);
            row.point = r.point;
            row.lo = r.lo;
            row.hi = r.hi;
        } catch (const DegenerateError& e) {
            row.degenerate = true;
            row.point = row.lo = row.hi = e.center();
        }
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace tailshift

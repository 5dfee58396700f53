#pragma once

// Reference implementations used only by tests. They follow the written
// definitions literally (sort, scan, sum) and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

// inf{x : F^(x) >= p}, scanning the sorted sample.
inline double var(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double len = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t le = i + 1;
        while (le < v.size() && v[le] == v[i]) ++le;
        if (static_cast<double>(le) / len >= p - 1e-12) return v[i];
    }
    return v.back();
}

inline double es(const std::vector<double>& v, double p) {
    const double q = var(v, p);
    long double s = 0.0L;
    for (double x : v) {
        if (x >= q) s += x;
    }
    return static_cast<double>(s / ((1.0L - p) * static_cast<long double>(v.size())));
}

// ES^ on X_l..X_m, 1-based inclusive.
inline double es_seg(const std::vector<double>& x, std::size_t l, std::size_t m, double p) {
    return es(std::vector<double>(x.begin() + static_cast<long>(l - 1), x.begin() + static_cast<long>(m)), p);
}

// All-segment ES table by sorted insertion: t[l][m] = ES^_{l:m}.
struct SegmentTable {
    std::size_t n;
    std::vector<double> t;
    double at(std::size_t l, std::size_t m) const { return t[(l - 1) * n + (m - 1)]; }
};

inline SegmentTable segment_table(const std::vector<double>& x, double p) {
    const std::size_t n = x.size();
    SegmentTable out{n, std::vector<double>(n * n, std::nan(""))};
    for (std::size_t l = 1; l <= n; ++l) {
        std::vector<double> sorted;
        for (std::size_t m = l; m <= n; ++m) {
            sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), x[m - 1]), x[m - 1]);
            const double len = static_cast<double>(sorted.size());
            std::size_t r = 0;
            while (r < sorted.size()) {
                std::size_t le = r + 1;
                while (le < sorted.size() && sorted[le] == sorted[r]) ++le;
                if (static_cast<double>(le) / len >= p - 1e-12) break;
                r = le;
            }
            long double s = 0.0L;
            for (std::size_t i = r; i < sorted.size(); ++i) s += sorted[i];
            out.t[(l - 1) * n + (m - 1)] = static_cast<double>(s / ((1.0L - p) * static_cast<long double>(len)));
        }
    }
    return out;
}

inline bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline std::vector<double> random_series(std::mt19937_64& gen, std::size_t n, bool with_ties = false) {
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> small(-4, 4);
    std::vector<double> v(n);
    for (auto& x : v) x = with_ties ? static_cast<double>(small(gen)) : z(gen);
    return v;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "texclass/common.hpp"

namespace texclass {

// Normalized bin-weight vector, stored sparsely (bin layouts reach 2^24 bins
// for LBP at P=24, while any single window holds at most W*W distinct codes).
// Entries are sorted by bin index and hold strictly positive weights.
struct Histogram {
    std::uint64_t layout_id = 0;
    std::size_t bin_count = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    double at(std::uint32_t bin) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), bin,
                                   [](const auto& e, std::uint32_t b) { return e.first < b; });
        return (it != entries.end() && it->first == bin) ? it->second : 0.0;
    }

    double sum() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.second;
        return s;
    }

    std::size_t nonzero_count() const { return entries.size(); }

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Builds a normalized histogram from integer counts (weight = count/total, so
// a bin holding every sample is exactly 1).
inline Histogram histogram_from_counts(const std::vector<std::pair<std::uint32_t, std::uint64_t>>& counts,
                                       std::size_t bin_count, std::uint64_t layout_id) {
    Histogram h;
    h.layout_id = layout_id;
    h.bin_count = bin_count;
    std::uint64_t total = 0;
    for (const auto& c : counts) total += c.second;
    if (total == 0) throw error("histogram: no samples");
    h.entries.reserve(counts.size());
    for (const auto& c : counts) {
        if (c.first >= bin_count) throw error("histogram: bin index out of range");
        if (c.second > 0)
            h.entries.push_back(
                {c.first, static_cast<double>(c.second) / static_cast<double>(total)});
    }
    if (!std::is_sorted(h.entries.begin(), h.entries.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; }))
        throw error("histogram: counts not sorted by bin");
    return h;
}

// Sorts a code multiset in place and bins it into a normalized histogram.
inline Histogram histogram_from_codes(std::vector<std::uint32_t>& codes, std::size_t bin_count,
                                      std::uint64_t layout_id) {
    if (codes.empty()) throw error("histogram: no samples");
    std::sort(codes.begin(), codes.end());
    std::vector<std::pair<std::uint32_t, std::uint64_t>> counts;
    for (std::size_t i = 0; i < codes.size();) {
        std::size_t j = i;
        while (j < codes.size() && codes[j] == codes[i]) ++j;
        counts.push_back({codes[i], j - i});
        i = j;
    }
    return histogram_from_counts(counts, bin_count, layout_id);
}

// Concatenates normalized histograms; each of the n parts ends up with total
// weight 1/n so that no part dominates a distance computation by bin count.
inline Histogram concat(const std::vector<Histogram>& parts) {
    if (parts.empty()) throw error("concat: empty histogram list");
    Histogram out;
    out.bin_count = 0;
    double n = static_cast<double>(parts.size());
    std::uint64_t id = 0xcbf29ce484222325ull;
    for (const auto& p : parts) {
        double s = p.sum();
        if (s < 1.0 - 1e-6 || s > 1.0 + 1e-6)
            throw error("concat: input histogram not normalized");
        id = fnv1a_value(p.layout_id, id);
        std::uint32_t off = static_cast<std::uint32_t>(out.bin_count);
        for (const auto& e : p.entries)
            out.entries.push_back({off + e.first, e.second / n});
        out.bin_count += p.bin_count;
    }
    out.layout_id = parts.size() == 1 ? parts[0].layout_id : id;
    return out;
}

} // namespace texclass

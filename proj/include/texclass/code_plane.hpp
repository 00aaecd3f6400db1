#pragma once

#include <cstdint>
#include <vector>

#include "texclass/descriptors.hpp"
#include "texclass/histogram.hpp"
#include "texclass/raster.hpp"

namespace texclass {

// Cached per-pixel descriptor bin indices for one component. Pixels whose
// neighborhood would leave the raster carry the sentinel.
struct CodePlane {
    static constexpr std::uint32_t invalid = 0xFFFFFFFFu;

    int width = 0;
    int height = 0;
    int border = 0;
    std::uint32_t bins = 0;
    std::uint64_t layout_id = 0;
    std::vector<std::uint32_t> codes;

    std::uint32_t at(int x, int y) const {
        return codes[static_cast<std::size_t>(y) * width + x];
    }
};

inline CodePlane code_plane(const Raster& img, const DescriptorConfig& cfg, const Component& comp) {
    cfg.validate();
    CircleSampler sampler(comp.scale.p, comp.scale.r);
    int border = sampler.border();
    if (img.width < 2 * border + 1 || img.height < 2 * border + 1)
        throw error("code_plane: raster too small for radius");

    CodePlane plane;
    plane.width = img.width;
    plane.height = img.height;
    plane.border = border;
    plane.bins = static_cast<std::uint32_t>(component_bins(cfg, comp));
    plane.layout_id = component_layout_id(cfg, comp);
    plane.codes.assign(static_cast<std::size_t>(img.width) * img.height, CodePlane::invalid);

    std::vector<double> scratch(static_cast<std::size_t>(comp.scale.p));
    for (int y = border; y < img.height - border; ++y) {
        std::uint32_t* row = plane.codes.data() + static_cast<std::size_t>(y) * img.width;
        for (int x = border; x < img.width - border; ++x)
            row[x] = component_code(img, x, y, cfg, comp, sampler, scratch.data());
    }
    return plane;
}

// Convenience: one plane per component of the descriptor.
inline std::vector<CodePlane> code_planes(const Raster& img, const DescriptorConfig& cfg) {
    std::vector<CodePlane> out;
    for (const auto& c : components(cfg)) out.push_back(code_plane(img, cfg, c));
    return out;
}

// W x W pixel window centered at (cx, cy). Even windows split asymmetrically:
// (W-1)/2 columns to the left of the center, W/2 to the right (same for rows).
struct WindowSpan {
    int before = 0;
    int after = 0;
    explicit WindowSpan(int w)
        : before((w - 1) / 2), after(w - 1 - (w - 1) / 2) {}
};

// Histogram of the codes inside the window, L1-normalized.
inline Histogram window_histogram(const CodePlane& plane, int cx, int cy, int w) {
    if (w < 1) throw error("window: size must be >= 1");
    WindowSpan span(w);
    if (cx - span.before < plane.border || cy - span.before < plane.border ||
        cx + span.after >= plane.width - plane.border ||
        cy + span.after >= plane.height - plane.border)
        throw error("window: touches border band");

    std::vector<std::uint32_t> codes;
    codes.reserve(static_cast<std::size_t>(w) * w);
    for (int y = cy - span.before; y <= cy + span.after; ++y)
        for (int x = cx - span.before; x <= cx + span.after; ++x)
            codes.push_back(plane.at(x, y));
    return histogram_from_codes(codes, plane.bins, plane.layout_id);
}

// Full-descriptor window signature: per-component window histograms, then
// concatenation when the descriptor has several parts.
inline Histogram descriptor_window_histogram(const std::vector<CodePlane>& planes,
                                             const DescriptorConfig& cfg, int cx, int cy, int w) {
    auto comps = components(cfg);
    if (planes.size() != comps.size()) throw error("window: plane/component count mismatch");
    std::vector<Histogram> parts;
    parts.reserve(planes.size());
    for (const auto& p : planes) parts.push_back(window_histogram(p, cx, cy, w));
    Histogram h = concat(parts);
    h.layout_id = layout_id(cfg);
    return h;
}

} // namespace texclass

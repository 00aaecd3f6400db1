#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "texclass/common.hpp"
#include "texclass/histogram.hpp"
#include "texclass/raster.hpp"

namespace texclass {

enum class DescriptorKind { lbp, lbpriu, var, wld, lbpriu_var, wld_var };

inline const char* kind_name(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::lbp: return "lbp";
        case DescriptorKind::lbpriu: return "lbpriu";
        case DescriptorKind::var: return "var";
        case DescriptorKind::wld: return "wld";
        case DescriptorKind::lbpriu_var: return "lbpriu_var";
        case DescriptorKind::wld_var: return "wld_var";
    }
    return "?";
}

inline DescriptorKind kind_from_name(const std::string& s) {
    if (s == "lbp") return DescriptorKind::lbp;
    if (s == "lbpriu") return DescriptorKind::lbpriu;
    if (s == "var") return DescriptorKind::var;
    if (s == "wld") return DescriptorKind::wld;
    if (s == "lbpriu_var") return DescriptorKind::lbpriu_var;
    if (s == "wld_var") return DescriptorKind::wld_var;
    throw error("unknown descriptor kind '" + s + "'");
}

struct ScalePair {
    int p = 8;
    double r = 1.0;
    friend bool operator==(const ScalePair&, const ScalePair&) = default;
};

// WLD joint-histogram shape: T orientation bins, M excitation segments,
// S sub-bins per segment. Defaults follow the original WLD formulation.
struct WldParams {
    int t = 8;
    int m = 6;
    int s = 20;
    friend bool operator==(const WldParams&, const WldParams&) = default;
};

struct DescriptorConfig {
    DescriptorKind kind = DescriptorKind::lbp;
    std::vector<ScalePair> scales = {{8, 1.0}};
    int var_bins = 16;
    std::vector<double> var_boundaries; // set by training, shared across scales
    WldParams wld;

    bool uses_var() const {
        return kind == DescriptorKind::var || kind == DescriptorKind::lbpriu_var ||
               kind == DescriptorKind::wld_var;
    }

    void validate() const {
        if (scales.empty()) throw error("config: scales must be nonempty");
        for (const auto& s : scales) {
            if (s.p < 4) throw error("config: P must be >= 4");
            if (s.p > 24) throw error("config: P must be <= 24");
            if (s.r < 1.0) throw error("config: R must be >= 1");
        }
        if (var_bins < 2) throw error("config: var_bins must be >= 2");
        if (wld.t < 1 || wld.m < 1 || wld.s < 1) throw error("config: WLD params must be >= 1");
        for (std::size_t i = 1; i < var_boundaries.size(); ++i)
            if (!(var_boundaries[i - 1] < var_boundaries[i]))
                throw error("config: var boundaries not strictly ascending");
    }

    friend bool operator==(const DescriptorConfig&, const DescriptorConfig&) = default;
};

// Single-scale building blocks of a (possibly concatenated) descriptor.
enum class ComponentKind { lbp, lbpriu, var, wld };

struct Component {
    ComponentKind kind;
    ScalePair scale;
    friend bool operator==(const Component&, const Component&) = default;
};

// Concatenation layout: scale-major, primary descriptor before VAR at each
// scale. E.g. wld_var at {(8,1),(16,2)} = [WLD(8,1), VAR(8,1), WLD(16,2), VAR(16,2)].
inline std::vector<Component> components(const DescriptorConfig& cfg) {
    std::vector<Component> out;
    for (const auto& s : cfg.scales) {
        switch (cfg.kind) {
            case DescriptorKind::lbp: out.push_back({ComponentKind::lbp, s}); break;
            case DescriptorKind::lbpriu: out.push_back({ComponentKind::lbpriu, s}); break;
            case DescriptorKind::var: out.push_back({ComponentKind::var, s}); break;
            case DescriptorKind::wld: out.push_back({ComponentKind::wld, s}); break;
            case DescriptorKind::lbpriu_var:
                out.push_back({ComponentKind::lbpriu, s});
                out.push_back({ComponentKind::var, s});
                break;
            case DescriptorKind::wld_var:
                out.push_back({ComponentKind::wld, s});
                out.push_back({ComponentKind::var, s});
                break;
        }
    }
    return out;
}

inline std::size_t component_bins(const DescriptorConfig& cfg, const Component& c) {
    switch (c.kind) {
        case ComponentKind::lbp: return std::size_t(1) << c.scale.p;
        case ComponentKind::lbpriu: return static_cast<std::size_t>(c.scale.p) + 2;
        case ComponentKind::var:
            return cfg.var_boundaries.empty() ? static_cast<std::size_t>(cfg.var_bins)
                                              : cfg.var_boundaries.size() + 1;
        case ComponentKind::wld:
            return static_cast<std::size_t>(cfg.wld.t) * cfg.wld.m * cfg.wld.s;
    }
    return 0;
}

inline std::size_t bin_count(const DescriptorConfig& cfg) {
    std::size_t n = 0;
    for (const auto& c : components(cfg)) n += component_bins(cfg, c);
    return n;
}

// Widest neighborhood radius used by any component; the code planes carry a
// sentinel border band of this width.
inline int max_border(const DescriptorConfig& cfg) {
    int b = 0;
    for (const auto& s : cfg.scales) b = std::max(b, static_cast<int>(std::ceil(s.r)));
    return b;
}

inline std::uint64_t component_layout_id(const DescriptorConfig& cfg, const Component& c) {
    std::uint64_t h = fnv1a_value(static_cast<int>(c.kind), 0xcbf29ce484222325ull);
    h = fnv1a_value(c.scale.p, h);
    h = fnv1a_value(c.scale.r, h);
    if (c.kind == ComponentKind::var) {
        h = fnv1a_value(cfg.var_bins, h);
        for (double b : cfg.var_boundaries) h = fnv1a_value(b, h);
    }
    if (c.kind == ComponentKind::wld) {
        h = fnv1a_value(cfg.wld.t, h);
        h = fnv1a_value(cfg.wld.m, h);
        h = fnv1a_value(cfg.wld.s, h);
    }
    return h;
}

inline std::uint64_t layout_id(const DescriptorConfig& cfg) {
    auto comps = components(cfg);
    if (comps.size() == 1) return component_layout_id(cfg, comps[0]);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& c : comps) h = fnv1a_value(component_layout_id(cfg, c), h);
    return h;
}

// ---------------------------------------------------------------------------
// Per-pixel kernels. `samples` is the CircleSampler output (neighbor
// brightness values), `center` the focus pixel brightness.

// LBP code: sum over neighbors of u(t_i - t_c) * 2^i, with u(0) = 1.
inline std::uint32_t lbp_code(const double* samples, int p, double center) {
    std::uint32_t code = 0;
    for (int i = 0; i < p; ++i)
        if (samples[i] >= center) code |= (std::uint32_t(1) << i);
    return code;
}

// Number of 0/1 transitions around the circular pattern, wrap-around included.
inline int uniformity(const double* samples, int p, double center) {
    int u = 0;
    bool prev = samples[p - 1] >= center;
    for (int i = 0; i < p; ++i) {
        bool cur = samples[i] >= center;
        if (cur != prev) ++u;
        prev = cur;
    }
    return u;
}

// Rotation-invariant uniform mapping: uniform patterns (U <= 2) map to their
// set-bit count in [0, P], everything else to the miscellaneous bin P+1.
inline std::uint32_t lbpriu_code(const double* samples, int p, double center) {
    if (uniformity(samples, p, center) > 2) return static_cast<std::uint32_t>(p) + 1;
    std::uint32_t ones = 0;
    for (int i = 0; i < p; ++i)
        if (samples[i] >= center) ++ones;
    return ones;
}

// Population variance of the neighbor samples (center excluded).
inline double var_value(const double* samples, int p) {
    double mean = 0.0;
    for (int i = 0; i < p; ++i) mean += samples[i];
    mean /= p;
    double acc = 0.0;
    for (int i = 0; i < p; ++i) {
        double d = samples[i] - mean;
        acc += d * d;
    }
    return acc / p;
}

// Differential excitation: arctan of the summed Weber ratios. The denominator
// is floored at 1 DN so a zero-brightness center stays finite.
inline double wld_excitation(const double* samples, int p, double center) {
    double denom = std::max(center, 1.0);
    double acc = 0.0;
    for (int i = 0; i < p; ++i) acc += samples[i] - center;
    return std::atan(acc / denom);
}

// Gradient direction from the four cardinal samples at distance R, mapped to
// [0, 2*pi). Flat cardinal cross (both differences zero) is defined as 0.
inline double wld_theta(const Raster& img, int cx, int cy, double r) {
    double n, e, s, w;
    int ri = static_cast<int>(r);
    if (static_cast<double>(ri) == r) { // integer radius: exact pixel reads
        n = img.at(cx, cy - ri);
        e = img.at(cx + ri, cy);
        s = img.at(cx, cy + ri);
        w = img.at(cx - ri, cy);
    } else {
        n = bilinear_sample(img, cx, cy - r);
        e = bilinear_sample(img, cx + r, cy);
        s = bilinear_sample(img, cx, cy + r);
        w = bilinear_sample(img, cx - r, cy);
    }
    double dy = s - n;
    double dx = e - w;
    if (dx == 0.0 && dy == 0.0) return 0.0;
    double t = std::atan2(dy, dx);
    if (t < 0.0) t += 2.0 * M_PI;
    return t;
}

inline int wld_orientation_bin(double theta, int t_bins) {
    int t = static_cast<int>(std::floor(theta * t_bins / (2.0 * M_PI) + 0.5));
    return t % t_bins;
}

inline int wld_orientation(const Raster& img, int cx, int cy, double r, int t_bins) {
    return wld_orientation_bin(wld_theta(img, cx, cy, r), t_bins);
}

// Flattened joint-histogram index; excitation segments are outermost, then
// orientation, then the sub-bin within the segment.
inline std::uint32_t wld_bin(double xi, int t, const WldParams& w) {
    double pos = (xi + M_PI / 2.0) * w.m / M_PI;
    int m = std::clamp(static_cast<int>(std::floor(pos)), 0, w.m - 1);
    int s = std::clamp(static_cast<int>(std::floor((pos - m) * w.s)), 0, w.s - 1);
    return static_cast<std::uint32_t>(m) * (w.t * w.s) + static_cast<std::uint32_t>(t) * w.s +
           static_cast<std::uint32_t>(s);
}

// ---------------------------------------------------------------------------
// VAR quantization. Boundaries are the nearest-rank k/B quantiles of the
// pooled training variances (1-indexed rank ceil(k*N/B)); duplicates are
// merged, which shrinks the effective bin count.

inline std::vector<double> train_var_boundaries(std::vector<double> values, int bins) {
    if (bins < 2) throw error("var boundaries: need at least 2 bins");
    if (values.empty()) throw error("var boundaries: no training values");
    std::sort(values.begin(), values.end());
    if (values.front() == values.back())
        throw error("var boundaries: degenerate distribution (all values equal)");
    std::size_t n = values.size();
    std::vector<double> out;
    for (int k = 1; k < bins; ++k) {
        std::size_t rank = (static_cast<std::size_t>(k) * n + bins - 1) / bins; // ceil(k*n/bins)
        rank = std::clamp<std::size_t>(rank, 1, n);
        double v = values[rank - 1];
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    return out;
}

// Index of the half-open interval [b_{k-1}, b_k) holding v; values below the
// first boundary map to 0, values at or above the last to the top bin.
inline int quantize_var(double v, const std::vector<double>& boundaries) {
    return static_cast<int>(std::upper_bound(boundaries.begin(), boundaries.end(), v) -
                            boundaries.begin());
}

// ---------------------------------------------------------------------------
// Single-pixel component code. Both the cached code-plane builder and the
// naive classifier funnel through this function, so their codes agree exactly.

inline std::uint32_t component_code(const Raster& img, int cx, int cy,
                                    const DescriptorConfig& cfg, const Component& comp,
                                    const CircleSampler& sampler, double* scratch) {
    sampler.sample(img, cx, cy, scratch);
    double center = img.at(cx, cy);
    switch (comp.kind) {
        case ComponentKind::lbp:
            return lbp_code(scratch, comp.scale.p, center);
        case ComponentKind::lbpriu:
            return lbpriu_code(scratch, comp.scale.p, center);
        case ComponentKind::var: {
            if (cfg.var_boundaries.empty())
                throw error("descriptor: VAR boundaries not trained");
            return static_cast<std::uint32_t>(
                quantize_var(var_value(scratch, comp.scale.p), cfg.var_boundaries));
        }
        case ComponentKind::wld: {
            double xi = wld_excitation(scratch, comp.scale.p, center);
            int t = wld_orientation(img, cx, cy, comp.scale.r, cfg.wld.t);
            return wld_bin(xi, t, cfg.wld);
        }
    }
    throw error("descriptor: unknown component kind");
}

} // namespace texclass

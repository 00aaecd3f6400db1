#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "texclass/common.hpp"

namespace texclass {

// Single-band brightness grid. Samples are stored as uint16 regardless of
// depth; depth (8 or 16) bounds the legal value range and drives PGM maxval.
struct Raster {
    int width = 0;
    int height = 0;
    int depth = 8; // bits per pixel, 8 or 16
    std::vector<std::uint16_t> pixels;

    Raster() = default;
    Raster(int w, int h, int d, std::uint16_t fill = 0)
        : width(w), height(h), depth(d), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0 || (d != 8 && d != 16))
            throw error("raster: invalid dimensions or depth");
    }

    std::uint16_t maxval() const { return depth == 8 ? 255 : 65535; }

    std::uint16_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    friend bool operator==(const Raster&, const Raster&) = default;
};

// Per-pixel class identifiers; 0 = unlabeled/unclassified, 1..K = classes.
struct LabelMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    LabelMask() = default;
    LabelMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return labels[static_cast<std::size_t>(y) * width + x];
    }

    int max_label() const {
        std::uint8_t m = 0;
        for (std::uint8_t v : labels) m = std::max(m, v);
        return m;
    }

    friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

// ---------------------------------------------------------------------------
// PGM (P5) I/O. 16-bit samples are big-endian on disk per the PGM convention.

namespace detail {

inline int pgm_read_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    // skip whitespace and '#' comments
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

inline long pgm_parse_int(const std::string& tok) {
    if (tok.empty()) throw error("pgm: malformed header (missing field)");
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw error("pgm: malformed header (non-numeric field '" + tok + "')");
    try {
        return std::stol(tok);
    } catch (const std::out_of_range&) {
        throw error("pgm: malformed header (field out of range)");
    }
}

} // namespace detail

inline Raster load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("pgm: cannot open '" + path + "'");

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P')
        throw error("pgm: malformed header (no magic)");
    if (magic[1] != '5')
        throw error(std::string("pgm: unsupported magic 'P") + magic[1] + "' (want P5)");

    std::string tok;
    if (detail::pgm_read_token(in, tok) == EOF) throw error("pgm: malformed header (truncated)");
    long w = detail::pgm_parse_int(tok);
    if (detail::pgm_read_token(in, tok) == EOF) throw error("pgm: malformed header (truncated)");
    long h = detail::pgm_parse_int(tok);
    if (detail::pgm_read_token(in, tok) == EOF) throw error("pgm: malformed header (truncated)");
    long maxval = detail::pgm_parse_int(tok);
    if (w <= 0 || h <= 0) throw error("pgm: malformed header (bad dimensions)");
    if (maxval <= 0 || maxval > 65535) throw error("pgm: malformed header (bad maxval)");
    // the token reader consumed the single whitespace byte separating header
    // from payload

    Raster r(static_cast<int>(w), static_cast<int>(h), maxval < 256 ? 8 : 16);
    std::size_t n = r.pixels.size();
    if (maxval < 256) {
        std::vector<unsigned char> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) throw error("pgm: truncated payload");
        for (std::size_t i = 0; i < n; ++i) r.pixels[i] = buf[i];
    } else {
        std::vector<unsigned char> buf(n * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (static_cast<std::size_t>(in.gcount()) != n * 2) throw error("pgm: truncated payload");
        for (std::size_t i = 0; i < n; ++i)
            r.pixels[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    for (std::uint16_t v : r.pixels)
        if (v > maxval) throw error("pgm: sample exceeds maxval");
    return r;
}

inline void save_pgm(const Raster& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("pgm: cannot open '" + path + "' for writing");
    out << "P5\n" << r.width << " " << r.height << "\n" << static_cast<int>(r.maxval()) << "\n";
    if (r.depth == 8) {
        std::vector<unsigned char> buf(r.pixels.size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<unsigned char>(r.pixels[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    } else {
        std::vector<unsigned char> buf(r.pixels.size() * 2);
        for (std::size_t i = 0; i < r.pixels.size(); ++i) {
            buf[2 * i] = static_cast<unsigned char>(r.pixels[i] >> 8);
            buf[2 * i + 1] = static_cast<unsigned char>(r.pixels[i] & 0xff);
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw error("pgm: write failed for '" + path + "'");
}

// Raw headerless grayscale, dimensions supplied by the caller. 16-bit data is
// big-endian, matching the PGM payload layout.
inline Raster load_raw(const std::string& path, int width, int height, int depth) {
    if (width <= 0 || height <= 0 || (depth != 8 && depth != 16))
        throw error("raw: invalid dimensions or depth");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("raw: cannot open '" + path + "'");
    Raster r(width, height, depth);
    std::size_t n = r.pixels.size();
    std::size_t bytes = depth == 8 ? n : n * 2;
    std::vector<unsigned char> buf(bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) throw error("raw: truncated payload");
    if (depth == 8) {
        for (std::size_t i = 0; i < n; ++i) r.pixels[i] = buf[i];
    } else {
        for (std::size_t i = 0; i < n; ++i)
            r.pixels[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return r;
}

// Label masks travel as 8-bit PGM files whose gray values are the class ids.
inline LabelMask load_mask_pgm(const std::string& path) {
    Raster r = load_pgm(path);
    if (r.depth != 8) throw error("mask: expected 8-bit PGM, got 16-bit");
    LabelMask m(r.width, r.height);
    for (std::size_t i = 0; i < r.pixels.size(); ++i)
        m.labels[i] = static_cast<std::uint8_t>(r.pixels[i]);
    return m;
}

inline void save_mask_pgm(const LabelMask& m, const std::string& path) {
    Raster r(m.width, m.height, 8);
    for (std::size_t i = 0; i < m.labels.size(); ++i) r.pixels[i] = m.labels[i];
    save_pgm(r, path);
}

// ---------------------------------------------------------------------------

inline Raster crop(const Raster& src, const Rect& rect) {
    if (rect.w <= 0 || rect.h <= 0 || rect.x < 0 || rect.y < 0 ||
        rect.x + rect.w > src.width || rect.y + rect.h > src.height)
        throw error("crop: rect out of bounds");
    Raster out(rect.w, rect.h, src.depth);
    for (int j = 0; j < rect.h; ++j)
        for (int i = 0; i < rect.w; ++i)
            out.at(i, j) = src.at(rect.x + i, rect.y + j);
    return out;
}

// Bilinear interpolation of the four pixels surrounding (x, y), written in
// incremental form so constant patches interpolate to exactly the constant
// and integer coordinates read exactly the pixel value.
inline double bilinear_sample(const Raster& r, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;
    int x1 = std::min(x0 + 1, r.width - 1);
    int y1 = std::min(y0 + 1, r.height - 1);
    double v00 = r.at(x0, y0);
    double v10 = r.at(x1, y0);
    double v01 = r.at(x0, y1);
    double v11 = r.at(x1, y1);
    return v00 + fx * (v10 - v00) + fy * (v01 - v00) + fx * fy * (v11 - v10 - v01 + v00);
}

// Circularly symmetric neighbor sampler for scale (P, R).
//
// General case: sample p sits at angle 2*pi*p/P from the +x axis, sweeping
// clockwise on screen (y grows downward), at real offset (R cos a, R sin a),
// resolved by bilinear interpolation.
//
// Special case P=8, R=1: the samples are the 8 immediate neighbors, no
// interpolation, numbered clockwise from the upper-left corner:
//     0 1 2
//     7 c 3
//     6 5 4
// The two conventions are linked by a fixed index rotation: neighbor i of the
// 3x3 numbering sits at angular index (i + 5) mod 8.
class CircleSampler {
public:
    CircleSampler(int p, double r) : p_(p), r_(r) {
        if (p < 4) throw error("sampler: P must be >= 4");
        if (r < 1.0) throw error("sampler: R must be >= 1");
        exact8_ = (p == 8 && r == 1.0);
        if (exact8_) {
            static constexpr int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
            static constexpr int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
            for (int i = 0; i < 8; ++i) offsets_.push_back({double(dx[i]), double(dy[i])});
        } else {
            for (int i = 0; i < p; ++i) {
                double a = 2.0 * M_PI * i / p;
                offsets_.push_back({r * std::cos(a), r * std::sin(a)});
            }
        }
    }

    int count() const { return p_; }
    double radius() const { return r_; }
    int border() const { return static_cast<int>(std::ceil(r_)); }

    // Caller guarantees the circle lies inside the raster.
    void sample(const Raster& img, int cx, int cy, double* out) const {
        if (exact8_) {
            const std::uint16_t* base = img.pixels.data();
            std::size_t idx = static_cast<std::size_t>(cy) * img.width + cx;
            int w = img.width;
            out[0] = base[idx - w - 1];
            out[1] = base[idx - w];
            out[2] = base[idx - w + 1];
            out[3] = base[idx + 1];
            out[4] = base[idx + w + 1];
            out[5] = base[idx + w];
            out[6] = base[idx + w - 1];
            out[7] = base[idx - 1];
            return;
        }
        for (int i = 0; i < p_; ++i)
            out[i] = bilinear_sample(img, cx + offsets_[i].first, cy + offsets_[i].second);
    }

private:
    int p_;
    double r_;
    bool exact8_ = false;
    std::vector<std::pair<double, double>> offsets_;
};

// Convenience wrapper with bounds checking.
inline std::vector<double> sample_circular(const Raster& img, int cx, int cy, int p, double r) {
    CircleSampler s(p, r);
    int b = s.border();
    if (cx < b || cy < b || cx >= img.width - b || cy >= img.height - b)
        throw error("sample_circular: circle outside raster bounds");
    std::vector<double> out(static_cast<std::size_t>(p));
    s.sample(img, cx, cy, out.data());
    return out;
}

} // namespace texclass

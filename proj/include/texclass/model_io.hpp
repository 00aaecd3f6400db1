#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "texclass/classify.hpp"
#include "texclass/glcm.hpp"

namespace texclass {

inline constexpr int model_format_version = 1;

namespace detail {

// Floats on disk use C hex-float notation, which round-trips doubles exactly.
inline std::string hex_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s.empty()) throw error("model: empty float field");
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw error("model: bad float '" + s + "'");
    return v;
}

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    // next non-empty line as a token stream
    std::istringstream line() {
        std::string l;
        while (std::getline(in_, l)) {
            ++lineno_;
            if (!l.empty() && l.back() == '\r') l.pop_back();
            if (l.find_first_not_of(" \t") != std::string::npos) return std::istringstream(l);
        }
        throw error("model: unexpected end of file");
    }

    // line that must start with `key`; returns the remaining token stream
    std::istringstream expect(const std::string& key) {
        auto ls = line();
        std::string word;
        ls >> word;
        if (word != key)
            throw error("model: expected '" + key + "' near line " + std::to_string(lineno_) +
                        ", found '" + word + "'");
        return ls;
    }

    long expect_int(const std::string& key) {
        auto ls = expect(key);
        long v;
        if (!(ls >> v)) throw error("model: malformed '" + key + "' line");
        return v;
    }

    std::string expect_rest(const std::string& key) {
        auto ls = expect(key);
        std::string rest;
        std::getline(ls, rest);
        std::size_t b = rest.find_first_not_of(" \t");
        return b == std::string::npos ? std::string{} : rest.substr(b);
    }

private:
    std::istream& in_;
    int lineno_ = 0;
};

inline void write_histogram(std::ostream& out, const Histogram& h) {
    out << "entries " << h.entries.size() << "\n";
    for (const auto& e : h.entries) out << e.first << " " << hex_double(e.second) << "\n";
}

inline Histogram read_histogram(ModelReader& rd, std::size_t bins, std::uint64_t lid) {
    Histogram h;
    h.bin_count = bins;
    h.layout_id = lid;
    long n = rd.expect_int("entries");
    if (n < 0) throw error("model: negative entry count");
    h.entries.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        auto ls = rd.line();
        std::uint32_t idx;
        std::string val;
        if (!(ls >> idx >> val)) throw error("model: malformed histogram entry");
        if (idx >= bins) throw error("model: histogram length inconsistent with config");
        if (!h.entries.empty() && idx <= h.entries.back().first)
            throw error("model: histogram entries not ascending");
        h.entries.push_back({idx, parse_double(val)});
    }
    return h;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Texture-descriptor model files.

inline void save_model(const ModelSet& models, const std::string& path) {
    models.validate();
    std::ofstream out(path);
    if (!out) throw error("model: cannot open '" + path + "' for writing");
    out << "texclass-model " << model_format_version << "\n";
    out << "type td\n";
    out << "kind " << kind_name(models.config.kind) << "\n";
    out << "scales " << models.config.scales.size() << "\n";
    for (const auto& s : models.config.scales)
        out << "scale " << s.p << " " << detail::hex_double(s.r) << "\n";
    out << "window " << models.window << "\n";
    out << "wld " << models.config.wld.t << " " << models.config.wld.m << " "
        << models.config.wld.s << "\n";
    out << "var_bins " << models.config.var_bins << "\n";
    out << "var_boundaries " << models.config.var_boundaries.size() << "\n";
    for (double b : models.config.var_boundaries) out << detail::hex_double(b) << "\n";
    out << "bins " << bin_count(models.config) << "\n";
    out << "classes " << models.classes.size() << "\n";
    for (const auto& c : models.classes) {
        out << "class " << c.class_id << "\n";
        out << "name " << c.name << "\n";
        out << "pixel_count " << c.pixel_count << "\n";
        detail::write_histogram(out, c.histogram);
        out << "end_class\n";
    }
    out << "end\n";
    if (!out) throw error("model: write failed for '" + path + "'");
}

inline std::string model_file_type(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("model: cannot open '" + path + "'");
    detail::ModelReader rd(in);
    auto ls = rd.expect("texclass-model");
    int version = -1;
    ls >> version;
    if (version != model_format_version)
        throw error("model: unsupported format version in '" + path + "'");
    auto ts = rd.expect("type");
    std::string type;
    ts >> type;
    return type;
}

inline ModelSet load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("model: cannot open '" + path + "'");
    detail::ModelReader rd(in);

    auto hl = rd.expect("texclass-model");
    int version = -1;
    hl >> version;
    if (version != model_format_version)
        throw error("model: unsupported format version (" + std::to_string(version) + ")");
    auto tl = rd.expect("type");
    std::string type;
    tl >> type;
    if (type != "td") throw error("model: expected a texture-descriptor model, found '" + type + "'");

    ModelSet m;
    auto kl = rd.expect("kind");
    std::string kind;
    kl >> kind;
    m.config.kind = kind_from_name(kind);

    long nscales = rd.expect_int("scales");
    if (nscales < 1) throw error("model: no scales");
    m.config.scales.clear();
    for (long i = 0; i < nscales; ++i) {
        auto ls = rd.expect("scale");
        int p;
        std::string r;
        if (!(ls >> p >> r)) throw error("model: malformed scale line");
        m.config.scales.push_back({p, detail::parse_double(r)});
    }
    m.window = static_cast<int>(rd.expect_int("window"));
    {
        auto ls = rd.expect("wld");
        if (!(ls >> m.config.wld.t >> m.config.wld.m >> m.config.wld.s))
            throw error("model: malformed wld line");
    }
    m.config.var_bins = static_cast<int>(rd.expect_int("var_bins"));
    long nb = rd.expect_int("var_boundaries");
    for (long i = 0; i < nb; ++i) {
        auto ls = rd.line();
        std::string v;
        ls >> v;
        m.config.var_boundaries.push_back(detail::parse_double(v));
    }
    m.config.validate();

    long bins = rd.expect_int("bins");
    if (bins != static_cast<long>(bin_count(m.config)))
        throw error("model: histogram length inconsistent with config");

    long nclasses = rd.expect_int("classes");
    std::uint64_t lid = layout_id(m.config);
    for (long i = 0; i < nclasses; ++i) {
        ClassModel c;
        c.class_id = static_cast<int>(rd.expect_int("class"));
        c.name = rd.expect_rest("name");
        long pc = rd.expect_int("pixel_count");
        if (pc <= 0) throw error("model: bad pixel_count");
        c.pixel_count = static_cast<std::uint64_t>(pc);
        c.histogram = detail::read_histogram(rd, bin_count(m.config), lid);
        rd.expect("end_class");
        m.classes.push_back(std::move(c));
    }
    rd.expect("end");
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// GLCM model files (same container format, `type glcm`).

inline void save_glcm_model(const GlcmModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path);
    if (!out) throw error("model: cannot open '" + path + "' for writing");
    out << "texclass-model " << model_format_version << "\n";
    out << "type glcm\n";
    out << "glcm_window " << model.config.window << "\n";
    out << "glcm_levels " << model.config.levels << "\n";
    out << "distances " << model.config.distances.size() << "\n";
    for (std::size_t i = 0; i < model.config.distances.size(); ++i)
        out << model.config.distances[i] << (i + 1 < model.config.distances.size() ? " " : "\n");
    out << "stats " << model.config.stats.size() << "\n";
    for (std::size_t i = 0; i < model.config.stats.size(); ++i)
        out << glcm_stat_name(model.config.stats[i])
            << (i + 1 < model.config.stats.size() ? " " : "\n");
    std::size_t dim = model.config.feature_dim();
    out << "dim " << dim << "\n";
    out << "norm_mean " << dim << "\n";
    for (double v : model.norm_mean) out << detail::hex_double(v) << "\n";
    out << "norm_std " << dim << "\n";
    for (double v : model.norm_std) out << detail::hex_double(v) << "\n";
    out << "classes " << model.classes.size() << "\n";
    for (const auto& c : model.classes) {
        out << "class " << c.class_id << "\n";
        out << "name " << c.name << "\n";
        out << "pixel_count " << c.pixel_count << "\n";
        out << "mean " << dim << "\n";
        for (double v : c.mean) out << detail::hex_double(v) << "\n";
        out << "end_class\n";
    }
    out << "end\n";
    if (!out) throw error("model: write failed for '" + path + "'");
}

inline GlcmModel load_glcm_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("model: cannot open '" + path + "'");
    detail::ModelReader rd(in);

    auto hl = rd.expect("texclass-model");
    int version = -1;
    hl >> version;
    if (version != model_format_version)
        throw error("model: unsupported format version (" + std::to_string(version) + ")");
    auto tl = rd.expect("type");
    std::string type;
    tl >> type;
    if (type != "glcm") throw error("model: expected a glcm model, found '" + type + "'");

    GlcmModel m;
    m.config.window = static_cast<int>(rd.expect_int("glcm_window"));
    m.config.levels = static_cast<int>(rd.expect_int("glcm_levels"));
    long nd = rd.expect_int("distances");
    if (nd < 1) throw error("model: no distances");
    {
        auto ls = rd.line();
        m.config.distances.clear();
        for (long i = 0; i < nd; ++i) {
            int d;
            if (!(ls >> d)) throw error("model: malformed distances line");
            m.config.distances.push_back(d);
        }
    }
    long ns = rd.expect_int("stats");
    if (ns < 1) throw error("model: no stats");
    {
        auto ls = rd.line();
        m.config.stats.clear();
        for (long i = 0; i < ns; ++i) {
            std::string s;
            if (!(ls >> s)) throw error("model: malformed stats line");
            m.config.stats.push_back(glcm_stat_from_name(s));
        }
    }
    long dim = rd.expect_int("dim");
    if (dim != static_cast<long>(m.config.feature_dim()))
        throw error("model: feature dimension inconsistent with config");

    auto read_vec = [&](const std::string& key, std::size_t n) {
        long cnt = rd.expect_int(key);
        if (cnt != static_cast<long>(n)) throw error("model: bad '" + key + "' count");
        std::vector<double> v;
        for (long i = 0; i < cnt; ++i) {
            auto ls = rd.line();
            std::string tok;
            ls >> tok;
            v.push_back(detail::parse_double(tok));
        }
        return v;
    };
    m.norm_mean = read_vec("norm_mean", m.config.feature_dim());
    m.norm_std = read_vec("norm_std", m.config.feature_dim());

    long nclasses = rd.expect_int("classes");
    for (long i = 0; i < nclasses; ++i) {
        GlcmClass c;
        c.class_id = static_cast<int>(rd.expect_int("class"));
        c.name = rd.expect_rest("name");
        long pc = rd.expect_int("pixel_count");
        if (pc <= 0) throw error("model: bad pixel_count");
        c.pixel_count = static_cast<std::uint64_t>(pc);
        c.mean = read_vec("mean", m.config.feature_dim());
        m.classes.push_back(std::move(c));
        rd.expect("end_class");
    }
    rd.expect("end");
    m.validate();
    return m;
}

} // namespace texclass

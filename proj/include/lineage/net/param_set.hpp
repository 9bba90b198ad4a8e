#pragma once

// Named parameter tensors plus the checkpoint file format.
//
// Checkpoint layout (all integers little-endian):
//   8 bytes   magic "LNGCKPT1"
//   u32       format version (1)
//   u32       entry count
//   per entry:
//     u32     name length, then the name bytes
//     u64     rows, u64 cols
//     rows*cols f64, row-major
//
// Save -> load -> save is byte-identical.

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lineage/errors.hpp"
#include "lineage/observation.hpp"

namespace lineage {

struct ParamSet {
    struct Entry {
        std::string name;
        Mat value;  // biases are stored as n x 1
    };

    std::vector<Entry> entries;

    int add(const std::string& name, int rows, int cols) {
        entries.push_back({name, Mat::Zero(rows, cols)});
        return static_cast<int>(entries.size()) - 1;
    }

    Mat& operator[](int index) { return entries[static_cast<std::size_t>(index)].value; }
    const Mat& operator[](int index) const { return entries[static_cast<std::size_t>(index)].value; }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].name == name) return static_cast<int>(i);
        throw ConfigError("no parameter named " + name);
    }

    ParamSet zeros_like() const {
        ParamSet out;
        out.entries.reserve(entries.size());
        for (const auto& e : entries) out.entries.push_back({e.name, Mat::Zero(e.value.rows(), e.value.cols())});
        return out;
    }

    void set_zero() {
        for (auto& e : entries) e.value.setZero();
    }

    std::int64_t total_size() const {
        std::int64_t n = 0;
        for (const auto& e : entries) n += e.value.size();
        return n;
    }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.value.squaredNorm();
        return s;
    }

    void scale(double factor) {
        for (auto& e : entries) e.value *= factor;
    }

    bool all_finite() const {
        for (const auto& e : entries)
            if (!e.value.allFinite()) return false;
        return true;
    }

    bool same_shape(const ParamSet& other) const {
        if (entries.size() != other.entries.size()) return false;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].name != other.entries[i].name) return false;
            if (entries[i].value.rows() != other.entries[i].value.rows()) return false;
            if (entries[i].value.cols() != other.entries[i].value.cols()) return false;
        }
        return true;
    }

    bool equals(const ParamSet& other) const {
        if (!same_shape(other)) return false;
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].value != other.entries[i].value) return false;
        return true;
    }

    // Flat views in entry order (row-major within each tensor), used by the
    // finite-difference harness.
    Vec flatten() const {
        Vec out(total_size());
        std::int64_t at = 0;
        for (const auto& e : entries)
            for (Eigen::Index r = 0; r < e.value.rows(); ++r)
                for (Eigen::Index c = 0; c < e.value.cols(); ++c) out[at++] = e.value(r, c);
        return out;
    }

    void unflatten(const Vec& flat) {
        std::int64_t at = 0;
        for (auto& e : entries)
            for (Eigen::Index r = 0; r < e.value.rows(); ++r)
                for (Eigen::Index c = 0; c < e.value.cols(); ++c) e.value(r, c) = flat[at++];
    }
};

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
inline void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
inline std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
inline std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[9] = "LNGCKPT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const ParamSet& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
    out.write(kCheckpointMagic, 8);
    detail::write_u32(out, kCheckpointVersion);
    detail::write_u32(out, static_cast<std::uint32_t>(params.entries.size()));
    for (const auto& e : params.entries) {
        detail::write_u32(out, static_cast<std::uint32_t>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        detail::write_u64(out, static_cast<std::uint64_t>(e.value.rows()));
        detail::write_u64(out, static_cast<std::uint64_t>(e.value.cols()));
        for (Eigen::Index r = 0; r < e.value.rows(); ++r)
            for (Eigen::Index c = 0; c < e.value.cols(); ++c) {
                const double v = e.value(r, c);
                out.write(reinterpret_cast<const char*>(&v), 8);
            }
    }
    if (!out) throw ConfigError("checkpoint write failed: " + path);
}

inline ParamSet load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw ConfigError("not a checkpoint file: " + path);
    const std::uint32_t version = detail::read_u32(in);
    if (version != kCheckpointVersion)
        throw ConfigError("unsupported checkpoint version in " + path);
    const std::uint32_t count = detail::read_u32(in);
    ParamSet params;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = detail::read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rows = static_cast<Eigen::Index>(detail::read_u64(in));
        const auto cols = static_cast<Eigen::Index>(detail::read_u64(in));
        Mat value(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) {
                double v = 0.0;
                in.read(reinterpret_cast<char*>(&v), 8);
                value(r, c) = v;
            }
        if (!in) throw ConfigError("truncated checkpoint: " + path);
        params.entries.push_back({std::move(name), std::move(value)});
    }
    return params;
}

}  // namespace lineage

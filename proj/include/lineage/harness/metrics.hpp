#pragma once

// Append-only metrics records, one JSON object per line. The schema is
// identical for accumulation and baseline runs:
//
//   {"gen":..,"member":..,"name":"..","run":"..","seed":..,"step":..,
//    "value":..,"wall":..}
//
// "wall" is seconds since the run started and is the only field excluded
// from determinism comparisons. Files are written to <path>.part and
// renamed into place so a crashed run never leaves a truncated file
// masquerading as a finished one.

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lineage/errors.hpp"

namespace lineage {

struct MetricsRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    int generation = 0;
    std::int64_t step = 0;  // trial index or train step
    int member = 0;
    std::string name;
    double value = 0.0;
    double walltime = 0.0;

    bool same_payload(const MetricsRecord& other) const {
        return run_id == other.run_id && seed == other.seed && generation == other.generation &&
               step == other.step && member == other.member && name == other.name &&
               value == other.value;
    }
};

class MetricsSink {
public:
    explicit MetricsSink(std::string run_id = "run")
        : run_id_(std::move(run_id)), start_(std::chrono::steady_clock::now()) {}

    const std::string& run_id() const { return run_id_; }

    void push(std::uint64_t seed, int generation, std::int64_t step, int member,
              const std::string& name, double value) {
        if (!std::isfinite(value)) throw NumericalError("non-finite metric: " + name);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        records_.push_back({run_id_, seed, generation, step, member, name, value, wall});
    }

    void absorb(const MetricsSink& other) {
        records_.insert(records_.end(), other.records_.begin(), other.records_.end());
    }

    const std::vector<MetricsRecord>& records() const { return records_; }

private:
    std::string run_id_;
    std::chrono::steady_clock::time_point start_;
    std::vector<MetricsRecord> records_;
};

inline void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path) {
    const std::string tmp = path + ".part";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot open metrics file for writing: " + tmp);
        for (const auto& r : records) {
            nlohmann::json line{{"run", r.run_id}, {"seed", r.seed},   {"gen", r.generation},
                                {"step", r.step},  {"member", r.member}, {"name", r.name},
                                {"value", r.value}, {"wall", r.walltime}};
            out << line.dump() << "\n";
        }
        if (!out) throw ConfigError("metrics write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot move metrics into place: " + path);
}

inline std::vector<MetricsRecord> read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file: " + path);
    std::vector<MetricsRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        MetricsRecord r;
        r.run_id = j.at("run").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.generation = j.at("gen").get<int>();
        r.step = j.at("step").get<std::int64_t>();
        r.member = j.at("member").get<int>();
        r.name = j.at("name").get<std::string>();
        r.value = j.at("value").get<double>();
        r.walltime = j.at("wall").get<double>();
        records.push_back(std::move(r));
    }
    return records;
}

// Equality over everything except wall-clock fields.
inline bool metrics_equal_ignoring_walltime(const std::vector<MetricsRecord>& a,
                                            const std::vector<MetricsRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_payload(b[i])) return false;
    return true;
}

}  // namespace lineage

#pragma once

// CSV tables and the JSON run manifest. Every CSV starts with
//   # schema: cubiclab.<kind>.v1
// followed by one column-header line and data rows. Doubles use %.17g so a
// rerun with identical inputs reproduces the bytes.

#include <fftw3.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cubiclab/fit.hpp"

namespace cubiclab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "cubiclab.manifest.v1";

inline std::string csv_schema(const std::string& kind) { return "cubiclab." + kind + ".v1"; }

using CsvCell = std::variant<double, long long, std::string>;

inline std::string format_cell(const CsvCell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

class CsvTable {
public:
    CsvTable(std::string kind, std::vector<std::string> columns) : kind_(std::move(kind)), columns_(std::move(columns)) {
        if (columns_.empty()) throw std::invalid_argument("CsvTable: no columns");
    }

    const std::string& kind() const { return kind_; }
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

    void add(std::vector<CsvCell> row) {
        if (row.size() != columns_.size())
            throw std::invalid_argument("CsvTable(" + kind_ + "): row has " + std::to_string(row.size()) +
                                        " cells, expected " + std::to_string(columns_.size()));
        rows_.push_back(std::move(row));
    }

    std::string str() const {
        std::ostringstream os;
        os << "# schema: " << csv_schema(kind_) << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
            os << "\n";
        }
        return os.str();
    }

private:
    std::string kind_;
    std::vector<std::string> columns_;
    std::vector<std::vector<CsvCell>> rows_;
};

// Parsed form, used by tests and by anything that reads outputs back.
struct CsvDocument {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::out_of_range("CsvDocument: no column " + name);
    }
};

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace detail

inline CsvDocument parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    CsvDocument d;
    const std::string tag = "# schema: ";
    if (!std::getline(is, line) || line.rfind(tag, 0) != 0) throw std::runtime_error("parse_csv: missing schema line");
    d.schema = line.substr(tag.size());
    if (!std::getline(is, line)) throw std::runtime_error("parse_csv: missing column header");
    d.columns = detail::split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto r = detail::split_csv_line(line);
        if (r.size() != d.columns.size()) throw std::runtime_error("parse_csv: ragged row");
        d.rows.push_back(std::move(r));
    }
    return d;
}

inline CsvTable fit_table(const std::vector<std::pair<std::string, ScalingFit>>& fits) {
    CsvTable t("fit", {"quantity", "slope", "half_width", "confidence", "intercept", "points"});
    for (const auto& [name, f] : fits)
        t.add({name, f.slope, f.half_width, f.confidence, f.intercept, static_cast<long long>(f.x.size())});
    return t;
}

// ---------------------------------------------------------------------------
// Manifest.

inline nlohmann::ordered_json library_versions() {
    nlohmann::ordered_json v;
    v["cubiclab"] = kVersion;
    v["fftw"] = std::string(fftw_version);
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                 std::to_string(BOOST_VERSION % 100);
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
    v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
    return v;
}

struct OutputRecord {
    std::string file;
    std::string schema;
    std::size_t rows = 0;
};

class Manifest {
public:
    std::string verb;
    std::string status = "started";  // started, ok, failed
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<unsigned> seeds;
    std::vector<OutputRecord> outputs;
    nlohmann::ordered_json oracle_errors = nlohmann::ordered_json::object();
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    nlohmann::ordered_json error;  // null unless failed

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["schema"] = kManifestSchema;
        j["verb"] = verb;
        j["status"] = status;
        j["versions"] = library_versions();
        j["seeds"] = seeds;
        j["config"] = config;
        auto& outs = j["outputs"] = nlohmann::ordered_json::array();
        for (const auto& o : outputs) outs.push_back({{"file", o.file}, {"schema", o.schema}, {"rows", o.rows}});
        j["oracle_errors"] = oracle_errors;
        j["results"] = results;
        j["error"] = error;
        return j;
    }
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed: " + p.string());
}

// All writes go through here so the manifest lists every file.
class OutputDir {
public:
    OutputDir(std::filesystem::path root, Manifest& m) : root_(std::move(root)), manifest_(m) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }

    void write(const std::string& name, const CsvTable& t) {
        write_text(root_ / name, t.str());
        manifest_.outputs.push_back({name, csv_schema(t.kind()), t.rows()});
    }

    void write_manifest() const { write_text(root_ / "manifest.json", manifest_.to_json().dump(2) + "\n"); }

private:
    std::filesystem::path root_;
    Manifest& manifest_;
};

}  // namespace cubiclab

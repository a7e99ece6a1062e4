#include "nnlab/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nnlab/neighbors.hpp"

namespace nnlab {

namespace {

[[noreturn]] void file_error(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void line_error(const std::string& path, size_t line,
                             const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

// Splits one CSV line on commas; no quoting in this format.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::optional<double> parse_double(const std::string& field) {
    if (field.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE) {
        return std::nullopt;
    }
    return value;
}

std::optional<int64_t> parse_int(const std::string& field) {
    if (field.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    long long value = std::strtoll(field.c_str(), &end, 10);
    if (end != field.c_str() + field.size() || errno == ERANGE) {
        return std::nullopt;
    }
    return static_cast<int64_t>(value);
}

// "key=<int>" with an exact key match; used by the dataset header parser.
std::optional<int64_t> parse_keyed_int(const std::string& field,
                                       const std::string& key) {
    if (field.size() <= key.size() + 1 || field.compare(0, key.size(), key) != 0 ||
        field[key.size()] != '=') {
        return std::nullopt;
    }
    return parse_int(field.substr(key.size() + 1));
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string format_cell(const CsvCell& cell) {
    if (const auto* i = std::get_if<int64_t>(&cell)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const auto* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n\r") != std::string::npos) {
        throw std::invalid_argument(
            "csv: string cell contains a delimiter or line break: " + s);
    }
    return s;
}

void write_csv(const CsvTable& table, const std::string& path,
               const std::string& preamble) {
    if (table.header.empty()) {
        throw std::invalid_argument("csv: header must be non-empty");
    }

    std::ostringstream out;
    if (!preamble.empty()) {
        out << preamble;
        if (preamble.back() != '\n') out << '\n';
    }
    for (size_t c = 0; c < table.header.size(); ++c) {
        if (c > 0) out << ',';
        out << table.header[c];
    }
    out << '\n';
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            throw std::invalid_argument(
                "csv: row " + std::to_string(r) + " has " +
                std::to_string(row.size()) + " cells, header has " +
                std::to_string(table.header.size()));
        }
        for (size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ',';
            out << format_cell(row[c]);
        }
        out << '\n';
    }

    // Binary mode keeps the line endings exactly as composed.
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) file_error(path, "cannot open for writing");
    const std::string text = out.str();
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) file_error(path, "write failed");
}

CsvTable concentration_table(const std::vector<RatioStats>& rows) {
    CsvTable table;
    table.header = {"n", "d", "runs", "min", "q1", "median", "q3", "max",
                    "mean"};
    for (const RatioStats& r : rows) {
        table.rows.push_back({r.n, static_cast<int64_t>(r.d),
                              static_cast<int64_t>(r.runs), r.min, r.q1,
                              r.median, r.q3, r.max, r.mean});
    }
    return table;
}

CsvTable coverage_table(const std::vector<CoverageResult>& rows) {
    CsvTable table;
    table.header = {"n", "d", "epsilon", "runs", "mean_fraction"};
    for (const CoverageResult& r : rows) {
        table.rows.push_back({r.n, static_cast<int64_t>(r.d), r.epsilon,
                              static_cast<int64_t>(r.runs), r.mean_fraction});
    }
    return table;
}

CsvTable local_sim_table(const std::vector<ErrorTableRow>& rows) {
    CsvTable table;
    table.header = {"E",           "k",
                    "policy",      "closed_form",
                    "paper_printed_form", "monte_carlo",
                    "half_width",  "trials",
                    "agree"};
    for (const ErrorTableRow& r : rows) {
        table.rows.push_back({r.E, r.k, std::string(to_string(r.policy)),
                              r.closed_form, r.paper_printed_form,
                              r.monte_carlo, r.half_width, r.trials, r.agree});
    }
    return table;
}

CsvTable e2e_table(const E2eConfig& config, const E2eResult& result) {
    CsvTable table;
    table.header = {"dim",    "n_train",   "separation",  "epsilon",
                    "policy", "n_queries", "exact_error", "approx_error"};
    table.rows.push_back({static_cast<int64_t>(config.dim), config.n_train,
                          config.separation, config.epsilon,
                          std::string(to_string(config.policy.kind)),
                          config.n_queries, result.exact_error,
                          result.approx_error});
    return table;
}

CsvTable perturb_check_table(const std::vector<PerturbCheckResult>& rows) {
    CsvTable table;
    table.header = {"duplicates", "draws",   "amplitude",
                    "chi_square", "p_value", "pass"};
    for (const PerturbCheckResult& r : rows) {
        table.rows.push_back({static_cast<int64_t>(r.duplicates), r.draws,
                              r.amplitude, r.chi_square, r.p_value, r.pass});
    }
    return table;
}

CsvTable fractile_compare_table(const std::vector<FractileCompareRow>& rows) {
    CsvTable table;
    table.header = {"d",        "n",
                    "epsilon",  "fractile",
                    "mean_eps_candidates", "fractile_candidates"};
    for (const FractileCompareRow& r : rows) {
        table.rows.push_back({static_cast<int64_t>(r.d), r.n, r.epsilon,
                              r.fractile, r.mean_eps_candidates,
                              r.fractile_candidates});
    }
    return table;
}

CsvTable lsh_bench_table(const std::vector<LshSweepRow>& rows) {
    CsvTable table;
    table.header = {"k",           "L",
                    "w",           "max_candidates",
                    "recall_at_1", "mean_candidates",
                    "mean_distance_ratio"};
    for (const LshSweepRow& r : rows) {
        table.rows.push_back(
            {static_cast<int64_t>(r.params.hashes_per_table),
             static_cast<int64_t>(r.params.num_tables), r.params.bucket_width,
             r.max_candidates, r.recall_at_1, r.mean_candidates,
             r.mean_distance_ratio});
    }
    return table;
}

void save_dataset(const Dataset& ds, const std::string& path,
                  const std::string& preamble) {
    std::ostringstream out;
    if (!preamble.empty()) {
        out << preamble;
        if (preamble.back() != '\n') out << '\n';
    }
    out << "dim=" << ds.dim() << ",n=" << ds.size() << ",labeled="
        << (ds.labeled() ? 1 : 0) << '\n';
    for (int64_t i = 0; i < ds.size(); ++i) {
        auto p = ds.point(i);
        for (int j = 0; j < ds.dim(); ++j) {
            if (j > 0) out << ',';
            out << format_double(p[j]);
        }
        if (ds.labeled()) out << ',' << ds.labels()[static_cast<size_t>(i)];
        out << '\n';
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) file_error(path, "cannot open for writing");
    const std::string text = out.str();
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) file_error(path, "write failed");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) file_error(path, "cannot open for reading");

    std::string line;
    size_t line_no = 0;

    // Leading '#' lines (the seed self-description) are comments.
    bool have_header = false;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.front() == '#') continue;
        have_header = true;
        break;
    }
    if (!have_header) file_error(path, "missing header line");

    const auto fields = split_fields(line);
    std::optional<int64_t> dim, count, labeled;
    if (fields.size() == 3) {
        dim = parse_keyed_int(fields[0], "dim");
        count = parse_keyed_int(fields[1], "n");
        labeled = parse_keyed_int(fields[2], "labeled");
    }
    if (!dim || !count || !labeled || (*labeled != 0 && *labeled != 1)) {
        line_error(path, line_no,
                   "malformed header, expected dim=<d>,n=<N>,labeled=<0|1>");
    }
    if (*dim < 1) line_error(path, line_no, "dim must be >= 1");
    if (*count < 0) line_error(path, line_no, "n must be >= 0");

    const int d = static_cast<int>(*dim);
    const int64_t n = *count;
    const bool has_labels = *labeled == 1;
    const size_t expected_fields = static_cast<size_t>(d) + (has_labels ? 1 : 0);

    std::vector<double> coords;
    coords.reserve(static_cast<size_t>(n) * d);
    std::vector<int> labels;
    if (has_labels) labels.reserve(static_cast<size_t>(n));

    int64_t rows = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (rows == n) {
            line_error(path, line_no, "unexpected content after " +
                                          std::to_string(n) + " point lines");
        }
        const auto point_fields = split_fields(line);
        if (point_fields.size() != expected_fields) {
            line_error(path, line_no,
                       "expected " + std::to_string(expected_fields) +
                           " fields, found " +
                           std::to_string(point_fields.size()));
        }
        for (int j = 0; j < d; ++j) {
            auto value = parse_double(point_fields[static_cast<size_t>(j)]);
            if (!value) {
                line_error(path, line_no,
                           "unparseable coordinate: " +
                               point_fields[static_cast<size_t>(j)]);
            }
            if (!std::isfinite(*value)) {
                line_error(path, line_no, "non-finite coordinate");
            }
            coords.push_back(*value);
        }
        if (has_labels) {
            auto label = parse_int(point_fields.back());
            if (!label || *label < 0 ||
                *label > std::numeric_limits<int>::max()) {
                line_error(path, line_no,
                           "unparseable label: " + point_fields.back());
            }
            labels.push_back(static_cast<int>(*label));
        }
        ++rows;
    }
    if (rows != n) {
        file_error(path, "expected " + std::to_string(n) +
                             " point lines, found " + std::to_string(rows));
    }

    if (has_labels) return Dataset(d, std::move(coords), std::move(labels));
    return Dataset(d, std::move(coords));
}

}  // namespace nnlab

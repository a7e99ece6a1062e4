#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nnlab/analysis.hpp"
#include "nnlab/dataset.hpp"
#include "nnlab/experiments.hpp"
#include "nnlab/lsh.hpp"

namespace nnlab {

// One CSV value. Doubles are printed with 17 significant digits so that a
// read-back recovers the exact bits; bools print as true/false.
using CsvCell = std::variant<int64_t, double, std::string, bool>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;
};

// %.17g rendering, the round-trip-exact form used everywhere a double is
// written to disk.
std::string format_double(double value);

std::string format_cell(const CsvCell& cell);

// Writes UTF-8, comma-separated, LF line endings, header row first. The
// preamble, when non-empty, is emitted verbatim before the header (callers
// use it for the "# seed=<s>" self-description line) and is terminated with
// a newline if it lacks one. Throws on an unwritable path (message includes
// the path) or on a row whose width differs from the header.
void write_csv(const CsvTable& table, const std::string& path,
               const std::string& preamble = "");

// Fixed report schemas, one builder per experiment. Column order is part of
// the output contract and regression-locked byte-for-byte.
CsvTable concentration_table(const std::vector<RatioStats>& rows);
CsvTable coverage_table(const std::vector<CoverageResult>& rows);
CsvTable local_sim_table(const std::vector<ErrorTableRow>& rows);
CsvTable e2e_table(const E2eConfig& config, const E2eResult& result);
CsvTable perturb_check_table(const std::vector<PerturbCheckResult>& rows);
CsvTable fractile_compare_table(const std::vector<FractileCompareRow>& rows);
CsvTable lsh_bench_table(const std::vector<LshSweepRow>& rows);

// Dataset file format:
//   optional leading '#' comment lines
//   dim=<d>,n=<N>,labeled=<0|1>
//   one line per point: comma-separated coordinates, label appended as the
//   final field when labeled=1
// Coordinates are written with 17 significant digits, so save/load is the
// identity on the data model. Errors cite 1-based physical line numbers.
void save_dataset(const Dataset& ds, const std::string& path,
                  const std::string& preamble = "");
Dataset load_dataset(const std::string& path);

}  // namespace nnlab

// Disk formats: 17-significant-digit doubles, the CSV writer, the pinned
// report schemas, and the dataset file format with its 1-based line-numbered
// error messages.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnlab/dataset.hpp"
#include "nnlab/io.hpp"
#include "nnlab/rng.hpp"

using namespace nnlab;

namespace {

std::filesystem::path scratch_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "nnlab_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    std::ostringstream out;
    out << file.rdbuf();
    return out.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    REQUIRE(file.good());
    file << text;
}

// Runs fn, demands it throws, and checks the message carries the substring
// (used for path / line-number diagnostics).
void expect_error(const std::function<void()>& fn, const std::string& substr) {
    try {
        fn();
        FAIL_CHECK("expected an exception mentioning '" << substr << "'");
    } catch (const std::exception& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(substr) != std::string::npos,
                      "message '" << what << "' lacks '" << substr << "'");
    }
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += ',';
        out += parts[i];
    }
    return out;
}

}  // namespace

TEST_CASE("format_double prints 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1e300) == "1.0000000000000001e+300");
}

TEST_CASE("format_double round-trips arbitrary doubles through strtod") {
    RngStream rng(55, 0);
    for (int t = 0; t < 2000; ++t) {
        double value = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
        const std::string text = format_double(value);
        CHECK(std::strtod(text.c_str(), nullptr) == value);
    }
}

TEST_CASE("format_cell renders each variant and rejects unsafe strings") {
    CHECK(format_cell(CsvCell{int64_t{42}}) == "42");
    CHECK(format_cell(CsvCell{int64_t{-7}}) == "-7");
    CHECK(format_cell(CsvCell{0.5}) == "0.5");
    CHECK(format_cell(CsvCell{true}) == "true");
    CHECK(format_cell(CsvCell{false}) == "false");
    CHECK(format_cell(CsvCell{std::string("RandomUniform")}) == "RandomUniform");
    CHECK_THROWS_AS(format_cell(CsvCell{std::string("a,b")}),
                    std::invalid_argument);
    CHECK_THROWS_AS(format_cell(CsvCell{std::string("a\"b")}),
                    std::invalid_argument);
    CHECK_THROWS_AS(format_cell(CsvCell{std::string("a\nb")}),
                    std::invalid_argument);
    CHECK_THROWS_AS(format_cell(CsvCell{std::string("a\rb")}),
                    std::invalid_argument);
}

TEST_CASE("write_csv emits LF-only lines, header first") {
    CsvTable table;
    table.header = {"a", "b", "c"};
    table.rows.push_back({int64_t{1}, 0.5, std::string("x")});
    table.rows.push_back({int64_t{2}, 0.25, std::string("y")});
    const auto path = scratch_file("basic.csv");
    write_csv(table, path.string());

    const std::string text = slurp(path);
    CHECK(text == "a,b,c\n1,0.5,x\n2,0.25,y\n");
    CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("write_csv with no rows still writes the header line") {
    CsvTable table;
    table.header = {"only", "header"};
    const auto path = scratch_file("empty.csv");
    write_csv(table, path.string());
    CHECK(slurp(path) == "only,header\n");
}

TEST_CASE("write_csv places the preamble before the header") {
    CsvTable table;
    table.header = {"x"};
    table.rows.push_back({int64_t{1}});
    const auto path = scratch_file("preamble.csv");

    write_csv(table, path.string(), "# seed=42");
    CHECK(slurp(path) == "# seed=42\nx\n1\n");

    // An already-terminated preamble is not double-newlined.
    write_csv(table, path.string(), "# seed=42\n");
    CHECK(slurp(path) == "# seed=42\nx\n1\n");
}

TEST_CASE("write_csv validates header, row width, and path") {
    CsvTable empty_header;
    CHECK_THROWS_AS(write_csv(empty_header, scratch_file("x.csv").string()),
                    std::invalid_argument);

    CsvTable ragged;
    ragged.header = {"a", "b"};
    ragged.rows.push_back({int64_t{1}});
    CHECK_THROWS_AS(write_csv(ragged, scratch_file("x.csv").string()),
                    std::invalid_argument);

    CsvTable fine;
    fine.header = {"a"};
    const std::string bad_path = "/nonexistent-dir-zzz/out.csv";
    expect_error([&] { write_csv(fine, bad_path); }, bad_path);
}

TEST_CASE("csv doubles survive a write/read cycle bit-for-bit") {
    CsvTable table;
    table.header = {"v"};
    const std::vector<double> values = {0.1, 1.0 / 3.0, 1e-300, 12345.6789,
                                        -0.0, 2.2250738585072014e-308};
    for (double v : values) table.rows.push_back({v});
    const auto path = scratch_file("roundtrip.csv");
    write_csv(table, path.string());

    std::ifstream file(path);
    std::string line;
    std::getline(file, line);  // header
    for (double expect : values) {
        REQUIRE(std::getline(file, line));
        CHECK(std::strtod(line.c_str(), nullptr) == expect);
    }
}

TEST_CASE("report schemas carry their pinned column order") {
    CHECK(join(concentration_table({}).header) ==
          "n,d,runs,min,q1,median,q3,max,mean");
    CHECK(join(coverage_table({}).header) == "n,d,epsilon,runs,mean_fraction");
    CHECK(join(local_sim_table({}).header) ==
          "E,k,policy,closed_form,paper_printed_form,monte_carlo,half_width,"
          "trials,agree");
    CHECK(join(e2e_table(E2eConfig{}, E2eResult{}).header) ==
          "dim,n_train,separation,epsilon,policy,n_queries,exact_error,"
          "approx_error");
    CHECK(join(perturb_check_table({}).header) ==
          "duplicates,draws,amplitude,chi_square,p_value,pass");
    CHECK(join(fractile_compare_table({}).header) ==
          "d,n,epsilon,fractile,mean_eps_candidates,fractile_candidates");
    CHECK(join(lsh_bench_table({}).header) ==
          "k,L,w,max_candidates,recall_at_1,mean_candidates,"
          "mean_distance_ratio");
}

TEST_CASE("schema rows render the expected cell types") {
    ErrorTableRow row;
    row.E = 0.1;
    row.k = 5;
    row.policy = SelectionPolicy::Kind::kMinorityClass;
    row.closed_form = 0.25;
    row.paper_printed_form = 0.5;
    row.monte_carlo = 0.25;
    row.half_width = 0.001;
    row.trials = 1000;
    row.agree = true;
    const CsvTable table = local_sim_table({row});
    REQUIRE(table.rows.size() == 1);
    const auto path = scratch_file("localsim.csv");
    write_csv(table, path.string());
    const std::string text = slurp(path);
    CHECK(text.find("0.10000000000000001,5,MinorityClass,0.25,0.5,0.25,") !=
          std::string::npos);
    CHECK(text.find(",1000,true\n") != std::string::npos);
}

TEST_CASE("labeled datasets round-trip exactly") {
    RngStream rng(66, 0);
    Dataset ds = gaussian_dataset(17, 3, rng);
    std::vector<int> labels(17);
    for (size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<int>(i % 4);
    }
    Dataset labeled(3, ds.coords(), labels);

    const auto path = scratch_file("labeled.ds");
    save_dataset(labeled, path.string());
    const Dataset back = load_dataset(path.string());

    CHECK(back.dim() == 3);
    CHECK(back.size() == 17);
    REQUIRE(back.labeled());
    CHECK(back.coords() == labeled.coords());
    CHECK(back.labels()[0] == 0);
    for (int64_t i = 0; i < back.size(); ++i) {
        CHECK(back.labels()[i] == labels[static_cast<size_t>(i)]);
    }
}

TEST_CASE("unlabeled datasets round-trip exactly") {
    RngStream rng(67, 0);
    Dataset ds = gaussian_dataset(9, 5, rng);
    const auto path = scratch_file("plain.ds");
    save_dataset(ds, path.string());
    const Dataset back = load_dataset(path.string());
    CHECK(back.dim() == 5);
    CHECK(back.size() == 9);
    CHECK(!back.labeled());
    CHECK(back.coords() == ds.coords());
}

TEST_CASE("dataset preamble lines are written and skipped on load") {
    Dataset ds(2, {1.5, -2.5, 0.0, 3.0});
    const auto path = scratch_file("seeded.ds");
    save_dataset(ds, path.string(), "# seed=42");
    const std::string text = slurp(path);
    CHECK(text.rfind("# seed=42\ndim=2,n=2,labeled=0\n", 0) == 0);

    const Dataset back = load_dataset(path.string());
    CHECK(back.coords() == ds.coords());

    // Several comment lines are equally fine.
    spit(path, "# one\n# two\ndim=1,n=1,labeled=0\n2.5\n");
    const Dataset commented = load_dataset(path.string());
    CHECK(commented.dim() == 1);
    CHECK(commented.coords() == std::vector<double>{2.5});
}

TEST_CASE("an empty dataset round-trips as a header-only file") {
    Dataset none(4, {});
    const auto path = scratch_file("none.ds");
    save_dataset(none, path.string());
    CHECK(slurp(path) == "dim=4,n=0,labeled=0\n");
    const Dataset back = load_dataset(path.string());
    CHECK(back.dim() == 4);
    CHECK(back.size() == 0);
}

TEST_CASE("dataset loader reports malformed headers") {
    const auto path = scratch_file("badheader.ds");
    const std::string p = path.string();

    expect_error([&] { load_dataset("/no/such/file.ds"); }, "/no/such/file.ds");

    spit(path, "");
    expect_error([&] { load_dataset(p); }, "missing header");
    spit(path, "# only a comment\n");
    expect_error([&] { load_dataset(p); }, "missing header");

    spit(path, "dim=2,n=3\n");
    expect_error([&] { load_dataset(p); }, "malformed header");
    spit(path, "dim=2,n=x,labeled=0\n");
    expect_error([&] { load_dataset(p); }, "malformed header");
    spit(path, "d=2,n=3,labeled=0\n");
    expect_error([&] { load_dataset(p); }, "malformed header");
    spit(path, "dim=2,n=3,labeled=2\n");
    expect_error([&] { load_dataset(p); }, "malformed header");
    spit(path, "dim=0,n=3,labeled=0\n");
    expect_error([&] { load_dataset(p); }, "dim must be >= 1");
    spit(path, "dim=2,n=-1,labeled=0\n");
    expect_error([&] { load_dataset(p); }, "n must be >= 0");

    // The header error cites its physical line, counting comments.
    spit(path, "# c1\n# c2\ndim=2,n=3\n");
    expect_error([&] { load_dataset(p); }, ":3: malformed header");
}

TEST_CASE("dataset loader reports bad point lines with line numbers") {
    const auto path = scratch_file("badrows.ds");
    const std::string p = path.string();

    spit(path, "dim=2,n=2,labeled=0\n1.0,2.0\n3.0\n");
    expect_error([&] { load_dataset(p); }, ":3: expected 2 fields, found 1");

    spit(path, "dim=2,n=1,labeled=0\n1.0,2.0,3.0\n");
    expect_error([&] { load_dataset(p); }, ":2: expected 2 fields, found 3");

    spit(path, "dim=2,n=1,labeled=0\nabc,2.0\n");
    expect_error([&] { load_dataset(p); }, "unparseable coordinate: abc");

    spit(path, "dim=2,n=1,labeled=0\n1.0x,2.0\n");
    expect_error([&] { load_dataset(p); }, "unparseable coordinate: 1.0x");

    spit(path, "dim=2,n=1,labeled=0\ninf,2.0\n");
    expect_error([&] { load_dataset(p); }, "non-finite");
    spit(path, "dim=2,n=1,labeled=0\nnan,2.0\n");
    expect_error([&] { load_dataset(p); }, "non-finite");

    spit(path, "dim=1,n=1,labeled=1\n1.0,-3\n");
    expect_error([&] { load_dataset(p); }, "unparseable label: -3");
    spit(path, "dim=1,n=1,labeled=1\n1.0,1.5\n");
    expect_error([&] { load_dataset(p); }, "unparseable label: 1.5");

    // A preamble shifts every reported line number down by its length.
    spit(path, "# seed=7\ndim=2,n=1,labeled=0\nabc,2.0\n");
    expect_error([&] { load_dataset(p); }, ":3: unparseable coordinate");
}

TEST_CASE("dataset loader checks the declared row count") {
    const auto path = scratch_file("counts.ds");
    const std::string p = path.string();

    spit(path, "dim=1,n=3,labeled=0\n1.0\n2.0\n");
    expect_error([&] { load_dataset(p); }, "expected 3 point lines, found 2");

    spit(path, "dim=1,n=1,labeled=0\n1.0\n2.0\n");
    expect_error([&] { load_dataset(p); }, ":3: unexpected content");

    // A trailing blank line counts as unexpected content, not silence.
    spit(path, "dim=1,n=1,labeled=0\n1.0\n\n");
    expect_error([&] { load_dataset(p); }, ":3: unexpected content");
}

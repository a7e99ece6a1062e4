// nnlab: nearest-neighbor experimentation CLI. Every subcommand validates
// its flags, runs one experiment from the core library, and writes a single
// CSV (or dataset) file whose first line echoes the seed, so each artifact
// is reproducible from its own contents.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "nnlab/analysis.hpp"
#include "nnlab/dataset.hpp"
#include "nnlab/experiments.hpp"
#include "nnlab/io.hpp"
#include "nnlab/lsh.hpp"
#include "nnlab/neighbors.hpp"
#include "nnlab/rng.hpp"

namespace {

using namespace nnlab;

struct CommonOptions {
    uint64_t seed = 0;
    std::string out;
    std::string config_path;  // consumed before parsing, see inject_config
};

void add_common_options(CLI::App& cmd, CommonOptions& common) {
    cmd.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    cmd.add_option("--out", common.out, "output file path")->required();
    cmd.add_option("--config", common.config_path,
                   "flat key=value file supplying any of this command's "
                   "flags; command-line flags take precedence");
}

[[noreturn]] void usage_error(const std::string& message) {
    throw CLI::ValidationError(message);
}

std::string trimmed(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// Applies a flat key=value config file by rewriting the argument list:
// `--config <path>` is removed and each `key=value` line becomes
// `--key=value`, injected only when --key was not given explicitly — so
// command-line flags always take precedence. Later duplicate keys in the
// file override earlier ones. Keys are validated against the subcommand's
// option set up front.
std::vector<std::string> inject_config(const CLI::App& app,
                                       std::vector<std::string> args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                usage_error("--config requires a file path");
            }
            path = args[i + 1];
            args.erase(args.begin() + static_cast<ptrdiff_t>(i),
                       args.begin() + static_cast<ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;

    const CLI::App* sub = nullptr;
    for (const std::string& arg : args) {
        if (!arg.empty() && arg.front() != '-') {
            sub = app.get_subcommand_no_throw(arg);
            break;
        }
    }
    if (sub == nullptr) {
        usage_error("--config requires a subcommand");
    }

    std::ifstream file(path);
    if (!file) usage_error("--config: cannot open " + path);

    // key -> value, later lines winning.
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const std::string text = trimmed(line);
        if (text.empty() || text.front() == '#') continue;
        const size_t eq = text.find('=');
        if (eq == std::string::npos) {
            usage_error(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
        }
        const std::string key = trimmed(text.substr(0, eq));
        const std::string value = trimmed(text.substr(eq + 1));
        if (key.empty()) {
            usage_error(path + ":" + std::to_string(line_no) + ": empty key");
        }
        if (key == "config") {
            usage_error(path + ":" + std::to_string(line_no) +
                        ": config cannot be set from a config file");
        }
        if (sub->get_option_no_throw("--" + key) == nullptr) {
            usage_error(path + ":" + std::to_string(line_no) + ": --" + key +
                        " is not an option of " + sub->get_name());
        }
        bool replaced = false;
        for (auto& entry : entries) {
            if (entry.first == key) {
                entry.second = value;
                replaced = true;
                break;
            }
        }
        if (!replaced) entries.emplace_back(key, value);
    }

    for (const auto& [key, value] : entries) {
        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& arg : args) {
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
                given = true;
                break;
            }
        }
        if (!given) args.push_back(flag + "=" + value);
    }
    return args;
}

std::string seed_preamble(uint64_t seed) {
    return "# seed=" + std::to_string(seed);
}

// Flag value -> policy name validation, so bad names fail during parsing
// with the flag named in the message.
const CLI::Validator kPolicyName(
    [](std::string& s) {
        return policy_kind_from_string(s)
                   ? std::string{}
                   : "unknown policy: " + s +
                         " (expected RandomUniform, FirstIndex, "
                         "MinorityClass, WrongClass, or Farthest)";
    },
    "POLICY");

SelectionPolicy::Kind parsed_policy_kind(const std::string& name) {
    return *policy_kind_from_string(name);
}

void setup_concentration(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        std::vector<int> dims{100, 1000, 10000};
        std::vector<int64_t> sizes{100, 1000, 10000};
        int runs = 100;
        int big_cell_runs = 20;
        bool f32 = false;
        double mem_budget_gb = 2.0;
        int threads = 0;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "concentration",
        "five-number summaries of the farthest/nearest distance ratio over a "
        "(size, dimension) grid of Gaussian instances");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--dims", opts->dims, "dimensions to test")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--sizes", opts->sizes, "database sizes to test")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--runs", opts->runs, "runs per (size, dimension) cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--big-cell-runs", opts->big_cell_runs,
                    "run cap for cells with at least 10^8 coordinates")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--f32", opts->f32,
                  "store generated coordinates as 32-bit floats");
    cmd->add_option("--mem-budget-gb", opts->mem_budget_gb,
                    "memory budget for concurrent runs, in GiB")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--threads", opts->threads,
                    "max worker threads (0 = hardware concurrency)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        ConcentrationConfig config;
        config.dims = opts->dims;
        config.sizes = opts->sizes;
        config.runs = opts->runs;
        config.seed = opts->common.seed;
        config.precision =
            opts->f32 ? Precision::kFloat32 : Precision::kFloat64;
        config.big_cell_runs = opts->big_cell_runs;
        config.memory_budget_bytes = static_cast<uint64_t>(
            opts->mem_budget_gb * 1073741824.0);
        config.max_threads = opts->threads;
        auto rows = concentration_experiment(config);
        for (const RatioStats& row : rows) {
            if (row.runs == 0) {
                std::fprintf(stderr,
                             "warning: cell n=%lld d=%d skipped, a single "
                             "run exceeds the memory budget\n",
                             static_cast<long long>(row.n), row.d);
            }
        }
        write_csv(concentration_table(rows), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_coverage(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        int64_t n = 1000;
        int d = 10000;
        double epsilon = 0.1;
        int runs = 20;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "coverage",
        "mean fraction of a Gaussian database that qualifies as an "
        "epsilon-approximate nearest neighbor");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--n", opts->n, "database size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--d", opts->d, "dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--epsilon", opts->epsilon, "approximation slack")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--runs", opts->runs, "independent instances to average")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        CoverageResult result = epsilon_coverage(
            opts->n, opts->d, opts->epsilon, opts->runs, opts->common.seed);
        write_csv(coverage_table({result}), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_local_sim(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        std::vector<double> e_grid{0.05, 0.1, 0.3, 0.5};
        std::vector<int64_t> k_grid{1, 2, 5, 10, 20};
        std::vector<std::string> policies{"RandomUniform", "MinorityClass",
                                          "WrongClass"};
        int64_t trials = 1000000;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "local-sim",
        "closed-form error rates vs Monte Carlo for selection policies on "
        "the local two-class neighbor model");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--e-grid", opts->e_grid,
                    "minority posteriors E to test, each in [0, 0.5]")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--k-grid", opts->k_grid, "candidate-set sizes k to test")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--policies", opts->policies,
                    "selection policies (RandomUniform, FirstIndex, "
                    "MinorityClass, WrongClass)")
        ->delimiter(',')
        ->check(kPolicyName)
        ->capture_default_str();
    cmd->add_option("--trials", opts->trials, "Monte Carlo trials per cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        std::vector<SelectionPolicy::Kind> kinds;
        kinds.reserve(opts->policies.size());
        for (const auto& name : opts->policies) {
            kinds.push_back(parsed_policy_kind(name));
        }
        auto rows = error_rate_table(opts->e_grid, opts->k_grid, kinds,
                                     opts->trials, opts->common.seed);
        write_csv(local_sim_table(rows), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_e2e(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        E2eConfig config;
        std::string policy = "RandomUniform";
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "e2e",
        "exact vs epsilon-approximate nearest-neighbor classification on a "
        "two-class Gaussian mixture");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--dim", opts->config.dim, "dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n-train", opts->config.n_train, "training points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--separation", opts->config.separation,
                    "distance between the class means")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--epsilon", opts->config.epsilon, "approximation slack")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--policy", opts->policy,
                    "selection policy for the approximate classifier")
        ->check(kPolicyName)
        ->capture_default_str();
    cmd->add_option("--n-queries", opts->config.n_queries, "query points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        opts->config.seed = opts->common.seed;
        opts->config.policy =
            SelectionPolicy{parsed_policy_kind(opts->policy), -1};
        E2eResult result = e2e_classification(opts->config);
        write_csv(e2e_table(opts->config, result), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_perturb_check(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        std::vector<int> duplicates{2, 3, 5};
        int64_t draws = 10000;
        double amplitude = 0.2;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "perturb-check",
        "chi-square uniformity of exact-nearest-neighbor winners among "
        "exactly tied duplicates after in-ball perturbation");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--duplicates", opts->duplicates,
                    "tied-duplicate counts to test, each >= 2")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--draws", opts->draws, "perturbation draws per count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--amplitude", opts->amplitude,
                    "perturbation radius, in (0, 0.25)")
        ->capture_default_str();
    cmd->callback([opts]() {
        std::vector<PerturbCheckResult> rows;
        rows.reserve(opts->duplicates.size());
        for (int dup : opts->duplicates) {
            rows.push_back(perturbation_uniformity_check(
                dup, opts->draws, opts->amplitude, opts->common.seed));
        }
        write_csv(perturb_check_table(rows), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_fractile_compare(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        std::vector<int> dims{10, 100, 1000, 10000};
        int64_t n = 1000;
        double epsilon = 0.1;
        double fractile = 0.01;
        int runs = 20;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "fractile-compare",
        "epsilon candidate-set size vs the fixed fractile candidate count, "
        "per dimension");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--dims", opts->dims, "dimensions to test")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n", opts->n, "database size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--epsilon", opts->epsilon, "approximation slack")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--fractile", opts->fractile,
                    "candidate fractile, in (0, 1]")
        ->capture_default_str();
    cmd->add_option("--runs", opts->runs, "independent instances to average")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        auto rows = fractile_vs_epsilon_comparison(
            opts->dims, opts->n, opts->epsilon, opts->fractile, opts->runs,
            opts->common.seed);
        write_csv(fractile_compare_table(rows), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_lsh_bench(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        int64_t n = 10000;
        int d = 32;
        int64_t queries = 100;
        std::vector<int> hashes{8};
        std::vector<int> tables{16};
        double width = 0.0;
        int64_t max_candidates = 0;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "lsh-bench",
        "recall@1 and candidate effort of the p-stable LSH index against "
        "exact search, over a (hashes, tables) grid");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--n", opts->n, "database size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--d", opts->d, "dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--queries", opts->queries, "query points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--hashes", opts->hashes, "hashes per table (k) values")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--tables", opts->tables, "table count (L) values")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--width", opts->width,
                    "bucket width w (0 = derive from the data: 6 x median "
                    "subsample nearest-neighbor distance)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--max-candidates", opts->max_candidates,
                    "cap on scanned candidates per query (0 = no cap)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        RngStream data_rng(opts->common.seed,
                           stream_id_for("lsh-bench/data", {}));
        Dataset ds = gaussian_dataset(opts->n, opts->d, data_rng);
        RngStream query_rng(opts->common.seed,
                            stream_id_for("lsh-bench/queries", {}));
        std::vector<Point> queries(
            static_cast<size_t>(opts->queries),
            Point(static_cast<size_t>(opts->d)));
        for (auto& q : queries) {
            for (auto& c : q) c = query_rng.normal();
        }

        const double w =
            opts->width > 0.0 ? opts->width : default_bucket_width(ds);
        std::vector<LshParams> grid;
        grid.reserve(opts->hashes.size() * opts->tables.size());
        for (int k : opts->hashes) {
            for (int L : opts->tables) {
                grid.push_back(LshParams{k, L, w, opts->common.seed});
            }
        }
        auto rows = lsh_recall_sweep(ds, queries, grid, opts->max_candidates);
        write_csv(lsh_bench_table(rows), opts->common.out,
                  seed_preamble(opts->common.seed));
    });
}

void setup_gen(CLI::App& app) {
    struct Opts {
        CommonOptions common;
        std::string kind;
        int64_t n = 0;
        int d = 0;
        int extent = 10;
        int classes = 0;
    };
    auto opts = std::make_shared<Opts>();
    CLI::App* cmd = app.add_subcommand(
        "gen", "generate a dataset file (gaussian or integer grid)");
    add_common_options(*cmd, opts->common);
    cmd->add_option("--kind", opts->kind, "dataset kind")
        ->required()
        ->check(CLI::IsMember({"gaussian", "grid"}));
    cmd->add_option("--n", opts->n, "number of points")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--d", opts->d, "dimension")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--extent", opts->extent,
                    "grid side length (grid kind only)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--classes", opts->classes,
                    "attach round-robin labels 0..classes-1 (0 = unlabeled)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->callback([opts]() {
        RngStream rng(opts->common.seed, stream_id_for("gen/points", {}));
        Dataset ds = opts->kind == "grid"
                         ? grid_dataset(opts->n, opts->d, opts->extent, rng)
                         : gaussian_dataset(opts->n, opts->d, rng);
        if (opts->classes > 0) {
            std::vector<int> labels(static_cast<size_t>(opts->n));
            for (int64_t i = 0; i < opts->n; ++i) {
                labels[static_cast<size_t>(i)] =
                    static_cast<int>(i % opts->classes);
            }
            ds = Dataset(ds.dim(), ds.coords(), std::move(labels));
        }
        save_dataset(ds, opts->common.out,
                     seed_preamble(opts->common.seed));
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nearest-neighbor experimentation toolkit"};
    app.name("nnlab");  // stable usage line regardless of the invoked path
    app.require_subcommand(1);

    setup_concentration(app);
    setup_coverage(app);
    setup_local_sim(app);
    setup_e2e(app);
    setup_perturb_check(app);
    setup_fractile_compare(app);
    setup_lsh_bench(app);
    setup_gen(app);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config(app, args);
        std::vector<const char*> raw;
        raw.reserve(args.size() + 1);
        raw.push_back(argv[0]);
        for (const std::string& arg : args) raw.push_back(arg.c_str());
        app.parse(static_cast<int>(raw.size()),
                  const_cast<char**>(raw.data()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#include "claimex/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "claimex/config.hpp"
#include "claimex/dataset.hpp"
#include "claimex/error.hpp"
#include "claimex/experiments.hpp"
#include "claimex/extraction.hpp"
#include "claimex/judge.hpp"
#include "claimex/metrics.hpp"
#include "claimex/pool.hpp"
#include "claimex/retrieval.hpp"
#include "claimex/util.hpp"

namespace fs = std::filesystem;

namespace claimex {

namespace {

// Options shared by every pipeline command. Flag > config file > default.
struct CommonOpts {
    std::string config_path;
    std::string mode = "replay";
    std::string prompts_dir = "assets/prompts";
    std::string fixture_dir = "fixtures";
    std::size_t shots = 5;
    int image_budget = 30;
    std::size_t workers = 4;
    std::string judge_model = "google/gemini-2.5-flash-lite";
};

struct CommonFlags {
    CLI::Option* mode = nullptr;
    CLI::Option* prompts_dir = nullptr;
    CLI::Option* fixture_dir = nullptr;
    CLI::Option* shots = nullptr;
    CLI::Option* image_budget = nullptr;
    CLI::Option* workers = nullptr;
    CLI::Option* judge_model = nullptr;
};

CommonFlags add_common_options(CLI::App* cmd, CommonOpts& opts) {
    CommonFlags flags;
    cmd->add_option("--config", opts.config_path, "Config file (key = value lines)");
    flags.mode = cmd->add_option("--mode", opts.mode, "Backend mode: replay or live")
                     ->capture_default_str();
    flags.prompts_dir =
        cmd->add_option("--prompts", opts.prompts_dir, "Prompt template directory")
            ->capture_default_str();
    flags.fixture_dir =
        cmd->add_option("--fixtures", opts.fixture_dir, "Recorded response store directory")
            ->capture_default_str();
    flags.shots = cmd->add_option("--shots", opts.shots, "Demonstrations per request")
                      ->capture_default_str();
    flags.image_budget =
        cmd->add_option("--image-budget", opts.image_budget,
                        "Max images per request, query included (0 disables)")
            ->capture_default_str();
    flags.workers = cmd->add_option("--workers", opts.workers, "Worker threads for per-pair work")
                        ->capture_default_str();
    flags.judge_model = cmd->add_option("--judge-model", opts.judge_model, "Judge model id")
                            ->capture_default_str();
    return flags;
}

// Layer the config file under any explicitly passed flags.
Config resolve_config(const CommonOpts& opts, const CommonFlags& flags) {
    Config config;
    if (!opts.config_path.empty()) config = load_config(opts.config_path);
    if (flags.mode->count() > 0 || opts.config_path.empty()) config.mode = parse_mode(opts.mode);
    if (flags.prompts_dir->count() > 0) config.prompts_dir = opts.prompts_dir;
    if (flags.fixture_dir->count() > 0) config.fixture_dir = opts.fixture_dir;
    if (flags.shots->count() > 0) config.shots = opts.shots;
    if (flags.image_budget->count() > 0) config.image_budget = opts.image_budget;
    if (flags.workers->count() > 0) config.workers = opts.workers;
    if (flags.judge_model->count() > 0) config.judge_model = opts.judge_model;
    config.validate();
    return config;
}

int cmd_validate(const std::string& dataset_path) {
    if (!fs::exists(dataset_path)) {
        std::cerr << "error: dataset file " << dataset_path << " does not exist\n";
        return 2;
    }
    try {
        Dataset dataset = load_dataset(dataset_path);
        std::cout << render_summary(summarize(dataset));
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_extract(const std::string& dataset_path, const std::string& method_name,
                const std::string& model, const std::string& out_path,
                const std::string& failures_path, const Config& config) {
    ExtractionMethod method = parse_method(method_name);
    Dataset dataset = load_dataset(dataset_path);
    Runtime runtime = make_runtime(config);
    RuntimeDeps deps = runtime.deps();

    PairIndex pair_index(dataset);
    std::optional<Bm25Index> index;
    if (method == ExtractionMethod::image_text_icl || method == ExtractionMethod::mice) {
        index = build_train_index(dataset);
    }

    ExtractionContext ctx;
    ctx.prompts = deps.prompts;
    ctx.backend = deps.backend;
    ctx.vision = deps.vision;
    ctx.index = index ? &*index : nullptr;
    ctx.pairs = &pair_index;
    ctx.loader = deps.loader;
    ctx.model = model;
    ctx.shots = config.shots;
    ctx.image_budget = config.image_budget;

    BatchResult batch = run_batch(dataset, method, ctx, config.workers);
    write_file_atomic(out_path, serialize_extractions(batch.results));
    if (!failures_path.empty()) {
        write_file_atomic(failures_path, serialize_failures(batch.failures));
    }

    std::cout << "extracted " << batch.results.size() << " of " << dataset.size() << " pairs ("
              << batch.failures.size() << " failures) -> " << out_path << "\n";
    for (const auto& failure : batch.failures) {
        std::cerr << "warning: pair " << failure.pair_id << ": " << failure.message << "\n";
    }
    if (!dataset.empty() && batch.results.empty()) {
        std::cerr << "error: every pair failed\n";
        return exit_code_for(ErrorKind::data);
    }
    return 0;
}

int cmd_judge(const std::string& dataset_path, const std::string& extractions_path,
              const std::string& out_path, const std::string& failures_path,
              const Config& config) {
    Dataset dataset = load_dataset(dataset_path);
    PairIndex pair_index(dataset);
    std::vector<ExtractedClaims> extractions =
        parse_extractions(read_text_file(extractions_path), extractions_path);

    Runtime runtime = make_runtime(config);
    RuntimeDeps deps = runtime.deps();
    Judge judge(*deps.prompts, *deps.backend, config.judge_model, deps.loader);

    std::vector<std::optional<ClaimEvaluation>> slots(extractions.size());
    std::vector<std::optional<BatchFailure>> failure_slots(extractions.size());
    parallel_for(extractions.size(), config.workers, [&](std::size_t i) {
        try {
            slots[i] = judge.evaluate_claims(extractions[i], pair_index.at(extractions[i].pair_id));
        } catch (const std::exception& e) {
            failure_slots[i] = BatchFailure{extractions[i].pair_id, e.what()};
        }
    });

    std::vector<ClaimEvaluation> evaluations;
    std::vector<BatchFailure> failures;
    for (std::size_t i = 0; i < extractions.size(); ++i) {
        if (slots[i]) evaluations.push_back(std::move(*slots[i]));
        if (failure_slots[i]) failures.push_back(std::move(*failure_slots[i]));
    }

    write_file_atomic(out_path, serialize_evaluations(evaluations));
    if (!failures_path.empty()) write_file_atomic(failures_path, serialize_failures(failures));

    std::cout << "judged " << evaluations.size() << " of " << extractions.size()
              << " extractions (" << failures.size() << " failures) -> " << out_path << "\n";
    for (const auto& failure : failures) {
        std::cerr << "warning: pair " << failure.pair_id << ": " << failure.message << "\n";
    }
    if (!extractions.empty() && evaluations.empty()) {
        std::cerr << "error: every pair failed\n";
        return exit_code_for(ErrorKind::data);
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& evaluation_paths,
               std::vector<std::string> methods, std::vector<std::string> models,
               const std::string& out_md, const std::string& out_csv) {
    if (methods.size() == 1 && evaluation_paths.size() > 1) {
        methods.assign(evaluation_paths.size(), methods.front());
    }
    if (models.size() == 1 && evaluation_paths.size() > 1) {
        models.assign(evaluation_paths.size(), models.front());
    }
    if (methods.size() != evaluation_paths.size() || models.size() != evaluation_paths.size()) {
        fail(ErrorKind::usage,
             "--method and --model must be given once or once per --evaluations file");
    }

    std::vector<AggregateReport> reports;
    for (std::size_t i = 0; i < evaluation_paths.size(); ++i) {
        auto evaluations =
            parse_evaluations(read_text_file(evaluation_paths[i]), evaluation_paths[i]);
        reports.push_back(aggregate(evaluations, parse_method(methods[i]), models[i]));
    }

    std::string markdown = render_report_markdown(reports);
    if (out_md.empty()) {
        std::cout << markdown;
    } else {
        write_file_atomic(out_md, markdown);
        std::cout << "wrote " << out_md << "\n";
    }
    if (!out_csv.empty()) {
        write_file_atomic(out_csv, render_report_csv(reports));
        std::cout << "wrote " << out_csv << "\n";
    }
    return 0;
}

int cmd_agreement(const std::string& csv_path, const std::string& scale_name,
                  const std::string& rho_raters, const std::string& out_csv) {
    Scale scale = parse_scale(scale_name);
    RaterMatrix matrix = load_rater_matrix_csv(read_text_file(csv_path), csv_path, scale);

    AlphaResult declared = krippendorff_alpha(matrix, scale);
    AlphaResult other =
        krippendorff_alpha(matrix, scale == Scale::nominal ? Scale::ordinal : Scale::nominal);
    PercentAgreementResult agreement = percent_agreement(matrix);

    for (const auto& warning : agreement.warnings) std::cerr << "warning: " << warning << "\n";
    if (declared.degenerate) {
        std::cerr << "warning: expected disagreement is zero (single rating value); "
                     "alpha is 1.0 by definition\n";
    }

    // Rank correlation between two rater columns, over items they both rated.
    std::optional<double> rho;
    std::string rho_label;
    std::vector<std::string> rho_pair = split_list(rho_raters, ",");
    if (rho_pair.empty() && matrix.raters.size() == 2) rho_pair = matrix.raters;
    if (rho_pair.size() == 2) {
        auto column = [&](const std::string& name) -> std::size_t {
            for (std::size_t c = 0; c < matrix.raters.size(); ++c) {
                if (matrix.raters[c] == name) return c;
            }
            fail(ErrorKind::usage, "unknown rater \"" + name + "\" in --rho-raters");
        };
        std::size_t a = column(rho_pair[0]), b = column(rho_pair[1]);
        std::vector<double> x, y;
        for (const auto& row : matrix.values) {
            if (row[a].has_value() && row[b].has_value()) {
                x.push_back(*row[a]);
                y.push_back(*row[b]);
            }
        }
        rho_label = rho_pair[0] + " vs " + rho_pair[1];
        try {
            rho = spearman_rho(x, y);
        } catch (const Error& e) {
            std::cerr << "warning: Spearman's rho (" << rho_label << ") undefined: " << e.what()
                      << "\n";
        }
    } else if (!rho_pair.empty()) {
        fail(ErrorKind::usage, "--rho-raters expects exactly two comma-separated rater names");
    }

    std::cout << "# Agreement\n\n";
    std::cout << "Items: " << matrix.items.size() << " (" << agreement.items_used
              << " with 2+ ratings), raters: " << matrix.raters.size() << "\n\n";
    std::cout << "| Statistic | Value |\n|---|---:|\n";
    std::cout << "| Krippendorff's alpha (" << to_string(scale) << ") | "
              << format_fixed(declared.value, 3) << " |\n";
    std::cout << "| Krippendorff's alpha ("
              << to_string(scale == Scale::nominal ? Scale::ordinal : Scale::nominal) << ") | "
              << format_fixed(other.value, 3) << " |\n";
    std::cout << "| Percent agreement | " << format_fixed(agreement.value, 1) << " |\n";
    if (rho) {
        std::cout << "| Spearman's rho (" << rho_label << ") | " << format_fixed(*rho, 3)
                  << " |\n";
    }

    if (!out_csv.empty()) {
        std::string csv = "statistic,value\n";
        csv += "krippendorff_alpha_" + to_string(scale) + "," + format_full(declared.value) + "\n";
        csv += "krippendorff_alpha_" +
               to_string(scale == Scale::nominal ? Scale::ordinal : Scale::nominal) + "," +
               format_full(other.value) + "\n";
        csv += "percent_agreement," + format_full(agreement.value) + "\n";
        if (rho) csv += "spearman_rho," + format_full(*rho) + "\n";
        write_file_atomic(out_csv, csv);
        std::cout << "\nwrote " << out_csv << "\n";
    }
    return 0;
}

int cmd_benchmark(const std::string& dataset_path, const std::vector<std::string>& method_names,
                  const std::vector<std::string>& models, const std::string& out_dir, bool force,
                  const Config& config) {
    BenchmarkSpec spec;
    spec.dataset_path = dataset_path;
    for (const auto& name : method_names) spec.methods.push_back(parse_method(name));
    spec.models = models;
    spec.judge_model = config.judge_model;
    spec.shots = config.shots;
    spec.image_budget = config.image_budget;
    spec.output_dir = out_dir;
    spec.mode = config.mode;
    spec.workers = config.workers;
    spec.force = force;

    Runtime runtime = make_runtime(config);
    BenchmarkResult result = run_benchmark(spec, runtime.deps());

    for (const auto& failure : result.pair_failures) {
        std::cerr << "warning: pair " << failure.pair_id << ": " << failure.message << "\n";
    }
    for (const auto& cell : result.failed_cells) {
        std::cerr << "warning: cell " << cell.model_id << "/" << to_string(cell.method)
                  << " failed: " << cell.message << "\n";
    }
    std::cout << render_report_markdown(result.reports);
    std::cout << "\nartifacts in " << out_dir << "\n";
    if (result.reports.empty()) {
        std::cerr << "error: every benchmark cell failed\n";
        return exit_code_for(ErrorKind::data);
    }
    return 0;
}

int cmd_temporal(const std::string& dataset_path, const std::string& model_a,
                 const std::string& model_b, const std::string& start, const std::string& end,
                 const std::string& method_name, const std::string& out_dir, bool force,
                 const Config& config) {
    TemporalSpec spec;
    spec.dataset_path = dataset_path;
    spec.model_a = model_a;
    spec.model_b = model_b;
    spec.start = Date::parse(start);
    spec.end = Date::parse(end);
    spec.method = parse_method(method_name);
    spec.judge_model = config.judge_model;
    spec.shots = config.shots;
    spec.image_budget = config.image_budget;
    spec.output_dir = out_dir;
    spec.mode = config.mode;
    spec.workers = config.workers;
    spec.force = force;

    Runtime runtime = make_runtime(config);
    TemporalResult result = run_temporal(spec, runtime.deps());

    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
    for (const auto& failure : result.pair_failures) {
        std::cerr << "warning: pair " << failure.pair_id << ": " << failure.message << "\n";
    }
    std::cout << read_text_file((fs::path(out_dir) / "report.md").string());
    std::cout << "\nartifacts in " << out_dir << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Multimodal claim extraction pipeline and evaluation harness"};
    app.require_subcommand(1);

    // validate
    std::string validate_dataset;
    auto* validate = app.add_subcommand("validate", "Check a dataset file and print its summary");
    validate->add_option("dataset", validate_dataset, "Dataset JSONL file")->required();

    // extract
    std::string ex_dataset, ex_method, ex_model, ex_out, ex_failures;
    CommonOpts ex_opts;
    auto* extract = app.add_subcommand("extract", "Run one extraction method over a dataset");
    extract->add_option("--dataset", ex_dataset, "Dataset JSONL file")->required();
    extract->add_option("--method", ex_method,
                        "text_only, image_text, image_text_icl, or mice")->required();
    extract->add_option("--model", ex_model, "Extraction model id")->required();
    extract->add_option("--out", ex_out, "Output extractions JSONL path")->required();
    extract->add_option("--failures", ex_failures, "Optional failures JSONL path");
    CommonFlags ex_flags = add_common_options(extract, ex_opts);

    // judge
    std::string ju_dataset, ju_extractions, ju_out, ju_failures;
    CommonOpts ju_opts;
    auto* judge = app.add_subcommand("judge", "Score extracted claims with the judge model");
    judge->add_option("--dataset", ju_dataset, "Dataset JSONL file")->required();
    judge->add_option("--extractions", ju_extractions, "Extractions JSONL file")->required();
    judge->add_option("--out", ju_out, "Output evaluations JSONL path")->required();
    judge->add_option("--failures", ju_failures, "Optional failures JSONL path");
    CommonFlags ju_flags = add_common_options(judge, ju_opts);

    // report
    std::vector<std::string> re_evaluations, re_methods, re_models;
    std::string re_out_md, re_out_csv;
    auto* report = app.add_subcommand("report", "Aggregate evaluations into a benchmark table");
    report->add_option("--evaluations", re_evaluations, "Evaluations JSONL file(s)")->required();
    report->add_option("--method", re_methods, "Method label per evaluations file")->required();
    report->add_option("--model", re_models, "Model label per evaluations file")->required();
    report->add_option("--out-md", re_out_md, "Markdown output path (default: stdout)");
    report->add_option("--out-csv", re_out_csv, "CSV output path");

    // agreement
    std::string ag_csv, ag_scale = "nominal", ag_rho, ag_out_csv;
    auto* agreement =
        app.add_subcommand("agreement", "Inter-rater statistics from an items-by-raters CSV");
    agreement->add_option("csv", ag_csv, "CSV file: header item,<rater>,... ; empty cell = missing")
        ->required();
    agreement->add_option("--scale", ag_scale, "Rating scale: nominal or ordinal")
        ->capture_default_str();
    agreement->add_option("--rho-raters", ag_rho,
                          "Two rater names for Spearman's rho (default: the only two)");
    agreement->add_option("--out-csv", ag_out_csv, "Full-precision CSV output path");

    // benchmark
    std::string be_dataset, be_out;
    std::vector<std::string> be_methods, be_models;
    bool be_force = false;
    CommonOpts be_opts;
    auto* benchmark = app.add_subcommand("benchmark", "Run the method-by-model benchmark grid");
    benchmark->add_option("--dataset", be_dataset, "Dataset JSONL file")->required();
    benchmark->add_option("--methods", be_methods, "Extraction methods (comma-separated or repeated)")
        ->required()
        ->delimiter(',');
    benchmark->add_option("--models", be_models, "Model ids (comma-separated or repeated)")
        ->required()
        ->delimiter(',');
    benchmark->add_option("--out", be_out, "Output directory")->required();
    benchmark->add_flag("--force", be_force, "Re-run cells whose artifacts already exist");
    CommonFlags be_flags = add_common_options(benchmark, be_opts);

    // temporal
    std::string te_dataset, te_model_a, te_model_b, te_start, te_end, te_out;
    std::string te_method = "image_text_icl";
    bool te_force = false;
    CommonOpts te_opts;
    auto* temporal =
        app.add_subcommand("temporal", "Compare two models over a date-bounded subset");
    temporal->add_option("--dataset", te_dataset, "Dataset JSONL file")->required();
    temporal->add_option("--model-a", te_model_a, "Earlier-cutoff model id")->required();
    temporal->add_option("--model-b", te_model_b, "Later-cutoff model id")->required();
    temporal->add_option("--start", te_start, "Window start date (YYYY-MM-DD, inclusive)")
        ->required();
    temporal->add_option("--end", te_end, "Window end date (YYYY-MM-DD, inclusive)")->required();
    temporal->add_option("--method", te_method, "Extraction method")->capture_default_str();
    temporal->add_option("--out", te_out, "Output directory")->required();
    temporal->add_flag("--force", te_force, "Re-run cells whose artifacts already exist");
    CommonFlags te_flags = add_common_options(temporal, te_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code_for(ErrorKind::usage);
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_dataset);
        if (extract->parsed()) {
            return cmd_extract(ex_dataset, ex_method, ex_model, ex_out, ex_failures,
                               resolve_config(ex_opts, ex_flags));
        }
        if (judge->parsed()) {
            return cmd_judge(ju_dataset, ju_extractions, ju_out, ju_failures,
                             resolve_config(ju_opts, ju_flags));
        }
        if (report->parsed()) {
            return cmd_report(re_evaluations, re_methods, re_models, re_out_md, re_out_csv);
        }
        if (agreement->parsed()) return cmd_agreement(ag_csv, ag_scale, ag_rho, ag_out_csv);
        if (benchmark->parsed()) {
            return cmd_benchmark(be_dataset, be_methods, be_models, be_out, be_force,
                                 resolve_config(be_opts, be_flags));
        }
        if (temporal->parsed()) {
            return cmd_temporal(te_dataset, te_model_a, te_model_b, te_start, te_end, te_method,
                                te_out, te_force, resolve_config(te_opts, te_flags));
        }
        std::cerr << "error: no command given\n";
        return exit_code_for(ErrorKind::usage);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
}

}  // namespace claimex

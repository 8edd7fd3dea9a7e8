#include "claimex/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "claimex/error.hpp"
#include "claimex/pool.hpp"
#include "claimex/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace claimex {

void BenchmarkSpec::validate() const {
    if (dataset_path.empty()) fail(ErrorKind::config, "benchmark needs a dataset path");
    if (methods.empty()) fail(ErrorKind::config, "benchmark needs at least one method");
    if (models.empty()) fail(ErrorKind::config, "benchmark needs at least one model");
    if (judge_model.empty()) fail(ErrorKind::config, "benchmark needs a judge model");
    if (output_dir.empty()) fail(ErrorKind::config, "benchmark needs an output directory");
    if (image_budget < 0) fail(ErrorKind::config, "image budget must be ≥ 0");
    if (workers == 0) fail(ErrorKind::config, "workers must be ≥ 1");
}

void TemporalSpec::validate() const {
    if (dataset_path.empty()) fail(ErrorKind::config, "temporal run needs a dataset path");
    if (model_a.empty() || model_b.empty()) {
        fail(ErrorKind::config, "temporal run needs both model ids");
    }
    if (model_a == model_b) fail(ErrorKind::config, "temporal run compares two distinct models");
    if (judge_model.empty()) fail(ErrorKind::config, "temporal run needs a judge model");
    if (output_dir.empty()) fail(ErrorKind::config, "temporal run needs an output directory");
    if (!(start < end)) fail(ErrorKind::config, "temporal window start must precede its end");
    if (workers == 0) fail(ErrorKind::config, "workers must be ≥ 1");
}

namespace {

struct CellArtifacts {
    std::vector<ClaimEvaluation> evaluations;
    std::vector<BatchFailure> failures;
    bool resumed = false;
};

std::vector<BatchFailure> parse_failures_jsonl(const std::string& text) {
    std::vector<BatchFailure> out;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (trim(line).empty()) continue;
        json record = json::parse(line);
        out.push_back(BatchFailure{record.value("pair_id", ""), record.value("error", "")});
    }
    return out;
}

// Run (or reuse) one model × method cell, leaving extractions.jsonl,
// evaluations.jsonl, failures.jsonl, and a cell.json completion marker in
// cell_dir. Every dataset pair lands in exactly one of evaluations/failures.
CellArtifacts run_cell(const Dataset& dataset, const PairIndex& pair_index,
                       ExtractionMethod method, const std::string& model,
                       const std::string& judge_model, std::size_t shots, int image_budget,
                       std::size_t workers, const Bm25Index* index, const RuntimeDeps& deps,
                       const fs::path& cell_dir, bool force) {
    const fs::path extractions_path = cell_dir / "extractions.jsonl";
    const fs::path evaluations_path = cell_dir / "evaluations.jsonl";
    const fs::path failures_path = cell_dir / "failures.jsonl";
    const fs::path marker_path = cell_dir / "cell.json";

    if (!force && fs::exists(marker_path) && fs::exists(extractions_path) &&
        fs::exists(evaluations_path)) {
        CellArtifacts artifacts;
        artifacts.evaluations =
            parse_evaluations(read_text_file(evaluations_path.string()), evaluations_path.string());
        if (fs::exists(failures_path)) {
            artifacts.failures = parse_failures_jsonl(read_text_file(failures_path.string()));
        }
        artifacts.resumed = true;
        return artifacts;
    }

    ExtractionContext ctx;
    ctx.prompts = deps.prompts;
    ctx.backend = deps.backend;
    ctx.vision = deps.vision;
    ctx.index = index;
    ctx.pairs = &pair_index;
    ctx.loader = deps.loader;
    ctx.model = model;
    ctx.shots = shots;
    ctx.image_budget = image_budget;

    BatchResult batch = run_batch(dataset, method, ctx, workers);

    Judge judge(*deps.prompts, *deps.backend, judge_model, deps.loader);
    std::vector<std::optional<ClaimEvaluation>> evaluation_slots(batch.results.size());
    std::vector<std::optional<BatchFailure>> judge_failure_slots(batch.results.size());
    parallel_for(batch.results.size(), workers, [&](std::size_t i) {
        const ExtractedClaims& result = batch.results[i];
        try {
            evaluation_slots[i] = judge.evaluate_claims(result, pair_index.at(result.pair_id));
        } catch (const std::exception& e) {
            judge_failure_slots[i] =
                BatchFailure{result.pair_id, std::string("judging failed: ") + e.what()};
        }
    });

    CellArtifacts artifacts;
    for (auto& slot : evaluation_slots) {
        if (slot) artifacts.evaluations.push_back(std::move(*slot));
    }

    // Merge extraction and judging failures back into dataset order.
    std::unordered_map<std::string, std::size_t> order;
    for (std::size_t i = 0; i < dataset.pairs().size(); ++i) order[dataset.pairs()[i].id] = i;
    for (auto& failure : batch.failures) artifacts.failures.push_back(std::move(failure));
    for (auto& slot : judge_failure_slots) {
        if (slot) artifacts.failures.push_back(std::move(*slot));
    }
    std::sort(artifacts.failures.begin(), artifacts.failures.end(),
              [&](const BatchFailure& a, const BatchFailure& b) {
                  return order.at(a.pair_id) < order.at(b.pair_id);
              });

    fs::create_directories(cell_dir);
    write_file_atomic(extractions_path.string(), serialize_extractions(batch.results));
    write_file_atomic(evaluations_path.string(), serialize_evaluations(artifacts.evaluations));
    write_file_atomic(failures_path.string(), serialize_failures(artifacts.failures));

    ordered_json marker;
    marker["model"] = model;
    marker["method"] = to_string(method);
    marker["pairs"] = dataset.size();
    marker["evaluated"] = artifacts.evaluations.size();
    marker["failed"] = artifacts.failures.size();
    write_file_atomic(marker_path.string(), marker.dump(2) + "\n");
    return artifacts;
}

ordered_json prompt_checksum_json(const PromptLibrary& prompts) {
    ordered_json out;
    for (const auto& [name, checksum] : prompts.checksums()) out[name] = checksum;
    return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkSpec& spec, const RuntimeDeps& deps) {
    spec.validate();
    if (deps.prompts == nullptr || deps.backend == nullptr || !deps.loader || !deps.store) {
        fail(ErrorKind::config, "benchmark runtime is incomplete");
    }

    Dataset dataset = load_dataset(spec.dataset_path);
    if (dataset.empty()) fail(ErrorKind::data, "dataset " + spec.dataset_path + " is empty");
    PairIndex pair_index(dataset);

    const bool needs_index =
        std::any_of(spec.methods.begin(), spec.methods.end(), [](ExtractionMethod m) {
            return m == ExtractionMethod::image_text_icl || m == ExtractionMethod::mice;
        });
    std::optional<Bm25Index> index;
    if (needs_index) index = build_train_index(dataset);

    const fs::path out_dir(spec.output_dir);
    fs::create_directories(out_dir);

    BenchmarkResult result;
    ordered_json cell_manifest = ordered_json::array();
    for (const auto& model : spec.models) {
        for (const auto method : spec.methods) {
            const fs::path cell_dir =
                out_dir / sanitize_path_component(model) / to_string(method);
            ordered_json cell_entry;
            cell_entry["model"] = model;
            cell_entry["method"] = to_string(method);
            try {
                CellArtifacts artifacts =
                    run_cell(dataset, pair_index, method, model, spec.judge_model, spec.shots,
                             spec.image_budget, spec.workers, index ? &*index : nullptr, deps,
                             cell_dir, spec.force);
                for (const auto& failure : artifacts.failures) {
                    result.pair_failures.push_back(BatchFailure{
                        failure.pair_id, sanitize_path_component(model) + "/" +
                                             to_string(method) + ": " + failure.message});
                }
                cell_entry["evaluated"] = artifacts.evaluations.size();
                cell_entry["failed_pairs"] = artifacts.failures.size();
                if (artifacts.evaluations.empty()) {
                    std::string message = "no pair was successfully evaluated";
                    if (!artifacts.failures.empty()) {
                        message += "; first failure: " + artifacts.failures.front().message;
                    }
                    result.failed_cells.push_back(CellFailure{model, method, message});
                    cell_entry["status"] = "failed";
                } else {
                    result.reports.push_back(
                        aggregate(artifacts.evaluations, method, model));
                    cell_entry["status"] = artifacts.resumed ? "resumed" : "completed";
                }
            } catch (const std::exception& e) {
                result.failed_cells.push_back(CellFailure{model, method, e.what()});
                cell_entry["status"] = "failed";
                cell_entry["error"] = e.what();
            }
            cell_manifest.push_back(std::move(cell_entry));
        }
    }

    write_file_atomic((out_dir / "report.md").string(), render_report_markdown(result.reports));
    write_file_atomic((out_dir / "report.csv").string(), render_report_csv(result.reports));

    ordered_json manifest;
    manifest["kind"] = "benchmark";
    manifest["dataset"] = spec.dataset_path;
    manifest["mode"] = to_string(spec.mode);
    ordered_json methods = ordered_json::array();
    for (const auto method : spec.methods) methods.push_back(to_string(method));
    manifest["methods"] = std::move(methods);
    manifest["models"] = spec.models;
    manifest["judge_model"] = spec.judge_model;
    manifest["shots"] = spec.shots;
    manifest["image_budget"] = spec.image_budget;
    manifest["prompt_checksums"] = prompt_checksum_json(*deps.prompts);
    manifest["fixture_digest"] = deps.store->digest();
    manifest["cells"] = std::move(cell_manifest);
    write_file_atomic((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    return result;
}

namespace {

std::string render_temporal_markdown(const TemporalSpec& spec, const TemporalResult& result) {
    std::string out = "# Temporal Comparison\n\n";
    out += "Method: " + display_name(spec.method) + "\n";
    out += "Window: " + spec.start.to_string() + " .. " + spec.end.to_string() + "\n\n";
    out += "| Model | N | Reference (mean) | Entailed % (strict) | Entailed % (lenient) | "
           "Decontext % (strict) | Decontext % (lenient) |\n";
    out += "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const AggregateReport* report : {&result.report_a, &result.report_b}) {
        out += "| " + report->model_id + " | " + std::to_string(report->n) + " | " +
               format_fixed(report->mean_reference, 2) + " | " +
               format_fixed(report->entailment_strict_pct, 1) + " | " +
               format_fixed(report->entailment_lenient_pct, 1) + " | " +
               format_fixed(report->decontext_strict_pct, 1) + " | " +
               format_fixed(report->decontext_lenient_pct, 1) + " |\n";
    }
    out += "\n## Pairs improved under " + spec.model_b + "\n\n";
    if (result.improved_pairs.empty()) {
        out += "(none)\n";
    } else {
        std::unordered_map<std::string, const PairDelta*> by_id;
        for (const auto& delta : result.deltas) by_id[delta.pair_id] = &delta;
        for (const auto& id : result.improved_pairs) {
            const PairDelta* delta = by_id.at(id);
            out += "- " + id + " (" + std::to_string(delta->score_a) + " → " +
                   std::to_string(delta->score_b) + ")\n";
        }
    }
    return out;
}

}  // namespace

TemporalResult run_temporal(const TemporalSpec& spec, const RuntimeDeps& deps) {
    spec.validate();
    if (deps.prompts == nullptr || deps.backend == nullptr || !deps.loader || !deps.store) {
        fail(ErrorKind::config, "temporal runtime is incomplete");
    }

    Dataset full = load_dataset(spec.dataset_path);
    if (full.empty()) fail(ErrorKind::data, "dataset " + spec.dataset_path + " is empty");

    TemporalResult result;
    std::vector<PostClaimPair> in_window;
    for (const auto& pair : full.pairs()) {
        if (!pair.post_date) {
            result.warnings.push_back("pair " + pair.id + " has no post_date; excluded");
            continue;
        }
        if (*pair.post_date < spec.start || spec.end < *pair.post_date) {
            result.warnings.push_back("pair " + pair.id + " (" + pair.post_date->to_string() +
                                      ") is outside the window; excluded");
            continue;
        }
        in_window.push_back(pair);
    }
    if (in_window.empty()) {
        fail(ErrorKind::data, "no pair falls inside the window " + spec.start.to_string() + " .. " +
                                  spec.end.to_string());
    }
    Dataset dataset(std::move(in_window));
    PairIndex pair_index(dataset);

    const bool needs_index = spec.method == ExtractionMethod::image_text_icl ||
                             spec.method == ExtractionMethod::mice;
    std::optional<Bm25Index> index;
    // Demonstrations come from the full file's train split, not the window.
    if (needs_index) index = build_train_index(full);
    PairIndex full_index(full);

    const fs::path out_dir(spec.output_dir);
    fs::create_directories(out_dir);

    auto run_side = [&](const std::string& model) {
        const fs::path cell_dir = out_dir / sanitize_path_component(model) / to_string(spec.method);
        CellArtifacts artifacts =
            run_cell(dataset, full_index, spec.method, model, spec.judge_model, spec.shots,
                     spec.image_budget, spec.workers, index ? &*index : nullptr, deps, cell_dir,
                     spec.force);
        if (artifacts.evaluations.empty()) {
            fail(ErrorKind::data, "model " + model + " produced no successful evaluations");
        }
        for (const auto& failure : artifacts.failures) {
            result.pair_failures.push_back(BatchFailure{
                failure.pair_id, sanitize_path_component(model) + ": " + failure.message});
        }
        return artifacts.evaluations;
    };

    std::vector<ClaimEvaluation> evals_a = run_side(spec.model_a);
    std::vector<ClaimEvaluation> evals_b = run_side(spec.model_b);
    result.report_a = aggregate(evals_a, spec.method, spec.model_a);
    result.report_b = aggregate(evals_b, spec.method, spec.model_b);

    std::unordered_map<std::string, int> scores_b;
    for (const auto& evaluation : evals_b) scores_b[evaluation.pair_id] = evaluation.reference.score;
    for (const auto& evaluation : evals_a) {
        auto it = scores_b.find(evaluation.pair_id);
        if (it == scores_b.end()) continue;
        PairDelta delta;
        delta.pair_id = evaluation.pair_id;
        delta.score_a = evaluation.reference.score;
        delta.score_b = it->second;
        delta.delta = delta.score_b - delta.score_a;
        if (delta.delta > 0) result.improved_pairs.push_back(delta.pair_id);
        result.deltas.push_back(std::move(delta));
    }

    write_file_atomic((out_dir / "report.md").string(), render_temporal_markdown(spec, result));
    write_file_atomic((out_dir / "report.csv").string(),
                      render_report_csv({result.report_a, result.report_b}));
    std::string deltas_csv = "pair_id,score_" + sanitize_path_component(spec.model_a) + ",score_" +
                             sanitize_path_component(spec.model_b) + ",delta\n";
    for (const auto& delta : result.deltas) {
        deltas_csv += delta.pair_id + ',' + std::to_string(delta.score_a) + ',' +
                      std::to_string(delta.score_b) + ',' + std::to_string(delta.delta) + '\n';
    }
    write_file_atomic((out_dir / "deltas.csv").string(), deltas_csv);

    ordered_json manifest;
    manifest["kind"] = "temporal";
    manifest["dataset"] = spec.dataset_path;
    manifest["mode"] = to_string(spec.mode);
    manifest["method"] = to_string(spec.method);
    manifest["model_a"] = spec.model_a;
    manifest["model_b"] = spec.model_b;
    manifest["window"] = ordered_json{{"start", spec.start.to_string()}, {"end", spec.end.to_string()}};
    manifest["judge_model"] = spec.judge_model;
    manifest["shots"] = spec.shots;
    manifest["image_budget"] = spec.image_budget;
    manifest["prompt_checksums"] = prompt_checksum_json(*deps.prompts);
    manifest["fixture_digest"] = deps.store->digest();
    manifest["warnings"] = result.warnings;
    write_file_atomic((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    return result;
}

RuntimeDeps Runtime::deps() const {
    RuntimeDeps deps;
    deps.prompts = &prompts;
    deps.backend = backend.get();
    deps.vision = vision.get();
    deps.loader = loader;
    deps.store = store;
    return deps;
}

Runtime make_runtime(const Config& config) {
    config.validate();
    Runtime runtime;
    runtime.prompts = PromptLibrary::load(config.prompts_dir);
    runtime.store = std::make_shared<FixtureStore>(config.fixture_dir);

    if (config.mode == BackendMode::replay) {
        runtime.backend = std::make_shared<ReplayChatBackend>(runtime.store);
        runtime.vision = std::make_shared<ReplayVisionClient>(runtime.store);
        runtime.loader = file_image_loader();
        return runtime;
    }

    std::shared_ptr<ChatBackend> live =
        LiveChatBackend::from_env(config.provider_base_url, config.api_key_env);
    runtime.backend = std::make_shared<CachingChatBackend>(runtime.store, std::move(live));
    if (config.vision_base_url.empty()) {
        // No vision endpoint configured: recorded analyses still serve MICE.
        runtime.vision = std::make_shared<ReplayVisionClient>(runtime.store);
    } else {
        std::shared_ptr<VisionClient> live_vision =
            LiveVisionClient::from_env(config.vision_base_url, config.vision_key_env);
        runtime.vision =
            std::make_shared<CachingVisionClient>(runtime.store, std::move(live_vision));
    }
    runtime.loader = fetching_image_loader([](const std::string& url) { return fetch_url(url); });
    return runtime;
}

}  // namespace claimex

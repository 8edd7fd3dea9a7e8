#pragma once

#include <memory>
#include <string>
#include <vector>

#include "claimex/config.hpp"
#include "claimex/dataset.hpp"
#include "claimex/extraction.hpp"
#include "claimex/gateway.hpp"
#include "claimex/judge.hpp"
#include "claimex/metrics.hpp"
#include "claimex/prompts.hpp"
#include "claimex/vision.hpp"

namespace claimex {

// Shared handles for a run: prompt library, model backend, vision client,
// image loader, and the fixture store backing replay/recording.
struct RuntimeDeps {
    const PromptLibrary* prompts = nullptr;
    ChatBackend* backend = nullptr;
    VisionClient* vision = nullptr;
    ImageLoader loader;
    std::shared_ptr<FixtureStore> store;
};

// The method × model benchmark grid.
struct BenchmarkSpec {
    std::string dataset_path;
    std::vector<ExtractionMethod> methods;
    std::vector<std::string> models;
    std::string judge_model;
    std::size_t shots = 5;
    int image_budget = 30;
    std::string output_dir;
    BackendMode mode = BackendMode::replay;
    std::size_t workers = 1;
    bool force = false;  // re-run cells whose artifacts already exist

    void validate() const;
};

struct CellFailure {
    std::string model_id;
    ExtractionMethod method = ExtractionMethod::text_only;
    std::string message;
};

struct BenchmarkResult {
    std::vector<AggregateReport> reports;       // model-major, method-minor order
    std::vector<CellFailure> failed_cells;      // cells with nothing to aggregate
    std::vector<BatchFailure> pair_failures;    // per-pair extraction/judging failures
};

// Run every (model, method) cell sequentially, persisting per-cell JSONL
// artifacts plus report.md, report.csv, and manifest.json under output_dir.
// Completed cells are reused unless spec.force. Per-cell trouble marks the
// cell failed instead of aborting the run.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec, const RuntimeDeps& deps);

// The same post set, one method, two models, over a date window.
struct TemporalSpec {
    std::string dataset_path;
    std::string model_a;
    std::string model_b;
    Date start;
    Date end;  // inclusive; must not precede start
    ExtractionMethod method = ExtractionMethod::image_text_icl;
    std::string judge_model;
    std::size_t shots = 5;
    int image_budget = 30;
    std::string output_dir;
    BackendMode mode = BackendMode::replay;
    std::size_t workers = 1;
    bool force = false;

    void validate() const;
};

struct PairDelta {
    std::string pair_id;
    int score_a = 0;
    int score_b = 0;
    int delta = 0;  // score_b − score_a
};

struct TemporalResult {
    AggregateReport report_a;
    AggregateReport report_b;
    std::vector<PairDelta> deltas;              // pairs evaluated under both models
    std::vector<std::string> improved_pairs;    // ids where model_b beat model_a
    std::vector<std::string> warnings;          // undated/out-of-window exclusions
    std::vector<BatchFailure> pair_failures;
};

TemporalResult run_temporal(const TemporalSpec& spec, const RuntimeDeps& deps);

// Wire up backends for a config: replay mode serves fixtures only; live mode
// calls providers through the cache so every response is recorded.
struct Runtime {
    PromptLibrary prompts;
    std::shared_ptr<FixtureStore> store;
    std::shared_ptr<ChatBackend> backend;
    std::shared_ptr<VisionClient> vision;
    ImageLoader loader;

    RuntimeDeps deps() const;
};

Runtime make_runtime(const Config& config);

}  // namespace claimex

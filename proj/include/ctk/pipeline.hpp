#pragma once

#include <map>
#include <string>

#include "ctk/augment.hpp"
#include "ctk/corpus.hpp"
#include "ctk/model.hpp"
#include "ctk/train.hpp"

namespace ctk {

enum class ProviderKind { mock, identity, http };

struct PipelineConfig {
    // [paths]
    std::string dataset_path;
    std::string vocab_path;
    std::string checkpoint_path;
    std::string qrels_path;
    std::string cache_path;
    std::string mock_table_path;
    std::string output_dir = ".";

    EncoderConfig encoder;   // [encoder]
    TrainConfig train;       // [train]
    SplitSpec split;         // [split]

    // [augment]
    AugmentStrategy strategy;
    ProviderKind provider = ProviderKind::mock;
    std::string endpoint_url;
    std::string credential_env;
    bool allow_leakage = false;
    bool augment_enabled = true;
    std::string augment_target = "train";

    // [run]
    std::string run_id = "ctk-run";

    void validate() const;
};

// Flat `key = value` text with [section] headers.
PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineResult {
    std::string checkpoint_file;
    std::string history_file;
    std::string scored_file;
    std::string run_file;
    std::string report_file;
    double map = 0.0;
};

// Full chain: load -> split -> augment(train) -> fine-tune -> predict on the
// held-out split -> rank -> evaluate. Every artifact lands in output_dir and
// is a pure function of (inputs, seed).
PipelineResult run_pipeline(const PipelineConfig& config, bool quiet);

std::shared_ptr<TranslationProvider> make_provider(const PipelineConfig& config);

}  // namespace ctk

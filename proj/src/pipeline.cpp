#include "ctk/pipeline.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ctk/errors.hpp"
#include "ctk/metrics.hpp"
#include "ctk/synth.hpp"

namespace ctk {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

// fractions = train:0.7,val:0.2,holdout:0.1
std::vector<std::pair<std::string, double>> parse_fractions(const std::string& v) {
    std::vector<std::pair<std::string, double>> out;
    std::istringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        std::size_t colon = part.find(':');
        if (colon == std::string::npos)
            throw ConfigError("split fractions entry '" + part +
                              "' must look like name:fraction");
        out.emplace_back(trim(part.substr(0, colon)),
                         std::stod(part.substr(colon + 1)));
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (run_id.empty()) throw ConfigError("run_id must be non-empty");
    for (char c : run_id)
        if (std::isspace(static_cast<unsigned char>(c)))
            throw ConfigError("run_id must not contain whitespace");
    if (dataset_path.empty()) throw ConfigError("[paths] dataset is required");
    if (vocab_path.empty()) throw ConfigError("[paths] vocab is required");
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string section, line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        std::string full = section + "." + key;

        try {
            if (full == "paths.dataset") cfg.dataset_path = value;
            else if (full == "paths.vocab") cfg.vocab_path = value;
            else if (full == "paths.checkpoint") cfg.checkpoint_path = value;
            else if (full == "paths.qrels") cfg.qrels_path = value;
            else if (full == "paths.cache") cfg.cache_path = value;
            else if (full == "paths.mock_table") cfg.mock_table_path = value;
            else if (full == "paths.output_dir") cfg.output_dir = value;
            else if (full == "encoder.num_layers") cfg.encoder.num_layers = std::stoul(value);
            else if (full == "encoder.hidden_dim") cfg.encoder.hidden_dim = std::stoul(value);
            else if (full == "encoder.num_heads") cfg.encoder.num_heads = std::stoul(value);
            else if (full == "encoder.ff_dim") cfg.encoder.ff_dim = std::stoul(value);
            else if (full == "encoder.max_seq_len") cfg.encoder.max_seq_len = std::stoul(value);
            else if (full == "encoder.dropout_p") cfg.encoder.dropout_p = std::stod(value);
            else if (full == "encoder.head_dropout_p") cfg.encoder.head_dropout_p = std::stod(value);
            else if (full == "encoder.head_variant") {
                if (value == "standard_pooled")
                    cfg.encoder.head_variant = HeadVariant::standard_pooled;
                else if (value == "mean_last_two")
                    cfg.encoder.head_variant = HeadVariant::mean_last_two;
                else
                    throw ConfigError("unknown head_variant: " + value);
            }
            else if (full == "train.epochs") cfg.train.epochs = std::stoul(value);
            else if (full == "train.batch_size") cfg.train.batch_size = std::stoul(value);
            else if (full == "train.learning_rate") cfg.train.learning_rate = std::stod(value);
            else if (full == "train.seed") cfg.train.seed = std::stoull(value);
            else if (full == "split.fractions") cfg.split.fractions = parse_fractions(value);
            else if (full == "split.seed") cfg.split.seed = std::stoull(value);
            else if (full == "split.stratified") cfg.split.stratified = parse_bool(value, full);
            else if (full == "augment.enabled") cfg.augment_enabled = parse_bool(value, full);
            else if (full == "augment.strategy") {
                if (value == "back_translate")
                    cfg.strategy.kind = AugmentStrategyKind::BackTranslate;
                else if (value == "pivot_only")
                    cfg.strategy.kind = AugmentStrategyKind::PivotOnly;
                else if (value == "both")
                    cfg.strategy.kind = AugmentStrategyKind::Both;
                else
                    throw ConfigError("unknown augment strategy: " + value);
            }
            else if (full == "augment.source_lang") cfg.strategy.source_lang = value;
            else if (full == "augment.pivot_lang") cfg.strategy.pivot_lang = value;
            else if (full == "augment.retry_limit") cfg.strategy.retry_limit = std::stoul(value);
            else if (full == "augment.provider") {
                if (value == "mock") cfg.provider = ProviderKind::mock;
                else if (value == "identity") cfg.provider = ProviderKind::identity;
                else if (value == "http") cfg.provider = ProviderKind::http;
                else throw ConfigError("unknown provider: " + value);
            }
            else if (full == "augment.endpoint") cfg.endpoint_url = value;
            else if (full == "augment.credential_env") cfg.credential_env = value;
            else if (full == "augment.allow_leakage") cfg.allow_leakage = parse_bool(value, full);
            else if (full == "augment.target_split") cfg.augment_target = value;
            else if (full == "run.run_id") cfg.run_id = value;
            else
                throw ConfigError("unknown config key '" + key + "' in section [" +
                                  section + "]");
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": cannot parse value '" + value + "' for " + full);
        }
    }
    return cfg;
}

std::shared_ptr<TranslationProvider> make_provider(const PipelineConfig& cfg) {
    std::shared_ptr<TranslationProvider> base;
    switch (cfg.provider) {
        case ProviderKind::identity:
            base = std::make_shared<IdentityProvider>();
            break;
        case ProviderKind::mock:
            if (cfg.mock_table_path.empty())
                throw ConfigError("[paths] mock_table is required for the mock provider");
            base = std::make_shared<DictionaryMockProvider>(
                cfg.mock_table_path, cfg.strategy.source_lang, cfg.strategy.pivot_lang);
            break;
        case ProviderKind::http:
            if (cfg.endpoint_url.empty())
                throw ConfigError("[augment] endpoint is required for the http provider");
            base = std::make_shared<HttpProvider>(
                cfg.endpoint_url, cfg.credential_env,
                std::vector<std::pair<std::string, std::string>>{},
                cfg.strategy.retry_limit);
            break;
    }
    if (!cfg.cache_path.empty())
        return std::make_shared<CachingProvider>(base, cfg.cache_path);
    return base;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, bool quiet) {
    cfg.validate();
    if (cfg.split.fractions.empty())
        throw ConfigError("pipeline requires [split] fractions");
    std::filesystem::create_directories(cfg.output_dir);

    Dataset dataset = load_dataset(cfg.dataset_path);
    Vocabulary vocab = load_vocab(cfg.vocab_path, VocabScheme::wordpiece);

    EncoderConfig encoder = cfg.encoder;
    encoder.vocab_size = vocab.size();
    encoder.validate();

    auto splits = split(dataset, cfg.split);
    auto find_split = [&](const std::string& name) -> Dataset& {
        for (auto& [n, d] : splits)
            if (n == name) return d;
        throw ConfigError("pipeline split '" + name + "' not found in [split] fractions");
    };
    Dataset& train_set = find_split(cfg.augment_target);
    const std::string val_name = splits.size() > 1 ? splits[1].first : splits[0].first;
    const std::string eval_name = splits.back().first;

    AugmentReport augment_report;
    if (cfg.augment_enabled) {
        auto provider = make_provider(cfg);
        auto [augmented, report] = upsample_positive(train_set, cfg.strategy, *provider);
        augment_report = report;
        train_set = std::move(augmented);
        guard_splits(splits, cfg.augment_target, cfg.allow_leakage);
    }

    EncoderWeights weights = init_weights(encoder, cfg.train.seed);
    TrainHistory history = fine_tune(weights, encoder, find_split(cfg.augment_target),
                                     find_split(val_name), vocab, cfg.train);

    const Dataset& eval_set = find_split(eval_name);
    std::vector<ScoredTweet> scored = predict(eval_set, weights, encoder, vocab);
    RankedRun run = rank_topics(scored, cfg.run_id);

    RelevanceJudgments qrels = cfg.qrels_path.empty() ? qrels_from_labels(eval_set)
                                                      : load_qrels(cfg.qrels_path);
    MetricReport report = evaluate_run(run, qrels);

    PipelineResult result;
    result.checkpoint_file = cfg.checkpoint_path.empty()
                                 ? cfg.output_dir + "/model.ckpt"
                                 : cfg.checkpoint_path;
    result.history_file = cfg.output_dir + "/history.tsv";
    result.scored_file = cfg.output_dir + "/scored.tsv";
    result.run_file = cfg.output_dir + "/run.tsv";
    result.report_file = cfg.output_dir + "/report.tsv";
    result.map = report.aggregate.average_precision;

    save_checkpoint(result.checkpoint_file, encoder, weights);
    save_history(history, result.history_file);
    save_scored(scored, result.scored_file);
    save_run(run, result.run_file);
    {
        std::ofstream out(result.report_file, std::ios::binary);
        if (!out) throw ValidationError("cannot write report: " + result.report_file);
        out << render_report(report);
    }
    if (!quiet) {
        std::cout << "train size: " << find_split(cfg.augment_target).tweets.size()
                  << " (augmented +" << augment_report.tweets_added << ")\n"
                  << "mAP on " << eval_name << ": "
                  << format_fixed(result.map, 4) << '\n'
                  << "artifacts in " << cfg.output_dir << '\n';
    }
    return result;
}

}  // namespace ctk

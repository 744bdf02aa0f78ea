// ctk: check-worthiness ranking toolkit command-line interface.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "ctk/augment.hpp"
#include "ctk/corpus.hpp"
#include "ctk/errors.hpp"
#include "ctk/metrics.hpp"
#include "ctk/pipeline.hpp"
#include "ctk/rank.hpp"
#include "ctk/synth.hpp"
#include "ctk/tokenizer.hpp"
#include "ctk/train.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"check-worthiness ranking toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may appear after the subcommand

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false, quiet = false;
    app.add_option("--config", config_path, "pipeline config file")->envname("CTK_CONFIG");
    app.add_option("--seed", seed_override, "override every configured seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto load_config = [&]() {
        if (config_path.empty()) throw ctk::ConfigError("--config is required");
        ctk::PipelineConfig cfg = ctk::load_pipeline_config(config_path);
        if (seed_set) {
            cfg.train.seed = seed_override;
            cfg.split.seed = seed_override;
        }
        return cfg;
    };

    // stats
    std::string stats_dataset;
    auto* cmd_stats = app.add_subcommand("stats", "class balance and length statistics");
    cmd_stats->add_option("dataset", stats_dataset, "dataset TSV")->required();

    // analyze-vocab
    std::string av_dataset, av_vocab, av_scheme = "wordpiece";
    ctk::OverlapNormalizer av_norm;
    auto* cmd_av = app.add_subcommand("analyze-vocab",
                                      "vocabulary overlap between corpus and model");
    cmd_av->add_option("dataset", av_dataset)->required();
    cmd_av->add_option("vocab", av_vocab)->required();
    cmd_av->add_option("--scheme", av_scheme, "wordpiece or bpe");
    cmd_av->add_flag("--lowercase", av_norm.lowercase);
    cmd_av->add_flag("--strip-diacritics", av_norm.strip_diacritics);
    cmd_av->add_flag("!--no-strip-urls", av_norm.strip_urls);
    cmd_av->add_flag("!--no-strip-mentions", av_norm.strip_mentions);
    cmd_av->add_flag("!--no-split-punctuation", av_norm.split_punctuation);

    // augment
    std::string aug_in, aug_out;
    auto* cmd_augment = app.add_subcommand("augment", "upsample the positive class");
    cmd_augment->add_option("--in", aug_in, "dataset (defaults to [paths] dataset)");
    cmd_augment->add_option("--out", aug_out, "augmented dataset path")->required();

    // train
    auto* cmd_train = app.add_subcommand("train", "fine-tune on the configured splits");

    // predict
    std::string pred_dataset, pred_out, pred_checkpoint;
    auto* cmd_predict = app.add_subcommand("predict", "score a dataset with a checkpoint");
    cmd_predict->add_option("--dataset", pred_dataset)->required();
    cmd_predict->add_option("--checkpoint", pred_checkpoint,
                            "defaults to [paths] checkpoint");
    cmd_predict->add_option("--out", pred_out, "scored TSV")->required();

    // rank
    std::string rank_in, rank_out, rank_run_id = "ctk-run";
    auto* cmd_rank = app.add_subcommand("rank", "sort scored tweets per topic");
    cmd_rank->add_option("--in", rank_in, "scored TSV")->required();
    cmd_rank->add_option("--out", rank_out, "run file")->required();
    cmd_rank->add_option("--run-id", rank_run_id);

    // evaluate
    std::string eval_run, eval_qrels, eval_out;
    ctk::MetricOptions eval_opt;
    auto* cmd_eval = app.add_subcommand("evaluate", "score a run against qrels");
    cmd_eval->add_option("--run", eval_run)->required();
    cmd_eval->add_option("--qrels", eval_qrels)->required();
    cmd_eval->add_option("--out", eval_out, "write report here as well as stdout");
    cmd_eval->add_option("--cutoff", eval_opt.ap_cutoff, "truncate rankings for AP");
    cmd_eval->add_flag("--ap-normalize-by-cutoff", eval_opt.ap_normalize_by_cutoff);

    // pipeline
    auto* cmd_pipeline =
        app.add_subcommand("pipeline", "full chain: augment, train, predict, rank, evaluate");

    // synth
    std::string synth_dir;
    ctk::SynthSpec synth_spec;
    auto* cmd_synth = app.add_subcommand("synth", "generate the offline synthetic corpus");
    cmd_synth->add_option("--out-dir", synth_dir)->required();
    cmd_synth->add_option("--topics", synth_spec.topics);
    cmd_synth->add_option("--per-topic", synth_spec.tweets_per_topic);
    cmd_synth->add_option("--positive-frac", synth_spec.positive_fraction);
    cmd_synth->add_option("--seed", synth_spec.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors share the validation exit code
    }

    if (cmd_stats->parsed()) {
        ctk::Dataset ds = ctk::load_dataset(stats_dataset);
        std::size_t total_words = 0, max_words = 0;
        for (const auto& t : ds.tweets) {
            std::size_t w = ctk::whitespace_split(t.text).size();
            total_words += w;
            max_words = std::max(max_words, w);
        }
        std::cout << "tweets: " << ds.tweets.size() << '\n';
        if (!ds.tweets.empty())
            std::cout << "mean words per tweet: "
                      << ctk::format_fixed(static_cast<double>(total_words) /
                                               static_cast<double>(ds.tweets.size()), 2)
                      << " (max " << max_words << ")\n";
        if (ds.fully_labeled() && !ds.tweets.empty())
            std::cout << ctk::format_balance(ctk::class_balance(ds)) << '\n';
        else
            std::cout << "unlabeled dataset; class balance omitted\n";
        return 0;
    }

    if (cmd_av->parsed()) {
        ctk::Dataset ds = ctk::load_dataset(av_dataset);
        ctk::VocabScheme scheme = av_scheme == "bpe" ? ctk::VocabScheme::bpe
                                                     : ctk::VocabScheme::wordpiece;
        ctk::Vocabulary vocab = ctk::load_vocab(av_vocab, scheme);
        ctk::OverlapReport rep = ctk::vocab_overlap(ds, vocab, av_norm);
        std::cout << "corpus unique tokens: " << rep.corpus_unique_tokens << '\n'
                  << "overlapping: " << rep.overlapping << '\n'
                  << "fraction: " << ctk::format_fixed(rep.fraction, 4) << '\n';
        if (!rep.sample_missing.empty()) {
            std::cout << "top missing tokens (by frequency):\n";
            for (const auto& [tok, count] : rep.sample_missing)
                std::cout << "  " << tok << '\t' << count << '\n';
        }
        return 0;
    }

    if (cmd_augment->parsed()) {
        ctk::PipelineConfig cfg = load_config();
        ctk::Dataset ds = ctk::load_dataset(aug_in.empty() ? cfg.dataset_path : aug_in);
        auto provider = ctk::make_provider(cfg);
        auto [augmented, report] = ctk::upsample_positive(ds, cfg.strategy, *provider);
        ctk::save_dataset(augmented, aug_out);
        std::cout << "translated: " << report.originals_translated
                  << " added: " << report.tweets_added
                  << " skipped: " << report.skipped
                  << " provider calls: " << report.provider_calls
                  << " cache hits: " << report.cache_hits << '\n'
                  << "before: " << ctk::format_balance(report.before) << '\n'
                  << "after:  " << ctk::format_balance(report.after) << '\n';
        return 0;
    }

    if (cmd_train->parsed() || cmd_pipeline->parsed()) {
        ctk::PipelineConfig cfg = load_config();
        if (cmd_train->parsed()) cfg.augment_enabled = false;
        std::filesystem::create_directories(cfg.output_dir);
        ctk::run_pipeline(cfg, quiet);
        return 0;
    }

    if (cmd_predict->parsed()) {
        ctk::PipelineConfig cfg = load_config();
        std::string ckpt = pred_checkpoint.empty() ? cfg.checkpoint_path : pred_checkpoint;
        if (ckpt.empty()) throw ctk::ConfigError("no checkpoint path configured");
        auto [encoder, weights] = ctk::load_checkpoint(ckpt);
        ctk::Vocabulary vocab = ctk::load_vocab(cfg.vocab_path, ctk::VocabScheme::wordpiece);
        if (vocab.size() != encoder.vocab_size)
            throw ctk::ConfigError("vocabulary does not match checkpoint vocab_size");
        ctk::Dataset ds = ctk::load_dataset(pred_dataset);
        ctk::save_scored(ctk::predict(ds, weights, encoder, vocab), pred_out);
        return 0;
    }

    if (cmd_rank->parsed()) {
        std::vector<ctk::ScoredTweet> scored = ctk::load_scored(rank_in);
        ctk::save_run(ctk::rank_topics(scored, rank_run_id), rank_out);
        return 0;
    }

    if (cmd_eval->parsed()) {
        ctk::RankedRun run = ctk::load_run(eval_run);
        ctk::RelevanceJudgments qrels = ctk::load_qrels(eval_qrels);
        ctk::MetricReport report = ctk::evaluate_run(run, qrels, eval_opt);
        std::string rendered = ctk::render_report(report);
        std::cout << rendered;
        if (!eval_out.empty()) {
            std::ofstream out(eval_out, std::ios::binary);
            out << rendered;
        }
        return 0;
    }

    if (cmd_synth->parsed()) {
        std::filesystem::create_directories(synth_dir);
        ctk::Dataset ds = ctk::generate_synthetic(synth_spec);
        ctk::save_dataset(ds, synth_dir + "/corpus.tsv");
        ctk::write_synth_vocab(synth_dir + "/vocab.txt");
        ctk::write_synth_mock_table(synth_dir + "/mock_table.tsv");
        ctk::save_qrels(ctk::qrels_from_labels(ds), synth_dir + "/qrels.tsv");
        if (!quiet)
            std::cout << "wrote corpus.tsv, vocab.txt, mock_table.tsv, qrels.tsv to "
                      << synth_dir << '\n';
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ctk::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return 3;
    } catch (const ctk::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ctk::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ctk::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ctk::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

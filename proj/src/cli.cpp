#include "clarion/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"

#include "clarion/bm25.hpp"
#include "clarion/config.hpp"
#include "clarion/corpus_io.hpp"
#include "clarion/dataset_builder.hpp"
#include "clarion/dialog.hpp"
#include "clarion/error.hpp"
#include "clarion/metrics.hpp"
#include "clarion/recall.hpp"
#include "clarion/scoring.hpp"

namespace clarion {

namespace {

constexpr const char* kScorerUrlEnv = "CLARION_SCORER_URL";

// A flag that, when given, overrides one config key.
struct Setting {
    CLI::App* app;
    CLI::Option* option;
    std::string key;
    std::string value;
};

class Settings {
public:
    void add(CLI::App* app, const std::string& flag, std::string key, const std::string& help) {
        auto& s = *items_.emplace_back(std::make_unique<Setting>());
        s.key = std::move(key);
        s.app = app;
        s.option = app->add_option(flag, s.value, help);
    }

    void apply(CLI::App* app, Config& cfg) const {
        for (const auto& s : items_) {
            if (s->app == app && s->option->count() > 0) {
                cfg.set(s->key, s->value);
            }
        }
    }

private:
    std::vector<std::unique_ptr<Setting>> items_;
};

struct Resources {
    QuestionBank bank;
    std::vector<TrainRecord> records;
    Bm25Index index;
    std::vector<PoolEntry> pool;
};

void require_path(const std::filesystem::path& p, const char* what) {
    if (p.empty()) {
        throw CLI::RequiredError(std::string("--") + what);
    }
}

Resources load_resources(const Config& cfg, std::ostream& err) {
    require_path(cfg.bank, "bank");
    require_path(cfg.train, "train");
    Resources r;
    r.bank = load_question_bank(cfg.bank);
    r.records = load_train_records(cfg.train);
    if (!cfg.index.empty()) {
        r.index = Bm25Index::load(cfg.index);
        if (r.index.doc_count() != r.bank.size()) {
            throw DataError(ErrorCode::BadIndexFile, "index does not match the question bank");
        }
        for (const auto& id : r.index.ids()) {
            if (!r.bank.contains(id)) {
                throw DataError(ErrorCode::BadIndexFile, "index has unknown question " + id);
            }
        }
    } else {
        r.index = build_enhanced_index(r.bank, r.records, cfg.bm25);
    }
    r.pool = shortest_unseen_pool(r.bank, r.records);
    fmt::print(err, "loaded {} questions, {} records, pool of {}\n", r.bank.size(),
               r.records.size(), r.pool.size());
    return r;
}

std::string scorer_url_override() {
    const char* v = std::getenv(kScorerUrlEnv);
    return v == nullptr ? std::string() : std::string(v);
}

std::vector<std::unique_ptr<Scorer>> make_scorers(const Config& cfg) {
    std::vector<std::unique_ptr<Scorer>> out;
    for (const auto& h : cfg.scorer_handles(scorer_url_override())) {
        out.push_back(make_scorer(h));
    }
    return out;
}

std::unique_ptr<Classifier> make_classifier(const Config& cfg) {
    if (cfg.classifier == "heuristic") {
        return nullptr;
    }
    return std::make_unique<RemoteClassifier>(cfg.classifier.substr(7), cfg.remote_timeout);
}

std::vector<const Scorer*> raw(const std::vector<std::unique_ptr<Scorer>>& scorers) {
    std::vector<const Scorer*> out;
    for (const auto& s : scorers) {
        out.push_back(s.get());
    }
    return out;
}

template <typename Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(out);
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw DataError(ErrorCode::MissingFile, "cannot write " + path);
    }
    fn(file);
}

}  // namespace

int run_command(std::span<const std::string> args, std::istream& in, std::ostream& out,
                std::ostream& err) {
    CLI::App app{"Clarifying-question selection pipeline", "clarion"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    Settings settings;
    std::string config_path;
    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value config file");
    };

    // build-index
    auto* build_index = app.add_subcommand("build-index", "Build the enhanced BM25 index");
    with_config(build_index);
    settings.add(build_index, "--bank", "bank", "question bank TSV");
    settings.add(build_index, "--train", "train", "training records TSV");
    settings.add(build_index, "--k1", "bm25.k1", "BM25 k1");
    settings.add(build_index, "--b", "bm25.b", "BM25 b");
    std::string index_out;
    std::string dump_out;
    build_index->add_option("--out", index_out, "index file to write")->required();
    build_index->add_option("--dump", dump_out, "also write a term/qid/tf TSV dump");

    // recall
    auto* recall = app.add_subcommand("recall", "Recall candidate questions for a request");
    with_config(recall);
    settings.add(recall, "--bank", "bank", "question bank TSV");
    settings.add(recall, "--train", "train", "training records TSV");
    settings.add(recall, "--index", "index", "prebuilt index file");
    settings.add(recall, "--n-bm25", "recall.n_bm25", "BM25 candidates");
    settings.add(recall, "--n-short", "recall.n_short", "short-pool candidates");
    std::string request;
    std::vector<std::string> exclude;
    recall->add_option("--request", request, "request text")->required();
    recall->add_option("--exclude", exclude, "question ids to leave out");

    // build-dataset
    auto* build_dataset = app.add_subcommand("build-dataset", "Build the point-wise ranking dataset");
    with_config(build_dataset);
    settings.add(build_dataset, "--bank", "bank", "question bank TSV");
    settings.add(build_dataset, "--train", "train", "records of the split to build");
    settings.add(build_dataset, "--index", "index", "prebuilt index file used for BM25 negatives");
    settings.add(build_dataset, "--scores", "scores", "facet score TSV");
    settings.add(build_dataset, "--seed", "dataset.seed", "sampling seed");
    settings.add(build_dataset, "--n-bm25", "dataset.n_bm25", "BM25 negatives per request");
    settings.add(build_dataset, "--n-random", "dataset.n_random", "random negatives per request");
    std::string dataset_out;
    build_dataset->add_option("--out", dataset_out, "output TSV (default stdout)");

    // build-understanding
    auto* build_und = app.add_subcommand("build-understanding", "Build the understanding dataset");
    with_config(build_und);
    settings.add(build_und, "--train", "train", "training records TSV");
    settings.add(build_und, "--scores", "scores", "facet score TSV with P5 rows");
    std::string und_out;
    build_und->add_option("--out", und_out, "output TSV (default stdout)");

    // rank
    auto* rank = app.add_subcommand("rank", "Recall and rank clarifying questions for a context");
    with_config(rank);
    settings.add(rank, "--bank", "bank", "question bank TSV");
    settings.add(rank, "--train", "train", "training records TSV");
    settings.add(rank, "--index", "index", "prebuilt index file");
    settings.add(rank, "--scorers", "scorers", "comma list of scorers");
    settings.add(rank, "--k", "top_k", "rows to print");
    std::string context;
    rank->add_option("--context", context, "request plus conversation context")->required();

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a run file against qrels");
    with_config(evaluate_cmd);
    settings.add(evaluate_cmd, "--qrels", "qrels", "judgment file");
    std::string run_path;
    std::vector<std::string> metric_flags;
    evaluate_cmd->add_option("--run", run_path, "run file")->required();
    evaluate_cmd->add_option("--metric", metric_flags, "metric such as mrr@100 (repeatable)");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Run multi-turn conversations");
    with_config(simulate_cmd);
    settings.add(simulate_cmd, "--bank", "bank", "question bank TSV");
    settings.add(simulate_cmd, "--train", "train", "training records TSV");
    settings.add(simulate_cmd, "--index", "index", "prebuilt index file");
    settings.add(simulate_cmd, "--scorers", "scorers", "comma list of scorers");
    settings.add(simulate_cmd, "--classifier", "classifier", "heuristic or remote:<url>");
    settings.add(simulate_cmd, "--turn-limit", "turn_limit", "maximum questions per conversation");
    std::string requests_path;
    std::string answers_path;
    bool interactive = false;
    simulate_cmd->add_option("--requests", requests_path, "one request per line");
    simulate_cmd->add_option("--answers", answers_path, "request/question_id/answer TSV");
    simulate_cmd->add_flag("--interactive", interactive, "prompt for answers on stdin");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        Config cfg = config_path.empty() ? Config{} : load_config(config_path);
        settings.apply(sub, cfg);
        if (sub == evaluate_cmd && !metric_flags.empty()) {
            cfg.metrics = metric_flags;
        }
        cfg.validate();

        if (sub == build_index) {
            require_path(cfg.bank, "bank");
            const auto bank = load_question_bank(cfg.bank);
            const auto records =
                cfg.train.empty() ? std::vector<TrainRecord>{} : load_train_records(cfg.train);
            const auto index = build_enhanced_index(bank, records, cfg.bm25);
            index.save(index_out);
            if (!dump_out.empty()) {
                with_output(dump_out, out, [&](std::ostream& o) { index.dump_tsv(o); });
            }
            fmt::print(err, "indexed {} questions, avgdl {:.3f}\n", index.doc_count(),
                       index.avgdl());
        } else if (sub == recall) {
            const auto res = load_resources(cfg, err);
            const std::set<std::string> excluded(exclude.begin(), exclude.end());
            const auto cands = recall_candidates(res.index, res.pool, request, cfg.recall, excluded);
            for (std::size_t i = 0; i < cands.size(); ++i) {
                fmt::print(out, "{}\t{}\t{}\t{}\n", i + 1, cands[i].question_id,
                           to_string(cands[i].source), cands[i].recall_score);
            }
        } else if (sub == build_dataset) {
            require_path(cfg.scores, "scores");
            const auto res = load_resources(cfg, err);
            const auto scores = load_facet_scores(cfg.scores);
            const auto ds = build_ranking_dataset(
                res.records, res.bank, res.index, scores,
                RankingDatasetOptions{cfg.dataset_seed, cfg.dataset_n_bm25, cfg.dataset_n_random});
            if (ds.positives_without_scores > 0) {
                fmt::print(err, "warning: {} positives have no MRR100/NDCG3 entry; targets set to 0\n",
                           ds.positives_without_scores);
            }
            with_output(dataset_out, out, [&](std::ostream& o) { write_ranking_dataset(ds, o); });
            fmt::print(err, "{} examples: {} positive, {} negative\n", ds.examples.size(),
                       ds.positives(), ds.negatives());
        } else if (sub == build_und) {
            require_path(cfg.train, "train");
            require_path(cfg.scores, "scores");
            const auto ds = build_understanding_dataset(load_train_records(cfg.train),
                                                        load_facet_scores(cfg.scores));
            with_output(und_out, out, [&](std::ostream& o) { write_understanding_dataset(ds, o); });
            fmt::print(err, "{} need_clarify, {} no_need_clarify, {} skipped without P5\n",
                       ds.count(ClarifyLabel::need_clarify),
                       ds.count(ClarifyLabel::no_need_clarify), ds.skipped);
        } else if (sub == rank) {
            const auto res = load_resources(cfg, err);
            const auto scorers = make_scorers(cfg);
            const auto cands = recall_candidates(res.index, res.pool, context, cfg.recall);
            if (cands.empty()) {
                fmt::print(err, "no candidates\n");
                return kExitOk;
            }
            const auto ranked =
                top_k(ensemble_rank(raw(scorers), context, cands, res.bank), cfg.top_k);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                fmt::print(out, "{}\t{}\t{}\t{}\n", i + 1, ranked[i].question_id,
                           ranked[i].score, res.bank.at(ranked[i].question_id));
            }
        } else if (sub == evaluate_cmd) {
            require_path(cfg.qrels, "qrels");
            std::vector<MetricSpec> specs;
            for (const auto& m : cfg.metrics) {
                specs.push_back(parse_metric_spec(m));
            }
            evaluate_run(run_path, cfg.qrels, specs).write_tsv(out);
        } else if (sub == simulate_cmd) {
            const auto res = load_resources(cfg, err);
            const auto scorers = make_scorers(cfg);
            const auto classifier = make_classifier(cfg);
            PipelineDeps deps;
            deps.index = &res.index;
            deps.pool = res.pool;
            deps.bank = &res.bank;
            deps.scorers = raw(scorers);
            deps.classifier = classifier.get();
            deps.fallback_to_heuristic = cfg.classifier_fallback;
            deps.recall = cfg.recall;

            if (interactive) {
                std::string line;
                err << "request> " << std::flush;
                if (!std::getline(in, line)) {
                    return kExitOk;
                }
                ConversationState state(line, cfg.turn_limit);
                while (true) {
                    const auto outcome = step(state, deps);
                    if (!outcome.asks()) {
                        fmt::print(out, "{}\tstop\t{}\n", state.turns().size(),
                                   to_string(outcome.reason));
                        break;
                    }
                    fmt::print(out, "{}\tquestion\t{}\n", state.turns().size() + 1,
                               outcome.question_text);
                    out << std::flush;
                    err << "answer> " << std::flush;
                    std::string answer;
                    if (!std::getline(in, answer)) {
                        break;
                    }
                    state.record(Turn{outcome.question_id, outcome.question_text, answer});
                }
            } else {
                if (requests_path.empty()) {
                    throw CLI::RequiredError("--requests");
                }
                std::vector<std::string> requests;
                {
                    std::ifstream rf(requests_path);
                    if (!rf) {
                        throw DataError(ErrorCode::MissingFile, requests_path);
                    }
                    std::string line;
                    while (std::getline(rf, line)) {
                        if (!line.empty() && line.back() == '\r') {
                            line.pop_back();
                        }
                        if (!line.empty()) {
                            requests.push_back(line);
                        }
                    }
                }
                const auto oracle =
                    answers_path.empty() ? AnswerOracle{} : AnswerOracle::load(answers_path);
                const auto transcripts = simulate(requests, oracle, deps, cfg.turn_limit);
                write_transcripts(transcripts, out);
            }
        }
    } catch (const CLI::RequiredError& e) {
        err << "error: " << e.what() << " is required\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace clarion

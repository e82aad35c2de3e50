#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clarion/bm25.hpp"
#include "clarion/metrics.hpp"
#include "clarion/recall.hpp"
#include "clarion/scoring.hpp"

namespace clarion {

/**
 * Shared settings for every CLI subcommand.
 *
 * File format is flat `key = value` text; `#` starts a comment line.
 * Recognised keys:
 *   bank, train, qrels, scores, index          paths
 *   bm25.k1, bm25.b                            BM25 parameters
 *   recall.n_bm25, recall.n_short              candidate pool sizes
 *   dataset.seed, dataset.n_bm25, dataset.n_random
 *   scorers         comma list of lexical | precomputed:<path> | remote:<url>
 *   classifier      heuristic | remote:<url>
 *   classifier.fallback   true | false   (heuristic on RemoteUnavailable)
 *   remote.max_in_flight, remote.batch_size, remote.timeout
 *   turn_limit, top_k
 *   metrics         comma list, e.g. mrr@100,recall@30
 */
struct Config {
    std::filesystem::path bank;
    std::filesystem::path train;
    std::filesystem::path qrels;
    std::filesystem::path scores;
    std::filesystem::path index;

    Bm25Params bm25;
    RecallOptions recall;

    std::uint64_t dataset_seed = 0;
    std::size_t dataset_n_bm25 = 200;
    std::size_t dataset_n_random = 300;

    std::vector<std::string> scorers = {"lexical"};
    std::string classifier = "heuristic";
    bool classifier_fallback = false;
    std::size_t remote_max_in_flight = 4;
    std::size_t remote_batch_size = 64;
    double remote_timeout = 30.0;

    std::size_t turn_limit = 3;
    std::size_t top_k = 30;
    std::vector<std::string> metrics = {"mrr@100", "p@1", "p@3", "ndcg@3", "ndcg@5",
                                        "recall@5", "recall@10", "recall@20", "recall@30"};

    /// Applies one `key=value` setting. Throws InvalidConfig.
    void set(std::string_view key, std::string_view value);

    /// Throws InvalidConfig when any invariant is violated.
    void validate() const;

    /// Scorer handles with remote settings applied and `url_override`
    /// (if non-empty) replacing every remote base URL.
    std::vector<ScorerHandle> scorer_handles(std::string_view url_override = {}) const;
};

Config load_config(const std::filesystem::path& path);

}  // namespace clarion

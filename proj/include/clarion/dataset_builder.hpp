#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clarion/bm25.hpp"
#include "clarion/corpus_io.hpp"

namespace clarion {

enum class Provenance { positive, neg_bm25, neg_random };

std::string_view to_string(Provenance provenance);

struct RankingExample {
    std::string topic_id;
    std::string question_id;
    std::string context_text;
    std::string question_text;
    int label = 0;
    double mrr100 = 0.0;
    double ndcg3 = 0.0;
    Provenance provenance = Provenance::neg_random;

    bool operator==(const RankingExample&) const = default;
};

struct RankingDatasetOptions {
    std::uint64_t seed = 0;
    std::size_t n_bm25 = 200;
    std::size_t n_random = 300;
};

struct RankingDataset {
    std::uint64_t seed = 0;
    std::vector<RankingExample> examples;
    /// Positives with no MRR100/NDCG3 entry in the score file (targets set to 0).
    std::size_t positives_without_scores = 0;

    std::size_t positives() const;
    std::size_t negatives() const;
};

/**
 * Point-wise ranking dataset.
 *
 * Positives are the distinct (topic, question) pairs asked in `records`; the
 * context is the topic's initial request and the regression targets come from
 * the first record row of that pair that has scores in `facet_scores`.
 *
 * For every distinct (topic, initial request) the negatives are the top
 * `n_bm25` BM25 hits that were not asked for the topic, followed by up to
 * `n_random` questions drawn uniformly without replacement from the rest of
 * the bank. Each topic draws from its own generator seeded by (seed, topic_id),
 * so output depends only on the inputs and the seed. Negatives always carry
 * label 0 and zero targets.
 *
 * Throws EmptyInput when records or bank are empty.
 */
RankingDataset build_ranking_dataset(std::span<const TrainRecord> records,
                                     const QuestionBank& bank, const Bm25Index& index,
                                     const FacetScores& facet_scores,
                                     const RankingDatasetOptions& options = {});

/// Same procedure applied to the dev split.
RankingDataset build_dev_dataset(std::span<const TrainRecord> dev_records,
                                 const QuestionBank& bank, const Bm25Index& index,
                                 const FacetScores& facet_scores,
                                 const RankingDatasetOptions& options = {});

/// `# seed=<n>` line, a column header, then one row per example.
void write_ranking_dataset(const RankingDataset& dataset, std::ostream& out);

enum class ClarifyLabel { need_clarify, no_need_clarify };

std::string_view to_string(ClarifyLabel label);

struct UnderstandingExample {
    std::string initial_request;  // metadata only
    std::string question_text;
    std::string answer_text;
    ClarifyLabel label = ClarifyLabel::need_clarify;
};

struct UnderstandingDataset {
    std::vector<UnderstandingExample> examples;
    std::size_t skipped = 0;  // records with no P5 value

    std::size_t count(ClarifyLabel label) const;
};

/// need_clarify iff P@5 == 0 for the record's (topic, facet, question).
UnderstandingDataset build_understanding_dataset(std::span<const TrainRecord> records,
                                                 const FacetScores& facet_scores);

void write_understanding_dataset(const UnderstandingDataset& dataset, std::ostream& out);

}  // namespace clarion

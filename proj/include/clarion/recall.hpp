#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clarion/bm25.hpp"
#include "clarion/corpus_io.hpp"

namespace clarion {

enum class CandidateSource { bm25, short_pool };

std::string_view to_string(CandidateSource source);

struct Candidate {
    std::string question_id;
    CandidateSource source;
    /// BM25 score, or the negated token count for short-pool entries (larger = shorter).
    double recall_score;

    bool operator==(const Candidate&) const = default;
};

struct PoolEntry {
    std::string question_id;
    std::size_t token_count;

    bool operator==(const PoolEntry&) const = default;
};

/// Bank questions never asked in `records`, ascending by token count, ties by id.
std::vector<PoolEntry> shortest_unseen_pool(const QuestionBank& bank,
                                              std::span<const TrainRecord> records);

struct RecallOptions {
    std::size_t n_bm25 = 100;
    std::size_t n_short = 100;
};

/**
 * BM25 top-n_bm25 for the request, then the first n_short pool entries that
 * are neither BM25 hits nor excluded. A BM25 shortfall is not backfilled.
 */
std::vector<Candidate> recall_candidates(const Bm25Index& index,
                                         std::span<const PoolEntry> pool,
                                         std::string_view request_text,
                                         const RecallOptions& options = {},
                                         const std::set<std::string>& exclude = {});

}  // namespace clarion

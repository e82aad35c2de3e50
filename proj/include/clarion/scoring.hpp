#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clarion/corpus_io.hpp"
#include "clarion/recall.hpp"

namespace clarion {

struct ScoreRequestPair {
    std::string context_text;
    std::string question_text;
};

/// Classification probability plus the two regression heads, all in [0, 1].
struct MultiTaskScore {
    double prob = 0.0;
    double mrr_pred = 0.0;
    double ndcg_pred = 0.0;

    bool operator==(const MultiTaskScore&) const = default;
};

/// Point-wise (context, question) scorer. Implementations are thread-safe.
class Scorer {
public:
    virtual ~Scorer() = default;

    /// One score per pair, order-aligned with the input.
    virtual std::vector<MultiTaskScore> score(std::span<const ScoreRequestPair> pairs) const = 0;
    virtual std::string name() const = 0;
};

enum class ScorerKind { lexical, precomputed, remote };

struct ScorerHandle {
    ScorerKind kind = ScorerKind::lexical;
    std::string base_url;               // remote
    std::filesystem::path score_file;   // precomputed
    std::size_t max_in_flight = 4;      // remote: concurrent requests
    std::size_t batch_size = 64;        // remote: pairs per request
    double timeout_seconds = 30.0;      // remote
};

/// Parses `lexical`, `precomputed:<path>` or `remote:<url>`. Throws InvalidConfig.
ScorerHandle parse_scorer_handle(std::string_view spec);

std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle);

/// Token Jaccard between context and question; the regression heads mirror prob.
MultiTaskScore lexical_score(const ScoreRequestPair& pair);

class LexicalScorer final : public Scorer {
public:
    std::vector<MultiTaskScore> score(std::span<const ScoreRequestPair> pairs) const override;
    std::string name() const override { return "lexical"; }
};

/// Lookup table from a `context \t question \t prob \t mrr \t ndcg` file.
class PrecomputedScorer final : public Scorer {
public:
    explicit PrecomputedScorer(const std::filesystem::path& path);

    std::vector<MultiTaskScore> score(std::span<const ScoreRequestPair> pairs) const override;
    std::string name() const override { return "precomputed:" + path_.string(); }

private:
    std::filesystem::path path_;
    std::map<std::pair<std::string, std::string>, MultiTaskScore, std::less<>> table_;
};

/**
 * Client for a scoring service: POST <base>/v1/score with
 * {"pairs":[{"context":..,"question":..}]}, answered by
 * {"scores":[{"prob":..,"mrr":..,"ndcg":..}]}. Any transport failure, non-200
 * status or malformed response raises RemoteUnavailable. Pairs are split into
 * batches and at most max_in_flight requests are outstanding at a time.
 */
class RemoteScorer final : public Scorer {
public:
    explicit RemoteScorer(ScorerHandle handle);

    std::vector<MultiTaskScore> score(std::span<const ScoreRequestPair> pairs) const override;
    std::string name() const override { return "remote:" + handle_.base_url; }

private:
    ScorerHandle handle_;
};

/// Throws EmptyInput on an empty batch; otherwise forwards to the scorer.
std::vector<MultiTaskScore> score_pairs(const Scorer& scorer,
                                        std::span<const ScoreRequestPair> pairs);

struct RankedQuestion {
    std::string question_id;
    double score;

    bool operator==(const RankedQuestion&) const = default;
};

/**
 * Sums every scorer's probability per candidate and sorts by descending sum,
 * ties by ascending question_id. Per-candidate probabilities are added in
 * ascending order so the sum does not depend on scorer order. Scorers run
 * concurrently. Throws EmptyInput when scorers or candidates are empty.
 */
std::vector<RankedQuestion> ensemble_rank(std::span<const Scorer* const> scorers,
                                          std::string_view context,
                                          std::span<const Candidate> candidates,
                                          const QuestionBank& bank);

template <typename T>
std::vector<T> top_k(const std::vector<T>& ranked, std::size_t k = 30) {
    const auto n = std::min(k, ranked.size());
    return std::vector<T>(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n));
}

inline constexpr double kLossEpsilon = 1e-7;

/// BCE on prob (clamped to [eps, 1 - eps]) plus squared error of both heads.
double multitask_loss(const MultiTaskScore& pred, int label, double mrr_target,
                      double ndcg_target);

struct MultiTaskTarget {
    int label = 0;
    double mrr = 0.0;
    double ndcg = 0.0;
};

/// Batch form: each of the three terms is averaged over the batch, then summed.
double multitask_loss(std::span<const MultiTaskScore> preds,
                      std::span<const MultiTaskTarget> targets);

}  // namespace clarion

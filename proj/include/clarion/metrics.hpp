#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clarion/corpus_io.hpp"

namespace clarion {

struct RankedId {
    std::string id;
    double score;
};

/// A system's ranked output per topic, best first.
struct Run {
    std::string name = "run";
    std::map<std::string, std::vector<RankedId>> by_topic;
};

/**
 * Reads `topic_id Q0 id rank score run_name`. Each topic's list is ordered by
 * descending score, ties by the rank column. A repeated (topic, id) is a
 * DuplicateId error.
 */
Run load_run(const std::filesystem::path& path);
void write_run(const Run& run, std::ostream& out);

// Per-topic metric values. Topics come from the qrels; a topic absent from the
// run scores 0. An id counts as relevant when its grade is > 0.
std::map<std::string, double> mrr_per_topic(const Run& run, const Qrels& qrels, std::size_t cutoff);
std::map<std::string, double> precision_per_topic(const Run& run, const Qrels& qrels,
                                                  std::size_t k);
std::map<std::string, double> ndcg_per_topic(const Run& run, const Qrels& qrels, std::size_t k);
/// Topics without relevant ids are left out.
std::map<std::string, double> recall_per_topic(const Run& run, const Qrels& qrels, std::size_t k);

// Macro averages of the per-topic values (0 when there is nothing to average).
double mrr(const Run& run, const Qrels& qrels, std::size_t cutoff);
double precision_at_k(const Run& run, const Qrels& qrels, std::size_t k);
double ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k);
double recall_at_k(const Run& run, const Qrels& qrels, std::size_t k);

struct MetricSpec {
    enum class Kind { mrr, precision, ndcg, recall };

    Kind kind = Kind::mrr;
    std::size_t k = 1;

    /// e.g. "mrr@100", "p@5", "ndcg@3", "recall@30"
    std::string label() const;
};

/// Accepts mrr|p|precision|ndcg|recall followed by @k (k >= 1). Throws UnknownMetric.
MetricSpec parse_metric_spec(std::string_view text);

struct MetricResult {
    MetricSpec spec;
    std::map<std::string, double> per_topic;
    double mean = 0.0;
};

struct MetricReport {
    std::vector<MetricResult> results;

    /// `metric \t topic \t value`, with topic `all` for the macro average.
    void write_tsv(std::ostream& out) const;
    const MetricResult* find(std::string_view label) const;
};

MetricReport evaluate(const Run& run, const Qrels& qrels, std::span<const MetricSpec> specs);
MetricReport evaluate_run(const std::filesystem::path& run_path,
                          const std::filesystem::path& qrels_path,
                          std::span<const MetricSpec> specs);

}  // namespace clarion

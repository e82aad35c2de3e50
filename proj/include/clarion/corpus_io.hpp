#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace clarion {

/// Candidate clarifying questions keyed by id; iteration is lexicographic by id.
using QuestionBank = std::map<std::string, std::string>;

struct TrainRecord {
    std::string topic_id;
    std::string initial_request;
    std::string topic_desc;
    std::string facet_id;
    std::string question_id;
    std::string question_text;
    std::string answer_text;

    bool operator==(const TrainRecord&) const = default;
};

/// Relevance judgments grouped by topic: topic_id -> (id -> grade).
struct Qrels {
    std::map<std::string, std::map<std::string, int>> by_topic;

    int grade(const std::string& topic, const std::string& id) const;
    std::size_t size() const;
};

struct FacetKey {
    std::string topic_id;
    std::string facet_id;
    std::string question_id;

    auto operator<=>(const FacetKey&) const = default;
};

/// Per-(topic, facet, question) evaluation values; absent metrics stay empty.
struct FacetMetrics {
    std::optional<double> mrr100;
    std::optional<double> ndcg3;
    std::optional<double> p5;
};

using FacetScores = std::map<FacetKey, FacetMetrics>;

QuestionBank load_question_bank(const std::filesystem::path& path);
void write_question_bank(const QuestionBank& bank, const std::filesystem::path& path);

/**
 * Reads the 7-column training TSV:
 * topic_id, initial_request, topic_desc, facet_id, question_id, question, answer.
 * The header row must name these columns in this order. Row order is preserved.
 */
std::vector<TrainRecord> load_train_records(const std::filesystem::path& path);
void write_train_records(const std::vector<TrainRecord>& records,
                         const std::filesystem::path& path);

/// Classic 4-column judgment file: `topic_id 0 id grade`.
Qrels load_qrels(const std::filesystem::path& path);

/// `topic_id \t facet_id \t question_id \t metric \t value`, metric in {MRR100, NDCG3, P5}.
FacetScores load_facet_scores(const std::filesystem::path& path);

}  // namespace clarion

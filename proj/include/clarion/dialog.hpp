#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clarion/bm25.hpp"
#include "clarion/corpus_io.hpp"
#include "clarion/recall.hpp"
#include "clarion/scoring.hpp"

namespace clarion {

struct Turn {
    std::string question_id;
    std::string question_text;
    std::string answer_text;
};

/// Single-owner state of one conversation.
class ConversationState {
public:
    explicit ConversationState(std::string initial_request, std::size_t turn_limit = 3);

    const std::string& initial_request() const noexcept { return initial_request_; }
    const std::vector<Turn>& turns() const noexcept { return turns_; }
    const std::set<std::string>& asked_ids() const noexcept { return asked_ids_; }
    std::size_t turn_limit() const noexcept { return turn_limit_; }
    bool at_limit() const noexcept { return turns_.size() >= turn_limit_; }

    /// Appends an answered question. Throws std::logic_error when the question
    /// was already asked or the turn limit is reached.
    void record(Turn turn);

private:
    std::string initial_request_;
    std::vector<Turn> turns_;
    std::set<std::string> asked_ids_;
    std::size_t turn_limit_;
};

/// Case-insensitive whole-token match under the index tokenizer.
bool contains_token(std::string_view text, std::string_view token);

/**
 * Model input for the rankers: the initial request, then per turn the
 * question text when the answer contains "yes", nothing when it contains "no",
 * and the answer text otherwise. "yes" is checked first.
 */
std::string build_model_input(std::string_view initial_request, std::span<const Turn> turns);
std::string build_model_input(const ConversationState& state);

struct QaPair {
    std::string question;
    std::string answer;
};

struct ClarifyVerdict {
    bool need_clarify = true;
    double prob = 1.0;
};

/// Understanding gate over the last (question, answer) exchange.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::vector<ClarifyVerdict> classify(std::span<const QaPair> items) const = 0;
    virtual std::string name() const = 0;
};

/// No-model fallback: the request counts as clear once the user gives an
/// answer of at least four tokens containing neither "yes" nor "no".
class HeuristicClassifier final : public Classifier {
public:
    std::vector<ClarifyVerdict> classify(std::span<const QaPair> items) const override;
    std::string name() const override { return "heuristic"; }
};

/// POST <base>/v1/classify {"items":[{"question","answer"}]} ->
/// {"labels":[{"need_clarify":bool,"prob":p}]}. Failures raise RemoteUnavailable.
class RemoteClassifier final : public Classifier {
public:
    explicit RemoteClassifier(std::string base_url, double timeout_seconds = 30.0);
    std::vector<ClarifyVerdict> classify(std::span<const QaPair> items) const override;
    std::string name() const override { return "remote:" + base_url_; }

private:
    std::string base_url_;
    double timeout_seconds_;
};

struct PipelineDeps {
    const Bm25Index* index = nullptr;
    std::span<const PoolEntry> pool;
    const QuestionBank* bank = nullptr;
    std::vector<const Scorer*> scorers;
    const Classifier* classifier = nullptr;  // null: heuristic
    bool fallback_to_heuristic = false;      // on RemoteUnavailable
    RecallOptions recall;
};

/// True with no turns yet; otherwise asks the classifier about the last turn.
bool needs_clarification(const Classifier* classifier, const ConversationState& state,
                         bool fallback_to_heuristic = false);

enum class StopReason { none, turn_limit, understood, no_candidates };

std::string_view to_string(StopReason reason);

struct StepOutcome {
    enum class Action { Ask, Clear };

    Action action = Action::Clear;
    std::string question_id;  // Ask only
    std::string question_text;
    StopReason reason = StopReason::none;

    bool asks() const noexcept { return action == Action::Ask; }
};

/// One pipeline turn: gate, rewrite, recall excluding asked questions, rank, pick top-1.
StepOutcome step(const ConversationState& state, const PipelineDeps& deps);

/// Answers keyed by (request, question_id); unknown pairs are answered "no".
class AnswerOracle {
public:
    void add(std::string request, std::string question_id, std::string answer);
    std::string answer(const std::string& request, const std::string& question_id) const;

    static AnswerOracle load(const std::filesystem::path& path);

private:
    std::map<std::pair<std::string, std::string>, std::string> answers_;
};

struct TranscriptLine {
    std::size_t turn;
    std::string role;  // request | question | answer | stop
    std::string text;

    bool operator==(const TranscriptLine&) const = default;
};

struct Transcript {
    std::string request;
    std::vector<Turn> turns;
    StopReason stop = StopReason::none;
    std::vector<TranscriptLine> lines;
};

std::vector<Transcript> simulate(std::span<const std::string> requests,
                                 const AnswerOracle& oracle, const PipelineDeps& deps,
                                 std::size_t turn_limit = 3);

/// `turn \t role \t text` per line.
void write_transcripts(std::span<const Transcript> transcripts, std::ostream& out);

}  // namespace clarion

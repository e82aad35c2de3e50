#include "clarion/dialog.hpp"

#include <ostream>
#include <stdexcept>

#include "clarion/error.hpp"
#include "remote_client.hpp"
#include "text_file.hpp"

namespace clarion {

ConversationState::ConversationState(std::string initial_request, std::size_t turn_limit)
    : initial_request_(std::move(initial_request)), turn_limit_(turn_limit) {}

void ConversationState::record(Turn turn) {
    if (at_limit()) {
        throw std::logic_error("turn limit reached");
    }
    if (!asked_ids_.insert(turn.question_id).second) {
        throw std::logic_error("question already asked: " + turn.question_id);
    }
    turns_.push_back(std::move(turn));
}

bool contains_token(std::string_view text, std::string_view token) {
    for (const auto& t : tokenize(text)) {
        if (t == token) {
            return true;
        }
    }
    return false;
}

std::string build_model_input(std::string_view initial_request, std::span<const Turn> turns) {
    std::string input(initial_request);
    for (const auto& t : turns) {
        if (contains_token(t.answer_text, "yes")) {
            input += ' ';
            input += t.question_text;
        } else if (contains_token(t.answer_text, "no")) {
            continue;
        } else {
            input += ' ';
            input += t.answer_text;
        }
    }
    return input;
}

std::string build_model_input(const ConversationState& state) {
    return build_model_input(state.initial_request(), state.turns());
}

std::vector<ClarifyVerdict> HeuristicClassifier::classify(std::span<const QaPair> items) const {
    std::vector<ClarifyVerdict> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        const bool yes_or_no =
            contains_token(item.answer, "yes") || contains_token(item.answer, "no");
        const bool informative = !yes_or_no && tokenize(item.answer).size() >= 4;
        out.push_back(ClarifyVerdict{!informative, informative ? 0.0 : 1.0});
    }
    return out;
}

RemoteClassifier::RemoteClassifier(std::string base_url, double timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
    if (base_url_.empty()) {
        throw DataError(ErrorCode::InvalidConfig, "remote classifier needs a base url");
    }
}

std::vector<ClarifyVerdict> RemoteClassifier::classify(std::span<const QaPair> items) const {
    nlohmann::json body;
    auto& arr = body["items"] = nlohmann::json::array();
    for (const auto& item : items) {
        arr.push_back({{"question", item.question}, {"answer", item.answer}});
    }
    const auto res = detail::post_json(base_url_, "/v1/classify", body, timeout_seconds_);
    if (!res.is_object() || !res.contains("labels") || !res["labels"].is_array() ||
        res["labels"].size() != items.size()) {
        throw DataError(ErrorCode::RemoteUnavailable,
                        "response 'labels' does not match request length");
    }
    std::vector<ClarifyVerdict> out;
    for (const auto& label : res["labels"]) {
        if (!label.is_object() || !label.contains("need_clarify") ||
            !label["need_clarify"].is_boolean()) {
            throw DataError(ErrorCode::RemoteUnavailable, "label lacks boolean need_clarify");
        }
        ClarifyVerdict v;
        v.need_clarify = label["need_clarify"].get<bool>();
        v.prob = label.contains("prob") && label["prob"].is_number() ? label["prob"].get<double>()
                                                                     : (v.need_clarify ? 1.0 : 0.0);
        out.push_back(v);
    }
    return out;
}

bool needs_clarification(const Classifier* classifier, const ConversationState& state,
                         bool fallback_to_heuristic) {
    if (state.turns().empty()) {
        return true;
    }
    const auto& last = state.turns().back();
    const QaPair item{last.question_text, last.answer_text};
    static const HeuristicClassifier heuristic;
    if (classifier == nullptr) {
        return heuristic.classify({&item, 1}).front().need_clarify;
    }
    try {
        const auto verdicts = classifier->classify({&item, 1});
        if (verdicts.size() != 1) {
            throw DataError(ErrorCode::RemoteUnavailable, "classifier returned no verdict");
        }
        return verdicts.front().need_clarify;
    } catch (const DataError& e) {
        if (e.code() == ErrorCode::RemoteUnavailable && fallback_to_heuristic) {
            return heuristic.classify({&item, 1}).front().need_clarify;
        }
        throw;
    }
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::none: return "none";
        case StopReason::turn_limit: return "turn_limit";
        case StopReason::understood: return "clear";
        case StopReason::no_candidates: return "no_candidates";
    }
    return "unknown";
}

StepOutcome step(const ConversationState& state, const PipelineDeps& deps) {
    StepOutcome out;
    if (state.at_limit()) {
        out.reason = StopReason::turn_limit;
        return out;
    }
    if (!needs_clarification(deps.classifier, state, deps.fallback_to_heuristic)) {
        out.reason = StopReason::understood;
        return out;
    }
    if (deps.index == nullptr || deps.bank == nullptr || deps.scorers.empty()) {
        throw DataError(ErrorCode::InvalidConfig, "pipeline needs an index, a bank and scorers");
    }
    const auto input = build_model_input(state);
    const auto candidates =
        recall_candidates(*deps.index, deps.pool, input, deps.recall, state.asked_ids());
    if (candidates.empty()) {
        out.reason = StopReason::no_candidates;
        return out;
    }
    const auto ranked = ensemble_rank(deps.scorers, input, candidates, *deps.bank);
    out.action = StepOutcome::Action::Ask;
    out.question_id = ranked.front().question_id;
    out.question_text = deps.bank->at(out.question_id);
    return out;
}

void AnswerOracle::add(std::string request, std::string question_id, std::string answer) {
    answers_.insert_or_assign(std::pair{std::move(request), std::move(question_id)},
                              std::move(answer));
}

std::string AnswerOracle::answer(const std::string& request,
                                 const std::string& question_id) const {
    const auto it = answers_.find(std::pair{request, question_id});
    return it == answers_.end() ? std::string("no") : it->second;
}

AnswerOracle AnswerOracle::load(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    AnswerOracle oracle;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty() || (i == 0 && lines[i].rfind("request\t", 0) == 0)) {
            continue;
        }
        auto f = detail::split_tabs(lines[i]);
        if (f.size() != 3) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 3 columns, got " + std::to_string(f.size()), i + 1);
        }
        oracle.add(std::move(f[0]), std::move(f[1]), std::move(f[2]));
    }
    return oracle;
}

std::vector<Transcript> simulate(std::span<const std::string> requests,
                                 const AnswerOracle& oracle, const PipelineDeps& deps,
                                 std::size_t turn_limit) {
    std::vector<Transcript> out;
    out.reserve(requests.size());
    for (const auto& request : requests) {
        ConversationState state(request, turn_limit);
        Transcript t;
        t.request = request;
        t.lines.push_back(TranscriptLine{0, "request", request});
        while (true) {
            const auto outcome = step(state, deps);
            if (!outcome.asks()) {
                t.stop = outcome.reason;
                t.lines.push_back(
                    TranscriptLine{state.turns().size(), "stop", std::string(to_string(t.stop))});
                break;
            }
            const std::size_t turn_no = state.turns().size() + 1;
            auto answer = oracle.answer(request, outcome.question_id);
            t.lines.push_back(TranscriptLine{turn_no, "question", outcome.question_text});
            t.lines.push_back(TranscriptLine{turn_no, "answer", answer});
            state.record(Turn{outcome.question_id, outcome.question_text, std::move(answer)});
        }
        t.turns = state.turns();
        out.push_back(std::move(t));
    }
    return out;
}

void write_transcripts(std::span<const Transcript> transcripts, std::ostream& out) {
    for (const auto& t : transcripts) {
        for (const auto& line : t.lines) {
            detail::check_tsv_field(line.text, "transcript text");
            out << line.turn << '\t' << line.role << '\t' << line.text << '\n';
        }
    }
}

}  // namespace clarion

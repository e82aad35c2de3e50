#include "clarion/scoring.hpp"

#include <cmath>
#include <future>
#include <set>

#include "clarion/bm25.hpp"
#include "clarion/error.hpp"
#include "remote_client.hpp"
#include "text_file.hpp"

namespace clarion {

namespace {

double read_unit(const nlohmann::json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number()) {
        throw DataError(ErrorCode::RemoteUnavailable, std::string("response lacks numeric ") + key);
    }
    const double v = obj[key].get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError(ErrorCode::RemoteUnavailable,
                        std::string(key) + " outside [0, 1]: " + std::to_string(v));
    }
    return v;
}

}  // namespace

ScorerHandle parse_scorer_handle(std::string_view spec) {
    ScorerHandle h;
    const auto colon = spec.find(':');
    const auto kind = spec.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    if (kind == "lexical" && arg.empty()) {
        h.kind = ScorerKind::lexical;
    } else if (kind == "precomputed" && !arg.empty()) {
        h.kind = ScorerKind::precomputed;
        h.score_file = std::string(arg);
    } else if (kind == "remote" && !arg.empty()) {
        h.kind = ScorerKind::remote;
        h.base_url = std::string(arg);
    } else {
        throw DataError(ErrorCode::InvalidConfig,
                        "scorer must be lexical, precomputed:<path> or remote:<url>, got '" +
                            std::string(spec) + "'");
    }
    return h;
}

std::unique_ptr<Scorer> make_scorer(const ScorerHandle& handle) {
    switch (handle.kind) {
        case ScorerKind::lexical: return std::make_unique<LexicalScorer>();
        case ScorerKind::precomputed: return std::make_unique<PrecomputedScorer>(handle.score_file);
        case ScorerKind::remote: return std::make_unique<RemoteScorer>(handle);
    }
    throw DataError(ErrorCode::InvalidConfig, "unknown scorer kind");
}

MultiTaskScore lexical_score(const ScoreRequestPair& pair) {
    const auto ctx = tokenize(pair.context_text);
    const auto q = tokenize(pair.question_text);
    const std::set<std::string> a(ctx.begin(), ctx.end());
    const std::set<std::string> b(q.begin(), q.end());
    std::size_t common = 0;
    for (const auto& t : a) {
        common += b.count(t);
    }
    const std::size_t uni = a.size() + b.size() - common;
    const double prob = uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
    return MultiTaskScore{prob, prob, prob};
}

std::vector<MultiTaskScore> LexicalScorer::score(std::span<const ScoreRequestPair> pairs) const {
    std::vector<MultiTaskScore> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back(lexical_score(p));
    }
    return out;
}

PrecomputedScorer::PrecomputedScorer(const std::filesystem::path& path) : path_(path) {
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty() || (i == 0 && lines[i].rfind("context\t", 0) == 0)) {
            continue;
        }
        auto f = detail::split_tabs(lines[i]);
        if (f.size() != 5) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 5 columns, got " + std::to_string(f.size()), line_no);
        }
        MultiTaskScore s;
        double* slots[] = {&s.prob, &s.mrr_pred, &s.ndcg_pred};
        for (int c = 0; c < 3; ++c) {
            if (!detail::parse_double(f[2 + c], *slots[c])) {
                throw DataError(ErrorCode::MalformedRow, "not a number: " + f[2 + c], line_no);
            }
            if (!(*slots[c] >= 0.0 && *slots[c] <= 1.0)) {
                throw DataError(ErrorCode::ValueOutOfRange, f[2 + c], line_no);
            }
        }
        if (!table_.emplace(std::pair{std::move(f[0]), std::move(f[1])}, s).second) {
            throw DataError(ErrorCode::DuplicateId, "repeated (context, question) pair", line_no);
        }
    }
}

std::vector<MultiTaskScore> PrecomputedScorer::score(
    std::span<const ScoreRequestPair> pairs) const {
    std::vector<MultiTaskScore> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        const auto it = table_.find(std::pair{p.context_text, p.question_text});
        if (it == table_.end()) {
            throw DataError(ErrorCode::MissingPrecomputedScore,
                            "(" + p.context_text + ", " + p.question_text + ")");
        }
        out.push_back(it->second);
    }
    return out;
}

RemoteScorer::RemoteScorer(ScorerHandle handle) : handle_(std::move(handle)) {
    if (handle_.base_url.empty()) {
        throw DataError(ErrorCode::InvalidConfig, "remote scorer needs a base url");
    }
    handle_.max_in_flight = std::max<std::size_t>(handle_.max_in_flight, 1);
    handle_.batch_size = std::max<std::size_t>(handle_.batch_size, 1);
}

std::vector<MultiTaskScore> RemoteScorer::score(std::span<const ScoreRequestPair> pairs) const {
    auto score_batch = [this](std::span<const ScoreRequestPair> batch) {
        nlohmann::json body;
        auto& arr = body["pairs"] = nlohmann::json::array();
        for (const auto& p : batch) {
            arr.push_back({{"context", p.context_text}, {"question", p.question_text}});
        }
        const auto res = detail::post_json(handle_.base_url, "/v1/score", body,
                                           handle_.timeout_seconds);
        if (!res.is_object() || !res.contains("scores") || !res["scores"].is_array() ||
            res["scores"].size() != batch.size()) {
            throw DataError(ErrorCode::RemoteUnavailable,
                            "response 'scores' does not match request length");
        }
        std::vector<MultiTaskScore> out;
        out.reserve(batch.size());
        for (const auto& s : res["scores"]) {
            out.push_back(MultiTaskScore{read_unit(s, "prob"), read_unit(s, "mrr"),
                                         read_unit(s, "ndcg")});
        }
        return out;
    };

    std::vector<MultiTaskScore> out;
    out.reserve(pairs.size());
    std::size_t next = 0;
    while (next < pairs.size()) {
        std::vector<std::future<std::vector<MultiTaskScore>>> wave;
        for (std::size_t i = 0; i < handle_.max_in_flight && next < pairs.size(); ++i) {
            const auto n = std::min(handle_.batch_size, pairs.size() - next);
            wave.push_back(std::async(std::launch::async, score_batch, pairs.subspan(next, n)));
            next += n;
        }
        for (auto& f : wave) {
            auto part = f.get();
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    return out;
}

std::vector<MultiTaskScore> score_pairs(const Scorer& scorer,
                                        std::span<const ScoreRequestPair> pairs) {
    if (pairs.empty()) {
        throw DataError(ErrorCode::EmptyInput, "no pairs to score");
    }
    auto scores = scorer.score(pairs);
    if (scores.size() != pairs.size()) {
        throw DataError(ErrorCode::RemoteUnavailable, scorer.name() + " returned " +
                                                          std::to_string(scores.size()) +
                                                          " scores for " +
                                                          std::to_string(pairs.size()) + " pairs");
    }
    return scores;
}

std::vector<RankedQuestion> ensemble_rank(std::span<const Scorer* const> scorers,
                                          std::string_view context,
                                          std::span<const Candidate> candidates,
                                          const QuestionBank& bank) {
    if (scorers.empty() || candidates.empty()) {
        throw DataError(ErrorCode::EmptyInput, "ensemble needs scorers and candidates");
    }
    std::vector<ScoreRequestPair> pairs;
    pairs.reserve(candidates.size());
    for (const auto& c : candidates) {
        const auto it = bank.find(c.question_id);
        if (it == bank.end()) {
            throw DataError(ErrorCode::UnknownQuestionId, c.question_id);
        }
        pairs.push_back(ScoreRequestPair{std::string(context), it->second});
    }

    std::vector<std::future<std::vector<MultiTaskScore>>> pending;
    pending.reserve(scorers.size());
    for (const Scorer* s : scorers) {
        pending.push_back(std::async(std::launch::async,
                                     [s, &pairs] { return score_pairs(*s, pairs); }));
    }
    std::vector<std::vector<double>> probs(candidates.size());
    for (auto& f : pending) {
        const auto scores = f.get();
        for (std::size_t i = 0; i < scores.size(); ++i) {
            probs[i].push_back(scores[i].prob);
        }
    }

    std::vector<RankedQuestion> ranked;
    ranked.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::sort(probs[i].begin(), probs[i].end());
        double sum = 0.0;
        for (const double p : probs[i]) {
            sum += p;
        }
        ranked.push_back(RankedQuestion{candidates[i].question_id, sum});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedQuestion& a, const RankedQuestion& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.question_id < b.question_id;
    });
    return ranked;
}

double multitask_loss(const MultiTaskScore& pred, int label, double mrr_target,
                      double ndcg_target) {
    const double p = std::clamp(pred.prob, kLossEpsilon, 1.0 - kLossEpsilon);
    const double y = label ? 1.0 : 0.0;
    const double bce = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    const double d_ndcg = pred.ndcg_pred - ndcg_target;
    const double d_mrr = pred.mrr_pred - mrr_target;
    return bce + d_ndcg * d_ndcg + d_mrr * d_mrr;
}

double multitask_loss(std::span<const MultiTaskScore> preds,
                      std::span<const MultiTaskTarget> targets) {
    if (preds.size() != targets.size()) {
        throw DataError(ErrorCode::EmptyInput, "prediction and target counts differ");
    }
    if (preds.empty()) {
        throw DataError(ErrorCode::EmptyInput, "empty batch");
    }
    double bce = 0.0;
    double mse_ndcg = 0.0;
    double mse_mrr = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& t = targets[i];
        bce += multitask_loss(MultiTaskScore{preds[i].prob, 0.0, 0.0}, t.label, 0.0, 0.0);
        mse_ndcg += (preds[i].ndcg_pred - t.ndcg) * (preds[i].ndcg_pred - t.ndcg);
        mse_mrr += (preds[i].mrr_pred - t.mrr) * (preds[i].mrr_pred - t.mrr);
    }
    const double n = static_cast<double>(preds.size());
    return bce / n + mse_ndcg / n + mse_mrr / n;
}

}  // namespace clarion

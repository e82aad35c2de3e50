#include "clarion/recall.hpp"

#include <algorithm>
#include <unordered_set>

namespace clarion {

std::string_view to_string(CandidateSource source) {
    return source == CandidateSource::bm25 ? "bm25" : "short_pool";
}

std::vector<PoolEntry> shortest_unseen_pool(const QuestionBank& bank,
                                            std::span<const TrainRecord> records) {
    std::unordered_set<std::string_view> asked;
    for (const auto& r : records) {
        asked.insert(r.question_id);
    }
    std::vector<PoolEntry> pool;
    for (const auto& [id, text] : bank) {
        if (!asked.contains(id)) {
            pool.push_back(PoolEntry{id, tokenize(text).size()});
        }
    }
    // bank iteration is already id-ordered, so a stable sort keeps the id tie-break
    std::stable_sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
        return a.token_count < b.token_count;
    });
    return pool;
}

std::vector<Candidate> recall_candidates(const Bm25Index& index,
                                         std::span<const PoolEntry> pool,
                                         std::string_view request_text,
                                         const RecallOptions& options,
                                         const std::set<std::string>& exclude) {
    std::vector<Candidate> out;
    std::unordered_set<std::string> present;

    if (options.n_bm25 > 0) {
        // over-fetch so that exclusions do not eat into the n_bm25 quota
        const std::size_t fetch = options.n_bm25 > kUnlimited - exclude.size()
                                      ? kUnlimited
                                      : options.n_bm25 + exclude.size();
        for (auto& hit : index.search(request_text, fetch)) {
            if (out.size() == options.n_bm25) {
                break;
            }
            if (exclude.contains(hit.question_id)) {
                continue;
            }
            present.insert(hit.question_id);
            out.push_back(Candidate{std::move(hit.question_id), CandidateSource::bm25, hit.score});
        }
    }

    std::size_t taken = 0;
    for (const auto& entry : pool) {
        if (taken == options.n_short) {
            break;
        }
        if (exclude.contains(entry.question_id) || present.contains(entry.question_id)) {
            continue;
        }
        present.insert(entry.question_id);
        out.push_back(Candidate{entry.question_id, CandidateSource::short_pool,
                                -static_cast<double>(entry.token_count)});
        ++taken;
    }
    return out;
}

}  // namespace clarion

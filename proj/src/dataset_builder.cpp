#include "clarion/dataset_builder.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "clarion/error.hpp"
#include "text_file.hpp"

namespace clarion {

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// std::seed_seq and std::mt19937_64 are fully specified by the standard, unlike
// the <random> distributions, so sampling stays identical across toolchains.
std::mt19937_64 topic_generator(std::uint64_t seed, std::string_view topic_id) {
    const std::uint64_t h = fnv1a(topic_id);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
        const std::uint64_t r = rng();
        if (r >= threshold) {
            return r % n;
        }
    }
}

struct TopicRequest {
    std::string topic_id;
    std::string initial_request;
};

}  // namespace

std::string_view to_string(Provenance provenance) {
    switch (provenance) {
        case Provenance::positive: return "positive";
        case Provenance::neg_bm25: return "neg_bm25";
        case Provenance::neg_random: return "neg_random";
    }
    return "unknown";
}

std::string_view to_string(ClarifyLabel label) {
    return label == ClarifyLabel::need_clarify ? "need_clarify" : "no_need_clarify";
}

std::size_t RankingDataset::positives() const {
    return static_cast<std::size_t>(std::count_if(
        examples.begin(), examples.end(), [](const RankingExample& e) { return e.label == 1; }));
}

std::size_t RankingDataset::negatives() const { return examples.size() - positives(); }

RankingDataset build_ranking_dataset(std::span<const TrainRecord> records,
                                     const QuestionBank& bank, const Bm25Index& index,
                                     const FacetScores& facet_scores,
                                     const RankingDatasetOptions& options) {
    if (records.empty() || bank.empty()) {
        throw DataError(ErrorCode::EmptyInput, "ranking dataset needs records and a bank");
    }

    std::vector<TopicRequest> requests;
    std::set<std::pair<std::string, std::string>> seen_requests;
    std::map<std::string, std::set<std::string>> asked_by_topic;
    for (const auto& r : records) {
        if (seen_requests.emplace(r.topic_id, r.initial_request).second) {
            requests.push_back(TopicRequest{r.topic_id, r.initial_request});
        }
        asked_by_topic[r.topic_id].insert(r.question_id);
    }

    auto question_text = [&](const std::string& id, const std::string& fallback) {
        const auto it = bank.find(id);
        return it == bank.end() ? fallback : it->second;
    };

    RankingDataset out;
    out.seed = options.seed;

    // positives: one per distinct (topic, question), in first-appearance order
    std::map<std::pair<std::string, std::string>, std::size_t> positive_slot;
    std::vector<std::vector<RankingExample>> positives_by_request(requests.size());
    std::map<std::pair<std::string, std::string>, std::size_t> request_slot;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        request_slot.emplace(std::pair{requests[i].topic_id, requests[i].initial_request}, i);
    }
    std::vector<std::pair<std::size_t, std::size_t>> positive_pos;  // (request, index)
    for (const auto& r : records) {
        const auto key = std::pair{r.topic_id, r.question_id};
        const auto slot = request_slot.at(std::pair{r.topic_id, r.initial_request});
        auto [it, inserted] = positive_slot.emplace(key, positive_pos.size());
        if (inserted) {
            RankingExample e;
            e.topic_id = r.topic_id;
            e.question_id = r.question_id;
            e.context_text = r.initial_request;
            e.question_text = question_text(r.question_id, r.question_text);
            e.label = 1;
            e.provenance = Provenance::positive;
            positives_by_request[slot].push_back(std::move(e));
            positive_pos.emplace_back(slot, positives_by_request[slot].size() - 1);
        }
    }
    // targets: first row of the pair with scores wins
    std::set<std::pair<std::string, std::string>> scored;
    for (const auto& r : records) {
        const auto key = std::pair{r.topic_id, r.question_id};
        if (scored.contains(key)) {
            continue;
        }
        const auto fs = facet_scores.find(FacetKey{r.topic_id, r.facet_id, r.question_id});
        if (fs == facet_scores.end() || (!fs->second.mrr100 && !fs->second.ndcg3)) {
            continue;
        }
        const auto [req, idx] = positive_pos[positive_slot.at(key)];
        auto& e = positives_by_request[req][idx];
        e.mrr100 = fs->second.mrr100.value_or(0.0);
        e.ndcg3 = fs->second.ndcg3.value_or(0.0);
        scored.insert(key);
    }
    out.positives_without_scores = positive_slot.size() - scored.size();

    std::vector<std::string> bank_ids;
    bank_ids.reserve(bank.size());
    for (const auto& [id, text] : bank) {
        bank_ids.push_back(id);
    }

    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& req = requests[i];
        for (auto& e : positives_by_request[i]) {
            out.examples.push_back(std::move(e));
        }
        const auto& asked = asked_by_topic.at(req.topic_id);

        auto negative = [&](const std::string& id, Provenance prov) {
            RankingExample e;
            e.topic_id = req.topic_id;
            e.question_id = id;
            e.context_text = req.initial_request;
            e.question_text = bank.at(id);
            e.label = 0;
            e.provenance = prov;
            return e;
        };

        std::unordered_set<std::string> chosen;
        if (options.n_bm25 > 0) {
            for (const auto& hit : index.search(req.initial_request, options.n_bm25 + asked.size())) {
                if (chosen.size() == options.n_bm25) {
                    break;
                }
                if (asked.contains(hit.question_id) || !bank.contains(hit.question_id)) {
                    continue;
                }
                chosen.insert(hit.question_id);
                out.examples.push_back(negative(hit.question_id, Provenance::neg_bm25));
            }
        }

        if (options.n_random > 0) {
            std::vector<const std::string*> eligible;
            eligible.reserve(bank_ids.size());
            for (const auto& id : bank_ids) {
                if (!asked.contains(id) && !chosen.contains(id)) {
                    eligible.push_back(&id);
                }
            }
            auto rng = topic_generator(options.seed, req.topic_id);
            const std::size_t take = std::min(options.n_random, eligible.size());
            for (std::size_t k = 0; k < take; ++k) {
                const auto j = k + uniform_below(rng, eligible.size() - k);
                std::swap(eligible[k], eligible[j]);
                out.examples.push_back(negative(*eligible[k], Provenance::neg_random));
            }
        }
    }
    return out;
}

RankingDataset build_dev_dataset(std::span<const TrainRecord> dev_records,
                                 const QuestionBank& bank, const Bm25Index& index,
                                 const FacetScores& facet_scores,
                                 const RankingDatasetOptions& options) {
    return build_ranking_dataset(dev_records, bank, index, facet_scores, options);
}

void write_ranking_dataset(const RankingDataset& dataset, std::ostream& out) {
    fmt::print(out, "# seed={}\n", dataset.seed);
    out << "context\tquestion\tlabel\tmrr100\tndcg3\tprovenance\n";
    for (const auto& e : dataset.examples) {
        detail::check_tsv_field(e.context_text, "context");
        detail::check_tsv_field(e.question_text, "question");
        fmt::print(out, "{}\t{}\t{}\t{}\t{}\t{}\n", e.context_text, e.question_text, e.label,
                   e.mrr100, e.ndcg3, to_string(e.provenance));
    }
}

std::size_t UnderstandingDataset::count(ClarifyLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(),
                      [label](const UnderstandingExample& e) { return e.label == label; }));
}

UnderstandingDataset build_understanding_dataset(std::span<const TrainRecord> records,
                                                 const FacetScores& facet_scores) {
    UnderstandingDataset out;
    for (const auto& r : records) {
        const auto fs = facet_scores.find(FacetKey{r.topic_id, r.facet_id, r.question_id});
        if (fs == facet_scores.end() || !fs->second.p5) {
            ++out.skipped;
            continue;
        }
        out.examples.push_back(UnderstandingExample{
            r.initial_request, r.question_text, r.answer_text,
            *fs->second.p5 == 0.0 ? ClarifyLabel::need_clarify : ClarifyLabel::no_need_clarify});
    }
    return out;
}

void write_understanding_dataset(const UnderstandingDataset& dataset, std::ostream& out) {
    out << "question\tanswer\tlabel\n";
    for (const auto& e : dataset.examples) {
        detail::check_tsv_field(e.question_text, "question");
        detail::check_tsv_field(e.answer_text, "answer");
        out << e.question_text << '\t' << e.answer_text << '\t' << to_string(e.label) << '\n';
    }
}

}  // namespace clarion

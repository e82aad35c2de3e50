#pragma once

// Synthetic corpora and temp-file helpers for tests.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "clarion/corpus_io.hpp"

namespace clarion::testing {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("clarion_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path_ / name; }

    std::filesystem::path write(const std::string& name, const std::string& content) const {
        const auto p = file(name);
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "appraisal", "antique", "farm",    "creek",   "obama",   "family",   "tree",
        "parents",   "recipe",  "pot",     "washer",  "pressure", "parts",   "hoboken",
        "apartment", "restaurant", "cure", "cheilitis", "home",  "remedy",   "near",
        "price",     "history", "map",     "school",  "weather", "travel",   "hotel",
        "car",       "repair",  "garden",  "music",   "lesson",  "dog",      "training"};
    return words;
}

struct SyntheticCorpus {
    QuestionBank bank;
    std::vector<TrainRecord> records;
    std::vector<std::string> requests;  // one per topic
};

/**
 * Bank of n_questions short questions over a small vocabulary; n_topics topics,
 * each asking `asked_per_topic` distinct questions drawn from the first
 * `askable` bank entries, so every question past `askable` is never asked.
 */
inline SyntheticCorpus make_corpus(std::size_t n_questions, std::size_t n_topics,
                                   std::size_t asked_per_topic, std::size_t askable,
                                   std::uint64_t seed = 7, const std::string& topic_prefix = "t") {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    const auto& vocab = vocabulary();

    auto phrase = [&](std::size_t min_len, std::size_t max_len) {
        const std::size_t len = min_len + pick(max_len - min_len + 1);
        std::string s;
        for (std::size_t i = 0; i < len; ++i) {
            if (i) s += ' ';
            s += vocab[pick(vocab.size())];
        }
        return s;
    };

    SyntheticCorpus c;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_questions; ++i) {
        ids.push_back(fmt::format("Q{:05}", i));
        c.bank.emplace(ids.back(), "are you asking about " + phrase(1, 6));
    }
    for (std::size_t t = 0; t < n_topics; ++t) {
        const std::string topic = topic_prefix + std::to_string(t);
        const std::string request = "tell me about " + phrase(2, 4);
        c.requests.push_back(request);
        std::vector<std::size_t> chosen;
        while (chosen.size() < asked_per_topic) {
            const auto q = pick(askable);
            if (std::find(chosen.begin(), chosen.end(), q) == chosen.end()) {
                chosen.push_back(q);
            }
        }
        for (std::size_t f = 0; f < chosen.size(); ++f) {
            const auto& qid = ids[chosen[f]];
            c.records.push_back(TrainRecord{topic, request, "topic about " + phrase(1, 3),
                                            "F" + std::to_string(f), qid, c.bank.at(qid),
                                            (f % 2 ? "yes " : "no ") + phrase(0, 3)});
        }
    }
    return c;
}

}  // namespace clarion::testing

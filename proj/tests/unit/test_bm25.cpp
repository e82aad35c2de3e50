#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "clarion/bm25.hpp"
#include "clarion/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace clarion;

namespace {

TrainRecord record(std::string topic, std::string req, std::string qid, std::string answer,
                   std::string desc = "") {
    return TrainRecord{std::move(topic), std::move(req), std::move(desc), "F1",
                       std::move(qid), "", std::move(answer)};
}

// Enhanced documents rebuilt by hand for the oracle.
std::map<std::string, oracle::Doc> enhanced_docs(const QuestionBank& bank,
                                                 const std::vector<TrainRecord>& records) {
    std::map<std::string, oracle::Doc> docs;
    for (const auto& [id, text] : bank) {
        docs[id] = tokenize(text);
    }
    for (const auto& r : records) {
        auto it = docs.find(r.question_id);
        if (it == docs.end()) continue;
        for (const auto* field : {&r.initial_request, &r.answer_text, &r.topic_desc}) {
            const auto toks = tokenize(*field);
            it->second.insert(it->second.end(), toks.begin(), toks.end());
        }
    }
    return docs;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("Tell me about Obama family tree.") ==
          TokenList{"tell", "me", "about", "obama", "family", "tree"});
    CHECK(tokenize("P@5-metric!") == TokenList{"p", "5", "metric"});
    CHECK(tokenize("  --  ").empty());
    CHECK(tokenize("caf\xC3\xA9") == TokenList{"caf"});
}

TEST_CASE("tokenize: tokens are non-empty lowercase alphanumerics (property)") {
    std::mt19937 rng(3);
    for (int iter = 0; iter < 300; ++iter) {
        std::string s;
        const int len = static_cast<int>(rng() % 40);
        for (int i = 0; i < len; ++i) {
            s.push_back(static_cast<char>(32 + rng() % 95));
        }
        for (const auto& t : tokenize(s)) {
            REQUIRE_FALSE(t.empty());
            for (const char c : t) {
                CHECK(((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')));
            }
        }
    }
}

TEST_CASE("enhanced index: document length counts related records") {
    const QuestionBank bank{{"q1", "obama ancestors"}, {"q2", "home remedies"}};
    const std::vector<TrainRecord> records{record("t1", "obama family tree", "q1", "yes his parents")};
    const auto index = build_enhanced_index(bank, records);
    CHECK(index.doc_length("q1") == 2 + 3 + 3);
    CHECK(index.doc_length("q2") == 2);  // never asked: own tokens only
    CHECK(index.avgdl() == doctest::Approx(5.0));
    CHECK(index.document_frequency("obama") == 1);
    CHECK(index.document_frequency("parents") == 1);
}

TEST_CASE("enhanced index: errors") {
    CHECK_THROWS_AS(build_enhanced_index({}, {}), DataError);
    const QuestionBank bank{{"q1", "x"}};
    CHECK_THROWS_AS(build_enhanced_index(bank, {}, Bm25Params{0.0, 0.75}), DataError);
    CHECK_THROWS_AS(build_enhanced_index(bank, {}, Bm25Params{1.2, 1.5}), DataError);
    const auto index = build_enhanced_index(bank, {});
    try {
        (void)index.score(tokenize("x"), "zz");
        FAIL("expected UnknownQuestionId");
    } catch (const DataError& e) {
        CHECK(e.code() == ErrorCode::UnknownQuestionId);
    }
}

TEST_CASE("enhanced index: deterministic and record-order insensitive") {
    auto corpus = clarion::testing::make_corpus(60, 10, 4, 40);
    const auto a = build_enhanced_index(corpus.bank, corpus.records);
    const auto b = build_enhanced_index(corpus.bank, corpus.records);
    CHECK(a == b);

    std::mt19937 rng(11);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(corpus.records.begin(), corpus.records.end(), rng);
        CHECK(build_enhanced_index(corpus.bank, corpus.records) == a);
    }

    std::ostringstream sa, sb;
    a.write(sa);
    b.write(sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("enhanced index: term frequencies sum to document length") {
    const auto corpus = clarion::testing::make_corpus(50, 8, 3, 30);
    const auto index = build_enhanced_index(corpus.bank, corpus.records);
    std::ostringstream dump;
    index.dump_tsv(dump);
    std::map<std::string, std::uint64_t> sums;
    std::istringstream in(dump.str());
    std::string term, qid;
    std::uint64_t tf = 0;
    while (in >> term >> qid >> tf) {
        sums[qid] += tf;
    }
    for (const auto& id : index.ids()) {
        CHECK(sums[id] == index.doc_length(id));
    }
}

TEST_CASE("bm25 score: single-document hand evaluation") {
    const QuestionBank bank{{"q1", "farm"}};
    const auto index = build_enhanced_index(bank, {}, Bm25Params{1.2, 0.75});
    CHECK(index.idf("farm") == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
    CHECK(std::abs(index.score(tokenize("farm"), "q1") - 0.287682) < 1e-6);
    CHECK(index.score(tokenize("farm farm farm"), "q1") == index.score(tokenize("farm"), "q1"));
    CHECK(index.score(tokenize("creek"), "q1") == 0.0);
}

TEST_CASE("bm25 score: term-frequency saturation") {
    double prev = 0.0;
    for (int tf = 1; tf <= 10; ++tf) {
        std::string text;
        for (int i = 0; i < tf; ++i) text += "farm ";
        const auto index = build_enhanced_index(QuestionBank{{"q1", text}}, {});
        const double s = index.score(tokenize("farm"), "q1");
        CHECK(s > prev);
        if (tf >= 2 && tf % 2 == 0) {
            std::string half;
            for (int i = 0; i < tf / 2; ++i) half += "farm ";
            const auto half_index = build_enhanced_index(QuestionBank{{"q1", half}}, {});
            const double hs = half_index.score(tokenize("farm"), "q1");
            CHECK(s < 2.0 * hs);
        }
        prev = s;
    }
}

TEST_CASE("search: brute-force oracle equivalence on random corpora") {
    std::mt19937 rng(42);
    const auto& vocab = clarion::testing::vocabulary();
    for (int iter = 0; iter < 100; ++iter) {
        const std::size_t n_docs = 1 + rng() % 50;
        QuestionBank bank;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string text;
            const std::size_t len = 1 + rng() % 8;
            for (std::size_t i = 0; i < len; ++i) text += vocab[rng() % 12] + " ";
            bank.emplace("d" + std::to_string(d), text);
        }
        std::vector<TrainRecord> records;
        for (int r = 0; r < 5; ++r) {
            records.push_back(record("t", vocab[rng() % 12] + " " + vocab[rng() % 12],
                                     "d" + std::to_string(rng() % n_docs), vocab[rng() % 12]));
        }
        std::string query;
        for (int i = 0; i < 3; ++i) query += vocab[rng() % 14] + " ";

        const Bm25Params params{0.5 + (rng() % 20) / 10.0, (rng() % 11) / 10.0};
        const auto index = build_enhanced_index(bank, records, params);
        const auto hits = index.search(query, kUnlimited);
        const auto expected = oracle::bm25_all(enhanced_docs(bank, records), tokenize(query),
                                               params.k1, params.b);
        REQUIRE(hits.size() == expected.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].question_id == expected[i].first);
            CHECK(hits[i].score == doctest::Approx(expected[i].second).epsilon(1e-12));
            // exact agreement with the point scorer
            CHECK(hits[i].score == index.score(tokenize(query), hits[i].question_id));
        }
        // zero score iff no overlap
        for (const auto& id : index.ids()) {
            const double s = index.score(tokenize(query), id);
            CHECK(s >= 0.0);
            const bool listed = std::any_of(hits.begin(), hits.end(),
                                            [&](const SearchHit& h) { return h.question_id == id; });
            CHECK(listed == (s > 0.0));
        }
    }
}

TEST_CASE("search: ordering, ties and truncation") {
    const QuestionBank bank{{"b", "pressure washer parts"},
                            {"a", "pressure washer parts"},
                            {"c", "pressure cooker"},
                            {"d", "garden"}};
    const auto index = build_enhanced_index(bank, {});
    const auto hits = index.search("where to buy pressure washer parts", kUnlimited);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].question_id == "a");
    CHECK(hits[1].question_id == "b");
    CHECK(hits[0].score == hits[1].score);
    CHECK(hits[2].question_id == "c");
    for (std::size_t i = 0; i + 1 < hits.size(); ++i) {
        CHECK(hits[i].score >= hits[i + 1].score);
    }
    CHECK(index.search("where to buy pressure washer parts", 2).size() == 2);
    CHECK(index.search("nothing matches here", 10).empty());
    CHECK(index.search("pressure", 0).empty());
}

TEST_CASE("index file: save/load preserves the index and rejects bad magic") {
    clarion::testing::TempDir dir;
    const auto corpus = clarion::testing::make_corpus(80, 12, 3, 50);
    const auto index = build_enhanced_index(corpus.bank, corpus.records, Bm25Params{0.9, 0.4});
    index.save(dir.file("idx.bin"));
    const auto bytes = clarion::testing::read_file(dir.file("idx.bin"));
    CHECK(bytes.substr(0, 5) == "CLIX1");
    const auto loaded = Bm25Index::load(dir.file("idx.bin"));
    CHECK(loaded == index);
    CHECK(loaded.search(corpus.requests[0], 20) == index.search(corpus.requests[0], 20));

    dir.write("bad.bin", "CLIX2garbage");
    CHECK_THROWS_AS(Bm25Index::load(dir.file("bad.bin")), DataError);
    dir.write("short.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(Bm25Index::load(dir.file("short.bin")), DataError);
}

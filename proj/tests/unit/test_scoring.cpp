#include "doctest.h"

#include <cmath>
#include <random>

#include "clarion/error.hpp"
#include "clarion/scoring.hpp"
#include "support/fixtures.hpp"
#include "support/stub_server.hpp"

using namespace clarion;

namespace {

// Fixed per-question probabilities, for ensemble tests.
class TableScorer final : public Scorer {
public:
    explicit TableScorer(std::map<std::string, double> by_question, std::string name = "table")
        : by_question_(std::move(by_question)), name_(std::move(name)) {}

    std::vector<MultiTaskScore> score(std::span<const ScoreRequestPair> pairs) const override {
        std::vector<MultiTaskScore> out;
        for (const auto& p : pairs) {
            const double v = by_question_.at(p.question_text);
            out.push_back(MultiTaskScore{v, v, v});
        }
        return out;
    }
    std::string name() const override { return name_; }

private:
    std::map<std::string, double> by_question_;
    std::string name_;
};

std::vector<Candidate> candidates_for(const QuestionBank& bank) {
    std::vector<Candidate> out;
    for (const auto& [id, text] : bank) out.push_back(Candidate{id, CandidateSource::bm25, 0.0});
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const DataError& e) {
        return e.code();
    }
    FAIL("expected a DataError");
    return ErrorCode::InvalidConfig;
}

std::vector<std::string> ids(const std::vector<RankedQuestion>& ranked) {
    std::vector<std::string> out;
    for (const auto& r : ranked) out.push_back(r.question_id);
    return out;
}

}  // namespace

TEST_CASE("lexical score is token Jaccard") {
    CHECK(lexical_score({"farm creek", "dog music"}).prob == 0.0);
    CHECK(lexical_score({"Obama family", "family obama!"}).prob == 1.0);
    const auto s = lexical_score({"a b c", "b c d"});
    CHECK(s.prob == 0.5);
    CHECK(s.mrr_pred == 0.5);
    CHECK(s.ndcg_pred == 0.5);
    CHECK(lexical_score({"...", "?"}).prob == 0.0);
    CHECK(lexical_score({"obama family tree", "obama family tree"}).prob >
          lexical_score({"obama family tree", "pot recipe"}).prob);
}

TEST_CASE("score_pairs: order alignment and empty input") {
    LexicalScorer lex;
    const std::vector<ScoreRequestPair> pairs{{"a b", "a b"}, {"a b", "c"}, {"a b c", "b c d"}};
    const auto scores = score_pairs(lex, pairs);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].prob == 1.0);
    CHECK(scores[1].prob == 0.0);
    CHECK(scores[2].prob == 0.5);
    CHECK(code_of([&] { score_pairs(lex, {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("precomputed scorer") {
    clarion::testing::TempDir dir;
    const auto p = dir.write("scores.tsv",
                             "context\tquestion\tprob\tmrr\tndcg\nctx\tq\t0.9\t0.4\t0.2\nctx\tq2\t0.1\t0\t0\n");
    PrecomputedScorer scorer(p);
    const std::vector<ScoreRequestPair> pairs{{"ctx", "q2"}, {"ctx", "q"}};
    const auto scores = score_pairs(scorer, pairs);
    CHECK(scores[1] == MultiTaskScore{0.9, 0.4, 0.2});
    CHECK(scores[0].prob == 0.1);
    const std::vector<ScoreRequestPair> missing{{"ctx", "zzz"}};
    CHECK(code_of([&] { score_pairs(scorer, missing); }) == ErrorCode::MissingPrecomputedScore);

    const auto bad = dir.write("bad.tsv", "ctx\tq\t1.5\t0\t0\n");
    CHECK(code_of([&] { PrecomputedScorer s(bad); }) == ErrorCode::ValueOutOfRange);
}

TEST_CASE("scorer handles") {
    CHECK(parse_scorer_handle("lexical").kind == ScorerKind::lexical);
    const auto pre = parse_scorer_handle("precomputed:/tmp/x.tsv");
    CHECK(pre.kind == ScorerKind::precomputed);
    CHECK(pre.score_file == "/tmp/x.tsv");
    const auto rem = parse_scorer_handle("remote:http://localhost:8080");
    CHECK(rem.kind == ScorerKind::remote);
    CHECK(rem.base_url == "http://localhost:8080");
    CHECK(code_of([] { parse_scorer_handle("remote:"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scorer_handle("electra"); }) == ErrorCode::InvalidConfig);
    CHECK(make_scorer(parse_scorer_handle("lexical"))->name() == "lexical");
}

TEST_CASE("remote scorer speaks the wire protocol") {
    clarion::testing::StubScoringServer server;
    ScorerHandle h;
    h.kind = ScorerKind::remote;
    h.base_url = server.url();
    h.batch_size = 3;
    h.max_in_flight = 2;
    RemoteScorer remote(h);
    LexicalScorer lex;

    std::vector<ScoreRequestPair> pairs;
    const auto& vocab = clarion::testing::vocabulary();
    for (std::size_t i = 0; i < 10; ++i) {
        pairs.push_back({vocab[i] + " " + vocab[i + 1], vocab[i + 1] + " " + vocab[(i * 7) % vocab.size()]});
    }
    const auto got = score_pairs(remote, pairs);
    const auto expected = score_pairs(lex, pairs);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].prob == doctest::Approx(expected[i].prob));
        CHECK(got[i].prob >= 0.0);
        CHECK(got[i].prob <= 1.0);
    }
    CHECK(server.requests() == 4);  // ceil(10 / 3) batches

    server.truncate_responses(true);
    CHECK(code_of([&] { score_pairs(remote, pairs); }) == ErrorCode::RemoteUnavailable);
}

TEST_CASE("remote scorer failures map to RemoteUnavailable") {
    const std::vector<ScoreRequestPair> pairs{{"a", "b"}};
    ScorerHandle h;
    h.kind = ScorerKind::remote;
    h.timeout_seconds = 2.0;

    h.base_url = clarion::testing::dead_url();
    CHECK(code_of([&] { score_pairs(RemoteScorer(h), pairs); }) == ErrorCode::RemoteUnavailable);

    clarion::testing::StubScoringServer unavailable(503);
    h.base_url = unavailable.url();
    CHECK(code_of([&] { score_pairs(RemoteScorer(h), pairs); }) == ErrorCode::RemoteUnavailable);

    clarion::testing::StubScoringServer bad_request(400);
    h.base_url = bad_request.url();
    CHECK(code_of([&] { score_pairs(RemoteScorer(h), pairs); }) == ErrorCode::RemoteUnavailable);
}

TEST_CASE("ensemble_rank: worked examples") {
    const QuestionBank bank{{"q1", "one"}, {"q2", "two"}};
    const auto cands = candidates_for(bank);

    TableScorer single({{"one", 0.2}, {"two", 0.7}});
    const std::vector<const Scorer*> one{&single};
    CHECK(ids(ensemble_rank(one, "ctx", cands, bank)) == std::vector<std::string>{"q2", "q1"});

    TableScorer a({{"one", 0.6}, {"two", 0.3}});
    TableScorer b({{"one", 0.2}, {"two", 0.5}});
    const std::vector<const Scorer*> ab{&a, &b};
    const std::vector<const Scorer*> ba{&b, &a};
    const auto r1 = ensemble_rank(ab, "ctx", cands, bank);
    CHECK(ids(r1) == std::vector<std::string>{"q1", "q2"});
    CHECK(r1 == ensemble_rank(ba, "ctx", cands, bank));

    CHECK(code_of([&] { ensemble_rank(std::vector<const Scorer*>{}, "ctx", cands, bank); }) ==
          ErrorCode::EmptyInput);
    CHECK(code_of([&] { ensemble_rank(one, "ctx", std::vector<Candidate>{}, bank); }) ==
          ErrorCode::EmptyInput);
}

TEST_CASE("ensemble_rank: permutation, shift and single-scorer properties") {
    std::mt19937 rng(21);
    for (int iter = 0; iter < 50; ++iter) {
        QuestionBank bank;
        const std::size_t n = 2 + rng() % 30;
        for (std::size_t i = 0; i < n; ++i) bank.emplace("q" + std::to_string(i), "text" + std::to_string(i));

        // probabilities on a 1/64 grid so sums are exact and ties are common
        std::vector<TableScorer> scorers;
        for (int s = 0; s < 3; ++s) {
            std::map<std::string, double> probs;
            for (const auto& [id, text] : bank) probs[text] = static_cast<double>(rng() % 65) / 64.0;
            scorers.emplace_back(std::move(probs));
        }
        std::vector<const Scorer*> list{&scorers[0], &scorers[1], &scorers[2]};
        auto cands = candidates_for(bank);
        const auto base = ensemble_rank(list, "ctx", cands, bank);

        std::shuffle(list.begin(), list.end(), rng);
        std::shuffle(cands.begin(), cands.end(), rng);
        CHECK(ensemble_rank(list, "ctx", cands, bank) == base);

        std::map<std::string, double> constant;
        for (const auto& [id, text] : bank) constant[text] = 0.5;
        TableScorer flat(constant);
        auto with_flat = list;
        with_flat.push_back(&flat);
        CHECK(ids(ensemble_rank(with_flat, "ctx", cands, bank)) == ids(base));

        // one scorer: same as sorting its probabilities directly
        std::vector<std::pair<double, std::string>> direct;
        const auto single_scores = scorers[0].score([&] {
            std::vector<ScoreRequestPair> p;
            for (const auto& [id, text] : bank) p.push_back({"ctx", text});
            return p;
        }());
        std::size_t i = 0;
        for (const auto& [id, text] : bank) direct.emplace_back(-single_scores[i++].prob, id);
        std::sort(direct.begin(), direct.end());
        const std::vector<const Scorer*> only{&scorers[0]};
        const auto ranked = ensemble_rank(only, "ctx", cands, bank);
        for (std::size_t k = 0; k < direct.size(); ++k) CHECK(ranked[k].question_id == direct[k].second);
    }
}

TEST_CASE("top_k") {
    std::vector<RankedQuestion> ranked;
    for (int i = 0; i < 200; ++i) ranked.push_back(RankedQuestion{"q" + std::to_string(i), 1.0 / (i + 1)});
    CHECK(top_k(ranked).size() == 30);
    CHECK(top_k(std::vector<RankedQuestion>(ranked.begin(), ranked.begin() + 5)).size() == 5);
    const auto best = top_k(ranked, 1);
    REQUIRE(best.size() == 1);
    CHECK(best[0].question_id == "q0");
}

TEST_CASE("multitask loss") {
    const double eps = kLossEpsilon;
    CHECK(multitask_loss(MultiTaskScore{1.0 - eps, 0.5, 0.3}, 1, 0.5, 0.3) ==
          doctest::Approx(-std::log(1.0 - eps)));
    CHECK(multitask_loss(MultiTaskScore{1.0, 0.5, 0.3}, 1, 0.5, 0.3) < 1e-6);

    const double worked = multitask_loss(MultiTaskScore{0.8, 0.6, 0.5}, 1, 0.5, 0.3333);
    CHECK(std::abs(worked - 0.260933) < 1e-6);
    CHECK(worked == doctest::Approx(-std::log(0.8) + 0.1667 * 0.1667 + 0.01).epsilon(1e-12));

    const double p = 0.3, m = 0.2, n = 0.4;
    CHECK(multitask_loss(MultiTaskScore{p, m, n}, 0, 0.0, 0.0) ==
          doctest::Approx(-std::log(1 - p) + m * m + n * n).epsilon(1e-12));

    // clamping keeps the loss finite
    CHECK(std::isfinite(multitask_loss(MultiTaskScore{0.0, 0, 0}, 1, 0, 0)));
    CHECK(std::isfinite(multitask_loss(MultiTaskScore{1.0, 0, 0}, 0, 0, 0)));

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        CHECK(multitask_loss(MultiTaskScore{u(rng), u(rng), u(rng)}, static_cast<int>(rng() % 2),
                             u(rng), u(rng)) > 0.0);
    }

    const std::vector<MultiTaskScore> preds{{0.8, 0.6, 0.5}, {0.3, 0.2, 0.4}};
    const std::vector<MultiTaskTarget> targets{{1, 0.5, 0.3333}, {0, 0.0, 0.0}};
    const double batch = multitask_loss(preds, targets);
    CHECK(batch == doctest::Approx((multitask_loss(preds[0], 1, 0.5, 0.3333) +
                                    multitask_loss(preds[1], 0, 0.0, 0.0)) / 2.0));
}

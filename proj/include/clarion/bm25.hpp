#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clarion/corpus_io.hpp"

namespace clarion {

using TokenList = std::vector<std::string>;

/// Lowercases ASCII letters and splits on every character that is not an
/// ASCII letter or digit. No stemming, no stopword removal.
TokenList tokenize(std::string_view text);

/// Distinct tokens in first-occurrence order.
TokenList distinct_terms(std::span<const std::string> tokens);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    /// Throws InvalidConfig unless k1 > 0 and b in [0, 1].
    void validate() const;

    bool operator==(const Bm25Params&) const = default;
};

struct Posting {
    std::uint32_t doc;  // index into Bm25Index::ids()
    std::uint32_t tf;

    bool operator==(const Posting&) const = default;
};

struct SearchHit {
    std::string question_id;
    double score;

    bool operator==(const SearchHit&) const = default;
};

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

/**
 * Write-once BM25 inverted index over question documents.
 *
 * Document ids are held in lexicographic order and postings are sorted by
 * document, so two builds from the same inputs compare equal and serialize
 * to identical bytes. All const member functions are safe to call
 * concurrently.
 */
class Bm25Index {
public:
    Bm25Index() = default;

    std::size_t doc_count() const noexcept { return ids_.size(); }
    double avgdl() const noexcept { return avgdl_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    /// Token count of the indexed document. Throws UnknownQuestionId.
    std::uint32_t doc_length(std::string_view question_id) const;
    bool contains(std::string_view question_id) const;

    /// Number of documents containing the term.
    std::size_t document_frequency(std::string_view term) const;
    double idf(std::string_view term) const;

    /// BM25 over the distinct query terms. Throws UnknownQuestionId.
    double score(std::span<const std::string> query, std::string_view question_id) const;

    /// Up to k hits with positive score, by descending score then ascending id.
    std::vector<SearchHit> search(std::string_view query_text, std::size_t k) const;

    /// Binary format: magic "CLIX1", then little-endian length-prefixed fields.
    void save(const std::filesystem::path& path) const;
    static Bm25Index load(const std::filesystem::path& path);
    void write(std::ostream& out) const;
    static Bm25Index read(std::istream& in);

    /// `term \t qid \t tf`, terms in lexicographic order.
    void dump_tsv(std::ostream& out) const;

    bool operator==(const Bm25Index&) const = default;

private:
    friend Bm25Index build_enhanced_index(const QuestionBank&, std::span<const TrainRecord>,
                                          const Bm25Params&);

    double term_weight(double idf, std::uint32_t tf, std::uint32_t dl) const;
    std::size_t doc_of(std::string_view question_id) const;
    void finalize();

    std::vector<std::string> ids_;
    std::vector<std::uint32_t> doc_len_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    Bm25Params params_;
    double avgdl_ = 0.0;
};

/**
 * Indexes every bank question as its own tokens followed by the tokens of the
 * initial request, answer and topic description of each training record that
 * asked it. Passing no records yields the plain question-only index.
 * Records whose question_id is not in the bank are ignored.
 */
Bm25Index build_enhanced_index(const QuestionBank& bank, std::span<const TrainRecord> records,
                               const Bm25Params& params = {});

}  // namespace clarion

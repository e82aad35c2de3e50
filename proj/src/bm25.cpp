#include "clarion/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "clarion/error.hpp"

namespace clarion {

namespace {

constexpr char kMagic[5] = {'C', 'L', 'I', 'X', '1'};

bool is_term_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) {
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw DataError(ErrorCode::BadIndexFile, "truncated");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    }
    return v;
}

double get_f64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) {
        throw DataError(ErrorCode::BadIndexFile, "truncated");
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::string get_str(std::istream& in) {
    const auto n = get_u32(in);
    std::string s(n, '\0');
    if (n > 0 && !in.read(s.data(), n)) {
        throw DataError(ErrorCode::BadIndexFile, "truncated");
    }
    return s;
}

}  // namespace

TokenList tokenize(std::string_view text) {
    TokenList tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_term_char(text[i])) {
            ++i;
        }
        std::string token;
        while (i < text.size() && is_term_char(text[i])) {
            token.push_back(lower(text[i]));
            ++i;
        }
        if (!token.empty()) {
            tokens.push_back(std::move(token));
        }
    }
    return tokens;
}

TokenList distinct_terms(std::span<const std::string> tokens) {
    TokenList out;
    std::unordered_set<std::string_view> seen;
    for (const auto& t : tokens) {
        if (seen.insert(t).second) {
            out.push_back(t);
        }
    }
    return out;
}

void Bm25Params::validate() const {
    if (!(k1 > 0.0) || !std::isfinite(k1)) {
        throw DataError(ErrorCode::InvalidConfig, "bm25 k1 must be > 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw DataError(ErrorCode::InvalidConfig, "bm25 b must lie in [0, 1]");
    }
}

Bm25Index build_enhanced_index(const QuestionBank& bank, std::span<const TrainRecord> records,
                               const Bm25Params& params) {
    if (bank.empty()) {
        throw DataError(ErrorCode::EmptyBank, "cannot index an empty question bank");
    }
    params.validate();

    Bm25Index index;
    index.params_ = params;
    index.ids_.reserve(bank.size());
    for (const auto& [id, text] : bank) {
        index.ids_.push_back(id);
    }

    // per-document term counts; std::map keeps term order deterministic
    std::vector<std::map<std::string, std::uint32_t>> counts(bank.size());
    auto add = [&](std::size_t doc, std::string_view text) {
        for (auto& tok : tokenize(text)) {
            ++counts[doc][std::move(tok)];
        }
    };
    for (std::size_t d = 0; d < index.ids_.size(); ++d) {
        add(d, bank.at(index.ids_[d]));
    }
    for (const auto& r : records) {
        const auto it = std::lower_bound(index.ids_.begin(), index.ids_.end(), r.question_id);
        if (it == index.ids_.end() || *it != r.question_id) {
            continue;
        }
        const auto d = static_cast<std::size_t>(it - index.ids_.begin());
        add(d, r.initial_request);
        add(d, r.answer_text);
        add(d, r.topic_desc);
    }

    index.doc_len_.assign(bank.size(), 0);
    for (std::size_t d = 0; d < counts.size(); ++d) {
        for (const auto& [term, tf] : counts[d]) {
            index.postings_[term].push_back(Posting{static_cast<std::uint32_t>(d), tf});
            index.doc_len_[d] += tf;
        }
    }
    index.finalize();
    return index;
}

void Bm25Index::finalize() {
    double total = 0.0;
    for (auto len : doc_len_) {
        total += len;
    }
    avgdl_ = ids_.empty() ? 0.0 : total / static_cast<double>(ids_.size());
}

std::size_t Bm25Index::doc_of(std::string_view question_id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), question_id);
    if (it == ids_.end() || *it != question_id) {
        throw DataError(ErrorCode::UnknownQuestionId, std::string(question_id));
    }
    return static_cast<std::size_t>(it - ids_.begin());
}

bool Bm25Index::contains(std::string_view question_id) const {
    return std::binary_search(ids_.begin(), ids_.end(), question_id);
}

std::uint32_t Bm25Index::doc_length(std::string_view question_id) const {
    return doc_len_[doc_of(question_id)];
}

std::size_t Bm25Index::document_frequency(std::string_view term) const {
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::idf(std::string_view term) const {
    const double n = static_cast<double>(ids_.size());
    const double df = static_cast<double>(document_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::term_weight(double idf, std::uint32_t tf, std::uint32_t dl) const {
    const double k1 = params_.k1;
    const double b = params_.b;
    const double f = static_cast<double>(tf);
    const double norm = 1.0 - b + b * static_cast<double>(dl) / avgdl_;
    return idf * f * (k1 + 1.0) / (f + k1 * norm);
}

double Bm25Index::score(std::span<const std::string> query, std::string_view question_id) const {
    const auto doc = static_cast<std::uint32_t>(doc_of(question_id));
    double total = 0.0;
    for (const auto& term : distinct_terms(query)) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const auto& list = it->second;
        const auto p = std::lower_bound(list.begin(), list.end(), doc,
                                        [](const Posting& a, std::uint32_t d) { return a.doc < d; });
        if (p == list.end() || p->doc != doc) {
            continue;
        }
        total += term_weight(idf(term), p->tf, doc_len_[doc]);
    }
    return total;
}

std::vector<SearchHit> Bm25Index::search(std::string_view query_text, std::size_t k) const {
    std::vector<SearchHit> hits;
    if (k == 0 || ids_.empty()) {
        return hits;
    }
    const auto terms = distinct_terms(tokenize(query_text));
    std::vector<double> acc(ids_.size(), 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<char> seen(ids_.size(), 0);
    // Terms are accumulated in the same order as score(), so each hit's value
    // is bit-identical to a direct score() call.
    for (const auto& term : terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const double w_idf = idf(term);
        for (const auto& p : it->second) {
            acc[p.doc] += term_weight(w_idf, p.tf, doc_len_[p.doc]);
            if (!seen[p.doc]) {
                seen[p.doc] = 1;
                touched.push_back(p.doc);
            }
        }
    }

    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (acc[a] != acc[b]) {
            return acc[a] > acc[b];
        }
        return a < b;  // ids_ is sorted, so doc order is id order
    };
    std::erase_if(touched, [&](std::uint32_t d) { return !(acc[d] > 0.0); });
    const std::size_t n = std::min(k, touched.size());
    std::partial_sort(touched.begin(), touched.begin() + static_cast<std::ptrdiff_t>(n),
                      touched.end(), better);
    hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        hits.push_back(SearchHit{ids_[touched[i]], acc[touched[i]]});
    }
    return hits;
}

void Bm25Index::write(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put_f64(out, params_.k1);
    put_f64(out, params_.b);
    put_u32(out, static_cast<std::uint32_t>(ids_.size()));
    for (std::size_t d = 0; d < ids_.size(); ++d) {
        put_str(out, ids_[d]);
        put_u32(out, doc_len_[d]);
    }
    put_u32(out, static_cast<std::uint32_t>(postings_.size()));
    for (const auto& [term, list] : postings_) {
        put_str(out, term);
        put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            put_u32(out, p.doc);
            put_u32(out, p.tf);
        }
    }
}

Bm25Index Bm25Index::read(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw DataError(ErrorCode::BadIndexFile, "bad magic, expected CLIX1");
    }
    Bm25Index index;
    index.params_.k1 = get_f64(in);
    index.params_.b = get_f64(in);
    const auto n_docs = get_u32(in);
    index.ids_.reserve(n_docs);
    index.doc_len_.reserve(n_docs);
    for (std::uint32_t d = 0; d < n_docs; ++d) {
        index.ids_.push_back(get_str(in));
        index.doc_len_.push_back(get_u32(in));
        if (d > 0 && !(index.ids_[d - 1] < index.ids_[d])) {
            throw DataError(ErrorCode::BadIndexFile, "document ids out of order");
        }
    }
    const auto n_terms = get_u32(in);
    for (std::uint32_t t = 0; t < n_terms; ++t) {
        auto term = get_str(in);
        const auto n_post = get_u32(in);
        std::vector<Posting> list;
        list.reserve(n_post);
        for (std::uint32_t i = 0; i < n_post; ++i) {
            Posting p{get_u32(in), get_u32(in)};
            if (p.doc >= n_docs) {
                throw DataError(ErrorCode::BadIndexFile, "posting refers to unknown document");
            }
            list.push_back(p);
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    index.finalize();
    return index;
}

void Bm25Index::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError(ErrorCode::MissingFile, "cannot write " + path.string());
    }
    write(out);
}

Bm25Index Bm25Index::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(ErrorCode::MissingFile, path.string());
    }
    return read(in);
}

void Bm25Index::dump_tsv(std::ostream& out) const {
    for (const auto& [term, list] : postings_) {
        for (const auto& p : list) {
            out << term << '\t' << ids_[p.doc] << '\t' << p.tf << '\n';
        }
    }
}

}  // namespace clarion

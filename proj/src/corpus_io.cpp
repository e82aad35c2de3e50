#include "clarion/corpus_io.hpp"

#include <array>
#include <fstream>

#include "clarion/error.hpp"
#include "text_file.hpp"

namespace clarion {

namespace {

constexpr std::array<std::string_view, 7> kTrainColumns = {
    "topic_id", "initial_request", "topic_desc", "facet_id",
    "question_id", "question", "answer"};

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError(ErrorCode::MissingFile, "cannot write " + path.string());
    }
    return out;
}

}  // namespace

int Qrels::grade(const std::string& topic, const std::string& id) const {
    const auto t = by_topic.find(topic);
    if (t == by_topic.end()) {
        return 0;
    }
    const auto g = t->second.find(id);
    return g == t->second.end() ? 0 : g->second;
}

std::size_t Qrels::size() const {
    std::size_t n = 0;
    for (const auto& [topic, judged] : by_topic) {
        n += judged.size();
    }
    return n;
}

QuestionBank load_question_bank(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) {
        throw DataError(ErrorCode::MissingColumn, "missing header question_id\\tquestion", 1);
    }
    const auto header = detail::split_tabs(lines.front());
    if (header.size() != 2 || header[0] != "question_id" || header[1] != "question") {
        throw DataError(ErrorCode::MissingColumn, "expected header question_id\\tquestion", 1);
    }

    QuestionBank bank;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto fields = detail::split_tabs(lines[i]);
        if (fields.size() != 2) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 2 columns, got " + std::to_string(fields.size()), line_no);
        }
        auto& id = fields[0];
        if (id.empty()) {
            throw DataError(ErrorCode::MalformedRow, "empty question_id", line_no);
        }
        if (detail::trim(fields[1]).empty()) {
            throw DataError(ErrorCode::EmptyQuestionText, id, line_no);
        }
        if (!bank.emplace(id, std::move(fields[1])).second) {
            throw DataError(ErrorCode::DuplicateId, id, line_no);
        }
    }
    return bank;
}

void write_question_bank(const QuestionBank& bank, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "question_id\tquestion\n";
    for (const auto& [id, text] : bank) {
        detail::check_tsv_field(id, "question_id");
        detail::check_tsv_field(text, "question");
        out << id << '\t' << text << '\n';
    }
}

std::vector<TrainRecord> load_train_records(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) {
        throw DataError(ErrorCode::MissingColumn, "missing header", 1);
    }
    const auto header = detail::split_tabs(lines.front());
    for (std::size_t c = 0; c < kTrainColumns.size(); ++c) {
        if (c >= header.size() || header[c] != kTrainColumns[c]) {
            throw DataError(ErrorCode::MissingColumn, std::string(kTrainColumns[c]), 1);
        }
    }
    if (header.size() != kTrainColumns.size()) {
        throw DataError(ErrorCode::MalformedRow,
                        "header has " + std::to_string(header.size()) + " columns", 1);
    }

    std::vector<TrainRecord> records;
    records.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto f = detail::split_tabs(lines[i]);
        if (f.size() != kTrainColumns.size()) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 7 columns, got " + std::to_string(f.size()), line_no);
        }
        TrainRecord r{std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3]),
                      std::move(f[4]), std::move(f[5]), std::move(f[6])};
        if (r.topic_id.empty() || r.facet_id.empty() || r.question_id.empty()) {
            throw DataError(ErrorCode::MalformedRow, "empty topic_id, facet_id or question_id",
                            line_no);
        }
        if (detail::trim(r.initial_request).empty()) {
            throw DataError(ErrorCode::MalformedRow, "empty initial_request", line_no);
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_train_records(const std::vector<TrainRecord>& records,
                         const std::filesystem::path& path) {
    auto out = open_for_write(path);
    for (std::size_t c = 0; c < kTrainColumns.size(); ++c) {
        out << (c ? "\t" : "") << kTrainColumns[c];
    }
    out << '\n';
    for (const auto& r : records) {
        for (const auto* field : {&r.topic_id, &r.initial_request, &r.topic_desc, &r.facet_id,
                                  &r.question_id, &r.question_text, &r.answer_text}) {
            detail::check_tsv_field(*field, "train field");
        }
        out << r.topic_id << '\t' << r.initial_request << '\t' << r.topic_desc << '\t'
            << r.facet_id << '\t' << r.question_id << '\t' << r.question_text << '\t'
            << r.answer_text << '\n';
    }
}

Qrels load_qrels(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    Qrels qrels;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto f = detail::split_whitespace(lines[i]);
        if (f.empty()) {
            continue;
        }
        if (f.size() != 4) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 4 columns, got " + std::to_string(f.size()), line_no);
        }
        long long grade = 0;
        if (!detail::parse_int(f[3], grade)) {
            throw DataError(ErrorCode::MalformedRow, "grade is not an integer: " + f[3], line_no);
        }
        if (grade < 0) {
            throw DataError(ErrorCode::ValueOutOfRange, f[3], line_no);
        }
        auto& judged = qrels.by_topic[f[0]];
        if (!judged.emplace(f[2], static_cast<int>(grade)).second) {
            throw DataError(ErrorCode::DuplicateId, f[0] + " " + f[2], line_no);
        }
    }
    return qrels;
}

FacetScores load_facet_scores(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    FacetScores scores;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty() || (i == 0 && lines[i].rfind("topic_id\t", 0) == 0)) {
            continue;
        }
        const auto f = detail::split_tabs(lines[i]);
        if (f.size() != 5) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 5 columns, got " + std::to_string(f.size()), line_no);
        }
        double value = 0.0;
        if (!detail::parse_double(f[4], value)) {
            throw DataError(ErrorCode::MalformedRow, "value is not a number: " + f[4], line_no);
        }
        if (!(value >= 0.0 && value <= 1.0)) {
            throw DataError(ErrorCode::ValueOutOfRange, f[4], line_no);
        }
        auto& m = scores[FacetKey{f[0], f[1], f[2]}];
        std::optional<double>* slot = nullptr;
        if (f[3] == "MRR100") {
            slot = &m.mrr100;
        } else if (f[3] == "NDCG3") {
            slot = &m.ndcg3;
        } else if (f[3] == "P5") {
            slot = &m.p5;
        } else {
            throw DataError(ErrorCode::UnknownMetric, f[3], line_no);
        }
        if (slot->has_value()) {
            throw DataError(ErrorCode::DuplicateId, f[0] + "/" + f[1] + "/" + f[2] + " " + f[3],
                            line_no);
        }
        *slot = value;
    }
    return scores;
}

}  // namespace clarion

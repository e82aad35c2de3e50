#include "clarion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "clarion/error.hpp"
#include "text_file.hpp"

namespace clarion {

namespace {

const std::vector<RankedId>& ranking_for(const Run& run, const std::string& topic) {
    static const std::vector<RankedId> empty;
    const auto it = run.by_topic.find(topic);
    return it == run.by_topic.end() ? empty : it->second;
}

std::size_t relevant_count(const std::map<std::string, int>& judged) {
    return static_cast<std::size_t>(std::count_if(
        judged.begin(), judged.end(), [](const auto& kv) { return kv.second > 0; }));
}

int grade_in(const std::map<std::string, int>& judged, const std::string& id) {
    const auto it = judged.find(id);
    return it == judged.end() ? 0 : it->second;
}

std::size_t relevant_in_top(const std::vector<RankedId>& ranking,
                            const std::map<std::string, int>& judged, std::size_t k) {
    const auto n = std::min(k, ranking.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        hits += grade_in(judged, ranking[i].id) > 0 ? 1 : 0;
    }
    return hits;
}

double macro(const std::map<std::string, double>& per_topic) {
    if (per_topic.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [topic, v] : per_topic) {
        sum += v;
    }
    return sum / static_cast<double>(per_topic.size());
}

void require_positive(std::size_t k) {
    if (k == 0) {
        throw DataError(ErrorCode::UnknownMetric, "cutoff must be >= 1");
    }
}

}  // namespace

Run load_run(const std::filesystem::path& path) {
    struct Row {
        RankedId hit;
        long long rank;
    };
    const auto lines = detail::read_lines(path);
    Run run;
    std::map<std::string, std::vector<Row>> rows;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto f = detail::split_whitespace(lines[i]);
        if (f.empty()) {
            continue;
        }
        if (f.size() != 6) {
            throw DataError(ErrorCode::MalformedRow,
                            "expected 6 columns, got " + std::to_string(f.size()), line_no);
        }
        long long rank = 0;
        double score = 0.0;
        if (!detail::parse_int(f[3], rank)) {
            throw DataError(ErrorCode::MalformedRow, "rank is not an integer: " + f[3], line_no);
        }
        if (!detail::parse_double(f[4], score) || !std::isfinite(score)) {
            throw DataError(ErrorCode::MalformedRow, "score is not a number: " + f[4], line_no);
        }
        if (!seen.emplace(f[0], f[2]).second) {
            throw DataError(ErrorCode::DuplicateId, f[0] + " " + f[2], line_no);
        }
        run.name = f[5];
        rows[f[0]].push_back(Row{RankedId{f[2], score}, rank});
    }
    for (auto& [topic, list] : rows) {
        std::stable_sort(list.begin(), list.end(), [](const Row& a, const Row& b) {
            if (a.hit.score != b.hit.score) {
                return a.hit.score > b.hit.score;
            }
            return a.rank < b.rank;
        });
        auto& out = run.by_topic[topic];
        out.reserve(list.size());
        for (auto& r : list) {
            out.push_back(std::move(r.hit));
        }
    }
    return run;
}

void write_run(const Run& run, std::ostream& out) {
    for (const auto& [topic, list] : run.by_topic) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            fmt::print(out, "{} Q0 {} {} {} {}\n", topic, list[i].id, i + 1, list[i].score,
                       run.name);
        }
    }
}

std::map<std::string, double> mrr_per_topic(const Run& run, const Qrels& qrels,
                                            std::size_t cutoff) {
    require_positive(cutoff);
    std::map<std::string, double> out;
    for (const auto& [topic, judged] : qrels.by_topic) {
        const auto& ranking = ranking_for(run, topic);
        const auto n = std::min(cutoff, ranking.size());
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (grade_in(judged, ranking[i].id) > 0) {
                rr = 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
        out[topic] = rr;
    }
    return out;
}

std::map<std::string, double> precision_per_topic(const Run& run, const Qrels& qrels,
                                                  std::size_t k) {
    require_positive(k);
    std::map<std::string, double> out;
    for (const auto& [topic, judged] : qrels.by_topic) {
        out[topic] = static_cast<double>(relevant_in_top(ranking_for(run, topic), judged, k)) /
                     static_cast<double>(k);
    }
    return out;
}

std::map<std::string, double> ndcg_per_topic(const Run& run, const Qrels& qrels, std::size_t k) {
    require_positive(k);
    std::map<std::string, double> out;
    for (const auto& [topic, judged] : qrels.by_topic) {
        const auto& ranking = ranking_for(run, topic);
        double dcg = 0.0;
        for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
            dcg += grade_in(judged, ranking[i].id) / std::log2(static_cast<double>(i) + 2.0);
        }
        std::vector<int> grades;
        for (const auto& [id, g] : judged) {
            if (g > 0) {
                grades.push_back(g);
            }
        }
        std::sort(grades.begin(), grades.end(), std::greater<>());
        double idcg = 0.0;
        for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
            idcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
        }
        out[topic] = idcg > 0.0 ? dcg / idcg : 0.0;
    }
    return out;
}

std::map<std::string, double> recall_per_topic(const Run& run, const Qrels& qrels,
                                               std::size_t k) {
    require_positive(k);
    std::map<std::string, double> out;
    for (const auto& [topic, judged] : qrels.by_topic) {
        const auto total = relevant_count(judged);
        if (total == 0) {
            continue;
        }
        out[topic] = static_cast<double>(relevant_in_top(ranking_for(run, topic), judged, k)) /
                     static_cast<double>(total);
    }
    return out;
}

double mrr(const Run& run, const Qrels& qrels, std::size_t cutoff) {
    return macro(mrr_per_topic(run, qrels, cutoff));
}

double precision_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
    return macro(precision_per_topic(run, qrels, k));
}

double ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
    return macro(ndcg_per_topic(run, qrels, k));
}

double recall_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
    return macro(recall_per_topic(run, qrels, k));
}

std::string MetricSpec::label() const {
    switch (kind) {
        case Kind::mrr: return "mrr@" + std::to_string(k);
        case Kind::precision: return "p@" + std::to_string(k);
        case Kind::ndcg: return "ndcg@" + std::to_string(k);
        case Kind::recall: return "recall@" + std::to_string(k);
    }
    return "?";
}

MetricSpec parse_metric_spec(std::string_view text) {
    const auto at = text.find('@');
    if (at == std::string_view::npos) {
        throw DataError(ErrorCode::UnknownMetric, std::string(text));
    }
    std::string name;
    for (const char c : text.substr(0, at)) {
        name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    long long k = 0;
    if (!detail::parse_int(text.substr(at + 1), k) || k < 1) {
        throw DataError(ErrorCode::UnknownMetric, std::string(text));
    }
    MetricSpec spec;
    spec.k = static_cast<std::size_t>(k);
    if (name == "mrr") {
        spec.kind = MetricSpec::Kind::mrr;
    } else if (name == "p" || name == "precision") {
        spec.kind = MetricSpec::Kind::precision;
    } else if (name == "ndcg") {
        spec.kind = MetricSpec::Kind::ndcg;
    } else if (name == "recall" || name == "r") {
        spec.kind = MetricSpec::Kind::recall;
    } else {
        throw DataError(ErrorCode::UnknownMetric, std::string(text));
    }
    return spec;
}

void MetricReport::write_tsv(std::ostream& out) const {
    out << "metric\ttopic\tvalue\n";
    for (const auto& r : results) {
        const auto label = r.spec.label();
        for (const auto& [topic, v] : r.per_topic) {
            fmt::print(out, "{}\t{}\t{:.6f}\n", label, topic, v);
        }
        fmt::print(out, "{}\tall\t{:.6f}\n", label, r.mean);
    }
}

const MetricResult* MetricReport::find(std::string_view label) const {
    for (const auto& r : results) {
        if (r.spec.label() == label) {
            return &r;
        }
    }
    return nullptr;
}

MetricReport evaluate(const Run& run, const Qrels& qrels, std::span<const MetricSpec> specs) {
    MetricReport report;
    for (const auto& spec : specs) {
        MetricResult r;
        r.spec = spec;
        switch (spec.kind) {
            case MetricSpec::Kind::mrr: r.per_topic = mrr_per_topic(run, qrels, spec.k); break;
            case MetricSpec::Kind::precision:
                r.per_topic = precision_per_topic(run, qrels, spec.k);
                break;
            case MetricSpec::Kind::ndcg: r.per_topic = ndcg_per_topic(run, qrels, spec.k); break;
            case MetricSpec::Kind::recall:
                r.per_topic = recall_per_topic(run, qrels, spec.k);
                break;
        }
        r.mean = macro(r.per_topic);
        report.results.push_back(std::move(r));
    }
    return report;
}

MetricReport evaluate_run(const std::filesystem::path& run_path,
                          const std::filesystem::path& qrels_path,
                          std::span<const MetricSpec> specs) {
    return evaluate(load_run(run_path), load_qrels(qrels_path), specs);
}

}  // namespace clarion

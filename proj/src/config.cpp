#include "clarion/config.hpp"

#include "clarion/error.hpp"
#include "text_file.hpp"

namespace clarion {

namespace {

std::size_t to_count(std::string_view key, std::string_view value) {
    long long v = 0;
    if (!detail::parse_int(value, v) || v < 0) {
        throw DataError(ErrorCode::InvalidConfig,
                        std::string(key) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

double to_real(std::string_view key, std::string_view value) {
    double v = 0.0;
    if (!detail::parse_double(value, v)) {
        throw DataError(ErrorCode::InvalidConfig, std::string(key) + " must be a number");
    }
    return v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw DataError(ErrorCode::InvalidConfig, std::string(key) + " must be true or false");
}

std::vector<std::string> to_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto end = value.find(',', start);
        if (end == std::string_view::npos) {
            end = value.size();
        }
        const auto item = detail::trim(value.substr(start, end - start));
        if (!item.empty()) {
            out.emplace_back(item);
        }
        start = end + 1;
    }
    return out;
}

}  // namespace

void Config::set(std::string_view key, std::string_view value) {
    if (key == "bank") bank = std::string(value);
    else if (key == "train") train = std::string(value);
    else if (key == "qrels") qrels = std::string(value);
    else if (key == "scores") scores = std::string(value);
    else if (key == "index") index = std::string(value);
    else if (key == "bm25.k1") bm25.k1 = to_real(key, value);
    else if (key == "bm25.b") bm25.b = to_real(key, value);
    else if (key == "recall.n_bm25") recall.n_bm25 = to_count(key, value);
    else if (key == "recall.n_short") recall.n_short = to_count(key, value);
    else if (key == "dataset.seed") dataset_seed = to_count(key, value);
    else if (key == "dataset.n_bm25") dataset_n_bm25 = to_count(key, value);
    else if (key == "dataset.n_random") dataset_n_random = to_count(key, value);
    else if (key == "scorers") scorers = to_list(value);
    else if (key == "classifier") classifier = std::string(value);
    else if (key == "classifier.fallback") classifier_fallback = to_bool(key, value);
    else if (key == "remote.max_in_flight") remote_max_in_flight = to_count(key, value);
    else if (key == "remote.batch_size") remote_batch_size = to_count(key, value);
    else if (key == "remote.timeout") remote_timeout = to_real(key, value);
    else if (key == "turn_limit") turn_limit = to_count(key, value);
    else if (key == "top_k") top_k = to_count(key, value);
    else if (key == "metrics") metrics = to_list(value);
    else throw DataError(ErrorCode::InvalidConfig, "unknown key: " + std::string(key));
}

void Config::validate() const {
    bm25.validate();
    if (scorers.empty()) {
        throw DataError(ErrorCode::InvalidConfig, "at least one scorer is required");
    }
    for (const auto& s : scorers) {
        parse_scorer_handle(s);
    }
    if (classifier != "heuristic" && classifier.rfind("remote:", 0) != 0) {
        throw DataError(ErrorCode::InvalidConfig, "classifier must be heuristic or remote:<url>");
    }
    if (top_k == 0) {
        throw DataError(ErrorCode::InvalidConfig, "top_k must be >= 1");
    }
    if (remote_max_in_flight == 0 || remote_batch_size == 0 || !(remote_timeout > 0.0)) {
        throw DataError(ErrorCode::InvalidConfig, "remote settings must be positive");
    }
    for (const auto& m : metrics) {
        try {
            parse_metric_spec(m);
        } catch (const DataError&) {
            throw DataError(ErrorCode::InvalidConfig, "bad metric: " + m);
        }
    }
}

std::vector<ScorerHandle> Config::scorer_handles(std::string_view url_override) const {
    std::vector<ScorerHandle> out;
    for (const auto& s : scorers) {
        auto h = parse_scorer_handle(s);
        if (h.kind == ScorerKind::remote) {
            if (!url_override.empty()) {
                h.base_url = std::string(url_override);
            }
            h.max_in_flight = remote_max_in_flight;
            h.batch_size = remote_batch_size;
            h.timeout_seconds = remote_timeout;
        }
        out.push_back(std::move(h));
    }
    return out;
}

Config load_config(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    Config cfg;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw DataError(ErrorCode::InvalidConfig, "expected key=value", i + 1);
        }
        try {
            cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const DataError& e) {
            throw DataError(ErrorCode::InvalidConfig, e.detail(), i + 1);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace clarion

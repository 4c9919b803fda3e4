#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/text/unicode.hpp"

namespace rhetorik::eval {

struct GroundTruthRecord {
    std::string question;
    std::string ground_truth;
    std::vector<std::string> reference_contexts;
};

struct EvalRecord {
    GroundTruthRecord truth;
    std::string answer;
    std::vector<std::string> retrieved_contexts;
};

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::vector<std::string> nfc_all(const std::vector<std::string>& xs) {
    std::vector<std::string> out;
    for (const auto& x : xs) {
        out.push_back(text::nfc(x));
    }
    return out;
}

template <class F>
void for_each_json_line(std::istream& in, F&& f) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            f(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(number, e.what());
        } catch (const std::invalid_argument& e) {
            throw DatasetError(number, e.what());
        }
    }
}

inline GroundTruthRecord truth_from_json(const nlohmann::json& j) {
    GroundTruthRecord r{text::nfc(j.at("question").get<std::string>()),
                        text::nfc(j.at("ground_truth").get<std::string>()),
                        nfc_all(j.value("contexts", std::vector<std::string>{}))};
    if (text::trim(r.question).empty() || text::trim(r.ground_truth).empty()) {
        throw std::invalid_argument("question and ground_truth must be non-empty");
    }
    return r;
}

}  // namespace detail

inline nlohmann::json to_json(const GroundTruthRecord& r) {
    return {{"question", r.question}, {"ground_truth", r.ground_truth}, {"contexts", r.reference_contexts}};
}

inline nlohmann::json to_json(const EvalRecord& r) {
    auto j = to_json(r.truth);
    j["answer"] = r.answer;
    j["retrieved_contexts"] = r.retrieved_contexts;
    return j;
}

/// JSON Lines with question, ground_truth, contexts. Text is NFC-normalized on read.
inline std::vector<GroundTruthRecord> read_ground_truth(std::istream& in) {
    std::vector<GroundTruthRecord> out;
    detail::for_each_json_line(in, [&](const nlohmann::json& j) { out.push_back(detail::truth_from_json(j)); });
    return out;
}

/// Ground-truth fields plus answer and retrieved_contexts.
inline std::vector<EvalRecord> read_answers(std::istream& in) {
    std::vector<EvalRecord> out;
    detail::for_each_json_line(in, [&](const nlohmann::json& j) {
        out.push_back(EvalRecord{detail::truth_from_json(j), text::nfc(j.at("answer").get<std::string>()),
                                 detail::nfc_all(j.at("retrieved_contexts").get<std::vector<std::string>>())});
    });
    return out;
}

template <class Record>
void write_jsonl(std::ostream& out, const std::vector<Record>& records) {
    for (const auto& r : records) {
        out << to_json(r).dump() << '\n';
    }
}

}  // namespace rhetorik::eval

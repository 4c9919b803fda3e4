#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <nlohmann/json.hpp>

#include "rhetorik/net/chat.hpp"
#include "rhetorik/net/transport.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::annot {

inline constexpr std::size_t kMinTextLength = 10;
inline constexpr std::size_t kMaxTextLength = 1000;

enum class Verdict { accept, warn };

inline std::string_view verdict_name(Verdict v) { return v == Verdict::accept ? "accept" : "warn"; }

struct VerificationReport {
    bool language_ok = false;
    bool length_ok = false;
    bool grammar_ok = false;
    /// Set only when a basic check failed and the judge answered.
    std::optional<bool> gibberish_flag;
    Verdict overall = Verdict::accept;
    std::string detected_language;
    std::optional<std::string> note;
};

class LanguageDetector {
public:
    virtual ~LanguageDetector() = default;
    /// ISO 639-1 code, or an empty string when undecidable.
    virtual std::string detect(std::string_view text) = 0;
};

class GrammarChecker {
public:
    virtual ~GrammarChecker() = default;
    virtual bool check(std::string_view text) = 0;
};

class GibberishJudge {
public:
    virtual ~GibberishJudge() = default;
    /// Throws net::TransportError when the judge cannot be reached.
    virtual bool is_gibberish(std::string_view text) = 0;
};

/// Language, length and grammar checks; the judge is consulted only when one of them fails.
inline VerificationReport verify_text(std::string_view raw, LanguageDetector& detector, GrammarChecker& grammar,
                                      GibberishJudge& judge) {
    VerificationReport report;
    const std::string text = text::nfc(raw);
    const bool blank = text::trim(text).empty();
    const std::size_t length = text::code_point_count(text);
    report.length_ok = length >= kMinTextLength && length <= kMaxTextLength;

    std::string notes;
    auto add_note = [&](const std::string& n) {
        if (!notes.empty()) {
            notes += "; ";
        }
        notes += n;
    };

    if (!blank) {
        try {
            report.detected_language = detector.detect(text);
        } catch (const std::exception& e) {
            add_note(std::string("language detector failed: ") + e.what());
        }
        try {
            report.grammar_ok = grammar.check(text);
        } catch (const std::exception& e) {
            add_note(std::string("grammar checker failed: ") + e.what());
        }
    }
    report.language_ok = report.detected_language == "de";

    if (!(report.language_ok && report.length_ok && report.grammar_ok)) {
        try {
            report.gibberish_flag = judge.is_gibberish(text);
        } catch (const net::TransportError& e) {
            // Fail open to human review: warn without a verdict.
            add_note(std::string("gibberish judge unavailable: ") + e.what());
            report.overall = Verdict::warn;
        }
    }
    if (report.gibberish_flag == true) {
        report.overall = Verdict::warn;
    }
    if (!notes.empty()) {
        report.note = notes;
    }
    return report;
}

inline nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json j{{"language_ok", r.language_ok},
                     {"length_ok", r.length_ok},
                     {"grammar_ok", r.grammar_ok},
                     {"gibberish_flag", r.gibberish_flag ? nlohmann::json(*r.gibberish_flag) : nlohmann::json()},
                     {"overall", verdict_name(r.overall)},
                     {"detected_language", r.detected_language}};
    if (r.note) {
        j["note"] = *r.note;
    }
    return j;
}

/// Stopword-profile detector for German vs. English. Returns "de", "en" or "".
class StopwordLanguageDetector : public LanguageDetector {
public:
    std::string detect(std::string_view text) override {
        static const std::unordered_set<std::string> german = {
            "der", "die", "das", "und", "ist", "nicht", "ein", "eine", "ich", "du", "er", "sie", "es", "wir",
            "ihr", "mit", "auf", "für", "von", "zu", "den", "dem", "des", "im", "in", "auch", "sich", "wie",
            "was", "wer", "wo", "noch", "nur", "so", "aber", "oder", "als", "am", "an", "bei", "nach", "um",
            "aus", "kein", "keine", "sind", "war", "hat", "haben", "wird", "werden", "mein", "dein", "sein",
            "ja", "nein", "doch", "schon", "sehr", "hier", "dort", "wenn", "dass", "weil", "über", "unter"};
        static const std::unordered_set<std::string> english = {
            "the", "and", "is", "not", "a", "an", "i", "you", "he", "she", "it", "we", "they", "with", "on",
            "for", "of", "to", "in", "also", "how", "what", "who", "where", "only", "but", "or", "as", "at",
            "by", "after", "from", "no", "are", "was", "has", "have", "will", "my", "your", "his", "her",
            "yes", "very", "here", "there", "if", "that", "because", "this", "be", "do", "does"};
        std::size_t de = 0;
        std::size_t en = 0;
        for (const auto& w : text::letter_runs(text)) {
            de += german.contains(w) ? 1 : 0;
            en += english.contains(w) ? 1 : 0;
            if (w.find("\xC3\xA4") != std::string::npos || w.find("\xC3\xB6") != std::string::npos ||
                w.find("\xC3\xBC") != std::string::npos || w.find("\xC3\x9F") != std::string::npos) {
                ++de;
            }
        }
        if (de == 0 && en == 0) {
            return "";
        }
        return de >= en ? "de" : "en";
    }
};

/// Accepts every text; used when no grammar service is configured.
class PermissiveGrammarChecker : public GrammarChecker {
public:
    bool check(std::string_view) override { return true; }
};

/// LanguageTool-compatible `/v2/check` endpoint; the text passes when no match is reported.
class LanguageToolChecker : public GrammarChecker {
public:
    LanguageToolChecker(std::shared_ptr<net::Transport> transport, std::string url, std::string language = "de-DE")
        : transport_(std::move(transport)), url_(std::move(url)), language_(std::move(language)) {}

    bool check(std::string_view text) override {
        const std::string body =
            "language=" + httplib::detail::encode_query_param(language_) + "&text=" + httplib::detail::encode_query_param(std::string(text));
        auto response = transport_->post({url_, body, "application/x-www-form-urlencoded", {}});
        try {
            return nlohmann::json::parse(response.body).at("matches").empty();
        } catch (const nlohmann::json::exception& e) {
            throw net::TransportError(std::string("malformed grammar response: ") + e.what());
        }
    }

private:
    std::shared_ptr<net::Transport> transport_;
    std::string url_;
    std::string language_;
};

inline constexpr std::string_view kGibberishPrompt =
    "Is the following text gibberish, i.e. meaningless or random characters rather than natural "
    "language? Answer with a single word: yes or no.\n\nText: ";

/// Asks a chat model for a single-token yes/no; anything but "yes" counts as not gibberish.
class ChatGibberishJudge : public GibberishJudge {
public:
    explicit ChatGibberishJudge(std::shared_ptr<net::ChatModel> model) : model_(std::move(model)) {}

    bool is_gibberish(std::string_view text) override {
        net::ChatRequest request;
        request.temperature = 0.0;
        request.messages.push_back({"user", std::string(kGibberishPrompt) + std::string(text)});
        const auto answer = text::letter_runs(model_->complete(request));
        return !answer.empty() && answer.front() == "yes";
    }

private:
    std::shared_ptr<net::ChatModel> model_;
};

}  // namespace rhetorik::annot

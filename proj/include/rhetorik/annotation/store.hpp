#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <sqlite3.h>
#include <nlohmann/json.hpp>

#include "rhetorik/annotation/repetition.hpp"
#include "rhetorik/annotation/verification.hpp"
#include "rhetorik/net/transport.hpp"
#include "rhetorik/ontology/figures.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::annot {

struct ExampleRecord {
    std::int64_t id = 0;
    std::string text;
    std::optional<std::string> context;
    std::optional<std::string> author;
    std::optional<std::string> source;
    bool is_invalid = false;
    bool is_harmful = false;
    std::string created_at;
};

struct AnnotationRecord {
    std::int64_t id = 0;
    std::int64_t example_id = 0;
    onto::Iri figure_iri;
    bool is_verified = false;
    std::string created_at;
};

struct NewExample {
    std::string text;
    std::optional<std::string> context;
    std::optional<std::string> author;
    std::optional<std::string> source;
    /// The user insisted on submitting despite a warn verdict.
    bool confirmed = false;
};

struct FlagUpdate {
    std::optional<std::int64_t> example_id;
    std::optional<bool> is_harmful;
    std::optional<bool> is_invalid;
    std::optional<std::int64_t> annotation_id;
    std::optional<bool> is_verified;
};

struct FlagResult {
    std::optional<ExampleRecord> example;
    std::optional<AnnotationRecord> annotation;
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProvenanceRequired : public std::invalid_argument {
public:
    ProvenanceRequired() : std::invalid_argument("author or source required") {}
};

class ConfirmationRequired : public std::runtime_error {
public:
    explicit ConfirmationRequired(VerificationReport report)
        : std::runtime_error("verification warned; confirmation required"), report_(std::move(report)) {}
    [[nodiscard]] const VerificationReport& report() const { return report_; }

private:
    VerificationReport report_;
};

class NoEligibleExample : public std::runtime_error {
public:
    NoEligibleExample() : std::runtime_error("no example eligible for annotation") {}
};

class UnknownRecord : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class RepetitionCheckFailed : public std::invalid_argument {
public:
    explicit RepetitionCheckFailed(std::vector<onto::Iri> figures)
        : std::invalid_argument("perfect lexical repetition requires a word repeated in the same form"),
          figures_(std::move(figures)) {}
    [[nodiscard]] const std::vector<onto::Iri>& figures() const { return figures_; }

private:
    std::vector<onto::Iri> figures_;
};

class DuplicateAnnotation : public std::runtime_error {
public:
    DuplicateAnnotation(std::int64_t example_id, const onto::Iri& figure)
        : std::runtime_error("example " + std::to_string(example_id) + " already annotated with " + figure.value),
          example_id_(example_id),
          figure_(figure) {}
    [[nodiscard]] std::int64_t example_id() const { return example_id_; }
    [[nodiscard]] const onto::Iri& figure() const { return figure_; }

private:
    std::int64_t example_id_;
    onto::Iri figure_;
};

/// Batch harmful-content scan hook; no classifier ships with the library.
class HarmfulClassifier {
public:
    virtual ~HarmfulClassifier() = default;
    virtual bool is_harmful(const ExampleRecord& example) = 0;
};

namespace detail {

struct DbCloser {
    void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
    void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};

class Statement {
public:
    Statement(sqlite3* db, std::string_view sql) : db_(db) {
        sqlite3_stmt* raw = nullptr;
        if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, nullptr) != SQLITE_OK) {
            throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db));
        }
        stmt_.reset(raw);
    }

    Statement& bind(int index, std::int64_t value) {
        check(sqlite3_bind_int64(stmt_.get(), index, value));
        return *this;
    }
    Statement& bind(int index, bool value) { return bind(index, static_cast<std::int64_t>(value ? 1 : 0)); }
    Statement& bind(int index, const std::string& value) {
        check(sqlite3_bind_text(stmt_.get(), index, value.data(), static_cast<int>(value.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int index, const std::optional<std::string>& value) {
        if (value) {
            return bind(index, *value);
        }
        check(sqlite3_bind_null(stmt_.get(), index));
        return *this;
    }

    /// True while a row is available.
    bool step() {
        const int rc = sqlite3_step(stmt_.get());
        if (rc == SQLITE_ROW) {
            return true;
        }
        if (rc == SQLITE_DONE) {
            return false;
        }
        throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    [[nodiscard]] std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_.get(), col); }
    [[nodiscard]] bool boolean(int col) const { return integer(col) != 0; }
    [[nodiscard]] std::optional<std::string> optional_text(int col) const {
        if (sqlite3_column_type(stmt_.get(), col) == SQLITE_NULL) {
            return std::nullopt;
        }
        const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_.get(), col));
        return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_.get(), col)));
    }
    [[nodiscard]] std::string text(int col) const { return optional_text(col).value_or(""); }

private:
    void check(int rc) const {
        if (rc != SQLITE_OK) {
            throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
        }
    }

    sqlite3* db_;
    std::unique_ptr<sqlite3_stmt, StmtFinalizer> stmt_;
};

inline constexpr std::string_view kSchema = R"sql(
CREATE TABLE IF NOT EXISTS Example (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  text TEXT NOT NULL,
  context TEXT,
  author TEXT,
  source TEXT,
  is_invalid INTEGER NOT NULL DEFAULT 0,
  is_harmful INTEGER NOT NULL DEFAULT 0,
  created_at TEXT NOT NULL,
  CHECK (coalesce(author, '') <> '' OR coalesce(source, '') <> '')
);
CREATE TABLE IF NOT EXISTS Figure (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  name TEXT NOT NULL,
  iri TEXT NOT NULL UNIQUE
);
CREATE TABLE IF NOT EXISTS Annotation (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  example_id INTEGER NOT NULL REFERENCES Example(id),
  figure_id INTEGER NOT NULL REFERENCES Figure(id),
  is_verified INTEGER NOT NULL DEFAULT 0,
  created_at TEXT NOT NULL,
  UNIQUE (example_id, figure_id)
);
CREATE TRIGGER IF NOT EXISTS example_append_only BEFORE DELETE ON Example
BEGIN SELECT RAISE(ABORT, 'examples are append-only'); END;
CREATE TRIGGER IF NOT EXISTS annotation_append_only BEFORE DELETE ON Annotation
BEGIN SELECT RAISE(ABORT, 'annotations are append-only'); END;
)sql";

inline constexpr std::string_view kExampleColumns =
    "id, text, context, author, source, is_invalid, is_harmful, created_at";
inline constexpr std::string_view kAnnotationColumns =
    "a.id, a.example_id, f.iri, a.is_verified, a.created_at";

inline bool has_content(const std::optional<std::string>& s) { return s && !text::trim(*s).empty(); }

inline std::optional<std::string> normalized(const std::optional<std::string>& s) {
    if (!has_content(s)) {
        return std::nullopt;
    }
    return text::nfc(text::trim(*s));
}

}  // namespace detail

/// Append-only example/annotation store over one SQLite file.
/// Writers are serialized; readers share the lock and only see committed state.
class AnnotationStore {
public:
    /// `path` may be ":memory:".
    explicit AnnotationStore(const std::string& path) {
        sqlite3* raw = nullptr;
        const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
        if (sqlite3_open_v2(path.c_str(), &raw, flags, nullptr) != SQLITE_OK) {
            std::string message = raw != nullptr ? sqlite3_errmsg(raw) : "out of memory";
            sqlite3_close_v2(raw);
            throw StoreError("cannot open " + path + ": " + message);
        }
        db_.reset(raw);
        sqlite3_busy_timeout(db_.get(), 5000);
        exec("PRAGMA foreign_keys = ON");
        if (path != ":memory:") {
            exec("PRAGMA journal_mode = WAL");
        }
        exec(std::string(detail::kSchema));
    }

    ExampleRecord submit_example(const NewExample& input, const VerificationReport& report) {
        if (!detail::has_content(input.author) && !detail::has_content(input.source)) {
            throw ProvenanceRequired();
        }
        if (report.overall == Verdict::warn && !input.confirmed) {
            throw ConfirmationRequired(report);
        }
        auto lock = write_lock();
        detail::Statement insert(db_.get(),
                                 "INSERT INTO Example (text, context, author, source, is_invalid, is_harmful, "
                                 "created_at) VALUES (?, ?, ?, ?, ?, 0, ?)");
        insert.bind(1, text::nfc(input.text))
            .bind(2, detail::normalized(input.context))
            .bind(3, detail::normalized(input.author))
            .bind(4, detail::normalized(input.source))
            .bind(5, report.overall == Verdict::warn)
            .bind(6, net::utc_timestamp());
        insert.step();
        return *load_example(sqlite3_last_insert_rowid(db_.get()));
    }

    [[nodiscard]] std::optional<ExampleRecord> example(std::int64_t id) const {
        auto lock = read_lock();
        return load_example(id);
    }

    /// Uniform draw over examples that are neither invalid nor harmful.
    template <class Rng>
    ExampleRecord random_example(Rng& rng) const {
        auto lock = read_lock();
        std::vector<std::int64_t> ids;
        detail::Statement select(db_.get(),
                                 "SELECT id FROM Example WHERE is_invalid = 0 AND is_harmful = 0 ORDER BY id");
        while (select.step()) {
            ids.push_back(select.integer(0));
        }
        if (ids.empty()) {
            throw NoEligibleExample();
        }
        std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
        return *load_example(ids[pick(rng)]);
    }

    /// Records one annotation per distinct figure, all or nothing.
    /// Figures in `repetition_figures` require check_lexical_repetition on the example text.
    std::vector<AnnotationRecord> annotate(std::int64_t example_id, const std::vector<onto::Iri>& figures,
                                           const onto::TripleStore& ontology,
                                           const std::vector<onto::Iri>& repetition_figures) {
        if (figures.empty()) {
            throw std::invalid_argument("at least one figure required");
        }
        std::vector<onto::Iri> distinct;
        std::set<onto::Iri> seen;
        for (const auto& f : figures) {
            if (!onto::is_figure(ontology, f)) {
                throw onto::UnknownFigure(f.value);
            }
            if (seen.insert(f).second) {
                distinct.push_back(f);
            }
        }

        auto lock = write_lock();
        const auto example = load_example(example_id);
        if (!example) {
            throw UnknownRecord("unknown example " + std::to_string(example_id));
        }
        const std::set<onto::Iri> repetition(repetition_figures.begin(), repetition_figures.end());
        std::vector<onto::Iri> needs_check;
        for (const auto& f : distinct) {
            if (repetition.contains(f)) {
                needs_check.push_back(f);
            }
        }
        if (!needs_check.empty() && !check_lexical_repetition(example->text)) {
            throw RepetitionCheckFailed(needs_check);
        }

        Transaction tx(*this);
        std::vector<std::int64_t> ids;
        for (const auto& f : distinct) {
            const auto figure_id = ensure_figure(f, onto::display_label(ontology, f));
            detail::Statement exists(db_.get(), "SELECT 1 FROM Annotation WHERE example_id = ? AND figure_id = ?");
            exists.bind(1, example_id).bind(2, figure_id);
            if (exists.step()) {
                throw DuplicateAnnotation(example_id, f);
            }
            detail::Statement insert(
                db_.get(),
                "INSERT INTO Annotation (example_id, figure_id, is_verified, created_at) VALUES (?, ?, 0, ?)");
            insert.bind(1, example_id).bind(2, figure_id).bind(3, net::utc_timestamp());
            insert.step();
            ids.push_back(sqlite3_last_insert_rowid(db_.get()));
        }
        tx.commit();

        std::vector<AnnotationRecord> out;
        for (auto id : ids) {
            out.push_back(*load_annotation(id));
        }
        return out;
    }

    /// Uses the default repetition set derived from the ontology.
    std::vector<AnnotationRecord> annotate(std::int64_t example_id, const std::vector<onto::Iri>& figures,
                                           const onto::TripleStore& ontology) {
        return annotate(example_id, figures, ontology, onto::lexical_repetition_figures(ontology));
    }

    [[nodiscard]] std::vector<AnnotationRecord> annotations_for(std::int64_t example_id) const {
        auto lock = read_lock();
        std::vector<AnnotationRecord> out;
        detail::Statement select(db_.get(), "SELECT " + std::string(detail::kAnnotationColumns) +
                                                " FROM Annotation a JOIN Figure f ON f.id = a.figure_id"
                                                " WHERE a.example_id = ? ORDER BY a.id");
        select.bind(1, example_id);
        while (select.step()) {
            out.push_back(read_annotation(select));
        }
        return out;
    }

    /// Applies the given flags in one transaction; unknown ids abort without changes.
    FlagResult set_flags(const FlagUpdate& update) {
        const bool example_flags = update.is_harmful || update.is_invalid;
        if (example_flags && !update.example_id) {
            throw std::invalid_argument("example flags given without example_id");
        }
        if (update.is_verified && !update.annotation_id) {
            throw std::invalid_argument("is_verified given without annotation_id");
        }
        auto lock = write_lock();
        if (update.example_id && !load_example(*update.example_id)) {
            throw UnknownRecord("unknown example " + std::to_string(*update.example_id));
        }
        if (update.annotation_id && !load_annotation(*update.annotation_id)) {
            throw UnknownRecord("unknown annotation " + std::to_string(*update.annotation_id));
        }
        Transaction tx(*this);
        if (update.is_harmful) {
            detail::Statement s(db_.get(), "UPDATE Example SET is_harmful = ? WHERE id = ?");
            s.bind(1, *update.is_harmful).bind(2, *update.example_id);
            s.step();
        }
        if (update.is_invalid) {
            detail::Statement s(db_.get(), "UPDATE Example SET is_invalid = ? WHERE id = ?");
            s.bind(1, *update.is_invalid).bind(2, *update.example_id);
            s.step();
        }
        if (update.is_verified) {
            detail::Statement s(db_.get(), "UPDATE Annotation SET is_verified = ? WHERE id = ?");
            s.bind(1, *update.is_verified).bind(2, *update.annotation_id);
            s.step();
        }
        tx.commit();

        FlagResult result;
        if (update.example_id) {
            result.example = load_example(*update.example_id);
        }
        if (update.annotation_id) {
            result.annotation = load_annotation(*update.annotation_id);
        }
        return result;
    }

    /// Runs the classifier over examples not yet flagged harmful; returns the number newly flagged.
    std::size_t scan_harmful(HarmfulClassifier& classifier) {
        std::vector<ExampleRecord> candidates;
        {
            auto lock = read_lock();
            detail::Statement select(db_.get(), "SELECT " + std::string(detail::kExampleColumns) +
                                                    " FROM Example WHERE is_harmful = 0 ORDER BY id");
            while (select.step()) {
                candidates.push_back(read_example(select));
            }
        }
        std::size_t flagged = 0;
        for (const auto& e : candidates) {
            if (classifier.is_harmful(e)) {
                set_flags(FlagUpdate{e.id, true, std::nullopt, std::nullopt, std::nullopt});
                ++flagged;
            }
        }
        return flagged;
    }

    struct Counts {
        std::int64_t examples = 0;
        std::int64_t eligible = 0;
        std::int64_t annotations = 0;
    };

    [[nodiscard]] Counts counts() const {
        auto lock = read_lock();
        Counts c;
        detail::Statement s(db_.get(),
                            "SELECT (SELECT count(*) FROM Example),"
                            " (SELECT count(*) FROM Example WHERE is_invalid = 0 AND is_harmful = 0),"
                            " (SELECT count(*) FROM Annotation)");
        s.step();
        c.examples = s.integer(0);
        c.eligible = s.integer(1);
        c.annotations = s.integer(2);
        return c;
    }

    /// One JSON object per line: every example, then every annotation, each tagged with "table".
    void export_jsonl(std::ostream& out) const {
        auto lock = read_lock();
        detail::Statement examples(db_.get(),
                                   "SELECT " + std::string(detail::kExampleColumns) + " FROM Example ORDER BY id");
        while (examples.step()) {
            auto j = to_json(read_example(examples));
            j["table"] = "Example";
            out << j.dump() << '\n';
        }
        detail::Statement annotations(db_.get(), "SELECT " + std::string(detail::kAnnotationColumns) +
                                                     " FROM Annotation a JOIN Figure f ON f.id = a.figure_id"
                                                     " ORDER BY a.id");
        while (annotations.step()) {
            auto j = to_json(read_annotation(annotations));
            j["table"] = "Annotation";
            out << j.dump() << '\n';
        }
    }

    static nlohmann::json to_json(const ExampleRecord& e) {
        auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(); };
        return {{"id", e.id},
                {"text", e.text},
                {"context", opt(e.context)},
                {"author", opt(e.author)},
                {"source", opt(e.source)},
                {"is_invalid", e.is_invalid},
                {"is_harmful", e.is_harmful},
                {"created_at", e.created_at}};
    }

    static nlohmann::json to_json(const AnnotationRecord& a) {
        return {{"id", a.id},
                {"example_id", a.example_id},
                {"figure_iri", a.figure_iri.value},
                {"is_verified", a.is_verified},
                {"created_at", a.created_at}};
    }

private:
    class Transaction {
    public:
        explicit Transaction(AnnotationStore& store) : store_(store) { store_.exec("BEGIN IMMEDIATE"); }
        Transaction(const Transaction&) = delete;
        Transaction& operator=(const Transaction&) = delete;
        ~Transaction() {
            if (!done_) {
                sqlite3_exec(store_.db_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
            }
        }
        void commit() {
            store_.exec("COMMIT");
            done_ = true;
        }

    private:
        AnnotationStore& store_;
        bool done_ = false;
    };

    void exec(const std::string& sql) {
        char* error = nullptr;
        if (sqlite3_exec(db_.get(), sql.c_str(), nullptr, nullptr, &error) != SQLITE_OK) {
            std::string message = error != nullptr ? error : "unknown error";
            sqlite3_free(error);
            throw StoreError(message);
        }
    }

    static ExampleRecord read_example(const detail::Statement& s) {
        return ExampleRecord{s.integer(0),       s.text(1),    s.optional_text(2), s.optional_text(3),
                             s.optional_text(4), s.boolean(5), s.boolean(6),       s.text(7)};
    }

    static AnnotationRecord read_annotation(const detail::Statement& s) {
        return AnnotationRecord{s.integer(0), s.integer(1), onto::Iri{s.text(2)}, s.boolean(3), s.text(4)};
    }

    [[nodiscard]] std::optional<ExampleRecord> load_example(std::int64_t id) const {
        detail::Statement s(db_.get(), "SELECT " + std::string(detail::kExampleColumns) + " FROM Example WHERE id = ?");
        s.bind(1, id);
        if (!s.step()) {
            return std::nullopt;
        }
        return read_example(s);
    }

    [[nodiscard]] std::optional<AnnotationRecord> load_annotation(std::int64_t id) const {
        detail::Statement s(db_.get(), "SELECT " + std::string(detail::kAnnotationColumns) +
                                           " FROM Annotation a JOIN Figure f ON f.id = a.figure_id WHERE a.id = ?");
        s.bind(1, id);
        if (!s.step()) {
            return std::nullopt;
        }
        return read_annotation(s);
    }

    std::int64_t ensure_figure(const onto::Iri& iri, const std::string& name) {
        detail::Statement insert(db_.get(), "INSERT OR IGNORE INTO Figure (name, iri) VALUES (?, ?)");
        insert.bind(1, name).bind(2, iri.value);
        insert.step();
        detail::Statement select(db_.get(), "SELECT id FROM Figure WHERE iri = ?");
        select.bind(1, iri.value);
        select.step();
        return select.integer(0);
    }

    /// Writers take the turnstile before the exclusive lock so a stream of readers cannot starve them.
    [[nodiscard]] std::shared_lock<std::shared_mutex> read_lock() const {
        { std::lock_guard gate(turnstile_); }
        return std::shared_lock(mutex_);
    }

    [[nodiscard]] std::unique_lock<std::shared_mutex> write_lock() {
        std::lock_guard gate(turnstile_);
        return std::unique_lock(mutex_);
    }

    std::unique_ptr<sqlite3, detail::DbCloser> db_;
    mutable std::shared_mutex mutex_;
    mutable std::mutex turnstile_;
};

}  // namespace rhetorik::annot

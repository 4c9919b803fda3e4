#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "rhetorik/ontology/turtle.hpp"
#include "rhetorik/rag/chunking.hpp"
#include "rhetorik/rag/embedding.hpp"
#include "rhetorik/rag/index.hpp"
#include "rhetorik/rag/merge.hpp"
#include "rhetorik/rag/pipeline.hpp"
#include "rhetorik/rag/rerank.hpp"
#include "rhetorik/rag/serialize.hpp"
#include "support/chunk_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/sample.hpp"

namespace rag = rhetorik::rag;
namespace onto = rhetorik::onto;
namespace net = rhetorik::net;
namespace fx = rhetorik::fixtures;
using rhetorik::oracle::concat_tokens;
using rhetorik::oracle::ids_of;
using rhetorik::oracle::oracle_tokens;
using rhetorik::oracle::random_document;
using rhetorik::oracle::ranked;
using rhetorik::oracle::two_level_tree;

namespace {

/// Checks reconstruction, size bounds, and exact partition of each parent by its children.
void check_tree(const rag::ChunkTree& tree, const std::vector<std::string>& tokens,
                const std::vector<std::size_t>& sizes) {
    ASSERT_EQ(tree.levels().size(), sizes.size());
    ASSERT_EQ(tree.sizes(), sizes);
    std::set<rag::ChunkId> ids;
    for (std::size_t l = 0; l < tree.levels().size(); ++l) {
        const auto& level = tree.levels()[l];
        EXPECT_EQ(concat_tokens(level), tokens) << "level " << l;
        std::size_t expected_start = 0;
        for (const auto& c : level) {
            EXPECT_TRUE(ids.insert(c.id).second);
            EXPECT_EQ(c.level, static_cast<int>(sizes.size() - 1 - l));
            EXPECT_GE(c.span.size(), 1U);
            EXPECT_LE(c.span.size(), sizes[l]);
            EXPECT_EQ(c.span.start, expected_start);
            expected_start = c.span.end;
            EXPECT_EQ(oracle_tokens(c.text),
                      std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(c.span.start),
                                               tokens.begin() + static_cast<std::ptrdiff_t>(c.span.end)));
            if (l == 0) {
                EXPECT_FALSE(c.parent_id.has_value());
            } else {
                ASSERT_TRUE(c.parent_id.has_value());
                const auto& parent = tree.at(*c.parent_id);
                EXPECT_EQ(parent.level, c.level + 1);
                EXPECT_TRUE(parent.span.contains(c.span));
            }
        }
        EXPECT_EQ(expected_start, tokens.size());
        if (l + 1 < tree.levels().size()) {
            for (const auto& parent : level) {
                const auto& kids = tree.children(parent.id);
                ASSERT_FALSE(kids.empty());
                std::size_t cursor = parent.span.start;
                for (auto k : kids) {
                    EXPECT_EQ(tree.at(k).span.start, cursor);
                    cursor = tree.at(k).span.end;
                }
                EXPECT_EQ(cursor, parent.span.end);
            }
        }
    }
}

struct FailingEmbedder : rag::Embedder {
    [[nodiscard]] std::size_t dim() const override { return 4; }
    std::vector<rag::Vector> embed(const std::vector<std::string>&) override {
        throw net::TransportError("embedding service down", 503);
    }
};

struct FailingReranker : rag::Reranker {
    std::vector<double> score(const std::string&, const std::vector<std::string>&) override {
        throw net::TransportError("reranker down", 500);
    }
};

struct FixedScoreReranker : rag::Reranker {
    std::vector<double> scores;
    std::vector<double> score(const std::string&, const std::vector<std::string>& docs) override {
        return std::vector<double>(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(docs.size()));
    }
};

struct RecordingTransport : net::Transport {
    std::vector<net::HttpRequest> requests;
    std::string reply;
    bool fail = false;
    net::HttpResponse post(const net::HttpRequest& request) override {
        requests.push_back(request);
        if (fail) {
            throw net::TransportError("upstream answered 500", 500);
        }
        return {200, reply};
    }
};

std::string chat_reply(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

}  // namespace

// ---------------------------------------------------------------- serialization

TEST(Serialize, EpiphoraGolden) {
    auto store = onto::parse_turtle(std::string(fx::kPrefixes) + std::string(fx::kEpiphoraReified));
    const std::string expected =
        "Rhetorische Figur: Epipher.\n"
        "Weitere Bezeichnungen von Epipher: Epiphora.\n"
        "Die Operation der Figur Epipher ist Repetition.\n"
        "Das betroffene Element der Figur Epipher ist Word.\n"
        "Die Form der Operation bei Epipher ist SameForm.\n"
        "Die Figur Epipher steht an der Position Beginning.\n"
        "Der Bereich der Figur Epipher ist Sentence.\n"
        "Definition von Epipher: Wiederholung eines Wortes am Ende aufeinanderfolgender S\xC3\xA4tze. "
        "Autor der Definition: Gerd Berner.\n"
        "Definition von Epipher: Das letzte Wort eines Satzes kehrt am Satzende wieder.\n"
        "Beispiel f\xC3\xBCr Epipher: Er wollte Frieden, sie wollte Frieden. Autor des Beispiels: Anonym. "
        "Quelle des Beispiels: Schulbuch.";
    EXPECT_EQ(rag::serialize_ontology(store), expected);
}

TEST(Serialize, EmptyStore) { EXPECT_EQ(rag::serialize_ontology(onto::TripleStore{}), ""); }

TEST(Serialize, SharedExampleInBothBlocks) {
    auto store = rhetorik::testing::sample_ontology();
    const std::string example = "Das Wasser rauscht', das Wasser schwoll.";
    const auto anaphora = rag::serialize_figure(store, onto::Iri{"http://rhetorik.example.org/grhoot#Anaphora"});
    const auto parallelism =
        rag::serialize_figure(store, onto::Iri{"http://rhetorik.example.org/grhoot#Parallelism"});
    EXPECT_NE(anaphora.find(example), std::string::npos);
    EXPECT_NE(parallelism.find(example), std::string::npos);
    const auto doc = rag::serialize_ontology(store);
    std::size_t blocks = 1;
    for (std::size_t pos = doc.find("\n\n"); pos != std::string::npos; pos = doc.find("\n\n", pos + 2)) {
        ++blocks;
    }
    EXPECT_EQ(blocks, onto::all_figures(store).size());
}

TEST(Serialize, SuperclassAndTemplatesConfigurable) {
    auto store = rhetorik::testing::sample_ontology();
    const auto antimetabole = rag::serialize_figure(store, onto::Iri{"http://rhetorik.example.org/grhoot#Antimetabole"});
    EXPECT_NE(antimetabole.find("ist eine Unterart von Chiasmus."), std::string::npos);
    auto templates = nlohmann::json::parse(R"({"heading": "Figur {figure}"})").get<rag::SerializationTemplates>();
    EXPECT_EQ(templates.example, rag::SerializationTemplates{}.example);
    EXPECT_EQ(rag::serialize_figure(store, onto::Iri{"http://rhetorik.example.org/grhoot#Chiasmus"}, templates)
                  .rfind("Figur Chiasmus\n", 0),
              0U);
}

TEST(Serialize, Deterministic) {
    auto store = rhetorik::testing::sample_ontology();
    EXPECT_EQ(rag::serialize_ontology(store), rag::serialize_ontology(rhetorik::testing::sample_ontology()));
}

// ---------------------------------------------------------------- chunking

TEST(Chunking, BasicArithmetic) {
    auto chunks = rag::chunk_basic("a b c d e f g h i j", 4);
    ASSERT_EQ(chunks.size(), 3U);
    EXPECT_EQ(chunks[0].text, "a b c d");
    EXPECT_EQ(chunks[1].text, "e f g h");
    EXPECT_EQ(chunks[2].text, "i j");
    EXPECT_EQ(chunks[2].span, (rag::Span{8, 10}));
    EXPECT_EQ(rag::chunk_basic("a b c", 3).size(), 1U);
    EXPECT_EQ(rag::chunk_basic("a b c", 100).size(), 1U);
    EXPECT_TRUE(rag::chunk_basic("   ", 4).empty());
    EXPECT_THROW(rag::chunk_basic("a", 0), std::invalid_argument);
}

TEST(Chunking, HierarchicalStandardSizes) {
    std::mt19937 rng(1);
    auto tree = rag::chunk_hierarchical(random_document(rng, 4096), {2048, 512, 128});
    EXPECT_EQ(tree.levels()[0].size(), 2U);
    EXPECT_EQ(tree.levels()[1].size(), 8U);
    EXPECT_EQ(tree.levels()[2].size(), 32U);
}

TEST(Chunking, ShortTextChainsSingleChunks) {
    auto tree = rag::chunk_hierarchical("nur ein paar Worte", {512, 256, 128});
    for (const auto& level : tree.levels()) {
        ASSERT_EQ(level.size(), 1U);
        EXPECT_EQ(level[0].text, "nur ein paar Worte");
    }
    EXPECT_EQ(tree.levels()[1][0].parent_id, tree.levels()[0][0].id);
    EXPECT_EQ(tree.levels()[2][0].parent_id, tree.levels()[1][0].id);
}

TEST(Chunking, HierarchicalRejectsBadSizes) {
    EXPECT_THROW(rag::chunk_hierarchical("a", {128}), std::invalid_argument);
    EXPECT_THROW(rag::chunk_hierarchical("a", {128, 128}), std::invalid_argument);
    EXPECT_THROW(rag::chunk_hierarchical("a", {128, 512}), std::invalid_argument);
    EXPECT_THROW(rag::chunk_hierarchical("a", {128, 0}), std::invalid_argument);
}

TEST(Chunking, ReconstructionAndContainmentOnRandomDocuments) {
    std::mt19937 rng(2024);
    const std::vector<std::vector<std::size_t>> configs = {{2048}, {2048, 512, 128}, {512, 256, 128}};
    for (int doc = 0; doc < 100; ++doc) {
        const auto text = random_document(rng, rng() % 10001);
        const auto tokens = oracle_tokens(text);
        for (const auto& sizes : configs) {
            const auto tree = sizes.size() == 1 ? rag::chunk_flat(text, sizes[0]) : rag::chunk_hierarchical(text, sizes);
            check_tree(tree, tokens, sizes);
            EXPECT_EQ(rhetorik::oracle::tree_violation(tree, tokens, sizes), std::nullopt);
            if (::testing::Test::HasFailure()) {
                FAIL() << "document " << doc << " sizes " << sizes.size();
            }
        }
    }
}

TEST(Chunking, ViolationCheckerRejectsMismatchedTrees) {
    const std::string text = "eins zwei drei vier f\xC3\xBCnf sechs";
    const auto tree = rag::chunk_hierarchical(text, {4, 2});
    EXPECT_EQ(rhetorik::oracle::tree_violation(tree, oracle_tokens(text), {4, 2}), std::nullopt);
    EXPECT_NE(rhetorik::oracle::tree_violation(tree, oracle_tokens(text + " sieben"), {4, 2}), std::nullopt);
    EXPECT_NE(rhetorik::oracle::tree_violation(tree, oracle_tokens(text), {4, 1}), std::nullopt);
}

TEST(Chunking, TreeJsonRoundTrip) {
    std::mt19937 rng(5);
    auto tree = rag::chunk_hierarchical(random_document(rng, 700), {512, 256, 128});
    auto back = rag::tree_from_json(nlohmann::json::parse(rag::to_json(tree).dump()));
    EXPECT_EQ(rag::to_json(back), rag::to_json(tree));
}

// ---------------------------------------------------------------- embedding and index

TEST(Embedding, HashedBagOfWords) {
    rag::HashedBagOfWordsEmbedder e(64);
    auto v = e.embed({"Das Wasser", "", "das WASSER!"});
    ASSERT_EQ(v.size(), 3U);
    EXPECT_EQ(v[0].size(), 64U);
    EXPECT_NEAR(rag::detail::squared_norm(v[0]), 1.0, 1e-6);
    EXPECT_EQ(rag::detail::squared_norm(v[1]), 0.0);
    EXPECT_EQ(v[0], v[2]);
}

TEST(Index, BuildOneEntryPerChunk) {
    rag::HashedBagOfWordsEmbedder e(32);
    auto chunks = rag::chunk_basic("a b c d e f g h i", 3);
    auto index = rag::build_index(chunks, e);
    EXPECT_EQ(index.size(), 3U);
    EXPECT_EQ(index.dim(), 32U);
}

TEST(Index, HierarchicalEmbedsLeavesOnly) {
    rag::HashedBagOfWordsEmbedder e(32);
    std::mt19937 rng(3);
    auto tree = rag::chunk_hierarchical(random_document(rng, 1000), {512, 256, 128});
    auto index = rag::build_index(tree, e);
    ASSERT_EQ(index.size(), tree.leaves().size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        EXPECT_EQ(index.entries()[i].chunk_id, tree.leaves()[i].id);
    }
}

TEST(Index, EmbedderFailureAbortsBuild) {
    FailingEmbedder e;
    EXPECT_THROW(rag::build_index(rag::chunk_basic("a b c", 1), e), net::TransportError);
}

TEST(Index, FileLayout) {
    rag::VectorIndex index(2);
    index.add(7, {1.0F, -2.0F});
    const auto bytes = index.serialize();
    // Oracle: hand-assembled little-endian bytes.
    const std::string expected("\x02\x00\x00\x00"   // dim
                               "\x01\x00\x00\x00"   // count
                               "\x10\x00\x00\x00"   // record length 8 + 2 * 4
                               "\x07\x00\x00\x00\x00\x00\x00\x00"
                               "\x00\x00\x80\x3F"   // 1.0f
                               "\x00\x00\x00\xC0",  // -2.0f
                               28);
    EXPECT_EQ(bytes, expected);
}

TEST(Index, SaveLoadRoundTripIsBitIdentical) {
    std::mt19937 rng(11);
    std::normal_distribution<float> dist;
    rag::VectorIndex index(16);
    for (rag::ChunkId id = 0; id < 50; ++id) {
        rag::Vector v(16);
        for (auto& x : v) {
            x = dist(rng);
        }
        index.add(id * 3 + 1, v);
    }
    const auto path = (std::filesystem::temp_directory_path() / "rhetorik_index_roundtrip.bin").string();
    index.save(path);
    auto loaded = rag::VectorIndex::load(path);
    EXPECT_EQ(loaded.entries(), index.entries());
    EXPECT_EQ(loaded.serialize(), index.serialize());
    std::filesystem::remove(path);
}

TEST(Index, CorruptFilesRejected) {
    rag::VectorIndex index(2);
    index.add(1, {1.0F, 0.0F});
    auto bytes = index.serialize();
    EXPECT_THROW(rag::VectorIndex::deserialize(bytes.substr(0, bytes.size() - 1)), rag::IndexFormatError);
    EXPECT_THROW(rag::VectorIndex::deserialize(bytes + "x"), rag::IndexFormatError);
    EXPECT_THROW(index.add(1, {0.0F, 1.0F}), std::invalid_argument);
    EXPECT_THROW(index.add(2, {0.0F}), std::invalid_argument);
}

TEST(Retrieve, SelfSimilarityRanksFirst) {
    rag::HashedBagOfWordsEmbedder e(256);
    auto chunks = rag::chunk_basic("Anapher Wiederholung Anfang Epipher Wiederholung Ende Chiasmus Kreuz", 2);
    auto index = rag::build_index(chunks, e);
    auto hits = rag::retrieve(index, chunks[2].text, 3, e);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].chunk_id, chunks[2].id);
    EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
}

TEST(Retrieve, KLargerThanIndexAndEmptyIndex) {
    rag::HashedBagOfWordsEmbedder e(16);
    auto index = rag::build_index(rag::chunk_basic("a b c", 1), e);
    EXPECT_EQ(rag::retrieve(index, "a", 12, e).size(), 3U);
    EXPECT_TRUE(rag::retrieve(rag::VectorIndex(16), "a", 3, e).empty());
    EXPECT_THROW(rag::retrieve(index, "a", 0, e), std::invalid_argument);
}

TEST(Retrieve, MatchesExhaustiveCosineOracle) {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 2 + rng() % 15;
        const std::size_t count = 1 + rng() % 1000;
        const bool coarse = trial % 2 == 0;  // small integer grid makes exact ties common
        rag::VectorIndex index(dim);
        std::vector<std::pair<std::uint64_t, std::vector<float>>> entries;
        std::vector<std::uint64_t> ids(count);
        for (std::size_t i = 0; i < count; ++i) {
            ids[i] = i * 2 + rng() % 2;
        }
        std::shuffle(ids.begin(), ids.end(), rng);
        auto random_vector = [&] {
            rag::Vector v(dim);
            for (auto& x : v) {
                x = coarse ? static_cast<float>(static_cast<int>(rng() % 3) - 1)
                           : std::uniform_real_distribution<float>(-1.0F, 1.0F)(rng);
            }
            return v;
        };
        for (auto id : ids) {
            auto v = random_vector();
            entries.emplace_back(id, v);
            index.add(id, v);
        }
        for (int q = 0; q < 5; ++q) {
            const auto query = random_vector();
            for (std::size_t k : {3U, 6U, 12U}) {
                const auto expected = rhetorik::oracle::exhaustive_cosine(entries, query, k);
                const auto got = index.search(query, k);
                ASSERT_EQ(got.size(), expected.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    EXPECT_EQ(got[i].chunk_id, expected[i].first) << "trial " << trial << " k " << k << " at " << i;
                    EXPECT_EQ(got[i].score, expected[i].second);
                }
            }
        }
    }
}

// ---------------------------------------------------------------- auto-merge

TEST(AutoMerge, TwoOfThreeYieldsParent) {
    auto tree = two_level_tree();
    auto merged = rag::auto_merge(ranked({3, 2}), tree, 0.5);
    ASSERT_EQ(merged.size(), 1U);
    EXPECT_EQ(merged[0].chunk_id, 0U);
    EXPECT_EQ(merged[0].text, "r0");
    EXPECT_EQ(merged[0].rank, 0U);
}

TEST(AutoMerge, OneOfFourStaysLeaf) {
    auto tree = two_level_tree();
    auto merged = rag::auto_merge(ranked({6}), tree, 0.5);
    EXPECT_EQ(ids_of(merged), std::vector<rag::ChunkId>{6});
}

TEST(AutoMerge, FullRetrievalYieldsRoots) {
    auto tree = two_level_tree();
    auto merged = rag::auto_merge(ranked({8, 2, 3, 4, 5, 6, 7}), tree, 0.5);
    EXPECT_EQ(ids_of(merged), (std::vector<rag::ChunkId>{1, 0}));
}

TEST(AutoMerge, RankOrderOfBestMemberKept) {
    auto tree = two_level_tree();
    // leaf 5 alone (1/4) ranks first; 2 and 4 merge into root 0 with best rank 1
    auto merged = rag::auto_merge(ranked({5, 4, 2}), tree, 0.5);
    EXPECT_EQ(ids_of(merged), (std::vector<rag::ChunkId>{5, 0}));
    EXPECT_EQ(merged[1].rank, 1U);
}

TEST(AutoMerge, RecursesUpward) {
    std::mt19937 rng(9);
    auto tree = rag::chunk_hierarchical(random_document(rng, 512), {512, 256, 128});
    std::vector<rag::Scored> all;
    for (const auto& leaf : tree.leaves()) {
        all.push_back({leaf.id, 0.5});
    }
    auto merged = rag::auto_merge(all, tree, 0.5);
    ASSERT_EQ(merged.size(), 1U);
    EXPECT_EQ(merged[0].chunk_id, tree.levels()[0][0].id);
}

TEST(AutoMerge, NeverParentWithDescendant) {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        auto tree = rag::chunk_hierarchical(random_document(rng, 1 + rng() % 3000), {512, 256, 128});
        std::vector<rag::ChunkId> leaves;
        for (const auto& l : tree.leaves()) {
            leaves.push_back(l.id);
        }
        std::shuffle(leaves.begin(), leaves.end(), rng);
        leaves.resize(1 + rng() % leaves.size());
        std::vector<rag::Scored> hits;
        for (auto id : leaves) {
            hits.push_back({id, 0.0});
        }
        const double threshold = std::vector<double>{0.25, 0.5, 0.75, 1.0}[rng() % 4];
        auto merged = rag::auto_merge(hits, tree, threshold);
        const auto merged_ids = ids_of(merged);
        std::set<rag::ChunkId> out(merged_ids.begin(), merged_ids.end());
        ASSERT_EQ(out.size(), merged.size());
        for (auto id : out) {
            for (auto p = tree.at(id).parent_id; p; p = tree.at(*p).parent_id) {
                EXPECT_FALSE(out.contains(*p)) << "chunk " << id << " with ancestor " << *p;
            }
        }
        // every retrieved leaf is covered by exactly one emitted chunk
        for (auto leaf : leaves) {
            int covering = 0;
            for (auto id : out) {
                covering += tree.at(id).span.contains(tree.at(leaf).span) ? 1 : 0;
            }
            EXPECT_EQ(covering, 1);
        }
        for (std::size_t i = 1; i < merged.size(); ++i) {
            EXPECT_LT(merged[i - 1].rank, merged[i].rank);
        }
    }
}

TEST(AutoMerge, RejectsNonLeaves) {
    auto tree = two_level_tree();
    EXPECT_THROW(rag::auto_merge(ranked({0}), tree, 0.5), std::invalid_argument);
    EXPECT_THROW(rag::auto_merge(ranked({2}), tree, 0.0), std::invalid_argument);
}

// ---------------------------------------------------------------- rerank

namespace {

std::vector<rag::Candidate> candidates(std::size_t n) {
    std::vector<rag::Candidate> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({100 + i, "Text " + std::to_string(i), i});
    }
    return out;
}

}  // namespace

TEST(Rerank, SelectsRerankK) {
    rag::TokenOverlapReranker r;
    EXPECT_EQ(rag::rerank("Frage", candidates(12), r, 6).selected.size(), 6U);
    EXPECT_EQ(rag::rerank("Frage", candidates(6), r, 3).selected.size(), 3U);
    EXPECT_EQ(rag::rerank("Frage", candidates(2), r, 3).selected.size(), 2U);
}

TEST(Rerank, IdentityScoresKeepPrefix) {
    FixedScoreReranker r;
    r.scores = std::vector<double>(12, 0.5);
    auto result = rag::rerank("q", candidates(12), r, 6);
    const auto all = candidates(12);
    EXPECT_EQ(result.selected, std::vector<rag::Candidate>(all.begin(), all.begin() + 6));
    EXPECT_FALSE(result.fallback);
}

TEST(Rerank, OrdersByScoreThenRank) {
    FixedScoreReranker r;
    r.scores = {0.1, 0.9, 0.5, 0.9};
    auto result = rag::rerank("q", candidates(4), r, 3);
    EXPECT_EQ(ids_of(result.selected), (std::vector<rag::ChunkId>{101, 103, 102}));
}

TEST(Rerank, FailureFallsBackFlagged) {
    FailingReranker r;
    auto result = rag::rerank("q", candidates(12), r, 6);
    EXPECT_TRUE(result.fallback);
    ASSERT_TRUE(result.error.has_value());
    EXPECT_EQ(ids_of(result.selected), (std::vector<rag::ChunkId>{100, 101, 102, 103, 104, 105}));
}

TEST(Rerank, TokenOverlapScores) {
    rag::TokenOverlapReranker r;
    auto s = r.score("Was ist eine Anapher?", {"Die Anapher ist eine Figur.", "Nichts dazu."});
    EXPECT_DOUBLE_EQ(s[0], 3.0 / 4.0);
    EXPECT_DOUBLE_EQ(s[1], 0.0);
}

TEST(Rerank, HttpAdapter) {
    auto transport = std::make_shared<RecordingTransport>();
    rag::HttpReranker r(transport, {"http://rerank.local/rerank", "key", "bge-reranker-large"});
    transport->reply = R"({"results": [{"index": 1, "relevance_score": 0.9}, {"index": 0, "relevance_score": 0.2}]})";
    EXPECT_EQ(r.score("q", {"a", "b"}), (std::vector<double>{0.2, 0.9}));
    auto body = nlohmann::json::parse(transport->requests.at(0).body);
    EXPECT_EQ(body["query"], "q");
    EXPECT_EQ(body["documents"].size(), 2U);
    transport->reply = R"({"results": [{"index": 0, "relevance_score": 0.2}]})";
    EXPECT_THROW(r.score("q", {"a", "b"}), net::TransportError);
}

TEST(Embedding, HttpAdapter) {
    auto transport = std::make_shared<RecordingTransport>();
    rag::HttpEmbedder e(transport, {"http://emb.local/v1/embeddings", "", "bge-m3"}, 2);
    transport->reply = R"({"data": [{"index": 1, "embedding": [0, 1]}, {"index": 0, "embedding": [1, 0]}]})";
    auto v = e.embed({"x", "y"});
    EXPECT_EQ(v[0], (rag::Vector{1.0F, 0.0F}));
    EXPECT_EQ(v[1], (rag::Vector{0.0F, 1.0F}));
    EXPECT_TRUE(transport->requests.at(0).headers.empty());
    transport->reply = R"({"data": [{"embedding": [1, 0, 0]}]})";
    EXPECT_THROW(e.embed({"x"}), net::TransportError);
}

// ---------------------------------------------------------------- pipeline

TEST(Config, JsonAndValidation) {
    auto c = nlohmann::json::parse(rhetorik::testing::read_file(rhetorik::testing::data_path("rag_config.json")))
                 .get<rag::RagConfig>();
    EXPECT_EQ(c.label(), "2048/basic/12-6");
    auto amr = nlohmann::json::parse(R"({"chunk_sizes": [512, 256, 128], "method": "auto_merging",
                                         "retrieve_k": 6, "rerank_k": 3})")
                   .get<rag::RagConfig>();
    EXPECT_EQ(amr.label(), "512-256-128/AMR/6-3");
    EXPECT_EQ(nlohmann::json(amr).get<rag::RagConfig>().label(), amr.label());
    EXPECT_THROW(nlohmann::json::parse(R"({"retrieve_k": 3, "rerank_k": 6})").get<rag::RagConfig>(),
                 std::invalid_argument);
    EXPECT_THROW(nlohmann::json::parse(R"({"chunk_sizes": [512, 128]})").get<rag::RagConfig>(),
                 std::invalid_argument);
    EXPECT_THROW(nlohmann::json::parse(R"({"method": "fancy"})").get<rag::RagConfig>(), std::invalid_argument);
}

class PipelineTest : public ::testing::Test {
protected:
    onto::TripleStore ontology = rhetorik::testing::sample_ontology();
    std::string document = rag::serialize_ontology(ontology);
    rag::HashedBagOfWordsEmbedder embedder{256};
    rag::TokenOverlapReranker reranker;
};

TEST_F(PipelineTest, EchoAnswerContainsRetrievedDefinition) {
    rag::RagConfig config{{64}, rag::ChunkingMethod::basic, 6, 3, 0.5};
    auto kb = rag::KnowledgeBase::build(document, config, embedder);
    rag::EchoChatModel llm;
    auto result = rag::answer("Was ist eine Anapher? Definition von Anapher", kb, embedder, reranker, llm);
    ASSERT_TRUE(result.answer.has_value());
    EXPECT_EQ(result.contexts.size(), 3U);
    EXPECT_NE(result.answer->find("Wiederholung eines Wortes oder einer Wortgruppe am Anfang"), std::string::npos);
    for (const auto& c : result.contexts) {
        EXPECT_NE(result.answer->find(c), std::string::npos);
    }
}

TEST_F(PipelineTest, EveryRequestCarriesDirectiveAndTemperature) {
    auto transport = std::make_shared<RecordingTransport>();
    transport->reply = chat_reply("Eine Anapher ist eine Wiederholung am Satzanfang.");
    net::HttpChatModel llm(transport, {"http://llm.local/v1/chat/completions", "sk-test", "gpt-3.5-turbo"});
    for (const auto& config : {rag::RagConfig{{2048}, rag::ChunkingMethod::basic, 12, 6, 0.5},
                               rag::RagConfig{{512, 256, 128}, rag::ChunkingMethod::auto_merging, 6, 3, 0.5}}) {
        auto kb = rag::KnowledgeBase::build(document, config, embedder);
        for (const std::string q : {"Was ist eine Anapher?", "Nenne ein Beispiel f\xC3\xBCr Chiasmus.", ""}) {
            auto result = rag::answer(q, kb, embedder, reranker, llm);
            EXPECT_TRUE(result.answer.has_value());
        }
    }
    ASSERT_EQ(transport->requests.size(), 6U);
    for (const auto& request : transport->requests) {
        EXPECT_NE(request.body.find("Bitte antworte nur auf Deutsch!"), std::string::npos);
        auto body = nlohmann::json::parse(request.body);
        EXPECT_EQ(body["temperature"].get<double>(), 0.1);
        EXPECT_EQ(body["model"], "gpt-3.5-turbo");
        EXPECT_EQ(request.headers.at(0).second, "Bearer sk-test");
    }
}

TEST_F(PipelineTest, PromptBundleCarriesDirective) {
    auto bundle = rag::make_prompt("Frage?", {"a", "b"});
    EXPECT_NE(bundle.system_instruction.find(rag::kGermanDirective), std::string::npos);
    auto request = rag::chat_request(bundle);
    EXPECT_EQ(request.temperature, 0.1);
    EXPECT_NE(request.messages.back().content.find("a\n---\nb"), std::string::npos);
}

TEST_F(PipelineTest, LlmFailureStillReturnsContexts) {
    auto transport = std::make_shared<RecordingTransport>();
    transport->fail = true;
    net::HttpChatModel llm(transport, {"http://llm.local/v1/chat/completions", "", "m"});
    auto kb = rag::KnowledgeBase::build(document, {{128}, rag::ChunkingMethod::basic, 6, 3, 0.5}, embedder);
    auto result = rag::answer("Was ist eine Epipher?", kb, embedder, reranker, llm);
    EXPECT_FALSE(result.answer.has_value());
    ASSERT_TRUE(result.error.has_value());
    EXPECT_EQ(result.contexts.size(), 3U);
}

TEST_F(PipelineTest, RerankFailureFlagged) {
    FailingReranker failing;
    rag::EchoChatModel llm;
    auto kb = rag::KnowledgeBase::build(document, {{128}, rag::ChunkingMethod::basic, 6, 3, 0.5}, embedder);
    auto result = rag::answer("Was ist eine Epipher?", kb, embedder, failing, llm);
    EXPECT_TRUE(result.rerank_fallback);
    EXPECT_EQ(result.contexts.size(), 3U);
}

TEST_F(PipelineTest, Deterministic) {
    rag::EchoChatModel llm;
    rag::RagConfig config{{512, 256, 128}, rag::ChunkingMethod::auto_merging, 12, 6, 0.5};
    auto kb = rag::KnowledgeBase::build(document, config, embedder);
    auto a = rag::answer("Welche Figur wiederholt ein Wort am Ende?", kb, embedder, reranker, llm);
    auto b = rag::answer("Welche Figur wiederholt ein Wort am Ende?", kb, embedder, reranker, llm);
    EXPECT_EQ(a.answer, b.answer);
    EXPECT_EQ(a.contexts, b.contexts);
}

TEST_F(PipelineTest, KnowledgeBaseSaveLoad) {
    rag::RagConfig config{{512, 256, 128}, rag::ChunkingMethod::auto_merging, 12, 6, 0.5};
    auto kb = rag::KnowledgeBase::build(document, config, embedder);
    const auto path = (std::filesystem::temp_directory_path() / "rhetorik_kb.bin").string();
    kb.save(path);
    auto loaded = rag::KnowledgeBase::load(path);
    EXPECT_EQ(loaded.index.serialize(), kb.index.serialize());
    EXPECT_EQ(rag::to_json(loaded.tree), rag::to_json(kb.tree));
    EXPECT_EQ(loaded.config.label(), config.label());
    rag::EchoChatModel llm;
    EXPECT_EQ(rag::answer("Anapher", loaded, embedder, reranker, llm).contexts,
              rag::answer("Anapher", kb, embedder, reranker, llm).contexts);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".chunks.json");
}

// ---------------------------------------------------------------- postprocessing

TEST(Postprocess, ListedCases) {
    EXPECT_EQ(rag::postprocess_answer("Die Figur hei\xC3\x9Ft \"Anaphora"), "Die Figur hei\xC3\x9Ft Anaphora");
    EXPECT_EQ(rag::postprocess_answer(""), "");
    for (const std::string balanced :
         {"Die Figur hei\xC3\x9Ft \"Anaphora\".", "\xE2\x80\x9E" "Das Wasser rauscht'\xE2\x80\x9C ist ein Beispiel.",
          "Er sagte: \xE2\x80\x9A" "ja\xE2\x80\x98.", "\xE2\x80\x9CQuoted\xE2\x80\x9D and 'single'.",
          "Geht's gut? Ja, geht\xE2\x80\x99s."}) {
        EXPECT_EQ(rag::postprocess_answer(balanced), balanced) << balanced;
    }
}

TEST(Postprocess, UnmatchedMarksRemoved) {
    EXPECT_EQ(rag::postprocess_answer("\xE2\x80\x9E" "Anapher"), "Anapher");
    EXPECT_EQ(rag::postprocess_answer("Anapher\xE2\x80\x9D"), "Anapher");
    EXPECT_EQ(rag::postprocess_answer("\"a \xE2\x80\x9E" "b\""), "\"a b\"");
    EXPECT_EQ(rag::postprocess_answer("'Anapher"), "Anapher");
    EXPECT_EQ(rag::postprocess_answer("\xE2\x80\x9A" "x"), "x");
}

TEST(Postprocess, IdempotentOnRandomStrings) {
    const std::vector<std::string> pieces = {"\"", "'", "\xE2\x80\x9E", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x9A",
                                             "\xE2\x80\x98", "\xE2\x80\x99", "a", "Wort", " ", ".", "\xC3\xA4"};
    std::mt19937 rng(123);
    for (int i = 0; i < 5000; ++i) {
        std::string s;
        const int n = static_cast<int>(rng() % 12);
        for (int k = 0; k < n; ++k) {
            s += pieces[rng() % pieces.size()];
        }
        const auto once = rag::postprocess_answer(s);
        EXPECT_EQ(rag::postprocess_answer(once), once) << s;
        // only quotation characters are ever removed
        std::string letters_in;
        std::string letters_out;
        for (char c : s) {
            if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == ' ' || c == '.') {
                letters_in += c;
            }
        }
        for (char c : once) {
            if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == ' ' || c == '.') {
                letters_out += c;
            }
        }
        EXPECT_EQ(letters_in, letters_out) << s;
    }
}

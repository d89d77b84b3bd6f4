#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <stdexcept>

#include "hdptm/corpus.hpp"
#include "hdptm/rng.hpp"
#include "support.hpp"

using namespace hdptm;
using testsupport::TempDir;

TEST_CASE("plain text loader: hand-traced two-line file") {
  TempDir dir;
  const auto path = dir.write_file("toy.txt", "a b a\nb c\n");
  auto [corpus, vocab] = load_corpus(path, CorpusFormat::plain_text_lines);
  CHECK(corpus.doc_count() == 2);
  CHECK(vocab.size() == 3);
  CHECK(corpus.total_tokens() == 5);
  CHECK(corpus.documents[0].tokens == std::vector<std::uint32_t>{0, 1, 0});
  CHECK(corpus.documents[1].tokens == std::vector<std::uint32_t>{1, 2});
  CHECK(vocab.terms == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("plain text loader: lowercasing and punctuation stripping") {
  TempDir dir;
  const auto path = dir.write_file("mixed.txt", "Hello, world! don't STOP x9\n");
  auto [corpus, vocab] = load_corpus(path, CorpusFormat::plain_text_lines);
  CHECK(vocab.terms == std::vector<std::string>{"hello", "world", "dont", "stop", "x9"});
  CHECK(corpus.documents[0].tokens.size() == 5);
}

TEST_CASE("plain text loader: empty corpus is an error") {
  TempDir dir;
  const auto path = dir.write_file("empty.txt", "");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_corpus(path, CorpusFormat::plain_text_lines)),
                       doctest::Contains("empty corpus"), std::runtime_error);
  const auto blank = dir.write_file("blank.txt", "\n...\n");
  CHECK_THROWS_AS(static_cast<void>(load_corpus(blank, CorpusFormat::plain_text_lines)),
                  std::runtime_error);
}

TEST_CASE("vocabulary round-trip: re-encoding reproduces the token strings") {
  TempDir dir;
  const auto path = dir.write_file("rt.txt", "red green blue red\ngreen blue blue\n");
  auto [corpus, vocab] = load_corpus(path, CorpusFormat::plain_text_lines);
  // bijection
  for (std::uint32_t w = 0; w < vocab.size(); ++w) {
    CHECK(vocab.index.at(vocab.terms[w]) == w);
  }
  std::vector<std::vector<std::string>> expected = {{"red", "green", "blue", "red"},
                                                    {"green", "blue", "blue"}};
  for (std::size_t d = 0; d < corpus.doc_count(); ++d) {
    std::vector<std::string> decoded;
    for (const auto w : corpus.documents[d].tokens) {
      decoded.push_back(vocab.terms[w]);
    }
    CHECK(decoded == expected[d]);
  }
}

TEST_CASE("uci-bow loader: count expansion and 1-based conversion") {
  TempDir dir;
  // single entry, term index 3 of 3 -> id 2, expanded to 3 consecutive tokens
  const auto path = dir.write_file("one.uci", "1\n3\n1\n1 3 3\n");
  auto [corpus, vocab] = load_corpus(path, CorpusFormat::uci_bow);
  CHECK(corpus.doc_count() == 1);
  CHECK(corpus.total_tokens() == 3);
  CHECK(vocab.size() == 3);
  CHECK(corpus.documents[0].tokens == std::vector<std::uint32_t>{2, 2, 2});

  // term 2 converts to id 1
  const auto path2 = dir.write_file("two.uci", "1\n3\n1\n1 2 3\n");
  auto [corpus2, vocab2] = load_corpus(path2, CorpusFormat::uci_bow);
  CHECK(corpus2.documents[0].tokens == std::vector<std::uint32_t>{1, 1, 1});
}

TEST_CASE("uci-bow loader: multiple docs keep file order of entries") {
  TempDir dir;
  const auto path = dir.write_file("multi.uci", "2\n4\n3\n1 1 2\n1 4 1\n2 2 2\n");
  auto [corpus, vocab] = load_corpus(path, CorpusFormat::uci_bow);
  CHECK(corpus.doc_count() == 2);
  CHECK(corpus.documents[0].tokens == std::vector<std::uint32_t>{0, 0, 3});
  CHECK(corpus.documents[1].tokens == std::vector<std::uint32_t>{1, 1});
  CHECK(vocab.size() == 4);
}

TEST_CASE("uci-bow loader: malformed input names the line") {
  TempDir dir;
  const auto bad_term = dir.write_file("bad1.uci", "1\n3\n1\n1 9 3\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_corpus(bad_term, CorpusFormat::uci_bow)),
                       doctest::Contains(":4:"), std::runtime_error);
  const auto bad_field = dir.write_file("bad2.uci", "1\n3\n2\n1 2 1\n1 x 1\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_corpus(bad_field, CorpusFormat::uci_bow)),
                       doctest::Contains(":5:"), std::runtime_error);
  const auto missing = dir.write_file("bad3.uci", "1\n3\n1\n1 2\n");
  CHECK_THROWS_AS(static_cast<void>(load_corpus(missing, CorpusFormat::uci_bow)),
                  std::runtime_error);
  const auto bad_doc = dir.write_file("bad4.uci", "1\n3\n1\n2 1 1\n");
  CHECK_THROWS_AS(static_cast<void>(load_corpus(bad_doc, CorpusFormat::uci_bow)),
                  std::runtime_error);
}

TEST_CASE("document split: sizes and determinism") {
  std::vector<std::vector<std::uint32_t>> docs;
  for (int d = 0; d < 10; ++d) {
    docs.push_back({0, 1, 2});
  }
  const Corpus corpus = testsupport::make_corpus(docs);

  auto split = split_train_heldout(corpus, 0.8, 7);
  CHECK(split.train.doc_count() == 8);
  CHECK(split.heldout.doc_count() == 2);

  auto split2 = split_train_heldout(corpus, 0.8, 7);
  CHECK(split.train.doc_count() == split2.train.doc_count());
  for (std::size_t d = 0; d < split.train.doc_count(); ++d) {
    CHECK(split.train.documents[d].tokens == split2.train.documents[d].tokens);
  }

  auto split3 = split_train_heldout(corpus, 0.8, 8);
  // different seed is allowed to pick a different partition; sizes still hold
  CHECK(split3.train.doc_count() == 8);
}

TEST_CASE("document split: single-document rounding edge") {
  const Corpus corpus = testsupport::make_corpus({{0, 1}});
  auto split = split_train_heldout(corpus, 0.8, 3);
  CHECK(split.train.doc_count() == 1);
  CHECK(split.heldout.doc_count() == 0);
}

TEST_CASE("document split: no document lands in both parts") {
  std::vector<std::vector<std::uint32_t>> docs;
  for (std::uint32_t d = 0; d < 23; ++d) {
    docs.push_back({d});  // unique token marks the document
  }
  const Corpus corpus = testsupport::make_corpus(docs);
  auto split = split_train_heldout(corpus, 0.6, 11);
  std::vector<bool> seen(23, false);
  for (const auto& part : {split.train, split.heldout}) {
    for (const auto& doc : part.documents) {
      REQUIRE_FALSE(seen[doc.tokens[0]]);
      seen[doc.tokens[0]] = true;
    }
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
}

TEST_CASE("document split: fraction out of range") {
  const Corpus corpus = testsupport::make_corpus({{0}, {1}});
  CHECK_THROWS_AS(split_train_heldout(corpus, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_train_heldout(corpus, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_train_heldout(corpus, 1.5, 1), std::invalid_argument);
}

TEST_CASE("token split: sizes, minimum case, determinism") {
  Document doc;
  doc.tokens = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto split = split_tokens(doc, 0.7, 5);
  CHECK(split.estimation_tokens.size() == 7);
  CHECK(split.evaluation_tokens.size() == 3);

  auto again = split_tokens(doc, 0.7, 5);
  CHECK(split.estimation_tokens == again.estimation_tokens);
  CHECK(split.evaluation_tokens == again.evaluation_tokens);

  Document two;
  two.tokens = {4, 9};
  auto minimal = split_tokens(two, 0.7, 1);
  CHECK(minimal.estimation_tokens.size() == 1);
  CHECK(minimal.evaluation_tokens.size() == 1);

  Document one;
  one.tokens = {3};
  CHECK_THROWS_AS(split_tokens(one, 0.7, 1), std::invalid_argument);
}

TEST_CASE("token split: parts partition the token multiset") {
  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    Document doc;
    const std::size_t n = 2 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      doc.tokens.push_back(static_cast<std::uint32_t>(rng.below(5)));
    }
    const double fraction = rng.uniform(0.05, 0.95);
    auto split = split_tokens(doc, fraction, rep);

    std::map<std::uint32_t, int> original, recombined;
    for (const auto w : doc.tokens) original[w]++;
    for (const auto w : split.estimation_tokens) recombined[w]++;
    for (const auto w : split.evaluation_tokens) recombined[w]++;
    CHECK(original == recombined);
    CHECK(split.estimation_tokens.size() + split.evaluation_tokens.size() == n);
    CHECK(split.estimation_tokens.size() >= 1);
    CHECK(split.evaluation_tokens.size() >= 1);
  }
}

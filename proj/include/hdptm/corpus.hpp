#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hdptm {

// Dense term <-> id mapping; ids are assigned in order of first appearance.
struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::uint32_t> index;

  std::uint32_t size() const { return static_cast<std::uint32_t>(terms.size()); }

  // id of term, inserting if unseen
  std::uint32_t intern(const std::string& term);
};

struct Document {
  std::vector<std::uint32_t> tokens;

  std::size_t length() const { return tokens.size(); }
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t doc_count() const { return documents.size(); }
  std::size_t total_tokens() const;
};

enum class CorpusFormat {
  plain_text_lines,  // UTF-8, one document per line, whitespace tokens
  uci_bow,           // header lines D, V, NNZ; then "d w c" triples, 1-based
};

// Parses "plain" / "uci-bow"; throws on anything else.
CorpusFormat parse_corpus_format(const std::string& name);

std::pair<Corpus, Vocabulary> load_corpus(const std::string& path, CorpusFormat format);

struct TrainHeldoutSplit {
  Corpus train;
  Corpus heldout;
};

// Deterministic document-level split; |train| = round(train_fraction * D).
// Document order within each part follows the input corpus.
TrainHeldoutSplit split_train_heldout(const Corpus& corpus, double train_fraction,
                                      std::uint64_t seed);

// A held-out document partitioned by token position into the part used to
// estimate document parameters and the part scored for perplexity.
struct HeldOutDocument {
  std::vector<std::uint32_t> estimation_tokens;
  std::vector<std::uint32_t> evaluation_tokens;
};

// Partitions doc.tokens at uniformly random positions without replacement;
// the estimation part gets round(estimation_fraction * n_d) tokens, clamped
// so both parts stay non-empty. Requires n_d >= 2.
HeldOutDocument split_tokens(const Document& doc, double estimation_fraction,
                             std::uint64_t seed);

}  // namespace hdptm

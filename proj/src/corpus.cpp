#include "hdptm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hdptm/rng.hpp"

namespace hdptm {

std::uint32_t Vocabulary::intern(const std::string& term) {
  auto it = index.find(term);
  if (it != index.end()) {
    return it->second;
  }
  const auto id = static_cast<std::uint32_t>(terms.size());
  terms.push_back(term);
  index.emplace(term, id);
  return id;
}

std::size_t Corpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& doc : documents) {
    n += doc.tokens.size();
  }
  return n;
}

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "plain" || name == "plain-text-lines") {
    return CorpusFormat::plain_text_lines;
  }
  if (name == "uci-bow" || name == "uci") {
    return CorpusFormat::uci_bow;
  }
  throw std::invalid_argument("unknown corpus format: " + name);
}

namespace {

// lowercase ASCII letters, drop everything that is not alphanumeric
std::string normalize_token(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (std::isalpha(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isdigit(c)) {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::pair<Corpus, Vocabulary> load_plain_text(const std::string& path, std::istream& in) {
  Corpus corpus;
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Document doc;
    std::istringstream iss(line);
    std::string raw;
    while (iss >> raw) {
      const std::string term = normalize_token(raw);
      if (!term.empty()) {
        doc.tokens.push_back(vocab.intern(term));
      }
    }
    if (doc.tokens.empty()) {
      ++dropped;
      continue;
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (dropped > 0) {
    std::cerr << "warning: " << path << ": dropped " << dropped
              << " empty document(s)\n";
  }
  if (corpus.documents.empty()) {
    throw std::runtime_error(path + ": empty corpus");
  }
  return {std::move(corpus), std::move(vocab)};
}

long long parse_ll(const std::string& path, std::size_t line_no, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long value = std::stoll(text, &pos);
    if (pos != text.size()) {
      throw std::invalid_argument(text);
    }
    return value;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": parse error: expected integer, got \"" + text + "\"");
  }
}

std::pair<Corpus, Vocabulary> load_uci_bow(const std::string& path, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long long header[3];  // D, V, NNZ
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path + ": truncated header (expected 3 lines D, V, NNZ)");
    }
    ++line_no;
    std::istringstream iss(line);
    std::string field;
    if (!(iss >> field)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty header line");
    }
    header[i] = parse_ll(path, line_no, field);
  }
  const long long D = header[0];
  const long long V = header[1];
  const long long NNZ = header[2];
  if (D <= 0 || V <= 0 || NNZ <= 0) {
    throw std::runtime_error(path + ": empty corpus");
  }

  Corpus corpus;
  corpus.documents.resize(static_cast<std::size_t>(D));
  long long entries = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream iss(line);
    std::string ds, ws, cs;
    if (!(iss >> ds)) {
      continue;  // blank trailing line
    }
    if (!(iss >> ws >> cs)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": parse error: expected \"d w c\"");
    }
    std::string extra;
    if (iss >> extra) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": parse error: trailing field \"" + extra + "\"");
    }
    const long long d = parse_ll(path, line_no, ds);
    const long long w = parse_ll(path, line_no, ws);
    const long long c = parse_ll(path, line_no, cs);
    if (d < 1 || d > D) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": document id " +
                               std::to_string(d) + " out of range [1, " + std::to_string(D) + "]");
    }
    if (w < 1 || w > V) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": term id " +
                               std::to_string(w) + " out of range [1, " + std::to_string(V) + "]");
    }
    if (c < 1) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": count " +
                               std::to_string(c) + " must be positive");
    }
    auto& tokens = corpus.documents[static_cast<std::size_t>(d - 1)].tokens;
    tokens.insert(tokens.end(), static_cast<std::size_t>(c),
                  static_cast<std::uint32_t>(w - 1));
    ++entries;
  }
  if (entries != NNZ) {
    std::cerr << "warning: " << path << ": header declares " << NNZ << " entries, found "
              << entries << "\n";
  }

  std::size_t dropped = 0;
  auto& docs = corpus.documents;
  docs.erase(std::remove_if(docs.begin(), docs.end(),
                            [&](const Document& doc) {
                              if (doc.tokens.empty()) {
                                ++dropped;
                                return true;
                              }
                              return false;
                            }),
             docs.end());
  if (dropped > 0) {
    std::cerr << "warning: " << path << ": dropped " << dropped
              << " empty document(s)\n";
  }
  if (docs.empty()) {
    throw std::runtime_error(path + ": empty corpus");
  }

  Vocabulary vocab;
  vocab.terms.reserve(static_cast<std::size_t>(V));
  for (long long w = 1; w <= V; ++w) {
    vocab.intern("w" + std::to_string(w));
  }
  return {std::move(corpus), std::move(vocab)};
}

}  // namespace

std::pair<Corpus, Vocabulary> load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open corpus file: " + path);
  }
  switch (format) {
    case CorpusFormat::plain_text_lines:
      return load_plain_text(path, in);
    case CorpusFormat::uci_bow:
      return load_uci_bow(path, in);
  }
  throw std::logic_error("unreachable corpus format");
}

TrainHeldoutSplit split_train_heldout(const Corpus& corpus, double train_fraction,
                                      std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  const std::size_t D = corpus.doc_count();
  if (D == 0) {
    throw std::invalid_argument("cannot split an empty corpus");
  }
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(D)));

  std::vector<std::size_t> ids(D);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed);
  rng.shuffle(ids);

  std::vector<bool> in_train(D, false);
  for (std::size_t i = 0; i < n_train; ++i) {
    in_train[ids[i]] = true;
  }

  TrainHeldoutSplit split;
  for (std::size_t d = 0; d < D; ++d) {
    (in_train[d] ? split.train : split.heldout).documents.push_back(corpus.documents[d]);
  }
  if (split.heldout.documents.empty()) {
    std::cerr << "warning: held-out part is empty (D=" << D << ", fraction="
              << train_fraction << ")\n";
  }
  if (split.train.documents.empty()) {
    std::cerr << "warning: training part is empty (D=" << D << ", fraction="
              << train_fraction << ")\n";
  }
  return split;
}

HeldOutDocument split_tokens(const Document& doc, double estimation_fraction,
                             std::uint64_t seed) {
  if (!(estimation_fraction > 0.0 && estimation_fraction < 1.0)) {
    throw std::invalid_argument("estimation fraction must lie in (0, 1)");
  }
  const std::size_t n = doc.tokens.size();
  if (n < 2) {
    throw std::invalid_argument("token split requires a document with at least 2 tokens");
  }
  auto n_est = static_cast<std::size_t>(
      std::lround(estimation_fraction * static_cast<double>(n)));
  n_est = std::clamp<std::size_t>(n_est, 1, n - 1);

  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  Rng rng(seed);
  rng.shuffle(positions);

  std::vector<bool> is_estimation(n, false);
  for (std::size_t i = 0; i < n_est; ++i) {
    is_estimation[positions[i]] = true;
  }

  HeldOutDocument out;
  out.estimation_tokens.reserve(n_est);
  out.evaluation_tokens.reserve(n - n_est);
  for (std::size_t i = 0; i < n; ++i) {
    (is_estimation[i] ? out.estimation_tokens : out.evaluation_tokens)
        .push_back(doc.tokens[i]);
  }
  return out;
}

}  // namespace hdptm

#include "hdptm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <stdexcept>

namespace hdptm {

DocState estimate_heldout_doc(const GlobalState& global, const HeldOutDocument& doc,
                              std::uint32_t passes, const ScheduleConfig& doc_schedule) {
  if (passes < 1) {
    throw std::invalid_argument("held-out estimation requires at least one pass");
  }
  const std::uint32_t T = global.truncation();
  DocState ds;
  ds.n_d = static_cast<double>(doc.estimation_tokens.size());
  ds.n_dk.assign(T, ds.n_d / static_cast<double>(T));
  if (doc.estimation_tokens.empty()) {
    std::cerr << "warning: held-out document has no estimation tokens; "
                 "scoring with the prior alone\n";
    return ds;
  }
  std::vector<double> q(T);
  for (std::uint32_t pass = 0; pass < passes; ++pass) {
    StepSchedule rho = doc_schedule.make();
    for (const std::uint32_t w : doc.estimation_tokens) {
      compute_qz(ds, global, w, q);
      update_doc_counts(ds, q, rho.rho());
      rho.advance();
    }
  }
  return ds;
}

double perplexity_from_log_sum(double total_log_prob, std::size_t n_tokens) {
  if (n_tokens == 0) {
    throw std::invalid_argument("perplexity requires at least one evaluation token");
  }
  return std::exp(-total_log_prob / static_cast<double>(n_tokens));
}

namespace {

// log-probability sum over one document's evaluation tokens
double doc_log_prob(const GlobalState& global, const DocState& ds,
                    const std::vector<std::uint32_t>& tokens, std::vector<double>& theta,
                    std::vector<double>& column) {
  const std::uint32_t T = global.truncation();
  const double v_beta = static_cast<double>(global.vocab_size()) * global.beta;
  const double denom = ds.n_d + global.doc_prior_total();
  for (std::uint32_t k = 0; k < T; ++k) {
    theta[k] = (ds.n_dk[k] + global.doc_prior(k)) / denom;
  }
  double log_sum = 0.0;
  for (const std::uint32_t w : tokens) {
    global.term_column(w, column);
    double p = 0.0;
    for (std::uint32_t k = 0; k < T; ++k) {
      p += theta[k] * (column[k] + global.beta) / (global.topic_total(k) + v_beta);
    }
    if (!(p > 0.0)) {
      throw std::runtime_error("predictive probability is zero");
    }
    log_sum += std::log(p);
  }
  return log_sum;
}

}  // namespace

double perplexity(const GlobalState& global, std::span<const DocState> doc_states,
                  std::span<const std::vector<std::uint32_t>> eval_tokens, unsigned threads) {
  if (doc_states.size() != eval_tokens.size()) {
    throw std::invalid_argument("doc states and evaluation token lists must align");
  }
  const std::size_t D = doc_states.size();
  std::size_t n_eval = 0;
  for (const auto& tokens : eval_tokens) {
    n_eval += tokens.size();
  }
  if (n_eval == 0) {
    throw std::invalid_argument("perplexity requires at least one evaluation token");
  }

  std::vector<double> per_doc(D, 0.0);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(D)));
  if (workers == 1) {
    const std::uint32_t T = global.truncation();
    std::vector<double> theta(T), column(T);
    for (std::size_t d = 0; d < D; ++d) {
      per_doc[d] = doc_log_prob(global, doc_states[d], eval_tokens[d], theta, column);
    }
  } else {
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      futures.push_back(std::async(std::launch::async, [&, t] {
        const std::uint32_t T = global.truncation();
        std::vector<double> theta(T), column(T);
        for (std::size_t d = t; d < D; d += workers) {
          per_doc[d] = doc_log_prob(global, doc_states[d], eval_tokens[d], theta, column);
        }
      }));
    }
    for (auto& f : futures) {
      f.get();  // rethrows any worker failure
    }
  }

  double log_sum = 0.0;  // fixed reduction order: document index
  for (const double v : per_doc) {
    log_sum += v;
  }
  return perplexity_from_log_sum(log_sum, n_eval);
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::pcsvb0:
      return "pcsvb0";
    case Algorithm::scvb0:
      return "scvb0";
    case Algorithm::pcvb0:
      return "pcvb0";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "pcsvb0") return Algorithm::pcsvb0;
  if (name == "scvb0") return Algorithm::scvb0;
  if (name == "pcvb0") return Algorithm::pcvb0;
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

class CurveWriter {
 public:
  CurveWriter(const std::string& path, const char* algorithm)
      : out_(path), algorithm_(algorithm) {
    if (!out_) {
      throw std::runtime_error("cannot open output file: " + path);
    }
    out_ << "algorithm,epoch,documents_seen,perplexity,wall_ms\n";
    out_.flush();
  }

  void append(const PerplexityRecord& rec) {
    out_ << algorithm_ << ',' << rec.epoch << ',' << rec.documents_seen << ','
         << format_double(rec.perplexity) << ',' << static_cast<long long>(rec.wall_ms)
         << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  const char* algorithm_;
};

}  // namespace

std::map<Algorithm, std::vector<PerplexityRecord>> run_experiment(const ExperimentConfig& config) {
  if (config.algorithms.empty()) {
    throw std::invalid_argument("no algorithms selected");
  }
  auto [corpus, vocab] = load_corpus(config.corpus_path, config.format);
  auto split = split_train_heldout(corpus, config.train_fraction, config.seed);
  if (split.train.documents.empty()) {
    throw std::runtime_error("training part is empty");
  }

  // shared token splits: every algorithm scores the same held-out sets
  std::vector<HeldOutDocument> heldout;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < split.heldout.documents.size(); ++i) {
    const auto& doc = split.heldout.documents[i];
    if (doc.length() < 2) {
      ++excluded;
      continue;
    }
    heldout.push_back(split_tokens(doc, config.estimation_fraction, mix_seed(config.seed, i)));
  }
  if (excluded > 0) {
    std::cerr << "warning: excluded " << excluded
              << " held-out document(s) with fewer than 2 tokens\n";
  }
  if (heldout.empty()) {
    throw std::runtime_error("no held-out documents with at least 2 tokens");
  }
  std::vector<std::vector<std::uint32_t>> eval_tokens;
  eval_tokens.reserve(heldout.size());
  for (const auto& h : heldout) {
    eval_tokens.push_back(h.evaluation_tokens);
  }

  std::filesystem::create_directories(config.output_dir);
  const std::size_t d_train = split.train.doc_count();
  const auto vocab_size = vocab.size();

  std::map<Algorithm, std::vector<PerplexityRecord>> results;
  for (const Algorithm algorithm : config.algorithms) {
    const std::string path =
        (std::filesystem::path(config.output_dir) / (std::string(algorithm_name(algorithm)) + ".csv"))
            .string();
    CurveWriter writer(path, algorithm_name(algorithm));
    auto& records = results[algorithm];
    const auto start = std::chrono::steady_clock::now();

    // held-out estimation uses the algorithm's own document schedule; the
    // batch baseline has none and borrows the stochastic default
    const ScheduleConfig est_schedule = algorithm == Algorithm::scvb0
                                            ? config.scvb0.doc_schedule
                                            : config.pcsvb0.doc_schedule;

    auto evaluate = [&](const GlobalState& state, std::size_t documents_seen,
                        std::uint32_t epoch) {
      std::vector<DocState> doc_states;
      doc_states.reserve(heldout.size());
      for (const auto& h : heldout) {
        doc_states.push_back(estimate_heldout_doc(state, h, config.heldout_passes,
                                                  est_schedule));
      }
      PerplexityRecord rec;
      rec.documents_seen = documents_seen;
      rec.epoch = epoch;
      rec.perplexity = perplexity(state, doc_states, eval_tokens, config.threads);
      rec.wall_ms = config.timing
                        ? std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count()
                        : 0.0;
      records.push_back(rec);
      writer.append(rec);
    };

    const TrainHook epoch_hook = [&](std::size_t documents_seen, const GlobalState& state) {
      if (documents_seen % d_train == 0) {
        evaluate(state, documents_seen,
                 static_cast<std::uint32_t>(documents_seen / d_train));
      }
    };

    switch (algorithm) {
      case Algorithm::pcsvb0:
        train_pcsvb0(split.train, vocab_size, config.pcsvb0, epoch_hook);
        break;
      case Algorithm::scvb0:
        scvb0_train(split.train, vocab_size, config.scvb0, epoch_hook);
        break;
      case Algorithm::pcvb0: {
        Pcvb0Model model(split.train, vocab_size, config.pcvb0);
        for (std::uint32_t it = 1; it <= config.pcvb0.iterations; ++it) {
          model.sweep();
          evaluate(model.state(), it * d_train, it);
        }
        break;
      }
    }
  }
  return results;
}

}  // namespace hdptm

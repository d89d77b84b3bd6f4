#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hdptm/corpus.hpp"
#include "hdptm/hdp_state.hpp"
#include "hdptm/numerics.hpp"
#include "hdptm/rng.hpp"

namespace hdptm {

struct TrainerConfig {
  ModelKind kind = ModelKind::hdp;
  std::uint32_t truncation = 200;  // T (the fixed topic count K for fixed_lda)
  double beta = 0.01;
  double alpha0 = 1.0;   // initial alpha; the fixed symmetric prior for fixed_lda
  double gamma0 = 1.0;
  ScheduleConfig doc_schedule{1.0, 10.0, 0.9};
  ScheduleConfig corpus_schedule{10.0, 1000.0, 0.9};
  ScheduleConfig hyper_schedule{5.0, 100.0, 0.9};
  std::uint32_t epochs = 30;
  std::uint64_t seed = 0;
  // When false the sticks, pi, alpha and gamma stay frozen (no re-ordering
  // either); the token-count updates still run. fixed_lda always behaves as
  // if this were false.
  bool hyper_updates_enabled = true;

  void validate() const;
};

// token posterior q_k over topics for term w given the current counts,
// normalized to sum 1
void compute_qz(const DocState& doc, const GlobalState& global, std::uint32_t w,
                std::span<double> q_out);
std::vector<double> compute_qz(const DocState& doc, const GlobalState& global,
                               std::uint32_t w);

// n_dk <- (1 - rho_d) n_dk + rho_d * n_d * q
void update_doc_counts(DocState& doc, std::span<const double> q, double rho_d);

// n_kw <- (1 - rho_c) n_kw + rho_c * n_total * q_k [w matches], with n_k
// kept consistent; delegates to the lazy-decay structure
void update_topic_counts(GlobalState& global, std::span<const double> q, std::uint32_t w,
                         double rho_c);

// optional per-document diagnostics captured by process_document
struct DocumentUpdateStats {
  std::vector<double> presence;  // after any stick re-ordering
};

// called after every processed document with the running documents-seen
// counter and a read-only view of the state
using TrainHook = std::function<void(std::size_t documents_seen, const GlobalState& state)>;

// Word-at-a-time stochastic trainer. Document states persist across epochs;
// the document-level step-size clock restarts on every visit, the corpus
// clock advances per token and the hyper clock once per document.
class Trainer {
 public:
  Trainer(const Corpus& corpus, std::uint32_t vocab_size, const TrainerConfig& config);

  // one full pass over a document: per-token posterior and count updates, then (for HDP with
  // hyper updates on) stick re-ordering, u/v, gamma and alpha
  void process_document(std::size_t doc_index, DocumentUpdateStats* stats = nullptr);

  // shuffled epochs over the corpus; returns the final state
  GlobalState train(const TrainHook& hook = {});

  GlobalState& state() { return state_; }
  const GlobalState& state() const { return state_; }
  std::span<DocState> doc_states() { return doc_states_; }

 private:
  const Corpus& corpus_;
  TrainerConfig config_;
  GlobalState state_;
  std::vector<DocState> doc_states_;
  StepSchedule rho_corpus_;
  StepSchedule rho_hyper_;
  Rng shuffle_rng_;
  std::vector<double> q_buf_;
  std::vector<double> keep_prod_;  // running prod_k (1 - q_k) within a document
};

GlobalState train_pcsvb0(const Corpus& corpus, std::uint32_t vocab_size,
                         const TrainerConfig& config, const TrainHook& hook = {});

}  // namespace hdptm

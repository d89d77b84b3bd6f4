#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hdptm/corpus.hpp"
#include "hdptm/hdp_state.hpp"
#include "hdptm/pcsvb0.hpp"

namespace hdptm {

struct PcvbConfig {
  std::uint32_t truncation = 200;
  double beta = 0.01;
  double alpha0 = 1.0;
  double gamma0 = 1.0;
  std::uint32_t iterations = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

// Batch collapsed trainer. Keeps one variational posterior per token, so the
// expected counts stay exact sums of the stored posteriors; memory grows as
// total_tokens * T.
class Pcvb0Model {
 public:
  Pcvb0Model(const Corpus& corpus, std::uint32_t vocab_size, const PcvbConfig& config);

  // subtract the token's stored posterior from the counts, recompute it from
  // the remainder, and add it back
  void update_token(std::size_t doc_index, std::size_t token_index);

  // one full iteration: token sweep, then batch u/v, pi, alpha, gamma
  void sweep();

  void iterate(std::uint32_t iterations);

  GlobalState& state() { return state_; }
  const GlobalState& state() const { return state_; }
  std::span<const DocState> doc_states() const { return doc_states_; }

  std::span<const double> token_posterior(std::size_t doc_index,
                                          std::size_t token_index) const;

  // presence matrix from the stored posteriors, one row per document
  std::vector<std::vector<double>> presence_matrix() const;

 private:
  const Corpus& corpus_;
  PcvbConfig config_;
  GlobalState state_;
  std::vector<DocState> doc_states_;
  std::vector<std::vector<double>> q_store_;  // per doc, flat [token * T + k]
  std::vector<double> q_buf_;
  std::vector<double> neg_buf_;
};

struct ScvbConfig {
  std::uint32_t topics = 50;  // K
  double alpha_fixed = 0.1;   // symmetric prior on the document simplex
  double beta = 0.01;
  ScheduleConfig doc_schedule{1.0, 10.0, 0.9};
  ScheduleConfig corpus_schedule{10.0, 1000.0, 0.9};
  std::uint32_t epochs = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

// Same stochastic loop as the HDP trainer with K fixed topics and a frozen
// symmetric document prior; no stick, alpha or gamma updates.
GlobalState scvb0_train(const Corpus& corpus, std::uint32_t vocab_size,
                        const ScvbConfig& config, const TrainHook& hook = {});

}  // namespace hdptm

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hdptm/baselines.hpp"
#include "hdptm/corpus.hpp"
#include "hdptm/hdp_state.hpp"
#include "hdptm/numerics.hpp"
#include "hdptm/pcsvb0.hpp"

namespace hdptm {

struct PerplexityRecord {
  std::size_t documents_seen = 0;
  std::uint32_t epoch = 0;
  double perplexity = 0.0;
  double wall_ms = 0.0;
};

// Fits document-topic counts for a held-out document against a frozen global
// state: per-token posterior plus document-count updates only, `passes`
// sweeps over the estimation tokens with a fresh document clock per pass.
DocState estimate_heldout_doc(const GlobalState& global, const HeldOutDocument& doc,
                              std::uint32_t passes,
                              const ScheduleConfig& doc_schedule = {1.0, 10.0, 0.9});

// exp of the negative mean log predictive probability per evaluation token,
// p(w|d) = sum_k theta_dk * phi_kw with smoothed point estimates. doc_states
// and eval_tokens align by index. Documents fan out across `threads`; the
// reduction order is fixed so the result does not depend on thread count.
double perplexity(const GlobalState& global, std::span<const DocState> doc_states,
                  std::span<const std::vector<std::uint32_t>> eval_tokens,
                  unsigned threads = 1);

double perplexity_from_log_sum(double total_log_prob, std::size_t n_tokens);

enum class Algorithm { pcsvb0, scvb0, pcvb0 };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  std::string corpus_path;
  CorpusFormat format = CorpusFormat::plain_text_lines;
  std::vector<Algorithm> algorithms;
  double train_fraction = 0.8;
  double estimation_fraction = 0.7;
  std::uint32_t heldout_passes = 20;
  std::uint64_t seed = 0;
  TrainerConfig pcsvb0;
  ScvbConfig scvb0;
  PcvbConfig pcvb0;
  std::string output_dir = ".";
  bool timing = true;  // when false, wall_ms is written as 0 so reruns are byte-identical
  unsigned threads = 1;
};

// Shared 80/20 document and 70/30 token splits, then one training run per
// selected algorithm with held-out perplexity once per epoch (stochastic) or
// per iteration (batch). Writes <output_dir>/<algorithm>.csv row by row with
// a flush after each, so partial curves survive a failure.
std::map<Algorithm, std::vector<PerplexityRecord>> run_experiment(const ExperimentConfig& config);

}  // namespace hdptm

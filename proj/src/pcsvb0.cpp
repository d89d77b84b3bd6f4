#include "hdptm/pcsvb0.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hdptm {

void TrainerConfig::validate() const {
  if (kind == ModelKind::hdp && truncation < 2) {
    throw std::invalid_argument("truncation level must be at least 2");
  }
  if (kind == ModelKind::fixed_lda && truncation < 1) {
    throw std::invalid_argument("topic count must be at least 1");
  }
  if (epochs < 1) {
    throw std::invalid_argument("epochs must be at least 1");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("beta must be positive");
  }
  if (!(alpha0 > 0.0) || !(gamma0 > 0.0)) {
    throw std::invalid_argument("alpha and gamma must be positive");
  }
  // surfaces bad schedule parameters before any training work starts
  doc_schedule.make();
  corpus_schedule.make();
  if (kind == ModelKind::hdp && hyper_updates_enabled) {
    hyper_schedule.make();
  }
}

void compute_qz(const DocState& doc, const GlobalState& global, std::uint32_t w,
                std::span<double> q_out) {
  const std::uint32_t T = global.truncation();
  if (w >= global.vocab_size()) {
    throw std::invalid_argument("term id out of range");
  }
  global.term_column(w, q_out);  // q_out holds n_kw for now
  const double v_beta = static_cast<double>(global.vocab_size()) * global.beta;
  double norm = 0.0;
  for (std::uint32_t k = 0; k < T; ++k) {
    const double value = (doc.n_dk[k] + global.doc_prior(k)) * (q_out[k] + global.beta) /
                         (global.topic_total(k) + v_beta);
    q_out[k] = value;
    norm += value;
  }
  if (!(norm > 0.0)) {
    throw std::runtime_error("token posterior normalizer is zero");
  }
  const double inv = 1.0 / norm;
  for (std::uint32_t k = 0; k < T; ++k) {
    q_out[k] *= inv;
  }
}

std::vector<double> compute_qz(const DocState& doc, const GlobalState& global,
                               std::uint32_t w) {
  std::vector<double> q(global.truncation());
  compute_qz(doc, global, w, q);
  return q;
}

void update_doc_counts(DocState& doc, std::span<const double> q, double rho_d) {
  if (!(rho_d > 0.0 && rho_d <= 1.0)) {
    throw std::invalid_argument("step size must lie in (0, 1]");
  }
  const double keep = 1.0 - rho_d;
  const double gain = rho_d * doc.n_d;
  for (std::size_t k = 0; k < doc.n_dk.size(); ++k) {
    doc.n_dk[k] = keep * doc.n_dk[k] + gain * q[k];
  }
}

void update_topic_counts(GlobalState& global, std::span<const double> q, std::uint32_t w,
                         double rho_c) {
  global.stochastic_token_update(w, q, rho_c);
}

Trainer::Trainer(const Corpus& corpus, std::uint32_t vocab_size, const TrainerConfig& config)
    : corpus_(corpus),
      config_(config),
      state_((config.validate(),
              GlobalState::init_training(config.kind, config.truncation, vocab_size,
                                         static_cast<double>(corpus.total_tokens()),
                                         corpus.doc_count(), config.alpha0, config.gamma0,
                                         config.beta, config.seed))),
      rho_corpus_(config.corpus_schedule.make()),
      rho_hyper_(config.hyper_schedule.make()),
      shuffle_rng_(config.seed ^ 0x9e3779b97f4a7c15ull),
      q_buf_(config.truncation),
      keep_prod_(config.truncation) {
  doc_states_.reserve(corpus.doc_count());
  const double T = static_cast<double>(config.truncation);
  for (const auto& doc : corpus.documents) {
    DocState ds;
    ds.n_d = static_cast<double>(doc.length());
    ds.n_dk.assign(config.truncation, ds.n_d / T);
    doc_states_.push_back(std::move(ds));
  }
}

void Trainer::process_document(std::size_t doc_index, DocumentUpdateStats* stats) {
  const Document& doc = corpus_.documents[doc_index];
  DocState& ds = doc_states_[doc_index];
  const std::uint32_t T = state_.truncation();
  if (doc.tokens.empty()) {
    return;
  }

  StepSchedule rho_doc = config_.doc_schedule.make();
  std::fill(keep_prod_.begin(), keep_prod_.end(), 1.0);
  for (const std::uint32_t w : doc.tokens) {
    compute_qz(ds, state_, w, q_buf_);
    update_doc_counts(ds, q_buf_, rho_doc.rho());
    rho_doc.advance();
    update_topic_counts(state_, q_buf_, w, rho_corpus_.rho());
    rho_corpus_.advance();
    for (std::uint32_t k = 0; k < T; ++k) {
      keep_prod_[k] *= 1.0 - q_buf_[k];
    }
  }

  std::vector<double> presence(T);
  for (std::uint32_t k = 0; k < T; ++k) {
    presence[k] = std::clamp(1.0 - keep_prod_[k], 0.0, 1.0);
  }

  if (config_.kind == ModelKind::hdp && config_.hyper_updates_enabled) {
    const auto perm = reorder_sticks(state_, doc_states_);
    std::vector<double> permuted(T);
    for (std::uint32_t k = 0; k < T; ++k) {
      permuted[k] = presence[perm[k]];
    }
    presence.swap(permuted);

    const double rho_h = rho_hyper_.rho();
    stochastic_update_uv(state_, presence, rho_h);
    state_.pi = stick_breaking(state_.u, state_.v);
    state_.gamma = update_gamma(state_.u, state_.v, T);
    state_.alpha = stochastic_update_alpha(state_.alpha, presence, ds.n_d, rho_h);
    rho_hyper_.advance();
  }

  if (stats) {
    stats->presence = std::move(presence);
  }
}

GlobalState Trainer::train(const TrainHook& hook) {
  std::vector<std::size_t> order(corpus_.doc_count());
  std::iota(order.begin(), order.end(), 0);
  std::size_t documents_seen = 0;
  for (std::uint32_t epoch = 0; epoch < config_.epochs; ++epoch) {
    shuffle_rng_.shuffle(order);
    for (const std::size_t d : order) {
      process_document(d);
      ++documents_seen;
      if (hook) {
        hook(documents_seen, state_);
      }
    }
  }
  return std::move(state_);
}

GlobalState train_pcsvb0(const Corpus& corpus, std::uint32_t vocab_size,
                         const TrainerConfig& config, const TrainHook& hook) {
  Trainer trainer(corpus, vocab_size, config);
  return trainer.train(hook);
}

}  // namespace hdptm

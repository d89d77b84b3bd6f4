#include "hdptm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hdptm/rng.hpp"

namespace hdptm {

void PcvbConfig::validate() const {
  if (truncation < 2) {
    throw std::invalid_argument("truncation level must be at least 2");
  }
  if (!(beta > 0.0) || !(alpha0 > 0.0) || !(gamma0 > 0.0)) {
    throw std::invalid_argument("beta, alpha and gamma must be positive");
  }
}

void ScvbConfig::validate() const {
  if (topics < 1) {
    throw std::invalid_argument("topic count must be at least 1");
  }
  if (!(alpha_fixed > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("beta must be positive");
  }
  if (epochs < 1) {
    throw std::invalid_argument("epochs must be at least 1");
  }
  doc_schedule.make();
  corpus_schedule.make();
}

Pcvb0Model::Pcvb0Model(const Corpus& corpus, std::uint32_t vocab_size,
                       const PcvbConfig& config)
    : corpus_(corpus),
      config_(config),
      state_((config.validate(), GlobalState(ModelKind::hdp, config.truncation, vocab_size))),
      q_buf_(config.truncation),
      neg_buf_(config.truncation) {
  const std::uint32_t T = config.truncation;
  const std::size_t n_total = corpus.total_tokens();
  if (n_total == 0) {
    throw std::invalid_argument("initialization requires a non-empty corpus");
  }
  state_.alpha = config.alpha0;
  state_.gamma = config.gamma0;
  state_.beta = config.beta;
  state_.n_total = static_cast<double>(n_total);
  state_.doc_count = corpus.doc_count();
  state_.u.assign(T, 1.0);
  state_.v.assign(T, config.gamma0);
  state_.pi = stick_breaking(state_.u, state_.v);

  // per-token posteriors start near uniform with seeded noise; every count
  // below is the exact sum of these
  Rng rng(config.seed);
  doc_states_.reserve(corpus.doc_count());
  q_store_.reserve(corpus.doc_count());
  for (const auto& doc : corpus.documents) {
    DocState ds;
    ds.n_d = static_cast<double>(doc.length());
    ds.n_dk.assign(T, 0.0);
    std::vector<double> store(doc.length() * static_cast<std::size_t>(T));
    for (std::size_t i = 0; i < doc.length(); ++i) {
      double* q = &store[i * T];
      double norm = 0.0;
      for (std::uint32_t k = 0; k < T; ++k) {
        q[k] = 1.0 + rng.uniform(-0.5, 0.5);
        norm += q[k];
      }
      for (std::uint32_t k = 0; k < T; ++k) {
        q[k] /= norm;
        ds.n_dk[k] += q[k];
      }
      state_.add_token_mass(doc.tokens[i], std::span<const double>(q, T));
    }
    doc_states_.push_back(std::move(ds));
    q_store_.push_back(std::move(store));
  }
}

std::span<const double> Pcvb0Model::token_posterior(std::size_t doc_index,
                                                    std::size_t token_index) const {
  const std::uint32_t T = state_.truncation();
  return {&q_store_[doc_index][token_index * T], T};
}

void Pcvb0Model::update_token(std::size_t doc_index, std::size_t token_index) {
  const std::uint32_t T = state_.truncation();
  const std::uint32_t w = corpus_.documents[doc_index].tokens[token_index];
  DocState& ds = doc_states_[doc_index];
  double* q_old = &q_store_[doc_index][token_index * T];

  for (std::uint32_t k = 0; k < T; ++k) {
    neg_buf_[k] = -q_old[k];
    ds.n_dk[k] += neg_buf_[k];
  }
  state_.add_token_mass(w, neg_buf_);

  constexpr double kFloor = -1e-9;
  state_.term_column(w, q_buf_);
  for (std::uint32_t k = 0; k < T; ++k) {
    if (ds.n_dk[k] < kFloor || q_buf_[k] < kFloor || state_.topic_total(k) < kFloor) {
      throw std::runtime_error("pcvb0: count went negative after excluding a token");
    }
  }

  compute_qz(ds, state_, w, q_buf_);
  for (std::uint32_t k = 0; k < T; ++k) {
    ds.n_dk[k] += q_buf_[k];
    q_old[k] = q_buf_[k];
  }
  state_.add_token_mass(w, q_buf_);
}

std::vector<std::vector<double>> Pcvb0Model::presence_matrix() const {
  const std::uint32_t T = state_.truncation();
  std::vector<std::vector<double>> presence(corpus_.doc_count());
  for (std::size_t d = 0; d < corpus_.doc_count(); ++d) {
    std::vector<double> keep(T, 1.0);
    const std::size_t n = corpus_.documents[d].length();
    for (std::size_t i = 0; i < n; ++i) {
      const double* q = &q_store_[d][i * T];
      for (std::uint32_t k = 0; k < T; ++k) {
        keep[k] *= 1.0 - q[k];
      }
    }
    presence[d].resize(T);
    for (std::uint32_t k = 0; k < T; ++k) {
      presence[d][k] = std::clamp(1.0 - keep[k], 0.0, 1.0);
    }
  }
  return presence;
}

void Pcvb0Model::sweep() {
  for (std::size_t d = 0; d < corpus_.doc_count(); ++d) {
    const std::size_t n = corpus_.documents[d].length();
    for (std::size_t i = 0; i < n; ++i) {
      update_token(d, i);
    }
  }

  const auto presence = presence_matrix();
  auto sticks = batch_update_uv(presence, state_.gamma);
  state_.u = std::move(sticks.u);
  state_.v = std::move(sticks.v);
  state_.pi = stick_breaking(state_.u, state_.v);

  std::vector<double> lengths(corpus_.doc_count());
  for (std::size_t d = 0; d < corpus_.doc_count(); ++d) {
    lengths[d] = static_cast<double>(corpus_.documents[d].length());
  }
  const double alpha_raw = batch_update_alpha(presence, lengths, state_.alpha);
  state_.alpha = std::clamp(alpha_raw, kAlphaMin, kAlphaMax);
  state_.gamma = update_gamma(state_.u, state_.v, state_.truncation());
}

void Pcvb0Model::iterate(std::uint32_t iterations) {
  for (std::uint32_t it = 0; it < iterations; ++it) {
    sweep();
  }
}

GlobalState scvb0_train(const Corpus& corpus, std::uint32_t vocab_size,
                        const ScvbConfig& config, const TrainHook& hook) {
  config.validate();
  TrainerConfig trainer_config;
  trainer_config.kind = ModelKind::fixed_lda;
  trainer_config.truncation = config.topics;
  trainer_config.beta = config.beta;
  trainer_config.alpha0 = config.alpha_fixed;
  trainer_config.gamma0 = 1.0;
  trainer_config.doc_schedule = config.doc_schedule;
  trainer_config.corpus_schedule = config.corpus_schedule;
  trainer_config.epochs = config.epochs;
  trainer_config.seed = config.seed;
  trainer_config.hyper_updates_enabled = false;
  return train_pcsvb0(corpus, vocab_size, trainer_config, hook);
}

}  // namespace hdptm

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hdptm {

// clamp bounds for the point-estimated concentrations; the estimates can
// collapse to 0 early in training when no topic presence registers
inline constexpr double kAlphaMin = 1e-4;
inline constexpr double kAlphaMax = 1e4;
inline constexpr double kGammaMin = 1e-4;
inline constexpr double kGammaMax = 1e4;

// Expected per-document topic counts; sum(n_dk) tracks n_d.
struct DocState {
  std::vector<double> n_dk;
  double n_d = 0.0;
};

enum class ModelKind : std::uint8_t {
  hdp = 0,        // document prior alpha * pi_k from the learned sticks
  fixed_lda = 1,  // symmetric document prior: alpha per topic, K topics fixed
};

// Global expected-count state shared by the stochastic and batch inference
// paths: topic-term counts n_kw, topic totals n_k, stick parameters u/v,
// topic weights pi and the concentrations alpha, gamma.
//
// n_kw is stored term-major (contiguous in k for fixed w) behind a
// multiplicative lazy-decay scale: the true count is raw * scale. A
// stochastic token update then costs O(T) instead of O(T*V). The scale is
// folded back into the raw array before it can underflow.
class GlobalState {
 public:
  GlobalState(ModelKind kind, std::uint32_t T, std::uint32_t V);

  // Symmetric-plus-noise starting point: n_kw = base * (1 + eps), eps uniform
  // in [-0.5, 0.5) from the seed, rescaled so the total mass is n_total;
  // u = 1, v = gamma0; pi from the sticks (uniform for fixed_lda).
  static GlobalState init_training(ModelKind kind, std::uint32_t T, std::uint32_t V,
                                   double n_total, std::size_t doc_count,
                                   double alpha0, double gamma0, double beta,
                                   std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  std::uint32_t truncation() const { return T_; }
  std::uint32_t vocab_size() const { return V_; }

  double topic_word(std::uint32_t k, std::uint32_t w) const {
    return n_kw_raw_[static_cast<std::size_t>(w) * T_ + k] * scale_;
  }
  double topic_total(std::uint32_t k) const { return n_k_raw_[k] * scale_; }

  // n_kw for every k at term w, descaled, written into out (size T)
  void term_column(std::uint32_t w, std::span<double> out) const;

  // exact-count bookkeeping: n_kw[k][w] += delta[k], n_k[k] += delta[k]
  void add_token_mass(std::uint32_t w, std::span<const double> delta);

  // stochastic token update: every entry decays by (1 - rho); column w and
  // the topic totals receive rho * n_total * q_k
  void stochastic_token_update(std::uint32_t w, std::span<const double> q, double rho);

  // fold the lazy multiplier into the raw counts (no-op at scale 1)
  void fold_scale();
  double scale() const { return scale_; }

  // document-level Dirichlet prior on topic k and its total over topics
  double doc_prior(std::uint32_t k) const {
    return kind_ == ModelKind::hdp ? alpha * pi[k] : alpha;
  }
  double doc_prior_total() const {
    return kind_ == ModelKind::hdp ? alpha : alpha * static_cast<double>(T_);
  }

  // wholesale count replacement (snapshot loading); resets the scale to 1
  void set_counts_row_major(std::span<const double> n_kw, std::span<const double> n_k);

  std::vector<double> u;   // stick numerator parameters, length T
  std::vector<double> v;   // stick denominator parameters, length T
  std::vector<double> pi;  // topic weights, length T, sums to 1
  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 0.01;
  double n_total = 0.0;     // total training token count
  std::size_t doc_count = 0;

 private:
  friend std::vector<std::uint32_t> reorder_sticks(GlobalState&, std::span<DocState>);

  ModelKind kind_;
  std::uint32_t T_;
  std::uint32_t V_;
  double scale_ = 1.0;
  std::vector<double> n_kw_raw_;  // [w * T + k]
  std::vector<double> n_k_raw_;
};

// pi from stick proportions u_k/(u_k+v_k), with the last proportion pinned
// to 1 so the weights sum to one at the truncation
std::vector<double> stick_breaking(const std::vector<double>& u, const std::vector<double>& v);

// P(topic used at least once) = 1 - prod_i (1 - q_i), clamped to [0, 1]
double expected_presence(std::span<const double> q);

struct StickParams {
  std::vector<double> u;
  std::vector<double> v;
};

// u_k = 1 + sum_d presence[d][k]; v_k = gamma + sum over later topics and
// all documents. presence is D rows of length T, entries in [0, 1].
StickParams batch_update_uv(const std::vector<std::vector<double>>& presence, double gamma);

// convex step toward the single-document surrogate corpus (document repeated
// doc_count times); uses state.gamma and state.doc_count
void stochastic_update_uv(GlobalState& state, std::span<const double> doc_presence,
                          double rho_h);

// Sorts topics by descending topic total and applies the permutation to u,
// v, n_kw rows, n_k and every DocState in live_docs, then recomputes pi.
// Returns the permutation (new index -> old index) so callers can remap any
// per-topic vectors of their own. Stable: an already sorted state maps to
// the identity.
std::vector<std::uint32_t> reorder_sticks(GlobalState& state, std::span<DocState> live_docs);

// One fixed-point step of the alpha point estimate. Returns the raw value,
// which is 0 when no presence registered anywhere; callers clamp.
double batch_update_alpha(const std::vector<std::vector<double>>& presence,
                          std::span<const double> doc_lengths, double alpha_old);

// Stochastic alpha step with the old alpha inside the digammas; the
// single-document surrogate is clamped to [kAlphaMin, kAlphaMax] before the
// convex combination, as is the result.
double stochastic_update_alpha(double alpha, std::span<const double> doc_presence,
                               double n_d, double rho_h);

// gamma point estimate (T-1) / sum_{k<T} [Psi(u_k+v_k) - Psi(v_k)], clamped
// to [kGammaMin, kGammaMax]; requires T >= 2
double update_gamma(const std::vector<double>& u, const std::vector<double>& v,
                    std::uint32_t T);

}  // namespace hdptm

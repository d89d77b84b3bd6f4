#include "hdptm/hdp_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hdptm/numerics.hpp"
#include "hdptm/rng.hpp"

namespace hdptm {

namespace {

constexpr double kScaleFloor = 1e-30;

void check_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

void check_step(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("step size must lie in (0, 1]");
  }
}

}  // namespace

GlobalState::GlobalState(ModelKind kind, std::uint32_t T, std::uint32_t V)
    : u(T, 1.0),
      v(T, 1.0),
      pi(T, T > 0 ? 1.0 / static_cast<double>(T) : 0.0),
      kind_(kind),
      T_(T),
      V_(V),
      n_kw_raw_(static_cast<std::size_t>(T) * V, 0.0),
      n_k_raw_(T, 0.0) {
  if (T == 0 || V == 0) {
    throw std::invalid_argument("global state requires T >= 1 and V >= 1");
  }
}

GlobalState GlobalState::init_training(ModelKind kind, std::uint32_t T, std::uint32_t V,
                                       double n_total, std::size_t doc_count,
                                       double alpha0, double gamma0, double beta,
                                       std::uint64_t seed) {
  if (!(n_total > 0.0)) {
    throw std::invalid_argument("initialization requires a non-empty corpus");
  }
  if (!(alpha0 > 0.0 && gamma0 > 0.0 && beta > 0.0)) {
    throw std::invalid_argument("alpha, gamma and beta must be positive");
  }
  GlobalState state(kind, T, V);
  state.alpha = alpha0;
  state.gamma = gamma0;
  state.beta = beta;
  state.n_total = n_total;
  state.doc_count = doc_count;

  Rng rng(seed);
  const double base = n_total / (static_cast<double>(T) * static_cast<double>(V));
  double total = 0.0;
  for (auto& cell : state.n_kw_raw_) {
    cell = base * (1.0 + rng.uniform(-0.5, 0.5));
    total += cell;
  }
  const double rescale = n_total / total;
  for (auto& cell : state.n_kw_raw_) {
    cell *= rescale;
  }
  for (std::uint32_t w = 0; w < V; ++w) {
    const double* col = &state.n_kw_raw_[static_cast<std::size_t>(w) * T];
    for (std::uint32_t k = 0; k < T; ++k) {
      state.n_k_raw_[k] += col[k];
    }
  }

  state.u.assign(T, 1.0);
  state.v.assign(T, gamma0);
  if (kind == ModelKind::hdp) {
    state.pi = stick_breaking(state.u, state.v);
  } else {
    state.pi.assign(T, 1.0 / static_cast<double>(T));
  }
  return state;
}

void GlobalState::term_column(std::uint32_t w, std::span<double> out) const {
  const double* col = &n_kw_raw_[static_cast<std::size_t>(w) * T_];
  for (std::uint32_t k = 0; k < T_; ++k) {
    out[k] = col[k] * scale_;
  }
}

void GlobalState::add_token_mass(std::uint32_t w, std::span<const double> delta) {
  double* col = &n_kw_raw_[static_cast<std::size_t>(w) * T_];
  const double inv_scale = 1.0 / scale_;
  for (std::uint32_t k = 0; k < T_; ++k) {
    const double d = delta[k] * inv_scale;
    col[k] += d;
    n_k_raw_[k] += d;
  }
}

void GlobalState::stochastic_token_update(std::uint32_t w, std::span<const double> q,
                                          double rho) {
  check_step(rho);
  const double keep = 1.0 - rho;
  if (keep == 0.0) {
    // full replacement: all history is wiped, restart the scale
    std::fill(n_kw_raw_.begin(), n_kw_raw_.end(), 0.0);
    std::fill(n_k_raw_.begin(), n_k_raw_.end(), 0.0);
    scale_ = 1.0;
  } else {
    scale_ *= keep;
    if (scale_ < kScaleFloor) {
      fold_scale();
    }
  }
  const double deposit = rho * n_total / scale_;
  double* col = &n_kw_raw_[static_cast<std::size_t>(w) * T_];
  for (std::uint32_t k = 0; k < T_; ++k) {
    const double d = deposit * q[k];
    col[k] += d;
    n_k_raw_[k] += d;
  }
}

void GlobalState::fold_scale() {
  if (scale_ == 1.0) {
    return;
  }
  for (auto& cell : n_kw_raw_) {
    cell *= scale_;
  }
  for (auto& cell : n_k_raw_) {
    cell *= scale_;
  }
  scale_ = 1.0;
}

void GlobalState::set_counts_row_major(std::span<const double> n_kw,
                                       std::span<const double> n_k) {
  if (n_kw.size() != n_kw_raw_.size() || n_k.size() != n_k_raw_.size()) {
    throw std::invalid_argument("count array sizes do not match T and V");
  }
  for (std::uint32_t k = 0; k < T_; ++k) {
    for (std::uint32_t w = 0; w < V_; ++w) {
      n_kw_raw_[static_cast<std::size_t>(w) * T_ + k] =
          n_kw[static_cast<std::size_t>(k) * V_ + w];
    }
  }
  std::copy(n_k.begin(), n_k.end(), n_k_raw_.begin());
  scale_ = 1.0;
}

std::vector<double> stick_breaking(const std::vector<double>& u,
                                   const std::vector<double>& v) {
  const std::size_t T = u.size();
  if (T == 0 || v.size() != T) {
    throw std::invalid_argument("stick parameters must be non-empty and equal length");
  }
  std::vector<double> pi(T);
  double remaining = 1.0;
  for (std::size_t k = 0; k < T; ++k) {
    double bar;
    if (k + 1 == T) {
      bar = 1.0;  // the last proportion takes all remaining mass
    } else {
      if (!(u[k] > 0.0 && v[k] > 0.0)) {
        throw std::invalid_argument("stick parameters must be positive");
      }
      bar = u[k] / (u[k] + v[k]);
    }
    pi[k] = bar * remaining;
    remaining *= 1.0 - bar;
  }
  return pi;
}

double expected_presence(std::span<const double> q) {
  double prod = 1.0;
  for (double x : q) {
    check_probability(x, "token posterior value");
    prod *= 1.0 - x;
  }
  return std::clamp(1.0 - prod, 0.0, 1.0);
}

StickParams batch_update_uv(const std::vector<std::vector<double>>& presence, double gamma) {
  if (presence.empty()) {
    throw std::invalid_argument("presence matrix must have at least one row");
  }
  const std::size_t T = presence.front().size();
  std::vector<double> col_sum(T, 0.0);
  for (const auto& row : presence) {
    if (row.size() != T) {
      throw std::invalid_argument("presence rows must all have length T");
    }
    for (std::size_t k = 0; k < T; ++k) {
      check_probability(row[k], "presence");
      col_sum[k] += row[k];
    }
  }
  StickParams out;
  out.u.resize(T);
  out.v.resize(T);
  double tail = 0.0;  // sum over topics after k, all documents
  for (std::size_t k = T; k-- > 0;) {
    out.u[k] = 1.0 + col_sum[k];
    out.v[k] = gamma + tail;
    tail += col_sum[k];
  }
  return out;
}

void stochastic_update_uv(GlobalState& state, std::span<const double> doc_presence,
                          double rho_h) {
  check_step(rho_h);
  const std::size_t T = state.u.size();
  if (doc_presence.size() != T) {
    throw std::invalid_argument("presence vector length must equal T");
  }
  const double D = static_cast<double>(state.doc_count);
  const double keep = 1.0 - rho_h;
  double tail = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    check_probability(doc_presence[k], "presence");
    state.u[k] = keep * state.u[k] + rho_h * (1.0 + D * doc_presence[k]);
    state.v[k] = keep * state.v[k] + rho_h * (state.gamma + D * tail);
    tail += doc_presence[k];
  }
}

std::vector<std::uint32_t> reorder_sticks(GlobalState& state, std::span<DocState> live_docs) {
  const std::uint32_t T = state.T_;
  std::vector<std::uint32_t> perm(T);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
    return state.n_k_raw_[a] > state.n_k_raw_[b];
  });

  bool identity = true;
  for (std::uint32_t k = 0; k < T; ++k) {
    if (perm[k] != k) {
      identity = false;
      break;
    }
  }
  if (!identity) {
    std::vector<double> scratch(T);
    auto permute = [&](std::vector<double>& vec) {
      for (std::uint32_t k = 0; k < T; ++k) {
        scratch[k] = vec[perm[k]];
      }
      std::copy(scratch.begin(), scratch.end(), vec.begin());
    };
    permute(state.u);
    permute(state.v);
    permute(state.n_k_raw_);
    for (std::uint32_t w = 0; w < state.V_; ++w) {
      double* col = &state.n_kw_raw_[static_cast<std::size_t>(w) * T];
      for (std::uint32_t k = 0; k < T; ++k) {
        scratch[k] = col[perm[k]];
      }
      std::copy(scratch.begin(), scratch.end(), col);
    }
    for (auto& doc : live_docs) {
      permute(doc.n_dk);
    }
  }
  if (state.kind_ == ModelKind::hdp) {
    state.pi = stick_breaking(state.u, state.v);
  }
  return perm;
}

double batch_update_alpha(const std::vector<std::vector<double>>& presence,
                          std::span<const double> doc_lengths, double alpha_old) {
  if (!(alpha_old > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (presence.size() != doc_lengths.size()) {
    throw std::invalid_argument("presence rows and doc lengths must align");
  }
  double numerator = 0.0;
  for (const auto& row : presence) {
    for (double p : row) {
      check_probability(p, "presence");
      numerator += p;
    }
  }
  double denominator = 0.0;
  for (double n_d : doc_lengths) {
    if (!(n_d >= 1.0)) {
      throw std::invalid_argument("document lengths must be at least 1");
    }
    denominator += digamma(n_d + alpha_old) - digamma(alpha_old);
  }
  if (!(denominator > 0.0)) {
    throw std::runtime_error("alpha update: non-positive digamma denominator");
  }
  return numerator / denominator;
}

double stochastic_update_alpha(double alpha, std::span<const double> doc_presence,
                               double n_d, double rho_h) {
  check_step(rho_h);
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (!(n_d >= 1.0)) {
    throw std::invalid_argument("document length must be at least 1");
  }
  double presence_sum = 0.0;
  for (double p : doc_presence) {
    check_probability(p, "presence");
    presence_sum += p;
  }
  const double denominator = digamma(n_d + alpha) - digamma(alpha);
  if (!(denominator > 0.0)) {
    throw std::runtime_error("alpha update: non-positive digamma denominator");
  }
  const double surrogate = std::clamp(presence_sum / denominator, kAlphaMin, kAlphaMax);
  const double next = (1.0 - rho_h) * alpha + rho_h * surrogate;
  return std::clamp(next, kAlphaMin, kAlphaMax);
}

double update_gamma(const std::vector<double>& u, const std::vector<double>& v,
                    std::uint32_t T) {
  if (T < 2) {
    throw std::invalid_argument("gamma undefined at truncation 1");
  }
  if (u.size() < T || v.size() < T) {
    throw std::invalid_argument("stick parameter vectors shorter than T");
  }
  double denominator = 0.0;
  for (std::uint32_t k = 0; k + 1 < T; ++k) {
    if (!(u[k] > 0.0 && v[k] > 0.0)) {
      throw std::invalid_argument("stick parameters must be positive");
    }
    denominator += digamma(u[k] + v[k]) - digamma(v[k]);
  }
  if (!(denominator > 0.0)) {
    throw std::runtime_error("gamma update: non-positive digamma denominator");
  }
  return std::clamp(static_cast<double>(T - 1) / denominator, kGammaMin, kGammaMax);
}

}  // namespace hdptm

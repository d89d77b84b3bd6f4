#pragma once

// Shared helpers for the test suites: independent reference
// implementations (kept deliberately naive so they cannot share a bug with
// the library code paths they check), tiny corpus builders and temp-file
// plumbing.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "hdptm/corpus.hpp"
#include "hdptm/hdp_state.hpp"
#include "hdptm/rng.hpp"

namespace testsupport {

inline bool approx_abs(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

inline bool approx_rel(double a, double b, double tol) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) <= tol * scale;
}

// Dense reference for the stochastic topic-count update: the O(T*V) loop
// written exactly as stated, no lazy scaling.
struct DenseTopicCounts {
  std::uint32_t T, V;
  double n_total;
  std::vector<double> n_kw;  // [k * V + w]
  std::vector<double> n_k;

  DenseTopicCounts(std::uint32_t T_, std::uint32_t V_, double n_total_)
      : T(T_), V(V_), n_total(n_total_), n_kw(std::size_t(T_) * V_, 0.0), n_k(T_, 0.0) {}

  void update(std::uint32_t w, const std::vector<double>& q, double rho) {
    for (std::uint32_t k = 0; k < T; ++k) {
      for (std::uint32_t x = 0; x < V; ++x) {
        double value = (1.0 - rho) * n_kw[std::size_t(k) * V + x];
        if (x == w) {
          value += rho * n_total * q[k];
        }
        n_kw[std::size_t(k) * V + x] = value;
      }
      n_k[k] = (1.0 - rho) * n_k[k] + rho * n_total * q[k];
    }
  }
};

// Scalar reference for the token posterior: recomputed term by term from
// plain inputs, independent of GlobalState internals.
inline std::vector<double> naive_token_posterior(const std::vector<double>& n_dk,
                                                 const std::vector<double>& prior,
                                                 const std::vector<double>& n_kw_col,
                                                 const std::vector<double>& n_k,
                                                 double beta, std::uint32_t V) {
  const std::size_t T = n_dk.size();
  std::vector<double> q(T);
  double norm = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    q[k] = (n_dk[k] + prior[k]) * (n_kw_col[k] + beta) / (n_k[k] + double(V) * beta);
    norm += q[k];
  }
  for (auto& x : q) {
    x /= norm;
  }
  return q;
}

// Brute-force batch-collapsed sweep: for every token, recompute the
// leave-one-out counts from scratch over the whole posterior store and apply
// the update formula directly. Quadratic and slow, but with no shared
// bookkeeping to hide bugs.
struct NaivePcvb0 {
  const hdptm::Corpus& corpus;
  std::uint32_t T, V;
  double alpha, beta;
  std::vector<double> pi;
  std::vector<std::vector<std::vector<double>>> q;  // [doc][token][topic]

  void sweep() {
    for (std::size_t d = 0; d < corpus.doc_count(); ++d) {
      for (std::size_t i = 0; i < corpus.documents[d].length(); ++i) {
        update_token(d, i);
      }
    }
  }

  void update_token(std::size_t d, std::size_t i) {
    const std::uint32_t w = corpus.documents[d].tokens[i];
    std::vector<double> n_dk(T, 0.0), n_kw_col(T, 0.0), n_k(T, 0.0);
    for (std::size_t dd = 0; dd < corpus.doc_count(); ++dd) {
      for (std::size_t ii = 0; ii < corpus.documents[dd].length(); ++ii) {
        if (dd == d && ii == i) {
          continue;  // exclude the current token
        }
        for (std::uint32_t k = 0; k < T; ++k) {
          const double value = q[dd][ii][k];
          if (dd == d) {
            n_dk[k] += value;
          }
          if (corpus.documents[dd].tokens[ii] == w) {
            n_kw_col[k] += value;
          }
          n_k[k] += value;
        }
      }
    }
    double norm = 0.0;
    std::vector<double> next(T);
    for (std::uint32_t k = 0; k < T; ++k) {
      next[k] = (n_dk[k] + alpha * pi[k]) * (n_kw_col[k] + beta) /
                (n_k[k] + static_cast<double>(V) * beta);
      norm += next[k];
    }
    for (std::uint32_t k = 0; k < T; ++k) {
      next[k] /= norm;
    }
    q[d][i] = next;
  }
};

// random normalized probability vector
inline std::vector<double> random_simplex(hdptm::Rng& rng, std::size_t T) {
  std::vector<double> q(T);
  double norm = 0.0;
  for (auto& x : q) {
    x = rng.uniform(1e-3, 1.0);
    norm += x;
  }
  for (auto& x : q) {
    x /= norm;
  }
  return q;
}

inline hdptm::Corpus make_corpus(const std::vector<std::vector<std::uint32_t>>& docs) {
  hdptm::Corpus corpus;
  for (const auto& tokens : docs) {
    hdptm::Document doc;
    doc.tokens = tokens;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

// fixed toy corpus: 3 documents over 5 terms, 14 tokens
inline hdptm::Corpus toy_corpus() {
  return make_corpus({{0, 1, 2, 0, 1}, {2, 3, 4, 3}, {0, 4, 4, 0, 1}});
}

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    static std::mt19937_64 counter(std::random_device{}());
    path_ = base / ("hdptm_test_" + std::to_string(counter()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path path() const { return path_; }

  std::string write_file(const std::string& name, const std::string& content) const {
    const auto file = path_ / name;
    std::ofstream out(file);
    out << content;
    return file.string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testsupport

#include "hdptm/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace hdptm {

namespace {

constexpr char kMagic[8] = {'H', 'D', 'P', 'T', 'M', 'S', 'N', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw std::runtime_error(path + ": truncated snapshot");
  }
  return value;
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, std::size_t count, const std::string& path) {
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) {
    throw std::runtime_error(path + ": truncated snapshot");
  }
  return values;
}

}  // namespace

void save_snapshot(const std::string& path, const GlobalState& state,
                   const Vocabulary& vocab) {
  if (vocab.size() != state.vocab_size()) {
    throw std::invalid_argument("vocabulary size does not match the model");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open snapshot file for writing: " + path);
  }
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint8_t>(state.kind()));
  const std::uint32_t T = state.truncation();
  const std::uint32_t V = state.vocab_size();
  write_pod(out, T);
  write_pod(out, V);
  write_pod(out, static_cast<std::uint64_t>(state.doc_count));
  write_pod(out, state.alpha);
  write_pod(out, state.gamma);
  write_pod(out, state.beta);
  write_pod(out, state.n_total);

  write_doubles(out, state.u);
  write_doubles(out, state.v);
  write_doubles(out, state.pi);

  std::vector<double> n_k(T);
  for (std::uint32_t k = 0; k < T; ++k) {
    n_k[k] = state.topic_total(k);
  }
  write_doubles(out, n_k);

  std::vector<double> row(V);
  for (std::uint32_t k = 0; k < T; ++k) {
    for (std::uint32_t w = 0; w < V; ++w) {
      row[w] = state.topic_word(k, w);
    }
    write_doubles(out, row);
  }

  write_pod(out, static_cast<std::uint32_t>(vocab.terms.size()));
  for (const auto& term : vocab.terms) {
    write_pod(out, static_cast<std::uint32_t>(term.size()));
    out.write(term.data(), static_cast<std::streamsize>(term.size()));
  }
  if (!out) {
    throw std::runtime_error("failed writing snapshot: " + path);
  }
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open snapshot file: " + path);
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + ": not a model snapshot");
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported snapshot version " +
                             std::to_string(version));
  }
  const auto kind_byte = read_pod<std::uint8_t>(in, path);
  if (kind_byte > 1) {
    throw std::runtime_error(path + ": unknown model kind");
  }
  const auto kind = static_cast<ModelKind>(kind_byte);
  const auto T = read_pod<std::uint32_t>(in, path);
  const auto V = read_pod<std::uint32_t>(in, path);
  if (T == 0 || V == 0) {
    throw std::runtime_error(path + ": degenerate snapshot dimensions");
  }
  const auto doc_count = read_pod<std::uint64_t>(in, path);
  const double alpha = read_pod<double>(in, path);
  const double gamma = read_pod<double>(in, path);
  const double beta = read_pod<double>(in, path);
  const double n_total = read_pod<double>(in, path);

  GlobalState state(kind, T, V);
  state.doc_count = static_cast<std::size_t>(doc_count);
  state.alpha = alpha;
  state.gamma = gamma;
  state.beta = beta;
  state.n_total = n_total;
  state.u = read_doubles(in, T, path);
  state.v = read_doubles(in, T, path);
  state.pi = read_doubles(in, T, path);
  const auto n_k = read_doubles(in, T, path);
  const auto n_kw = read_doubles(in, static_cast<std::size_t>(T) * V, path);
  state.set_counts_row_major(n_kw, n_k);

  const auto term_count = read_pod<std::uint32_t>(in, path);
  if (term_count != V) {
    throw std::runtime_error(path + ": vocabulary size does not match V");
  }
  Vocabulary vocab;
  vocab.terms.reserve(term_count);
  for (std::uint32_t i = 0; i < term_count; ++i) {
    const auto len = read_pod<std::uint32_t>(in, path);
    std::string term(len, '\0');
    in.read(term.data(), static_cast<std::streamsize>(len));
    if (!in) {
      throw std::runtime_error(path + ": truncated snapshot");
    }
    vocab.intern(term);
  }
  return Snapshot{std::move(state), std::move(vocab)};
}

}  // namespace hdptm

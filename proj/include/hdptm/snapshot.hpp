#pragma once

#include <string>

#include "hdptm/corpus.hpp"
#include "hdptm/hdp_state.hpp"

namespace hdptm {

struct Snapshot {
  GlobalState state;
  Vocabulary vocab;
};

// Binary model container (layout documented in the README): header with
// magic/version/kind and the scalar parameters, then u, v, pi, n_k, n_kw in
// row-major order, then the vocabulary as length-prefixed strings. All
// numbers little-endian; the lazy-decay scale is folded out before writing.
void save_snapshot(const std::string& path, const GlobalState& state,
                   const Vocabulary& vocab);

Snapshot load_snapshot(const std::string& path);

}  // namespace hdptm

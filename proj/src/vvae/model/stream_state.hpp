#pragma once

#include <stdexcept>
#include <vector>

#include "vvae/core/autodiff.hpp"
#include "vvae/core/ops.hpp"
#include "vvae/core/tensor.hpp"

namespace vvae {

// Per-stream cache bank for chunked inference. Every causal conv layer owns
// one slot holding the last two temporal slices of its *input*, which is
// exactly the padding window a full pass would see at the chunk boundary.
// Slots are visited in forward order, so the cursor rewinds per chunk.
template <typename T>
struct StreamState {
  std::vector<Tensor<T>> caches;
  std::size_t cursor = 0;
  std::int64_t chunks_done = 0;

  void begin_chunk() { cursor = 0; }
  void end_chunk() { ++chunks_done; }
};

template <typename T>
Tensor<T> apply_causal_conv(const Tensor<T>& x, const Tensor<T>& k,
                            const Tensor<T>& b, StreamState<T>* ss) {
  if (!ss) return dwconv3d_causal(x, k, b);
  const Tensor<T>* cache = nullptr;
  if (ss->chunks_done > 0) {
    if (ss->cursor >= ss->caches.size())
      throw std::logic_error("stream: cache bank exhausted");
    cache = &ss->caches[ss->cursor];
  } else {
    if (ss->cursor != ss->caches.size())
      throw std::logic_error("stream: cache bank out of sync");
    ss->caches.emplace_back();
  }
  Tensor<T> next;
  Tensor<T> y = dwconv3d_causal(x, k, b, cache, &next);
  ss->caches[ss->cursor] = std::move(next);
  ++ss->cursor;
  return y;
}

// Training records full clips; streaming while recording is not a thing.
template <typename T>
ad::Var<T> apply_causal_conv(ad::Var<T> x, ad::Var<T> k, ad::Var<T> b,
                             StreamState<T>* ss) {
  if (ss) throw std::logic_error("stream: caching unsupported on tape");
  return dwconv3d_causal(x, k, b);
}

}  // namespace vvae

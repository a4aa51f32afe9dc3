#pragma once

#include <vector>

#include "vvae/model/autoencoder.hpp"

// Temporal tiling. Cached mode reproduces the full pass exactly: every
// causal conv resumes from the two input slices the full pass would have
// seen, and chunk boundaries sit on 4-frame blocks so the wavelet/patch
// stage never straddles a boundary. Overlapped mode restarts each group
// with zero padding and discards the overlapped head; it is approximate.

namespace vvae {

// Splits [1+T,H,W,3] into a leading chunk of `first` frames (first = 1+4k)
// followed by chunks of `rest` frames (rest = 4m).
template <typename T>
std::vector<Tensor<T>> split_video(const Tensor<T>& x, std::int64_t first,
                                   std::int64_t rest);

// Same split on the latent/time axis: `first` rows then `rest` rows.
template <typename T>
std::vector<Tensor<T>> split_rows(const Tensor<T>& z, std::int64_t first,
                                  std::int64_t rest);

template <typename T>
Tensor<T> concat_all_axis0(const std::vector<Tensor<T>>& parts);

// Chunked encode/decode against one stream state; outputs concatenate to
// the full-pass result.
template <typename T>
std::vector<Tensor<T>> stream_encode(const Autoencoder<T>& m,
                                     const std::vector<Tensor<T>>& chunks,
                                     StreamState<T>& ss);

template <typename T>
std::vector<Tensor<T>> stream_decode(const Autoencoder<T>& m,
                                     const std::vector<Tensor<T>>& zchunks,
                                     StreamState<T>& ss);

// Overlapped group processing at 4-frame block granularity. Each group
// after the first re-runs `overlap_blocks` already-covered blocks for
// context with zero-padded convs, keeping the earlier chunk's outputs for
// the overlapped rows.
template <typename T>
Tensor<T> overlapped_encode(const Autoencoder<T>& m, const Tensor<T>& x,
                            int chunk_blocks, int overlap_blocks);

}  // namespace vvae

#include "vvae/model/streaming.hpp"

namespace vvae {

template <typename T>
std::vector<Tensor<T>> split_video(const Tensor<T>& x, std::int64_t first,
                                   std::int64_t rest) {
  if (x.ndim() != 4) throw shape_error("split_video: [frames,H,W,3] expected");
  const std::int64_t frames = x.extent(0);
  if (first < 1 || (first - 1) % 4 != 0)
    throw input_error("split_video: first chunk must cover 1+4k frames");
  if (rest < 4 || rest % 4 != 0)
    throw input_error("split_video: chunk length must be a multiple of 4");
  if (first > frames) throw input_error("split_video: first chunk too long");
  std::vector<Tensor<T>> out;
  out.push_back(slice_axis0(x, 0, first));
  for (std::int64_t at = first; at < frames; at += rest)
    out.push_back(slice_axis0(x, at, std::min(rest, frames - at)));
  return out;
}

template <typename T>
std::vector<Tensor<T>> split_rows(const Tensor<T>& z, std::int64_t first,
                                  std::int64_t rest) {
  const std::int64_t rows = z.extent(0);
  if (first < 1 || rest < 1) throw input_error("split_rows: bad sizes");
  if (first > rows) throw input_error("split_rows: first chunk too long");
  std::vector<Tensor<T>> out;
  out.push_back(slice_axis0(z, 0, first));
  for (std::int64_t at = first; at < rows; at += rest)
    out.push_back(slice_axis0(z, at, std::min(rest, rows - at)));
  return out;
}

template <typename T>
Tensor<T> concat_all_axis0(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw input_error("concat_all_axis0: empty");
  Tensor<T> out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i)
    out = concat_axis0(out, parts[i]);
  return out;
}

template <typename T>
std::vector<Tensor<T>> stream_encode(const Autoencoder<T>& m,
                                     const std::vector<Tensor<T>>& chunks,
                                     StreamState<T>& ss) {
  std::vector<Tensor<T>> out;
  out.reserve(chunks.size());
  for (const auto& c : chunks) out.push_back(m.encode_chunk(c, ss).z);
  return out;
}

template <typename T>
std::vector<Tensor<T>> stream_decode(const Autoencoder<T>& m,
                                     const std::vector<Tensor<T>>& zchunks,
                                     StreamState<T>& ss) {
  std::vector<Tensor<T>> out;
  out.reserve(zchunks.size());
  for (const auto& z : zchunks) out.push_back(m.decode_chunk(z, ss));
  return out;
}

template <typename T>
Tensor<T> overlapped_encode(const Autoencoder<T>& m, const Tensor<T>& x,
                            int chunk_blocks, int overlap_blocks) {
  if (chunk_blocks <= overlap_blocks || overlap_blocks < 0)
    throw input_error("overlapped_encode: need chunk > overlap >= 0");
  const auto& cfg = m.config();
  const auto& w = m.weights();
  if (x.ndim() != 4 || (x.extent(0) - 1) % 4 != 0)
    throw shape_error("overlapped_encode: [1+4k,H,W,3] expected");
  const std::int64_t B = (x.extent(0) - 1) / 4;

  // Leading group includes frame 0 and runs the image path.
  const std::int64_t c0 = std::min<std::int64_t>(chunk_blocks, B);
  std::vector<Tensor<T>> parts;
  {
    Tensor<T> g = slice_axis0(x, 0, 1 + 4 * c0);
    PatchEmb<Tensor<T>> emb = patchify(g, w.patch, cfg);
    Tensor<T> p = encoder_forward(emb, w.enc);
    parts.push_back(sense(p, w.bneck, false, nullptr).z);
  }
  std::int64_t covered = c0;
  while (covered < B) {
    const std::int64_t b0 = covered - overlap_blocks;
    const std::int64_t bend = std::min<std::int64_t>(b0 + chunk_blocks, B);
    Tensor<T> g = slice_axis0(x, 1 + 4 * b0, 4 * (bend - b0));
    PatchEmb<Tensor<T>> emb = patchify(g, w.patch, cfg, false);
    Tensor<T> p = encoder_forward(emb, w.enc);  // zero-padded restart
    Tensor<T> z = sense(p, w.bneck, false, nullptr).z;
    parts.push_back(slice_axis0(z, covered - b0, bend - covered));
    covered = bend;
  }
  return concat_all_axis0(parts);
}

#define VVAE_STREAM_INSTANTIATE(T)                                          \
  template std::vector<Tensor<T>> split_video<T>(const Tensor<T>&,          \
                                                 std::int64_t, std::int64_t);\
  template std::vector<Tensor<T>> split_rows<T>(const Tensor<T>&,           \
                                                std::int64_t, std::int64_t);\
  template Tensor<T> concat_all_axis0<T>(const std::vector<Tensor<T>>&);    \
  template std::vector<Tensor<T>> stream_encode<T>(                         \
      const Autoencoder<T>&, const std::vector<Tensor<T>>&, StreamState<T>&);\
  template std::vector<Tensor<T>> stream_decode<T>(                         \
      const Autoencoder<T>&, const std::vector<Tensor<T>>&, StreamState<T>&);\
  template Tensor<T> overlapped_encode<T>(const Autoencoder<T>&,            \
                                          const Tensor<T>&, int, int);

VVAE_STREAM_INSTANTIATE(float)
VVAE_STREAM_INSTANTIATE(double)
#undef VVAE_STREAM_INSTANTIATE

}  // namespace vvae

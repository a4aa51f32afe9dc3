#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "vvae/model/streaming.hpp"

using namespace vvae;
using vvae::test::rand_tensor;

namespace {

ModelConfig small_cfg() {
  ModelConfig cfg;
  cfg.d1 = 8;
  cfg.d2 = 24;
  cfg.D = 32;
  cfg.d = 4;
  cfg.seed = 5;
  return cfg;
}

template <typename T>
Tensor<T> rand_video(std::int64_t frames, std::int64_t hw, Rng& rng) {
  return rand_tensor<T>({frames, hw, hw, 3}, rng);
}

}  // namespace

TEST_CASE("single chunk equals the full pass exactly") {
  Autoencoder<float> m(small_cfg());
  Rng rng(71);
  auto x = rand_video<float>(17, 16, rng);
  auto full = m.encode(x).z;
  StreamState<float> ss;
  auto chunks = stream_encode(m, {x}, ss);
  REQUIRE(chunks.size() == 1);
  CHECK(max_abs_diff(full, chunks[0]) == 0.0);
}

TEST_CASE("17 frames as [5,4,4,4] chunks match the full encode") {
  Autoencoder<float> m(small_cfg());
  Rng rng(72);
  auto x = rand_video<float>(17, 16, rng);
  auto full = m.encode(x).z;
  StreamState<float> ss;
  auto zs = stream_encode(m, split_video(x, 5, 4), ss);
  auto z = concat_all_axis0(zs);
  CHECK(z.shape() == full.shape());
  CHECK(max_abs_diff(full, z) < 1e-5);
}

TEST_CASE("stream equivalence holds in f64 to 1e-12") {
  ModelConfig cfg = small_cfg();
  Autoencoder<double> m(cfg);
  Rng rng(73);
  auto x = rand_video<double>(17, 16, rng);
  auto full = m.encode(x).z;
  StreamState<double> ss;
  auto z = concat_all_axis0(stream_encode(m, split_video(x, 9, 8), ss));
  CHECK(max_abs_diff(full, z) < 1e-12);

  auto dec_full = m.decode(full);
  StreamState<double> ds;
  auto dec = concat_all_axis0(stream_decode(m, split_rows(full, 3, 2), ds));
  CHECK(max_abs_diff(dec_full, dec) < 1e-12);
}

TEST_CASE("random chunkings reproduce the full pass (property)") {
  Autoencoder<float> m(small_cfg());
  Rng rng(74);
  auto x = rand_video<float>(33, 16, rng);
  auto full_z = m.encode(x).z;
  auto full_y = m.decode(full_z);

  for (int trial = 0; trial < 8; ++trial) {
    // Random first chunk 1+4a, then random 4-frame multiples.
    std::vector<Tensor<float>> chunks;
    std::int64_t a = 1 + std::int64_t(rng.next_u64() % 3);  // 1..3 blocks
    chunks.push_back(slice_axis0(x, 0, 1 + 4 * a));
    std::int64_t at = 1 + 4 * a;
    while (at < 33) {
      std::int64_t b = 1 + std::int64_t(rng.next_u64() % 3);
      b = std::min(b, (33 - at) / 4);
      chunks.push_back(slice_axis0(x, at, 4 * b));
      at += 4 * b;
    }
    StreamState<float> ss;
    auto z = concat_all_axis0(stream_encode(m, chunks, ss));
    CHECK(max_abs_diff(full_z, z) < 1e-5);

    // Mirror on the decode side with a random row split.
    const std::int64_t first_rows = 1 + std::int64_t(rng.next_u64() % 3);
    const std::int64_t rest_rows = 1 + std::int64_t(rng.next_u64() % 3);
    StreamState<float> ds;
    auto y = concat_all_axis0(
        stream_decode(m, split_rows(full_z, first_rows, rest_rows), ds));
    CHECK(max_abs_diff(full_y, y) < 1e-5);
  }
}

TEST_CASE("replay determinism: state is a function of the prefix") {
  Autoencoder<float> m(small_cfg());
  Rng rng(75);
  auto x = rand_video<float>(17, 16, rng);
  auto chunks = split_video(x, 5, 4);

  StreamState<float> s1, s2;
  auto z1 = stream_encode(m, chunks, s1);
  auto z2 = stream_encode(m, chunks, s2);
  REQUIRE(z1.size() == z2.size());
  for (std::size_t i = 0; i < z1.size(); ++i)
    CHECK(max_abs_diff(z1[i], z2[i]) == 0.0);
  REQUIRE(s1.caches.size() == s2.caches.size());
  for (std::size_t i = 0; i < s1.caches.size(); ++i)
    CHECK(max_abs_diff(s1.caches[i], s2.caches[i]) == 0.0);
}

TEST_CASE("chunking errors") {
  Autoencoder<float> m(small_cfg());
  Rng rng(76);
  auto x = rand_video<float>(17, 16, rng);
  CHECK_THROWS_AS(split_video(x, 4, 4), input_error);
  CHECK_THROWS_AS(split_video(x, 5, 3), input_error);

  // A continuation chunk that is not a multiple of 4 frames.
  StreamState<float> ss;
  (void)m.encode_chunk(slice_axis0(x, 0, 5), ss);
  CHECK_THROWS_AS(m.encode_chunk(slice_axis0(x, 5, 3), ss), shape_error);
}

TEST_CASE("cached streaming keeps peak memory under the full pass") {
  Autoencoder<float> m(small_cfg());
  Rng rng(77);
  auto x = rand_video<float>(65, 32, rng);

  reset_peak_alloc();
  const auto base = alloc_stats();
  auto full = m.encode(x).z;
  const std::int64_t full_peak = alloc_stats().peak_bytes - base.current_bytes;

  full = Tensor<float>();
  reset_peak_alloc();
  const auto base2 = alloc_stats();
  StreamState<float> ss;
  std::vector<Tensor<float>> outs;
  for (auto& c : split_video(x, 5, 4)) outs.push_back(m.encode_chunk(c, ss).z);
  const std::int64_t chunk_peak =
      alloc_stats().peak_bytes - base2.current_bytes;
  CHECK(chunk_peak < full_peak / 2);
}

TEST_CASE("overlapped mode: overlap 0 equals naive independent chunks") {
  Autoencoder<float> m(small_cfg());
  Rng rng(78);
  auto x = rand_video<float>(17, 16, rng);
  auto z = overlapped_encode(m, x, 2, 0);
  CHECK(z.shape() == m.encode(x).z.shape());

  // Naive: each group processed fresh, no context at all.
  auto g0 = m.encode(slice_axis0(x, 0, 9)).z;  // leading group, 2 blocks
  StreamState<float> fresh;
  (void)fresh;
  PatchEmb<Tensor<float>> emb =
      patchify(slice_axis0(x, 9, 8), m.weights().patch, m.config(), false);
  auto p = encoder_forward(emb, m.weights().enc);
  auto g1 = sense(p, m.weights().bneck, false, nullptr).z;
  auto naive = concat_axis0(g0, g1);
  CHECK(max_abs_diff(z, naive) == 0.0);
}

TEST_CASE("overlapped mode is approximate, cached mode is not") {
  Autoencoder<float> m(small_cfg());
  Rng rng(79);
  auto x = rand_video<float>(33, 16, rng);
  auto full = m.encode(x).z;

  StreamState<float> ss;
  auto cached = concat_all_axis0(stream_encode(m, split_video(x, 5, 4), ss));
  const double dev_cached = max_abs_diff(full, cached);

  auto over = overlapped_encode(m, x, 2, 1);
  CHECK(over.shape() == full.shape());
  const double dev_over = max_abs_diff(full, over);
  CHECK(dev_over >= dev_cached);
  CHECK(dev_over > 1e-4);  // genuinely approximate on random weights

  // Degenerate sliding window still produces a valid shape.
  auto slide = overlapped_encode(m, x, 3, 2);
  CHECK(slide.shape() == full.shape());
  CHECK_THROWS_AS(overlapped_encode(m, x, 2, 2), input_error);
}

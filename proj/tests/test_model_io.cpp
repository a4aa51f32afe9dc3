#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "testutil.hpp"
#include "vvae/model/autoencoder.hpp"

using namespace vvae;
using vvae::test::rand_tensor;

namespace {

ModelConfig small_cfg() {
  ModelConfig cfg;
  cfg.d1 = 8;
  cfg.d2 = 24;
  cfg.D = 32;
  cfg.d = 4;
  cfg.seed = 9;
  return cfg;
}

std::string tmp_path(const char* name) {
  return std::string("/tmp/vvae_test_") + name;
}

}  // namespace

TEST_CASE("encode/decode shape contract and determinism") {
  Autoencoder<float> m(small_cfg());
  Rng rng(61);
  auto x = rand_tensor<float>({17, 64, 64, 3}, rng);
  auto lat = m.encode(x);
  CHECK(lat.z.shape() == std::vector<std::int64_t>{5, 8, 8, 4});
  CHECK(lat.has_stats);
  auto lat2 = m.encode(x);
  CHECK(max_abs_diff(lat.z, lat2.z) == 0.0);

  auto xhat = m.decode(lat.z);
  CHECK(xhat.shape() == x.shape());

  auto img = rand_tensor<float>({1, 64, 64, 3}, rng);
  auto ilat = m.encode(img);
  CHECK(ilat.z.shape() == std::vector<std::int64_t>{1, 8, 8, 4});
  CHECK(m.decode(ilat.z).shape() == img.shape());

  // Compression ratio on the video part: d / (3 * c_t * c_s^2).
  const double video_latent = double((5 - 1) * 8 * 8 * 4);
  const double video_pixels = double((17 - 1) * 64 * 64 * 3);
  CHECK(video_latent / video_pixels == doctest::Approx(4.0 / 768.0));
}

TEST_CASE("input validation: range and divisibility") {
  Autoencoder<float> m(small_cfg());
  Tensor<float> bad({5, 16, 16, 3});
  bad[7] = 1.5f;
  CHECK_THROWS_AS(m.encode(bad), input_error);
  CHECK_THROWS_AS(m.encode(Tensor<float>({4, 16, 16, 3})), shape_error);
  CHECK_THROWS_AS(m.encode(Tensor<float>({5, 20, 16, 3})), shape_error);
  CHECK_THROWS_AS(m.decode(Tensor<float>({5, 2, 2, 3})), shape_error);
}

TEST_CASE("kl term closed forms and gradient") {
  Tensor<double> mu({3, 4});
  Tensor<double> lv({3, 4});
  CHECK(kl_term(mu, lv)[0] == 0.0);
  Tensor<double> mu1({3, 4}, 1.0);
  CHECK(kl_term(mu1, lv)[0] == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(62);
  vvae::test::GradCheck gc{
      {rand_tensor<double>({3, 4}, rng), rand_tensor<double>({3, 4}, rng)},
      [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
        (void)t;
        return kl_term(p[0], p[1]);
      }};
  CHECK(gc.max_rel_err() < 1e-4);
}

TEST_CASE("train-mode encode draws reparameterized samples") {
  Autoencoder<float> m(small_cfg());
  Rng rng(63);
  auto x = rand_tensor<float>({5, 16, 16, 3}, rng);
  Rng noise(7);
  auto a = m.encode(x, EncodeMode::train, &noise);
  CHECK(max_abs_diff(a.z, a.mu) > 0.0);
  auto b = m.encode(x, EncodeMode::infer);
  CHECK(max_abs_diff(b.z, b.mu) == 0.0);
}

TEST_CASE("checkpoint roundtrip is bit-exact") {
  Autoencoder<float> m(small_cfg());
  const std::string path = tmp_path("ckpt.ntsa");
  m.save(path);
  auto m2 = Autoencoder<float>::load(path);
  CHECK(m2.param_count() == m.param_count());

  Rng rng(64);
  auto x = rand_tensor<float>({5, 16, 16, 3}, rng);
  auto z1 = m.encode(x).z;
  auto z2 = m2.encode(x).z;
  CHECK(max_abs_diff(z1, z2) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint error paths") {
  Autoencoder<float> m(small_cfg());
  const std::string path = tmp_path("ckpt2.ntsa");
  m.save(path);

  SUBCASE("truncation is detected") {
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    in.close();
    all.resize(all.size() / 2);
    const std::string tpath = tmp_path("ckpt_trunc.ntsa");
    std::ofstream out(tpath, std::ios::binary);
    out << all;
    out.close();
    CHECK_THROWS(Autoencoder<float>::load(tpath));
    std::remove(tpath.c_str());
  }
  SUBCASE("bad magic is rejected") {
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    in.close();
    all[0] = 'X';
    const std::string tpath = tmp_path("ckpt_magic.ntsa");
    std::ofstream out(tpath, std::ios::binary);
    out << all;
    out.close();
    CHECK_THROWS_AS(Autoencoder<float>::load(tpath), input_error);
    std::remove(tpath.c_str());
  }
  SUBCASE("version byte is mandatory") {
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    in.close();
    all[4] = 9;  // version
    const std::string tpath = tmp_path("ckpt_ver.ntsa");
    std::ofstream out(tpath, std::ios::binary);
    out << all;
    out.close();
    CHECK_THROWS_AS(Autoencoder<float>::load(tpath), config_error);
    std::remove(tpath.c_str());
  }
  SUBCASE("dtype mismatch is a config error") {
    CHECK_THROWS_AS(Autoencoder<double>::load(path), config_error);
  }
  std::remove(path.c_str());
}

TEST_CASE("manifest enumerates every parameter exactly once") {
  Autoencoder<float> m(small_cfg());
  std::int64_t total = 0;
  std::set<std::string> names;
  m.weights().for_each([&](const std::string& n, Tensor<float>& t) {
    CHECK(names.insert(n).second);  // unique
    total += t.numel();
  });
  CHECK(total == m.param_count());
}

TEST_CASE("a shared model serves concurrent encodes") {
  Autoencoder<float> m(small_cfg());
  Rng rng(66);
  std::vector<Tensor<float>> inputs;
  for (int i = 0; i < 4; ++i)
    inputs.push_back(rand_tensor<float>({5, 16, 16, 3}, rng));
  std::vector<Tensor<float>> serial;
  for (const auto& x : inputs) serial.push_back(m.encode(x).z);

  std::vector<Tensor<float>> parallel(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back(
        [&, i] { parallel[std::size_t(i)] = m.encode(inputs[std::size_t(i)]).z; });
  for (auto& t : threads) t.join();
  for (int i = 0; i < 4; ++i)
    CHECK(max_abs_diff(serial[std::size_t(i)], parallel[std::size_t(i)]) ==
          0.0);
}

TEST_CASE("full-model causality on both sides") {
  Autoencoder<float> m(small_cfg());
  Rng rng(65);
  auto x = rand_tensor<float>({17, 16, 16, 3}, rng);
  auto z = m.encode(x).z;

  // Changing frames after 4t leaves latent rows 0..t untouched.
  const std::int64_t t = 2;
  Tensor<float> x2 = x;
  for (std::int64_t i = (4 * t + 1) * 16 * 16 * 3; i < x2.numel(); ++i)
    x2[i] = float(rng.uniform(-1, 1));
  auto z2 = m.encode(x2).z;
  const std::int64_t row = 2 * 2 * 4;
  for (std::int64_t i = 0; i < (t + 1) * row; ++i) CHECK(z[i] == z2[i]);

  // Changing latent rows after t leaves decoded frames 0..4t untouched.
  auto y = m.decode(z);
  Tensor<float> z3 = z;
  for (std::int64_t i = (t + 1) * row; i < z3.numel(); ++i) z3[i] += 0.37f;
  auto y3 = m.decode(z3);
  for (std::int64_t i = 0; i < (4 * t + 1) * 16 * 16 * 3; ++i)
    CHECK(y[i] == y3[i]);
}

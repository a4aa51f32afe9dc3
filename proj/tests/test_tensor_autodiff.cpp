#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "testutil.hpp"
#include "vvae/core/tensor_io.hpp"

using namespace vvae;
using vvae::test::GradCheck;
using vvae::test::project;
using vvae::test::rand_tensor;

namespace {

// Independent brute-force reference for the causal depthwise convolution:
// seven nested loops, zero spatial padding, two zero slices prepended.
Tensor<double> conv_oracle(const Tensor<double>& x, const Tensor<double>& k,
                           const Tensor<double>& b) {
  const std::int64_t T = x.extent(0), H = x.extent(1), W = x.extent(2),
                     C = x.extent(3);
  Tensor<double> y(x.shape());
  for (std::int64_t t = 0; t < T; ++t)
    for (std::int64_t h = 0; h < H; ++h)
      for (std::int64_t w = 0; w < W; ++w)
        for (std::int64_t c = 0; c < C; ++c) {
          double acc = b[c];
          for (std::int64_t dt = 0; dt < 3; ++dt)
            for (std::int64_t dh = 0; dh < 3; ++dh)
              for (std::int64_t dw = 0; dw < 3; ++dw) {
                const std::int64_t st = t - 2 + dt, sh = h - 1 + dh,
                                   sw = w - 1 + dw;
                if (st < 0 || st >= T || sh < 0 || sh >= H || sw < 0 ||
                    sw >= W)
                  continue;
                acc += k[((dt * 3 + dh) * 3 + dw) * C + c] *
                       x[((st * H + sh) * W + sw) * C + c];
              }
          y[((t * H + h) * W + w) * C + c] = acc;
        }
  return y;
}

}  // namespace

TEST_CASE("tensor basics and alloc accounting") {
  const auto before = alloc_stats().current_bytes;
  {
    Tensor<float> t({4, 5});
    CHECK(t.numel() == 20);
    CHECK(alloc_stats().current_bytes == before + 80);
    Tensor<float> u = t;
    CHECK(alloc_stats().current_bytes == before + 160);
    Tensor<float> v = std::move(u);
    CHECK(alloc_stats().current_bytes == before + 160);
    CHECK(v.numel() == 20);
  }
  CHECK(alloc_stats().current_bytes == before);
  CHECK_THROWS_AS(Tensor<float>({2, 3}).reshaped({5}), shape_error);
}

TEST_CASE("matmul_lastdim contract") {
  Rng rng(1);
  // identity case
  Tensor<float> x({2});
  x[0] = 1;
  x[1] = 2;
  Tensor<float> eye({2, 2});
  eye[0] = 1;
  eye[3] = 1;
  auto y = matmul_lastdim(x, eye);
  CHECK(y[0] == 1.0f);
  CHECK(y[1] == 2.0f);

  Tensor<float> w({2, 1});
  w[0] = 3;
  w[1] = 5;
  CHECK(matmul_lastdim(x, w)[0] == 13.0f);

  auto big = rand_tensor<float>({5, 32, 32, 512}, rng);
  auto proj = rand_tensor<float>({512, 4}, rng);
  auto out = matmul_lastdim(big, proj);
  CHECK(out.shape() == std::vector<std::int64_t>{5, 32, 32, 4});

  // exact identity on a larger matrix
  auto x2 = rand_tensor<float>({7, 33}, rng);
  Tensor<float> I({33, 33});
  for (int i = 0; i < 33; ++i) I[i * 33 + i] = 1.0f;
  auto x2i = matmul_lastdim(x2, I);
  CHECK(max_abs_diff(x2, x2i) == 0.0);

  CHECK_THROWS_AS(matmul_lastdim(x, Tensor<float>({3, 2})), shape_error);
}

TEST_CASE("dwconv3d_causal: delta kernel is identity") {
  Rng rng(2);
  auto x = rand_tensor<float>({5, 6, 7, 3}, rng);
  Tensor<float> k({3, 3, 3, 3});
  for (int c = 0; c < 3; ++c) k[((2 * 3 + 1) * 3 + 1) * 3 + c] = 1.0f;
  Tensor<float> b({3});
  auto y = dwconv3d_causal(x, k, b);
  CHECK(max_abs_diff(x, y) == 0.0);
}

TEST_CASE("dwconv3d_causal: all-ones kernel sums 27 taps at interior") {
  const float cval = 0.37f;
  Tensor<float> x({4, 5, 5, 2}, cval);
  Tensor<float> k({3, 3, 3, 2}, 1.0f);
  Tensor<float> b({2});
  auto y = dwconv3d_causal(x, k, b);
  for (std::int64_t t = 2; t < 4; ++t)
    for (std::int64_t h = 1; h < 4; ++h)
      for (std::int64_t w = 1; w < 4; ++w)
        for (std::int64_t c = 0; c < 2; ++c)
          CHECK(double(y[((t * 5 + h) * 5 + w) * 2 + c]) ==
                doctest::Approx(27.0 * cval).epsilon(1e-5));
}

TEST_CASE("dwconv3d_causal matches the brute-force oracle (f64)") {
  Rng rng(3);
  auto x = rand_tensor<double>({4, 5, 5, 2}, rng);
  auto k = rand_tensor<double>({3, 3, 3, 2}, rng);
  auto b = rand_tensor<double>({2}, rng);
  auto y = dwconv3d_causal(x, k, b);
  auto ref = conv_oracle(x, k, b);
  CHECK(max_abs_diff(y, ref) < 1e-12);
}

TEST_CASE("dwconv3d_causal causality is exact") {
  Rng rng(4);
  auto x = rand_tensor<float>({6, 4, 4, 3}, rng);
  auto k = rand_tensor<float>({3, 3, 3, 3}, rng);
  auto b = rand_tensor<float>({3}, rng);
  auto y = dwconv3d_causal(x, k, b);

  const std::int64_t t0 = 2;
  Tensor<float> x2 = x;
  for (std::int64_t i = (t0 + 1) * 4 * 4 * 3; i < x2.numel(); ++i) x2[i] = 0;
  auto y2 = dwconv3d_causal(x2, k, b);
  for (std::int64_t i = 0; i < (t0 + 1) * 4 * 4 * 3; ++i)
    CHECK(y[i] == y2[i]);
}

TEST_CASE("dwconv3d_causal cache validation and streaming equivalence") {
  Rng rng(5);
  auto x = rand_tensor<float>({6, 4, 4, 2}, rng);
  auto k = rand_tensor<float>({3, 3, 3, 2}, rng);
  auto b = rand_tensor<float>({2}, rng);

  Tensor<float> bad({1, 4, 4, 2});
  CHECK_THROWS_AS(dwconv3d_causal(x, k, b, &bad), input_error);

  auto full = dwconv3d_causal(x, k, b);
  auto c1 = slice_axis0(x, 0, 3);
  auto c2 = slice_axis0(x, 3, 3);
  Tensor<float> cache;
  auto y1 = dwconv3d_causal(c1, k, b, static_cast<const Tensor<float>*>(nullptr),
                            &cache);
  auto y2 = dwconv3d_causal(c2, k, b, &cache);
  auto joined = concat_axis0(y1, y2);
  CHECK(max_abs_diff(full, joined) == 0.0);
}

TEST_CASE("backward: linear and quadratic closed forms") {
  Rng rng(6);
  auto xv = rand_tensor<double>({4, 3}, rng);
  auto wv = rand_tensor<double>({4, 3}, rng);
  {
    ad::Tape<double> tape;
    auto w = tape.param(wv);
    auto x = tape.constant(xv);
    auto loss = sum_scalar(mul(w, x));
    tape.backward(loss);
    CHECK(max_abs_diff(tape.grad(w), xv) < 1e-14);
  }
  {
    ad::Tape<double> tape;
    auto x = tape.param(xv);
    auto y = tape.constant(wv);
    auto d = sub(x, y);
    auto loss = mean_scalar(mul(d, d));
    tape.backward(loss);
    auto expect = scale(sub(xv, wv), 2.0 / double(xv.numel()));
    CHECK(max_abs_diff(tape.grad(x), expect) < 1e-14);
  }
}

TEST_CASE("backward guards: double pass and non-scalar root") {
  ad::Tape<double> tape;
  auto x = tape.param(Tensor<double>({3}, 1.0));
  auto loss = sum_scalar(x);
  tape.backward(loss);
  CHECK_THROWS(tape.backward(loss));

  ad::Tape<double> tape2;
  auto y = tape2.param(Tensor<double>({3}, 1.0));
  CHECK_THROWS_AS(tape2.backward(y), shape_error);
}

TEST_CASE("finite-difference checks for every primitive") {
  Rng rng(7);

  auto check = [](GradCheck gc, double tol = 1e-4) {
    CHECK(gc.max_rel_err() < tol);
  };

  // matmul + bias
  check({{rand_tensor<double>({3, 5, 4}, rng), rand_tensor<double>({4, 6}, rng),
          rand_tensor<double>({6}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, add_bias_lastdim(matmul_lastdim(p[0], p[1]), p[2]));
         }});
  // transposed matmul
  check({{rand_tensor<double>({5, 6}, rng), rand_tensor<double>({4, 6}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, matmul_lastdim_t(p[0], p[1]));
         }});
  // add/sub/mul/scale/add_scalar
  check({{rand_tensor<double>({4, 4}, rng), rand_tensor<double>({4, 4}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           auto y = add(mul(p[0], p[1]), scale(sub(p[0], p[1]), 0.7));
           return project(t, add_scalar(y, 0.3));
         }});
  // scale_param
  check({{rand_tensor<double>({3, 4}, rng),
          rand_tensor<double>(std::vector<std::int64_t>{}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, scale_param(p[0], p[1]));
         }});
  // gelu / softplus / exp
  check({{rand_tensor<double>({40}, rng, -2.0, 2.0)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, gelu(p[0]));
         }});
  check({{rand_tensor<double>({40}, rng, -3.0, 3.0)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, softplus(p[0]));
         }});
  check({{rand_tensor<double>({40}, rng, -1.0, 1.0)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, exp_elem(p[0]));
         }});
  // soft_shrink in x and theta, inputs kept away from the kink
  {
    Tensor<double> x({40});
    Rng r2(8);
    for (std::int64_t i = 0; i < 40; ++i) {
      const double mag = r2.uniform(0.6, 1.5);
      x[i] = r2.uniform(0, 1) < 0.5 ? -mag : mag;
    }
    Tensor<double> th(std::vector<std::int64_t>{});
    th[0] = 0.3;
    check({{x, th},
           [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
             return project(t, soft_shrink(p[0], p[1]));
           }});
  }
  // depthwise causal conv: x, k, b
  check({{rand_tensor<double>({4, 3, 3, 2}, rng),
          rand_tensor<double>({3, 3, 3, 2}, rng),
          rand_tensor<double>({2}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, dwconv3d_causal(p[0], p[1], p[2]));
         }});
  // concat/slice on both axes + reshape
  check({{rand_tensor<double>({3, 4}, rng), rand_tensor<double>({3, 2}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           auto y = concat_lastdim(p[0], p[1]);
           return project(t, slice_lastdim(y, 1, 4));
         }});
  check({{rand_tensor<double>({3, 4}, rng), rand_tensor<double>({2, 4}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           auto y = concat_axis0(p[0], p[1]);
           return project(t, reshape(slice_axis0(y, 1, 3), {12}));
         }});
  // reductions (mean_abs away from zero)
  {
    Tensor<double> x({30});
    Rng r2(9);
    for (std::int64_t i = 0; i < 30; ++i) {
      const double mag = r2.uniform(0.4, 1.2);
      x[i] = r2.uniform(0, 1) < 0.5 ? -mag : mag;
    }
    check({{x},
           [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
             auto a = sum_scalar(p[0]);
             auto b = mean_scalar(p[0]);
             auto c = mean_abs_scalar(p[0]);
             (void)t;
             return add(add(a, b), c);
           }});
  }
  // layer norm
  check({{rand_tensor<double>({5, 8}, rng), rand_tensor<double>({8}, rng, 0.5, 1.5),
          rand_tensor<double>({8}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, layer_norm_lastdim(p[0], p[1], p[2], 1e-5));
         }});
  // patch gather/scatter
  check({{rand_tensor<double>({2, 4, 4, 3}, rng)},
         [](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           auto tok = gather_patches(p[0], 2, 2, 2);
           return project(t, scatter_patches(tok, 2, 2, 2, 3));
         }});
}

TEST_CASE("gather/scatter are exact inverses") {
  Rng rng(10);
  auto vol = rand_tensor<float>({4, 8, 8, 5}, rng);
  auto tok = gather_patches(vol, 2, 4, 4);
  CHECK(tok.shape() == std::vector<std::int64_t>{2, 2, 2, 160});
  auto back = scatter_patches(tok, 2, 4, 4, 5);
  CHECK(max_abs_diff(vol, back) == 0.0);
}

TEST_CASE("ntsr roundtrip and error paths") {
  Rng rng(11);
  auto t = rand_tensor<float>({3, 7, 2}, rng);
  std::stringstream ss;
  write_ntsr(ss, t);
  auto u = read_ntsr<float>(ss);
  CHECK(u.shape() == t.shape());
  CHECK(max_abs_diff(t, u) == 0.0);

  // dtype mismatch
  std::stringstream s2;
  write_ntsr(s2, t);
  CHECK_THROWS_AS(read_ntsr<double>(s2), input_error);

  // bad magic
  std::stringstream s3("XXXXjunkjunkjunk");
  CHECK_THROWS_AS(read_ntsr<float>(s3), input_error);

  // truncated payload
  std::stringstream s4;
  write_ntsr(s4, t);
  std::string raw = s4.str();
  raw.resize(raw.size() - 5);
  std::stringstream s5(raw);
  CHECK_THROWS_AS(read_ntsr<float>(s5), io_error);
}

TEST_CASE("f64 streaming conv chain equals full pass to 1e-12") {
  Rng rng(12);
  auto x = rand_tensor<double>({8, 4, 4, 3}, rng);
  auto k = rand_tensor<double>({3, 3, 3, 3}, rng);
  auto b = rand_tensor<double>({3}, rng);
  auto full = dwconv3d_causal(x, k, b);
  Tensor<double> cache;
  std::vector<Tensor<double>> outs;
  for (int c = 0; c < 4; ++c) {
    auto chunk = slice_axis0(x, 2 * c, 2);
    Tensor<double> next;
    outs.push_back(
        dwconv3d_causal(chunk, k, b, c == 0 ? nullptr : &cache, &next));
    cache = std::move(next);
  }
  Tensor<double> joined = outs[0];
  for (std::size_t i = 1; i < outs.size(); ++i)
    joined = concat_axis0(joined, outs[i]);
  CHECK(max_abs_diff(full, joined) < 1e-12);
}

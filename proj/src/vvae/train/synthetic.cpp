#include "vvae/train/synthetic.hpp"

#include <cmath>

#include "vvae/core/error.hpp"
#include "vvae/core/rng.hpp"

namespace vvae {

namespace {

struct Rect {
  double x, y, w, h, vx, vy;
  double color[3];
};

struct Blob {
  double x, y, sigma, vx, vy;
  double color[3];
};

double wrap(double v, double n) {
  v = std::fmod(v, n);
  return v < 0 ? v + n : v;
}

}  // namespace

template <typename T>
Tensor<T> synth_clip(const ClipSpec& spec, std::uint64_t corpus_seed,
                     std::int64_t index) {
  if (spec.frames < 1 || spec.frames % 4 != 1)
    throw input_error("synth_clip: frames must be 1 (mod 4)");
  Rng rng = Rng(corpus_seed).fork(std::uint64_t(index));
  const std::int64_t F = spec.frames, H = spec.height, W = spec.width;

  double bg[3];
  for (double& c : bg) c = rng.uniform(-0.9, 0.9);

  Rect rects[2];
  for (auto& r : rects) {
    r.w = rng.uniform(0.15, 0.4) * double(W);
    r.h = rng.uniform(0.15, 0.4) * double(H);
    r.x = rng.uniform(0.0, double(W));
    r.y = rng.uniform(0.0, double(H));
    r.vx = rng.uniform(-2.0, 2.0);
    r.vy = rng.uniform(-2.0, 2.0);
    for (double& c : r.color) c = rng.uniform(-1.0, 1.0);
  }
  Blob blobs[2];
  for (auto& b : blobs) {
    b.sigma = rng.uniform(0.06, 0.16) * double(std::min(H, W));
    b.x = rng.uniform(0.0, double(W));
    b.y = rng.uniform(0.0, double(H));
    b.vx = rng.uniform(-2.0, 2.0);
    b.vy = rng.uniform(-2.0, 2.0);
    for (double& c : b.color) c = rng.uniform(-1.0, 1.0);
  }

  Tensor<T> clip({F, H, W, 3});
  for (std::int64_t t = 0; t < F; ++t) {
    T* frame = clip.data() + t * H * W * 3;
    for (std::int64_t i = 0; i < H * W; ++i)
      for (int c = 0; c < 3; ++c) frame[i * 3 + c] = T(bg[c]);

    for (const auto& r : rects) {
      const double cx = wrap(r.x + r.vx * double(t), double(W));
      const double cy = wrap(r.y + r.vy * double(t), double(H));
      for (std::int64_t y = 0; y < H; ++y) {
        double dy = std::fabs(double(y) - cy);
        dy = std::min(dy, double(H) - dy);  // wrap distance
        if (dy > r.h * 0.5) continue;
        for (std::int64_t x = 0; x < W; ++x) {
          double dx = std::fabs(double(x) - cx);
          dx = std::min(dx, double(W) - dx);
          if (dx > r.w * 0.5) continue;
          for (int c = 0; c < 3; ++c)
            frame[(y * W + x) * 3 + c] = T(r.color[c]);
        }
      }
    }
    for (const auto& b : blobs) {
      const double cx = wrap(b.x + b.vx * double(t), double(W));
      const double cy = wrap(b.y + b.vy * double(t), double(H));
      const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
      for (std::int64_t y = 0; y < H; ++y) {
        double dy = std::fabs(double(y) - cy);
        dy = std::min(dy, double(H) - dy);
        for (std::int64_t x = 0; x < W; ++x) {
          double dx = std::fabs(double(x) - cx);
          dx = std::min(dx, double(W) - dx);
          const double a = std::exp(-(dx * dx + dy * dy) * inv);
          if (a < 0.01) continue;
          for (int c = 0; c < 3; ++c) {
            T& px = frame[(y * W + x) * 3 + c];
            px = T(double(px) * (1.0 - a) + b.color[c] * a);
          }
        }
      }
    }
    for (std::int64_t i = 0; i < H * W * 3; ++i) {
      if (frame[i] > T(1)) frame[i] = T(1);
      if (frame[i] < T(-1)) frame[i] = T(-1);
    }
  }
  return clip;
}

template Tensor<float> synth_clip<float>(const ClipSpec&, std::uint64_t,
                                         std::int64_t);
template Tensor<double> synth_clip<double>(const ClipSpec&, std::uint64_t,
                                           std::int64_t);

}  // namespace vvae

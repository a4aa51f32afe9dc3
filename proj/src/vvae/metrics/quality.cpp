#include "vvae/metrics/quality.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "vvae/core/error.hpp"
#include "vvae/core/parallel.hpp"
#include "vvae/kernels/kernels.hpp"

namespace vvae {

template <typename T>
double psnr(const Tensor<T>& x, const Tensor<T>& y) {
  if (!same_shape(x.shape(), y.shape()))
    throw shape_error("psnr: shape mismatch");
  if (x.numel() == 0) throw shape_error("psnr: empty input");
  double se = 0.0;
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double d = (double(x[i]) - double(y[i])) * 0.5;  // [0,1] scale
    se += d * d;
  }
  const double mse = se / double(x.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::vector<double> gaussian_taps() {
  std::vector<double> w(kWin);
  const double sigma = 1.5;
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    w[std::size_t(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[std::size_t(i)];
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Separable Gaussian filter, valid region only: out is (H-10) x (W-10).
void filter_valid(const std::vector<double>& img, std::int64_t H,
                  std::int64_t W, const std::vector<double>& taps,
                  std::vector<double>& tmp, std::vector<double>& out) {
  const std::int64_t Wv = W - kWin + 1, Hv = H - kWin + 1;
  tmp.assign(std::size_t(H * Wv), 0.0);
  for (std::int64_t h = 0; h < H; ++h)
    for (std::int64_t w = 0; w < Wv; ++w) {
      double acc = 0.0;
      for (int k = 0; k < kWin; ++k)
        acc += taps[std::size_t(k)] * img[std::size_t(h * W + w + k)];
      tmp[std::size_t(h * Wv + w)] = acc;
    }
  out.assign(std::size_t(Hv * Wv), 0.0);
  for (std::int64_t h = 0; h < Hv; ++h)
    for (std::int64_t w = 0; w < Wv; ++w) {
      double acc = 0.0;
      for (int k = 0; k < kWin; ++k)
        acc += taps[std::size_t(k)] * tmp[std::size_t((h + k) * Wv + w)];
      out[std::size_t(h * Wv + w)] = acc;
    }
}

double ssim_plane(const std::vector<double>& a, const std::vector<double>& b,
                  std::int64_t H, std::int64_t W) {
  static const std::vector<double> taps = gaussian_taps();
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  std::vector<double> tmp, mu_a, mu_b, m_aa, m_bb, m_ab;
  filter_valid(a, H, W, taps, tmp, mu_a);
  filter_valid(b, H, W, taps, tmp, mu_b);
  filter_valid(aa, H, W, taps, tmp, m_aa);
  filter_valid(bb, H, W, taps, tmp, m_bb);
  filter_valid(ab, H, W, taps, tmp, m_ab);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) *
                       (va + vb + c2);
    acc += num / den;
  }
  return acc / double(mu_a.size());
}

}  // namespace

template <typename T>
double ssim(const Tensor<T>& x, const Tensor<T>& y) {
  if (!same_shape(x.shape(), y.shape()))
    throw shape_error("ssim: shape mismatch");
  if (x.ndim() != 3 && x.ndim() != 4)
    throw shape_error("ssim: [H,W,C] or [frames,H,W,C] expected");
  const bool video = x.ndim() == 4;
  const std::int64_t frames = video ? x.extent(0) : 1;
  const std::int64_t H = x.extent(video ? 1 : 0), W = x.extent(video ? 2 : 1),
                     C = x.extent(video ? 3 : 2);
  if (H < kWin || W < kWin)
    throw input_error("ssim: frame smaller than the 11x11 window");

  std::vector<double> scores(std::size_t(frames * C), 0.0);
  parallel_for(std::size_t(frames * C), 1, [&](std::size_t b, std::size_t e) {
    std::vector<double> pa(std::size_t(H * W)), pb(std::size_t(H * W));
    for (std::size_t fc = b; fc < e; ++fc) {
      const std::int64_t f = std::int64_t(fc) / C, c = std::int64_t(fc) % C;
      const T* px = x.data() + f * H * W * C;
      const T* py = y.data() + f * H * W * C;
      for (std::int64_t i = 0; i < H * W; ++i) {
        pa[std::size_t(i)] = (double(px[i * C + c]) + 1.0) * 0.5;
        pb[std::size_t(i)] = (double(py[i * C + c]) + 1.0) * 0.5;
      }
      scores[fc] = ssim_plane(pa, pb, H, W);
    }
  });
  double acc = 0.0;
  for (double s : scores) acc += s;
  return acc / double(scores.size());
}

template double psnr<float>(const Tensor<float>&, const Tensor<float>&);
template double psnr<double>(const Tensor<double>&, const Tensor<double>&);
template double ssim<float>(const Tensor<float>&, const Tensor<float>&);
template double ssim<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace vvae

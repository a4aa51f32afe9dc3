#pragma once

#include "vvae/core/tensor.hpp"

namespace vvae {

// Inputs live in [-1, 1] and are mapped to [0, 1] internally.
// psnr returns +infinity for identical inputs.
template <typename T>
double psnr(const Tensor<T>& x, const Tensor<T>& y);

// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5, C1=0.01^2,
// C2=0.03^2 on the [0,1] range), averaged over channels and frames.
// Accepts [H,W,C] or [frames,H,W,C]; frames must be at least 11x11.
template <typename T>
double ssim(const Tensor<T>& x, const Tensor<T>& y);

}  // namespace vvae

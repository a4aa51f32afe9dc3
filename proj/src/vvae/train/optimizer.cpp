#include "vvae/train/optimizer.hpp"

#include <cmath>

namespace vvae {

template <typename T>
Adam<T>::Adam(ModelWeights<Tensor<T>>& w, AdamConfig cfg) : cfg_(cfg) {
  w.for_each([&](const std::string&, Tensor<T>& t) {
    m_.emplace_back(t.shape());
    v_.emplace_back(t.shape());
  });
}

template <typename T>
double Adam<T>::lr_at(std::int64_t step) const {
  if (cfg_.warmup_steps > 0 && step < cfg_.warmup_steps)
    return cfg_.lr * double(step + 1) / double(cfg_.warmup_steps);
  const double span = double(std::max<std::int64_t>(
      1, cfg_.total_steps - cfg_.warmup_steps));
  double t = double(step - cfg_.warmup_steps) / span;
  if (t > 1.0) t = 1.0;
  if (t < 0.0) t = 0.0;
  return cfg_.lr_floor +
         0.5 * (cfg_.lr - cfg_.lr_floor) * (1.0 + std::cos(t * 3.14159265358979323846));
}

template <typename T>
double Adam<T>::step(ModelWeights<Tensor<T>>& w,
                     const std::vector<Tensor<T>>& grads) {
  const double lr = lr_at(step_);
  ++step_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(step_));
  const double c2 = 1.0 - std::pow(b2, double(step_));
  std::size_t i = 0;
  w.for_each([&](const std::string& name, Tensor<T>& p) {
    if (i >= grads.size())
      throw std::runtime_error("adam: missing gradient for " + name);
    const Tensor<T>& g = grads[i];
    Tensor<T>& m = m_[i];
    Tensor<T>& v = v_[i];
    if (!same_shape(g.shape(), p.shape()))
      throw shape_error("adam: gradient shape mismatch for " + name);
    for (std::int64_t j = 0; j < p.numel(); ++j) {
      const double gj = double(g[j]);
      const double mj = b1 * double(m[j]) + (1.0 - b1) * gj;
      const double vj = b2 * double(v[j]) + (1.0 - b2) * gj * gj;
      m[j] = T(mj);
      v[j] = T(vj);
      const double mhat = mj / c1;
      const double vhat = vj / c2;
      p[j] = T(double(p[j]) - lr * mhat / (std::sqrt(vhat) + cfg_.eps));
    }
    ++i;
  });
  if (i != grads.size())
    throw std::runtime_error("adam: gradient count mismatch");
  return lr;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace vvae

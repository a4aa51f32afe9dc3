#include "vvae/core/autodiff.hpp"

#include <cmath>

#include "vvae/kernels/kernels.hpp"

namespace vvae::ad {

template <typename T>
void kern_add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
  kern::ops<T>().add(dst.data(), dst.data(), src.data(),
                     std::size_t(dst.numel()));
}

namespace {

template <typename T, typename Fwd, typename Bwd>
Var<T> unary(Var<T> x, Fwd&& fwd, Bwd&& bwd) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(fwd(x.value()), x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn, bwd] { accumulate(xn, bwd(xn->value, out)); };
  }
  return Var<T>(out);
}

}  // namespace

template <typename T>
Var<T> matmul_lastdim(Var<T> x, Var<T> w) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::matmul_lastdim(x.value(), w.value()),
                         x.node()->needs || w.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *wn = w.node();
    out->bw = [out, xn, wn] {
      if (xn->needs)
        accumulate(xn, vvae::matmul_lastdim_t(out->grad, wn->value));
      if (wn->needs)
        accumulate(wn, vvae::matmul_lastdim_tn(xn->value, out->grad));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> matmul_lastdim_t(Var<T> x, Var<T> w) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::matmul_lastdim_t(x.value(), w.value()),
                         x.node()->needs || w.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *wn = w.node();
    out->bw = [out, xn, wn] {
      if (xn->needs)
        accumulate(xn, vvae::matmul_lastdim(out->grad, wn->value));
      if (wn->needs)
        accumulate(wn, vvae::matmul_lastdim_tn(out->grad, xn->value));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> add_bias_lastdim(Var<T> x, Var<T> b) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::add_bias_lastdim(x.value(), b.value()),
                         x.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *bn = b.node();
    out->bw = [out, xn, bn] {
      if (xn->needs) accumulate(xn, Tensor<T>(out->grad));
      if (bn->needs) accumulate(bn, vvae::sum_leading(out->grad));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& tp = *a.node()->tape;
  Node<T>* out = tp.make(vvae::add(a.value(), b.value()),
                         a.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*an = a.node(), *bn = b.node();
    out->bw = [out, an, bn] {
      if (an->needs) accumulate(an, Tensor<T>(out->grad));
      if (bn->needs) accumulate(bn, Tensor<T>(out->grad));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  Tape<T>& tp = *a.node()->tape;
  Node<T>* out = tp.make(vvae::sub(a.value(), b.value()),
                         a.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*an = a.node(), *bn = b.node();
    out->bw = [out, an, bn] {
      if (an->needs) accumulate(an, Tensor<T>(out->grad));
      if (bn->needs) accumulate(bn, vvae::scale(out->grad, T(-1)));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& tp = *a.node()->tape;
  Node<T>* out = tp.make(vvae::mul(a.value(), b.value()),
                         a.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*an = a.node(), *bn = b.node();
    out->bw = [out, an, bn] {
      if (an->needs) accumulate(an, vvae::mul(out->grad, bn->value));
      if (bn->needs) accumulate(bn, vvae::mul(out->grad, an->value));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> scale(Var<T> x, T s) {
  return unary(
      x, [s](const Tensor<T>& v) { return vvae::scale(v, s); },
      [s](const Tensor<T>&, Node<T>* out) {
        return vvae::scale(out->grad, s);
      });
}

template <typename T>
Var<T> add_scalar(Var<T> x, T s) {
  return unary(
      x, [s](const Tensor<T>& v) { return vvae::add_scalar(v, s); },
      [](const Tensor<T>&, Node<T>* out) { return Tensor<T>(out->grad); });
}

template <typename T>
Var<T> scale_param(Var<T> x, Var<T> s) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::scale_param(x.value(), s.value()),
                         x.node()->needs || s.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *sn = s.node();
    out->bw = [out, xn, sn] {
      if (xn->needs) accumulate(xn, vvae::scale(out->grad, sn->value[0]));
      if (sn->needs) {
        Tensor<T> g(sn->value.shape());
        g[0] = static_cast<T>(kern::ops<T>().sum(
            vvae::mul(out->grad, xn->value).data(),
            std::size_t(out->grad.numel())));
        accumulate(sn, std::move(g));
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> gelu(Var<T> x) {
  return unary(
      x, [](const Tensor<T>& v) { return vvae::gelu(v); },
      [](const Tensor<T>& xv, Node<T>* out) {
        return vvae::gelu_backward(xv, out->grad);
      });
}

template <typename T>
Var<T> softplus(Var<T> x) {
  return unary(
      x, [](const Tensor<T>& v) { return vvae::softplus(v); },
      [](const Tensor<T>& xv, Node<T>* out) {
        return vvae::softplus_backward(xv, out->grad);
      });
}

template <typename T>
Var<T> exp_elem(Var<T> x) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::exp_elem(x.value()), x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn] {
      accumulate(xn, vvae::mul(out->grad, out->value));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> soft_shrink(Var<T> x, Var<T> theta) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::soft_shrink(x.value(), theta.value()),
                         x.node()->needs || theta.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *tn = theta.node();
    out->bw = [out, xn, tn] {
      const Tensor<T>& xv = xn->value;
      const T th = tn->value[0];
      if (xn->needs) {
        Tensor<T> gx(xv.shape());
        for (std::int64_t i = 0; i < xv.numel(); ++i)
          gx[i] = std::fabs(xv[i]) > th ? out->grad[i] : T(0);
        accumulate(xn, std::move(gx));
      }
      if (tn->needs) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < xv.numel(); ++i)
          if (std::fabs(xv[i]) > th)
            acc -= double(out->grad[i]) * (xv[i] > T(0) ? 1.0 : -1.0);
        Tensor<T> gt(tn->value.shape());
        gt[0] = static_cast<T>(acc);
        accumulate(tn, std::move(gt));
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> dwconv3d_causal(Var<T> x, Var<T> k, Var<T> b) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out =
      tp.make(vvae::dwconv3d_causal(x.value(), k.value(), b.value()),
              x.node()->needs || k.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *kn = k.node(), *bn = b.node();
    out->bw = [out, xn, kn, bn] {
      auto g = vvae::dwconv3d_causal_backward(xn->value, kn->value, out->grad);
      if (xn->needs) accumulate(xn, std::move(g.gx));
      if (kn->needs) accumulate(kn, std::move(g.gk));
      if (bn->needs) accumulate(bn, std::move(g.gb));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> concat_lastdim(Var<T> a, Var<T> b) {
  Tape<T>& tp = *a.node()->tape;
  Node<T>* out = tp.make(vvae::concat_lastdim(a.value(), b.value()),
                         a.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*an = a.node(), *bn = b.node();
    out->bw = [out, an, bn] {
      const std::int64_t ca = an->value.shape().back();
      const std::int64_t cb = bn->value.shape().back();
      if (an->needs) accumulate(an, vvae::slice_lastdim(out->grad, 0, ca));
      if (bn->needs) accumulate(bn, vvae::slice_lastdim(out->grad, ca, cb));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> slice_lastdim(Var<T> x, std::int64_t off, std::int64_t len) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::slice_lastdim(x.value(), off, len),
                         x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn, off, len] {
      Tensor<T> gx(xn->value.shape());
      const std::int64_t c = xn->value.shape().back();
      const std::int64_t rows = rows_before_last(xn->value);
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t i = 0; i < len; ++i)
          gx[r * c + off + i] = out->grad[r * len + i];
      accumulate(xn, std::move(gx));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> concat_axis0(Var<T> a, Var<T> b) {
  Tape<T>& tp = *a.node()->tape;
  Node<T>* out = tp.make(vvae::concat_axis0(a.value(), b.value()),
                         a.node()->needs || b.node()->needs);
  if (out->needs) {
    Node<T>*an = a.node(), *bn = b.node();
    out->bw = [out, an, bn] {
      const std::int64_t na = an->value.extent(0);
      const std::int64_t nb = bn->value.extent(0);
      if (an->needs) accumulate(an, vvae::slice_axis0(out->grad, 0, na));
      if (bn->needs) accumulate(bn, vvae::slice_axis0(out->grad, na, nb));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> slice_axis0(Var<T> x, std::int64_t off, std::int64_t len) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out =
      tp.make(vvae::slice_axis0(x.value(), off, len), x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn, off] {
      Tensor<T> gx(xn->value.shape());
      const std::int64_t stride =
          xn->value.extent(0) ? xn->value.numel() / xn->value.extent(0) : 0;
      for (std::int64_t i = 0; i < out->grad.numel(); ++i)
        gx[off * stride + i] = out->grad[i];
      accumulate(xn, std::move(gx));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> sum_scalar(Var<T> x) {
  return unary(
      x, [](const Tensor<T>& v) { return vvae::sum_scalar(v); },
      [](const Tensor<T>& xv, Node<T>* out) {
        return Tensor<T>(xv.shape(), out->grad[0]);
      });
}

template <typename T>
Var<T> mean_scalar(Var<T> x) {
  return unary(
      x, [](const Tensor<T>& v) { return vvae::mean_scalar(v); },
      [](const Tensor<T>& xv, Node<T>* out) {
        return Tensor<T>(xv.shape(), out->grad[0] / T(xv.numel()));
      });
}

template <typename T>
Var<T> mean_abs_scalar(Var<T> x) {
  return unary(
      x, [](const Tensor<T>& v) { return vvae::mean_abs_scalar(v); },
      [](const Tensor<T>& xv, Node<T>* out) {
        Tensor<T> g(xv.shape());
        const T s = out->grad[0] / T(xv.numel());
        for (std::int64_t i = 0; i < xv.numel(); ++i)
          g[i] = xv[i] > T(0) ? s : (xv[i] < T(0) ? -s : T(0));
        return g;
      });
}

template <typename T>
Var<T> layer_norm_lastdim(Var<T> x, Var<T> gamma, Var<T> beta, T eps) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(
      vvae::layer_norm_lastdim(x.value(), gamma.value(), beta.value(), eps),
      x.node()->needs || gamma.node()->needs || beta.node()->needs);
  if (out->needs) {
    Node<T>*xn = x.node(), *gn = gamma.node(), *bn = beta.node();
    out->bw = [out, xn, gn, bn, eps] {
      auto g = vvae::layer_norm_lastdim_backward(xn->value, gn->value,
                                                 out->grad, eps);
      if (xn->needs) accumulate(xn, std::move(g.gx));
      if (gn->needs) accumulate(gn, std::move(g.ggamma));
      if (bn->needs) accumulate(bn, std::move(g.gbeta));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> gather_patches(Var<T> vol, int pt, int ph, int pw) {
  Tape<T>& tp = *vol.node()->tape;
  Node<T>* out =
      tp.make(vvae::gather_patches(vol.value(), pt, ph, pw), vol.node()->needs);
  if (out->needs) {
    Node<T>* vn = vol.node();
    const int C = static_cast<int>(vn->value.shape().back());
    out->bw = [out, vn, pt, ph, pw, C] {
      accumulate(vn, vvae::scatter_patches(out->grad, pt, ph, pw, C));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> reshape(Var<T> x, std::vector<std::int64_t> shape) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::reshape(x.value(), std::move(shape)),
                         x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn] {
      accumulate(xn, vvae::reshape(out->grad, xn->value.shape()));
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> scatter_patches(Var<T> tok, int pt, int ph, int pw, int C) {
  Tape<T>& tp = *tok.node()->tape;
  Node<T>* out = tp.make(vvae::scatter_patches(tok.value(), pt, ph, pw, C),
                         tok.node()->needs);
  if (out->needs) {
    Node<T>* tn = tok.node();
    out->bw = [out, tn, pt, ph, pw] {
      accumulate(tn, vvae::gather_patches(out->grad, pt, ph, pw));
    };
  }
  return Var<T>(out);
}

#define VVAE_AD_INSTANTIATE(T)                                              \
  template void kern_add_inplace<T>(Tensor<T>&, const Tensor<T>&);          \
  template Var<T> matmul_lastdim<T>(Var<T>, Var<T>);                        \
  template Var<T> matmul_lastdim_t<T>(Var<T>, Var<T>);                      \
  template Var<T> add_bias_lastdim<T>(Var<T>, Var<T>);                      \
  template Var<T> add<T>(Var<T>, Var<T>);                                   \
  template Var<T> sub<T>(Var<T>, Var<T>);                                   \
  template Var<T> mul<T>(Var<T>, Var<T>);                                   \
  template Var<T> scale<T>(Var<T>, T);                                      \
  template Var<T> add_scalar<T>(Var<T>, T);                                 \
  template Var<T> scale_param<T>(Var<T>, Var<T>);                           \
  template Var<T> gelu<T>(Var<T>);                                          \
  template Var<T> softplus<T>(Var<T>);                                      \
  template Var<T> exp_elem<T>(Var<T>);                                      \
  template Var<T> soft_shrink<T>(Var<T>, Var<T>);                           \
  template Var<T> dwconv3d_causal<T>(Var<T>, Var<T>, Var<T>);               \
  template Var<T> concat_lastdim<T>(Var<T>, Var<T>);                        \
  template Var<T> slice_lastdim<T>(Var<T>, std::int64_t, std::int64_t);     \
  template Var<T> concat_axis0<T>(Var<T>, Var<T>);                          \
  template Var<T> slice_axis0<T>(Var<T>, std::int64_t, std::int64_t);       \
  template Var<T> sum_scalar<T>(Var<T>);                                    \
  template Var<T> mean_scalar<T>(Var<T>);                                   \
  template Var<T> mean_abs_scalar<T>(Var<T>);                               \
  template Var<T> layer_norm_lastdim<T>(Var<T>, Var<T>, Var<T>, T);         \
  template Var<T> gather_patches<T>(Var<T>, int, int, int);                 \
  template Var<T> scatter_patches<T>(Var<T>, int, int, int, int);           \
  template Var<T> reshape<T>(Var<T>, std::vector<std::int64_t>);

VVAE_AD_INSTANTIATE(float)
VVAE_AD_INSTANTIATE(double)
#undef VVAE_AD_INSTANTIATE

}  // namespace vvae::ad

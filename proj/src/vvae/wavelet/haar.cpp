#include "vvae/wavelet/haar.hpp"

#include "vvae/core/error.hpp"
#include "vvae/core/parallel.hpp"
#include "vvae/kernels/kernels.hpp"

namespace vvae {

namespace {

template <typename T>
void pair_axis_blocks(const T* a, const T* b, T* lo, T* hi, std::int64_t n) {
  const auto& K = kern::ops<T>();
  parallel_for(std::size_t(n), 1 << 15, [&](std::size_t s, std::size_t e) {
    K.haar_pair(lo + s, hi + s, a + s, b + s, e - s);
  });
}

template <typename T>
void unpair_axis_blocks(const T* lo, const T* hi, T* a, T* b, std::int64_t n) {
  const auto& K = kern::ops<T>();
  parallel_for(std::size_t(n), 1 << 15, [&](std::size_t s, std::size_t e) {
    K.haar_unpair(a + s, b + s, lo + s, hi + s, e - s);
  });
}

}  // namespace

template <typename T>
Tensor<T> dwt3_packed(const Tensor<T>& x) {
  if (x.ndim() != 4) throw shape_error("dwt3: input must be [T,H,W,C]");
  const std::int64_t Tn = x.extent(0), H = x.extent(1), W = x.extent(2),
                     C = x.extent(3);
  if (Tn % 2 || H % 2 || W % 2)
    throw shape_error("dwt3: extents must be even, got " +
                      shape_str(x.shape()));
  const std::int64_t T2 = Tn / 2, H2 = H / 2, W2 = W / 2;
  const std::int64_t plane = H * W * C, rowlen = W * C;

  // T axis.
  Tensor<T> tl({T2, H, W, C}), th({T2, H, W, C});
  for (std::int64_t t = 0; t < T2; ++t)
    pair_axis_blocks(x.data() + 2 * t * plane, x.data() + (2 * t + 1) * plane,
                     tl.data() + t * plane, th.data() + t * plane, plane);

  // H axis on both halves.
  Tensor<T> hb[4] = {Tensor<T>({T2, H2, W, C}), Tensor<T>({T2, H2, W, C}),
                     Tensor<T>({T2, H2, W, C}), Tensor<T>({T2, H2, W, C})};
  const Tensor<T>* tsrc[2] = {&tl, &th};
  for (int bt = 0; bt < 2; ++bt)
    for (std::int64_t t = 0; t < T2; ++t)
      for (std::int64_t h = 0; h < H2; ++h) {
        const T* base = tsrc[bt]->data() + t * plane + 2 * h * rowlen;
        const std::int64_t off = (t * H2 + h) * rowlen;
        pair_axis_blocks(base, base + rowlen, hb[bt * 2].data() + off,
                         hb[bt * 2 + 1].data() + off, rowlen);
      }

  // W axis, writing straight into the packed result.
  Tensor<T> out({T2, H2, W2, 8 * C});
  const auto& K = kern::ops<T>();
  parallel_for(std::size_t(T2 * H2), 1, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      for (int sb = 0; sb < 4; ++sb) {
        const T* row = hb[sb].data() + std::int64_t(r) * rowlen;
        T* orow = out.data() + std::int64_t(r) * W2 * 8 * C;
        for (std::int64_t w = 0; w < W2; ++w)
          K.haar_pair(orow + w * 8 * C + (2 * sb) * C,
                      orow + w * 8 * C + (2 * sb + 1) * C, row + 2 * w * C,
                      row + (2 * w + 1) * C, std::size_t(C));
      }
    }
  });
  return out;
}

template <typename T>
Tensor<T> idwt3_packed(const Tensor<T>& s) {
  if (s.ndim() != 4 || s.extent(3) % 8)
    throw shape_error("idwt3: input must be [T',H',W',8C], got " +
                      shape_str(s.shape()));
  const std::int64_t T2 = s.extent(0), H2 = s.extent(1), W2 = s.extent(2),
                     C = s.extent(3) / 8;
  const std::int64_t Tn = 2 * T2, H = 2 * H2, W = 2 * W2;
  const std::int64_t plane = H * W * C, rowlen = W * C;

  Tensor<T> hb[4] = {Tensor<T>({T2, H2, W, C}), Tensor<T>({T2, H2, W, C}),
                     Tensor<T>({T2, H2, W, C}), Tensor<T>({T2, H2, W, C})};
  const auto& K = kern::ops<T>();
  parallel_for(std::size_t(T2 * H2), 1, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      for (int sb = 0; sb < 4; ++sb) {
        T* row = hb[sb].data() + std::int64_t(r) * rowlen;
        const T* srow = s.data() + std::int64_t(r) * W2 * 8 * C;
        for (std::int64_t w = 0; w < W2; ++w)
          K.haar_unpair(row + 2 * w * C, row + (2 * w + 1) * C,
                        srow + w * 8 * C + (2 * sb) * C,
                        srow + w * 8 * C + (2 * sb + 1) * C, std::size_t(C));
      }
    }
  });

  Tensor<T> tl({T2, H, W, C}), th({T2, H, W, C});
  Tensor<T>* tdst[2] = {&tl, &th};
  for (int bt = 0; bt < 2; ++bt)
    for (std::int64_t t = 0; t < T2; ++t)
      for (std::int64_t h = 0; h < H2; ++h) {
        T* base = tdst[bt]->data() + t * plane + 2 * h * rowlen;
        const std::int64_t off = (t * H2 + h) * rowlen;
        unpair_axis_blocks(hb[bt * 2].data() + off,
                           hb[bt * 2 + 1].data() + off, base, base + rowlen,
                           rowlen);
      }

  Tensor<T> x({Tn, H, W, C});
  for (std::int64_t t = 0; t < T2; ++t)
    unpair_axis_blocks(tl.data() + t * plane, th.data() + t * plane,
                       x.data() + 2 * t * plane, x.data() + (2 * t + 1) * plane,
                       plane);
  return x;
}

template <typename T>
Tensor<T> dwt2_packed(const Tensor<T>& x) {
  if (x.ndim() != 3) throw shape_error("dwt2: input must be [H,W,C]");
  const std::int64_t H = x.extent(0), W = x.extent(1), C = x.extent(2);
  if (H % 2 || W % 2)
    throw shape_error("dwt2: extents must be even, got " +
                      shape_str(x.shape()));
  const std::int64_t H2 = H / 2, W2 = W / 2, rowlen = W * C;

  Tensor<T> hl({H2, W, C}), hh({H2, W, C});
  for (std::int64_t h = 0; h < H2; ++h)
    pair_axis_blocks(x.data() + 2 * h * rowlen, x.data() + (2 * h + 1) * rowlen,
                     hl.data() + h * rowlen, hh.data() + h * rowlen, rowlen);

  Tensor<T> out({H2, W2, 4 * C});
  const auto& K = kern::ops<T>();
  const Tensor<T>* src[2] = {&hl, &hh};
  parallel_for(std::size_t(H2), 1, [&](std::size_t rb, std::size_t re) {
    for (std::size_t h = rb; h < re; ++h)
      for (int bh = 0; bh < 2; ++bh) {
        const T* row = src[bh]->data() + std::int64_t(h) * rowlen;
        T* orow = out.data() + std::int64_t(h) * W2 * 4 * C;
        for (std::int64_t w = 0; w < W2; ++w)
          K.haar_pair(orow + w * 4 * C + (2 * bh) * C,
                      orow + w * 4 * C + (2 * bh + 1) * C, row + 2 * w * C,
                      row + (2 * w + 1) * C, std::size_t(C));
      }
  });
  return out;
}

template <typename T>
Tensor<T> idwt2_packed(const Tensor<T>& s) {
  if (s.ndim() != 3 || s.extent(2) % 4)
    throw shape_error("idwt2: input must be [H',W',4C], got " +
                      shape_str(s.shape()));
  const std::int64_t H2 = s.extent(0), W2 = s.extent(1), C = s.extent(2) / 4;
  const std::int64_t H = 2 * H2, W = 2 * W2, rowlen = W * C;

  Tensor<T> hl({H2, W, C}), hh({H2, W, C});
  const auto& K = kern::ops<T>();
  Tensor<T>* dst[2] = {&hl, &hh};
  parallel_for(std::size_t(H2), 1, [&](std::size_t rb, std::size_t re) {
    for (std::size_t h = rb; h < re; ++h)
      for (int bh = 0; bh < 2; ++bh) {
        T* row = dst[bh]->data() + std::int64_t(h) * rowlen;
        const T* srow = s.data() + std::int64_t(h) * W2 * 4 * C;
        for (std::int64_t w = 0; w < W2; ++w)
          K.haar_unpair(row + 2 * w * C, row + (2 * w + 1) * C,
                        srow + w * 4 * C + (2 * bh) * C,
                        srow + w * 4 * C + (2 * bh + 1) * C, std::size_t(C));
      }
  });

  Tensor<T> x({H, W, C});
  for (std::int64_t h = 0; h < H2; ++h)
    unpair_axis_blocks(hl.data() + h * rowlen, hh.data() + h * rowlen,
                       x.data() + 2 * h * rowlen,
                       x.data() + (2 * h + 1) * rowlen, rowlen);
  return x;
}

template <typename T>
Subbands<Tensor<T>> dwt3(const Tensor<T>& x) {
  const std::int64_t C = x.ndim() == 4 ? x.extent(3) : 0;
  Tensor<T> p = dwt3_packed(x);
  return {slice_lastdim(p, 0, C), slice_lastdim(p, C, 7 * C)};
}

template <typename T>
Tensor<T> idwt3(const Subbands<Tensor<T>>& s) {
  if (s.low.ndim() != 4 || s.high.ndim() != 4 ||
      s.high.shape().back() != 7 * s.low.shape().back())
    throw shape_error("idwt3: inconsistent subband shapes");
  for (int i = 0; i < 3; ++i)
    if (s.low.extent(i) != s.high.extent(i))
      throw shape_error("idwt3: inconsistent subband shapes");
  return idwt3_packed(concat_lastdim(s.low, s.high));
}

template <typename T>
Subbands<Tensor<T>> dwt2(const Tensor<T>& x) {
  const std::int64_t C = x.ndim() == 3 ? x.extent(2) : 0;
  Tensor<T> p = dwt2_packed(x);
  return {slice_lastdim(p, 0, C), slice_lastdim(p, C, 3 * C)};
}

template <typename T>
Tensor<T> idwt2(const Subbands<Tensor<T>>& s) {
  if (s.low.ndim() != 3 || s.high.ndim() != 3 ||
      s.high.shape().back() != 3 * s.low.shape().back())
    throw shape_error("idwt2: inconsistent subband shapes");
  for (int i = 0; i < 2; ++i)
    if (s.low.extent(i) != s.high.extent(i))
      throw shape_error("idwt2: inconsistent subband shapes");
  return idwt2_packed(concat_lastdim(s.low, s.high));
}

#define VVAE_HAAR_INSTANTIATE(T)                               \
  template Tensor<T> dwt3_packed<T>(const Tensor<T>&);         \
  template Tensor<T> idwt3_packed<T>(const Tensor<T>&);        \
  template Tensor<T> dwt2_packed<T>(const Tensor<T>&);         \
  template Tensor<T> idwt2_packed<T>(const Tensor<T>&);        \
  template Subbands<Tensor<T>> dwt3<T>(const Tensor<T>&);      \
  template Tensor<T> idwt3<T>(const Subbands<Tensor<T>>&);     \
  template Subbands<Tensor<T>> dwt2<T>(const Tensor<T>&);      \
  template Tensor<T> idwt2<T>(const Subbands<Tensor<T>>&);

VVAE_HAAR_INSTANTIATE(float)
VVAE_HAAR_INSTANTIATE(double)
#undef VVAE_HAAR_INSTANTIATE

}  // namespace vvae

namespace vvae::ad {

// The transform is orthonormal, so the adjoint needed by the chain rule is
// the inverse transform (and vice versa).

template <typename T>
Var<T> dwt3_packed(Var<T> x) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::dwt3_packed(x.value()), x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn] { accumulate(xn, vvae::idwt3_packed(out->grad)); };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> idwt3_packed(Var<T> s) {
  Tape<T>& tp = *s.node()->tape;
  Node<T>* out = tp.make(vvae::idwt3_packed(s.value()), s.node()->needs);
  if (out->needs) {
    Node<T>* sn = s.node();
    out->bw = [out, sn] { accumulate(sn, vvae::dwt3_packed(out->grad)); };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> dwt2_packed(Var<T> x) {
  Tape<T>& tp = *x.node()->tape;
  Node<T>* out = tp.make(vvae::dwt2_packed(x.value()), x.node()->needs);
  if (out->needs) {
    Node<T>* xn = x.node();
    out->bw = [out, xn] { accumulate(xn, vvae::idwt2_packed(out->grad)); };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> idwt2_packed(Var<T> s) {
  Tape<T>& tp = *s.node()->tape;
  Node<T>* out = tp.make(vvae::idwt2_packed(s.value()), s.node()->needs);
  if (out->needs) {
    Node<T>* sn = s.node();
    out->bw = [out, sn] { accumulate(sn, vvae::dwt2_packed(out->grad)); };
  }
  return Var<T>(out);
}

#define VVAE_HAAR_AD_INSTANTIATE(T)          \
  template Var<T> dwt3_packed<T>(Var<T>);    \
  template Var<T> idwt3_packed<T>(Var<T>);   \
  template Var<T> dwt2_packed<T>(Var<T>);    \
  template Var<T> idwt2_packed<T>(Var<T>);

VVAE_HAAR_AD_INSTANTIATE(float)
VVAE_HAAR_AD_INSTANTIATE(double)
#undef VVAE_HAAR_AD_INSTANTIATE

}  // namespace vvae::ad

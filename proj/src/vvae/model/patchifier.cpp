#include "vvae/model/patchifier.hpp"

namespace vvae {

namespace {

template <class A>
A maybe_norm(const A& tok, const NormW<A>& n, bool on) {
  using T = ad::scalar_of_t<A>;
  if (!on) return tok;
  return layer_norm_lastdim(tok, n.gamma, n.beta, T(1e-5));
}

void check_video_shape(const std::vector<std::int64_t>& s, bool leading_frame,
                       const char* where) {
  if (s.size() != 4 || s[3] != 3)
    throw shape_error(std::string(where) + ": expected [frames,H,W,3], got " +
                      shape_str(s));
  const std::int64_t frames = s[0];
  if (leading_frame) {
    if (frames < 1 || (frames - 1) % ModelConfig::c_t != 0)
      throw shape_error(std::string(where) +
                        ": frame count must be 1 (mod 4), got " +
                        std::to_string(frames));
  } else {
    if (frames < 1 || frames % ModelConfig::c_t != 0)
      throw shape_error(std::string(where) +
                        ": continuation chunk must be a multiple of 4 frames");
  }
  if (s[1] % ModelConfig::c_s || s[2] % ModelConfig::c_s)
    throw shape_error(std::string(where) +
                      ": spatial extents must be multiples of 8, got " +
                      shape_str(s));
}

}  // namespace

template <class A>
PatchEmb<A> patchify(const A& x, const PatchifierW<A>& w,
                     const ModelConfig& cfg, bool leading_frame) {
  const auto& xs = ad::value_of(x).shape();
  check_video_shape(xs, leading_frame, "patchify");
  const std::int64_t frames = xs[0], H = xs[1], W = xs[2];
  const std::int64_t Tv = leading_frame ? frames - 1 : frames;

  if (cfg.uses_wavelet()) {
    PatchEmb<A> image{}, video{};
    if (leading_frame) {
      A x0 = reshape(slice_axis0(x, 0, 1), {H, W, 3});
      A s2 = dwt2_packed(x0);  // [H/2, W/2, 12]
      A lc = reshape(slice_lastdim(s2, 0, 3), {1, H / 2, W / 2, 3});
      A hc = reshape(slice_lastdim(s2, 3, 9), {1, H / 2, W / 2, 9});
      A lct = maybe_norm(gather_patches(lc, 1, 4, 4), w.n_image_lc, w.norm);
      A hct = maybe_norm(gather_patches(hc, 1, 4, 4), w.n_image_hc, w.norm);
      image.pl = linear(lct, w.image_lc);
      image.ph = linear(hct, w.image_hc);
    }
    if (Tv > 0) {
      A xv = leading_frame ? slice_axis0(x, 1, Tv) : x;
      A s3 = dwt3_packed(xv);  // [T/2, H/2, W/2, 24]
      A lc = slice_lastdim(s3, 0, 3);
      A hc = slice_lastdim(s3, 3, 21);
      A lct = maybe_norm(gather_patches(lc, 2, 4, 4), w.n_video_lc, w.norm);
      A hct = maybe_norm(gather_patches(hc, 2, 4, 4), w.n_video_hc, w.norm);
      video.pl = linear(lct, w.video_lc);
      video.ph = linear(hct, w.video_hc);
    }
    if (!leading_frame) return video;
    if (Tv == 0) return image;
    return {concat_axis0(image.pl, video.pl), concat_axis0(image.ph, video.ph)};
  }

  // Raw-RGB patches, single stream at width D.
  A image{}, video{};
  if (leading_frame) {
    A tok = gather_patches(slice_axis0(x, 0, 1), 1, 8, 8);
    image = linear(maybe_norm(tok, w.n_image_rgb, w.norm), w.image_rgb);
  }
  if (Tv > 0) {
    A xv = leading_frame ? slice_axis0(x, 1, Tv) : x;
    A tok = gather_patches(xv, 4, 8, 8);
    video = linear(maybe_norm(tok, w.n_video_rgb, w.norm), w.video_rgb);
  }
  if (!leading_frame) return {video, A{}};
  if (Tv == 0) return {image, A{}};
  return {concat_axis0(image, video), A{}};
}

template <class A>
A unpatchify(const PatchEmb<A>& emb, const PatchifierW<A>& w,
             const ModelConfig& cfg, bool leading_frame) {
  const auto& ls = ad::value_of(emb.pl).shape();
  if (ls.size() != 4) throw shape_error("unpatchify: 4-d token grid expected");
  const std::int64_t Tt = ls[0], Ht = ls[1], Wt = ls[2];
  const std::int64_t Tv = leading_frame ? Tt - 1 : Tt;
  if (Tv < 0 || (leading_frame && Tt < 1))
    throw shape_error("unpatchify: empty token grid");
  const std::int64_t H = Ht * ModelConfig::c_s, W = Wt * ModelConfig::c_s;

  if (cfg.uses_wavelet()) {
    const auto& hs = ad::value_of(emb.ph).shape();
    if (hs.size() != 4 || hs[0] != Tt || hs[1] != Ht || hs[2] != Wt)
      throw shape_error("unpatchify: lc/hc token grids inconsistent: " +
                        shape_str(ls) + " vs " + shape_str(hs));
    A image{}, video{};
    if (leading_frame) {
      A lc = scatter_patches(linear(slice_axis0(emb.pl, 0, 1), w.inv_image_lc),
                             1, 4, 4, 3);
      A hc = scatter_patches(linear(slice_axis0(emb.ph, 0, 1), w.inv_image_hc),
                             1, 4, 4, 9);
      A s2 = concat_lastdim(reshape(lc, {H / 2, W / 2, 3}),
                            reshape(hc, {H / 2, W / 2, 9}));
      image = reshape(idwt2_packed(s2), {1, H, W, 3});
    }
    if (Tv > 0) {
      A lc = scatter_patches(
          linear(leading_frame ? slice_axis0(emb.pl, 1, Tv) : emb.pl,
                 w.inv_video_lc),
          2, 4, 4, 3);
      A hc = scatter_patches(
          linear(leading_frame ? slice_axis0(emb.ph, 1, Tv) : emb.ph,
                 w.inv_video_hc),
          2, 4, 4, 21);
      video = idwt3_packed(concat_lastdim(lc, hc));
    }
    if (!leading_frame) return video;
    if (Tv == 0) return image;
    return concat_axis0(image, video);
  }

  A image{}, video{};
  if (leading_frame) {
    A tok = linear(slice_axis0(emb.pl, 0, 1), w.inv_image_rgb);
    image = scatter_patches(tok, 1, 8, 8, 3);
  }
  if (Tv > 0) {
    A tok = linear(leading_frame ? slice_axis0(emb.pl, 1, Tv) : emb.pl,
                   w.inv_video_rgb);
    video = scatter_patches(tok, 4, 8, 8, 3);
  }
  if (!leading_frame) return video;
  if (Tv == 0) return image;
  return concat_axis0(image, video);
}

#define VVAE_PATCH_INSTANTIATE(A)                                         \
  template PatchEmb<A> patchify<A>(const A&, const PatchifierW<A>&,       \
                                   const ModelConfig&, bool);             \
  template A unpatchify<A>(const PatchEmb<A>&, const PatchifierW<A>&,     \
                           const ModelConfig&, bool);

VVAE_PATCH_INSTANTIATE(Tensor<float>)
VVAE_PATCH_INSTANTIATE(Tensor<double>)
VVAE_PATCH_INSTANTIATE(ad::Var<float>)
VVAE_PATCH_INSTANTIATE(ad::Var<double>)
#undef VVAE_PATCH_INSTANTIATE

}  // namespace vvae

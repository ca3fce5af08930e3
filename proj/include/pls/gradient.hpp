#pragma once

// Forward-difference gradient fields and their adjoint.
//
// The discrete gradient uses forward differences with a replicated boundary:
//   gx(y, x) = I(y, x+1) - I(y, x)  for x < W-1, and 0 in the last column,
//   gy(y, x) = I(y+1, x) - I(y, x)  for y < H-1, and 0 in the last row.
// divergence_adjoint is the exact adjoint of forward_gradient, i.e. the
// operator T with <grad u, g> = <u, T g> (equal to minus the discrete
// divergence under this stencil). Keeping the pair exactly adjoint is what
// makes the reconstruction normal equations and their solvers line up with
// the energy to floating-point rounding.

#include "pls/image.hpp"

namespace pls {

template <typename Scalar>
struct GradientField {
  Image<Scalar> gx;
  Image<Scalar> gy;

  int width() const { return gx.width(); }
  int height() const { return gx.height(); }
  int channels() const { return gx.channels(); }
};

template <typename Scalar>
GradientField<Scalar> forward_gradient(const Image<Scalar>& img) {
  const int w = img.width(), h = img.height();
  GradientField<Scalar> g{Image<Scalar>(w, h, img.channels()),
                          Image<Scalar>(w, h, img.channels())};
  g.gx.declared_range = g.gy.declared_range = {Scalar(-1), Scalar(1)};
  for (int c = 0; c < img.channels(); ++c) {
    const auto& p = img.planes[c];
    if (w > 1)
      g.gx.planes[c].leftCols(w - 1) = p.rightCols(w - 1) - p.leftCols(w - 1);
    if (h > 1)
      g.gy.planes[c].topRows(h - 1) = p.bottomRows(h - 1) - p.topRows(h - 1);
  }
  return g;
}

template <typename Scalar>
Image<Scalar> divergence_adjoint(const GradientField<Scalar>& g) {
  require_same_shape(g.gx, g.gy, "divergence_adjoint");
  const int w = g.width(), h = g.height();
  Image<Scalar> out(w, h, g.channels());
  for (int c = 0; c < g.channels(); ++c) {
    const auto& gx = g.gx.planes[c];
    const auto& gy = g.gy.planes[c];
    auto& o = out.planes[c];
    if (w > 1) {
      // Adjoint of the x-difference: o(x) += gx(x-1) - gx(x), with the last
      // gx column unused (the forward operator's last row is zero).
      o.leftCols(w - 1) -= gx.leftCols(w - 1);
      o.rightCols(w - 1) += gx.leftCols(w - 1);
    }
    if (h > 1) {
      o.topRows(h - 1) -= gy.topRows(h - 1);
      o.bottomRows(h - 1) += gy.topRows(h - 1);
    }
  }
  return out;
}

// Fixed-map normalization of a gradient plane into [0, 1] and back.
template <typename Scalar>
Image<Scalar> normalize_gradient(const Image<Scalar>& g) {
  const auto st = gradient_norm_state<Scalar>();
  Image<Scalar> out = g;
  for (auto& p : out.planes) p = (p - st.offset) / st.scale;
  out.declared_range = {Scalar(0), Scalar(1)};
  return out;
}

template <typename Scalar>
Image<Scalar> denormalize_gradient(const Image<Scalar>& g) {
  const auto st = gradient_norm_state<Scalar>();
  Image<Scalar> out = g;
  for (auto& p : out.planes) p = p * st.scale + st.offset;
  out.declared_range = {Scalar(-1), Scalar(1)};
  return out;
}

}  // namespace pls

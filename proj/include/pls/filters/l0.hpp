#pragma once
// L0 gradient smoothing by half-quadratic splitting. The auxiliary gradient
// field (h, v) starts at zero; each round solves the screened gradient-data
// system for S (the same spectral solve the reconstruction module uses), then
// thresholds S's gradients: a pixel keeps (dx, dy) only when the squared
// gradient magnitude summed over channels and both axes exceeds
// lambda / beta_hq. beta_hq starts at 2*lambda and multiplies by kappa until
// it exceeds beta_max, so the threshold sweeps from coarse to fine.

#include <stdexcept>

#include "pls/gradient.hpp"
#include "pls/image.hpp"
#include "pls/reconstruction.hpp"

namespace pls {

template <typename Scalar>
Image<Scalar> l0_smooth(const Image<Scalar>& src, double lambda, double kappa = 2.0,
                        double beta_max = 1e5) {
  if (lambda < 0) throw std::invalid_argument("l0_smooth: lambda must be >= 0");
  if (kappa <= 1) throw std::invalid_argument("l0_smooth: kappa must be > 1");
  if (lambda == 0) return src;

  const int w = src.width(), h = src.height(), cs = src.channels();
  GradientField<Scalar> g{Image<Scalar>(w, h, cs), Image<Scalar>(w, h, cs)};
  Image<Scalar> s = src;

  for (double beta_hq = 2.0 * lambda; beta_hq <= beta_max; beta_hq *= kappa) {
    s = reconstruct(src, g, ReconstructionConfig{beta_hq});

    const GradientField<Scalar> ds = forward_gradient(s);
    Plane<Scalar> mag2 = Plane<Scalar>::Zero(h, w);
    for (int c = 0; c < cs; ++c)
      mag2 += ds.gx.planes[c].square() + ds.gy.planes[c].square();
    const auto keep = mag2 > Scalar(lambda / beta_hq);
    for (int c = 0; c < cs; ++c) {
      g.gx.planes[c] = keep.select(ds.gx.planes[c], Scalar(0));
      g.gy.planes[c] = keep.select(ds.gy.planes[c], Scalar(0));
    }
  }
  return s;
}

}  // namespace pls

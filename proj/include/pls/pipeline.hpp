#pragma once
// Two-step piecewise-linear smoothing and the applications built on it.
//
// pc_smooth      — classical edge-preserving smoothing of intensities (the
//                  baseline arm): output is locally constant around edges,
//                  which sharpens them and causes gradient reversals under
//                  detail enhancement.
// pl_smooth      — the two-step method: filter the forward-difference
//                  gradient field with the same smoother (after mapping
//                  gradients into [0,1]), then reconstruct the image from the
//                  filtered gradients with a screened least-squares solve.
//                  The output is locally *linear*, so ramps survive and
//                  enhancement does not reverse edges.
// control arm    — pc_smooth_then_reconstruct: smooth intensities first, then
//                  rebuild from the smoothed image's gradients. Kept as the
//                  comparison arm showing reconstruction alone does not fix
//                  reversals.
//
// Applications: detail enhancement, HDR tone mapping (base/detail split in
// log10 luminance), and flash/no-flash denoising (flash gradients guide the
// no-flash gradient filtering). Study helpers quantify gradient reversals,
// quantization cost, and the beta trade-off as CSV rows.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pls/filters.hpp"
#include "pls/gradient.hpp"
#include "pls/image.hpp"
#include "pls/reconstruction.hpp"
#include "pls/threads.hpp"

namespace pls {

// ---------------------------------------------------------------------------
// Configuration

struct ToneMapConfig {
  double target_base_contrast = 5.0;  // log10 units allowed for the base layer
  double saturation = 0.6;            // color ratio exponent in (0, 1]
};

template <typename Scalar>
struct PipelineConfig {
  FilterSpec filter = Bilateral{};
  double beta = 16.0;
  std::optional<Image<Scalar>> guide;  // joint mode: guidance image (e.g. flash)
  double enhancement_factor = 5.0;     // k in i0 + k (i0 - smoothed)
  ToneMapConfig tone_map{};
};

enum class SmoothMode { pc, pl, control };

inline const char* smooth_mode_name(SmoothMode m) {
  switch (m) {
    case SmoothMode::pc: return "pc";
    case SmoothMode::pl: return "pl";
    default: return "control";
  }
}

// ---------------------------------------------------------------------------
// Reversal metric

struct ReversalPosition {
  int axis;     // 0: x-gradient, 1: y-gradient
  int channel;
  int x, y;
};

struct ReversalReport {
  long reversal_count = 0;
  std::vector<ReversalPosition> reversal_positions;
  double tau = 0.01;
};

// Counts positions where the input carries a definite gradient
// (|grad input| > tau) and the enhanced image's gradient points the opposite
// way — the quantitative form of the halo/reversal artifact.
template <typename Scalar>
ReversalReport gradient_reversal_count(const Image<Scalar>& input,
                                       const Image<Scalar>& enhanced,
                                       double tau = 0.01) {
  require_same_shape(input, enhanced, "gradient_reversal_count");
  const auto gi = forward_gradient(input);
  const auto ge = forward_gradient(enhanced);
  ReversalReport rep;
  rep.tau = tau;
  const auto sign = [](Scalar v) { return (v > Scalar(0)) - (v < Scalar(0)); };
  const auto scan = [&](const Image<Scalar>& a, const Image<Scalar>& b, int axis) {
    for (int c = 0; c < a.channels(); ++c)
      for (int x = 0; x < a.width(); ++x)
        for (int y = 0; y < a.height(); ++y) {
          const Scalar vi = a.planes[c](y, x);
          if (!(std::abs(double(vi)) > tau)) continue;
          if (sign(b.planes[c](y, x)) == -sign(vi))
            rep.reversal_positions.push_back({axis, c, x, y});
        }
  };
  scan(gi.gx, ge.gx, 0);
  scan(gi.gy, ge.gy, 1);
  rep.reversal_count = long(rep.reversal_positions.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Smoothing arms

namespace detail {

// Single-channel wrapper around one plane.
template <typename Scalar>
Image<Scalar> plane_image(const Plane<Scalar>& p) {
  Image<Scalar> img(int(p.cols()), int(p.rows()), 1);
  img.planes[0] = p;
  return img;
}

// The forward-difference field carries no data in its last column (x axis) or
// last row (y axis). Replicate the last valid line before filtering so the
// structural zeros do not read as a spurious edge, and clear them afterwards.
template <typename Scalar>
void replicate_boundary(Image<Scalar>& g, int axis) {
  const int w = g.width(), h = g.height();
  for (auto& p : g.planes) {
    if (axis == 0 && w > 1) p.col(w - 1) = p.col(w - 2);
    if (axis == 1 && h > 1) p.row(h - 1) = p.row(h - 2);
  }
}

template <typename Scalar>
void zero_boundary(Image<Scalar>& g, int axis) {
  for (auto& p : g.planes) {
    if (axis == 0) p.col(g.width() - 1).setZero();
    if (axis == 1) p.row(g.height() - 1).setZero();
  }
}

// Filter one gradient axis, channel by channel: map into [0,1], smooth with
// the corresponding guide channel (the plane itself when no guide is given),
// map back. Per-channel filtering keeps range distances one-dimensional and
// lets the grid fast path engage.
template <typename Scalar>
Image<Scalar> filter_gradient_axis(const Image<Scalar>& grad,
                                   const Image<Scalar>* guide_grad,
                                   const FilterSpec& filter, int axis) {
  Image<Scalar> out(grad.width(), grad.height(), grad.channels());
  out.declared_range = {Scalar(-1), Scalar(1)};
  for (int c = 0; c < grad.channels(); ++c) {
    Image<Scalar> s = plane_image(grad.planes[c]);
    replicate_boundary(s, axis);
    const Image<Scalar> sn = normalize_gradient(s);
    Image<Scalar> gn;
    if (guide_grad) {
      Image<Scalar> g = plane_image(guide_grad->planes[c]);
      replicate_boundary(g, axis);
      gn = normalize_gradient(g);
    } else {
      gn = sn;
    }
    Image<Scalar> filtered = denormalize_gradient(apply_filter(sn, gn, filter));
    zero_boundary(filtered, axis);
    out.planes[c] = filtered.planes[0];
  }
  return out;
}

template <typename F>
auto timed_ms(F&& fn, double* ms) {
  const auto t0 = std::chrono::steady_clock::now();
  auto result = fn();
  const auto t1 = std::chrono::steady_clock::now();
  if (ms) *ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return result;
}

}  // namespace detail

// Baseline arm: smooth intensities directly. Self-guided unless a guide is
// passed. The guided filter needs a single-channel guide, so a multi-channel
// guide collapses to its luminance for that filter only.
template <typename Scalar>
Image<Scalar> pc_smooth(const Image<Scalar>& i0, const FilterSpec& filter,
                        const std::optional<Image<Scalar>>& guide = std::nullopt) {
  validate(filter);
  if (guide) require_same_extent(i0, *guide, "pc_smooth");
  const Image<Scalar>& g = guide ? *guide : i0;
  if (std::holds_alternative<Guided>(filter) && g.channels() > 1)
    return apply_filter(i0, detail::plane_image(luminance(g)), filter);
  return apply_filter(i0, g, filter);
}

// The two-step method. Step 1: filter each forward-gradient channel (x and y
// independently) with the configured smoother; in joint mode the guide is
// the matching gradient channel of cfg.guide. Step 2: screened least-squares
// reconstruction against the input with weight cfg.beta.
template <typename Scalar>
Image<Scalar> pl_smooth(const Image<Scalar>& i0, const PipelineConfig<Scalar>& cfg) {
  validate(cfg.filter);
  if (!(cfg.beta >= 0)) throw std::invalid_argument("pl_smooth: beta must be >= 0");
  if (cfg.guide) require_same_shape(i0, *cfg.guide, "pl_smooth");

  const GradientField<Scalar> g = forward_gradient(i0);
  std::optional<GradientField<Scalar>> gg;
  if (cfg.guide) gg = forward_gradient(*cfg.guide);

  const auto run_x = [&] {
    return detail::filter_gradient_axis(g.gx, gg ? &gg->gx : nullptr, cfg.filter, 0);
  };
  const auto run_y = [&] {
    return detail::filter_gradient_axis(g.gy, gg ? &gg->gy : nullptr, cfg.filter, 1);
  };

  GradientField<Scalar> filtered;
  if (max_threads() > 1) {
    auto fx = std::async(std::launch::async, run_x);
    filtered.gy = run_y();
    filtered.gx = fx.get();
  } else {
    filtered.gx = run_x();
    filtered.gy = run_y();
  }

  ReconstructionConfig rc;
  rc.beta = cfg.beta;
  return reconstruct(i0, filtered, rc);
}

// Control arm: smooth intensities, then rebuild from the smoothed image's own
// gradients. Demonstrates that reconstruction alone does not remove the
// artifacts a piecewise-constant smoother introduces.
template <typename Scalar>
Image<Scalar> pc_smooth_then_reconstruct(
    const Image<Scalar>& i0, const FilterSpec& filter, double beta,
    const std::optional<Image<Scalar>>& guide = std::nullopt) {
  const Image<Scalar> smoothed = pc_smooth(i0, filter, guide);
  ReconstructionConfig rc;
  rc.beta = beta;
  return reconstruct(i0, forward_gradient(smoothed), rc);
}

// Arm dispatch shared by the CLI and the applications.
template <typename Scalar>
Image<Scalar> smooth_with_mode(const Image<Scalar>& i0, const PipelineConfig<Scalar>& cfg,
                               SmoothMode mode) {
  switch (mode) {
    case SmoothMode::pc: return pc_smooth(i0, cfg.filter, cfg.guide);
    case SmoothMode::pl: return pl_smooth(i0, cfg);
    default: return pc_smooth_then_reconstruct(i0, cfg.filter, cfg.beta, cfg.guide);
  }
}

// ---------------------------------------------------------------------------
// Applications

// i0 + k (i0 - smoothed). No clamping: values may leave [0,1] and are only
// clamped when saved to an integer format.
template <typename Scalar>
Image<Scalar> detail_enhance(const Image<Scalar>& i0, const Image<Scalar>& smoothed,
                             double k) {
  require_same_shape(i0, smoothed, "detail_enhance");
  Image<Scalar> out = i0;
  for (int c = 0; c < i0.channels(); ++c)
    out.planes[c] += Scalar(k) * (i0.planes[c] - smoothed.planes[c]);
  return out;
}

// HDR tone mapping via base/detail decomposition of log10 luminance: the base
// layer is compressed to cfg.tone_map.target_base_contrast log units, detail
// passes through unchanged, and colors are reattached with a saturation
// exponent. Output is affinely mapped into [0,1].
template <typename Scalar>
Image<Scalar> tone_map(const Image<Scalar>& hdr, const PipelineConfig<Scalar>& cfg,
                       SmoothMode mode = SmoothMode::pl) {
  const int w = hdr.width(), h = hdr.height();
  Plane<Scalar> lum = luminance(hdr);
  const double max_l = double(lum.maxCoeff());
  if (!(max_l > 0))
    throw NonPositiveLuminance("tone_map: image has no positive luminance");
  lum = lum.max(Scalar(1e-6 * max_l));  // floor, so log stays finite

  constexpr double kInvLn10 = 0.43429448190325182765;
  const Plane<Scalar> ell = lum.log() * Scalar(kInvLn10);
  const double lmin = double(ell.minCoeff()), lmax = double(ell.maxCoeff());
  const double lspan = lmax - lmin;

  Plane<Scalar> base;
  double cf = 1.0;
  if (lspan < 1e-12) {
    base = ell;  // constant log-luminance: nothing to compress
  } else {
    Image<Scalar> norm(w, h, 1);
    norm.planes[0] = (ell - Scalar(lmin)) / Scalar(lspan);
    PipelineConfig<Scalar> scfg = cfg;
    scfg.guide.reset();
    const Image<Scalar> base_n = smooth_with_mode(norm, scfg, mode);
    base = Scalar(lmin) + base_n.planes[0] * Scalar(lspan);
    const double bspan = double(base.maxCoeff()) - double(base.minCoeff());
    cf = bspan > 1e-12 ? cfg.tone_map.target_base_contrast / bspan : 1.0;
  }

  const Plane<Scalar> detail = ell - base;
  const Plane<Scalar> ell_out =
      Scalar(cf) * base + detail - Scalar(cf * double(base.maxCoeff()));
  const Plane<Scalar> lum_out = (ell_out * Scalar(1.0 / kInvLn10)).exp();

  Image<Scalar> out(w, h, hdr.channels());
  const Scalar s = Scalar(cfg.tone_map.saturation);
  for (int c = 0; c < hdr.channels(); ++c)
    out.planes[c] = (hdr.planes[c] / lum).pow(s) * lum_out;

  const auto range = observed_range(out);
  const double span = double(range.span());
  for (auto& p : out.planes) {
    if (span < 1e-12)
      p = p.min(Scalar(1)).max(Scalar(0));
    else
      p = (p - range.lo) / Scalar(span);
  }
  out.declared_range = {Scalar(0), Scalar(1)};
  return out;
}

// Flash/no-flash denoising: smooth the no-flash image's gradients using the
// flash image's gradients as the guide.
template <typename Scalar>
Image<Scalar> flash_noflash(const Image<Scalar>& noflash, const Image<Scalar>& flash,
                            const FilterSpec& filter, double beta) {
  require_same_shape(noflash, flash, "flash_noflash");
  PipelineConfig<Scalar> cfg;
  cfg.filter = filter;
  cfg.beta = beta;
  cfg.guide = flash;
  return pl_smooth(noflash, cfg);
}

// ---------------------------------------------------------------------------
// Studies

struct StudyRow {
  std::string filter;
  std::string arm;
  std::string param_set;
  double beta = 0.0;
  std::string metric;
  double value = 0.0;
};

inline constexpr const char* kStudyCsvHeader = "filter,arm,param_set,beta,metric,value";

inline std::string to_csv_row(const StudyRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%s,%s,%s,%g,%s,%.10g", r.filter.c_str(),
                r.arm.c_str(), r.param_set.c_str(), r.beta, r.metric.c_str(), r.value);
  return buf;
}

// Compact flag-style description of a filter's parameters. Semicolons keep
// the string a single CSV field.
inline std::string describe(const FilterSpec& spec) {
  char buf[160];
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilateral>)
          std::snprintf(buf, sizeof buf, "sigma-s=%g;sigma-r=%g", f.sigma_s, f.sigma_r);
        else if constexpr (std::is_same_v<T, DomainTransformNC>)
          std::snprintf(buf, sizeof buf, "sigma-s=%g;sigma-r=%g;iterations=%d",
                        f.sigma_s, f.sigma_r, f.iterations);
        else if constexpr (std::is_same_v<T, WeightedMedian>)
          std::snprintf(buf, sizeof buf, "radius=%d;sigma-r=%g;bins=%d", f.radius,
                        f.sigma_r, f.bins);
        else if constexpr (std::is_same_v<T, L0>)
          std::snprintf(buf, sizeof buf, "lambda=%g;kappa=%g", f.lambda, f.kappa);
        else
          std::snprintf(buf, sizeof buf, "radius=%d;epsilon=%g", f.radius, f.epsilon);
      },
      spec);
  return buf;
}

// Deterministic 1-D test signal (512 samples, height 1): a flat region, a
// textured ramp whose gradients stay below the reversal threshold, a large
// step, a short steep shoulder whose slope is well above the threshold, and a
// long gentle second ramp. The shoulder is what piecewise-constant smoothers
// sharpen into a reversal; the textured ramp is what they flatten.
inline Image<double> fig2_signal() {
  constexpr int n = 512;
  constexpr int flat_end = 96;
  constexpr int step_x = 304;     // first sample of the upper plateau
  constexpr int plateau_end = 320;
  constexpr int shoulder_len = 4;
  constexpr double flat_v = 0.20;
  constexpr double ramp_top = 0.46;
  constexpr double tex_amp = 0.02;
  constexpr double tex_period = 16.0;
  constexpr double step_v = 0.86;
  constexpr double shoulder_slope = 0.088;
  constexpr double tail_v = 0.49;

  Image<double> img(n, 1, 1);
  auto& row = img.planes[0];
  const double ramp_slope = (ramp_top - flat_v) / double(step_x - 1 - flat_end);
  const double shoulder_bottom = step_v - shoulder_slope * shoulder_len;
  const int tail_start = plateau_end + shoulder_len;
  const double tail_slope = (tail_v - shoulder_bottom) / double(n - 1 - (tail_start - 1));
  for (int x = 0; x < n; ++x) {
    double v;
    if (x < flat_end)
      v = flat_v;
    else if (x < step_x)
      v = flat_v + ramp_slope * (x - flat_end) +
          tex_amp * std::sin(2.0 * M_PI * (x - flat_end) / tex_period);
    else if (x < plateau_end)
      v = step_v;
    else if (x < tail_start)
      v = step_v - shoulder_slope * (x - plateau_end + 1);
    else
      v = shoulder_bottom + tail_slope * (x - (tail_start - 1));
    row(0, x) = v;
  }
  return img;
}

// The four smoother configurations of the reversal study, with the
// intensity-domain (pc) and gradient-domain (pl) range parameters they pair.
struct Fig2Pair {
  std::string name;
  FilterSpec pc;
  FilterSpec pl;
};

inline std::vector<Fig2Pair> fig2_parameter_pairs() {
  return {{"bilateral", Bilateral{16.0, 0.1}, Bilateral{16.0, 0.025}},
          {"l0", L0{0.007}, L0{0.00175}},
          {"dt", DomainTransformNC{16.0, 0.1}, DomainTransformNC{16.0, 0.025}},
          {"wmf", WeightedMedian{16, 0.1}, WeightedMedian{16, 0.025}}};
}

// Synthetic scene for the quantization study: a diagonal ramp sweeping most
// of the intensity range plus a period-16 triangle-wave texture. Every slope
// is an odd multiple of 1/255, so all gradients land exactly on a 256-level
// grid, while the 0.3-level offset keeps every intensity off that grid:
// intensity-domain filtering pays the full quantization cost at 256 bins,
// gradient-domain filtering pays none. This is the "wide intensity sweep,
// small gradients" contrast that lets the gradient arm run with far fewer
// bins.
inline Image<double> quantization_demo_image() {
  Image<double> img(96, 96, 1);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      const int p = x % 16;
      const int tex = p < 8 ? 2 * p : 2 * (16 - p);
      img.planes[0](y, x) = (x + y + tex + 0.3) / 255.0;
    }
  return img;
}

// Runs all three arms of the reversal study on the synthetic signal and
// reports reversal counts after k-times detail enhancement.
inline std::vector<StudyRow> reversal_study(double k = 2.0, double beta = 16.0,
                                            double tau = 0.01, int strip_rows = 8) {
  const Image<double> strip = replicate_rows(fig2_signal(), strip_rows);
  std::vector<StudyRow> rows;
  for (const auto& pair : fig2_parameter_pairs()) {
    const auto count = [&](const Image<double>& smoothed) {
      const auto enhanced = detail_enhance(strip, smoothed, k);
      return double(gradient_reversal_count(strip, enhanced, tau).reversal_count);
    };
    rows.push_back({pair.name, "pc", describe(pair.pc), 0.0, "reversal_count",
                    count(pc_smooth(strip, pair.pc))});
    PipelineConfig<double> cfg;
    cfg.filter = pair.pl;
    cfg.beta = beta;
    rows.push_back({pair.name, "pl", describe(pair.pl), beta, "reversal_count",
                    count(pl_smooth(strip, cfg))});
    rows.push_back({pair.name, "control", describe(pair.pc), beta, "reversal_count",
                    count(pc_smooth_then_reconstruct(strip, pair.pc, beta))});
  }
  return rows;
}

// Quantization cost study: for each bin count, run the weighted median over
// intensities (pc) and over gradients with reconstruction (pl), and report
// PSNR against the same arm's 4096-bin reference plus wall time.
template <typename Scalar>
std::vector<StudyRow> quantization_study(const Image<Scalar>& img, int radius,
                                         double sigma_r,
                                         const std::vector<int>& bin_counts,
                                         double beta) {
  constexpr int kRefBins = 4096;
  const auto run_pc = [&](int bins, double* ms) {
    return detail::timed_ms(
        [&] { return pc_smooth(img, FilterSpec(WeightedMedian{radius, sigma_r, bins})); },
        ms);
  };
  const auto run_pl = [&](int bins, double* ms) {
    PipelineConfig<Scalar> cfg;
    cfg.filter = WeightedMedian{radius, sigma_r, bins};
    cfg.beta = beta;
    return detail::timed_ms([&] { return pl_smooth(img, cfg); }, ms);
  };

  double ref_pc_ms = 0.0, ref_pl_ms = 0.0;
  const Image<Scalar> ref_pc = run_pc(kRefBins, &ref_pc_ms);
  const Image<Scalar> ref_pl = run_pl(kRefBins, &ref_pl_ms);

  std::vector<StudyRow> rows;
  for (int bins : bin_counts) {
    char ps[32];
    std::snprintf(ps, sizeof ps, "bins=%d", bins);
    double pc_ms = ref_pc_ms, pl_ms = ref_pl_ms;
    const Image<Scalar> out_pc = bins == kRefBins ? ref_pc : run_pc(bins, &pc_ms);
    const Image<Scalar> out_pl = bins == kRefBins ? ref_pl : run_pl(bins, &pl_ms);
    rows.push_back({"wmf", "pc", ps, 0.0, "psnr_db", psnr(out_pc, ref_pc)});
    rows.push_back({"wmf", "pc", ps, 0.0, "time_ms", pc_ms});
    rows.push_back({"wmf", "pl", ps, beta, "psnr_db", psnr(out_pl, ref_pl)});
    rows.push_back({"wmf", "pl", ps, beta, "time_ms", pl_ms});
  }
  return rows;
}

// Data-term growth with beta: larger beta trusts the filtered gradients more
// and the anchor image less.
template <typename Scalar>
std::vector<StudyRow> beta_study(const Image<Scalar>& i0, const FilterSpec& filter,
                                 const std::vector<double>& betas) {
  std::vector<StudyRow> rows;
  for (double beta : betas) {
    PipelineConfig<Scalar> cfg;
    cfg.filter = filter;
    cfg.beta = beta;
    const Image<Scalar> out = pl_smooth(i0, cfg);
    rows.push_back({filter_name(filter), "pl", describe(filter), beta, "data_term",
                    data_term(i0, out)});
  }
  return rows;
}

}  // namespace pls

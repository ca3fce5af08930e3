#pragma once

// plsmooth command line.
//
// Subcommands: smooth, enhance, tonemap, flashnoflash (file in / file out)
// and study-reversal, study-bins, study-beta (CSV out). All flags are
// validated before any file is touched. Exit codes: 0 success, 2 argument
// error (usage printed), 1 processing error (one-line diagnostic).

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pls/io.hpp"
#include "pls/pipeline.hpp"
#include "pls/threads.hpp"

namespace plscli {

// Per-subcommand option storage. One instance per subcommand; CLI11 options
// bind into these fields and the action lambdas read them after parsing.
struct SubOpts {
  // Filter selection and parameters.
  std::string filter = "bilateral";
  double sigma_s = 16.0;
  double sigma_r = 0.0;  // resolved after parse when the flag is absent
  int iterations = 3;
  double lambda = 0.0;  // resolved after parse when the flag is absent
  double kappa = 2.0;
  double l0_beta_max = 1e5;
  int radius = 16;
  int bins = 4096;
  double epsilon = 0.01;
  bool fast = false;

  // Pipeline controls.
  pls::SmoothMode mode = pls::SmoothMode::pl;
  double beta = 16.0;
  double k = 5.0;
  double tau = 0.01;
  double contrast = 5.0;
  double saturation = 0.6;

  // Paths and misc.
  std::string input, output, flash, csv_out;
  unsigned seed = 7;
  int threads = 1;
  int study_radius = 8;
  double study_sigma_r = 0.1;
  std::vector<int> bin_counts{256, 1024, 4096};
  std::vector<double> betas{1.0, 16.0, 256.0, 1024.0};

  // Option handles needed to tell "flag given" from "default".
  CLI::Option* sigma_r_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

namespace detail {

inline const std::map<std::string, pls::SmoothMode>& mode_names() {
  static const std::map<std::string, pls::SmoothMode> m{
      {"pc", pls::SmoothMode::pc},
      {"pl", pls::SmoothMode::pl},
      {"control", pls::SmoothMode::control}};
  return m;
}

inline void add_filter_flags(CLI::App* sub, SubOpts& o,
                             const std::vector<std::string>& names) {
  std::string joined;
  for (const auto& n : names) joined += (joined.empty() ? "" : "|") + n;
  sub->add_option("--filter", o.filter, "filter: " + joined)
      ->check(CLI::IsMember(names))
      ->capture_default_str();
  sub->add_option("--sigma-s", o.sigma_s, "spatial sigma (bilateral, dt)")
      ->check(CLI::PositiveNumber);
  o.sigma_r_opt = sub->add_option("--sigma-r", o.sigma_r,
                                  "range sigma (bilateral, dt, wmf); default "
                                  "depends on --mode and subcommand")
                      ->check(CLI::PositiveNumber);
  sub->add_option("--iterations", o.iterations, "dt iteration count")
      ->check(CLI::Range(1, 100))
      ->capture_default_str();
  o.lambda_opt = sub->add_option("--lambda", o.lambda,
                                 "l0 smoothing weight; default depends on --mode")
                     ->check(CLI::PositiveNumber);
  sub->add_option("--kappa", o.kappa, "l0 continuation rate (> 1)")
      ->check(CLI::Range(1.0 + 1e-9, 1e6))
      ->capture_default_str();
  sub->add_option("--l0-beta-max", o.l0_beta_max, "l0 continuation cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--radius", o.radius, "window radius (wmf, guided)")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  sub->add_option("--bins", o.bins, "wmf quantization bins")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  sub->add_option("--epsilon", o.epsilon, "guided-filter regularization")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_flag("--fast", o.fast, "bilateral grid approximation");
}

inline void add_threads_flag(CLI::App* sub, SubOpts& o) {
  o.threads_opt = sub->add_option("--threads", o.threads, "worker thread cap")
                      ->envname("PLS_THREADS")
                      ->check(CLI::Range(1, 1024));
}

inline void add_mode_beta_flags(CLI::App* sub, SubOpts& o, double default_beta) {
  o.mode = pls::SmoothMode::pl;
  o.beta = default_beta;
  sub->add_option("--mode", o.mode, "smoothing arm: pc|pl|control")
      ->transform(CLI::CheckedTransformer(mode_names(), CLI::ignore_case))
      ->default_str("pl");
  o.beta_opt = sub->add_option("--beta", o.beta,
                               "gradient-data weight (pl and control arms)")
                   ->check(CLI::NonNegativeNumber)
                   ->capture_default_str();
}

// Build the FilterSpec from parsed flags. Range sigma and the l0 weight have
// mode- and application-dependent defaults: the gradient arm smooths signals
// whose span is a quarter of the intensity span, so its defaults are the
// intensity-domain values divided by four.
inline pls::FilterSpec resolve_filter(const SubOpts& o, double sr_pl,
                                      double sr_pc) {
  const bool pl_arm = o.mode == pls::SmoothMode::pl;
  const double sr =
      o.sigma_r_opt->count() ? o.sigma_r : (pl_arm ? sr_pl : sr_pc);
  const double lam =
      o.lambda_opt->count() ? o.lambda : (pl_arm ? 0.00175 : 0.007);
  if (o.filter == "bilateral") return pls::Bilateral{o.sigma_s, sr, o.fast};
  if (o.filter == "dt") return pls::DomainTransformNC{o.sigma_s, sr, o.iterations};
  if (o.filter == "wmf") return pls::WeightedMedian{o.radius, sr, o.bins};
  if (o.filter == "l0") return pls::L0{lam, o.kappa, o.l0_beta_max};
  return pls::Guided{o.radius, o.epsilon};
}

inline void warn_ignored_beta(const SubOpts& o, std::ostream& err) {
  if (o.mode == pls::SmoothMode::pc && o.beta_opt->count())
    err << "warning: --beta only applies to the pl and control arms; "
           "ignored with --mode pc\n";
}

// Map an image into [0,1] by its declared range and remember how to undo it.
// PNG inputs already are [0,1]; PFM inputs carry their observed range.
struct UnitMap {
  double lo = 0.0;
  double span = 1.0;
};

inline UnitMap to_unit(pls::Image<double>& img) {
  const auto r = img.declared_range;
  if (r.lo == 0.0 && r.hi == 1.0) return {};
  const UnitMap m{r.lo, r.hi - r.lo};
  for (auto& p : img.planes) p = (p - m.lo) / m.span;
  img.declared_range = {0.0, 1.0};
  return m;
}

inline void from_unit(pls::Image<double>& img, const UnitMap& m) {
  if (m.lo == 0.0 && m.span == 1.0) return;
  for (auto& p : img.planes) p = p * m.span + m.lo;
  img.declared_range = {m.lo, m.lo + m.span};
}

inline void write_rows(const std::vector<pls::StudyRow>& rows,
                       const std::string& path, std::ostream& console) {
  const auto dump = [&](std::ostream& s) {
    s << pls::kStudyCsvHeader << '\n';
    for (const auto& row : rows) s << pls::to_csv_row(row) << '\n';
  };
  if (path.empty()) {
    dump(console);
    return;
  }
  std::ofstream f(path);
  if (!f) throw pls::IoError("cannot write: " + path);
  dump(f);
}

inline pls::Image<double> load_unit_image(const std::string& path,
                                          UnitMap* map_out = nullptr) {
  auto img = pls::load_image(path);
  const UnitMap m = to_unit(img);
  if (map_out) *map_out = m;
  return img;
}

inline void save_output(pls::Image<double> img, const UnitMap& m,
                        const std::string& path) {
  from_unit(img, m);
  pls::save_image(img, path, pls::kind_from_extension(path));
}

}  // namespace detail

// Parse `args` (program name excluded) and run the selected subcommand.
// `out` receives stdout-bound data (CSV, help); `err` receives warnings and
// diagnostics.
inline int run(std::vector<std::string> args, std::ostream& out,
               std::ostream& err) {
  using namespace detail;
  using pls::Image;

  CLI::App app{"Edge-preserving smoothing that filters image gradients with a "
               "classical filter and rebuilds the image from them, plus the "
               "applications and studies built on it"};
  app.name("plsmooth");
  app.require_subcommand(1);

  const std::vector<std::string> kFilters{"bilateral", "dt", "wmf", "l0",
                                          "guided"};
  const std::vector<std::string> kStudyFilters{"all", "bilateral", "l0", "dt",
                                               "wmf"};

  SubOpts smooth_o, enhance_o, tonemap_o, flash_o, rev_o, bins_o, beta_o;
  struct Action {
    CLI::App* sub;
    SubOpts* opts;
    std::function<void()> fn;
  };
  std::vector<Action> actions;

  // --- smooth ---------------------------------------------------------
  CLI::App* smooth_cmd =
      app.add_subcommand("smooth", "smooth an image (pc, pl, or control arm)");
  add_filter_flags(smooth_cmd, smooth_o, kFilters);
  add_mode_beta_flags(smooth_cmd, smooth_o, 16.0);
  add_threads_flag(smooth_cmd, smooth_o);
  smooth_cmd->add_option("-i,--input", smooth_o.input, "input image (png or pfm)")
      ->required();
  smooth_cmd->add_option("-o,--output", smooth_o.output, "output image")
      ->required();
  actions.push_back({smooth_cmd, &smooth_o, [&] {
    auto& o = smooth_o;
    const auto filter = resolve_filter(o, 0.025, 0.1);
    warn_ignored_beta(o, err);
    UnitMap m;
    const auto img = load_unit_image(o.input, &m);
    pls::PipelineConfig<double> cfg;
    cfg.filter = filter;
    cfg.beta = o.beta;
    save_output(pls::smooth_with_mode(img, cfg, o.mode), m, o.output);
  }});

  // --- enhance ----------------------------------------------------------
  CLI::App* enhance_cmd = app.add_subcommand(
      "enhance", "boost the detail layer: out = in + k*(in - smooth(in))");
  add_filter_flags(enhance_cmd, enhance_o, kFilters);
  add_mode_beta_flags(enhance_cmd, enhance_o, 16.0);
  add_threads_flag(enhance_cmd, enhance_o);
  enhance_cmd->add_option("-k,--detail-factor", enhance_o.k, "detail gain")
      ->capture_default_str();
  enhance_cmd->add_option("-i,--input", enhance_o.input, "input image")
      ->required();
  enhance_cmd->add_option("-o,--output", enhance_o.output, "output image")
      ->required();
  actions.push_back({enhance_cmd, &enhance_o, [&] {
    auto& o = enhance_o;
    const auto filter = resolve_filter(o, 0.025, 0.1);
    warn_ignored_beta(o, err);
    UnitMap m;
    const auto img = load_unit_image(o.input, &m);
    pls::PipelineConfig<double> cfg;
    cfg.filter = filter;
    cfg.beta = o.beta;
    const auto smoothed = pls::smooth_with_mode(img, cfg, o.mode);
    save_output(pls::detail_enhance(img, smoothed, o.k), m, o.output);
  }});

  // --- tonemap ----------------------------------------------------------
  CLI::App* tonemap_cmd = app.add_subcommand(
      "tonemap", "compress an HDR image (.pfm) to a displayable range");
  add_filter_flags(tonemap_cmd, tonemap_o, kFilters);
  add_mode_beta_flags(tonemap_cmd, tonemap_o, 64.0);
  add_threads_flag(tonemap_cmd, tonemap_o);
  tonemap_cmd
      ->add_option("--contrast", tonemap_o.contrast, "target base-layer contrast")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tonemap_cmd
      ->add_option("--saturation", tonemap_o.saturation, "color saturation exponent")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tonemap_cmd->add_option("-i,--input", tonemap_o.input, "HDR input (.pfm)")
      ->required();
  tonemap_cmd->add_option("-o,--output", tonemap_o.output, "output image")
      ->required();
  actions.push_back({tonemap_cmd, &tonemap_o, [&] {
    auto& o = tonemap_o;
    const auto filter = resolve_filter(o, 0.03, 0.03);
    warn_ignored_beta(o, err);
    pls::ImageFileKind kind{};
    const auto hdr = pls::load_image(o.input, &kind);
    if (kind != pls::ImageFileKind::pfm)
      throw pls::FormatError(
          "tonemap requires a floating-point .pfm input; PNG inputs are "
          "display-referred (8/16-bit) and carry no scene range");
    pls::PipelineConfig<double> cfg;
    cfg.filter = filter;
    cfg.beta = o.beta;
    cfg.tone_map.target_base_contrast = o.contrast;
    cfg.tone_map.saturation = o.saturation;
    const auto ldr = pls::tone_map(hdr, cfg, o.mode);
    pls::save_image(ldr, o.output, pls::kind_from_extension(o.output));
  }});

  // --- flashnoflash -------------------------------------------------------
  CLI::App* flash_cmd = app.add_subcommand(
      "flashnoflash", "denoise a no-flash frame guided by a flash frame");
  add_filter_flags(flash_cmd, flash_o, kFilters);
  add_threads_flag(flash_cmd, flash_o);
  flash_o.beta = 128.0;
  flash_o.beta_opt = flash_cmd->add_option("--beta", flash_o.beta,
                                           "gradient-data weight")
                         ->check(CLI::NonNegativeNumber)
                         ->capture_default_str();
  flash_cmd->add_option("-i,--input", flash_o.input, "no-flash (noisy) image")
      ->required();
  flash_cmd->add_option("--flash", flash_o.flash, "flash (guide) image")
      ->required();
  flash_cmd->add_option("-o,--output", flash_o.output, "output image")
      ->required();
  actions.push_back({flash_cmd, &flash_o, [&] {
    auto& o = flash_o;
    const auto filter = resolve_filter(o, 0.005, 0.005);
    UnitMap m;
    const auto noflash = load_unit_image(o.input, &m);
    auto flash = load_unit_image(o.flash);
    save_output(pls::flash_noflash(noflash, flash, filter, o.beta), m,
                o.output);
  }});

  // --- study-reversal -----------------------------------------------------
  CLI::App* rev_cmd = app.add_subcommand(
      "study-reversal",
      "count gradient reversals after detail enhancement on the synthetic "
      "step-and-ramp signal, per filter and arm (CSV)");
  rev_o.filter = "all";
  rev_o.k = 2.0;
  rev_cmd->add_option("--filter", rev_o.filter, "all|bilateral|l0|dt|wmf")
      ->check(CLI::IsMember(kStudyFilters))
      ->capture_default_str();
  rev_cmd->add_option("-k,--detail-factor", rev_o.k, "detail gain")
      ->capture_default_str();
  rev_cmd->add_option("--beta", rev_o.beta, "gradient-data weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  rev_cmd->add_option("--tau", rev_o.tau, "reversal threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rev_cmd->add_option("--seed", rev_o.seed, "accepted for interface parity; "
                                            "the signal is deterministic");
  rev_cmd->add_option("--out", rev_o.csv_out, "CSV path (default stdout)");
  add_threads_flag(rev_cmd, rev_o);
  actions.push_back({rev_cmd, &rev_o, [&] {
    auto& o = rev_o;
    auto rows = pls::reversal_study(o.k, o.beta, o.tau);
    if (o.filter != "all")
      std::erase_if(rows, [&](const pls::StudyRow& r) { return r.filter != o.filter; });
    write_rows(rows, o.csv_out, out);
  }});

  // --- study-bins -----------------------------------------------------------
  CLI::App* bins_cmd = app.add_subcommand(
      "study-bins",
      "weighted-median quantization cost: PSNR against each arm's own "
      "4096-bin reference plus wall time, per bin count (CSV)");
  bins_cmd->add_option("-i,--input", bins_o.input,
                       "input image (default: built-in ramp-plus-texture scene)");
  bins_cmd->add_option("--radius", bins_o.study_radius, "median window radius")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  bins_cmd->add_option("--sigma-r", bins_o.study_sigma_r, "median range sigma")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bins_cmd->add_option("--bins", bins_o.bin_counts, "bin counts to test")
      ->delimiter(',')
      ->check(CLI::Range(2, 1 << 20));
  bins_cmd->add_option("--beta", bins_o.beta, "gradient-data weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bins_cmd->add_option("--out", bins_o.csv_out, "CSV path (default stdout)");
  add_threads_flag(bins_cmd, bins_o);
  actions.push_back({bins_cmd, &bins_o, [&] {
    auto& o = bins_o;
    const Image<double> img = o.input.empty() ? pls::quantization_demo_image()
                                              : load_unit_image(o.input);
    write_rows(pls::quantization_study(img, o.study_radius, o.study_sigma_r,
                                       o.bin_counts, o.beta),
               o.csv_out, out);
  }});

  // --- study-beta ---------------------------------------------------------
  CLI::App* beta_cmd = app.add_subcommand(
      "study-beta",
      "data-term growth of the reconstruction as beta increases (CSV)");
  add_filter_flags(beta_cmd, beta_o, kFilters);
  beta_cmd->add_option("-i,--input", beta_o.input,
                       "input image (default: seeded synthetic noise)");
  beta_cmd->add_option("--betas", beta_o.betas, "beta values to test")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  beta_cmd->add_option("--seed", beta_o.seed, "seed for the synthetic input")
      ->capture_default_str();
  beta_cmd->add_option("--out", beta_o.csv_out, "CSV path (default stdout)");
  add_threads_flag(beta_cmd, beta_o);
  actions.push_back({beta_cmd, &beta_o, [&] {
    auto& o = beta_o;
    o.mode = pls::SmoothMode::pl;  // the study runs the pl arm only
    const auto filter = resolve_filter(o, 0.025, 0.1);
    Image<double> img;
    if (o.input.empty()) {
      img = Image<double>(64, 64, 1);
      std::mt19937 rng(o.seed);
      std::uniform_real_distribution<double> dist(0.0, 1.0);
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) img.planes[0](y, x) = dist(rng);
    } else {
      img = load_unit_image(o.input);
    }
    write_rows(pls::beta_study(img, filter, o.betas), o.csv_out, out);
  }});

  // --- parse and dispatch ------------------------------------------------
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto parsed = app.get_subcommands();
    err << "error: " << e.what() << "\n\n"
        << (parsed.empty() ? app.help() : parsed.front()->help());
    return 2;
  }

  for (const auto& action : actions)
    if (app.got_subcommand(action.sub)) {
      try {
        if (action.opts->threads_opt && action.opts->threads_opt->count())
          pls::set_max_threads(action.opts->threads);
        action.fn();
        return 0;
      } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
      }
    }
  return 0;
}

}  // namespace plscli

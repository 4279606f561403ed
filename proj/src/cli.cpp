#include "hjbd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hjbd/error.hpp"
#include "hjbd/first_order_hj.hpp"
#include "hjbd/gibbs_sampler.hpp"
#include "hjbd/prior_json.hpp"
#include "hjbd/special.hpp"
#include "hjbd/tv_imaging.hpp"
#include "hjbd/verification.hpp"
#include "hjbd/viscous_hj.hpp"

namespace hjbd::cli {

namespace {

using json = nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f << text << '\n';
  if (!f) throw InvalidArgument("failed writing '" + path + "'");
}

std::string prior_text(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return arg;
  std::ifstream f(arg);
  if (!f) throw InvalidArgument("--prior is neither inline JSON nor a readable file: '" + arg + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void require_positive(double v, const char* flag) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(flag) + " must be positive and finite");
}

void require_nonnegative(double v, const char* flag) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(flag) + " must be nonnegative and finite");
}

Method parse_method(const std::string& s) {
  if (s == "auto") return Method::Auto;
  if (s == "closed") return Method::Closed;
  return Method::Quadrature;
}

struct Options {
  // shared estimator flags
  double t = 1.0, eps = 1.0, lambda = 1.0, m = 1.0;
  std::string prior;
  std::vector<double> x;
  std::string method = "auto";
  // images
  std::vector<std::string> files;
  std::string report;
  std::string reference;
  double tol = 1e-12;
  int max_iter = 10000;
  SamplerConfig sampler;
  double sigma = 20.0;
  std::uint64_t seed = 0;
  std::string pattern;
  double plateau_tol = 1e-6;
  // verify
  std::string suite = "core";
  std::string out;
  int size = 64;
  // example
  bool as_json = false;
};

int denoise_map(const Options& o, std::ostream& out) {
  require_positive(o.t, "--t");
  require_nonnegative(o.lambda, "--lambda");
  require_positive(o.tol, "--tol");
  if (o.max_iter < 1) throw InvalidArgument("--max-iter must be at least 1");
  const Image input = read_pgm(o.files.at(0));
  const RofResult r = rof_map(input, o.t, o.lambda, RofOptions{o.tol, o.max_iter, false});
  write_pgm(r.image, o.files.at(1));
  const Image stored = quantize(r.image);
  json rep;
  rep["estimator"] = "map";
  rep["t"] = o.t;
  rep["lambda"] = o.lambda;
  rep["converged"] = r.converged;
  rep["iterations"] = r.iterations;
  rep["residual"] = r.residual;
  rep["duality_gap"] = r.duality_gap;
  rep["objective"] = rof_objective(input, r.image, o.t, o.lambda);
  rep["plateau_fraction"] = plateau_fraction(r.image, o.plateau_tol);
  rep["psnr_vs_input"] = psnr(stored, input);
  if (!o.reference.empty()) rep["psnr_vs_reference"] = psnr(stored, read_pgm(o.reference));
  if (!o.report.empty()) write_text(o.report, rep.dump(2));
  out << rep.dump(2) << '\n';
  if (!r.converged) throw ConvergenceError("MAP solver did not reach --tol", r.residual);
  return kOk;
}

int denoise_pm(const Options& o, std::ostream& out) {
  require_positive(o.t, "--t");
  require_positive(o.eps, "--eps");
  require_nonnegative(o.lambda, "--lambda");
  o.sampler.validate();
  const Image input = read_pgm(o.files.at(0));
  const McmcResult r = posterior_mean_mcmc(input, o.t, o.eps, o.lambda, o.sampler);
  write_pgm(r.mean_image, o.files.at(1));
  const Image stored = quantize(r.mean_image);
  double max_se = 0.0, mean_se = 0.0;
  for (double v : r.stderr_image.pixels) {
    max_se = std::max(max_se, v);
    mean_se += v;
  }
  mean_se /= static_cast<double>(std::max<std::size_t>(1, r.stderr_image.size()));
  json rep;
  rep["estimator"] = "pm";
  rep["t"] = o.t;
  rep["eps"] = o.eps;
  rep["lambda"] = o.lambda;
  rep["sweeps"] = o.sampler.sweeps;
  rep["burn_in"] = o.sampler.burn_in;
  rep["chains"] = o.sampler.chains;
  rep["thin"] = o.sampler.thin;
  rep["seed"] = o.sampler.seed;
  rep["rhat_max"] = r.rhat_max;
  rep["converged"] = r.converged;
  rep["recorded_sweeps"] = r.accepted_sweeps;
  rep["mean_stderr"] = mean_se;
  rep["max_stderr"] = max_se;
  rep["plateau_fraction"] = plateau_fraction(r.mean_image, o.plateau_tol);
  rep["psnr_vs_input"] = psnr(stored, input);
  if (!o.reference.empty()) rep["psnr_vs_reference"] = psnr(stored, read_pgm(o.reference));
  if (!o.report.empty()) write_text(o.report, rep.dump(2));
  out << rep.dump(2) << '\n';
  if (!r.converged) throw ConvergenceError("sampler chains disagree (split R-hat above 1.1)", r.rhat_max);
  return kOk;
}

json vec_json(const Vec& v) { return json(v); }

int pm_estimate(const Options& o, std::ostream& out) {
  if (o.x.empty()) throw InvalidArgument("--x is required");
  require_positive(o.t, "--t");
  require_nonnegative(o.eps, "--eps");
  const Prior prior = prior_from_json(prior_text(o.prior), o.x.size());
  require_dim(o.x.size(), prior.dim(), "--x");
  const PosteriorSummary s = estimate(prior, o.x, EstimatorParams{o.t, o.eps}, parse_method(o.method));
  json j;
  j["prior"] = json::parse(prior_to_json(prior));
  j["t"] = o.t;
  j["eps"] = o.eps;
  j["u_pm"] = vec_json(s.u_pm);
  j["mse"] = s.mse;
  j["s_eps"] = s.s_eps;
  j["w_eps"] = s.w_eps;
  j["log_w_eps"] = s.log_w_eps;
  j["grad_s_eps"] = vec_json(s.grad_s_eps);
  j["laplacian_s_eps"] = s.laplacian_s_eps;
  out << j.dump(2) << '\n';
  return kOk;
}

int map_estimate(const Options& o, std::ostream& out) {
  if (o.x.empty()) throw InvalidArgument("--x is required");
  require_positive(o.t, "--t");
  const Prior prior = prior_from_json(prior_text(o.prior), o.x.size());
  require_dim(o.x.size(), prior.dim(), "--x");
  const EnvelopeResult e = envelope(prior, o.x, o.t);
  json j;
  j["prior"] = json::parse(prior_to_json(prior));
  j["t"] = o.t;
  j["u_map"] = vec_json(e.minimizer);
  j["s_0"] = e.value;
  j["grad_s_0"] = vec_json(e.gradient);
  out << j.dump(2) << '\n';
  return kOk;
}

std::pair<std::size_t, std::size_t> parse_pattern(const std::string& s) {
  unsigned long w = 0, h = 0;
  char sep = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%lu%c%lu%c", &w, &sep, &h, &extra) != 3 || (sep != 'x' && sep != 'X') || w == 0 ||
      h == 0)
    throw InvalidArgument("--pattern expects WxH, got '" + s + "'");
  return {w, h};
}

int noise(const Options& o, std::ostream& out) {
  require_nonnegative(o.sigma, "--sigma");
  const bool from_pattern = !o.pattern.empty();
  if (from_pattern != (o.files.size() == 1))
    throw InvalidArgument("noise: give either IN OUT or --pattern WxH OUT");
  Image clean;
  if (from_pattern) {
    const auto [w, h] = parse_pattern(o.pattern);
    clean = make_test_pattern(w, h);
  } else {
    clean = read_pgm(o.files[0]);
  }
  const Image noisy = add_gaussian_noise(clean, NoiseSpec{o.sigma, o.seed});
  write_pgm(noisy, o.files.back());
  json j;
  j["width"] = noisy.width;
  j["height"] = noisy.height;
  j["sigma"] = o.sigma;
  j["seed"] = o.seed;
  j["psnr_vs_clean"] = psnr(quantize(noisy), quantize(clean));
  out << j.dump(2) << '\n';
  return kOk;
}

int metrics(const Options& o, std::ostream& out) {
  require_nonnegative(o.plateau_tol, "--plateau-tol");
  const Image a = read_pgm(o.files.at(0));
  const Image b = read_pgm(o.files.at(1));
  if (!a.same_shape(b)) throw InvalidArgument("metrics: images differ in size");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sse += (a.pixels[i] - b.pixels[i]) * (a.pixels[i] - b.pixels[i]);
  json j;
  j["psnr"] = psnr(a, b);
  j["mse"] = sse / static_cast<double>(a.size());
  j["plateau_fraction_a"] = plateau_fraction(a, o.plateau_tol);
  j["plateau_fraction_b"] = plateau_fraction(b, o.plateau_tol);
  j["tv_a"] = tv_eval(a, 1.0);
  j["tv_b"] = tv_eval(b, 1.0);
  out << j.dump(2) << '\n';
  return kOk;
}

int verify(const Options& o, std::ostream& out, std::ostream& err) {
  const Suite suite = suite_from_string(o.suite);
  if (o.size < 4 || o.size > 64) throw InvalidArgument("--size must lie in [4, 64]");
  SuiteOptions opts;
  opts.imaging_size = o.size;
  opts.sampler = o.sampler;
  opts.sampler.validate();
  const VerificationReport report = run_suite(suite, o.seed, opts);
  const std::string text = to_json(report, 2);
  std::ostream& log = o.out.empty() ? err : out;
  for (const CheckResult& c : report.checks) log << (c.passed ? "PASS " : "FAIL ") << c.name << '\n';
  if (o.out.empty()) {
    out << text << '\n';
  } else {
    write_text(o.out, text);
  }
  return report.all_passed() ? kOk : kNumericalFailure;
}

int example(const Options& o, std::ostream& out) {
  require_positive(o.t, "--t");
  require_positive(o.eps, "--eps");
  require_nonnegative(o.lambda, "--lambda");
  require_nonnegative(o.m, "--m");
  Vec xs = o.x;
  if (xs.empty())
    for (int i = -5; i <= 5; ++i) xs.push_back(i);
  const EstimatorParams p{o.t, o.eps};
  json rows = json::array();
  for (double x : xs) {
    const double xv[1] = {x};
    const double lam[1] = {o.lambda};
    const PosteriorSummary tik = s_eps_closed_quadratic(o.m, xv, p);
    const PosteriorSummary l1 = u_pm_closed_l1(lam, xv, p);
    json r;
    r["x"] = x;
    r["tikhonov_u_map"] = x / (1.0 + o.m * o.t);
    r["tikhonov_u_pm"] = tik.u_pm[0];
    r["tikhonov_mse"] = tik.mse;
    r["tikhonov_s_eps"] = tik.s_eps;
    r["l1_u_map"] = special::soft_threshold(x, o.t * o.lambda);
    r["l1_u_pm"] = l1.u_pm[0];
    r["l1_mse"] = l1.mse;
    r["l1_s_eps"] = l1.s_eps;
    rows.push_back(r);
  }
  if (o.as_json) {
    out << rows.dump(2) << '\n';
    return kOk;
  }
  out << "# Tikhonov m=" << o.m << " and l1 lambda=" << o.lambda << ", t=" << o.t << ", eps=" << o.eps << '\n';
  const char* heads[] = {"x", "tik_map", "tik_pm", "tik_mse", "l1_map", "l1_pm", "l1_mse"};
  for (const char* h : heads) out << std::setw(12) << h;
  out << '\n' << std::fixed << std::setprecision(6);
  for (const json& r : rows) {
    for (const char* k : {"x", "tikhonov_u_map", "tikhonov_u_pm", "tikhonov_mse", "l1_u_map", "l1_u_pm", "l1_mse"})
      out << std::setw(12) << r[k].get<double>();
    out << '\n';
  }
  out << std::defaultfloat;
  return kOk;
}

void add_sampler_flags(CLI::App* sub, Options& o) {
  sub->add_option("--sweeps", o.sampler.sweeps, "Gibbs sweeps per chain, burn-in included");
  sub->add_option("--burn-in", o.sampler.burn_in, "discarded leading sweeps");
  sub->add_option("--chains", o.sampler.chains, "independent chains");
  sub->add_option("--thin", o.sampler.thin, "keep every k-th sweep");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MAP and posterior-mean denoising through Hamilton-Jacobi equations", "hjbd"};
  app.require_subcommand(1);
  Options o;

  auto* dmap = app.add_subcommand("denoise-map", "TV (ROF) MAP denoising of a PGM image");
  dmap->add_option("files", o.files, "IN.pgm OUT.pgm")->required()->expected(2);
  dmap->add_option("--t", o.t, "fidelity weight t")->required();
  dmap->add_option("--lambda", o.lambda, "TV weight")->required();
  dmap->add_option("--tol", o.tol, "relative stopping tolerance");
  dmap->add_option("--max-iter", o.max_iter, "iteration cap");
  dmap->add_option("--report", o.report, "JSON report path");
  dmap->add_option("--reference", o.reference, "clean image for PSNR");
  dmap->add_option("--plateau-tol", o.plateau_tol, "tolerance of the plateau fraction");

  auto* dpm = app.add_subcommand("denoise-pm", "TV posterior-mean denoising by Gibbs sampling");
  dpm->add_option("files", o.files, "IN.pgm OUT.pgm")->required()->expected(2);
  dpm->add_option("--t", o.t)->required();
  dpm->add_option("--eps", o.eps)->required();
  dpm->add_option("--lambda", o.lambda)->required();
  dpm->add_option("--seed", o.sampler.seed);
  add_sampler_flags(dpm, o);
  dpm->add_option("--report", o.report, "JSON report path");
  dpm->add_option("--reference", o.reference, "clean image for PSNR");
  dpm->add_option("--plateau-tol", o.plateau_tol);

  auto* pm = app.add_subcommand("pm-estimate", "posterior mean, MSE and S_eps for a prior at one point");
  pm->add_option("--prior", o.prior, "prior descriptor: inline JSON or a file")->required();
  pm->add_option("--x", o.x, "data point, comma separated")->required()->delimiter(',');
  pm->add_option("--t", o.t)->required();
  pm->add_option("--eps", o.eps, "0 gives the MAP estimate")->required();
  pm->add_option("--method", o.method)->check(CLI::IsMember({"auto", "closed", "quadrature"}));

  auto* map = app.add_subcommand("map-estimate", "proximal point and Moreau envelope at one point");
  map->add_option("--prior", o.prior)->required();
  map->add_option("--x", o.x)->required()->delimiter(',');
  map->add_option("--t", o.t)->required();

  auto* nz = app.add_subcommand("noise", "add Gaussian noise to an image or a generated test pattern");
  nz->add_option("files", o.files, "[IN.pgm] OUT.pgm")->required()->expected(1, 2);
  nz->add_option("--sigma", o.sigma, "noise standard deviation");
  nz->add_option("--seed", o.seed);
  nz->add_option("--pattern", o.pattern, "generate a WxH test pattern instead of reading IN");

  auto* met = app.add_subcommand("metrics", "PSNR and plateau statistics of two images");
  met->add_option("files", o.files, "A.pgm B.pgm")->required()->expected(2);
  met->add_option("--plateau-tol", o.plateau_tol);

  auto* ver = app.add_subcommand("verify", "run a verification suite and write a JSON report");
  ver->add_option("--suite", o.suite)->check(CLI::IsMember({"core", "bounds", "pde", "imaging"}));
  ver->add_option("--seed", o.seed);
  ver->add_option("--out", o.out, "report path (default: standard output)");
  ver->add_option("--size", o.size, "imaging suite: side of the test image");
  add_sampler_flags(ver, o);

  auto* ex = app.add_subcommand("example", "closed-form Tikhonov and soft-thresholding table");
  ex->add_option("--t", o.t);
  ex->add_option("--eps", o.eps);
  ex->add_option("--lambda", o.lambda);
  ex->add_option("--m", o.m, "Tikhonov modulus");
  ex->add_option("--x", o.x, "data values, comma separated")->delimiter(',');
  ex->add_flag("--json", o.as_json, "emit JSON instead of a table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (dmap->parsed()) return denoise_map(o, out);
    if (dpm->parsed()) return denoise_pm(o, out);
    if (pm->parsed()) return pm_estimate(o, out);
    if (map->parsed()) return map_estimate(o, out);
    if (nz->parsed()) return noise(o, out);
    if (met->parsed()) return metrics(o, out);
    if (ver->parsed()) return verify(o, out, err);
    if (ex->parsed()) return example(o, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return kValidationError;
}

}  // namespace hjbd::cli

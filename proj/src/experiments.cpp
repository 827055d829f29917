#include "rmt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <fmt/format.h>

#include "rmt/dbm.hpp"
#include "rmt/errors.hpp"
#include "rmt/parallel.hpp"
#include "rmt/resolvent.hpp"
#include "rmt/semicircle.hpp"
#include "rmt/stats.hpp"

namespace rmt {

namespace {

// Stream families. Each (family + N index) selects an independent set of
// per-sample streams.
constexpr std::uint32_t kSlotPrimary = 0;
constexpr std::uint32_t kSlotSecond = 1000;
constexpr std::uint32_t kSlotMoments = 2000;
constexpr std::uint32_t kSlotIdentities = 3000;
constexpr std::uint32_t kSlotDbmStart = 4000;

ExperimentReport start_report(const std::string& name, const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport r;
  r.experiment = name;
  r.config = cfg.to_json();
  r.config_hash = content_hash(r.config.dump());
  r.summary["seed"] = cfg.seed;
  return r;
}

HermitianMatrix scaled(HermitianMatrix h, double scale) {
  if (scale == 1.0) return h;
  if (h.is_real()) return HermitianMatrix(RealMatrix(scale * h.real()));
  return HermitianMatrix(ComplexMatrix(scale * h.complex()));
}

struct Ensemble {
  std::shared_ptr<const VarianceProfile> profile;
  EntryDistribution law;
  double scale = 1.0;
  SymmetryClass symmetry = SymmetryClass::symmetric;

  WignerSample draw(std::uint64_t seed, std::uint32_t slot, std::uint32_t sample) const {
    const std::uint64_t index = stream_index(slot, sample);
    RngStream stream = derive_stream(seed, index);
    WignerSample s = sample_matrix(profile, law, symmetry, stream, Provenance{seed, index, {}, 0});
    if (scale == 1.0) return s;
    return WignerSample(scaled(s.h(), scale), s.profile_ptr(), s.provenance());
  }
};

Ensemble make_ensemble(const ExperimentConfig& cfg, const EnsembleSpec& spec, int n) {
  return Ensemble{std::make_shared<const VarianceProfile>(build_profile(cfg.profile, n)),
                  EntryDistribution::parse(spec.distribution), spec.scale, cfg.symmetry};
}

double log_pow(int n, double p) { return std::pow(std::log(static_cast<double>(n)), p); }

Check range_check(std::string name, double value, double lo, double hi) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = hi;
  c.passed = value >= lo && value <= hi;
  c.detail = fmt::format("{:.4f} in [{:.4f}, {:.4f}]", value, lo, hi);
  return c;
}

Check upper_check(std::string name, double value, double limit, const std::string& what = "value") {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = limit;
  c.passed = value <= limit;
  c.detail = fmt::format("{} {:.4g} <= {:.4g}", what, value, limit);
  return c;
}

Check lower_check(std::string name, double value, double limit, const std::string& what = "value") {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = limit;
  c.passed = value >= limit;
  c.detail = fmt::format("{} {:.4g} >= {:.4g}", what, value, limit);
  return c;
}

std::vector<Eigen::VectorXd> sample_spectra(const Ensemble& ens, const ExperimentConfig& cfg, std::uint32_t slot) {
  std::vector<Eigen::VectorXd> spectra(static_cast<std::size_t>(cfg.samples));
  parallel_for(spectra.size(), cfg.threads, [&](std::size_t s) {
    spectra[s] = ens.draw(cfg.seed, slot, static_cast<std::uint32_t>(s)).eigenvalues();
  });
  return spectra;
}

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

std::vector<double> eta_sweep(int n, double min_exponent, double max_exponent, int count) {
  std::vector<double> out;
  if (count == 1) {
    out.push_back(std::pow(static_cast<double>(n), min_exponent));
    return out;
  }
  for (int k = 0; k < count; ++k) {
    const double x = min_exponent + (max_exponent - min_exponent) * k / (count - 1);
    out.push_back(std::pow(static_cast<double>(n), x));
  }
  return out;
}

RigidityStats rigidity_statistics(std::span<const double> eigs, std::span<const double> gamma) {
  if (eigs.size() != gamma.size() || eigs.empty()) throw DimensionError("rigidity_statistics: size mismatch");
  const std::size_t n = eigs.size();
  const double nn = static_cast<double>(n);
  RigidityStats r;
  for (std::size_t k = 0; k < n; ++k) {
    const double j = static_cast<double>(k + 1);
    const double dev = std::abs(eigs[k] - gamma[k]);
    r.scaled_max = std::max(r.scaled_max, std::pow(nn, 2.0 / 3.0) * std::cbrt(std::min(j, nn + 1.0 - j)) * dev);
    if (4 * (k + 1) >= n && 4 * (k + 1) <= 3 * n) r.bulk_max = std::max(r.bulk_max, nn * dev);
  }
  r.edge = std::abs(eigs[n - 1] - 2.0);
  const std::size_t mid = std::max<std::size_t>(n / 2, 1) - 1;
  r.mid = std::abs(eigs[mid] - gamma[mid]);
  return r;
}

double counting_deviation(std::span<const double> eigs) {
  const double n = static_cast<double>(eigs.size());
  std::size_t below = 0;
  while (below < eigs.size() && eigs[below] <= -5.0) ++below;
  // Window boundaries: E = -5 (n_sc = 0) and E = 5 (n_sc = 1).
  double sup = static_cast<double>(below) / n;
  std::size_t upto5 = 0;
  while (upto5 < eigs.size() && eigs[upto5] <= 5.0) ++upto5;
  sup = std::max(sup, std::abs(static_cast<double>(upto5) / n - 1.0));
  for (std::size_t k = 0; k < eigs.size(); ++k) {
    if (eigs[k] <= -5.0 || eigs[k] > 5.0) continue;
    const double f = n_sc(eigs[k]);
    sup = std::max(sup, std::abs(static_cast<double>(k + 1) / n - f));
    sup = std::max(sup, std::abs(static_cast<double>(k) / n - f));
  }
  return n * sup;
}

ExperimentReport run_lsc(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("lsc", cfg);
  const auto& cal = cfg.calibration;
  Table samples{"samples", {"n", "sample_index", "E", "eta", "m_N_re", "m_N_im", "lambda", "lambda_d", "lambda_o", "psi", "ward_residual"}, {}};
  Table summary{"summary",
                {"n", "E", "eta", "samples", "median_lambda", "median_scaled_lambda", "p95_scaled_lambda",
                 "median_offdiag_ratio", "p95_offdiag_ratio", "median_lambda_d", "median_psi"},
                {}};
  Table slopes{"slopes", {"n", "E", "slope", "intercept", "std_error", "ci95_low", "ci95_high", "points"}, {}};
  nlohmann::json per_n = nlohmann::json::array();

  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const Ensemble ens = make_ensemble(cfg, cfg.ensemble, n);
    const std::vector<double> etas =
        cfg.etas.empty() ? eta_sweep(n, cfg.eta_min_exponent, cfg.eta_max_exponent, cfg.eta_count) : cfg.etas;
    const double l_param = cfg.l_param ? *cfg.l_param : max_l_param(n, etas);
    const SpectralGrid grid = make_grid(n, l_param, cfg.energies, etas);
    const int ell = cfg.log_power ? *cfg.log_power : default_log_power(n);

    std::vector<std::vector<GreenSnapshot>> snaps(static_cast<std::size_t>(cfg.samples));
    parallel_for(snaps.size(), cfg.threads, [&](std::size_t s) {
      const WignerSample sample = ens.draw(cfg.seed, kSlotPrimary + static_cast<std::uint32_t>(ni), static_cast<std::uint32_t>(s));
      const SpectralFactor factor = eigen_factor(sample);
      auto& out = snaps[s];
      out.reserve(grid.points.size());
      for (const auto& z : grid.points) out.push_back(control_params(green_at(factor, z).g, z, ell));
    });

    for (std::size_t s = 0; s < snaps.size(); ++s) {
      for (const auto& g : snaps[s]) {
        samples.add({std::int64_t{n}, static_cast<std::int64_t>(s), g.z.energy(), g.z.eta(), g.m_n.real(), g.m_n.imag(),
                     g.lambda, g.lambda_d, g.lambda_o, g.psi, g.ward_residual_max});
      }
    }

    double worst_scaled = 0.0;
    double worst_offdiag = 0.0;
    double worst_global = -1.0;
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      const SpectralPoint& z = grid.points[p];
      const double neta = n * z.eta();
      const double offdiag_scale = std::sqrt(m_sc(z).imag() / neta) + 1.0 / neta;
      std::vector<double> lam, scaled_lam, ratio, lam_d, psi;
      for (const auto& per_sample : snaps) {
        const GreenSnapshot& g = per_sample[p];
        lam.push_back(g.lambda);
        scaled_lam.push_back(neta * g.lambda);
        ratio.push_back(g.lambda_o / offdiag_scale);
        lam_d.push_back(g.lambda_d);
        psi.push_back(g.psi);
        if (z.eta() >= 10.0) worst_global = std::max(worst_global, g.lambda);
      }
      const double med_scaled = median(scaled_lam);
      const double med_ratio = median(ratio);
      worst_scaled = std::max(worst_scaled, med_scaled);
      worst_offdiag = std::max(worst_offdiag, med_ratio);
      summary.add({std::int64_t{n}, z.energy(), z.eta(), std::int64_t{cfg.samples}, median(lam), med_scaled,
                   quantile_nearest_rank(scaled_lam, 0.95), med_ratio, quantile_nearest_rank(ratio, 0.95),
                   median(lam_d), median(psi)});
    }

    nlohmann::json n_json = {{"n", n}, {"l_param", l_param}, {"log_power", ell}, {"etas", etas}};
    if (etas.size() >= 3) {
      for (std::size_t ei = 0; ei < cfg.energies.size(); ++ei) {
        std::vector<double> xs, ys;
        for (std::size_t k = 0; k < etas.size(); ++k) {
          const std::size_t p = ei * etas.size() + k;
          std::vector<double> lam;
          for (const auto& per_sample : snaps) lam.push_back(per_sample[p].lambda);
          xs.push_back(n * etas[k]);
          ys.push_back(median(lam));
        }
        const SlopeFit fit = slope_fit(xs, ys);
        const double e = cfg.energies[ei];
        slopes.add({std::int64_t{n}, e, fit.slope, fit.intercept, fit.std_error, fit.ci95_low, fit.ci95_high,
                    static_cast<std::int64_t>(fit.points)});
        r.checks.push_back(range_check(fmt::format("lsc.slope[N={},E={}]", n, e), fit.slope, cal.lsc_slope_min,
                                       cal.lsc_slope_max));
      }
    }
    const double env = log_pow(n, cal.lsc_scaled_lambda_log_power);
    r.checks.push_back(upper_check(fmt::format("lsc.scaled_lambda_envelope[N={}]", n), worst_scaled, env,
                                   "max over grid of median N*eta*Lambda"));
    const double off_env = log_pow(n, cal.lsc_offdiag_log_power);
    r.checks.push_back(upper_check(fmt::format("lsc.offdiag_envelope[N={}]", n), worst_offdiag, off_env,
                                   "max over grid of median Lambda_o/(sqrt(Im m_sc/(N eta)) + 1/(N eta))"));
    if (worst_global >= 0.0 && n >= 256) {
      r.checks.push_back(upper_check(fmt::format("lsc.global_scale[N={}]", n), worst_global, cal.lsc_global_lambda_max,
                                     "max Lambda at eta >= 10"));
    }
    per_n.push_back(n_json);
  }
  r.summary["grids"] = per_n;
  r.tables = {std::move(samples), std::move(summary), std::move(slopes)};
  return r;
}

ExperimentReport run_rigidity(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("rigidity", cfg);
  const auto& cal = cfg.calibration;
  Table samples{"samples", {"n", "sample_index", "scaled_max", "bulk_max", "edge", "mid"}, {}};
  Table summary{"summary",
                {"n", "samples", "median_scaled_max", "p95_scaled_max", "median_bulk_max", "p95_bulk_max",
                 "median_edge", "median_mid", "scaled_over_log2"},
                {}};
  std::vector<double> ns, med_edge, med_mid;

  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const Ensemble ens = make_ensemble(cfg, cfg.ensemble, n);
    const std::vector<double> gamma = classical_locations(n);
    std::vector<RigidityStats> stats(static_cast<std::size_t>(cfg.samples));
    parallel_for(stats.size(), cfg.threads, [&](std::size_t s) {
      const WignerSample sample = ens.draw(cfg.seed, kSlotPrimary + static_cast<std::uint32_t>(ni), static_cast<std::uint32_t>(s));
      stats[s] = rigidity_statistics(as_span(sample.eigenvalues()), gamma);
    });
    std::vector<double> sc, bulk, edge, mid;
    for (std::size_t s = 0; s < stats.size(); ++s) {
      const auto& st = stats[s];
      samples.add({std::int64_t{n}, static_cast<std::int64_t>(s), st.scaled_max, st.bulk_max, st.edge, st.mid});
      sc.push_back(st.scaled_max);
      bulk.push_back(st.bulk_max);
      edge.push_back(st.edge);
      mid.push_back(st.mid);
    }
    const double med_sc = median(sc);
    const double env = log_pow(n, cal.rigidity_log_power);
    summary.add({std::int64_t{n}, std::int64_t{cfg.samples}, med_sc, quantile_nearest_rank(sc, 0.95), median(bulk),
                 quantile_nearest_rank(bulk, 0.95), median(edge), median(mid), med_sc / env});
    r.checks.push_back(upper_check(fmt::format("rigidity.scaled_envelope[N={}]", n), med_sc, env, "median R"));
    ns.push_back(n);
    med_edge.push_back(median(edge));
    med_mid.push_back(median(mid));
  }

  Table slopes{"slopes", {"statistic", "slope", "intercept", "std_error", "ci95_low", "ci95_high", "points"}, {}};
  if (ns.size() >= 3) {
    const SlopeFit fe = slope_fit(ns, med_edge);
    const SlopeFit fm = slope_fit(ns, med_mid);
    slopes.add({std::string("edge"), fe.slope, fe.intercept, fe.std_error, fe.ci95_low, fe.ci95_high, static_cast<std::int64_t>(fe.points)});
    slopes.add({std::string("mid"), fm.slope, fm.intercept, fm.std_error, fm.ci95_low, fm.ci95_high, static_cast<std::int64_t>(fm.points)});
    r.checks.push_back(range_check("rigidity.edge_slope", fe.slope, cal.rigidity_edge_slope - cal.rigidity_edge_slope_tol,
                                   cal.rigidity_edge_slope + cal.rigidity_edge_slope_tol));
    r.checks.push_back(range_check("rigidity.bulk_slope", fm.slope, cal.rigidity_bulk_slope - cal.rigidity_bulk_slope_tol,
                                   cal.rigidity_bulk_slope + cal.rigidity_bulk_slope_tol));
    r.summary["edge_slope"] = fe.slope;
    r.summary["bulk_slope"] = fm.slope;
  } else {
    r.summary["slopes"] = "skipped: fewer than 3 values of N";
  }
  r.tables = {std::move(samples), std::move(summary), std::move(slopes)};
  return r;
}

ExperimentReport run_counting(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("counting", cfg);
  Table samples{"samples", {"n", "sample_index", "S"}, {}};
  Table summary{"summary", {"n", "samples", "median_S", "p95_S", "max_S", "median_over_log2"}, {}};
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const Ensemble ens = make_ensemble(cfg, cfg.ensemble, n);
    const auto spectra = sample_spectra(ens, cfg, kSlotPrimary + static_cast<std::uint32_t>(ni));
    std::vector<double> s_values;
    for (std::size_t s = 0; s < spectra.size(); ++s) {
      const double sv = counting_deviation(as_span(spectra[s]));
      samples.add({std::int64_t{n}, static_cast<std::int64_t>(s), sv});
      s_values.push_back(sv);
    }
    const double env = log_pow(n, cfg.calibration.counting_log_power);
    const double med = median(s_values);
    summary.add({std::int64_t{n}, std::int64_t{cfg.samples}, med, quantile_nearest_rank(s_values, 0.95),
                 *std::max_element(s_values.begin(), s_values.end()), med / env});
    r.checks.push_back(upper_check(fmt::format("counting.envelope[N={}]", n), med, env, "median S"));
  }
  r.tables = {std::move(samples), std::move(summary)};
  return r;
}

ExperimentReport run_edge(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("edge", cfg);
  const auto& cal = cfg.calibration;
  std::vector<std::string> header{"n", "ensemble", "sample_index", "x_top", "x_bottom"};
  for (int k = 2; k <= cfg.top_k; ++k) header.push_back(fmt::format("x_top{}", k));
  Table samples{"samples", header, {}};
  Table ks_table{"ks", {"n", "statistic", "ks", "critical_05", "critical_01", "critical_alpha", "m", "n_b"}, {}};
  Table ecdf{"ecdf", {"n", "ensemble", "x", "F"}, {}};
  Table moments{"moments", {"ensemble", "a", "b", "re", "im", "std_error"}, {}};

  const EntryDistribution law_a = EntryDistribution::parse(cfg.ensemble.distribution);
  const EntryDistribution law_b = EntryDistribution::parse(cfg.second.distribution);
  RngStream ma_stream = derive_stream(cfg.seed, stream_index(kSlotMoments, 0));
  RngStream mb_stream = derive_stream(cfg.seed, stream_index(kSlotMoments, 1));
  const auto ma = moment_report(law_a, 4, cfg.moment_draws, ma_stream, cfg.symmetry, cfg.ensemble.scale);
  const auto mb = moment_report(law_b, 4, cfg.moment_draws, mb_stream, cfg.symmetry, cfg.second.scale);
  for (const auto& [label, rep] : {std::pair{"a", &ma}, std::pair{"b", &mb}}) {
    for (const auto& m : *rep) moments.add({std::string(label), std::int64_t{m.a}, std::int64_t{m.b}, m.value.real(), m.value.imag(), m.std_error});
  }
  const bool matched2 = moments_match(ma, mb, 2);
  const bool matched4 = moments_match(ma, mb, 4);
  r.summary["moments_match_order2"] = matched2;
  r.summary["moments_match_order4"] = matched4;
  if (!matched2 && !cfg.allow_unmatched) {
    throw ConfigError(fmt::format("edge: second moments of '{}' (scale {}) and '{}' (scale {}) do not match; set "
                                  "edge.allow_unmatched = true to run a negative control",
                                  cfg.ensemble.distribution, cfg.ensemble.scale, cfg.second.distribution, cfg.second.scale));
  }

  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    if (cfg.top_k > n) throw ConfigError("edge.top_k exceeds N");
    const double scale = std::pow(static_cast<double>(n), 2.0 / 3.0);
    const Ensemble ea = make_ensemble(cfg, cfg.ensemble, n);
    const Ensemble eb = make_ensemble(cfg, cfg.second, n);
    const auto spec_a = sample_spectra(ea, cfg, kSlotPrimary + static_cast<std::uint32_t>(ni));
    const auto spec_b = sample_spectra(eb, cfg, kSlotSecond + static_cast<std::uint32_t>(ni));

    std::vector<std::vector<double>> top_a(static_cast<std::size_t>(cfg.top_k)), top_b(static_cast<std::size_t>(cfg.top_k));
    std::vector<double> bottom_a, bottom_b;
    for (const auto& [label, spectra, tops, bottom] :
         {std::tuple{"a", &spec_a, &top_a, &bottom_a}, std::tuple{"b", &spec_b, &top_b, &bottom_b}}) {
      for (std::size_t s = 0; s < spectra->size(); ++s) {
        const auto& ev = (*spectra)[s];
        std::vector<Cell> row{std::int64_t{n}, std::string(label), static_cast<std::int64_t>(s)};
        const double x_top = scale * (ev[ev.size() - 1] - 2.0);
        const double x_bottom = scale * (-ev[0] - 2.0);
        row.push_back(x_top);
        row.push_back(x_bottom);
        (*tops)[0].push_back(x_top);
        bottom->push_back(x_bottom);
        for (int k = 2; k <= cfg.top_k; ++k) {
          const double xk = scale * (ev[ev.size() - k] - 2.0);
          row.push_back(xk);
          (*tops)[static_cast<std::size_t>(k - 1)].push_back(xk);
        }
        samples.add(std::move(row));
      }
    }

    const double alpha = matched2 ? cal.edge_alpha : cal.edge_control_alpha;
    auto add_ks = [&](const std::string& statistic, const std::vector<double>& a, const std::vector<double>& b) {
      const KsResult ks = ks_two_sample(a, b);
      const double crit = ks_coefficient(alpha) * std::sqrt(static_cast<double>(ks.m + ks.n) / (ks.m * ks.n));
      ks_table.add({std::int64_t{n}, statistic, ks.statistic, ks.critical_05, ks.critical_01, crit,
                    static_cast<std::int64_t>(ks.m), static_cast<std::int64_t>(ks.n)});
      return std::pair{ks, crit};
    };
    const auto [ks_top, crit_top] = add_ks("top", top_a[0], top_b[0]);
    add_ks("bottom", bottom_a, bottom_b);
    for (int k = 2; k <= cfg.top_k; ++k) add_ks(fmt::format("top{}", k), top_a[static_cast<std::size_t>(k - 1)], top_b[static_cast<std::size_t>(k - 1)]);

    if (matched2) {
      Check c = upper_check(fmt::format("edge.universality[N={}]", n), ks_top.statistic, crit_top,
                            fmt::format("KS of N^(2/3)(lambda_N - 2), critical value at alpha={}", alpha));
      c.passed = ks_top.statistic < crit_top;
      r.checks.push_back(c);
    } else {
      Check c = lower_check(fmt::format("edge.negative_control[N={}]", n), ks_top.statistic, crit_top,
                            fmt::format("unmatched second moments: KS vs critical value at alpha={}", alpha));
      c.passed = ks_top.statistic > crit_top;
      r.checks.push_back(c);
    }

    for (const auto& [label, xs] : {std::pair{"a", &top_a[0]}, std::pair{"b", &top_b[0]}}) {
      std::vector<double> sorted = *xs;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        ecdf.add({std::int64_t{n}, std::string(label), sorted[k], static_cast<double>(k + 1) / sorted.size()});
      }
    }
  }
  r.tables = {std::move(samples), std::move(ks_table), std::move(ecdf), std::move(moments)};
  return r;
}

ExperimentReport run_extreme_bound(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("extreme", cfg);
  const auto& cal = cfg.calibration;
  std::vector<double> cs = cfg.extreme_c;
  if (std::find(cs.begin(), cs.end(), cal.extreme_c) == cs.end()) cs.push_back(cal.extreme_c);
  std::sort(cs.begin(), cs.end());
  Table summary{"summary", {"n", "c", "threshold", "exceedances", "samples", "fraction"}, {}};
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const Ensemble ens = make_ensemble(cfg, cfg.ensemble, n);
    const auto spectra = sample_spectra(ens, cfg, kSlotPrimary + static_cast<std::uint32_t>(ni));
    std::vector<double> extremes;
    for (const auto& ev : spectra) extremes.push_back(std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1])));
    const double width = std::pow(static_cast<double>(n), -2.0 / 3.0) * std::pow(std::log(static_cast<double>(n)), 1.5);
    bool monotone = true;
    double previous = 1.0;
    for (double c : cs) {
      const double threshold = 2.0 + c * width;
      const auto count = std::count_if(extremes.begin(), extremes.end(), [threshold](double x) { return x >= threshold; });
      const double fraction = static_cast<double>(count) / extremes.size();
      summary.add({std::int64_t{n}, c, threshold, static_cast<std::int64_t>(count), std::int64_t{cfg.samples}, fraction});
      monotone = monotone && fraction <= previous;
      previous = fraction;
      if (c == cal.extreme_c) {
        Check chk = upper_check(fmt::format("extreme.no_exceedance[N={},c={}]", n, c), fraction, 0.0, "exceedance fraction");
        chk.detail += count == 0 ? fmt::format(" (no exceedances observed in {} samples)", extremes.size())
                                 : fmt::format(" ({} exceedances in {} samples)", count, extremes.size());
        r.checks.push_back(chk);
      }
    }
    Check mono;
    mono.name = fmt::format("extreme.monotone[N={}]", n);
    mono.passed = monotone;
    mono.value = monotone ? 1.0 : 0.0;
    mono.threshold = 1.0;
    mono.detail = "exceedance fraction non-increasing in c";
    r.checks.push_back(mono);
  }
  r.tables = {std::move(summary)};
  return r;
}

ExperimentReport run_dbm_relax(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("dbm-relax", cfg);
  const auto& cal = cfg.calibration;
  const int n = cfg.n_list.front();
  const GapWindow window{cfg.dbm_window_center, cfg.dbm_window_half_width};
  std::vector<double> times;
  for (const auto& t : cfg.dbm_times) times.push_back(t.at(n));
  if (times.empty()) throw ConfigError("dbm.times is empty");

  InitialFactory factory;
  RelaxationOptions opt;
  opt.samples = cfg.samples;
  opt.window = window;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  if (cfg.dbm_start == "rigid") {
    const HermitianMatrix start = rigid_start(n, cfg.symmetry);
    factory = [start](std::uint64_t) { return start; };
  } else {
    const Ensemble ens = make_ensemble(cfg, cfg.ensemble, n);
    factory = [ens, seed = cfg.seed](std::uint64_t s) {
      return ens.draw(seed, kSlotDbmStart, static_cast<std::uint32_t>(s)).h();
    };
    opt.initial_second_moment = [ens] { return RealMatrix(ens.scale * ens.scale * ens.profile->sigma2()); };
  }
  const int ref_samples = cfg.dbm_reference_samples > 0 ? cfg.dbm_reference_samples : cfg.samples;
  const std::vector<double> reference = equilibrium_gaps(n, cfg.symmetry, ref_samples, window, cfg.seed, cfg.threads);
  const auto curve = relaxation_curve(factory, times, reference, opt);

  Table gaps{"gaps", {"t", "sample_index", "gap"}, {}};
  Table summary{"summary",
                {"t_label", "t", "ks", "n_gaps", "n_reference", "critical_05", "critical_01", "offdiag_residual_mean",
                 "offdiag_z", "diag_residual_mean", "diag_z"},
                {}};
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const auto& p = curve[k];
    for (std::size_t s = 0; s < p.gaps_per_sample.size(); ++s) {
      for (double g : p.gaps_per_sample[s]) gaps.add({p.t, static_cast<std::int64_t>(s), g});
    }
    summary.add({cfg.dbm_times[k].text(), p.t, p.ks.statistic, static_cast<std::int64_t>(p.n_gaps),
                 static_cast<std::int64_t>(reference.size()), p.ks.critical_05, p.ks.critical_01,
                 p.variance.offdiag_residual.mean, p.variance.z_offdiag, p.variance.diag_residual.mean, p.variance.z_diag});
    Check vc;
    vc.name = fmt::format("dbm.variance[t={}]", cfg.dbm_times[k].text());
    vc.value = std::max(std::abs(p.variance.z_offdiag), std::abs(p.variance.z_diag));
    vc.threshold = cal.variance_z;
    vc.passed = p.variance.within(cal.variance_z);
    vc.detail = fmt::format("E|H_t,ij|^2 vs e^-t s2 + (1-e^-t)/N: |z| off-diagonal {:.3f}, diagonal {:.3f} <= {}",
                            p.variance.z_offdiag, p.variance.z_diag, cal.variance_z);
    r.checks.push_back(vc);
  }

  // Reference point: the largest time in the list.
  const auto final_it = std::max_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  const double ks_final = final_it->ks.statistic;
  r.summary["ks_final"] = ks_final;
  r.summary["t_final"] = final_it->t;
  r.summary["statistic"] = "two-sample KS of unfolded nearest-neighbour gaps (proxy for local correlation functions)";
  for (const auto& p : curve) {
    if (p.t == 0.0) {
      r.checks.push_back(lower_check(fmt::format("dbm.start_far[N={}]", n), p.ks.statistic, cal.dbm_start_ratio * ks_final,
                                     fmt::format("KS(0) vs {} x KS(t={:.4g})", cal.dbm_start_ratio, final_it->t)));
    }
  }
  const double relaxed = cfg.dbm_relaxed_time.at(n);
  for (const auto& p : curve) {
    if (std::abs(p.t - relaxed) <= 1e-12 * std::max(1.0, relaxed)) {
      r.checks.push_back(upper_check(fmt::format("dbm.relaxed[N={},t={}]", n, cfg.dbm_relaxed_time.text()), p.ks.statistic,
                                     cal.dbm_relaxed_ratio * ks_final,
                                     fmt::format("KS(t) vs {} x KS(t={:.4g})", cal.dbm_relaxed_ratio, final_it->t)));
    }
  }
  r.tables = {std::move(gaps), std::move(summary)};
  return r;
}

ExperimentReport run_identities(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("identities", cfg);
  const auto& cal = cfg.calibration;
  const EntryDistribution law = EntryDistribution::parse(cfg.ensemble.distribution);
  Table trials{"trials",
               {"trial", "n", "symmetry", "profile", "E", "eta", "minor_size", "i", "j", "k", "diagonal_inverse",
                "off_diagonal", "diagonal_update", "entry_update", "ward", "ward_minor", "self_consistent"},
               {}};
  struct Row {
    int n = 0;
    SymmetryClass sym{};
    std::string profile;
    double e = 0.0, eta = 0.0;
    std::size_t minor = 0;
    int i = 0, j = 0, k = 0;
    IdentityResiduals res;
    double ward = 0.0, ward_minor = 0.0, self_consistent = 0.0;
  };
  std::vector<Row> rows(static_cast<std::size_t>(cfg.samples));
  parallel_for(rows.size(), cfg.threads, [&](std::size_t trial) {
    RngStream stream = derive_stream(cfg.seed, stream_index(kSlotIdentities, static_cast<std::uint32_t>(trial)));
    auto& eng = stream.engine;
    Row& row = rows[trial];
    row.n = std::uniform_int_distribution<int>(cfg.identity_n_min, cfg.identity_n_max)(eng);
    row.sym = cfg.mixed_symmetry ? (trial % 2 ? SymmetryClass::hermitian : SymmetryClass::symmetric) : cfg.symmetry;
    std::shared_ptr<const VarianceProfile> profile;
    if (trial % 3 == 2) {
      profile = std::make_shared<const VarianceProfile>(band_profile(row.n, std::max(1, row.n / 4), triangle_shape(), "triangle"));
    } else {
      profile = std::make_shared<const VarianceProfile>(build_profile(cfg.profile, row.n));
    }
    row.profile = profile->description();
    row.e = std::uniform_real_distribution<double>(-3.0, 3.0)(eng);
    row.eta = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 1.0)(eng));
    const SpectralPoint z(row.e, row.eta);
    const WignerSample sample = sample_matrix(profile, law, row.sym, stream);

    std::vector<int> order(static_cast<std::size_t>(row.n));
    for (int q = 0; q < row.n; ++q) order[static_cast<std::size_t>(q)] = q;
    std::shuffle(order.begin(), order.end(), eng);
    const int minor_size = std::uniform_int_distribution<int>(0, std::min(3, row.n - 3))(eng);
    const MinorSpec t(std::vector<int>(order.begin(), order.begin() + minor_size));
    row.minor = t.size();
    row.i = order[static_cast<std::size_t>(minor_size)];
    row.j = order[static_cast<std::size_t>(minor_size + 1)];
    row.k = order[static_cast<std::size_t>(minor_size + 2)];
    row.res = identity_residuals(sample.h(), z, t, row.i, row.j, row.k);

    const Green g = green_at(sample, z);
    row.ward = ward_residual_relative(g.g, z);
    row.ward_minor = ward_residual_relative(minor_green(sample.h(), t, z).g, z);
    const cplx msc = m_sc(z);
    row.self_consistent = std::abs(self_consistent_residual(sample, g.g, row.i, z)) / std::max(1.0, std::abs(g.g(row.i, row.i) - msc));
  });

  double worst[7] = {0, 0, 0, 0, 0, 0, 0};
  for (std::size_t trial = 0; trial < rows.size(); ++trial) {
    const Row& w = rows[trial];
    trials.add({static_cast<std::int64_t>(trial), std::int64_t{w.n}, to_string(w.sym), w.profile, w.e, w.eta,
                static_cast<std::int64_t>(w.minor), std::int64_t{w.i}, std::int64_t{w.j}, std::int64_t{w.k},
                w.res.diagonal_inverse, w.res.off_diagonal, w.res.diagonal_update, w.res.entry_update, w.ward,
                w.ward_minor, w.self_consistent});
    const double vals[7] = {w.res.diagonal_inverse, w.res.off_diagonal, w.res.diagonal_update, w.res.entry_update,
                            w.ward, w.ward_minor, w.self_consistent};
    for (int q = 0; q < 7; ++q) worst[q] = std::max(worst[q], vals[q]);
  }
  const char* names[7] = {"diagonal_inverse", "off_diagonal", "diagonal_update", "entry_update", "ward", "ward_minor",
                          "self_consistent"};
  for (int q = 0; q < 7; ++q) {
    r.checks.push_back(upper_check(fmt::format("identities.{}", names[q]), worst[q], cal.identity_tolerance,
                                   fmt::format("max relative residual over {} trials", rows.size())));
    r.summary[std::string("max_") + names[q]] = worst[q];
  }
  r.tables = {std::move(trials)};
  return r;
}

ExperimentReport run_gamma_table(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("gamma-table", cfg);
  Table t{"gamma", {"n", "j", "gamma"}, {}};
  for (int n : cfg.n_list) {
    const auto gamma = classical_locations(n);
    for (std::size_t j = 0; j < gamma.size(); ++j) t.add({std::int64_t{n}, static_cast<std::int64_t>(j + 1), gamma[j]});
  }
  r.tables = {std::move(t)};
  return r;
}

ExperimentReport run_check_profile(const ExperimentConfig& cfg) {
  ExperimentReport r = start_report("check-profile", cfg);
  Table spectrum{"spectrum", {"n", "k", "eigenvalue"}, {}};
  Table summary{"summary",
                {"n", "profile", "row_sum_residual", "delta_minus", "delta_plus", "eigenvalue_one_simple", "c_inf", "c_sup"},
                {}};
  for (int n : cfg.n_list) {
    const VarianceProfile p = build_profile(cfg.profile, n);
    const AssumptionReport a = assumption_report(p);
    for (std::size_t k = 0; k < a.spectrum_of_b.size(); ++k) {
      spectrum.add({std::int64_t{n}, static_cast<std::int64_t>(k + 1), a.spectrum_of_b[k]});
    }
    summary.add({std::int64_t{n}, p.description(), a.row_sum_residual, a.delta_minus, a.delta_plus,
                 std::string(a.eigenvalue_one_simple ? "true" : "false"), a.c_inf, a.c_sup});
    r.checks.push_back(upper_check(fmt::format("profile.double_stochastic[N={}]", n), a.row_sum_residual, 1e-10,
                                   "max |column sum - 1|"));
    Check simple;
    simple.name = fmt::format("profile.simple_eigenvalue_one[N={}]", n);
    simple.passed = a.eigenvalue_one_simple;
    simple.value = a.delta_plus;
    simple.detail = fmt::format("delta_- = {:.6g}, delta_+ = {:.6g}", a.delta_minus, a.delta_plus);
    r.checks.push_back(simple);
    r.checks.push_back(upper_check(fmt::format("profile.bounded[N={}]", n), a.c_sup, p.c0(), "max N sigma^2 (C_sup)"));
  }
  r.tables = {std::move(spectrum), std::move(summary)};
  return r;
}

}  // namespace rmt

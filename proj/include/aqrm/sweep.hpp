#pragma once

// Phase-diagram orchestration: 1D coupling sweeps at fixed anisotropy ratio,
// 2D coupling x temperature maps, and spectrum sweeps, evaluated on the
// thermal equilibrium state of each grid point. Grid points are independent
// tasks; results land in a preallocated slot per point, so output is
// deterministic for any worker count. Per-point failures become flagged rows
// and never abort the sweep.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "aqrm/dissipator.hpp"
#include "aqrm/model.hpp"
#include "aqrm/quantifiers.hpp"
#include "aqrm/spectrum.hpp"
#include "aqrm/types.hpp"

namespace aqrm {

enum class SweepMode { spectrum, quantify_1d, quantify_2d };

// Which measures a sweep actually evaluates. Unselected ones are reported as
// missing; skipping the discord optimizer in particular makes large
// negativity-only maps cheap.
struct QuantifierSelection {
  bool g2_dressed = true;
  bool g2_bare = true;
  bool squeezing = true;
  bool macroscopicity = true;
  bool negativity = true;
  bool discord = true;
};

inline std::vector<double> linspace(double start, double stop, int points) {
  if (points < 1) throw std::invalid_argument("linspace: points must be >= 1");
  if (points == 1) return {start};
  std::vector<double> g(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<size_t>(i)] = start + (stop - start) * i / (points - 1);
  g.back() = stop;
  return g;
}

// Default grids: coupling in [0, 4] at 201 points, temperature in
// [0.02, 0.5] at 49 points, all in units of omega.
inline std::vector<double> default_coupling_grid() { return linspace(0.0, 4.0, 201); }
inline std::vector<double> default_temperature_grid() { return linspace(0.02, 0.5, 49); }

struct SweepSpec {
  SweepMode mode = SweepMode::quantify_1d;
  Coupling swept = Coupling::lambda1;
  std::vector<double> ratios{0.0};  // lambda_other / lambda_swept, one series each
  std::vector<double> coupling_grid = default_coupling_grid();
  std::vector<double> temperature_grid{0.1};
  // Explicit (lambda1, lambda2) pairs bypass the ratio parameterization; when
  // non-empty they replace ratios x coupling_grid as the coupling tasks.
  std::vector<std::pair<double, double>> pairs;
  ModelParams model{};  // base omega, delta; cutoff 0 means the rule decides
  BathParams bath = BathParams::symmetric(0.01, 50.0, 0.1);
  QuantifierSelection selection{};
  int levels = 6;     // spectrum mode: number of levels tabulated
  unsigned seed = 0;  // discord optimizer restart jitter

  void validate() const {
    if (pairs.empty()) {
      if (coupling_grid.empty()) throw std::invalid_argument("sweep: empty coupling grid");
      if (ratios.empty()) throw std::invalid_argument("sweep: empty ratio list");
      for (double r : ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("sweep: ratio outside [0, 1]");
      for (size_t i = 0; i < coupling_grid.size(); ++i) {
        if (!(coupling_grid[i] >= 0.0))
          throw std::invalid_argument("sweep: negative coupling value");
        if (i > 0 && coupling_grid[i] < coupling_grid[i - 1])
          throw std::invalid_argument("sweep: coupling grid must be non-decreasing");
      }
    } else {
      for (const auto& [l1, l2] : pairs)
        if (!(l1 >= 0.0) || !(l2 >= 0.0))
          throw std::invalid_argument("sweep: negative coupling value");
    }
    if (mode == SweepMode::spectrum) {
      if (levels < 1) throw std::invalid_argument("sweep: levels must be >= 1");
      if (ratios.size() != 1 && pairs.empty())
        throw std::invalid_argument("sweep: spectrum mode takes a single ratio");
    } else {
      if (temperature_grid.empty()) throw std::invalid_argument("sweep: empty temperature grid");
      for (size_t i = 0; i < temperature_grid.size(); ++i) {
        if (!(temperature_grid[i] > 0.0))
          throw std::invalid_argument("sweep: temperatures must be positive");
        if (i > 0 && temperature_grid[i] < temperature_grid[i - 1])
          throw std::invalid_argument("sweep: temperature grid must be non-decreasing");
      }
      if (mode == SweepMode::quantify_1d && temperature_grid.size() != 1)
        throw std::invalid_argument("sweep: quantify_1d takes a single temperature");
    }
    if (!(model.omega > 0.0)) throw std::invalid_argument("sweep: omega must be positive");
    if (model.delta < 0.0) throw std::invalid_argument("sweep: delta must be nonnegative");
    if (model.cutoff != 0 && model.cutoff < 2)
      throw std::invalid_argument("sweep: explicit cutoff must be >= 2");
    bath.validate();
  }
};

struct QuantifyRow {
  double ratio = 0;  // lambda_other / lambda_swept of the series this row belongs to
  double lambda1 = 0;
  double lambda2 = 0;
  double temperature = 0;
  int cutoff = 0;  // Fock cutoff actually used
  bool ok = false;
  std::string flags;  // semicolon-joined tokens; empty when clean
  QuantifierReport report{};
};

struct SpectrumRow {
  double lambda = 0;  // swept coupling value
  int cutoff = 0;
  std::vector<double> gaps;  // E_k - E_0 for k < levels
  std::vector<int> parities;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<QuantifyRow> rows;          // quantify modes
  std::vector<SpectrumRow> spectrum_rows;  // spectrum mode
  double wall_ms = 0;
  int workers = 1;

  size_t failed_count() const {
    size_t n = 0;
    for (const auto& r : rows)
      if (!r.ok) ++n;
    return n;
  }
};

namespace detail {

inline std::string sanitize_flag_text(std::string s) {
  for (char& c : s)
    if (c == ',' || c == ';' || c == '\n' || c == '\r') c = ' ';
  return s;
}

// Bounded pool running tasks [0, count) in index order of acquisition; each
// task writes only its own slot, so results do not depend on scheduling.
template <typename Fn>
void run_indexed(size_t count, int workers, Fn&& task) {
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::atomic<size_t> next{0};
  auto drain = [&] {
    for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n - 1));
  for (int t = 1; t < n; ++t) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Evaluates one equilibrium point: eigensolve, Gibbs state at T, selected
// quantifiers. Throws propagate to the caller (run_sweep turns them into
// flagged rows).
inline QuantifyRow evaluate_point(const ModelParams& params, double temperature,
                                  const QuantifierSelection& sel, unsigned seed,
                                  double ratio = 0) {
  QuantifyRow row;
  row.ratio = ratio;
  row.lambda1 = params.lambda1;
  row.lambda2 = params.lambda2;
  row.temperature = temperature;
  row.cutoff = params.resolved_cutoff();

  ModelParams p = params;
  p.cutoff = row.cutoff;
  const SpectralData s = eigensolve(p);
  const Operator rho = gibbs_state(s, temperature);

  QuantifierOptions opt;
  opt.with_g2_dressed = sel.g2_dressed;
  opt.with_discord = sel.discord;
  opt.discord_options.seed = seed;
  row.report = evaluate_quantifiers(rho, s, opt);

  std::vector<std::string> flags;
  if (sel.g2_bare && !row.report.g2_bare.has_value()) flags.emplace_back("g2_bare_undefined");
  if (sel.g2_dressed && !row.report.g2_dressed.has_value())
    flags.emplace_back("g2_dressed_undefined");
  for (size_t i = 0; i < flags.size(); ++i) {
    if (i > 0) row.flags += ';';
    row.flags += flags[i];
  }
  row.ok = true;
  return row;
}

// Runs the sweep. Rows are ordered by (ratio series, T, lambda); each row
// carries the cutoff actually used. Failures are flagged rows with the error
// text in the flags column.
inline SweepResult run_sweep(const SweepSpec& spec, int workers = 1) {
  spec.validate();
  if (workers < 1) throw std::invalid_argument("run_sweep: workers must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  SweepResult result;
  result.spec = spec;
  result.workers = workers;

  if (spec.mode == SweepMode::spectrum) {
    // One basis size for the whole table keeps rows comparable; the rule is
    // evaluated at the largest coupling of the sweep.
    double lam_max = 0;
    if (spec.pairs.empty()) {
      lam_max = spec.coupling_grid.back();
    } else {
      for (const auto& [l1, l2] : spec.pairs) lam_max = std::max({lam_max, l1, l2});
    }
    const int cutoff = spec.model.cutoff > 0
                           ? spec.model.cutoff
                           : cutoff_rule(lam_max, spec.model.omega);

    std::vector<ModelParams> points;
    if (spec.pairs.empty()) {
      points.reserve(spec.coupling_grid.size());
      for (double lam : spec.coupling_grid)
        points.push_back(
            with_swept_coupling(spec.model, spec.swept, spec.ratios.front(), lam));
    } else {
      for (const auto& [l1, l2] : spec.pairs) {
        ModelParams p = spec.model;
        p.lambda1 = l1;
        p.lambda2 = l2;
        points.push_back(p);
      }
    }

    result.spectrum_rows.resize(points.size());
    detail::run_indexed(points.size(), workers, [&](size_t i) {
      ModelParams p = points[i];
      p.cutoff = cutoff;
      const SpectralData s = eigensolve(p);
      SpectrumRow& row = result.spectrum_rows[i];
      row.lambda = spec.swept == Coupling::lambda1 ? p.lambda1 : p.lambda2;
      row.cutoff = cutoff;
      const int k = std::min(spec.levels, s.dim());
      row.gaps.resize(static_cast<size_t>(k));
      row.parities.resize(static_cast<size_t>(k));
      for (int j = 0; j < k; ++j) {
        row.gaps[static_cast<size_t>(j)] = s.energies[j] - s.energies[0];
        row.parities[static_cast<size_t>(j)] = s.parities[j];
      }
    });
  } else {
    struct Task {
      double ratio;
      double lambda1;
      double lambda2;
      double temperature;
    };
    std::vector<Task> tasks;
    if (spec.pairs.empty()) {
      tasks.reserve(spec.ratios.size() * spec.temperature_grid.size() *
                    spec.coupling_grid.size());
      for (double r : spec.ratios)
        for (double temp : spec.temperature_grid)
          for (double lam : spec.coupling_grid) {
            const ModelParams p = with_swept_coupling(spec.model, spec.swept, r, lam);
            tasks.push_back({r, p.lambda1, p.lambda2, temp});
          }
    } else {
      for (double temp : spec.temperature_grid)
        for (const auto& [l1, l2] : spec.pairs)
          tasks.push_back({l1 > 0 ? l2 / l1 : 0.0, l1, l2, temp});
    }

    result.rows.resize(tasks.size());
    detail::run_indexed(tasks.size(), workers, [&](size_t i) {
      const Task& t = tasks[i];
      ModelParams p = spec.model;
      p.lambda1 = t.lambda1;
      p.lambda2 = t.lambda2;
      try {
        result.rows[i] = evaluate_point(p, t.temperature, spec.selection, spec.seed, t.ratio);
      } catch (const std::exception& e) {
        QuantifyRow& row = result.rows[i];
        row.ratio = t.ratio;
        row.lambda1 = t.lambda1;
        row.lambda2 = t.lambda2;
        row.temperature = t.temperature;
        row.cutoff = p.resolved_cutoff();
        row.ok = false;
        row.flags = "error:" + detail::sanitize_flag_text(e.what());
      }
    });
  }

  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return result;
}

// Truncation control
enum class QuantifierKind {
  mean_occupation,
  g2_bare,
  g2_dressed,
  squeezing,
  macroscopicity,
  negativity,
  discord
};

struct CutoffResult {
  int start = 0;        // rule-based starting cutoff
  int cutoff = 0;       // accepted cutoff
  double value = 0;     // quantifier at the accepted cutoff
  double check = std::numeric_limits<double>::quiet_NaN();  // value at cutoff + 8
  bool converged = false;
};

namespace detail {

inline double quantifier_at_cutoff(ModelParams p, double temperature, QuantifierKind kind,
                                   int cutoff, unsigned seed) {
  p.cutoff = cutoff;
  const SpectralData s = eigensolve(p);
  const Operator rho = gibbs_state(s, temperature);
  switch (kind) {
    case QuantifierKind::mean_occupation:
      return boson_moments(rho, s.config).n_mean;
    case QuantifierKind::g2_bare: {
      const auto v = g2_bare(rho, s.config);
      if (!v) throw numerical_error("converge_cutoff: bare pair correlation undefined");
      return *v;
    }
    case QuantifierKind::g2_dressed: {
      const auto v = g2_dressed(rho, s);
      if (!v) throw numerical_error("converge_cutoff: dressed pair correlation undefined");
      return *v;
    }
    case QuantifierKind::squeezing:
      return squeezing(rho, s.config).zeta_sq;
    case QuantifierKind::macroscopicity:
      return macroscopicity(partial_trace(rho, s.config, Keep::boson));
    case QuantifierKind::negativity:
      return negativity(rho, s.config);
    case QuantifierKind::discord: {
      DiscordOptions opt;
      opt.seed = seed;
      return discord(rho, s.config, opt).value;
    }
  }
  throw std::invalid_argument("converge_cutoff: unknown quantifier");
}

}  // namespace detail

inline constexpr int kCutoffCeiling = 160;

// Escalates the Fock cutoff from the rule-based start in steps of 8 until the
// quantifier changes by less than rel_tol between consecutive cutoffs; the
// last two values are recorded. An infinite rel_tol accepts the start
// unconditionally. Hitting the ceiling reports converged = false.
inline CutoffResult converge_cutoff(const ModelParams& point, double temperature,
                                    QuantifierKind kind, double rel_tol = 1e-6,
                                    unsigned seed = 0) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("converge_cutoff: rel_tol must be positive");
  if (!(temperature > 0.0))
    throw std::invalid_argument("converge_cutoff: temperature must be positive");

  CutoffResult res;
  res.start = point.resolved_cutoff();
  res.cutoff = res.start;
  res.value = detail::quantifier_at_cutoff(point, temperature, kind, res.cutoff, seed);
  if (std::isinf(rel_tol)) {
    res.converged = true;
    return res;
  }

  double current = res.value;
  int cutoff = res.cutoff;
  while (cutoff < kCutoffCeiling) {
    // The last escalation step clamps to the ceiling instead of skipping it.
    const int next_cutoff = std::min(cutoff + 8, kCutoffCeiling);
    const double next =
        detail::quantifier_at_cutoff(point, temperature, kind, next_cutoff, seed);
    const double scale = std::max({1.0, std::abs(current), std::abs(next)});
    if (std::abs(next - current) < rel_tol * scale) {
      res.cutoff = cutoff;
      res.value = current;
      res.check = next;
      res.converged = true;
      return res;
    }
    cutoff = next_cutoff;
    current = next;
  }
  res.cutoff = cutoff;
  res.value = current;
  res.converged = false;
  return res;
}

}  // namespace aqrm

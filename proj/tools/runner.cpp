#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <ostream>
#include <set>

#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include "ergolab/averages.hpp"
#include "ergolab/correlations.hpp"
#include "ergolab/dyadic.hpp"
#include "ergolab/error.hpp"
#include "ergolab/matrix_growth.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab::cli {

namespace fs = std::filesystem;
using systems::ShiftSystem;
using systems::TorusAutomorphism;

void Outcome::add_csv(const std::string& name, const Csv& csv) {
  files.emplace_back(name, csv.str());
  columns[name] = csv.columns();
}

void Outcome::add_chart(const std::string& name, const Chart& chart) {
  if (svg) files.emplace_back(name, render_svg(chart));
}

namespace {

json fit_json(const correlations::RateFit& fit) {
  return {{"model", std::string(correlations::model_name(fit.model))},
          {"exponent", fit.exponent},
          {"amplitude", fit.amplitude},
          {"rss", fit.rss},
          {"points_used", fit.points_used},
          {"degenerate", fit.degenerate},
          {"tie", fit.tie}};
}

json counting_json(const sequences::CountingReport& r) {
  return {{"condition", std::string(sequences::condition_name(r.condition))},
          {"witness_M", r.witness_M},
          {"witness_M_doubled", r.witness_M_doubled},
          {"pass", r.pass},
          {"worst_n", r.worst_n},
          {"worst_m", r.worst_m},
          {"worst_count", r.worst_count}};
}

const std::vector<std::string> kCountingColumns{"condition", "witness_M", "witness_M_doubled", "pass",
                                                "worst_n",   "worst_m",   "worst_count"};

void counting_cells(Csv& csv, const sequences::CountingReport& r) {
  csv.cell(std::string(sequences::condition_name(r.condition)))
      .cell(r.witness_M)
      .cell(r.witness_M_doubled)
      .cell(r.pass)
      .cell(r.worst_n)
      .cell(r.worst_m)
      .cell(r.worst_count);
}

std::vector<std::string> with_prefix(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::vector<std::int64_t> iota_grid(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

matrix_growth::Matrix to_eigen(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  matrix_growth::Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

std::vector<std::int64_t> read_multipliers(ObjectReader& p, std::size_t l, bool distinct_default) {
  std::vector<std::int64_t> m;
  if (const json* v = p.optional("multipliers")) {
    m = parse_integers(*v, p.path_of("multipliers"));
    if (m.size() != l) invalid(p.path_of("multipliers"), "one multiplier per observable expected");
  } else {
    for (std::size_t i = 0; i < l; ++i) m.push_back(distinct_default ? static_cast<std::int64_t>(i + 1) : 1);
  }
  return m;
}

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) invalid(where, what);
}

std::string tuple_text(const std::vector<std::int64_t>& t) { return join(t); }

std::string subset_text(correlations::SubsetMask s) {
  std::vector<std::int64_t> idx;
  for (int i = 0; i < 32; ++i)
    if (s & (correlations::SubsetMask{1} << i)) idx.push_back(i);
  return join(idx);
}

// ---------------------------------------------------------------------------
// correlate, cumulants

std::vector<correlations::CorrelationQuery> read_queries(const Config& c, ObjectReader& p, bool distinct_default) {
  const auto tuples = parse_tuples(p.required("tuples"), p.path_of("tuples"));
  const auto multipliers = read_multipliers(p, c.observables.size(), distinct_default);
  std::vector<correlations::CorrelationQuery> out;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (tuples[i].size() != c.observables.size())
      invalid(p.path_of("tuples") + "[" + std::to_string(i) + "]", "needs one time per observable");
    correlations::CorrelationQuery q{*c.system, c.observables, tuples[i], multipliers};
    correlations::validate(q);
    out.push_back(std::move(q));
  }
  return out;
}

Plan plan_correlate(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  if (c.observables.size() < 2) invalid("config.observables", "a correlation needs at least two observables");
  auto queries = read_queries(c, p, false);
  const std::string method = p.string_or("method", "auto");
  require(method == "auto" || method == "exact" || method == "monte_carlo", p.path_of("method"),
          "expected auto, exact or monte_carlo");
  const auto samples = p.integer_or("samples", 100000);
  require(samples >= 2, p.path_of("samples"), "need at least two samples");
  p.finish();

  Plan plan;
  plan.derived = {{"tuples", queries.size()}, {"method", method}, {"samples", samples}};
  plan.execute = [queries = std::move(queries), method, samples, seed = c.seed](Outcome& o, unsigned workers) {
    Csv csv({"tuple", "gap", "correlation", "product_of_means", "defect", "std_error", "exact"});
    std::vector<double> gaps, defects;
    bool increasing = true;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto& q = queries[i];
      const correlations::McOptions mc{samples, derive_seed(seed, i), workers};
      correlations::Defect d;
      if (method == "auto") {
        d = correlations::mixing_defect(q, std::nullopt, mc);
      } else {
        d.product_of_means = 1.0;
        for (const auto& f : q.observables) d.product_of_means *= systems::exact_mean(f, q.system);
        if (method == "exact") {
          d.correlation = correlations::exact_correlation(q);
        } else {
          const auto est = correlations::mc_correlation(q, mc);
          d.correlation = est.estimate;
          d.std_error = est.std_error;
          d.exact = false;
        }
        d.value = std::abs(d.correlation - d.product_of_means);
      }
      o.steps += d.exact ? 1 : samples;
      const auto times = q.effective_times();
      const std::int64_t gap = correlations::min_gap(times);
      if (!gaps.empty() && gap <= gaps.back()) increasing = false;
      gaps.push_back(static_cast<double>(gap));
      defects.push_back(d.value);
      csv.cell(tuple_text(q.times)).cell(gap).cell(d.correlation).cell(d.product_of_means).cell(d.value);
      csv.cell(d.std_error).cell(d.exact);
      csv.end_row();
    }
    o.add_csv("correlate.csv", csv);
    o.results["fit"] = nullptr;
    if (gaps.size() >= 4 && increasing) {
      try {
        o.results["fit"] = fit_json(correlations::fit_rate(gaps, defects));
      } catch (const Error& e) {
        if (e.code() != Errc::InsufficientData) throw;
      }
    }
    o.results["max_defect"] = *std::max_element(defects.begin(), defects.end());
    o.add_chart("correlate.svg", {"mixing defect", "minimal gap", "defect", true, true, {{"defect", gaps, defects}}});
  };
  return plan;
}

Plan plan_cumulants(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  auto queries = read_queries(c, p, false);
  p.finish();
  if (c.observables.size() > static_cast<std::size_t>(correlations::kMaxCumulantIndex) + 1)
    invalid("config.observables", "at most 11 observables");

  Plan plan;
  plan.derived = {{"tuples", queries.size()}, {"subsets", (std::int64_t{1} << c.observables.size()) - 1}};
  plan.execute = [queries = std::move(queries)](Outcome& o, unsigned) {
    Csv table({"tuple", "subset", "moment", "cumulant"});
    Csv scan({"tuple", "spread", "moment", "cumulant"});
    std::vector<double> spreads, full;
    for (const auto& q : queries) {
      const auto t = correlations::joint_cumulants(q);
      const auto times = q.effective_times();
      std::int64_t spread = 0;
      for (auto v : times) spread = std::max(spread, std::abs(v - times.front()));
      for (correlations::SubsetMask s = 1; s <= t.full(); ++s) {
        table.cell(tuple_text(q.times)).cell(subset_text(s)).cell(t.moment_of(s)).cell(t.cumulant_of(s));
        table.end_row();
      }
      scan.cell(tuple_text(q.times)).cell(spread).cell(t.moment_of(t.full())).cell(t.cumulant_of(t.full()));
      scan.end_row();
      spreads.push_back(static_cast<double>(spread));
      full.push_back(t.cumulant_of(t.full()));
      ++o.steps;
    }
    o.add_csv("cumulants.csv", table);
    o.add_csv("scan.csv", scan);
    o.results["fit"] = nullptr;
    try {
      o.results["fit"] = fit_json(correlations::fit_rate(spreads, full, correlations::RateModel::exponential));
    } catch (const Error& e) {
      if (e.code() != Errc::InsufficientData) throw;
    }
    std::vector<double> mag;
    for (double v : full) mag.push_back(std::abs(v));
    o.add_chart("scan.svg", {"full joint cumulant", "spread", "|cumulant|", false, true, {{"cumulant", spreads, mag}}});
  };
  return plan;
}

// ---------------------------------------------------------------------------
// average, ratecheck, dyadic

struct AverageParams {
  averages::AverageSpec spec;
  std::shared_ptr<const averages::PreparedAverage> prepared;
  averages::StreamOptions stream;
  double epsilon = 1.0;
  double delta = 2.0;
};

std::int64_t distinct_gaps(const averages::PreparedAverage& p) {
  std::set<std::int64_t> gaps;
  for (std::size_t n = 1; n < p.r.size(); ++n)
    for (std::int64_t m : p.spec.multipliers)
      if (const std::int64_t g = m * (p.r[n] - p.r[n - 1]); g != 0) gaps.insert(g);
  return static_cast<std::int64_t>(gaps.size());
}

// Reads the keys shared by the averaging experiments; n_max may come from elsewhere.
AverageParams read_average(const Config& c, ObjectReader& p, std::optional<std::int64_t> n_max) {
  AverageParams a;
  a.spec.system = *c.system;
  a.spec.observables = c.observables;
  a.spec.sequence = *c.sequence;
  a.spec.multipliers = read_multipliers(p, c.observables.size(), true);
  a.spec.n_max = n_max ? *n_max : p.integer("n_max");
  if (!n_max) {
    if (const json* cp = p.optional("checkpoints")) a.spec.checkpoints = parse_integers(*cp, p.path_of("checkpoints"));
  }
  a.epsilon = p.number_or("epsilon", 1.0);
  require(a.epsilon > 0.0, p.path_of("epsilon"), "epsilon must be positive");
  a.delta = p.number_or("delta", 2.0);
  require(a.delta > 0.0, p.path_of("delta"), "delta must be positive");
  const auto cache = p.integer_or("cache_bytes", static_cast<std::int64_t>(a.stream.cache_bytes));
  require(cache > 0, p.path_of("cache_bytes"), "must be positive");
  a.stream.cache_bytes = static_cast<std::size_t>(cache);
  a.prepared = averages::prepare(a.spec);
  return a;
}

json average_derived(const AverageParams& a, std::int64_t points) {
  const auto& p = *a.prepared;
  json d;
  d["n_max"] = a.spec.n_max;
  d["checkpoints"] = p.checkpoints;
  d["target"] = p.target;
  d["points"] = points;
  std::int64_t per_point = 0;
  if (std::holds_alternative<ShiftSystem>(a.spec.system)) {
    d["window_lo"] = p.window_lo;
    d["window_hi"] = p.window_hi;
    d["shift_window_W"] = std::max(std::abs(p.window_lo), std::abs(p.window_hi));
    per_point = p.window_hi - p.window_lo + 1;
  } else {
    const auto& torus = std::get<TorusAutomorphism>(a.spec.system);
    const std::int64_t gaps = distinct_gaps(p);
    const std::int64_t entry = 16 * torus.dimension() * torus.dimension();
    d["precision_bits"] = torus.precision_bits();
    d["gap_powers"] = gaps;
    d["cache_bytes_needed"] = gaps * entry;
    d["cache_bytes_budget"] = a.stream.cache_bytes;
    if (static_cast<std::size_t>(gaps * entry) > a.stream.cache_bytes)
      throw Error(Errc::PrecisionBudget, "torus power cache needs " + std::to_string(gaps * entry) +
                                             " bytes, budget is " + std::to_string(a.stream.cache_bytes));
    per_point = gaps * entry;
  }
  d["estimated_memory_bytes"] = static_cast<std::int64_t>(p.r.size()) * 8 + per_point;
  return d;
}

Plan plan_average(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  auto a = read_average(c, p, std::nullopt);
  const auto points = p.integer_or("points", 1);
  require(points >= 1, p.path_of("points"), "need at least one point");
  p.finish();

  Plan plan;
  plan.derived = average_derived(a, points);
  plan.execute = [a, points, seed = c.seed](Outcome& o, unsigned workers) {
    const auto count = static_cast<std::size_t>(points);
    std::vector<averages::AverageSeries> series(count);
    std::vector<averages::RateTable> tables(count);
    parallel_for(count, workers, [&](std::size_t i) {
      Rng rng(derive_seed(seed, i));
      const auto point = averages::sample_point(*a.prepared, rng);
      series[i] = averages::ergodic_average_stream(a.prepared, point, a.stream);
      tables[i] = averages::rate_statistic(series[i], a.epsilon, a.delta, a.prepared->target);
    });
    Csv csv({"point", "N", "A", "S", "statistic"});
    Chart chart{"rate statistic", "N", "|A_N - target| / rho(N)", true, true, {}};
    for (std::size_t i = 0; i < count; ++i) {
      Series s{"point " + std::to_string(i), {}, {}};
      for (std::size_t k = 0; k < series[i].rows.size(); ++k) {
        const auto& row = series[i].rows[k];
        csv.cell(i).cell(row.N).cell(row.A).cell(row.S).cell(tables[i].rows[k].statistic);
        csv.end_row();
        s.x.push_back(static_cast<double>(row.N));
        s.y.push_back(tables[i].rows[k].statistic);
      }
      if (chart.series.size() < 6) chart.series.push_back(std::move(s));
    }
    o.steps += points * a.spec.n_max;
    o.add_csv("average.csv", csv);
    o.add_chart("average.svg", chart);
    o.results["target"] = a.prepared->target;
    std::vector<double> finals;
    for (const auto& s : series) finals.push_back(s.rows.back().A);
    o.results["final_average"] = finals;
  };
  return plan;
}

Plan plan_ratecheck(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  auto a = read_average(c, p, std::nullopt);
  averages::EnsembleOptions e;
  e.points = p.integer_or("points", 200);
  require(e.points >= 10, p.path_of("points"), "an ensemble needs at least 10 points");
  e.reference_N = p.integer_or("reference_N", 0);
  const double max_fraction = p.number_or("max_fraction", 0.05);
  p.finish();
  e.epsilon = a.epsilon;
  e.delta = a.delta;
  e.seed = c.seed;
  e.stream = a.stream;
  const auto& cps = a.prepared->checkpoints;
  if (e.reference_N != 0 && std::find(cps.begin(), cps.end(), e.reference_N) == cps.end())
    invalid("config.parameters.reference_N", "must be one of the checkpoints");

  Plan plan;
  plan.derived = average_derived(a, e.points);
  plan.execute = [a, e, max_fraction](Outcome& o, unsigned workers) {
    auto options = e;
    options.workers = workers;
    const auto s = averages::ensemble_rate_experiment(a.spec, options);
    Csv summary({"N", "fraction_exceeding", "median_statistic"});
    Csv stats({"point", "N", "statistic"});
    std::vector<double> xs;
    for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
      summary.cell(s.checkpoints[k]).cell(s.fraction_exceeding[k]).cell(s.median_statistic[k]);
      summary.end_row();
      xs.push_back(static_cast<double>(s.checkpoints[k]));
    }
    for (std::size_t i = 0; i < s.statistic.size(); ++i)
      for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
        stats.cell(i).cell(s.checkpoints[k]).cell(s.statistic[i][k]);
        stats.end_row();
      }
    o.steps += e.points * a.spec.n_max;
    o.add_csv("ratecheck.csv", summary);
    o.add_csv("statistics.csv", stats);
    o.add_chart("ratecheck.svg",
                {"ensemble median of the rate statistic", "N", "median statistic", true, true,
                 {{"median", xs, s.median_statistic}}});
    const auto& med = s.median_statistic;
    bool nonincreasing = med.size() >= 3;
    for (std::size_t k = med.size() >= 3 ? med.size() - 2 : med.size(); k < med.size(); ++k)
      nonincreasing = nonincreasing && med[k] <= med[k - 1];
    o.results["target"] = s.target;
    o.results["reference_N"] = s.reference_N;
    o.results["final_fraction_exceeding"] = s.fraction_exceeding.back();
    o.results["fraction_pass"] = s.fraction_exceeding.back() <= max_fraction;
    o.results["median_nonincreasing"] = nonincreasing;
  };
  return plan;
}

Plan plan_dyadic(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  const auto s_max = p.integer("s_max");
  require(s_max >= 1 && s_max <= 30, p.path_of("s_max"), "must lie in [1, 30]");
  auto a = read_average(c, p, std::int64_t{1} << s_max);
  const auto points = p.integer_or("points", 1000);
  require(points >= 2, p.path_of("points"), "need at least two points");
  const double sigma = p.number_or("sigma", 1.0);
  require(sigma > 0.0, p.path_of("sigma"), "sigma must be positive");
  std::vector<std::int64_t> decompose;
  if (const json* d = p.optional("decompose")) decompose = parse_integers(*d, p.path_of("decompose"));
  for (auto n : decompose) require(n >= 1 && n < (std::int64_t{1} << 62), p.path_of("decompose"), "n must be >= 1");
  p.finish();

  Plan plan;
  plan.derived = average_derived(a, points);
  plan.derived["s_max"] = s_max;
  plan.execute = [a, s_max, points, sigma, decompose, seed = c.seed](Outcome& o, unsigned workers) {
    const int s = static_cast<int>(s_max);
    const auto terms = dyadic::average_terms(a.spec, static_cast<std::size_t>(points), seed);

    const auto series = dyadic::exceptional_series(terms, s, a.epsilon, sigma, workers);
    Csv exc({"s", "threshold", "fraction", "C", "bound", "pass", "partial_sum"});
    json reports = json::array();
    bool all_pass = true;
    for (std::size_t i = 0; i < series.reports.size(); ++i) {
      const auto& r = series.reports[i];
      exc.cell(r.s).cell(r.threshold).cell(r.fraction).cell(r.C).cell(r.bound).cell(r.pass).cell(series.partial_sum[i]);
      exc.end_row();
      all_pass = all_pass && r.pass;
    }
    o.add_csv("exceptional.csv", exc);

    const auto profile = dyadic::variance_profile(terms, s, workers);
    Csv var({"r", "level_mean"});
    for (std::size_t r = 0; r < profile.level_mean.size(); ++r) {
      var.cell(r).cell(profile.level_mean[r]);
      var.end_row();
    }
    o.add_csv("variance.csv", var);

    std::vector<std::int64_t> grid;
    for (int j = 1; j <= s; ++j) grid.push_back(std::int64_t{1} << j);
    const auto est = dyadic::empirical_E_grid(terms, grid, workers);
    Csv energy({"N", "E", "std_error"});
    std::vector<double> xs, E;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      energy.cell(grid[i]).cell(est[i].mean).cell(est[i].std_error);
      energy.end_row();
      xs.push_back(static_cast<double>(grid[i]));
      E.push_back(est[i].mean);
    }
    o.add_csv("energy.csv", energy);
    o.add_chart("energy.svg", {"second moment of partial sums", "N", "E(0, N)", true, true, {{"E", xs, E}}});
    o.results["sigma_fit"] = nullptr;
    if (grid.size() >= 4) {
      try {
        const auto fit = dyadic::sigma_fit(grid, E);
        o.results["sigma_fit"] = {{"sigma", fit.sigma}, {"fit", fit_json(fit.fit)}};
      } catch (const Error& e) {
        if (e.code() != Errc::InsufficientData) throw;
      }
    }

    if (!decompose.empty()) {
      Csv dec({"n", "s", "level", "index", "first", "last"});
      for (auto n : decompose) {
        const int sn = dyadic::s_of(n);
        for (const auto& I : dyadic::decompose(n, sn)) {
          dec.cell(n).cell(sn).cell(I.level).cell(I.index).cell(I.first()).cell(I.last());
          dec.end_row();
        }
      }
      o.add_csv("decompose.csv", dec);
    }
    o.steps += 3 * points * (std::int64_t{1} << s_max);
    o.results["exceptional_all_pass"] = all_pass;
    o.results["exceptional_partial_sum"] = series.partial_sum.back();
    o.results["mean_total"] = profile.mean_total;
  };
  return plan;
}

// ---------------------------------------------------------------------------
// growth, counting

Plan plan_growth(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  const auto m = to_eigen(parse_matrix(p.required("matrix"), p.path_of("matrix")));
  const auto n_max = p.integer_or("n_max", 64);
  require(n_max >= 16 && n_max <= 100000, p.path_of("n_max"), "must lie in [16, 100000]");
  const double tol = p.number_or("tolerance", 1e-6);
  require(tol > 0.0, p.path_of("tolerance"), "must be positive");
  const std::string mode_name = p.string_or("mode", "numeric");
  require(mode_name == "numeric" || mode_name == "exact", p.path_of("mode"), "expected numeric or exact");
  const auto mode = mode_name == "exact" ? matrix_growth::QuMode::exact : matrix_growth::QuMode::numeric;
  if (mode == matrix_growth::QuMode::exact && !matrix_growth::is_integral(m))
    invalid(p.path_of("mode"), "exact mode needs an integer matrix");
  if (std::abs(m.determinant()) == 0.0) throw Error(Errc::Singular, "matrix is singular");

  struct PairParams {
    matrix_growth::CommutingPair pair;
    std::int64_t m_max = 50, K = 200, n_max = 100;
    std::optional<std::int64_t> balance_m;
    std::int64_t balance_n = 40;
  };
  std::optional<PairParams> pair;
  if (const json* pv = p.optional("pair")) {
    ObjectReader q(*pv, p.path_of("pair"));
    const auto g = to_eigen(parse_matrix(q.required("g"), q.path_of("g")));
    const auto h = to_eigen(parse_matrix(q.required("h"), q.path_of("h")));
    PairParams pp{matrix_growth::CommutingPair::make(g, h)};
    pp.m_max = q.integer_or("m_max", 50);
    pp.K = q.integer_or("K", 200);
    pp.n_max = q.integer_or("n_max", 100);
    require(pp.m_max >= 1 && pp.K >= 1 && pp.n_max >= 1, q.path_of("K"), "m_max, K and n_max must be positive");
    if (q.has("balance_m")) {
      pp.balance_m = q.integer("balance_m");
      require(*pp.balance_m >= 0, q.path_of("balance_m"), "must be non-negative");
    }
    pp.balance_n = q.integer_or("balance_n", 40);
    require(pp.balance_n >= 0, q.path_of("balance_n"), "must be non-negative");
    q.finish();
    pair = std::move(pp);
  }
  p.finish();

  Plan plan;
  plan.derived = {{"dimension", m.rows()}, {"n_max", n_max}, {"pair", pair.has_value()}};
  plan.derived["estimated_memory_bytes"] = 8 * n_max + (pair ? 16 * pair->K * pair->m_max : 0);
  plan.execute = [m, n_max, tol, mode, pair](Outcome& o, unsigned) {
    const bool qu = matrix_growth::is_quasi_unipotent(m, tol, mode);
    const auto g = matrix_growth::growth_profile(m, n_max);
    Csv csv({"n", "norm", "log_norm"});
    std::vector<double> xs, norms;
    for (std::size_t i = 0; i < g.log_norms.size(); ++i) {
      const double norm = std::exp(g.log_norms[i]);
      csv.cell(i + 1).cell(norm).cell(g.log_norms[i]);
      csv.end_row();
      xs.push_back(static_cast<double>(i + 1));
      norms.push_back(norm);
    }
    o.steps += n_max;
    o.add_csv("growth.csv", csv);
    o.add_chart("growth.svg", {"norm of matrix powers", "n", "||M^n||", true, true, {{"norm", xs, norms}}});
    o.results["quasi_unipotent"] = qu;
    o.results["base"] = g.base;
    o.results["poly_degree"] = g.poly_degree;
    o.results["p"] = g.p;
    o.results["residual"] = g.residual;
    o.results["spectral_radius"] = g.spectral_radius;
    o.results["structural_degree"] = g.structural_degree;
    if (!pair) return;

    const auto grid = iota_grid(1, pair->m_max);
    const auto counting = matrix_growth::pair_counting_check(pair->pair, grid, pair->K, pair->n_max);
    Csv pc(with_prefix({"orientation"}, kCountingColumns));
    pc.cell("row");
    counting_cells(pc, counting.row);
    pc.end_row();
    pc.cell("column");
    counting_cells(pc, counting.column);
    pc.end_row();
    o.add_csv("pair_counting.csv", pc);
    o.results["pair_counting"] = {{"row", counting_json(counting.row)}, {"column", counting_json(counting.column)}};
    o.steps += 2 * pair->K * pair->m_max;

    if (!pair->balance_m) return;
    const auto b = matrix_growth::hyperbolic_balance_bound(pair->pair, *pair->balance_m, 0, pair->balance_n);
    Csv bc({"n", "norm", "two_eigen", "curve", "holds"});
    for (const auto& row : b.rows) {
      bc.cell(row.n).cell(row.norm).cell(row.two_eigen).cell(row.curve).cell(row.holds);
      bc.end_row();
    }
    o.add_csv("balance.csv", bc);
    o.results["balance"] = {{"k", b.k},          {"base", b.base},           {"det_g", b.det_g},
                            {"det_h", b.det_h},  {"unimodular", b.unimodular}, {"holds", b.holds}};
  };
  return plan;
}

Plan plan_counting(const Config& c) {
  ObjectReader p(c.parameters, "config.parameters");
  const auto t = parse_numbers(p.required("t"), p.path_of("t"));
  require(!t.empty(), p.path_of("t"), "needs at least one exponent");
  const auto K = p.integer_or("K", 200);
  const auto n_max = p.integer_or("n_max", 100);
  const auto m_max = p.integer_or("m_max", 50);
  require(K >= 1 && K <= 1000000, p.path_of("K"), "must lie in [1, 10^6]");
  require(n_max >= 1, p.path_of("n_max"), "must be positive");
  require(m_max >= 1 && m_max <= 100000, p.path_of("m_max"), "must lie in [1, 10^5]");
  std::optional<std::pair<std::int64_t, std::int64_t>> band;
  if (const json* bv = p.optional("band")) {
    ObjectReader b(*bv, p.path_of("band"));
    band.emplace(b.integer("s_max"), b.integer("M_claim"));
    require(band->first >= 1 && band->second >= 1, p.path_of("band"), "s_max and M_claim must be positive");
    b.finish();
  }
  p.finish();
  const std::int64_t terms = std::max(2 * K, m_max);
  auto r = sequences::generate(*c.sequence, terms);

  Plan plan;
  plan.derived = {{"terms", terms}, {"pairs", t.size() * (t.size() + 1) / 2}, {"estimated_memory_bytes", 8 * terms}};
  plan.execute = [t, K, n_max, m_max, band, r = std::move(r)](Outcome& o, unsigned) {
    Csv csv(with_prefix({"i", "j"}, kCountingColumns));
    const auto grid = iota_grid(1, m_max);
    json rows = json::array();
    bool all_pass = true;
    const auto emit = [&](std::size_t i, std::size_t j, const sequences::CountingReport& rep) {
      csv.cell(i).cell(j);
      counting_cells(csv, rep);
      csv.end_row();
      all_pass = all_pass && rep.pass;
    };
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = i; j < t.size(); ++j) {
        const auto cf = sequences::sequence_c(r, t[i], t[j], i == j);
        emit(i, j, sequences::check_c_condition(cf, K, n_max));
        emit(i, j, sequences::check_b_condition_either(sequences::sequence_b(r, t[i], t[j]), grid, K, n_max));
        if (band) emit(i, j, sequences::check_band_condition(cf, K, band->first, band->second));
        o.steps += K * (m_max + 1);
      }
    o.add_csv("counting.csv", csv);
    o.results["all_pass"] = all_pass;
  };
  return plan;
}

// ---------------------------------------------------------------------------

json error_json(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {{"code", err->qualified_code()}, {"message", err->what()}};
  if (dynamic_cast<const json::exception*>(&e)) return {{"code", "cli.InvalidConfig"}, {"message", e.what()}};
  return {{"code", "cli.RuntimeError"}, {"message", e.what()}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json versions() {
  return {{"ergolab", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"compiler", __VERSION__}};
}

}  // namespace

Plan make_plan(const Config& config) {
  const auto& e = config.experiment;
  if (e == "correlate") return plan_correlate(config);
  if (e == "cumulants") return plan_cumulants(config);
  if (e == "average") return plan_average(config);
  if (e == "ratecheck") return plan_ratecheck(config);
  if (e == "dyadic") return plan_dyadic(config);
  if (e == "growth") return plan_growth(config);
  return plan_counting(config);
}

unsigned resolve_workers(std::optional<unsigned> flag) {
  if (const char* env = std::getenv("ERGOLAB_WORKERS"); env && *env) {
    std::int64_t v = 0;
    try {
      v = parse_integer(json(std::string(env)), "ERGOLAB_WORKERS");
    } catch (const Error&) {
      invalid("ERGOLAB_WORKERS", "expected a positive integer");
    }
    if (v < 1 || v > 1024) invalid("ERGOLAB_WORKERS", "expected a positive integer up to 1024");
    return static_cast<unsigned>(v);
  }
  if (flag) {
    if (*flag < 1 || *flag > 1024) invalid("--workers", "expected a positive integer up to 1024");
    return *flag;
  }
  return 1;
}

int validate_command(const std::string& config_path, std::ostream& out) {
  json report{{"config", config_path}, {"valid", false}, {"errors", json::array()}, {"derived", json::object()}};
  try {
    const Config config = parse_config(load_json(config_path));
    report["experiment"] = config.experiment;
    report["derived"] = make_plan(config).derived;
    report["valid"] = true;
  } catch (const std::exception& e) {
    report["errors"].push_back(error_json(e));
  }
  out << dump(report);
  return report["valid"].get<bool>() ? kOk : kInvalid;
}

int run_command(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Config config;
  Plan plan;
  try {
    config = parse_config(load_json(config_path));
    plan = make_plan(config);
  } catch (const std::exception& e) {
    const json j = error_json(e);
    err << "ergolab: invalid config: " << j["code"].get<std::string>() << ": " << j["message"].get<std::string>()
        << "\n";
    return kInvalid;
  }

  const fs::path dir = options.out ? fs::path(*options.out) : config.output ? fs::path(*config.output) : "ergolab-out";
  Outcome outcome;
  outcome.svg = options.svg;
  json summary{{"schema_version", kSchemaVersion}, {"experiment", config.experiment}, {"seed", config.seed}};
  int code = kOk;
  try {
    fs::create_directories(dir);
    plan.execute(outcome, options.workers);
    summary["status"] = "ok";
    summary["results"] = outcome.results;
    summary["columns"] = outcome.columns;
  } catch (const std::exception& e) {
    code = kRuntime;
    outcome.files.clear();
    summary["status"] = "error";
    summary["error"] = error_json(e);
    err << "ergolab: " << summary["error"]["code"].get<std::string>() << ": "
        << summary["error"]["message"].get<std::string>() << "\n";
  }
  summary["derived"] = plan.derived;
  outcome.files.emplace_back("summary.json", dump(summary));

  try {
    fs::create_directories(dir);
    json artifacts = json::array();
    for (const auto& [name, bytes] : outcome.files) {
      write_file(dir / name, bytes);
      artifacts.push_back({{"path", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const json manifest{{"config", config.raw},
                        {"config_path", config_path},
                        {"config_sha256", sha256_hex(config.raw.dump())},
                        {"experiment", config.experiment},
                        {"seed", config.seed},
                        {"workers", options.workers},
                        {"artifacts", artifacts},
                        {"wall_clock_seconds", seconds},
                        {"steps", outcome.steps},
                        {"versions", versions()},
                        {"status", code == kOk ? "ok" : "error"},
                        {"exit_code", code}};
    write_file(dir / "manifest.json", dump(manifest));
  } catch (const std::exception& e) {
    err << "ergolab: cannot write artifacts: " << e.what() << "\n";
    return kRuntime;
  }
  if (code == kOk) out << "ergolab: " << config.experiment << " ok, artifacts in " << dir.string() << "\n";
  return code;
}

}  // namespace ergolab::cli

#include "sigspline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sigspline/errors.hpp"
#include "sigspline/rng.hpp"

namespace sigspline {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Central moments m2 and m_order, both with 1/n.
std::pair<double, double> central_moments(std::span<const double> x, int order) {
  if (x.empty()) throw DataError("moments of an empty sample");
  const double m = mean_of(x);
  double m2 = 0.0;
  double mk = 0.0;
  for (double v : x) {
    const double c = v - m;
    m2 += c * c;
    mk += std::pow(c, order);
  }
  m2 /= static_cast<double>(x.size());
  mk /= static_cast<double>(x.size());
  if (!(m2 > 0.0)) throw DataError("statistic undefined for a zero-variance sample");
  return {m2, mk};
}

}  // namespace

std::vector<double> acf(std::span<const double> x, std::span<const std::size_t> lags) {
  const std::size_t n = x.size();
  for (std::size_t lag : lags) {
    if (lag >= n) throw DataError("acf: lag " + std::to_string(lag) + " needs a longer series");
  }
  const double m = mean_of(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  if (!(c0 > 0.0)) throw DataError("acf: constant series has no autocorrelation");
  std::vector<double> out;
  for (std::size_t lag : lags) {
    if (lag == 0) {
      out.push_back(1.0);
      continue;
    }
    double ck = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) ck += (x[t] - m) * (x[t + lag] - m);
    out.push_back(ck / c0);
  }
  return out;
}

double skewness(std::span<const double> x) {
  const auto [m2, m3] = central_moments(x, 3);
  return m3 / std::pow(m2, 1.5);
}

double kurtosis(std::span<const double> x) {
  const auto [m2, m4] = central_moments(x, 4);
  return m4 / (m2 * m2);
}

Eigen::MatrixXd cross_correlation(const Sequence& x) {
  const Eigen::MatrixXd centered = x.values().rowwise() - x.values().colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  if (!(sd.minCoeff() > 0.0)) throw DataError("cross_correlation: a channel is constant");
  Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < corr.cols(); ++j) {
      const double v = std::clamp(0.5 * (corr(i, j) + corr(j, i)), -1.0, 1.0);
      corr(i, j) = v;
      corr(j, i) = v;
    }
  }
  return corr;
}

std::vector<double> abs_return_acf(std::span<const double> x, std::span<const std::size_t> lags) {
  if (x.size() < 2) throw DataError("abs_return_acf: need at least two values");
  std::vector<double> r(x.size() - 1);
  for (std::size_t t = 1; t < x.size(); ++t) r[t - 1] = std::abs(x[t] - x[t - 1]);
  return acf(r, lags);
}

std::vector<double> pooled_acf(const std::vector<std::vector<double>>& batch,
                               std::span<const std::size_t> lags) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : batch) {
    total += std::accumulate(s.begin(), s.end(), 0.0);
    count += s.size();
  }
  if (count == 0) throw DataError("pooled_acf: empty batch");
  const double m = total / static_cast<double>(count);
  double c0 = 0.0;
  for (const auto& s : batch) {
    for (double v : s) c0 += (v - m) * (v - m);
  }
  c0 /= static_cast<double>(count);
  if (!(c0 > 0.0)) throw DataError("pooled_acf: constant batch has no autocorrelation");
  std::vector<double> out;
  for (std::size_t lag : lags) {
    double ck = 0.0;
    std::size_t pairs = 0;
    for (const auto& s : batch) {
      for (std::size_t t = 0; t + lag < s.size(); ++t) {
        ck += (s[t] - m) * (s[t + lag] - m);
        ++pairs;
      }
    }
    if (pairs == 0) throw DataError("pooled_acf: sequences too short for lag " + std::to_string(lag));
    out.push_back(lag == 0 ? 1.0 : (ck / static_cast<double>(pairs)) / c0);
  }
  return out;
}

std::vector<std::string> statistic_names(bool abs_return_acf) {
  std::vector<std::string> out;
  for (const char* process : {"level", "return"}) {
    for (const char* stat : {"acf_lag1", "acf_lag2", "skewness", "kurtosis", "cross_correlation"}) {
      out.push_back(std::string(process) + "/" + stat);
    }
  }
  if (abs_return_acf) {
    out.emplace_back("return/abs_acf_lag1");
    out.emplace_back("return/abs_acf_lag2");
  }
  return out;
}

namespace {

struct BatchStats {
  std::map<std::string, std::vector<double>> values;
};

// channel -> list of per-sequence series
using Channels = std::vector<std::vector<std::vector<double>>>;

void add_process_stats(const Channels& channels, const std::string& prefix, BatchStats& out) {
  const std::size_t d = channels.size();
  const std::size_t lags[] = {1, 2};
  auto& lag1 = out.values[prefix + "/acf_lag1"];
  auto& lag2 = out.values[prefix + "/acf_lag2"];
  auto& skew = out.values[prefix + "/skewness"];
  auto& kurt = out.values[prefix + "/kurtosis"];
  std::vector<std::vector<double>> pooled(d);
  for (std::size_t c = 0; c < d; ++c) {
    const auto a = pooled_acf(channels[c], lags);
    lag1.push_back(a[0]);
    lag2.push_back(a[1]);
    for (const auto& s : channels[c]) pooled[c].insert(pooled[c].end(), s.begin(), s.end());
    skew.push_back(skewness(pooled[c]));
    kurt.push_back(kurtosis(pooled[c]));
  }
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(pooled[0].size()), static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < d; ++c) {
    stacked.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(pooled[c].data(), stacked.rows());
  }
  const Eigen::MatrixXd corr = cross_correlation(Sequence(stacked));
  auto& cc = out.values[prefix + "/cross_correlation"];
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    for (Eigen::Index j = 0; j < corr.cols(); ++j) cc.push_back(corr(i, j));
  }
}

BatchStats batch_stats(const std::vector<Sequence>& batch,
                       const std::vector<Eigen::RowVectorXd>& anchors, bool with_abs) {
  if (batch.empty()) throw DataError("compare_batches: empty batch");
  const auto d = static_cast<std::size_t>(batch.front().channels());
  Channels levels(d), returns(d), abs_returns(d);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Sequence& x = batch[j];
    if (static_cast<std::size_t>(x.channels()) != d) {
      throw DataError("compare_batches: sequences differ in channel count");
    }
    for (std::size_t c = 0; c < d; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      std::vector<double> lv(static_cast<std::size_t>(x.length()));
      for (Eigen::Index t = 0; t < x.length(); ++t) lv[static_cast<std::size_t>(t)] = x(t, ci);
      std::vector<double> rt;
      if (!anchors.empty()) rt.push_back(lv.front() - anchors[j][ci]);
      for (std::size_t t = 1; t < lv.size(); ++t) rt.push_back(lv[t] - lv[t - 1]);
      std::vector<double> at(rt.size());
      std::transform(rt.begin(), rt.end(), at.begin(), [](double v) { return std::abs(v); });
      levels[c].push_back(std::move(lv));
      returns[c].push_back(std::move(rt));
      abs_returns[c].push_back(std::move(at));
    }
  }
  BatchStats out;
  add_process_stats(levels, "level", out);
  add_process_stats(returns, "return", out);
  if (with_abs) {
    const std::size_t lags[] = {1, 2};
    auto& l1 = out.values["return/abs_acf_lag1"];
    auto& l2 = out.values["return/abs_acf_lag2"];
    for (std::size_t c = 0; c < d; ++c) {
      const auto a = pooled_acf(abs_returns[c], lags);
      l1.push_back(a[0]);
      l2.push_back(a[1]);
    }
  }
  return out;
}

}  // namespace

MetricReport compare_batches(const std::vector<Sequence>& real, const std::vector<Sequence>& generated,
                             const std::vector<Eigen::RowVectorXd>& anchors, bool abs_return_acf) {
  if (!anchors.empty() && (anchors.size() != real.size() || anchors.size() != generated.size())) {
    throw DataError("compare_batches: one anchor row per sequence required");
  }
  const BatchStats r = batch_stats(real, anchors, abs_return_acf);
  const BatchStats g = batch_stats(generated, anchors, abs_return_acf);
  MetricReport report;
  for (const auto& [name, rv] : r.values) {
    const auto& gv = g.values.at(name);
    if (gv.size() != rv.size()) throw DataError("compare_batches: batches differ in channel count");
    Statistic s{rv, gv, 0.0};
    for (std::size_t k = 0; k < rv.size(); ++k) s.discrepancy += std::abs(rv[k] - gv[k]);
    report.stats.emplace(name, std::move(s));
  }
  return report;
}

namespace {

using Generator = std::function<Sequence(const Sequence& history_unit, std::size_t start,
                                         std::uint64_t seed)>;

EvaluationReport run_protocol(const Sequence& real, std::size_t window,
                              const EvaluationOptions& options, const Generator& gen) {
  if (window < 1) throw DataError("evaluate: the conditioning window must be >= 1");
  if (options.horizon < 1 || options.batch < 1 || options.seeds < 1) {
    throw std::invalid_argument("evaluate: horizon, batch and seeds must be >= 1");
  }
  const auto r = static_cast<Eigen::Index>(window);
  const auto h = static_cast<Eigen::Index>(options.horizon);
  const Eigen::Index starts = real.length() - r - h + 1;
  if (starts < 1) throw DataError("evaluate: real data shorter than window + horizon");

  EvaluationReport rep;
  rep.options = options;
  for (std::size_t s = 0; s < options.seeds; ++s) {
    Rng rng(options.rng_seed + s);
    std::vector<std::size_t> order(static_cast<std::size_t>(starts));
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<Sequence> real_batch, gen_batch;
    std::vector<Eigen::RowVectorXd> anchors;
    for (std::size_t b = 0; b < options.batch; ++b) {
      // Without replacement while windows last, then wrap around.
      const auto t0 = static_cast<Eigen::Index>(order[b % order.size()]);
      const Sequence history = real.slice(t0, r);
      real_batch.push_back(real.slice(t0 + r, h));
      anchors.push_back(history.row(r - 1));
      gen_batch.push_back(gen(history, static_cast<std::size_t>(t0), rng.next()));
    }
    rep.per_seed.push_back(compare_batches(real_batch, gen_batch, anchors, options.abs_return_acf));
  }
  for (const auto& [name, _] : rep.per_seed.front().stats) {
    AggregatedMetric agg;
    for (const MetricReport& m : rep.per_seed) agg.per_seed.push_back(m.stats.at(name).discrepancy);
    agg.discrepancy = summarize(agg.per_seed);
    rep.aggregated.emplace(name, std::move(agg));
  }
  return rep;
}

}  // namespace

EvaluationReport evaluate(const SigSplineModel& model, const Sequence& real,
                          const EvaluationOptions& options) {
  if (real.channels() != static_cast<Eigen::Index>(model.dim())) {
    throw DataError("evaluate: real data has " + std::to_string(real.channels()) +
                    " channels, model expects " + std::to_string(model.dim()));
  }
  const Preprocessor& pre = model.preprocess();
  const auto h = static_cast<Eigen::Index>(options.horizon);
  return run_protocol(real, model.shape().window, options,
                      [&](const Sequence& history, std::size_t, std::uint64_t seed) {
                        const Sequence path =
                            generate(model, pre.forward(history), options.horizon, seed);
                        return pre.inverse(path.slice(path.length() - h, h));
                      });
}

EvaluationReport evaluate_self(const Sequence& real, std::size_t window,
                               const EvaluationOptions& options) {
  const auto r = static_cast<Eigen::Index>(window);
  const auto h = static_cast<Eigen::Index>(options.horizon);
  return run_protocol(real, window, options,
                      [&](const Sequence&, std::size_t start, std::uint64_t) {
                        return real.slice(static_cast<Eigen::Index>(start) + r, h);
                      });
}

std::string evaluation_report_to_json(const EvaluationReport& report) {
  using nlohmann::json;
  json agg = json::object();
  for (const auto& [name, a] : report.aggregated) {
    agg[name] = json{{"mean", a.discrepancy.mean},
                     {"std", a.discrepancy.stddev},
                     {"min", a.discrepancy.min},
                     {"max", a.discrepancy.max},
                     {"per_seed", a.per_seed}};
  }
  json seeds = json::array();
  for (const MetricReport& m : report.per_seed) {
    json one = json::object();
    for (const auto& [name, s] : m.stats) {
      one[name] = json{{"real", s.real}, {"generated", s.generated}, {"discrepancy", s.discrepancy}};
    }
    seeds.push_back(std::move(one));
  }
  const EvaluationOptions& o = report.options;
  json j{{"kurtosis_convention", "raw (normal = 3)"},
         {"options",
          {{"horizon", o.horizon},
           {"batch", o.batch},
           {"seeds", o.seeds},
           {"seed", o.rng_seed},
           {"abs_acf", o.abs_return_acf}}},
         {"aggregated", std::move(agg)},
         {"per_seed", std::move(seeds)}};
  return j.dump(2);
}

std::string render_table(const std::vector<std::pair<std::string, EvaluationReport>>& columns) {
  if (columns.empty()) throw std::invalid_argument("render_table: no columns");
  const auto names = statistic_names(columns.front().second.options.abs_return_acf);
  auto cell = [](const Summary& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f +- %.4f", s.mean, s.stddev);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"statistic"};
  for (const auto& [label, _] : columns) header.push_back(label);
  grid.push_back(header);
  for (const std::string& name : names) {
    std::vector<std::string> row{name};
    std::size_t best = 0;
    double best_mean = INFINITY;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto it = columns[c].second.aggregated.find(name);
      if (it == columns[c].second.aggregated.end()) {
        row.emplace_back("-");
        continue;
      }
      row.push_back(cell(it->second.discrepancy));
      if (it->second.discrepancy.mean < best_mean) {
        best_mean = it->second.discrepancy.mean;
        best = c;
      }
    }
    if (columns.size() > 1 && std::isfinite(best_mean)) row[best + 1] += " *";
    grid.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  out << "# l1 discrepancy, mean +- std over " << columns.front().second.options.seeds
      << " seeds; kurtosis is raw (normal = 3); * marks the lowest mean\n";
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size(), ' ');
      out << (c + 1 < row.size() ? "  " : "\n");
    }
  }
  return out.str();
}

}  // namespace sigspline

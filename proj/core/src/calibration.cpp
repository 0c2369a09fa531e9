#include "sigspline/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sigspline/errors.hpp"
#include "sigspline/rng.hpp"
#include "sigspline/spline_cdf.hpp"

namespace sigspline {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(reg.lambda >= 0.0)) throw std::invalid_argument("reg_lambda must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  if (!(grad_tol >= 0.0)) throw std::invalid_argument("grad_tol must be >= 0");
  if (optimizer == OptimizerKind::newton && reg.kind == RegKind::l1 && reg.lambda > 0.0) {
    throw std::invalid_argument("newton optimizer is unavailable with L1 regularisation");
  }
}

Design build_design(std::span<const Sequence> dataset, std::size_t coordinate,
                    const ModelShape& shape) {
  if (dataset.empty()) throw std::invalid_argument("build_design: empty dataset");
  if (coordinate < 1 || coordinate > shape.dim) {
    throw std::invalid_argument("build_design: coordinate out of range");
  }
  const SigSplineModel probe(ModelShape{shape.dim, shape.level, 1, shape.window});
  Design d;
  d.bins = shape.bins;
  d.features.resize(static_cast<Eigen::Index>(dataset.size()),
                    static_cast<Eigen::Index>(shape.features()));
  d.targets.resize(dataset.size());
  for (std::size_t m = 0; m < dataset.size(); ++m) {
    const Sequence& x = dataset[m];
    if (x.length() < 2) throw DataError("build_design: every sample needs at least two rows");
    if (x.channels() != static_cast<Eigen::Index>(shape.dim)) {
      throw DataError("build_design: sample channel count does not match the model");
    }
    const Sequence window = probe.condition_window(x.slice(0, x.length() - 1));
    const Eigen::RowVectorXd next = x.row(x.length() - 1);
    d.features.row(static_cast<Eigen::Index>(m)) =
        signature_features(window.appended(next), coordinate, shape.level).transpose();
    d.targets[m] = static_cast<int>(
        bin_index(next[static_cast<Eigen::Index>(coordinate - 1)], shape.bins));
  }
  return d;
}

Design subset(const Design& design, std::span<const std::size_t> rows) {
  Design out;
  out.bins = design.bins;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), design.features.cols());
  out.targets.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) =
        design.features.row(static_cast<Eigen::Index>(rows[r]));
    out.targets[r] = design.targets[rows[r]];
  }
  return out;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_params(const SplineParams& params, const Design& design) {
  if (design.samples() == 0) throw std::invalid_argument("empty design");
  if (params.rows() != static_cast<Eigen::Index>(design.bins) ||
      params.cols() != design.features.cols()) {
    throw std::invalid_argument("parameter shape does not match the design");
  }
}

// Softmax of the logits F U^T, normalised in place. Also returns the per-row
// negative log-likelihood of the target bin.
struct SoftmaxPass {
  RowMatrix probs;
  Eigen::VectorXd nll;
};

SoftmaxPass softmax_pass(const SplineParams& params, const Design& design) {
  SoftmaxPass out;
  out.probs.noalias() = design.features * params.transpose();
  const Eigen::VectorXd peak = out.probs.rowwise().maxCoeff();
  out.probs.colwise() -= peak;
  out.nll.resize(out.probs.rows());
  for (Eigen::Index m = 0; m < out.probs.rows(); ++m) {
    out.nll[m] = -out.probs(m, design.targets[static_cast<std::size_t>(m)]);
  }
  out.probs = out.probs.array().exp();
  const Eigen::VectorXd sums = out.probs.rowwise().sum();
  out.nll.array() += sums.array().log();
  out.probs.array().colwise() /= sums.array();
  return out;
}

RowMatrix probabilities(const SplineParams& params, const Design& design) {
  return softmax_pass(params, design).probs;
}

}  // namespace

double coordinate_loss(const SplineParams& params, const Design& design) {
  check_params(params, design);
  return softmax_pass(params, design).nll.mean();
}

namespace {

std::pair<double, SplineParams> loss_and_gradient(const SplineParams& params,
                                                  const Design& design) {
  check_params(params, design);
  SoftmaxPass pass = softmax_pass(params, design);
  for (std::size_t m = 0; m < design.samples(); ++m) {
    pass.probs(static_cast<Eigen::Index>(m), design.targets[m]) -= 1.0;
  }
  SplineParams g = pass.probs.transpose() * design.features;
  g /= static_cast<double>(design.samples());
  return {pass.nll.mean(), std::move(g)};
}

}  // namespace

SplineParams coordinate_gradient(const SplineParams& params, const Design& design) {
  return loss_and_gradient(params, design).second;
}

Eigen::MatrixXd coordinate_hessian(const SplineParams& params, const Design& design) {
  check_params(params, design);
  const auto n = params.rows();
  const auto k = params.cols();
  if (static_cast<std::size_t>(n * k) > kMaxHessianSize) {
    throw std::invalid_argument("coordinate_hessian: N*K = " + std::to_string(n * k) +
                                " exceeds " + std::to_string(kMaxHessianSize));
  }
  const RowMatrix p = probabilities(params, design);
  const double scale = 1.0 / static_cast<double>(design.samples());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * k, n * k);
  // Block (a, b) = (1/M) sum_m (delta_ab p_a - p_a p_b) y_m y_m^T.
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      Eigen::VectorXd w = -(p.col(a).array() * p.col(b).array()).matrix();
      if (a == b) w += p.col(a);
      const Eigen::MatrixXd block =
          design.features.transpose() * (w.asDiagonal() * design.features) * scale;
      h.block(a * k, b * k, k, k) = block;
      if (b != a) h.block(b * k, a * k, k, k) = block.transpose();
    }
  }
  return h;
}

double penalty(const SplineParams& params, const Regularization& reg) {
  switch (reg.kind) {
    case RegKind::none:
      return 0.0;
    case RegKind::l1:
      return reg.lambda * params.cwiseAbs().sum();
    case RegKind::l2:
      return reg.lambda * params.squaredNorm();
  }
  return 0.0;
}

SplineParams penalty_gradient(const SplineParams& params, const Regularization& reg) {
  switch (reg.kind) {
    case RegKind::none:
      break;
    case RegKind::l1:
      return reg.lambda * params.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
    case RegKind::l2:
      return 2.0 * reg.lambda * params;
  }
  return SplineParams::Zero(params.rows(), params.cols());
}

double loss(const SigSplineModel& model, std::span<const Sequence> dataset) {
  double total = 0.0;
  for (std::size_t i = 1; i <= model.dim(); ++i) {
    total += coordinate_loss(model.params(i), build_design(dataset, i, model.shape()));
  }
  return total;
}

std::vector<SplineParams> gradient(const SigSplineModel& model, std::span<const Sequence> dataset) {
  std::vector<SplineParams> out;
  for (std::size_t i = 1; i <= model.dim(); ++i) {
    out.push_back(coordinate_gradient(model.params(i), build_design(dataset, i, model.shape())));
  }
  return out;
}

Eigen::MatrixXd hessian(const SigSplineModel& model, std::span<const Sequence> dataset,
                        std::size_t coordinate) {
  return coordinate_hessian(model.params(coordinate),
                            build_design(dataset, coordinate, model.shape()));
}

double regularized_loss(const SigSplineModel& model, std::span<const Sequence> dataset,
                        const Regularization& reg) {
  double total = loss(model, dataset);
  for (const SplineParams& u : model.all_params()) total += penalty(u, reg);
  return total;
}

std::vector<Sequence> sliding_windows(const Sequence& series, std::size_t window) {
  if (window < 1) throw std::invalid_argument("sliding_windows: window must be >= 1");
  const auto len = static_cast<Eigen::Index>(window + 1);
  if (series.length() < len) {
    throw DataError("series of length " + std::to_string(series.length()) +
                    " is shorter than window + 1 = " + std::to_string(len));
  }
  std::vector<Sequence> out;
  out.reserve(static_cast<std::size_t>(series.length() - len + 1));
  for (Eigen::Index t = 0; t + len <= series.length(); ++t) out.push_back(series.slice(t, len));
  return out;
}

SplitIndices train_test_split(std::size_t samples, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = samples; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(samples)));
  if (n_train == 0 || n_train >= samples) {
    throw DataError("train/test split of " + std::to_string(samples) +
                    " samples leaves one side empty");
  }
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

namespace {

double objective(const SplineParams& u, const Design& d, const Regularization& reg) {
  return coordinate_loss(u, d) + penalty(u, reg);
}

// Damped Newton direction with Armijo backtracking; returns the accepted step.
SplineParams newton_step(const SplineParams& u, const SplineParams& g, const Design& train,
                         const Regularization& reg, double current) {
  Eigen::MatrixXd h = coordinate_hessian(u, train);
  if (reg.kind == RegKind::l2) h.diagonal().array() += 2.0 * reg.lambda;
  // Softmax shift invariance leaves a null space without regularisation.
  h.diagonal().array() += 1e-10 * std::max(1.0, h.diagonal().maxCoeff());
  const Eigen::Map<const Eigen::VectorXd> gv(g.data(), g.size());
  const Eigen::VectorXd dir = h.ldlt().solve(gv);
  const double slope = gv.dot(dir);
  SplineParams step = Eigen::Map<const SplineParams>(dir.data(), u.rows(), u.cols());
  double t = 1.0;
  for (int k = 0; k < 50; ++k) {
    const SplineParams trial = u - t * step;
    const double f = objective(trial, train, reg);
    if (std::isfinite(f) && f <= current - 1e-4 * t * slope) return t * step;
    t *= 0.5;
  }
  return t * step;
}

}  // namespace

CoordinateFit fit_coordinate(const Design& train, const Design& test, const TrainConfig& config,
                             SplineParams init) {
  config.validate();
  CoordinateFit out;
  SplineParams u = std::move(init);
  SplineParams last_finite = u;
  double alpha = config.learning_rate;
  double best_test = std::numeric_limits<double>::infinity();
  double prev_test = best_test;
  std::size_t worsening = 0;
  out.params = u;
  CoordinateTrace& tr = out.trace;
  tr.stopping_iteration = config.max_iters;

  for (std::size_t it = 0; it <= config.max_iters; ++it) {
    double train_obj = NAN;
    SplineParams g;
    if (u.allFinite()) {
      auto [value, grad] = loss_and_gradient(u, train);
      train_obj = value + penalty(u, config.reg);
      g = std::move(grad);
    }
    if (!std::isfinite(train_obj)) {
      if (tr.step_halvings >= 5) {
        throw NumericalError("calibration diverged at iteration " + std::to_string(it) +
                             " after 5 step-size halvings");
      }
      ++tr.step_halvings;
      alpha *= 0.5;
      u = last_finite;
      continue;
    }
    const double test_loss = coordinate_loss(u, test);
    tr.train_loss.push_back(train_obj);
    tr.test_loss.push_back(test_loss);
    if (test_loss < best_test) {
      best_test = test_loss;
      out.params = u;
      tr.best_iteration = it;
    }
    worsening = (tr.test_loss.size() > 1 && test_loss > prev_test) ? worsening + 1 : 0;
    prev_test = test_loss;
    if (worsening >= config.patience || it == config.max_iters) {
      tr.stopping_iteration = it;
      break;
    }
    g += penalty_gradient(u, config.reg);
    if (g.norm() < config.grad_tol) {
      tr.stopping_iteration = it;
      break;
    }
    last_finite = u;
    if (config.optimizer == OptimizerKind::newton) {
      u -= newton_step(u, g, train, config.reg, train_obj);
    } else {
      u -= alpha * g;
    }
  }
  tr.final_learning_rate = alpha;
  return out;
}

namespace {

std::size_t thread_count() {
  if (const char* env = std::getenv("SIGSPLINE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace

FitResult fit(std::span<const Sequence> dataset, const ModelShape& shape,
              const TrainConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const SplitIndices split = train_test_split(dataset.size(), config.train_fraction,
                                              config.rng_seed);
  SigSplineModel model(shape);
  FitReport report;
  report.shape = shape;
  report.config = config;
  report.train_size = split.train.size();
  report.test_size = split.test.size();
  report.coordinates.resize(shape.dim);

  std::vector<Design> train(shape.dim);
  std::vector<Design> test(shape.dim);
  std::vector<std::exception_ptr> errors(shape.dim);

  // Coordinates never share state, so they can run on separate threads.
  auto run = [&](std::size_t i) {
    try {
      const Design full = build_design(dataset, i + 1, shape);
      train[i] = subset(full, split.train);
      test[i] = subset(full, split.test);
      CoordinateFit f = fit_coordinate(train[i], test[i], config, model.params(i + 1));
      model.params(i + 1) = std::move(f.params);
      report.coordinates[i] = std::move(f.trace);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(thread_count(), shape.dim);
  if (workers <= 1) {
    for (std::size_t i = 0; i < shape.dim; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < shape.dim; i += workers) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < shape.dim; ++i) {
    report.train_loss += coordinate_loss(model.params(i + 1), train[i]);
    report.test_loss += coordinate_loss(model.params(i + 1), test[i]);
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return FitResult{std::move(model), std::move(report)};
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  Summary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  // Rounding in the mean can push it a hair outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

MultiSeedResult multi_seed_fit(std::span<const Sequence> dataset, const ModelShape& shape,
                               const TrainConfig& config, std::size_t n_seeds) {
  if (n_seeds < 1) throw std::invalid_argument("multi_seed_fit: need at least one seed");
  MultiSeedResult out;
  std::vector<double> train, test;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    TrainConfig c = config;
    c.rng_seed = config.rng_seed + s;
    out.runs.push_back(fit(dataset, shape, c));
    train.push_back(out.runs.back().report.train_loss);
    test.push_back(out.runs.back().report.test_loss);
  }
  out.train_loss = summarize(train);
  out.test_loss = summarize(test);
  out.best_run = static_cast<std::size_t>(std::min_element(test.begin(), test.end()) - test.begin());
  return out;
}

const char* to_string(RegKind kind) {
  switch (kind) {
    case RegKind::none:
      return "none";
    case RegKind::l1:
      return "l1";
    case RegKind::l2:
      return "l2";
  }
  return "none";
}

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::newton ? "newton" : "gradient_descent";
}

RegKind reg_kind_from_string(const std::string& s) {
  if (s == "none") return RegKind::none;
  if (s == "l1" || s == "L1") return RegKind::l1;
  if (s == "l2" || s == "L2") return RegKind::l2;
  throw std::invalid_argument("unknown reg_kind '" + s + "' (expected none, l1, l2)");
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "gradient_descent") return OptimizerKind::gradient_descent;
  if (s == "newton") return OptimizerKind::newton;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected gradient_descent, newton)");
}

namespace {

using nlohmann::json;

json summary_json(const Summary& s) {
  return json{{"mean", s.mean}, {"std", s.stddev}, {"min", s.min}, {"max", s.max}};
}

json report_json(const FitReport& r) {
  json coords = json::array();
  for (const CoordinateTrace& t : r.coordinates) {
    coords.push_back(json{{"train_loss", t.train_loss},
                          {"test_loss", t.test_loss},
                          {"stopping_iteration", t.stopping_iteration},
                          {"best_iteration", t.best_iteration},
                          {"step_halvings", t.step_halvings},
                          {"final_learning_rate", t.final_learning_rate}});
  }
  const TrainConfig& c = r.config;
  return json{
      {"shape",
       {{"dim", r.shape.dim}, {"level", r.shape.level}, {"bins", r.shape.bins},
        {"window", r.shape.window}}},
      {"parameter_count", parameter_count(r.shape.dim, r.shape.level, r.shape.bins)},
      {"config",
       {{"learning_rate", c.learning_rate},
        {"max_iters", c.max_iters},
        {"patience", c.patience},
        {"reg_kind", to_string(c.reg.kind)},
        {"reg_lambda", c.reg.lambda},
        {"optimizer", to_string(c.optimizer)},
        {"train_fraction", c.train_fraction},
        {"grad_tol", c.grad_tol},
        {"seed", c.rng_seed}}},
      {"train_size", r.train_size},
      {"test_size", r.test_size},
      {"train_loss", r.train_loss},
      {"test_loss", r.test_loss},
      {"coordinates", std::move(coords)}};
}

}  // namespace

std::string fit_report_to_json(const FitReport& report) { return report_json(report).dump(2); }

std::string multi_seed_report_to_json(const MultiSeedResult& result) {
  json runs = json::array();
  json seeds = json::array();
  for (const FitResult& r : result.runs) {
    runs.push_back(report_json(r.report));
    seeds.push_back(r.report.config.rng_seed);
  }
  json j{{"n_seeds", result.runs.size()},
         {"seeds", std::move(seeds)},
         {"train_loss", summary_json(result.train_loss)},
         {"test_loss", summary_json(result.test_loss)},
         {"best_run", result.best_run},
         {"runs", std::move(runs)}};
  return j.dump(2);
}

}  // namespace sigspline

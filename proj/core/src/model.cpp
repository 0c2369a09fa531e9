#include "sigspline/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sigspline/augmentations.hpp"
#include "sigspline/errors.hpp"
#include "sigspline/signature.hpp"
#include "sigspline/tensor_algebra.hpp"

namespace sigspline {

std::size_t ModelShape::features() const { return feature_count(1 + dim, level); }

std::size_t parameter_count(std::size_t dim, std::size_t level, std::size_t bins) {
  return dim * bins * feature_count(1 + dim, level);
}

Preprocessor Preprocessor::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return Preprocessor{Eigen::RowVectorXd::Zero(d), Eigen::RowVectorXd::Ones(d)};
}

Preprocessor Preprocessor::fit(const Sequence& raw) {
  Preprocessor p{raw.values().colwise().minCoeff(), raw.values().colwise().maxCoeff()};
  for (Eigen::Index c = 0; c < raw.channels(); ++c) {
    if (!(p.max[c] > p.min[c])) {
      throw DataError("Preprocessor: channel " + std::to_string(c + 1) + " is constant");
    }
  }
  return p;
}

Sequence Preprocessor::forward(const Sequence& raw) const {
  if (raw.channels() != min.size()) throw DataError("Preprocessor: channel count mismatch");
  Eigen::MatrixXd out(raw.length(), raw.channels());
  for (Eigen::Index c = 0; c < raw.channels(); ++c) {
    const double span = max[c] - min[c];
    for (Eigen::Index t = 0; t < raw.length(); ++t) {
      const double u = (raw(t, c) - min[c]) / span;
      out(t, c) = std::clamp(u, kClampEps, 1.0 - kClampEps);
    }
  }
  return Sequence(std::move(out));
}

Sequence Preprocessor::inverse(const Sequence& unit) const {
  if (unit.channels() != min.size()) throw DataError("Preprocessor: channel count mismatch");
  Eigen::MatrixXd out(unit.length(), unit.channels());
  for (Eigen::Index c = 0; c < unit.channels(); ++c) {
    for (Eigen::Index t = 0; t < unit.length(); ++t) {
      out(t, c) = min[c] + unit(t, c) * (max[c] - min[c]);
    }
  }
  return Sequence(std::move(out));
}

bool operator==(const Preprocessor& a, const Preprocessor& b) {
  return a.min.size() == b.min.size() && a.max.size() == b.max.size() && a.min == b.min &&
         a.max == b.max;
}

namespace {

void validate_shape(const ModelShape& s) {
  if (s.dim < 1) throw std::invalid_argument("SigSplineModel: dim must be >= 1");
  if (s.bins < 1) throw std::invalid_argument("SigSplineModel: bins must be >= 1");
  (void)s.features();  // overflow check
}

}  // namespace

SigSplineModel::SigSplineModel(ModelShape shape)
    : shape_(shape), preprocess_(Preprocessor::identity(shape.dim)) {
  validate_shape(shape_);
  const auto rows = static_cast<Eigen::Index>(shape_.bins);
  const auto cols = static_cast<Eigen::Index>(shape_.features());
  params_.assign(shape_.dim, SplineParams::Zero(rows, cols));
}

SigSplineModel::SigSplineModel(ModelShape shape, std::vector<SplineParams> params,
                               Preprocessor preprocess)
    : shape_(shape), params_(std::move(params)), preprocess_(std::move(preprocess)) {
  validate_shape(shape_);
  if (params_.size() != shape_.dim) {
    throw std::invalid_argument("SigSplineModel: need one parameter matrix per coordinate");
  }
  for (const auto& u : params_) {
    if (u.rows() != static_cast<Eigen::Index>(shape_.bins) ||
        u.cols() != static_cast<Eigen::Index>(shape_.features())) {
      throw std::invalid_argument("SigSplineModel: parameter matrix is not N x f(1+d, L)");
    }
    if (!u.allFinite()) throw std::invalid_argument("SigSplineModel: non-finite parameter");
  }
  set_preprocess(preprocess_);
}

const SplineParams& SigSplineModel::params(std::size_t coordinate) const {
  return params_.at(coordinate - 1);
}

SplineParams& SigSplineModel::params(std::size_t coordinate) { return params_.at(coordinate - 1); }

void SigSplineModel::set_preprocess(Preprocessor p) {
  const auto d = static_cast<Eigen::Index>(shape_.dim);
  if (p.min.size() != d || p.max.size() != d) {
    throw std::invalid_argument("SigSplineModel: preprocessing has the wrong channel count");
  }
  preprocess_ = std::move(p);
}

std::size_t SigSplineModel::parameter_count() const {
  return sigspline::parameter_count(shape_.dim, shape_.level, shape_.bins);
}

Sequence SigSplineModel::condition_window(const Sequence& history) const {
  const auto r = static_cast<Eigen::Index>(shape_.window);
  if (r == 0 || history.length() <= r) return history;
  return history.slice(history.length() - r, r);
}

bool operator==(const SigSplineModel& a, const SigSplineModel& b) {
  if (!(a.shape_ == b.shape_) || !(a.preprocess_ == b.preprocess_)) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    if (a.params_[i] != b.params_[i]) return false;
  }
  return true;
}

Eigen::VectorXd signature_features(const Sequence& path, std::size_t coordinate,
                                   std::size_t level) {
  const TruncatedTensor sig =
      signature(augment(path, static_cast<Eigen::Index>(coordinate)), level);
  const auto c = sig.coeffs();
  return Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}

Eigen::VectorXd feature_map(const Sequence& path, std::size_t coordinate,
                            const SplineParams& params, std::size_t level) {
  const Eigen::VectorXd y = signature_features(path, coordinate, level);
  if (params.cols() != y.size()) {
    throw std::invalid_argument("feature_map: parameter columns do not match feature count");
  }
  return params * y;
}

namespace {

void check_history(const SigSplineModel& model, const Sequence& history) {
  if (history.channels() != static_cast<Eigen::Index>(model.dim())) {
    throw std::invalid_argument("history has " + std::to_string(history.channels()) +
                                " channels, model expects " + std::to_string(model.dim()));
  }
}

}  // namespace

BinIncrements conditional_increments(const SigSplineModel& model, const Sequence& history,
                                     std::span<const double> next_partial,
                                     std::size_t coordinate) {
  check_history(model, history);
  if (coordinate < 1 || coordinate > model.dim()) {
    throw std::invalid_argument("conditional_increments: coordinate out of range");
  }
  if (next_partial.size() + 1 < coordinate) {
    throw std::invalid_argument("conditional_increments: missing leading coordinates");
  }
  const Sequence window = model.condition_window(history);
  Eigen::RowVectorXd candidate = window.row(window.length() - 1);
  for (std::size_t c = 0; c + 1 < coordinate; ++c) {
    candidate[static_cast<Eigen::Index>(c)] = next_partial[c];
  }
  const Eigen::VectorXd logits = feature_map(window.appended(candidate), coordinate,
                                             model.params(coordinate), model.shape().level);
  return softmax(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
}

double log_likelihood(const SigSplineModel& model, const Sequence& x) {
  if (x.length() < 2) throw std::invalid_argument("log_likelihood: need at least two rows");
  const Sequence history = x.slice(0, x.length() - 1);
  const Eigen::RowVectorXd next = x.row(x.length() - 1);
  const std::span<const double> partial(next.data(), static_cast<std::size_t>(next.size()));
  const double log_bins = std::log(static_cast<double>(model.shape().bins));
  double total = 0.0;
  for (std::size_t i = 1; i <= model.dim(); ++i) {
    const BinIncrements delta = conditional_increments(model, history, partial, i);
    const double xi = next[static_cast<Eigen::Index>(i - 1)];
    total += log_bins + std::log(delta[bin_index(xi, delta.bins())]);
  }
  return total;
}

Eigen::RowVectorXd sample_step(const SigSplineModel& model, const Sequence& history,
                               std::span<const double> u) {
  if (u.size() != model.dim()) throw std::invalid_argument("sample_step: need d uniforms");
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(model.dim()));
  std::vector<double> partial;
  partial.reserve(model.dim());
  for (std::size_t i = 1; i <= model.dim(); ++i) {
    const BinIncrements delta = conditional_increments(model, history, partial, i);
    const double xi = spline_inverse(u[i - 1], delta);
    out[static_cast<Eigen::Index>(i - 1)] = xi;
    partial.push_back(xi);
  }
  return out;
}

Sequence generate(const SigSplineModel& model, const Sequence& history, std::size_t horizon,
                  std::uint64_t rng_seed) {
  check_history(model, history);
  if (horizon < 1) throw std::invalid_argument("generate: horizon must be >= 1");
  Rng rng(rng_seed);
  const Eigen::Index start = history.length();
  Eigen::MatrixXd values(start + static_cast<Eigen::Index>(horizon), history.channels());
  values.topRows(start) = history.values();
  std::vector<double> u(model.dim());
  for (std::size_t h = 0; h < horizon; ++h) {
    const Eigen::Index t = start + static_cast<Eigen::Index>(h);
    for (double& v : u) v = rng.uniform();
    const Sequence so_far(values.topRows(t));
    values.row(t) = sample_step(model, so_far, u);
  }
  return Sequence(std::move(values));
}

namespace {

using nlohmann::json;

std::vector<double> to_vector(const Eigen::RowVectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::RowVectorXd to_row(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string model_to_json(const SigSplineModel& model) {
  const ModelShape& s = model.shape();
  json j;
  j["format"] = "sigspline-model";
  j["version"] = 1;
  j["dim"] = s.dim;
  j["level"] = s.level;
  j["bins"] = s.bins;
  j["window"] = s.window;
  j["feature_count"] = s.features();
  j["channel_min"] = to_vector(model.preprocess().min);
  j["channel_max"] = to_vector(model.preprocess().max);
  json params = json::array();
  for (const SplineParams& u : model.all_params()) {
    params.push_back(std::vector<double>(u.data(), u.data() + u.size()));
  }
  j["params"] = std::move(params);
  return j.dump(2);
}

SigSplineModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "sigspline-model" || j.at("version").get<int>() != 1) {
      throw DataError("model: unsupported format or version");
    }
    ModelShape s;
    s.dim = j.at("dim").get<std::size_t>();
    s.level = j.at("level").get<std::size_t>();
    s.bins = j.at("bins").get<std::size_t>();
    s.window = j.at("window").get<std::size_t>();
    if (j.at("feature_count").get<std::size_t>() != s.features()) {
      throw DataError("model: feature_count does not match f(1 + dim, level)");
    }
    Preprocessor p{to_row(j.at("channel_min").get<std::vector<double>>()),
                   to_row(j.at("channel_max").get<std::vector<double>>())};
    const auto& arr = j.at("params");
    if (!arr.is_array() || arr.size() != s.dim) {
      throw DataError("model: params must hold one matrix per coordinate");
    }
    const auto rows = static_cast<Eigen::Index>(s.bins);
    const auto cols = static_cast<Eigen::Index>(s.features());
    std::vector<SplineParams> params;
    for (const auto& m : arr) {
      const auto flat = m.get<std::vector<double>>();
      if (flat.size() != s.bins * s.features()) {
        throw DataError("model: parameter matrix has the wrong number of entries");
      }
      params.emplace_back(Eigen::Map<const SplineParams>(flat.data(), rows, cols));
    }
    return SigSplineModel(s, std::move(params), std::move(p));
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void save_model(const SigSplineModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << model_to_json(model) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

SigSplineModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace sigspline

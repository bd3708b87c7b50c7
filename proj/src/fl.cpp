#include "feel/fl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "feel/rng.hpp"
#include "feel/textio.hpp"

namespace feel {

namespace {

/// Views of the four parameter blocks inside the flat vector.
struct Layers {
  Eigen::Map<const Mat> w1;
  Eigen::Map<const Vec> b1;
  Eigen::Map<const Mat> w2;
  Eigen::Map<const Vec> b2;
};

Layers map_layers(const ModelDims &d, const Vec &params) {
  const double *p = params.data();
  const Eigen::Index n1 = static_cast<Eigen::Index>(d.input_dim) * d.hidden_dim;
  const Eigen::Index n2 = static_cast<Eigen::Index>(d.hidden_dim) * d.num_classes;
  return Layers{
      Eigen::Map<const Mat>(p, d.input_dim, d.hidden_dim),
      Eigen::Map<const Vec>(p + n1, d.hidden_dim),
      Eigen::Map<const Mat>(p + n1 + d.hidden_dim, d.hidden_dim, d.num_classes),
      Eigen::Map<const Vec>(p + n1 + d.hidden_dim + n2, d.num_classes)};
}

struct LayerGrads {
  Eigen::Map<Mat> w1;
  Eigen::Map<Vec> b1;
  Eigen::Map<Mat> w2;
  Eigen::Map<Vec> b2;
};

LayerGrads map_layers(const ModelDims &d, Vec &params) {
  double *p = params.data();
  const Eigen::Index n1 = static_cast<Eigen::Index>(d.input_dim) * d.hidden_dim;
  const Eigen::Index n2 = static_cast<Eigen::Index>(d.hidden_dim) * d.num_classes;
  return LayerGrads{
      Eigen::Map<Mat>(p, d.input_dim, d.hidden_dim),
      Eigen::Map<Vec>(p + n1, d.hidden_dim),
      Eigen::Map<Mat>(p + n1 + d.hidden_dim, d.hidden_dim, d.num_classes),
      Eigen::Map<Vec>(p + n1 + d.hidden_dim + n2, d.num_classes)};
}

/// Row-stable softmax cross-entropy. Fills `probs` (batch x classes) and
/// returns the mean loss.
double forward(const ModelDims &d, const Vec &params, const Mat &x,
               std::span<const int> y, Mat &hidden, Mat &probs) {
  const Layers L = map_layers(d, params);
  hidden = ((x * L.w1).rowwise() + L.b1.transpose()).cwiseMax(0.0);
  Mat logits = (hidden * L.w2).rowwise() + L.b2.transpose();
  const Vec row_max = logits.rowwise().maxCoeff();
  logits.colwise() -= row_max;
  const Mat exps = logits.array().exp().matrix();
  const Vec denom = exps.rowwise().sum();
  probs = exps.array().colwise() / denom.array();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    loss += std::log(denom[i]) - logits(i, y[static_cast<std::size_t>(i)]);
  return loss / static_cast<double>(x.rows());
}

} // namespace

void ModelDims::validate() const {
  if (input_dim <= 0 || hidden_dim <= 0 || num_classes <= 0)
    throw std::invalid_argument("model dims must be positive");
}

void Dataset::validate() const {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("dataset: feature rows and label count differ");
  for (int label : labels)
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("dataset: label outside [0, num_classes)");
}

GlobalModel init_model(const ModelDims &dims, std::uint64_t seed) {
  dims.validate();
  GlobalModel m;
  m.dims = dims;
  m.params = Vec::Zero(dims.param_count());
  Rng rng(seed);
  LayerGrads L = map_layers(dims, m.params);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(dims.input_dim));
  for (Eigen::Index i = 0; i < L.w1.size(); ++i)
    L.w1.data()[i] = rng.uniform(-s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(dims.hidden_dim));
  for (Eigen::Index i = 0; i < L.w2.size(); ++i)
    L.w2.data()[i] = rng.uniform(-s2, s2);
  return m;
}

double loss_and_gradient(const ModelDims &dims, const Vec &params,
                         const Mat &features, std::span<const int> labels,
                         Vec &grad) {
  if (features.rows() == 0)
    throw std::invalid_argument("loss_and_gradient: empty batch");
  if (params.size() != dims.param_count())
    throw std::invalid_argument("loss_and_gradient: parameter size mismatch");
  Mat hidden, probs;
  const double loss = forward(dims, params, features, labels, hidden, probs);

  const double inv_batch = 1.0 / static_cast<double>(features.rows());
  Mat dlogits = probs;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    dlogits(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  dlogits *= inv_batch;

  grad.resize(dims.param_count());
  const Layers L = map_layers(dims, params);
  LayerGrads G = map_layers(dims, grad);
  G.w2 = hidden.transpose() * dlogits;
  G.b2 = dlogits.colwise().sum();
  Mat dhidden = dlogits * L.w2.transpose();
  dhidden = (hidden.array() > 0.0).select(dhidden, 0.0);
  G.w1 = features.transpose() * dhidden;
  G.b1 = dhidden.colwise().sum();
  return loss;
}

double batch_loss(const ModelDims &dims, const Vec &params,
                  const Mat &features, std::span<const int> labels) {
  Mat hidden, probs;
  return forward(dims, params, features, labels, hidden, probs);
}

LocalUpdate local_train(const GlobalModel &model, const Dataset &data,
                        int epochs, double learning_rate, int batch_size,
                        std::uint64_t seed, int device_id) {
  data.validate();
  if (data.size() == 0)
    throw std::invalid_argument("local_train: empty dataset");
  if (epochs < 1)
    throw std::invalid_argument("local_train: epochs must be >= 1");
  if (batch_size < 1)
    throw std::invalid_argument("local_train: batch size must be >= 1");

  const Eigen::Index n = data.size();
  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  Vec params = model.params;
  Vec grad;
  Mat batch_x;
  std::vector<int> batch_y;
  double epoch_loss = 0.0;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(batch_size, n - start);
      batch_x.resize(len, data.features.cols());
      batch_y.resize(static_cast<std::size_t>(len));
      for (Eigen::Index i = 0; i < len; ++i) {
        const int src = order[static_cast<std::size_t>(start + i)];
        batch_x.row(i) = data.features.row(src);
        batch_y[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(src)];
      }
      const double loss = loss_and_gradient(model.dims, params, batch_x, batch_y, grad);
      loss_sum += loss * static_cast<double>(len);
      params.noalias() -= learning_rate * grad;
    }
    epoch_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("local_train: loss diverged at epoch " +
                               std::to_string(epoch + 1));
  }
  return LocalUpdate{device_id, std::move(params), static_cast<std::int64_t>(n),
                     epoch_loss};
}

GlobalModel fedavg_aggregate(const std::vector<LocalUpdate> &updates,
                             const ModelDims &dims, int version) {
  if (updates.empty())
    throw std::invalid_argument("fedavg_aggregate: no updates");
  std::int64_t total = 0;
  for (const LocalUpdate &u : updates) {
    if (u.params.size() != dims.param_count())
      throw std::invalid_argument("fedavg_aggregate: update shape mismatch for device " +
                                  std::to_string(u.device_id));
    if (u.dataset_size <= 0)
      throw std::invalid_argument("fedavg_aggregate: non-positive dataset size");
    total += u.dataset_size;
  }
  GlobalModel out;
  out.dims = dims;
  out.version = version;
  out.params = Vec::Zero(dims.param_count());
  // Fixed summation order keeps aggregation reproducible.
  for (const LocalUpdate &u : updates) {
    const double w = static_cast<double>(u.dataset_size) / static_cast<double>(total);
    out.params.noalias() += w * u.params;
  }
  return out;
}

EvalResult evaluate(const GlobalModel &model, const Dataset &test) {
  test.validate();
  if (test.size() == 0)
    throw std::invalid_argument("evaluate: empty test set");
  Mat hidden, probs;
  EvalResult r;
  r.loss = forward(model.dims, model.params, test.features, test.labels, hidden, probs);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c)
      if (probs(i, c) > probs(i, best)) // strict: ties keep the lowest class
        best = static_cast<int>(c);
    if (best == test.labels[static_cast<std::size_t>(i)])
      ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  return r;
}

void save_model(const GlobalModel &model, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("save_model: cannot open " + path);
  out << "feelmodel 1\n"
      << model.dims.input_dim << ' ' << model.dims.hidden_dim << ' '
      << model.dims.num_classes << ' ' << model.version << '\n';
  for (Eigen::Index i = 0; i < model.params.size(); ++i)
    out << format_double(model.params[i]) << '\n';
  if (!out)
    throw std::runtime_error("save_model: write failed for " + path);
}

GlobalModel load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_model: cannot open " + path);
  std::string magic;
  int fmt = 0;
  in >> magic >> fmt;
  if (magic != "feelmodel" || fmt != 1)
    throw std::runtime_error("load_model: unrecognized checkpoint header");
  GlobalModel m;
  in >> m.dims.input_dim >> m.dims.hidden_dim >> m.dims.num_classes >> m.version;
  m.dims.validate();
  m.params.resize(m.dims.param_count());
  std::string token;
  for (Eigen::Index i = 0; i < m.params.size(); ++i) {
    if (!(in >> token))
      throw std::runtime_error("load_model: truncated checkpoint");
    double v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc())
      throw std::runtime_error("load_model: malformed number '" + token + "'");
    m.params[i] = v;
  }
  return m;
}

} // namespace feel

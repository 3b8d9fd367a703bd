#include "htc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include "htc/rng.hpp"

namespace htc {

namespace {

void check_dataset(const Dataset& ds) {
  if (ds.samples.empty()) throw Error("EmptyInput", "dataset has no samples");
  for (const auto& s : ds.samples) {
    if (s.features.size() != ds.dim) {
      throw Error("DimensionMismatch", "inconsistent feature dimension in dataset");
    }
  }
}

bool needs_single_path(LossKind k) {
  return k == LossKind::leaf_softmax || k == LossKind::cond_softmax ||
         k == LossKind::cond_softmax_la;
}

void check_regime(const Dataset& ds, const Hierarchy& h, LossKind kind) {
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const LabelSet& labels = ds.samples[i].labels;
    if (needs_single_path(kind)) {
      if (!is_single_path_leaf(h, labels)) {
        throw Error("IncompatibleLossForDataset",
                    "this loss needs single-path-leaf labels", "sample " + std::to_string(i));
      }
    } else if (!is_coherent(h, labels)) {
      throw Error("IncompatibleLossForDataset", "this loss needs coherent labels",
                  "sample " + std::to_string(i));
    }
  }
}

/// Loss and full-logit gradient for one sample under any loss kind.  For
/// leaf_softmax the leaf-indexed gradient is scattered back into the full
/// logit layout; internal-node slots stay zero.
LossOutput sample_loss(const Hierarchy& h, LossKind kind, const Logits& s,
                       const LabelSet& labels, const Prior* prior, double lambda) {
  switch (kind) {
    case LossKind::bce:
      return bce_loss(h, s, labels);
    case LossKind::champ:
      return champ_loss(h, s, labels, lambda);
    case LossKind::cond_softmax:
      return cond_softmax_loss(h, s, labels, nullptr);
    case LossKind::cond_softmax_la:
      return cond_softmax_loss(h, s, labels, prior);
    case LossKind::cond_sigmoid:
      return cond_sigmoid_loss(h, s, labels);
    case LossKind::leaf_softmax: {
      const auto& leaves = h.leaf_ids();
      Eigen::VectorXd leaf_s(static_cast<Eigen::Index>(leaves.size()));
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        leaf_s[static_cast<Eigen::Index>(i)] = s[slot(leaves[i])];
      }
      LossOutput leaf_out = leaf_softmax_loss(h, leaf_s, labels);
      LossOutput out;
      out.value = leaf_out.value;
      out.grad = Eigen::VectorXd::Zero(h.label_count());
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        out.grad[slot(leaves[i])] = leaf_out.grad[static_cast<Eigen::Index>(i)];
      }
      return out;
    }
  }
  throw Error("IncompatibleLossForDataset", "unknown loss kind");
}

}  // namespace

Logits forward(const LinearModel& model, const Eigen::VectorXd& features) {
  if (model.weight.cols() != features.size() || model.weight.rows() != model.bias.size()) {
    throw Error("DimensionMismatch", "model and feature dimensions disagree");
  }
  return model.weight * features + model.bias;
}

TrainResult train(const Dataset& ds, const Hierarchy& h, const TrainConfig& cfg) {
  check_dataset(ds);
  check_regime(ds, h, cfg.loss);
  if (cfg.learning_rate < 0 || cfg.epochs < 0 || cfg.batch_size < 1) {
    throw Error("DimensionMismatch", "invalid training configuration");
  }

  const Eigen::Index m = h.label_count();
  const Eigen::Index d = ds.dim;
  TrainResult res;
  res.model.loss = cfg.loss;
  res.model.linear.weight = Eigen::MatrixXd::Zero(m, d);
  res.model.linear.bias = Eigen::VectorXd::Zero(m);

  const Prior* prior = nullptr;
  if (cfg.loss == LossKind::cond_softmax_la) {
    std::vector<LabelSet> sets;
    sets.reserve(ds.samples.size());
    for (const auto& s : ds.samples) sets.push_back(s.labels);
    res.model.prior = estimate_prior(h, sets, Smoothing::laplace1);
    res.model.prior.tau = cfg.tau_adjust;
    res.model.has_prior = true;
    prior = &res.model.prior;
  }

  DetRng rng(cfg.seed);
  const std::size_t n = ds.samples.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});

  Eigen::MatrixXd grad_w(m, d);
  Eigen::VectorXd grad_b(m);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(idx);
    double epoch_sum = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      grad_w.setZero();
      grad_b.setZero();
      for (std::size_t k = start; k < stop; ++k) {
        const Sample& sample = ds.samples[idx[k]];
        Logits s = forward(res.model.linear, sample.features);
        LossOutput lo = sample_loss(h, cfg.loss, s, sample.labels, prior, cfg.lambda_champ);
        epoch_sum += lo.value;
        grad_w.noalias() += lo.grad * sample.features.transpose();
        grad_b += lo.grad;
      }
      double scale = cfg.learning_rate / static_cast<double>(stop - start);
      res.model.linear.weight -= scale * grad_w;
      res.model.linear.bias -= scale * grad_b;
    }
    res.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
  }
  return res;
}

Dataset generate_synthetic(const Hierarchy& h, int n, int d, double noise_sigma,
                           double imbalance_alpha, std::uint64_t seed) {
  if (d < 1 || n < 0) {
    throw Error("DimensionMismatch", "need d >= 1 and n >= 0");
  }
  DetRng rng(seed);
  const auto& leaves = h.leaf_ids();
  const int n_leaves = static_cast<int>(leaves.size());

  std::vector<int> order(static_cast<std::size_t>(n_leaves));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  // order[r-1] is the leaf position with frequency rank r (rank 1 = head).
  Eigen::VectorXd weight(n_leaves);
  for (int r = 1; r <= n_leaves; ++r) {
    weight[order[static_cast<std::size_t>(r - 1)]] =
        std::pow(static_cast<double>(r), -imbalance_alpha);
  }
  weight /= weight.sum();
  Eigen::VectorXd cumulative(n_leaves);
  double acc = 0;
  for (int i = 0; i < n_leaves; ++i) {
    acc += weight[i];
    cumulative[i] = acc;
  }

  Eigen::MatrixXd prototypes(n_leaves, d);
  for (int i = 0; i < n_leaves; ++i) {
    for (int j = 0; j < d; ++j) prototypes(i, j) = rng.normal();
    double norm = prototypes.row(i).norm();
    if (norm == 0) {
      prototypes(i, 0) = 1.0;
      norm = 1.0;
    }
    prototypes.row(i) /= norm;
  }

  Dataset ds;
  ds.dim = d;
  ds.samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    int pos = 0;
    while (pos + 1 < n_leaves && u >= cumulative[pos]) ++pos;
    Sample sample;
    sample.features.resize(d);
    for (int j = 0; j < d; ++j) sample.features[j] = rng.normal();
    sample.features = prototypes.row(pos).transpose() + noise_sigma * sample.features;
    sample.labels = path_set(h, leaves[static_cast<std::size_t>(pos)]);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

MarginalTable model_marginals(const TrainedModel& tm, const Hierarchy& h,
                              const Eigen::VectorXd& features) {
  Logits s = forward(tm.linear, features);
  switch (tm.loss) {
    case LossKind::bce:
    case LossKind::champ:
      return sigmoid_marginals(s);
    case LossKind::cond_sigmoid:
      return cond_sigmoid_marginals(h, s);
    case LossKind::cond_softmax:
    case LossKind::cond_softmax_la:
      // The prior shift is a training-time correction; inference uses the
      // model's balanced conditionals.
      return cond_softmax_forward(h, s, nullptr).second;
    case LossKind::leaf_softmax: {
      const auto& leaves = h.leaf_ids();
      Eigen::VectorXd leaf_s(static_cast<Eigen::Index>(leaves.size()));
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        leaf_s[static_cast<Eigen::Index>(i)] = s[slot(leaves[i])];
      }
      return leaf_softmax_marginals(h, leaf_s);
    }
  }
  throw Error("IncompatibleLossForDataset", "unknown loss kind");
}

Evaluation evaluate_model(const TrainedModel& tm, const Dataset& ds, const Hierarchy& h,
                          const InferenceRule& rule) {
  check_dataset(ds);
  if (tm.linear.weight.cols() != ds.dim || tm.linear.weight.rows() != h.label_count()) {
    throw Error("DimensionMismatch", "model does not match dataset or hierarchy");
  }

  std::vector<MarginalTable> margs;
  margs.reserve(ds.samples.size());
  std::vector<EvalPair> pairs;
  pairs.reserve(ds.samples.size());
  std::vector<LabelSet> truths;
  truths.reserve(ds.samples.size());

  for (const auto& sample : ds.samples) {
    MarginalTable marg = model_marginals(tm, h, sample.features);
    LabelSet pred;
    if (rule.kind == InferenceRule::Kind::topdown) {
      Logits s = forward(tm.linear, sample.features);
      CondTable cond;
      if (tm.loss == LossKind::cond_softmax || tm.loss == LossKind::cond_softmax_la) {
        cond = cond_softmax_forward(h, s, nullptr).first;
      } else if (tm.loss == LossKind::cond_sigmoid) {
        cond.cond.resize(h.label_count());
        for (Eigen::Index i = 0; i < s.size(); ++i) {
          cond.cond[i] = 1.0 / (1.0 + std::exp(-s[i]));
        }
      } else {
        cond = conditionals_from_marginals(h, marg);
      }
      pred = topdown_predict(cond, h);
    } else {
      pred = threshold_predict(marg, rule.tau);
    }
    pairs.push_back({sample.labels, pred});
    truths.push_back(sample.labels);
    margs.push_back(std::move(marg));
  }

  Evaluation out;
  out.report = evaluate(pairs, h, /*macro_skip_absent=*/false);
  if (rule.kind == InferenceRule::Kind::auc) {
    out.curve = hf1_pr_curve(h, margs, truths);
  }
  return out;
}

namespace {

template <typename T>
void write_raw(std::ofstream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& is, T& value) {
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
}

constexpr char kMagic[4] = {'H', 'T', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_model(const TrainedModel& tm, const Hierarchy& h, const std::string& path) {
  if (tm.linear.weight.rows() != h.label_count() ||
      tm.linear.bias.size() != h.label_count()) {
    throw Error("DimensionMismatch", "model does not match the hierarchy");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("BadModelFile", "cannot open " + path + " for writing");
  os.write(kMagic, 4);
  write_raw(os, kVersion);
  write_raw(os, static_cast<std::int32_t>(tm.loss));
  write_raw(os, static_cast<std::uint64_t>(tm.linear.weight.rows()));
  write_raw(os, static_cast<std::uint64_t>(tm.linear.weight.cols()));
  write_raw(os, static_cast<std::uint64_t>(h.node_count()));
  for (NodeId y = 0; y < h.node_count(); ++y) {
    const std::string& name = h.name(y);
    write_raw(os, static_cast<std::uint64_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (Eigen::Index r = 0; r < tm.linear.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < tm.linear.weight.cols(); ++c) {
      write_raw(os, tm.linear.weight(r, c));
    }
  }
  for (Eigen::Index i = 0; i < tm.linear.bias.size(); ++i) write_raw(os, tm.linear.bias[i]);
  if (!os) throw Error("BadModelFile", "failed writing " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("BadModelFile", "cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error("BadModelFile", "not a model checkpoint: " + path);
  }
  std::uint32_t version = 0;
  read_raw(is, version);
  if (version != kVersion) {
    throw Error("BadModelFile", "unsupported checkpoint version " + std::to_string(version));
  }
  std::int32_t loss_kind = 0;
  read_raw(is, loss_kind);
  if (loss_kind < 0 || loss_kind > 5) {
    throw Error("BadModelFile", "unknown loss kind in checkpoint");
  }
  std::uint64_t rows = 0, cols = 0, names = 0;
  read_raw(is, rows);
  read_raw(is, cols);
  read_raw(is, names);
  if (!is || names != rows + 1) {
    throw Error("BadModelFile", "corrupt checkpoint header");
  }
  LoadedModel out;
  out.model.loss = static_cast<LossKind>(loss_kind);
  out.node_names.reserve(names);
  for (std::uint64_t i = 0; i < names; ++i) {
    std::uint64_t len = 0;
    read_raw(is, len);
    std::string name(len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(len));
    out.node_names.push_back(std::move(name));
  }
  out.model.linear.weight.resize(static_cast<Eigen::Index>(rows),
                                 static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < out.model.linear.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.model.linear.weight.cols(); ++c) {
      read_raw(is, out.model.linear.weight(r, c));
    }
  }
  out.model.linear.bias.resize(static_cast<Eigen::Index>(rows));
  for (Eigen::Index i = 0; i < out.model.linear.bias.size(); ++i) {
    read_raw(is, out.model.linear.bias[i]);
  }
  if (!is) throw Error("BadModelFile", "truncated checkpoint: " + path);
  return out;
}

}  // namespace htc

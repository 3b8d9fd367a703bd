#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "htc/inference.hpp"
#include "htc/losses.hpp"
#include "htc/metrics.hpp"

namespace htc {

/// One training instance: a precomputed feature vector and coherent labels.
struct Sample {
  Eigen::VectorXd features;
  LabelSet labels;
};

struct Dataset {
  std::vector<Sample> samples;
  Eigen::Index dim = 0;
};

/// The linear score head s = W * features + bias, one row per non-root node.
struct LinearModel {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

enum class LossKind : int {
  bce = 0,
  champ = 1,
  leaf_softmax = 2,
  cond_softmax = 3,
  cond_softmax_la = 4,
  cond_sigmoid = 5,
};

struct TrainConfig {
  LossKind loss = LossKind::cond_softmax;
  double learning_rate = 0.1;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double tau_adjust = 1.0;   // prior scale for cond_softmax_la
  double lambda_champ = 1.0;  // distance weight for champ
};

/// A linear model together with the loss it was trained under.  The prior is
/// populated only for cond_softmax_la, estimated from the training split.
struct TrainedModel {
  LinearModel linear;
  LossKind loss = LossKind::cond_softmax;
  Prior prior;
  bool has_prior = false;
};

struct TrainResult {
  TrainedModel model;
  std::vector<double> epoch_loss;  // mean per-sample loss, one entry per epoch
};

/// s = W * features + bias.
Logits forward(const LinearModel& model, const Eigen::VectorXd& features);

/// Deterministic mini-batch gradient descent.  Batches are drawn from a
/// seeded shuffle each epoch; gradients are averaged per batch in index
/// order, so identical inputs and seed give a bitwise-identical model.
/// Throws IncompatibleLossForDataset when the labels do not fit the loss
/// regime (softmax losses need single-path-leaf sets, all others coherence).
TrainResult train(const Dataset& ds, const Hierarchy& h, const TrainConfig& cfg);

/// Synthetic single-path-leaf dataset: leaf frequencies follow a power law
/// rank^(-imbalance_alpha) over a seeded random leaf order, each sample is
/// its leaf's unit-norm prototype plus isotropic Gaussian noise of scale
/// noise_sigma, and labels are the leaf's ancestor chain.  Deterministic per
/// seed: prototypes are drawn first (leaf-id order), then samples in order,
/// each as one leaf draw followed by its noise vector.
Dataset generate_synthetic(const Hierarchy& h, int n, int d, double noise_sigma,
                           double imbalance_alpha, std::uint64_t seed);

struct InferenceRule {
  enum class Kind { threshold, topdown, auc } kind = Kind::threshold;
  double tau = 0.5;
};

struct Evaluation {
  EvalReport report;
  std::optional<PRCurve> curve;  // present in auc mode
};

/// Scores every sample, converts logits to marginals with the
/// loss-appropriate forward (sigmoids for flat losses, chained conditionals
/// for the conditional models, leaf softmax mass for leaf_softmax), applies
/// the inference rule, and evaluates against the dataset labels.  The
/// logit-adjusted model is evaluated without its prior shift: the adjustment
/// is a training-time reweighting, and inference uses the balanced
/// conditionals.
Evaluation evaluate_model(const TrainedModel& tm, const Dataset& ds, const Hierarchy& h,
                          const InferenceRule& rule);

/// Marginals for one feature vector under the model's loss regime.
MarginalTable model_marginals(const TrainedModel& tm, const Hierarchy& h,
                              const Eigen::VectorXd& features);

/// Binary checkpoint with a versioned header: magic, version, loss kind,
/// dimensions, node names in id order, then W row-major and b.  The prior is
/// not persisted; it is a training-time construct.
void save_model(const TrainedModel& tm, const Hierarchy& h, const std::string& path);

struct LoadedModel {
  TrainedModel model;
  std::vector<std::string> node_names;  // id order, root first
};

/// Reads a checkpoint, validating magic and version (BadModelFile).
LoadedModel load_model(const std::string& path);

}  // namespace htc

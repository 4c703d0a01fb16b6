#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpcfe/hpcfe.hpp"

namespace hpcfe {

struct FidelityLevel {
  int level = 1;  // 1 = lowest fidelity
  std::string label;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

// Levels ordered lowest to highest fidelity over shared bounds.
struct FidelityDataset {
  InputBounds bounds;
  std::vector<FidelityLevel> levels;

  Eigen::Index dim() const { return bounds.dim(); }
  // Throws on structural problems; returns soft warnings (e.g. a higher
  // level holding more samples than the one below it).
  std::vector<std::string> validate() const;
};

struct CascadeOptions {
  // One config per level, or a single config used for every level.
  std::vector<HpcfeConfig> configs = {HpcfeConfig{}};
  // Stages 2..M run as GP-only (zero-mean) models.
  bool modified = false;
  // Augmented columns are normalized over a box centred on the stage's
  // training mean; its half-width is the largest deviation of the lower
  // stage's predictions over all levels' inputs, enlarged by this fraction.
  double augmented_padding = 0.1;
};

struct CascadePrediction {
  std::vector<Prediction> levels;  // index 0 = level 1
  const Prediction& top() const { return levels.back(); }
};

// Deep H-PCFE: stage i sees [x, f_{i-1}(x), ..., f_1(x)], where f_j is the
// cascade's mean prediction at level j.
class DeepHpcfeModel {
public:
  DeepHpcfeModel(InputBounds bounds, std::vector<HpcfeModel> stages, bool modified,
                 std::vector<std::string> labels = {});

  const InputBounds& bounds() const { return bounds_; }
  const std::vector<HpcfeModel>& stages() const { return stages_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool modified() const { return modified_; }
  std::size_t level_count() const { return stages_.size(); }
  Eigen::Index input_dim() const { return bounds_.dim(); }

  CascadePrediction predict(const Eigen::MatrixXd& x) const;

  // Input matrix fed to stage `stage` (0-based) for queries x, given the
  // mean predictions of the lower stages (lower_means[j] = level j + 1).
  static Eigen::MatrixXd augment(const Eigen::MatrixXd& x,
                                 const std::vector<Eigen::VectorXd>& lower_means);

private:
  InputBounds bounds_;
  std::vector<HpcfeModel> stages_;
  bool modified_;
  std::vector<std::string> labels_;
};

struct CascadeTrainResult {
  DeepHpcfeModel model;
  std::vector<std::string> warnings;
};

CascadeTrainResult train_cascade(const CascadeOptions& options, const FidelityDataset& data);

}  // namespace hpcfe

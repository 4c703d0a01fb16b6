#include "hpcfe/cascade.hpp"

#include <sstream>

#include "hpcfe/error.hpp"

namespace hpcfe {

std::vector<std::string> FidelityDataset::validate() const {
  bounds.validate();
  if (levels.empty()) throw ValidationError("dataset: no fidelity levels");
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& lv = levels[i];
    std::ostringstream where;
    where << "dataset level " << i + 1;
    if (lv.level != static_cast<int>(i) + 1) {
      std::ostringstream os;
      os << where.str() << ": found fidelity label " << lv.level
         << "; levels must be ordered 1..M from lowest to highest fidelity";
      throw ValidationError(os.str());
    }
    if (lv.x.rows() == 0) throw ValidationError(where.str() + ": empty level");
    if (lv.x.cols() != bounds.dim()) throw ValidationError(where.str() + ": input dimension mismatch");
    if (lv.y.size() != lv.x.rows()) throw ValidationError(where.str() + ": output length mismatch");
    if (i > 0 && lv.x.rows() > levels[i - 1].x.rows()) {
      std::ostringstream os;
      os << where.str() << " has more samples (" << lv.x.rows() << ") than level " << i << " ("
         << levels[i - 1].x.rows() << ")";
      warnings.push_back(os.str());
    }
  }
  return warnings;
}

DeepHpcfeModel::DeepHpcfeModel(InputBounds bounds, std::vector<HpcfeModel> stages, bool modified,
                               std::vector<std::string> labels)
    : bounds_(std::move(bounds)), stages_(std::move(stages)), modified_(modified), labels_(std::move(labels)) {
  bounds_.validate();
  if (stages_.empty()) throw ValidationError("cascade: no stages");
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (stages_[i].input_dim() != bounds_.dim() + static_cast<Eigen::Index>(i)) {
      std::ostringstream os;
      os << "cascade: stage " << i + 1 << " has input dimension " << stages_[i].input_dim()
         << ", expected " << bounds_.dim() + static_cast<Eigen::Index>(i);
      throw ValidationError(os.str());
    }
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < stages_.size(); ++i) labels_.push_back("level" + std::to_string(i + 1));
  }
  if (labels_.size() != stages_.size()) throw ValidationError("cascade: label count mismatch");
}

Eigen::MatrixXd DeepHpcfeModel::augment(const Eigen::MatrixXd& x,
                                        const std::vector<Eigen::VectorXd>& lower_means) {
  Eigen::MatrixXd out(x.rows(), x.cols() + static_cast<Eigen::Index>(lower_means.size()));
  out.leftCols(x.cols()) = x;
  // Most recent level first: [x, f_{i-1}, ..., f_1].
  for (std::size_t k = 0; k < lower_means.size(); ++k) {
    out.col(x.cols() + static_cast<Eigen::Index>(k)) = lower_means[lower_means.size() - 1 - k];
  }
  return out;
}

CascadePrediction DeepHpcfeModel::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != bounds_.dim()) {
    std::ostringstream os;
    os << "cascade predict: query has " << x.cols() << " columns, model expects " << bounds_.dim();
    throw ValidationError(os.str());
  }
  CascadePrediction out;
  std::vector<Eigen::VectorXd> means;
  for (const auto& stage : stages_) {
    Prediction p = stage.predict(augment(x, means));
    means.push_back(p.mean);
    out.levels.push_back(std::move(p));
  }
  return out;
}

CascadeTrainResult train_cascade(const CascadeOptions& options, const FidelityDataset& data) {
  auto warnings = data.validate();
  const std::size_t levels = data.levels.size();
  if (options.configs.size() != 1 && options.configs.size() != levels) {
    std::ostringstream os;
    os << "cascade: " << options.configs.size() << " configs for " << levels << " levels";
    throw ValidationError(os.str());
  }
  if (!(options.augmented_padding >= 0.0)) throw ValidationError("cascade: negative padding");

  const Eigen::Index d = data.dim();
  std::vector<HpcfeModel> stages;
  stages.reserve(levels);
  std::vector<std::string> labels;

  for (std::size_t i = 0; i < levels; ++i) {
    const auto& lv = data.levels[i];
    HpcfeConfig config = options.configs.size() == 1 ? options.configs.front() : options.configs[i];
    if (options.modified && i > 0) config.zero_mean_trend = true;

    // Lower-stage means at this level's inputs and at every level's inputs;
    // the latter span the augmented bounds.
    InputBounds bounds;
    bounds.lower.resize(d + static_cast<Eigen::Index>(i));
    bounds.upper.resize(d + static_cast<Eigen::Index>(i));
    bounds.lower.head(d) = data.bounds.lower;
    bounds.upper.head(d) = data.bounds.upper;
    Eigen::MatrixXd x_aug = lv.x;
    if (i > 0) {
      const DeepHpcfeModel partial(data.bounds, stages, options.modified);
      const CascadePrediction here = partial.predict(lv.x);
      std::vector<Eigen::VectorXd> means;
      for (const auto& p : here.levels) means.push_back(p.mean);
      x_aug = DeepHpcfeModel::augment(lv.x, means);

      Eigen::Index total = 0;
      for (const auto& other : data.levels) total += other.x.rows();
      Eigen::MatrixXd all_x(total, d);
      Eigen::Index row = 0;
      for (const auto& other : data.levels) {
        all_x.middleRows(row, other.x.rows()) = other.x;
        row += other.x.rows();
      }
      const CascadePrediction span = partial.predict(all_x);
      std::vector<Eigen::VectorXd> span_means;
      for (const auto& p : span.levels) span_means.push_back(p.mean);
      const Eigen::MatrixXd aug_all = DeepHpcfeModel::augment(all_x, span_means);
      for (Eigen::Index c = d; c < aug_all.cols(); ++c) {
        // Centred on this stage's training mean so that a linear relation
        // to the lower stage needs no constant term beyond f0.
        const double center = x_aug.col(c).mean();
        const double reach = std::max(aug_all.col(c).maxCoeff() - center, center - aug_all.col(c).minCoeff());
        double half = (1.0 + options.augmented_padding) * reach;
        if (!(half > 0.0)) half = std::max(1.0, std::abs(center)) * 0.5;
        bounds.lower[c] = center - half;
        bounds.upper[c] = center + half;
      }
    }

    try {
      stages.push_back(train(config, bounds, x_aug, lv.y, data.dim() + 2));
    } catch (const ValidationError& e) {
      throw ValidationError("cascade stage " + std::to_string(i + 1) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("cascade stage " + std::to_string(i + 1) + ": " + e.what());
    }
    labels.push_back(lv.label.empty() ? "level" + std::to_string(i + 1) : lv.label);
  }
  return {DeepHpcfeModel(data.bounds, std::move(stages), options.modified, std::move(labels)),
          std::move(warnings)};
}

}  // namespace hpcfe

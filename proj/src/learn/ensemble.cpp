#include "xmb/learn/ensemble.hpp"

#include "xmb/error.hpp"

namespace xmb::learn {

VotingModel::VotingModel(VotingMode mode, std::vector<std::shared_ptr<const Model>> members)
    : mode_(mode), members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("voting needs at least one member");
  for (const auto& m : members_)
    if (m->num_classes() != members_.front()->num_classes() || m->num_features() != members_.front()->num_features())
      throw DataError("voting members disagree on feature or class count");
}

Matrix VotingModel::scores(const Matrix& x) const {
  const auto k = static_cast<Eigen::Index>(num_classes());
  const double m = static_cast<double>(members_.size());
  Matrix mean = Matrix::Zero(x.rows(), k);
  Matrix votes = Matrix::Zero(x.rows(), k);
  for (const auto& member : members_) {
    const Matrix s = member->scores(x);
    mean += s;
    if (mode_ == VotingMode::Hard) {
      const auto pred = argmax_rows(s);
      for (Eigen::Index i = 0; i < x.rows(); ++i) votes(i, pred[static_cast<std::size_t>(i)]) += 1.0;
    }
  }
  mean /= m;
  if (mode_ == VotingMode::Soft) return mean;
  return (votes + 1e-3 * mean) / (m + 1e-3);
}

void VotingModel::save(ArchiveWriter& out, const std::string& prefix) const {
  out.meta()["models"][prefix] = {
      {"kind", "voting"}, {"mode", mode_ == VotingMode::Hard ? "hard" : "soft"}, {"members", members_.size()}};
  for (std::size_t i = 0; i < members_.size(); ++i) members_[i]->save(out, prefix + "m" + std::to_string(i) + ".");
}

}  // namespace xmb::learn

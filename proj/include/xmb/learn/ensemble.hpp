#pragma once

#include <memory>
#include <vector>

#include "xmb/learn/model.hpp"

namespace xmb::learn {

enum class VotingMode { Soft, Hard };

/// Soft mode: mean of member probability rows.
/// Hard mode: majority of member predictions; scores are
/// (votes_c + 1e-3 * meanprob_c) / (members + 1e-3), so vote ties fall to the
/// higher mean probability and then to the lowest label.
class VotingModel final : public Model {
 public:
  VotingModel(VotingMode mode, std::vector<std::shared_ptr<const Model>> members);

  std::size_t num_features() const override { return members_.front()->num_features(); }
  std::size_t num_classes() const override { return members_.front()->num_classes(); }
  Matrix scores(const Matrix& x) const override;
  void save(ArchiveWriter& out, const std::string& prefix) const override;

  VotingMode mode() const { return mode_; }
  const std::vector<std::shared_ptr<const Model>>& members() const { return members_; }

 private:
  VotingMode mode_;
  std::vector<std::shared_ptr<const Model>> members_;
};

}  // namespace xmb::learn

#ifndef PLMIX_RELABEL_HPP
#define PLMIX_RELABEL_HPP

#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "plmix/gibbs.hpp"
#include "plmix/plcore.hpp"

namespace plmix {

/// A chain whose draws have been permuted to a common labelling.
/// For draw j, relabeled component g is raw component permutations[j][g].
struct RelabeledChain {
  Chain chain;
  std::vector<std::vector<int>> permutations;
};

/// Permutation minimizing sum_g cost(g, perm[g]). Exhaustive search for
/// G <= 8, Hungarian algorithm beyond.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// The same minimization, always solved with the Hungarian algorithm.
std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost);

/// Pivotal reordering: each draw is permuted to minimize the squared
/// Euclidean distance of its canonical (p, omega) to the canonical pivot.
RelabeledChain pivotal_relabel(const Chain& chain, const MixtureParams& pivot);

struct PosteriorSummary {
  SupportMatrix p_mean;
  SupportMatrix p_sd;
  Eigen::VectorXd omega_mean;
  Eigen::VectorXd omega_sd;
  std::vector<std::vector<int>> modal;  // 0-based, per component

  MixtureParams mean_params() const;
};

/// Elementwise posterior means and standard deviations of the canonical
/// parameters, plus the modal ordering of each mean support vector.
PosteriorSummary summarize(const RelabeledChain& relabeled);
PosteriorSummary summarize(const Chain& chain);

nlohmann::json summary_to_json(const PosteriorSummary& summary);

}  // namespace plmix

#endif  // PLMIX_RELABEL_HPP

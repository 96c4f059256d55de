#ifndef PLMIX_MAP_EM_HPP
#define PLMIX_MAP_EM_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "plmix/data.hpp"
#include "plmix/plcore.hpp"

namespace plmix {

/// Conjugate prior: p_gi ~ Gamma(c_gi, d_g) (shape, rate) and
/// omega ~ Dirichlet(alpha).
struct PriorHyper {
  SupportMatrix c;
  Eigen::VectorXd d;
  Eigen::VectorXd alpha;

  /// c = 1, d = 0.001, alpha = 1.
  static PriorHyper weakly_informative(int num_components, int num_items);
  /// c = 1, d = 0, alpha = 1: the MAP estimate is the MLE.
  static PriorHyper flat(int num_components, int num_items);
  static PriorHyper uniform(int num_components, int num_items, double shape,
                            double rate, double concentration);

  int num_components() const { return static_cast<int>(c.rows()); }
  int num_items() const { return static_cast<int>(c.cols()); }
  bool is_flat() const;

  /// Throws std::invalid_argument on shape mismatch, c <= 0, d < 0 or
  /// alpha <= 0.
  void validate(int num_components, int num_items) const;
};

nlohmann::json prior_to_json(const PriorHyper& prior);

struct EStepResult {
  MixtureParams at;   // parameters the expectations were taken at
  Eigen::MatrixXd z;  // N x G membership probabilities
  /// denom(g, stage_offset(s) + t): sum of supports of component g still
  /// available at stage t of unit s.
  Eigen::MatrixXd denom;
  /// Observed-data log-likelihood at the parameters the step was taken at.
  double log_lik = 0.0;
};

struct MStepResult {
  MixtureParams theta;  // internal (unnormalized) scale
  int floored = 0;      // supports raised to the 1e-12 relative floor
};

EStepResult e_step(const RankingDataset& ds, const MixtureParams& current);

MStepResult m_step(const RankingDataset& ds, const EStepResult& expectations,
                   const PriorHyper& prior);

/// log L + log prior on the internal scale, dropping normalizing constants.
double log_posterior(const RankingDataset& ds, const MixtureParams& theta,
                     const PriorHyper& prior);

struct EmConfig {
  int max_iter = 1000;
  double tol = 1e-8;
  int n_starts = 10;
  std::uint64_t seed = 0;
};

struct MapResult {
  MixtureParams theta;      // internal scale
  MixtureParams canonical;  // rows of p sum to one
  Eigen::MatrixXd z;        // N x G
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  int floored = 0;
  int best_start = 0;

  double final_log_posterior() const { return trace.back(); }
};

/// Random EM start: supports from the Gamma prior (Uniform(0.1, 1) when the
/// prior rate is zero) rescaled to sum to one per component, equal weights.
MixtureParams random_start(int num_components, const PriorHyper& prior,
                           Rng& rng);

/// EM from a single starting point.
MapResult run_em(const RankingDataset& ds, const MixtureParams& start,
                 const PriorHyper& prior, const EmConfig& config);

/// Best of config.n_starts random starts (plus any `extra_starts`, tried
/// first) by final log-posterior.
MapResult fit_map(const RankingDataset& ds, int num_components,
                  const PriorHyper& prior, const EmConfig& config,
                  const std::vector<MixtureParams>& extra_starts = {});

nlohmann::json map_to_json(const MapResult& result);

}  // namespace plmix

#endif  // PLMIX_MAP_EM_HPP

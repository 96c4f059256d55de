#ifndef PLMIX_GIBBS_HPP
#define PLMIX_GIBBS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "plmix/data.hpp"
#include "plmix/map_em.hpp"
#include "plmix/plcore.hpp"
#include "plmix/rng.hpp"

namespace plmix {

struct GibbsConfig {
  int n_iter = 22000;
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 0;
  bool store_labels = true;

  void validate() const;
  int retained() const;
};

/// Post-burn-in draws of a G-component PL mixture. Supports are kept on the
/// sampler's internal scale; canonicalize for reporting.
struct Chain {
  int num_components = 0;
  int num_items = 0;
  int num_units = 0;
  std::vector<SupportMatrix> p;
  std::vector<Eigen::VectorXd> omega;
  std::vector<std::vector<std::uint8_t>> z;  // 0-based labels, may be empty
  std::vector<double> deviance;             // -2 log L at each draw
  GibbsConfig config;
  PriorHyper prior;

  int size() const { return static_cast<int>(p.size()); }
  MixtureParams params(int draw) const;
};

/// Full sampler state for one sweep.
struct GibbsState {
  SupportMatrix p;
  Eigen::VectorXd omega;
  std::vector<int> z;
};

/// Latent exponentials y_st, indexed by ds.stage_offset(s) + t; the rate is
/// the stage normalizer of unit s under its current component.
std::vector<double> sample_y(const RankingDataset& ds, std::span<const int> z,
                             const SupportMatrix& p, Rng& rng);

/// Component labels from their multinomial full conditional.
std::vector<int> sample_z(const RankingDataset& ds, std::span<const double> y,
                          const MixtureParams& theta, Rng& rng);

/// Gamma full-conditional shape and rate of every support parameter.
struct GammaPosterior {
  SupportMatrix shape;
  SupportMatrix rate;
};
GammaPosterior support_posterior(const RankingDataset& ds,
                                 std::span<const double> y,
                                 std::span<const int> z,
                                 const PriorHyper& prior);

SupportMatrix sample_p(const RankingDataset& ds, std::span<const double> y,
                       std::span<const int> z, const PriorHyper& prior,
                       Rng& rng);

Eigen::VectorXd sample_omega(std::span<const int> z, const PriorHyper& prior,
                             Rng& rng);

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentration,
                                 Rng& rng);

/// One systematic sweep y -> z -> p -> omega.
void gibbs_sweep(const RankingDataset& ds, GibbsState& state,
                 const PriorHyper& prior, Rng& rng);

/// Runs the sampler. With `init`, supports and weights start at the MAP
/// estimate and labels at the per-unit argmax of its memberships; otherwise
/// at a random start with uniformly drawn labels.
Chain run_chain(const RankingDataset& ds, int num_components,
                const PriorHyper& prior, const GibbsConfig& config,
                const MapResult* init = nullptr);

}  // namespace plmix

#endif  // PLMIX_GIBBS_HPP

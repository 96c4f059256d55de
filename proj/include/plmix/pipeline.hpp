#ifndef PLMIX_PIPELINE_HPP
#define PLMIX_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plmix/criteria.hpp"
#include "plmix/data.hpp"
#include "plmix/gibbs.hpp"
#include "plmix/map_em.hpp"
#include "plmix/relabel.hpp"

namespace plmix {

enum class PriorKind { kDefault, kFlat };

/// Parses "default" or "flat"; throws InputError otherwise.
PriorKind parse_prior_kind(const std::string& text);
std::string prior_kind_name(PriorKind kind);
PriorHyper make_prior(PriorKind kind, int num_components, int num_items);

struct FitOptions {
  EmConfig em;
  GibbsConfig gibbs;
  /// Fit the flat-prior MAP separately for BIC when the main prior is not
  /// flat. The flat fit starts from the main MAP plus `flat_starts` random
  /// starts.
  bool flat_fit = true;
  int flat_starts = 2;
};

/// Everything produced by fitting one mixture size.
struct ModelFit {
  int num_components = 0;
  MapResult map;
  std::optional<MapResult> flat_map;
  Chain chain;
  RelabeledChain relabeled;
  PosteriorSummary summary;
  CriteriaReport criteria;
};

/// MAP by EM, MAP-initialized Gibbs chain, pivotal relabeling against the
/// MAP, posterior summary and selection criteria.
ModelFit fit_model(const RankingDataset& ds, int num_components,
                   const PriorHyper& prior, const FitOptions& options);

/// Seed for sub-task `tag` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// fit_model for every G in [g_min, g_max]. EM and Gibbs seeds are derived
/// from options' seeds and G, so results do not depend on `jobs`.
std::vector<ModelFit> fit_grid(const RankingDataset& ds, int g_min, int g_max,
                               PriorKind prior, const FitOptions& options,
                               int jobs = 1);

}  // namespace plmix

#endif  // PLMIX_PIPELINE_HPP

#include "plmix/pipeline.hpp"

#include <stdexcept>

#include "plmix/parallel.hpp"

namespace plmix {

PriorKind parse_prior_kind(const std::string& text) {
  if (text == "default") return PriorKind::kDefault;
  if (text == "flat") return PriorKind::kFlat;
  throw InputError("unknown prior '" + text + "' (expected default or flat)");
}

std::string prior_kind_name(PriorKind kind) {
  return kind == PriorKind::kFlat ? "flat" : "default";
}

PriorHyper make_prior(PriorKind kind, int num_components, int num_items) {
  return kind == PriorKind::kFlat
             ? PriorHyper::flat(num_components, num_items)
             : PriorHyper::weakly_informative(num_components, num_items);
}

ModelFit fit_model(const RankingDataset& ds, int num_components,
                   const PriorHyper& prior, const FitOptions& options) {
  ModelFit fit;
  fit.num_components = num_components;
  fit.map = fit_map(ds, num_components, prior, options.em);
  if (options.flat_fit && !prior.is_flat()) {
    EmConfig flat_cfg = options.em;
    flat_cfg.n_starts = options.flat_starts;
    flat_cfg.seed = derive_seed(options.em.seed, 0x666c6174);
    fit.flat_map =
        fit_map(ds, num_components, PriorHyper::flat(num_components, ds.num_items()),
                flat_cfg, {fit.map.theta});
  }
  fit.chain = run_chain(ds, num_components, prior, options.gibbs, &fit.map);
  fit.relabeled = pivotal_relabel(fit.chain, fit.map.theta);
  fit.summary = summarize(fit.relabeled);
  const MapResult* bic_point = nullptr;
  if (fit.flat_map) {
    bic_point = &*fit.flat_map;
  } else if (prior.is_flat()) {
    bic_point = &fit.map;
  }
  fit.criteria = compute_criteria(fit.chain, fit.map, ds, bic_point);
  return fit;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  Rng rng = make_stream(seed, tag);
  return rng();
}

std::vector<ModelFit> fit_grid(const RankingDataset& ds, int g_min, int g_max,
                               PriorKind prior, const FitOptions& options,
                               int jobs) {
  if (g_min < 1 || g_max < g_min) {
    throw std::invalid_argument("component grid must satisfy 1 <= gmin <= gmax");
  }
  std::vector<ModelFit> fits(static_cast<std::size_t>(g_max - g_min + 1));
  parallel_for(static_cast<int>(fits.size()), jobs, [&](int idx) {
    const int g = g_min + idx;
    FitOptions opts = options;
    opts.em.seed = derive_seed(options.em.seed, static_cast<std::uint64_t>(g));
    opts.gibbs.seed =
        derive_seed(options.gibbs.seed, 0x100 + static_cast<std::uint64_t>(g));
    fits[static_cast<std::size_t>(idx)] =
        fit_model(ds, g, make_prior(prior, g, ds.num_items()), opts);
  });
  return fits;
}

}  // namespace plmix

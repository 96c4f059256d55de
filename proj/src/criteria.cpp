#include "plmix/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plmix {

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kDic1: return "DIC1";
    case Criterion::kDic2: return "DIC2";
    case Criterion::kBpic1: return "BPIC1";
    case Criterion::kBpic2: return "BPIC2";
    case Criterion::kBicm1: return "BICM1";
    case Criterion::kBicm2: return "BICM2";
    case Criterion::kBic: return "BIC";
  }
  return "?";
}

double CriteriaReport::value(Criterion c) const {
  switch (c) {
    case Criterion::kDic1: return dic1;
    case Criterion::kDic2: return dic2;
    case Criterion::kBpic1: return bpic1;
    case Criterion::kBpic2: return bpic2;
    case Criterion::kBicm1: return bicm1;
    case Criterion::kBicm2: return bicm2;
    case Criterion::kBic: return bic;
  }
  return 0.0;
}

CriteriaReport criteria_from_deviance(std::span<const double> deviance,
                                      double d_map, double d_bic,
                                      int num_units, int num_components,
                                      int num_items) {
  if (deviance.size() < 2) {
    throw std::invalid_argument(
        "need at least two retained draws for the deviance variance");
  }
  const double n = static_cast<double>(deviance.size());
  double mean = 0.0;
  for (double d : deviance) mean += d;
  mean /= n;
  double ss = 0.0;
  for (double d : deviance) ss += (d - mean) * (d - mean);

  CriteriaReport r;
  r.num_components = num_components;
  r.num_units = num_units;
  r.d_bar = mean;
  r.d_var = ss / (n - 1.0);
  r.d_map = d_map;
  r.d_bic = d_bic;
  r.d_min = *std::min_element(deviance.begin(), deviance.end());

  const double log_n = std::log(static_cast<double>(num_units));
  const double pd1 = r.d_bar - r.d_map;
  const double pd2 = r.d_var / 2.0;
  r.dic1 = r.d_bar + pd1;
  r.dic2 = r.d_bar + pd2;
  r.bpic1 = r.d_bar + 2.0 * pd1;
  r.bpic2 = r.d_bar + 2.0 * pd2;
  r.bicm1 = r.d_bar + pd2 * (log_n - 1.0);
  r.bicm2 = r.d_map + pd2 * log_n;
  r.bic_params = num_components * (num_items - 1) + (num_components - 1);
  r.bic = r.d_bic + r.bic_params * log_n;
  return r;
}

CriteriaReport compute_criteria(const Chain& chain, const MapResult& map,
                                const RankingDataset& ds,
                                const MapResult* flat_map) {
  if (chain.num_components != map.theta.num_components() ||
      chain.num_items != ds.num_items() || chain.num_units != ds.num_units()) {
    throw std::invalid_argument("chain, MAP estimate and dataset disagree");
  }
  const double d_map = -2.0 * mixture_log_lik(ds, map.theta);
  const double d_bic =
      flat_map != nullptr ? -2.0 * mixture_log_lik(ds, flat_map->theta) : d_map;
  CriteriaReport r =
      criteria_from_deviance(chain.deviance, d_map, d_bic, ds.num_units(),
                             chain.num_components, ds.num_items());
  r.bic_from_flat_fit = flat_map != nullptr;
  return r;
}

std::array<int, kNumCriteria> select_G(
    std::span<const CriteriaReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no criteria reports");
  std::array<int, kNumCriteria> winners{};
  for (int c = 0; c < kNumCriteria; ++c) {
    const Criterion crit = kAllCriteria[static_cast<std::size_t>(c)];
    const CriteriaReport* best = nullptr;
    for (const auto& r : reports) {
      if (best == nullptr || r.value(crit) < best->value(crit) ||
          (r.value(crit) == best->value(crit) &&
           r.num_components < best->num_components)) {
        best = &r;
      }
    }
    winners[static_cast<std::size_t>(c)] = best->num_components;
  }
  return winners;
}

nlohmann::json criteria_to_json(const CriteriaReport& r) {
  return {{"G", r.num_components},
          {"N", r.num_units},
          {"D_bar", r.d_bar},
          {"D_var", r.d_var},
          {"D_map", r.d_map},
          {"D_bic", r.d_bic},
          {"D_min_draw", r.d_min},
          {"DIC1", r.dic1},
          {"DIC2", r.dic2},
          {"BPIC1", r.bpic1},
          {"BPIC2", r.bpic2},
          {"BICM1", r.bicm1},
          {"BICM2", r.bicm2},
          {"BIC", r.bic},
          {"bic_params", r.bic_params},
          {"bic_from_flat_fit", r.bic_from_flat_fit}};
}

}  // namespace plmix

#ifndef PLMIX_CRITERIA_HPP
#define PLMIX_CRITERIA_HPP

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "plmix/data.hpp"
#include "plmix/gibbs.hpp"
#include "plmix/map_em.hpp"

namespace plmix {

enum class Criterion { kDic1, kDic2, kBpic1, kBpic2, kBicm1, kBicm2, kBic };
inline constexpr int kNumCriteria = 7;
inline constexpr std::array<Criterion, kNumCriteria> kAllCriteria = {
    Criterion::kDic1,  Criterion::kDic2,  Criterion::kBpic1, Criterion::kBpic2,
    Criterion::kBicm1, Criterion::kBicm2, Criterion::kBic};

std::string_view criterion_name(Criterion c);

struct CriteriaReport {
  int num_components = 0;
  int num_units = 0;
  double d_bar = 0.0;  // posterior mean deviance
  double d_var = 0.0;  // unbiased posterior deviance variance
  double d_map = 0.0;  // deviance at the MAP estimate
  double d_bic = 0.0;  // deviance at the point estimate used by BIC
  double d_min = 0.0;  // smallest deviance among the draws
  double dic1 = 0.0, dic2 = 0.0, bpic1 = 0.0, bpic2 = 0.0;
  double bicm1 = 0.0, bicm2 = 0.0, bic = 0.0;
  int bic_params = 0;
  /// False when BIC fell back to the default-prior MAP deviance.
  bool bic_from_flat_fit = false;

  double value(Criterion c) const;
};

/// Criteria from a deviance sample and point-estimate deviances.
CriteriaReport criteria_from_deviance(std::span<const double> deviance,
                                      double d_map, double d_bic,
                                      int num_units, int num_components,
                                      int num_items);

/// Criteria for one fitted model. `flat_map`, when given, is the flat-prior
/// MAP (the MLE) and supplies BIC's deviance.
CriteriaReport compute_criteria(const Chain& chain, const MapResult& map,
                                const RankingDataset& ds,
                                const MapResult* flat_map = nullptr);

/// For each criterion, the number of components with the smallest value;
/// ties go to the smaller G.
std::array<int, kNumCriteria> select_G(
    std::span<const CriteriaReport> reports);

nlohmann::json criteria_to_json(const CriteriaReport& report);

}  // namespace plmix

#endif  // PLMIX_CRITERIA_HPP

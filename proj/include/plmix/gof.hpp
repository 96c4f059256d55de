#ifndef PLMIX_GOF_HPP
#define PLMIX_GOF_HPP

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "plmix/data.hpp"
#include "plmix/gibbs.hpp"
#include "plmix/plcore.hpp"

namespace plmix {

enum class Discrepancy { kTop1, kPairs, kTop1Cond, kPairsCond };
inline constexpr std::array<Discrepancy, 4> kAllDiscrepancies = {
    Discrepancy::kTop1, Discrepancy::kPairs, Discrepancy::kTop1Cond,
    Discrepancy::kPairsCond};

std::string_view discrepancy_name(Discrepancy kind);

/// Expected first-choice counts n * sum_g omega_g p_gi. Requires canonical
/// parameters.
Eigen::VectorXd expected_top1(const MixtureParams& theta, double n);

/// Expected pairwise preference counts T_ii' p_i / (p_i + p_i') with p the
/// marginal supports. Requires canonical parameters.
Eigen::MatrixXd expected_pairs(const MixtureParams& theta,
                               const Eigen::MatrixXd& pair_totals);

struct DiscrepancyValue {
  double value = 0.0;
  int skipped = 0;  // cells with expected count below 1e-9
};

/// Chi-square distance between observed summaries and their expectations
/// under theta (any positive scale; canonicalized here). Pair measures sum
/// over i < i'; conditional measures sum over length strata.
DiscrepancyValue discrepancy(const SummaryStats& stats,
                             const MixtureParams& theta, Discrepancy kind);

struct DiscrepancyDraw {
  int draw = 0;  // retained-draw index
  double observed = 0.0;
  double replicated = 0.0;
};

struct GofReport {
  int n_rep = 0;
  int num_strata = 0;
  std::array<double, 4> p_values{};  // indexed like kAllDiscrepancies
  std::array<std::vector<DiscrepancyDraw>, 4> draws;
  long skipped_cells = 0;

  double p_b1() const { return p_values[0]; }
  double p_b2() const { return p_values[1]; }
  double p_b1_cond() const { return p_values[2]; }
  double p_b2_cond() const { return p_values[3]; }
  /// Conditional checks are informative only with two or more strata.
  bool has_conditional() const { return num_strata >= 2; }
};

/// Default replicate count: min(2000, retained draws).
int default_n_rep(const Chain& chain);

/// Posterior predictive check over n_rep evenly strided retained draws. Each
/// draw generates one replicate with the observed per-unit lengths, using
/// rng stream j of `seed`; output does not depend on `jobs`.
GofReport posterior_predictive(const Chain& chain, const RankingDataset& ds,
                               int n_rep, std::uint64_t seed, int jobs = 1);

/// Single p value: fraction of draws with X2(rep) >= X2(obs).
double posterior_predictive_p(const Chain& chain, const RankingDataset& ds,
                              Discrepancy kind, int n_rep, std::uint64_t seed);

nlohmann::json gof_to_json(const GofReport& report);

}  // namespace plmix

#endif  // PLMIX_GOF_HPP

#ifndef PLMIX_PLCORE_HPP
#define PLMIX_PLCORE_HPP

#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "plmix/data.hpp"
#include "plmix/rng.hpp"

namespace plmix {

/// G x K support parameters; row g is contiguous.
using SupportMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Parameters of a G-component Plackett-Luce mixture.
///
/// Supports may be on any positive scale per component; PL probabilities are
/// invariant to rescaling a row of `p`. canonical() rescales each row to sum
/// to one, which is the form used for reporting and expected frequencies.
struct MixtureParams {
  SupportMatrix p;
  Eigen::VectorXd omega;

  MixtureParams() = default;
  MixtureParams(SupportMatrix supports, Eigen::VectorXd weights);

  int num_components() const { return static_cast<int>(p.rows()); }
  int num_items() const { return static_cast<int>(p.cols()); }
  std::span<const double> support(int g) const {
    return {p.row(g).data(), static_cast<std::size_t>(p.cols())};
  }

  MixtureParams canonical() const;
  bool is_canonical(double tol = 1e-9) const;
  /// Marginal supports sum_g omega_g p_gi of the canonical form.
  Eigen::VectorXd marginal_support() const;

  /// Throws std::invalid_argument unless p > 0 and omega is on the simplex.
  void validate() const;

  /// Returns a copy with components reordered so that new component g is old
  /// component perm[g].
  MixtureParams permuted(std::span<const int> perm) const;
};

nlohmann::json params_to_json(const MixtureParams& theta);
MixtureParams params_from_json(const nlohmann::json& j);

/// Log of the PL probability of a top-n ordering under supports `p`.
/// Throws std::invalid_argument on a nonpositive support.
double pl_log_prob(std::span<const int> ordering, std::span<const double> p);
inline double pl_log_prob(const PartialOrdering& ordering,
                          std::span<const double> p) {
  return pl_log_prob(ordering.items(), p);
}

namespace detail {
// Fills out[t] = sum of supports still available at stage t (t < n). Sums
// are accumulated from the unranked items backwards so that small remaining
// masses keep full relative precision.
void stage_normalizers(std::span<const int> ordering, std::span<const double> p,
                       std::span<double> out);
// Unchecked hot-path variant of pl_log_prob.
double pl_log_prob_unchecked(std::span<const int> ordering,
                             std::span<const double> p);
}  // namespace detail

double log_sum_exp(std::span<const double> values);

/// Observed-data log-likelihood of the mixture (log-sum-exp per unit).
double mixture_log_lik(const RankingDataset& ds, const MixtureParams& theta);

/// Per-unit log-likelihood contributions.
Eigen::VectorXd unit_log_lik(const RankingDataset& ds,
                             const MixtureParams& theta);

/// Posterior component membership probabilities of one ordering.
Eigen::VectorXd posterior_membership(const PartialOrdering& ordering,
                                     const MixtureParams& theta);

/// Items by decreasing support, ties broken by smaller index (0-based).
std::vector<int> modal_ordering(std::span<const double> p);

/// Stagewise PL draw of `length` items without replacement.
PartialOrdering sample_pl(std::span<const double> p, int length, Rng& rng);

struct SimulatedData {
  RankingDataset data;
  std::vector<int> labels;  // 0-based generating component per unit
};

/// Draws N units: component g ~ omega, then an ordering of lengths[s] items.
SimulatedData sample_mixture_dataset(const MixtureParams& theta,
                                     std::span<const int> lengths, Rng& rng);
/// As above with every unit drawn as a full ordering.
SimulatedData sample_mixture_dataset(const MixtureParams& theta, int num_units,
                                     Rng& rng);

/// Truncation-length distribution, m -> probability over m = 1..K-1.
using CensoringProportions = std::map<int, double>;

/// The three truncation settings of the reference simulation design
/// (K = 6): 'A', 'B' or 'C'.
CensoringProportions censoring_setting(char name);

/// Independently truncates each full ordering to m items, m drawn from
/// `proportions`. Throws std::invalid_argument if they do not sum to one.
RankingDataset apply_censoring(const RankingDataset& full,
                               const CensoringProportions& proportions,
                               Rng& rng);

}  // namespace plmix

#endif  // PLMIX_PLCORE_HPP

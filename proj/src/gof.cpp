#include "plmix/gof.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "plmix/parallel.hpp"

namespace plmix {

namespace {

constexpr double kMinExpected = 1e-9;

void require_canonical(const MixtureParams& theta) {
  if (!theta.is_canonical()) {
    throw std::invalid_argument(
        "expected frequencies need canonical parameters (rows summing to 1)");
  }
}

void add_top1(const Eigen::VectorXd& observed, const Eigen::VectorXd& expected,
              DiscrepancyValue& out) {
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    if (expected(i) < kMinExpected) {
      ++out.skipped;
      continue;
    }
    const double diff = observed(i) - expected(i);
    out.value += diff * diff / expected(i);
  }
}

void add_pairs(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& expected,
               DiscrepancyValue& out) {
  const Eigen::Index k = observed.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (expected(i, j) < kMinExpected) {
        ++out.skipped;
        continue;
      }
      const double diff = observed(i, j) - expected(i, j);
      out.value += diff * diff / expected(i, j);
    }
  }
}

}  // namespace

std::string_view discrepancy_name(Discrepancy kind) {
  switch (kind) {
    case Discrepancy::kTop1: return "top1";
    case Discrepancy::kPairs: return "pairs";
    case Discrepancy::kTop1Cond: return "top1_cond";
    case Discrepancy::kPairsCond: return "pairs_cond";
  }
  return "?";
}

Eigen::VectorXd expected_top1(const MixtureParams& theta, double n) {
  require_canonical(theta);
  return n * theta.marginal_support();
}

Eigen::MatrixXd expected_pairs(const MixtureParams& theta,
                               const Eigen::MatrixXd& pair_totals) {
  require_canonical(theta);
  const Eigen::VectorXd p = theta.marginal_support();
  const Eigen::Index k = p.size();
  if (pair_totals.rows() != k || pair_totals.cols() != k) {
    throw std::invalid_argument("pair totals do not match the item count");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (i != j) out(i, j) = pair_totals(i, j) * p(i) / (p(i) + p(j));
    }
  }
  return out;
}

DiscrepancyValue discrepancy(const SummaryStats& stats,
                             const MixtureParams& theta, Discrepancy kind) {
  const MixtureParams canon = theta.is_canonical() ? theta : theta.canonical();
  DiscrepancyValue out;
  switch (kind) {
    case Discrepancy::kTop1:
      add_top1(stats.top1, expected_top1(canon, stats.top1.sum()), out);
      break;
    case Discrepancy::kPairs:
      add_pairs(stats.pairs, expected_pairs(canon, stats.pair_totals), out);
      break;
    case Discrepancy::kTop1Cond:
      for (const auto& [m, st] : stats.by_length) {
        add_top1(st.top1, expected_top1(canon, static_cast<double>(st.count)),
                 out);
      }
      break;
    case Discrepancy::kPairsCond:
      for (const auto& [m, st] : stats.by_length) {
        add_pairs(st.pairs, expected_pairs(canon, st.pair_totals), out);
      }
      break;
  }
  return out;
}

int default_n_rep(const Chain& chain) { return std::min(2000, chain.size()); }

GofReport posterior_predictive(const Chain& chain, const RankingDataset& ds,
                               int n_rep, std::uint64_t seed, int jobs) {
  if (n_rep < 1) throw std::invalid_argument("n_rep must be at least 1");
  if (n_rep > chain.size()) {
    throw std::invalid_argument("n_rep (" + std::to_string(n_rep) +
                                ") exceeds the retained draws (" +
                                std::to_string(chain.size()) + ")");
  }
  if (chain.num_items != ds.num_items() || chain.num_units != ds.num_units()) {
    throw std::invalid_argument("chain was not fitted on this dataset");
  }
  const SummaryStats observed = summarize_dataset(ds);
  const std::vector<int> lengths = ds.lengths();

  GofReport report;
  report.n_rep = n_rep;
  report.num_strata = static_cast<int>(observed.by_length.size());
  for (auto& d : report.draws) d.resize(static_cast<std::size_t>(n_rep));
  std::vector<long> skipped(static_cast<std::size_t>(n_rep), 0);

  parallel_for(n_rep, jobs, [&](int j) {
    const int draw = static_cast<int>(static_cast<long long>(j) *
                                      chain.size() / n_rep);
    const MixtureParams theta = chain.params(draw).canonical();
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(j));
    const SimulatedData rep = sample_mixture_dataset(theta, lengths, rng);
    const SummaryStats replicated = summarize_dataset(rep.data);
    long skip = 0;
    for (std::size_t k = 0; k < kAllDiscrepancies.size(); ++k) {
      const DiscrepancyValue obs =
          discrepancy(observed, theta, kAllDiscrepancies[k]);
      const DiscrepancyValue rp =
          discrepancy(replicated, theta, kAllDiscrepancies[k]);
      skip += obs.skipped + rp.skipped;
      report.draws[k][static_cast<std::size_t>(j)] = {draw, obs.value,
                                                      rp.value};
    }
    skipped[static_cast<std::size_t>(j)] = skip;
  });

  for (std::size_t k = 0; k < kAllDiscrepancies.size(); ++k) {
    const auto& d = report.draws[k];
    const auto hits = std::count_if(d.begin(), d.end(), [](const auto& x) {
      return x.replicated >= x.observed;
    });
    report.p_values[k] = static_cast<double>(hits) / n_rep;
  }
  for (long s : skipped) report.skipped_cells += s;
  return report;
}

double posterior_predictive_p(const Chain& chain, const RankingDataset& ds,
                              Discrepancy kind, int n_rep, std::uint64_t seed) {
  const GofReport report = posterior_predictive(chain, ds, n_rep, seed);
  const auto it =
      std::find(kAllDiscrepancies.begin(), kAllDiscrepancies.end(), kind);
  return report.p_values[static_cast<std::size_t>(it - kAllDiscrepancies.begin())];
}

nlohmann::json gof_to_json(const GofReport& report) {
  nlohmann::json j;
  j["n_rep"] = report.n_rep;
  j["num_strata"] = report.num_strata;
  j["p_b1"] = report.p_b1();
  j["p_b2"] = report.p_b2();
  if (report.has_conditional()) {
    j["p_b1_cond"] = report.p_b1_cond();
    j["p_b2_cond"] = report.p_b2_cond();
  }
  j["skipped_cells"] = report.skipped_cells;
  return j;
}

}  // namespace plmix

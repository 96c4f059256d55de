#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "plmix/plcore.hpp"

using namespace plmix;
using doctest::Approx;

namespace {

MixtureParams params(std::vector<std::vector<double>> rows,
                     std::vector<double> w) {
  SupportMatrix p(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t g = 0; g < rows.size(); ++g) {
    for (std::size_t i = 0; i < rows[g].size(); ++i) p(g, i) = rows[g][i];
  }
  return MixtureParams(p, Eigen::Map<Eigen::VectorXd>(w.data(), w.size()));
}

RankingDataset one(int k, std::vector<int> items) {
  for (int& i : items) --i;
  return RankingDataset(k, {PartialOrdering(items, k)});
}

}  // namespace

TEST_CASE("pl_log_prob examples") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  CHECK(pl_log_prob(std::vector<int>{0, 1}, p) == Approx(std::log(0.3)).epsilon(1e-14));
  CHECK(pl_log_prob(std::vector<int>{2}, p) == Approx(std::log(0.2)).epsilon(1e-14));
  const std::vector<double> uniform(4, 0.25);
  CHECK(pl_log_prob(std::vector<int>{3, 1, 0}, uniform) ==
        Approx(-std::log(24.0)).epsilon(1e-14));
  CHECK_THROWS_AS(pl_log_prob(std::vector<int>{0}, std::vector<double>{0.5, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(pl_log_prob(std::vector<int>{0, 1}, std::vector<double>{0.5, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("normalization and marginalization against enumeration") {
  std::mt19937_64 rng(3);
  for (int k = 2; k <= 5; ++k) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto p = oracle::random_simplex(k, rng);
      long double total = 0.0L;
      for (const auto& perm : oracle::permutations(k)) {
        const std::vector<int> full(perm.begin(), perm.end() - 1);
        total += std::exp(static_cast<long double>(pl_log_prob(full, p)));
        for (int m = 1; m < k - 1; ++m) {
          const std::vector<int> prefix(perm.begin(), perm.begin() + m);
          CHECK(std::abs(std::exp(pl_log_prob(prefix, p)) -
                         static_cast<double>(oracle::marginal_by_enumeration(prefix, p))) <
                1e-12);
        }
      }
      CHECK(std::abs(static_cast<double>(total) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("scale invariance") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int k = 3 + rep % 5;
    auto p = oracle::random_simplex(k, rng);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    perm.resize(static_cast<std::size_t>(1 + rep % (k - 1)));
    const double base = pl_log_prob(perm, p);
    for (double c : {1e-6, 0.37, 12.5, 4e5}) {
      std::vector<double> scaled(p);
      for (double& v : scaled) v *= c;
      CHECK(std::abs(pl_log_prob(perm, scaled) - base) < 1e-12);
      CHECK(modal_ordering(scaled) == modal_ordering(p));
    }
  }
}

TEST_CASE("small remaining mass keeps relative precision") {
  // The last stage chooses between two items with tiny supports.
  const std::vector<double> p{1.0, 1e-13, 3e-13};
  CHECK(pl_log_prob(std::vector<int>{0, 1}, p) ==
        Approx(std::log(1.0 / (1.0 + 4e-13)) + std::log(0.25)).epsilon(1e-12));
}

TEST_CASE("mixture_log_lik reductions") {
  std::mt19937_64 rng(4);
  const auto p = oracle::random_simplex(4, rng);
  const auto ds = RankingDataset(4, {PartialOrdering({0, 2}, 4), PartialOrdering({3}, 4),
                                     PartialOrdering({1, 0, 3}, 4)});
  double single = 0.0;
  for (const auto& o : ds.orderings()) single += pl_log_prob(o, p);
  CHECK(mixture_log_lik(ds, params({p}, {1.0})) == Approx(single).epsilon(1e-14));
  CHECK(mixture_log_lik(ds, params({p, p}, {0.3, 0.7})) == Approx(single).epsilon(1e-14));
  const auto p2 = oracle::random_simplex(4, rng);
  const std::vector<std::vector<int>> raw{{0, 2}, {3}, {1, 0, 3}};
  CHECK(mixture_log_lik(ds, params({p, p2}, {0.4, 0.6})) ==
        Approx(oracle::mixture_log_lik(raw, {p, p2}, {0.4, 0.6})).epsilon(1e-12));
}

TEST_CASE("mixture unit probabilities sum to one over full orderings") {
  const auto theta = params({{0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}}, {0.35, 0.65});
  double total = 0.0;
  for (const auto& perm : oracle::permutations(3)) {
    const RankingDataset ds(3, {PartialOrdering({perm[0], perm[1]}, 3)});
    total += std::exp(unit_log_lik(ds, theta)(0));
  }
  CHECK(total == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("posterior_membership") {
  const PartialOrdering o({0, 1}, 3);
  const auto same = posterior_membership(o, params({{0.5, 0.3, 0.2}, {0.5, 0.3, 0.2}}, {0.5, 0.5}));
  CHECK(same(0) == Approx(0.5));
  const auto degenerate =
      posterior_membership(o, params({{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}}, {1.0, 0.0}));
  CHECK(degenerate(0) == 1.0);
  CHECK(degenerate(1) == 0.0);
  const auto z = posterior_membership(
      o, params({{0.5, 0.3, 0.2}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {0.5, 0.5}));
  CHECK(z(0) == Approx(0.3 / (0.3 + 1.0 / 6)).epsilon(1e-12));
  CHECK(z(1) == Approx((1.0 / 6) / (0.3 + 1.0 / 6)).epsilon(1e-12));

  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = oracle::random_simplex(4, rng, 1e-9);
    const auto b = oracle::random_simplex(4, rng, 1e-9);
    const auto zz = posterior_membership(PartialOrdering({3, 2, 1}, 4),
                                         params({a, b}, {0.9, 0.1}));
    CHECK(zz.minCoeff() >= 0.0);
    CHECK(zz.sum() == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("modal_ordering") {
  CHECK(modal_ordering(std::vector<double>{0.1, 0.7, 0.2}) == std::vector<int>{1, 2, 0});
  CHECK(modal_ordering(std::vector<double>(4, 0.25)) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("sample_pl matches the model frequency") {
  Rng rng = make_stream(1, 0);
  const std::vector<double> p{0.5, 0.3, 0.2};
  const int draws = 1000000;
  int hits = 0;
  for (int j = 0; j < draws; ++j) {
    const auto o = sample_pl(p, 2, rng);
    hits += o[0] == 0 && o[1] == 1;
  }
  const double sd = std::sqrt(0.3 * 0.7 / draws);
  CHECK(std::abs(static_cast<double>(hits) / draws - 0.3) < 3 * sd);

  const auto full = sample_pl(std::vector<double>(6, 1.0), 5, rng);
  CHECK(full.size() == 5);
  CHECK_THROWS_AS(sample_pl(p, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_pl(p, 0, rng), std::invalid_argument);

  // A dominant item is almost always first.
  int first = 0;
  for (int j = 0; j < 1000; ++j) {
    first += sample_pl(std::vector<double>{1.0, 1e-9, 1e-9}, 1, rng)[0] == 0;
  }
  CHECK(first == 1000);
}

TEST_CASE("sample_mixture_dataset") {
  Rng rng = make_stream(2, 0);
  auto g1 = sample_mixture_dataset(params({{0.2, 0.3, 0.5}}, {1.0}), 50, rng);
  CHECK(std::all_of(g1.labels.begin(), g1.labels.end(), [](int g) { return g == 0; }));
  for (int s = 0; s < g1.data.num_units(); ++s) CHECK(g1.data.length(s) == 2);

  const int n = 100000;
  auto mix = sample_mixture_dataset(params({{0.2, 0.3, 0.5}, {0.5, 0.3, 0.2}}, {0.5, 0.5}),
                                    n, rng);
  const double frac =
      static_cast<double>(std::count(mix.labels.begin(), mix.labels.end(), 0)) / n;
  CHECK(std::abs(frac - 0.5) < 3 * std::sqrt(0.25 / n));

  std::vector<int> lengths{1, 2, 1};
  auto sized = sample_mixture_dataset(params({{0.2, 0.3, 0.5}}, {1.0}), lengths, rng);
  CHECK(sized.data.lengths() == lengths);
  lengths[0] = 3;
  CHECK_THROWS(sample_mixture_dataset(params({{0.2, 0.3, 0.5}}, {1.0}), lengths, rng));
}

TEST_CASE("censoring settings") {
  const auto a = censoring_setting('A');
  CHECK(a.at(1) == 0.0);
  CHECK(a.at(2) == 0.02);
  CHECK(a.at(3) == 0.04);
  CHECK(a.at(4) == 0.10);
  CHECK(a.at(5) == 0.84);
  CHECK(censoring_setting('B').at(5) == 0.45);
  CHECK(censoring_setting('C').at(1) == 0.05);
  CHECK_THROWS(censoring_setting('D'));

  Rng rng = make_stream(5, 0);
  const auto theta = params({{0.1, 0.2, 0.3, 0.15, 0.05, 0.2}}, {1.0});
  const auto full = sample_mixture_dataset(theta, 100000, rng).data;
  const auto same = apply_censoring(full, {{5, 1.0}}, rng);
  CHECK(same.orderings() == full.orderings());

  const auto c = apply_censoring(full, censoring_setting('C'), rng);
  int partial = 0;
  for (int s = 0; s < c.num_units(); ++s) {
    partial += c.length(s) < 5;
    CHECK(c.ordering(s).items()[0] == full.ordering(s).items()[0]);
  }
  const double frac = partial / 100000.0;
  CHECK(std::abs(frac - 0.70) < 3 * std::sqrt(0.21 / 100000));

  CHECK_THROWS_AS(apply_censoring(full, {{5, 0.5}, {4, 0.4}}, rng), std::invalid_argument);
  CHECK_THROWS_AS(apply_censoring(c, {{1, 1.0}}, rng), std::invalid_argument);
}

TEST_CASE("parameter validation and JSON") {
  CHECK_THROWS_AS(params({{0.5, 0.0}}, {1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(MixtureParams(SupportMatrix::Constant(2, 3, 1.0), Eigen::Vector2d(0.5, 0.6)),
                  std::invalid_argument);
  const auto theta = params({{2.0, 1.0, 1.0}, {1.0, 1.0, 2.0}}, {0.25, 0.75});
  const auto canon = theta.canonical();
  CHECK(canon.is_canonical());
  CHECK(canon.p(0, 0) == Approx(0.5));
  const auto back = params_from_json(params_to_json(theta));
  CHECK(back.p.isApprox(canon.p, 1e-15));
  CHECK(back.omega.isApprox(theta.omega, 1e-15));
  const std::vector<int> perm{1, 0};
  const auto swapped = theta.permuted(perm);
  CHECK(swapped.p.row(0) == theta.p.row(1));
  CHECK(swapped.omega(0) == 0.75);
  CHECK(theta.marginal_support().sum() == Approx(1.0));
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "plmix/map_em.hpp"

using namespace plmix;
using doctest::Approx;

namespace {

MixtureParams params(std::vector<std::vector<double>> rows, std::vector<double> w) {
  SupportMatrix p(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t g = 0; g < rows.size(); ++g) {
    for (std::size_t i = 0; i < rows[g].size(); ++i) p(g, i) = rows[g][i];
  }
  return MixtureParams(p, Eigen::Map<Eigen::VectorXd>(w.data(), w.size()));
}

RankingDataset simulate(const MixtureParams& theta, int n, std::uint64_t seed,
                        bool partial = true) {
  Rng rng = make_stream(seed, 0);
  std::vector<int> lengths(static_cast<std::size_t>(n), theta.num_items() - 1);
  if (partial) {
    std::uniform_int_distribution<int> len(1, theta.num_items() - 1);
    for (int& l : lengths) l = len(rng);
  }
  return sample_mixture_dataset(theta, lengths, rng).data;
}

std::vector<std::vector<int>> raw(const RankingDataset& ds) {
  std::vector<std::vector<int>> out;
  for (const auto& o : ds.orderings()) out.emplace_back(o.items().begin(), o.items().end());
  return out;
}

}  // namespace

TEST_CASE("prior factories") {
  const auto def = PriorHyper::weakly_informative(2, 4);
  CHECK(def.c(1, 3) == 1.0);
  CHECK(def.d(0) == 0.001);
  CHECK(def.alpha(1) == 1.0);
  CHECK_FALSE(def.is_flat());
  CHECK(PriorHyper::flat(2, 4).is_flat());
  CHECK_THROWS_AS(PriorHyper::uniform(2, 3, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PriorHyper::uniform(2, 3, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(def.validate(3, 4), std::invalid_argument);
}

TEST_CASE("e_step") {
  const auto ds = simulate(params({{0.4, 0.3, 0.2, 0.1}}, {1.0}), 30, 1);
  const auto same = e_step(ds, params({{0.4, 0.3, 0.2, 0.1}, {0.4, 0.3, 0.2, 0.1}}, {0.5, 0.5}));
  CHECK((same.z.array() - 0.5).abs().maxCoeff() < 1e-15);

  const auto single = e_step(ds, params({{0.4, 0.3, 0.2, 0.1}}, {1.0}));
  CHECK((single.z.array() == 1.0).all());
  CHECK(single.log_lik == Approx(mixture_log_lik(ds, params({{0.4, 0.3, 0.2, 0.1}}, {1.0}))));
  for (int s = 0; s < ds.num_units(); ++s) {
    const auto items = ds.ordering(s).items();
    double remaining = 1.0;
    for (std::size_t t = 0; t < items.size(); ++t) {
      CHECK(single.denom(0, static_cast<Eigen::Index>(ds.stage_offset(s) + t)) ==
            Approx(remaining));
      remaining -= std::vector<double>{0.4, 0.3, 0.2, 0.1}[static_cast<std::size_t>(items[t])];
    }
  }

  const RankingDataset one(3, {PartialOrdering({0, 1}, 3)});
  const auto es = e_step(one, params({{0.5, 0.3, 0.2}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {0.5, 0.5}));
  CHECK(es.z(0, 0) == Approx(0.3 / (0.3 + 1.0 / 6)).epsilon(1e-12));
  CHECK((es.denom.array() > 0.0).all());
}

TEST_CASE("m_step weight update") {
  std::vector<PartialOrdering> ords(100, PartialOrdering({0}, 2));
  const RankingDataset ds(2, ords);
  EStepResult es = e_step(ds, params({{0.5, 0.5}, {0.5, 0.5}}, {0.5, 0.5}));
  for (int s = 0; s < 100; ++s) {
    es.z(s, 0) = s < 30 ? 1.0 : 0.0;
    es.z(s, 1) = 1.0 - es.z(s, 0);
  }
  const auto ms = m_step(ds, es, PriorHyper::flat(2, 2));
  CHECK(ms.theta.omega(0) == Approx(0.3).epsilon(1e-15));
  CHECK(ms.theta.omega(1) == Approx(0.7).epsilon(1e-15));

  // Flat weights are exactly the column means of z.
  const auto ds2 = simulate(params({{0.5, 0.3, 0.2}, {0.1, 0.2, 0.7}}, {0.4, 0.6}), 57, 3);
  const auto es2 = e_step(ds2, params({{0.3, 0.3, 0.4}, {0.2, 0.5, 0.3}}, {0.5, 0.5}));
  const auto ms2 = m_step(ds2, es2, PriorHyper::flat(2, 3));
  const Eigen::VectorXd mean = es2.z.colwise().mean().transpose();
  CHECK(std::abs(ms2.theta.omega(0) - mean(0)) < 1e-15);
}

TEST_CASE("m_step floors supports of items never ranked in a component") {
  const RankingDataset ds(3, {PartialOrdering({0}, 3), PartialOrdering({1}, 3)});
  const auto ms = m_step(ds, e_step(ds, params({{0.3, 0.3, 0.4}}, {1.0})),
                         PriorHyper::flat(1, 3));
  CHECK(ms.floored == 1);
  CHECK(ms.theta.p(0, 2) > 0.0);
  CHECK(ms.theta.p(0, 2) == Approx(1e-12 * (ms.theta.p(0, 0) + ms.theta.p(0, 1))).epsilon(1e-6));
}

TEST_CASE("log_posterior") {
  const auto ds = simulate(params({{0.4, 0.3, 0.2, 0.1}}, {1.0}), 20, 2);
  const auto theta = params({{4.0, 3.0, 2.0, 1.0}}, {1.0});
  const double flat = log_posterior(ds, theta, PriorHyper::flat(1, 4));
  CHECK(flat == Approx(mixture_log_lik(ds, theta)).epsilon(1e-15));
  CHECK(log_posterior(ds, theta, PriorHyper::weakly_informative(1, 4)) ==
        Approx(flat - 0.001 * 10.0).epsilon(1e-14));
  CHECK(log_posterior(ds, theta, PriorHyper::uniform(1, 4, 2.0, 0.0, 1.0)) ==
        Approx(flat + std::log(24.0)).epsilon(1e-14));
}

TEST_CASE("EM trace is monotone") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const int k = 3 + rep % 3;
    const int g = 1 + rep % 3;
    std::vector<std::vector<double>> rows;
    for (int h = 0; h < g; ++h) rows.push_back(oracle::random_simplex(k, rng));
    const auto ds = simulate(params(rows, std::vector<double>(g, 1.0 / g)), 80, rep);
    Rng start_rng = make_stream(99, rep);
    const auto prior = rep % 2 ? PriorHyper::flat(g, k) : PriorHyper::weakly_informative(g, k);
    const auto r = run_em(ds, random_start(g, prior, start_rng), prior, {200, 1e-12, 1, 0});
    for (std::size_t t = 1; t < r.trace.size(); ++t) {
      CHECK(r.trace[t] >= r.trace[t - 1] - 1e-9);
    }
    for (int s = 0; s < ds.num_units(); ++s) CHECK(r.z.row(s).sum() == Approx(1.0));
  }
}

TEST_CASE("EM stops at a fixed point") {
  const auto ds = simulate(params({{0.35, 0.25, 0.2, 0.2}}, {1.0}), 60, 8, false);
  const auto prior = PriorHyper::flat(1, 4);
  const auto r = run_em(ds, params({{0.25, 0.25, 0.25, 0.25}}, {1.0}), prior,
                        {20000, -1.0, 1, 0});
  const auto again = m_step(ds, e_step(ds, r.theta), prior).theta.canonical();
  CHECK((again.p - r.canonical.p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("flat G=1 EM satisfies the likelihood stationarity condition") {
  const auto ds = simulate(params({{0.3, 0.1, 0.25, 0.15, 0.2}}, {1.0}), 400, 4);
  EmConfig cfg;
  cfg.tol = 1e-300;
  cfg.max_iter = 100000;
  cfg.n_starts = 2;
  const auto r = fit_map(ds, 1, PriorHyper::flat(1, 5), cfg);
  const auto data = raw(ds);
  const auto loglik = [&](const std::vector<double>& logp) {
    std::vector<double> p(logp.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logp[i]);
    return oracle::mixture_log_lik(data, {p}, {1.0});
  };
  std::vector<double> at(5);
  for (int i = 0; i < 5; ++i) at[static_cast<std::size_t>(i)] = std::log(r.canonical.p(0, i));
  const double h = 1e-5;
  for (int i = 0; i < 5; ++i) {
    auto up = at, down = at;
    up[static_cast<std::size_t>(i)] += h;
    down[static_cast<std::size_t>(i)] -= h;
    CHECK(std::abs((loglik(up) - loglik(down)) / (2 * h)) < 1e-6);
  }
}

TEST_CASE("G=1 fit recovers simulated supports") {
  const auto truth = params({{0.35, 0.25, 0.2, 0.12, 0.08}}, {1.0});
  const auto ds = simulate(truth, 5000, 12, false);
  EmConfig cfg;
  cfg.n_starts = 2;
  const auto r = fit_map(ds, 1, PriorHyper::weakly_informative(1, 5), cfg);
  CHECK(r.converged);
  CHECK((r.canonical.p - truth.p).cwiseAbs().sum() < 0.02);
}

TEST_CASE("EM is permutation equivariant") {
  const auto ds = simulate(params({{0.5, 0.2, 0.2, 0.1}, {0.1, 0.2, 0.2, 0.5}}, {0.5, 0.5}), 100, 5);
  const auto prior = PriorHyper::weakly_informative(2, 4);
  const auto start = params({{0.3, 0.3, 0.2, 0.2}, {0.2, 0.2, 0.3, 0.3}}, {0.4, 0.6});
  const std::vector<int> perm{1, 0};
  const auto a = run_em(ds, start, prior, {50, 1e-12, 1, 0});
  const auto b = run_em(ds, start.permuted(perm), prior, {50, 1e-12, 1, 0});
  CHECK((a.theta.permuted(perm).p - b.theta.p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.trace.back() == Approx(b.trace.back()).epsilon(1e-14));
}

TEST_CASE("fit_map argument checks and determinism") {
  const auto ds = simulate(params({{0.5, 0.3, 0.2}}, {1.0}), 40, 6);
  CHECK_THROWS_AS(fit_map(ds, 0, PriorHyper::flat(1, 3), {}), std::invalid_argument);
  CHECK_THROWS_AS(run_em(ds, params({{0.5, 0.3, 0.2}}, {1.0}),
                         PriorHyper::uniform(1, 3, 1.0, 0.0, 0.5), {}),
                  std::invalid_argument);
  EmConfig cfg;
  cfg.n_starts = 3;
  cfg.seed = 17;
  const auto a = fit_map(ds, 2, PriorHyper::weakly_informative(2, 3), cfg);
  const auto b = fit_map(ds, 2, PriorHyper::weakly_informative(2, 3), cfg);
  CHECK(a.theta.p == b.theta.p);
  CHECK(a.trace == b.trace);
  const auto j = map_to_json(a);
  CHECK(j["G"] == 2);
  CHECK(j["modal_orderings"][0].size() == 3);
  CHECK(j["p"][0].get<std::vector<double>>().size() == 3);
}

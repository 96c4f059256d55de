#include "plmix/map_em.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace plmix {

namespace {

constexpr double kSupportFloor = 1e-12;

std::vector<double> row_vector(const Eigen::Ref<const Eigen::RowVectorXd>& r) {
  return std::vector<double>(r.data(), r.data() + r.size());
}

}  // namespace

PriorHyper PriorHyper::uniform(int num_components, int num_items, double shape,
                               double rate, double concentration) {
  PriorHyper prior;
  prior.c = SupportMatrix::Constant(num_components, num_items, shape);
  prior.d = Eigen::VectorXd::Constant(num_components, rate);
  prior.alpha = Eigen::VectorXd::Constant(num_components, concentration);
  prior.validate(num_components, num_items);
  return prior;
}

PriorHyper PriorHyper::weakly_informative(int num_components, int num_items) {
  return uniform(num_components, num_items, 1.0, 0.001, 1.0);
}

PriorHyper PriorHyper::flat(int num_components, int num_items) {
  return uniform(num_components, num_items, 1.0, 0.0, 1.0);
}

bool PriorHyper::is_flat() const {
  return (c.array() == 1.0).all() && (d.array() == 0.0).all() &&
         (alpha.array() == 1.0).all();
}

void PriorHyper::validate(int num_components, int num_items) const {
  if (c.rows() != num_components || c.cols() != num_items ||
      d.size() != num_components || alpha.size() != num_components) {
    throw std::invalid_argument("prior hyperparameters do not match G=" +
                                std::to_string(num_components) + ", K=" +
                                std::to_string(num_items));
  }
  if (!(c.array() > 0.0).all()) {
    throw std::invalid_argument("Gamma shapes c must be positive");
  }
  if ((d.array() < 0.0).any()) {
    throw std::invalid_argument("Gamma rates d must be nonnegative");
  }
  if (!(alpha.array() > 0.0).all()) {
    throw std::invalid_argument("Dirichlet parameters must be positive");
  }
}

nlohmann::json prior_to_json(const PriorHyper& prior) {
  nlohmann::json j;
  auto rows = nlohmann::json::array();
  for (Eigen::Index g = 0; g < prior.c.rows(); ++g) {
    rows.push_back(row_vector(prior.c.row(g)));
  }
  j["c"] = std::move(rows);
  j["d"] = std::vector<double>(prior.d.begin(), prior.d.end());
  j["alpha"] = std::vector<double>(prior.alpha.begin(), prior.alpha.end());
  return j;
}

EStepResult e_step(const RankingDataset& ds, const MixtureParams& current) {
  const int n = ds.num_units();
  const int num_g = current.num_components();
  EStepResult out;
  out.at = current;
  out.z.resize(n, num_g);
  out.denom.resize(num_g, static_cast<Eigen::Index>(ds.total_stages()));

  std::vector<double> terms(static_cast<std::size_t>(num_g));
  for (int s = 0; s < n; ++s) {
    const auto items = ds.ordering(s).items();
    const auto offset = static_cast<Eigen::Index>(ds.stage_offset(s));
    for (int g = 0; g < num_g; ++g) {
      thread_local std::vector<double> scratch;
      scratch.resize(items.size());
      detail::stage_normalizers(items, current.support(g), scratch);
      for (std::size_t t = 0; t < items.size(); ++t) {
        out.denom(g, offset + static_cast<Eigen::Index>(t)) = scratch[t];
      }
      const double lp =
          detail::pl_log_prob_unchecked(items, current.support(g));
      const double w = current.omega(g);
      terms[static_cast<std::size_t>(g)] =
          w > 0.0 ? std::log(w) + lp
                  : -std::numeric_limits<double>::infinity();
    }
    const double norm = log_sum_exp(terms);
    out.log_lik += norm;
    double total = 0.0;
    for (int g = 0; g < num_g; ++g) {
      const double v = std::exp(terms[static_cast<std::size_t>(g)] - norm);
      out.z(s, g) = v;
      total += v;
    }
    out.z.row(s) /= total;
  }
  return out;
}

MStepResult m_step(const RankingDataset& ds, const EStepResult& expectations,
                   const PriorHyper& prior) {
  const int n = ds.num_units();
  const int k = ds.num_items();
  const int num_g = static_cast<int>(expectations.z.cols());
  prior.validate(num_g, k);

  SupportMatrix numer = prior.c.array() - 1.0;
  SupportMatrix rate(num_g, k);
  for (int g = 0; g < num_g; ++g) rate.row(g).setConstant(prior.d(g));

  std::vector<double> prefix;
  for (int s = 0; s < n; ++s) {
    const auto items = ds.ordering(s).items();
    const auto offset = static_cast<Eigen::Index>(ds.stage_offset(s));
    prefix.resize(items.size());
    for (int g = 0; g < num_g; ++g) {
      const double zsg = expectations.z(s, g);
      if (zsg == 0.0) continue;
      double acc = 0.0;
      for (std::size_t t = 0; t < items.size(); ++t) {
        acc += 1.0 / expectations.denom(g, offset + static_cast<Eigen::Index>(t));
        prefix[t] = acc;
      }
      // Item at 0-based position r is available at stages 0..r; unranked
      // items at every stage.
      for (int i = 0; i < k; ++i) {
        const int pos = ds.position(s, i);
        if (pos >= 0) {
          numer(g, i) += zsg;
          rate(g, i) += zsg * prefix[static_cast<std::size_t>(pos)];
        } else {
          rate(g, i) += zsg * acc;
        }
      }
    }
  }

  const Eigen::VectorXd mass = expectations.z.colwise().sum().transpose();
  const double weight_denom = prior.alpha.sum() - num_g + n;
  if (!(weight_denom > 0.0)) {
    throw std::invalid_argument("mixture weight update has a nonpositive "
                                "denominator; Dirichlet parameters below 1?");
  }

  MStepResult out;
  out.theta.p.resize(num_g, k);
  out.theta.omega.resize(num_g);
  for (int g = 0; g < num_g; ++g) {
    double positive_total = 0.0;
    for (int i = 0; i < k; ++i) {
      const double v = numer(g, i) > 0.0 && rate(g, i) > 0.0
                           ? numer(g, i) / rate(g, i)
                           : 0.0;
      out.theta.p(g, i) = v;
      positive_total += v;
    }
    if (!(positive_total > 0.0) || !std::isfinite(positive_total)) {
      // No data mass and no prior mass: leave the component where it was.
      out.theta.p.row(g) = expectations.at.p.row(g);
      out.theta.omega(g) =
          std::max(0.0, (prior.alpha(g) - 1.0 + mass(g)) / weight_denom);
      continue;
    }
    for (int i = 0; i < k; ++i) {
      if (!(out.theta.p(g, i) > kSupportFloor * positive_total)) {
        out.theta.p(g, i) = kSupportFloor * positive_total;
        ++out.floored;
      }
    }
    out.theta.omega(g) =
        std::max(0.0, (prior.alpha(g) - 1.0 + mass(g)) / weight_denom);
  }
  out.theta.omega /= out.theta.omega.sum();
  return out;
}

namespace {

double log_prior(const MixtureParams& theta, const PriorHyper& prior) {
  double out = 0.0;
  for (int g = 0; g < theta.num_components(); ++g) {
    for (int i = 0; i < theta.num_items(); ++i) {
      const double v = theta.p(g, i);
      if (prior.c(g, i) != 1.0) out += (prior.c(g, i) - 1.0) * std::log(v);
      out -= prior.d(g) * v;
    }
    if (prior.alpha(g) != 1.0) {
      out += (prior.alpha(g) - 1.0) * std::log(theta.omega(g));
    }
  }
  return out;
}

}  // namespace

double log_posterior(const RankingDataset& ds, const MixtureParams& theta,
                     const PriorHyper& prior) {
  prior.validate(theta.num_components(), theta.num_items());
  return mixture_log_lik(ds, theta) + log_prior(theta, prior);
}

MixtureParams random_start(int num_components, const PriorHyper& prior,
                           Rng& rng) {
  const int k = prior.num_items();
  SupportMatrix p(num_components, k);
  for (int g = 0; g < num_components; ++g) {
    for (int i = 0; i < k; ++i) {
      double v = 0.0;
      while (!(v > 0.0) || !std::isfinite(v)) {
        v = prior.d(g) > 0.0 ? draw_gamma(prior.c(g, i), prior.d(g), rng)
                             : 0.1 + 0.9 * draw_uniform(rng);
      }
      p(g, i) = v;
    }
    // Likelihood is scale-free and the prior pulls the scale toward zero
    // only slowly; starting on the unit scale keeps that drift negligible.
    p.row(g) /= p.row(g).sum();
  }
  return MixtureParams(std::move(p),
                       Eigen::VectorXd::Constant(num_components,
                                                 1.0 / num_components));
}

MapResult run_em(const RankingDataset& ds, const MixtureParams& start,
                 const PriorHyper& prior, const EmConfig& config) {
  start.validate();
  if (start.num_items() != ds.num_items()) {
    throw std::invalid_argument("start has the wrong number of items");
  }
  prior.validate(start.num_components(), start.num_items());
  for (int g = 0; g < start.num_components(); ++g) {
    if (prior.alpha(g) < 1.0) {
      throw std::invalid_argument(
          "MAP estimation requires Dirichlet parameters alpha_g >= 1");
    }
  }

  MapResult out;
  MixtureParams theta = start;
  EStepResult es = e_step(ds, theta);
  double current = es.log_lik + log_prior(theta, prior);
  out.trace.push_back(current);
  int floored = 0;
  for (int it = 0; it < config.max_iter; ++it) {
    MStepResult ms = m_step(ds, es, prior);
    theta = std::move(ms.theta);
    floored = ms.floored;
    es = e_step(ds, theta);
    const double next = es.log_lik + log_prior(theta, prior);
    out.trace.push_back(next);
    const bool done = std::abs(next - current) < config.tol * std::abs(current);
    current = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.iterations = static_cast<int>(out.trace.size()) - 1;
  out.floored = floored;
  out.z = std::move(es.z);
  out.canonical = theta.canonical();
  out.theta = std::move(theta);
  return out;
}

MapResult fit_map(const RankingDataset& ds, int num_components,
                  const PriorHyper& prior, const EmConfig& config,
                  const std::vector<MixtureParams>& extra_starts) {
  if (num_components < 1) {
    throw std::invalid_argument("number of components must be >= 1");
  }
  prior.validate(num_components, ds.num_items());
  std::vector<MixtureParams> starts = extra_starts;
  for (int j = 0; j < config.n_starts; ++j) {
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(j));
    starts.push_back(random_start(num_components, prior, rng));
  }
  if (starts.empty()) throw std::invalid_argument("no EM starting points");

  MapResult best;
  bool have = false;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    MapResult r = run_em(ds, starts[j], prior, config);
    r.best_start = static_cast<int>(j);
    if (!have || r.final_log_posterior() > best.final_log_posterior()) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

nlohmann::json map_to_json(const MapResult& result) {
  nlohmann::json j = params_to_json(result.canonical);
  auto raw = nlohmann::json::array();
  for (Eigen::Index g = 0; g < result.theta.p.rows(); ++g) {
    raw.push_back(row_vector(result.theta.p.row(g)));
  }
  j["p_internal"] = std::move(raw);
  j["log_posterior"] = result.final_log_posterior();
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["floored_supports"] = result.floored;
  j["best_start"] = result.best_start;
  std::vector<std::vector<int>> modal;
  for (int g = 0; g < result.canonical.num_components(); ++g) {
    auto m = modal_ordering(result.canonical.support(g));
    for (int& item : m) ++item;
    modal.push_back(std::move(m));
  }
  j["modal_orderings"] = modal;
  return j;
}

}  // namespace plmix

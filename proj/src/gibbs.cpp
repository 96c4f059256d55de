#include "plmix/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace plmix {

void GibbsConfig::validate() const {
  if (n_iter < 1) throw std::invalid_argument("n_iter must be positive");
  if (burn_in < 0 || burn_in >= n_iter) {
    throw std::invalid_argument("burn_in must be in 0..n_iter-1");
  }
  if (thin < 1) throw std::invalid_argument("thin must be positive");
}

int GibbsConfig::retained() const { return (n_iter - burn_in) / thin; }

MixtureParams Chain::params(int draw) const {
  return MixtureParams(p[static_cast<std::size_t>(draw)],
                       omega[static_cast<std::size_t>(draw)]);
}

std::vector<double> sample_y(const RankingDataset& ds, std::span<const int> z,
                             const SupportMatrix& p, Rng& rng) {
  std::vector<double> y(ds.total_stages());
  std::vector<double> denom;
  std::exponential_distribution<double> unit_exp(1.0);
  for (int s = 0; s < ds.num_units(); ++s) {
    const auto items = ds.ordering(s).items();
    const int g = z[static_cast<std::size_t>(s)];
    denom.resize(items.size());
    detail::stage_normalizers(
        items, {p.row(g).data(), static_cast<std::size_t>(p.cols())}, denom);
    const std::size_t offset = ds.stage_offset(s);
    for (std::size_t t = 0; t < items.size(); ++t) {
      y[offset + t] = unit_exp(rng) / denom[t];
    }
  }
  return y;
}

namespace {

int draw_from_log_mass(std::span<double> log_mass, Rng& rng) {
  const double norm = log_sum_exp(log_mass);
  double u = draw_uniform(rng);
  const int num_g = static_cast<int>(log_mass.size());
  for (int g = 0; g < num_g; ++g) {
    u -= std::exp(log_mass[static_cast<std::size_t>(g)] - norm);
    if (u < 0.0) return g;
  }
  for (int g = num_g; g-- > 0;) {
    if (std::isfinite(log_mass[static_cast<std::size_t>(g)])) return g;
  }
  return 0;
}

}  // namespace

std::vector<int> sample_z(const RankingDataset& ds, std::span<const double> y,
                          const MixtureParams& theta, Rng& rng) {
  const int num_g = theta.num_components();
  if (y.size() != ds.total_stages()) {
    throw std::invalid_argument("latent y does not match the dataset");
  }
  const SupportMatrix log_p = theta.p.array().log();
  std::vector<double> log_mass(static_cast<std::size_t>(num_g));
  std::vector<double> denom;
  std::vector<int> z(static_cast<std::size_t>(ds.num_units()));
  for (int s = 0; s < ds.num_units(); ++s) {
    const auto items = ds.ordering(s).items();
    const std::size_t offset = ds.stage_offset(s);
    denom.resize(items.size());
    for (int g = 0; g < num_g; ++g) {
      // sum_i p_gi sum_t delta_sti y_st = sum_t y_st * (stage normalizer).
      detail::stage_normalizers(items, theta.support(g), denom);
      double v = theta.omega(g) > 0.0
                     ? std::log(theta.omega(g))
                     : -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < items.size(); ++t) {
        v += log_p(g, items[t]) - y[offset + t] * denom[t];
      }
      log_mass[static_cast<std::size_t>(g)] = v;
    }
    z[static_cast<std::size_t>(s)] = draw_from_log_mass(log_mass, rng);
  }
  return z;
}

GammaPosterior support_posterior(const RankingDataset& ds,
                                 std::span<const double> y,
                                 std::span<const int> z,
                                 const PriorHyper& prior) {
  const int num_g = prior.num_components();
  const int k = ds.num_items();
  prior.validate(num_g, k);
  GammaPosterior out{prior.c, SupportMatrix(num_g, k)};
  for (int g = 0; g < num_g; ++g) out.rate.row(g).setConstant(prior.d(g));

  std::vector<double> prefix;
  for (int s = 0; s < ds.num_units(); ++s) {
    const int g = z[static_cast<std::size_t>(s)];
    if (g < 0 || g >= num_g) {
      throw std::invalid_argument("label out of range for unit " +
                                  std::to_string(s + 1));
    }
    const auto items = ds.ordering(s).items();
    const std::size_t offset = ds.stage_offset(s);
    prefix.resize(items.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < items.size(); ++t) {
      acc += y[offset + t];
      prefix[t] = acc;
    }
    for (int i = 0; i < k; ++i) {
      const int pos = ds.position(s, i);
      if (pos >= 0) {
        out.shape(g, i) += 1.0;
        out.rate(g, i) += prefix[static_cast<std::size_t>(pos)];
      } else {
        out.rate(g, i) += acc;
      }
    }
  }
  return out;
}

SupportMatrix sample_p(const RankingDataset& ds, std::span<const double> y,
                       std::span<const int> z, const PriorHyper& prior,
                       Rng& rng) {
  const GammaPosterior post = support_posterior(ds, y, z, prior);
  SupportMatrix p(post.shape.rows(), post.shape.cols());
  for (Eigen::Index g = 0; g < p.rows(); ++g) {
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      if (!(post.rate(g, i) > 0.0)) {
        throw std::runtime_error(
            "support full conditional has a nonpositive rate (empty component "
            "under a zero prior rate)");
      }
      p(g, i) = std::max(draw_gamma(post.shape(g, i), post.rate(g, i), rng),
                         std::numeric_limits<double>::min());
    }
  }
  return p;
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentration,
                                 Rng& rng) {
  Eigen::VectorXd draw(concentration.size());
  for (Eigen::Index g = 0; g < draw.size(); ++g) {
    draw(g) = draw_gamma(concentration(g), 1.0, rng);
  }
  const double total = draw.sum();
  if (!(total > 0.0)) {
    // All Gamma draws underflowed; put the mass on the largest concentration.
    draw.setZero();
    Eigen::Index arg = 0;
    concentration.maxCoeff(&arg);
    draw(arg) = 1.0;
    return draw;
  }
  return draw / total;
}

Eigen::VectorXd sample_omega(std::span<const int> z, const PriorHyper& prior,
                             Rng& rng) {
  Eigen::VectorXd conc = prior.alpha;
  for (int g : z) {
    if (g < 0 || g >= conc.size()) throw std::invalid_argument("bad label");
    conc(g) += 1.0;
  }
  return sample_dirichlet(conc, rng);
}

void gibbs_sweep(const RankingDataset& ds, GibbsState& state,
                 const PriorHyper& prior, Rng& rng) {
  const std::vector<double> y = sample_y(ds, state.z, state.p, rng);
  {
    MixtureParams theta;
    theta.p = state.p;
    theta.omega = state.omega;
    state.z = sample_z(ds, y, theta, rng);
  }
  state.p = sample_p(ds, y, state.z, prior, rng);
  state.omega = sample_omega(state.z, prior, rng);
}

Chain run_chain(const RankingDataset& ds, int num_components,
                const PriorHyper& prior, const GibbsConfig& config,
                const MapResult* init) {
  config.validate();
  if (num_components < 1 || num_components > 255) {
    throw std::invalid_argument("number of components must be in 1..255");
  }
  prior.validate(num_components, ds.num_items());

  Rng rng = make_stream(config.seed, 0x6962);
  GibbsState state;
  if (init != nullptr) {
    if (init->theta.num_components() != num_components ||
        init->theta.num_items() != ds.num_items()) {
      throw std::invalid_argument("MAP initialization has the wrong shape");
    }
    state.p = init->theta.p;
    state.omega = init->theta.omega;
    state.z.resize(static_cast<std::size_t>(ds.num_units()));
    for (int s = 0; s < ds.num_units(); ++s) {
      Eigen::Index arg = 0;
      init->z.row(s).maxCoeff(&arg);
      state.z[static_cast<std::size_t>(s)] = static_cast<int>(arg);
    }
  } else {
    const MixtureParams start = random_start(num_components, prior, rng);
    state.p = start.p;
    state.omega = start.omega;
    std::uniform_int_distribution<int> label(0, num_components - 1);
    state.z.resize(static_cast<std::size_t>(ds.num_units()));
    for (int& g : state.z) g = label(rng);
  }

  Chain chain;
  chain.num_components = num_components;
  chain.num_items = ds.num_items();
  chain.num_units = ds.num_units();
  chain.config = config;
  chain.prior = prior;
  const auto keep = static_cast<std::size_t>(config.retained());
  chain.p.reserve(keep);
  chain.omega.reserve(keep);
  chain.deviance.reserve(keep);
  if (config.store_labels) chain.z.reserve(keep);

  for (int it = 1; it <= config.n_iter; ++it) {
    gibbs_sweep(ds, state, prior, rng);
    if (it <= config.burn_in || (it - config.burn_in) % config.thin != 0) {
      continue;
    }
    chain.p.push_back(state.p);
    chain.omega.push_back(state.omega);
    chain.deviance.push_back(
        -2.0 * mixture_log_lik(ds, MixtureParams(state.p, state.omega)));
    if (config.store_labels) {
      chain.z.emplace_back(state.z.begin(), state.z.end());
    }
  }
  return chain;
}

}  // namespace plmix

#include "plmix/plcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plmix {

MixtureParams::MixtureParams(SupportMatrix supports, Eigen::VectorXd weights)
    : p(std::move(supports)), omega(std::move(weights)) {
  validate();
}

void MixtureParams::validate() const {
  if (p.rows() < 1 || p.cols() < 2) {
    throw std::invalid_argument("support matrix must be G x K with G>=1, K>=2");
  }
  if (omega.size() != p.rows()) {
    throw std::invalid_argument("weights length " +
                                std::to_string(omega.size()) +
                                " does not match G=" + std::to_string(p.rows()));
  }
  if (!(p.array() > 0.0).all() || !p.allFinite()) {
    throw std::invalid_argument("support parameters must be positive");
  }
  if ((omega.array() < 0.0).any() || !omega.allFinite() ||
      std::abs(omega.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture weights must lie on the simplex");
  }
}

MixtureParams MixtureParams::canonical() const {
  MixtureParams out = *this;
  for (Eigen::Index g = 0; g < p.rows(); ++g) out.p.row(g) /= p.row(g).sum();
  return out;
}

bool MixtureParams::is_canonical(double tol) const {
  for (Eigen::Index g = 0; g < p.rows(); ++g) {
    if (std::abs(p.row(g).sum() - 1.0) > tol) return false;
  }
  return true;
}

Eigen::VectorXd MixtureParams::marginal_support() const {
  const MixtureParams c = canonical();
  return (c.omega.transpose() * c.p).transpose();
}

MixtureParams MixtureParams::permuted(std::span<const int> perm) const {
  if (static_cast<Eigen::Index>(perm.size()) != p.rows()) {
    throw std::invalid_argument("permutation size does not match G");
  }
  MixtureParams out = *this;
  for (std::size_t g = 0; g < perm.size(); ++g) {
    out.p.row(static_cast<Eigen::Index>(g)) = p.row(perm[g]);
    out.omega(static_cast<Eigen::Index>(g)) = omega(perm[g]);
  }
  return out;
}

nlohmann::json params_to_json(const MixtureParams& theta) {
  const MixtureParams c = theta.canonical();
  nlohmann::json j;
  j["G"] = c.num_components();
  auto rows = nlohmann::json::array();
  for (int g = 0; g < c.num_components(); ++g) {
    rows.push_back(std::vector<double>(c.p.row(g).begin(), c.p.row(g).end()));
  }
  j["p"] = std::move(rows);
  j["omega"] = std::vector<double>(c.omega.begin(), c.omega.end());
  return j;
}

MixtureParams params_from_json(const nlohmann::json& j) {
  const auto rows = j.at("p").get<std::vector<std::vector<double>>>();
  const auto weights = j.at("omega").get<std::vector<double>>();
  if (rows.empty()) throw std::invalid_argument("empty support matrix");
  if (j.contains("G") && j.at("G").get<std::size_t>() != rows.size()) {
    throw std::invalid_argument("G does not match the support matrix");
  }
  SupportMatrix p(rows.size(), rows.front().size());
  for (std::size_t g = 0; g < rows.size(); ++g) {
    if (rows[g].size() != rows.front().size()) {
      throw std::invalid_argument("ragged support matrix");
    }
    for (std::size_t i = 0; i < rows[g].size(); ++i) p(g, i) = rows[g][i];
  }
  return MixtureParams(std::move(p),
                       Eigen::Map<const Eigen::VectorXd>(
                           weights.data(), static_cast<Eigen::Index>(weights.size())));
}

namespace detail {

void stage_normalizers(std::span<const int> ordering, std::span<const double> p,
                       std::span<double> out) {
  thread_local std::vector<char> ranked;
  ranked.assign(p.size(), 0);
  for (int item : ordering) ranked[static_cast<std::size_t>(item)] = 1;
  double remaining = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!ranked[i]) remaining += p[i];
  }
  for (std::size_t t = ordering.size(); t-- > 0;) {
    remaining += p[static_cast<std::size_t>(ordering[t])];
    out[t] = remaining;
  }
}

double pl_log_prob_unchecked(std::span<const int> ordering,
                             std::span<const double> p) {
  thread_local std::vector<double> denom;
  denom.resize(ordering.size());
  stage_normalizers(ordering, p, denom);
  // One log per flush of the running product instead of one per stage.
  double out = 0.0;
  double prod = 1.0;
  for (std::size_t t = 0; t < ordering.size(); ++t) {
    prod *= p[static_cast<std::size_t>(ordering[t])] / denom[t];
    if (prod < 1e-280) {
      out += std::log(prod);
      prod = 1.0;
    }
  }
  return out + std::log(prod);
}

}  // namespace detail

double pl_log_prob(std::span<const int> ordering, std::span<const double> p) {
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("support parameters must be positive");
    }
  }
  const int k = static_cast<int>(p.size());
  if (ordering.empty() || static_cast<int>(ordering.size()) > k - 1) {
    throw std::invalid_argument("ordering length must be in 1..K-1");
  }
  for (int item : ordering) {
    if (item < 0 || item >= k) {
      throw std::invalid_argument("ordering item out of range");
    }
  }
  return detail::pl_log_prob_unchecked(ordering, p);
}

double log_sum_exp(std::span<const double> values) {
  const double max = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

namespace {

// log omega_g + log P_PL(ordering | p_g) for every g.
void component_log_terms(std::span<const int> ordering,
                         const MixtureParams& theta, std::span<double> out) {
  for (int g = 0; g < theta.num_components(); ++g) {
    const double w = theta.omega(g);
    out[static_cast<std::size_t>(g)] =
        w > 0.0 ? std::log(w) + detail::pl_log_prob_unchecked(
                                    ordering, theta.support(g))
                : -std::numeric_limits<double>::infinity();
  }
}

void check_shapes(const RankingDataset& ds, const MixtureParams& theta) {
  theta.validate();
  if (theta.num_items() != ds.num_items()) {
    throw std::invalid_argument("parameters have K=" +
                                std::to_string(theta.num_items()) +
                                " but dataset has K=" +
                                std::to_string(ds.num_items()));
  }
}

}  // namespace

Eigen::VectorXd unit_log_lik(const RankingDataset& ds,
                             const MixtureParams& theta) {
  check_shapes(ds, theta);
  Eigen::VectorXd out(ds.num_units());
  std::vector<double> terms(static_cast<std::size_t>(theta.num_components()));
  for (int s = 0; s < ds.num_units(); ++s) {
    component_log_terms(ds.ordering(s).items(), theta, terms);
    out(s) = log_sum_exp(terms);
  }
  return out;
}

double mixture_log_lik(const RankingDataset& ds, const MixtureParams& theta) {
  return unit_log_lik(ds, theta).sum();
}

Eigen::VectorXd posterior_membership(const PartialOrdering& ordering,
                                     const MixtureParams& theta) {
  theta.validate();
  std::vector<double> terms(static_cast<std::size_t>(theta.num_components()));
  component_log_terms(ordering.items(), theta, terms);
  const double norm = log_sum_exp(terms);
  Eigen::VectorXd z(theta.num_components());
  for (int g = 0; g < theta.num_components(); ++g) {
    z(g) = std::exp(terms[static_cast<std::size_t>(g)] - norm);
  }
  return z / z.sum();
}

std::vector<int> modal_ordering(std::span<const double> p) {
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)];
  });
  return order;
}

PartialOrdering sample_pl(std::span<const double> p, int length, Rng& rng) {
  const int k = static_cast<int>(p.size());
  if (length < 1 || length > k - 1) {
    throw std::invalid_argument("sample length must be in 1..K-1, got " +
                                std::to_string(length));
  }
  std::vector<int> remaining(static_cast<std::size_t>(k));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> items;
  items.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    double mass = 0.0;
    for (int i : remaining) mass += p[static_cast<std::size_t>(i)];
    double u = draw_uniform(rng) * mass;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      u -= p[static_cast<std::size_t>(remaining[j])];
      if (u < 0.0) {
        pick = j;
        break;
      }
    }
    items.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return PartialOrdering(std::move(items), k);
}

namespace {

int draw_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  double u = draw_uniform(rng) * probs.sum();
  for (Eigen::Index g = 0; g < probs.size(); ++g) {
    u -= probs(g);
    if (u < 0.0) return static_cast<int>(g);
  }
  // Rounding fallthrough: last component with positive mass.
  for (Eigen::Index g = probs.size(); g-- > 0;) {
    if (probs(g) > 0.0) return static_cast<int>(g);
  }
  return 0;
}

}  // namespace

SimulatedData sample_mixture_dataset(const MixtureParams& theta,
                                     std::span<const int> lengths, Rng& rng) {
  theta.validate();
  const int k = theta.num_items();
  if (lengths.empty()) throw std::invalid_argument("need at least one unit");
  std::vector<PartialOrdering> orderings;
  std::vector<int> labels;
  orderings.reserve(lengths.size());
  labels.reserve(lengths.size());
  for (int n : lengths) {
    if (n < 1 || n > k - 1) {
      throw std::invalid_argument("ordering length " + std::to_string(n) +
                                  " outside 1..K-1");
    }
    const int g = draw_categorical(theta.omega, rng);
    labels.push_back(g);
    orderings.push_back(sample_pl(theta.support(g), n, rng));
  }
  return {RankingDataset(k, std::move(orderings)), std::move(labels)};
}

SimulatedData sample_mixture_dataset(const MixtureParams& theta, int num_units,
                                     Rng& rng) {
  if (num_units < 1) throw std::invalid_argument("need at least one unit");
  const std::vector<int> lengths(static_cast<std::size_t>(num_units),
                                 theta.num_items() - 1);
  return sample_mixture_dataset(theta, lengths, rng);
}

CensoringProportions censoring_setting(char name) {
  switch (name) {
    case 'A':
    case 'a':
      return {{1, 0.00}, {2, 0.02}, {3, 0.04}, {4, 0.10}, {5, 0.84}};
    case 'B':
    case 'b':
      return {{1, 0.05}, {2, 0.15}, {3, 0.15}, {4, 0.20}, {5, 0.45}};
    case 'C':
    case 'c':
      return {{1, 0.05}, {2, 0.20}, {3, 0.20}, {4, 0.25}, {5, 0.30}};
    default:
      throw std::invalid_argument(std::string("unknown censoring setting '") +
                                  name + "'");
  }
}

RankingDataset apply_censoring(const RankingDataset& full,
                               const CensoringProportions& proportions,
                               Rng& rng) {
  const int k = full.num_items();
  double total = 0.0;
  for (const auto& [m, prob] : proportions) {
    if (m < 1 || m > k - 1) {
      throw std::invalid_argument("censoring length " + std::to_string(m) +
                                  " outside 1..K-1");
    }
    if (prob < 0.0) throw std::invalid_argument("negative censoring weight");
    total += prob;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("censoring proportions sum to " +
                                std::to_string(total) + ", not 1");
  }
  std::vector<int> lengths;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [m, prob] : proportions) {
    acc += prob;
    lengths.push_back(m);
    cumulative.push_back(acc);
  }

  std::vector<PartialOrdering> out;
  out.reserve(static_cast<std::size_t>(full.num_units()));
  for (const auto& o : full.orderings()) {
    if (o.size() != k - 1) {
      throw std::invalid_argument("censoring requires full orderings");
    }
    const double u = draw_uniform(rng) * acc;
    std::size_t j = 0;
    while (j + 1 < cumulative.size() && u >= cumulative[j]) ++j;
    // Zero-probability lengths can only be selected by rounding; skip them.
    while (j + 1 < cumulative.size() && proportions.at(lengths[j]) == 0.0) ++j;
    const auto items = o.items();
    out.emplace_back(
        std::vector<int>(items.begin(), items.begin() + lengths[j]), k);
  }
  return RankingDataset(k, std::move(out), full.item_labels());
}

}  // namespace plmix

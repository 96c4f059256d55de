#include "plmix/relabel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace plmix {

namespace {

constexpr int kExhaustiveLimit = 8;

std::vector<int> exhaustive_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int g = 0; g < n; ++g) c += cost(g, perm[static_cast<std::size_t>(g)]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path with potentials, 1-based internally.
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(r - 1, col - 1) - u[r] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int col = 1; col <= n; ++col) perm[match[col] - 1] = col - 1;
  return perm;
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols() || cost.rows() < 1) {
    throw std::invalid_argument("assignment cost must be square and nonempty");
  }
  return cost.rows() <= kExhaustiveLimit ? exhaustive_assignment(cost)
                                         : hungarian_assignment(cost);
}

RelabeledChain pivotal_relabel(const Chain& chain, const MixtureParams& pivot) {
  const int num_g = chain.num_components;
  if (pivot.num_components() != num_g || pivot.num_items() != chain.num_items) {
    throw std::invalid_argument("pivot shape does not match the chain");
  }
  const MixtureParams ref = pivot.canonical();

  RelabeledChain out;
  out.chain = chain;
  out.permutations.reserve(static_cast<std::size_t>(chain.size()));
  Eigen::MatrixXd cost(num_g, num_g);
  for (int j = 0; j < chain.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    SupportMatrix p = chain.p[jj];
    for (int h = 0; h < num_g; ++h) p.row(h) /= p.row(h).sum();
    const Eigen::VectorXd& w = chain.omega[jj];
    for (int g = 0; g < num_g; ++g) {
      for (int h = 0; h < num_g; ++h) {
        const double dw = w(h) - ref.omega(g);
        cost(g, h) = (p.row(h) - ref.p.row(g)).squaredNorm() + dw * dw;
      }
    }
    std::vector<int> perm = min_cost_assignment(cost);

    for (int g = 0; g < num_g; ++g) {
      out.chain.p[jj].row(g) = chain.p[jj].row(perm[static_cast<std::size_t>(g)]);
      out.chain.omega[jj](g) = w(perm[static_cast<std::size_t>(g)]);
    }
    if (jj < chain.z.size()) {
      std::vector<std::uint8_t> inverse(static_cast<std::size_t>(num_g));
      for (int g = 0; g < num_g; ++g) {
        inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(g)])] =
            static_cast<std::uint8_t>(g);
      }
      for (auto& label : out.chain.z[jj]) label = inverse[label];
    }
    out.permutations.push_back(std::move(perm));
  }
  return out;
}

MixtureParams PosteriorSummary::mean_params() const {
  MixtureParams out;
  out.p = p_mean;
  out.omega = omega_mean / omega_mean.sum();
  return out;
}

PosteriorSummary summarize(const Chain& chain) {
  const int n = chain.size();
  if (n < 1) throw std::invalid_argument("cannot summarize an empty chain");
  const int num_g = chain.num_components;
  const int k = chain.num_items;

  PosteriorSummary out;
  out.p_mean = SupportMatrix::Zero(num_g, k);
  out.omega_mean = Eigen::VectorXd::Zero(num_g);
  SupportMatrix p_sq = SupportMatrix::Zero(num_g, k);
  Eigen::VectorXd omega_sq = Eigen::VectorXd::Zero(num_g);
  // Welford updates keep the variance stable for long chains.
  for (int j = 0; j < n; ++j) {
    SupportMatrix p = chain.p[static_cast<std::size_t>(j)];
    for (int g = 0; g < num_g; ++g) p.row(g) /= p.row(g).sum();
    const Eigen::VectorXd& w = chain.omega[static_cast<std::size_t>(j)];
    const double count = j + 1.0;
    const SupportMatrix dp = p - out.p_mean;
    out.p_mean += dp / count;
    p_sq.array() += dp.array() * (p - out.p_mean).array();
    const Eigen::VectorXd dw = w - out.omega_mean;
    out.omega_mean += dw / count;
    omega_sq.array() += dw.array() * (w - out.omega_mean).array();
  }
  const double denom = n > 1 ? n - 1.0 : 1.0;
  out.p_sd = (p_sq.array() / denom).max(0.0).sqrt();
  out.omega_sd = (omega_sq.array() / denom).max(0.0).sqrt();
  for (int g = 0; g < num_g; ++g) {
    out.modal.push_back(modal_ordering(
        {out.p_mean.row(g).data(), static_cast<std::size_t>(k)}));
  }
  return out;
}

PosteriorSummary summarize(const RelabeledChain& relabeled) {
  return summarize(relabeled.chain);
}

nlohmann::json summary_to_json(const PosteriorSummary& summary) {
  nlohmann::json j;
  const auto rows = [](const SupportMatrix& m) {
    auto out = nlohmann::json::array();
    for (Eigen::Index g = 0; g < m.rows(); ++g) {
      out.push_back(std::vector<double>(m.row(g).begin(), m.row(g).end()));
    }
    return out;
  };
  j["p_mean"] = rows(summary.p_mean);
  j["p_sd"] = rows(summary.p_sd);
  j["omega_mean"] = std::vector<double>(summary.omega_mean.begin(),
                                        summary.omega_mean.end());
  j["omega_sd"] =
      std::vector<double>(summary.omega_sd.begin(), summary.omega_sd.end());
  auto modal = nlohmann::json::array();
  for (auto m : summary.modal) {
    for (int& item : m) ++item;
    modal.push_back(m);
  }
  j["modal_orderings"] = std::move(modal);
  return j;
}

}  // namespace plmix

#include "plmix/simharness.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "plmix/parallel.hpp"
#include "plmix/trace_io.hpp"

namespace plmix {

void Scenario::validate() const {
  if (true_components < 1) {
    throw std::invalid_argument("scenario needs at least one component");
  }
  if (num_items < 2) throw std::invalid_argument("scenario needs K >= 2");
  if (num_units < 1) throw std::invalid_argument("scenario needs N >= 1");
  double total = 0.0;
  for (const auto& [m, prob] : censoring) {
    if (m < 1 || m > num_items - 1 || prob < 0.0) {
      throw std::invalid_argument("censoring lengths must lie in 1..K-1 with nonnegative shares");
    }
    total += prob;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("censoring proportions must sum to 1");
  }
}

Scenario make_scenario(int true_components, char censoring, int num_items,
                       int num_units) {
  Scenario s;
  s.true_components = true_components;
  s.num_items = num_items;
  s.num_units = num_units;
  s.censoring_name = std::string(1, censoring);
  s.censoring = censoring_setting(censoring);
  s.validate();
  return s;
}

MixtureParams generate_truth(const Scenario& scenario, Rng& rng) {
  const int num_g = scenario.true_components;
  SupportMatrix p(num_g, scenario.num_items);
  for (int g = 0; g < num_g; ++g) {
    for (int i = 0; i < scenario.num_items; ++i) {
      double v = 0.0;
      do {
        const double a = draw_gamma(0.3, 1.0, rng);
        const double b = draw_gamma(0.3, 1.0, rng);
        v = a / (a + b);
      } while (!(v > 0.0 && v < 1.0));
      p(g, i) = v;
    }
  }
  return MixtureParams(p, Eigen::VectorXd::Constant(num_g, 1.0 / num_g));
}

ScenarioDraw generate_replicate(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  Rng rng = make_stream(seed, 0);
  MixtureParams truth = generate_truth(scenario, rng);
  SimulatedData full = sample_mixture_dataset(truth, scenario.num_units, rng);
  RankingDataset censored = apply_censoring(full.data, scenario.censoring, rng);
  return {std::move(truth), {std::move(censored), std::move(full.labels)}};
}

StudyConfig::StudyConfig() {
  fit.gibbs.n_iter = 5000;
  fit.gibbs.burn_in = 1000;
  fit.gibbs.store_labels = false;
  fit.em.n_starts = 3;
  fit.flat_starts = 1;
}

void StudyConfig::validate() const {
  if (scenarios.empty()) throw std::invalid_argument("study has no scenarios");
  for (const auto& s : scenarios) s.validate();
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (g_min < 1 || g_max < g_min) {
    throw std::invalid_argument("component grid must satisfy 1 <= gmin <= gmax");
  }
  fit.gibbs.validate();
}

AgreementTable run_study(const StudyConfig& config) {
  config.validate();
  const int num_scenarios = static_cast<int>(config.scenarios.size());
  const int tasks = num_scenarios * config.replicates;

  AgreementTable table;
  table.replicates.resize(static_cast<std::size_t>(tasks));
  parallel_for(tasks, config.jobs, [&](int t) {
    ReplicateOutcome& out = table.replicates[static_cast<std::size_t>(t)];
    out.scenario = t / config.replicates;
    out.replicate = t % config.replicates;
    const Scenario& scenario =
        config.scenarios[static_cast<std::size_t>(out.scenario)];
    const std::uint64_t data_seed = derive_seed(
        config.seed, (static_cast<std::uint64_t>(out.scenario) << 32) |
                         static_cast<std::uint64_t>(out.replicate));
    try {
      const ScenarioDraw draw = generate_replicate(scenario, data_seed);
      const RankingDataset& ds = draw.sample.data;
      int partial = 0;
      for (int s = 0; s < ds.num_units(); ++s) {
        if (ds.length(s) < ds.num_items() - 1) ++partial;
      }
      out.partial_fraction = static_cast<double>(partial) / ds.num_units();

      FitOptions opts = config.fit;
      opts.em.seed = derive_seed(data_seed, 1);
      opts.gibbs.seed = derive_seed(data_seed, 2);
      for (const ModelFit& fit :
           fit_grid(ds, config.g_min, config.g_max, config.prior, opts, 1)) {
        out.reports.push_back(fit.criteria);
      }
      out.selected = select_G(out.reports);
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  });

  for (int sc = 0; sc < num_scenarios; ++sc) {
    ScenarioSummary row;
    row.scenario = config.scenarios[static_cast<std::size_t>(sc)];
    for (const auto& rep : table.replicates) {
      if (rep.scenario != sc) continue;
      if (!rep.ok) {
        ++row.failed;
        std::cerr << "warning: scenario " << sc + 1 << " replicate "
                  << rep.replicate + 1 << " failed and is excluded: "
                  << rep.error << '\n';
        continue;
      }
      ++row.valid;
      for (std::size_t c = 0; c < kNumCriteria; ++c) {
        ++row.distribution[c][rep.selected[c]];
      }
    }
    for (std::size_t c = 0; c < kNumCriteria; ++c) {
      const auto it = row.distribution[c].find(row.scenario.true_components);
      const int hits = it == row.distribution[c].end() ? 0 : it->second;
      row.agreement[c] = row.valid > 0 ? 100.0 * hits / row.valid : 0.0;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.true_components = j.value("G_star", 1);
  s.num_items = j.value("K", 6);
  s.num_units = j.value("N", 1000);
  const auto& cens = j.contains("censoring") ? j.at("censoring")
                                             : nlohmann::json("A");
  if (cens.is_string()) {
    const std::string name = cens.get<std::string>();
    if (name.size() != 1) throw InputError("unknown censoring setting " + name);
    s.censoring_name = name;
    s.censoring = censoring_setting(name[0]);
  } else if (cens.is_object()) {
    s.censoring_name = "custom";
    s.censoring.clear();
    for (const auto& [key, value] : cens.items()) {
      s.censoring[std::stoi(key)] = value.get<double>();
    }
  } else {
    throw InputError("censoring must be a setting name or an m -> share map");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("bad scenario: ") + e.what());
  }
  return s;
}

}  // namespace

StudyConfig study_config_from_json(const nlohmann::json& j) {
  StudyConfig c;
  try {
    if (j.contains("scenarios")) {
      for (const auto& s : j.at("scenarios")) {
        c.scenarios.push_back(scenario_from_json(s));
      }
    }
    c.replicates = j.value("replicates", c.replicates);
    c.g_min = j.value("g_min", c.g_min);
    c.g_max = j.value("g_max", c.g_max);
    c.prior = parse_prior_kind(j.value("prior", std::string("default")));
    c.fit.gibbs.n_iter = j.value("n_iter", c.fit.gibbs.n_iter);
    c.fit.gibbs.burn_in = j.value("burn_in", c.fit.gibbs.burn_in);
    c.fit.gibbs.thin = j.value("thin", c.fit.gibbs.thin);
    c.fit.em.n_starts = j.value("em_starts", c.fit.em.n_starts);
    c.fit.em.max_iter = j.value("em_max_iter", c.fit.em.max_iter);
    c.fit.em.tol = j.value("em_tol", c.fit.em.tol);
    c.fit.flat_fit = j.value("flat_fit", c.fit.flat_fit);
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad study config: ") + e.what());
  }
  return c;
}

nlohmann::json study_config_to_json(const StudyConfig& c) {
  auto scenarios = nlohmann::json::array();
  for (const auto& s : c.scenarios) {
    nlohmann::json cens;
    if (s.censoring_name == "custom") {
      for (const auto& [m, prob] : s.censoring) cens[std::to_string(m)] = prob;
    } else {
      cens = s.censoring_name;
    }
    scenarios.push_back(
        {{"G_star", s.true_components}, {"K", s.num_items}, {"N", s.num_units},
         {"censoring", cens}});
  }
  return {{"scenarios", scenarios},
          {"replicates", c.replicates},
          {"g_min", c.g_min},
          {"g_max", c.g_max},
          {"prior", prior_kind_name(c.prior)},
          {"n_iter", c.fit.gibbs.n_iter},
          {"burn_in", c.fit.gibbs.burn_in},
          {"thin", c.fit.gibbs.thin},
          {"em_starts", c.fit.em.n_starts},
          {"em_max_iter", c.fit.em.max_iter},
          {"em_tol", c.fit.em.tol},
          {"flat_fit", c.fit.flat_fit},
          {"seed", c.seed}};
}

std::string agreement_csv(const AgreementTable& table) {
  std::ostringstream out;
  out << "G_star,censoring,valid,failed";
  for (Criterion c : kAllCriteria) out << ',' << criterion_name(c);
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.scenario.true_components << ',' << row.scenario.censoring_name
        << ',' << row.valid << ',' << row.failed;
    for (double a : row.agreement) out << ',' << format_sig6(a);
    out << '\n';
  }
  return out.str();
}

std::string distribution_csv(const AgreementTable& table) {
  std::ostringstream out;
  out << "G_star,censoring,criterion,G_hat,count\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < kNumCriteria; ++c) {
      for (const auto& [g, count] : row.distribution[c]) {
        out << row.scenario.true_components << ','
            << row.scenario.censoring_name << ','
            << criterion_name(kAllCriteria[c]) << ',' << g << ',' << count
            << '\n';
      }
    }
  }
  return out.str();
}

std::string replicate_log_csv(const AgreementTable& table) {
  std::ostringstream out;
  out << "scenario,replicate,status,partial_fraction";
  for (Criterion c : kAllCriteria) out << ',' << criterion_name(c);
  out << ",error\n";
  for (const auto& rep : table.replicates) {
    out << rep.scenario + 1 << ',' << rep.replicate + 1 << ','
        << (rep.ok ? "ok" : "failed") << ','
        << format_sig6(rep.partial_fraction);
    for (int g : rep.selected) out << ',' << (rep.ok ? std::to_string(g) : "");
    std::string err = rep.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << ',' << err << '\n';
  }
  return out.str();
}

}  // namespace plmix

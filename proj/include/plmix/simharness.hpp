#ifndef PLMIX_SIMHARNESS_HPP
#define PLMIX_SIMHARNESS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "plmix/criteria.hpp"
#include "plmix/pipeline.hpp"
#include "plmix/plcore.hpp"

namespace plmix {

struct Scenario {
  int true_components = 1;
  int num_items = 6;
  int num_units = 1000;
  std::string censoring_name = "A";  // "A", "B", "C" or "custom"
  CensoringProportions censoring = censoring_setting('A');

  void validate() const;
};

/// Scenario with one of the named censoring settings.
Scenario make_scenario(int true_components, char censoring, int num_items = 6,
                       int num_units = 1000);

/// True parameters: supports i.i.d. Beta(0.3, 0.3) (draws of exactly 0 or 1
/// are redrawn), equal weights.
MixtureParams generate_truth(const Scenario& scenario, Rng& rng);

struct ScenarioDraw {
  MixtureParams truth;
  SimulatedData sample;  // censored data and generating labels
};

/// Replicate `replicate` of `scenario`: truth, full orderings, censoring.
ScenarioDraw generate_replicate(const Scenario& scenario, std::uint64_t seed);

struct StudyConfig {
  std::vector<Scenario> scenarios;
  int replicates = 20;
  int g_min = 1;
  int g_max = 4;
  PriorKind prior = PriorKind::kDefault;
  FitOptions fit;
  std::uint64_t seed = 1;
  int jobs = 1;

  /// Desk-scale defaults: 4000 retained draws after 1000 burn-in, three EM
  /// starts per fit.
  StudyConfig();
  void validate() const;
};

struct ReplicateOutcome {
  int scenario = 0;
  int replicate = 0;
  bool ok = false;
  std::string error;
  double partial_fraction = 0.0;  // share of strictly partial orderings
  std::array<int, kNumCriteria> selected{};
  std::vector<CriteriaReport> reports;
};

struct ScenarioSummary {
  Scenario scenario;
  int valid = 0;
  int failed = 0;
  /// Per criterion: selected G -> count over valid replicates.
  std::array<std::map<int, int>, kNumCriteria> distribution;
  std::array<double, kNumCriteria> agreement{};  // percent with G*
};

struct AgreementTable {
  std::vector<ScenarioSummary> rows;
  std::vector<ReplicateOutcome> replicates;
};

/// Runs every (scenario, replicate) pair: generate, fit the G grid, record
/// per-criterion winners. Failed replicates are kept in the log and left out
/// of the summaries. Reproducible from config.seed for any jobs count.
AgreementTable run_study(const StudyConfig& config);

/// Parses a study description; missing keys keep their defaults.
StudyConfig study_config_from_json(const nlohmann::json& j);
nlohmann::json study_config_to_json(const StudyConfig& config);

/// Rows G*, censoring; columns agreement % per criterion.
std::string agreement_csv(const AgreementTable& table);
/// Long form: scenario, criterion, selected G, count.
std::string distribution_csv(const AgreementTable& table);
/// One row per replicate with status and per-criterion winners.
std::string replicate_log_csv(const AgreementTable& table);

}  // namespace plmix

#endif  // PLMIX_SIMHARNESS_HPP

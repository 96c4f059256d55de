#include "plmix/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "plmix/criteria.hpp"
#include "plmix/data.hpp"
#include "plmix/gof.hpp"
#include "plmix/parallel.hpp"
#include "plmix/pipeline.hpp"
#include "plmix/relabel.hpp"
#include "plmix/simharness.hpp"
#include "plmix/trace_io.hpp"

namespace plmix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

struct SeedOption {
  std::uint64_t value = kDefaultSeed;
  CLI::Option* option = nullptr;

  std::uint64_t resolve() const {
    if (option != nullptr && option->count() > 0) return value;
    if (const char* env = std::getenv("PLMIX_SEED")) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw InputError(std::string("PLMIX_SEED is not an unsigned integer: ") +
                       env);
    }
    return kDefaultSeed;
  }
};

struct FitFlags {
  std::string prior = "default";
  int iters = 22000;
  int burnin = 2000;
  int thin = 1;
  int em_starts = 10;
  int em_max_iter = 1000;
  double em_tol = 1e-8;
  bool no_bic_fit = false;
  bool no_labels = false;

  void add_to(CLI::App* app) {
    app->add_option("--prior", prior, "Prior: default or flat")
        ->check(CLI::IsMember({"default", "flat"}));
    app->add_option("--iters", iters, "Total Gibbs iterations")
        ->check(CLI::PositiveNumber);
    app->add_option("--burnin", burnin, "Discarded Gibbs iterations")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--thin", thin, "Keep every n-th draw")
        ->check(CLI::PositiveNumber);
    app->add_option("--em-starts", em_starts, "Random EM starts")
        ->check(CLI::PositiveNumber);
    app->add_option("--em-max-iter", em_max_iter, "EM iteration cap")
        ->check(CLI::PositiveNumber);
    app->add_option("--em-tol", em_tol, "EM relative tolerance")
        ->check(CLI::PositiveNumber);
    app->add_flag("--no-bic-fit", no_bic_fit,
                  "Use the MAP deviance for BIC instead of a flat-prior fit");
  }

  FitOptions options(std::uint64_t seed) const {
    FitOptions o;
    o.em.n_starts = em_starts;
    o.em.max_iter = em_max_iter;
    o.em.tol = em_tol;
    o.em.seed = seed;
    o.gibbs.n_iter = iters;
    o.gibbs.burn_in = burnin;
    o.gibbs.thin = thin;
    o.gibbs.seed = seed;
    o.gibbs.store_labels = !no_labels;
    o.flat_fit = !no_bic_fit;
    if (burnin >= iters) {
      throw InputError("--burnin must be smaller than --iters");
    }
    if (o.gibbs.retained() < 2) {
      throw InputError("the chain must retain at least two draws");
    }
    return o;
  }

  json to_json() const {
    return {{"prior", prior},         {"iters", iters},
            {"burnin", burnin},       {"thin", thin},
            {"em_starts", em_starts}, {"em_max_iter", em_max_iter},
            {"em_tol", em_tol},       {"bic_fit", !no_bic_fit}};
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + dir.string() + ": " +
                             ec.message());
  }
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, std::uint64_t seed,
                    const std::vector<fs::path>& inputs) {
  auto hashes = json::array();
  for (const auto& p : inputs) {
    hashes.push_back({{"path", p.string()}, {"fnv1a64", file_digest(p)}});
  }
  write_json(dir / "manifest.json", {{"command", command},
                                     {"config", config},
                                     {"seed", seed},
                                     {"inputs", hashes},
                                     {"version", PLMIX_VERSION}});
}

RankingDataset load_dataset(const std::string& path, int k) {
  if (!fs::exists(path)) throw InputError("dataset file not found: " + path);
  return read_dataset(path, k > 0 ? std::optional<int>(k) : std::nullopt);
}

std::string chain_text(const Chain& chain,
                       const std::vector<std::vector<int>>* perms = nullptr) {
  std::ostringstream out;
  write_chain_csv(out, chain, perms);
  return out.str();
}

void write_fit(const fs::path& dir, const ModelFit& fit, bool labels) {
  make_dir(dir);
  write_json(dir / "map.json", map_to_json(fit.map));
  if (fit.flat_map) write_json(dir / "map_flat.json", map_to_json(*fit.flat_map));
  write_text(dir / "chain.csv", chain_text(fit.chain));
  if (labels) {
    std::ostringstream z;
    write_labels_csv(z, fit.chain);
    write_text(dir / "chain_z.csv", z.str());
  }
  write_text(dir / "relabeled.csv",
             chain_text(fit.relabeled.chain, &fit.relabeled.permutations));
  json summary = summary_to_json(fit.summary);
  summary["G"] = fit.num_components;
  summary["retained_draws"] = fit.chain.size();
  write_json(dir / "summary.json", summary);
  write_json(dir / "criteria.json", criteria_to_json(fit.criteria));
}

void print_fit(std::ostream& out, const ModelFit& fit) {
  out << "G=" << fit.num_components
      << "  MAP log-posterior=" << format_sig6(fit.map.final_log_posterior())
      << "  EM iterations=" << fit.map.iterations
      << (fit.map.converged ? "" : " (not converged)") << '\n';
  const auto& s = fit.summary;
  for (int g = 0; g < fit.num_components; ++g) {
    out << "component " << g + 1 << "  weight " << format_sig6(s.omega_mean(g))
        << "  supports";
    for (Eigen::Index i = 0; i < s.p_mean.cols(); ++i) {
      out << ' ' << format_sig6(s.p_mean(g, i));
    }
    out << "  modal";
    for (int item : s.modal[static_cast<std::size_t>(g)]) out << ' ' << item + 1;
    out << '\n';
  }
  for (Criterion c : kAllCriteria) {
    out << criterion_name(c) << ' ' << format_sig6(fit.criteria.value(c))
        << '\n';
  }
}

std::string criteria_csv(const std::vector<ModelFit>& fits) {
  std::ostringstream out;
  out << "G";
  for (Criterion c : kAllCriteria) out << ',' << criterion_name(c);
  out << '\n';
  for (const auto& fit : fits) {
    out << fit.num_components;
    for (Criterion c : kAllCriteria) {
      out << ',' << format_sig6(fit.criteria.value(c));
    }
    out << '\n';
  }
  return out.str();
}

// Linear-interpolation quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void append_boxplot_rows(std::ostream& out, const Chain& chain) {
  const int num_g = chain.num_components;
  const int k = chain.num_items;
  std::vector<double> values(static_cast<std::size_t>(chain.size()));
  for (int g = 0; g < num_g; ++g) {
    for (int i = 0; i < k; ++i) {
      double mean = 0.0;
      for (int j = 0; j < chain.size(); ++j) {
        const auto& p = chain.p[static_cast<std::size_t>(j)];
        values[static_cast<std::size_t>(j)] = p(g, i) / p.row(g).sum();
        mean += values[static_cast<std::size_t>(j)];
      }
      mean /= chain.size();
      std::sort(values.begin(), values.end());
      out << num_g << ',' << g + 1 << ',' << i + 1;
      for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        out << ',' << format_sig6(quantile(values, q));
      }
      out << ',' << format_sig6(mean) << '\n';
    }
  }
}

Chain load_chain(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open chain trace: " + path.string());
  return read_chain_csv(in);
}

json load_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---- subcommands ----------------------------------------------------------

struct SummaryCmd {
  std::string data;
  int k = 0;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("data", data, "Ranking CSV file")->required();
    app->add_option("-k,--items", k, "Number of items")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "Output directory (default: print to stdout)");
  }

  int run(std::ostream& os) const {
    const RankingDataset ds = load_dataset(data, k);
    json j = summary_to_json(summarize_dataset(ds));
    j["N"] = ds.num_units();
    j["K"] = ds.num_items();
    const Eigen::VectorXd ranks = average_ranks(ds);
    j["average_ranks"] = std::vector<double>(ranks.begin(), ranks.end());
    if (out.empty()) {
      os << j.dump(2) << '\n';
      return 0;
    }
    make_dir(out);
    write_json(fs::path(out) / "summary.json", j);
    write_manifest(out, "summary", {{"data", data}, {"k", k}}, 0, {data});
    os << "wrote " << (fs::path(out) / "summary.json").string() << '\n';
    return 0;
  }
};

struct FitCmd {
  std::string data;
  int k = 0;
  int components = 1;
  std::string out = "plmix-fit";
  SeedOption seed;
  FitFlags flags;

  void setup(CLI::App* app) {
    app->add_option("data", data, "Ranking CSV file")->required();
    app->add_option("-k,--items", k, "Number of items")->check(CLI::PositiveNumber);
    app->add_option("-G,--components", components, "Mixture components")
        ->check(CLI::Range(1, 255));
    app->add_option("--out", out, "Output directory");
    seed.option = app->add_option("--seed", seed.value, "Random seed");
    flags.add_to(app);
    app->add_flag("--no-labels", flags.no_labels, "Do not write chain_z.csv");
  }

  int run(std::ostream& os) const {
    const std::uint64_t s = seed.resolve();
    const FitOptions opts = flags.options(s);
    const RankingDataset ds = load_dataset(data, k);
    const auto fits = fit_grid(ds, components, components,
                               parse_prior_kind(flags.prior), opts, 1);
    make_dir(out);
    write_fit(out, fits.front(), !flags.no_labels);
    json config = flags.to_json();
    config["data"] = data;
    config["k"] = ds.num_items();
    config["components"] = components;
    config["labels"] = !flags.no_labels;
    write_manifest(out, "fit", config, s, {data});
    print_fit(os, fits.front());
    return 0;
  }
};

struct SelectCmd {
  std::string data;
  int k = 0;
  int gmin = 1;
  int gmax = 4;
  int jobs = 0;
  std::string out = "plmix-select";
  SeedOption seed;
  FitFlags flags;

  void setup(CLI::App* app) {
    app->add_option("data", data, "Ranking CSV file")->required();
    app->add_option("-k,--items", k, "Number of items")->check(CLI::PositiveNumber);
    app->add_option("--gmin", gmin, "Smallest G")->check(CLI::Range(1, 255));
    app->add_option("--gmax", gmax, "Largest G")->check(CLI::Range(1, 255));
    app->add_option("--jobs", jobs, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--out", out, "Output directory");
    seed.option = app->add_option("--seed", seed.value, "Random seed");
    flags.add_to(app);
  }

  int run(std::ostream& os) const {
    if (gmax < gmin) throw InputError("--gmax must be at least --gmin");
    const std::uint64_t s = seed.resolve();
    FitFlags f = flags;
    f.no_labels = true;
    const FitOptions opts = f.options(s);
    const RankingDataset ds = load_dataset(data, k);
    const auto fits =
        fit_grid(ds, gmin, gmax, parse_prior_kind(flags.prior), opts, jobs);
    make_dir(out);
    for (const auto& fit : fits) {
      write_fit(fs::path(out) / "fits" / ("G" + std::to_string(fit.num_components)),
                fit, false);
    }
    std::vector<CriteriaReport> reports;
    for (const auto& fit : fits) reports.push_back(fit.criteria);
    const auto winners = select_G(reports);
    const std::string table = criteria_csv(fits);
    write_text(fs::path(out) / "criteria.csv", table);
    json j;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(criteria_to_json(r));
    for (std::size_t c = 0; c < kNumCriteria; ++c) {
      j["selected"][std::string(criterion_name(kAllCriteria[c]))] = winners[c];
    }
    write_json(fs::path(out) / "criteria.json", j);
    json config = flags.to_json();
    config["data"] = data;
    config["k"] = ds.num_items();
    config["gmin"] = gmin;
    config["gmax"] = gmax;
    write_manifest(out, "select", config, s, {data});

    os << table;
    for (std::size_t c = 0; c < kNumCriteria; ++c) {
      os << "selected by " << criterion_name(kAllCriteria[c]) << ": G="
         << winners[c] << '\n';
    }
    return 0;
  }
};

struct GofCmd {
  std::string run_dir;
  std::string data;
  int k = 0;
  int nrep = 0;
  int jobs = 0;
  std::string out;
  SeedOption seed;
  CLI::Option* nrep_opt = nullptr;

  void setup(CLI::App* app) {
    app->add_option("run_dir", run_dir, "Directory holding chain.csv")->required();
    app->add_option("data", data, "Ranking CSV file the chain was fitted on")
        ->required();
    app->add_option("-k,--items", k, "Number of items")->check(CLI::PositiveNumber);
    nrep_opt = app->add_option("--nrep", nrep,
                               "Posterior draws used (default min(2000, draws))")
                   ->check(CLI::PositiveNumber);
    app->add_option("--jobs", jobs, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--out", out, "Output directory (default: run_dir)");
    seed.option = app->add_option("--seed", seed.value, "Random seed");
  }

  int run(std::ostream& os) const {
    const std::uint64_t s = seed.resolve();
    const RankingDataset ds = load_dataset(data, k);
    const fs::path chain_path = fs::path(run_dir) / "chain.csv";
    const Chain chain = load_chain(chain_path);
    if (chain.num_items != ds.num_items() || chain.num_units != ds.num_units()) {
      throw InputError("chain in " + run_dir + " was not fitted on " + data);
    }
    if (chain.size() < 1) throw InputError("chain trace has no draws");
    const int n = nrep_opt->count() > 0 ? nrep : default_n_rep(chain);
    if (n > chain.size()) {
      throw InputError("--nrep exceeds the " + std::to_string(chain.size()) +
                       " retained draws");
    }
    const GofReport report = posterior_predictive(chain, ds, n, s, jobs);

    const fs::path dir = out.empty() ? fs::path(run_dir) : fs::path(out);
    make_dir(dir);
    write_json(dir / "gof.json", gof_to_json(report));
    std::ostringstream scatter;
    scatter << "measure,draw,observed,replicated\n";
    for (std::size_t m = 0; m < kAllDiscrepancies.size(); ++m) {
      if (m >= 2 && !report.has_conditional()) continue;
      for (const auto& d : report.draws[m]) {
        scatter << discrepancy_name(kAllDiscrepancies[m]) << ',' << d.draw + 1
                << ',' << format_exact(d.observed) << ','
                << format_exact(d.replicated) << '\n';
      }
    }
    write_text(dir / "gof_scatter.csv", scatter.str());
    write_manifest(dir, "gof",
                   {{"run_dir", run_dir}, {"data", data}, {"nrep", n}}, s,
                   {data, chain_path});

    os << "p_B1 " << format_sig6(report.p_b1()) << '\n'
       << "p_B2 " << format_sig6(report.p_b2()) << '\n';
    if (report.has_conditional()) {
      os << "p_B1_cond " << format_sig6(report.p_b1_cond()) << '\n'
         << "p_B2_cond " << format_sig6(report.p_b2_cond()) << '\n';
    } else {
      os << "single length stratum: conditional checks not reported\n";
    }
    if (report.skipped_cells > 0) {
      os << "skipped cells with negligible expected counts: "
         << report.skipped_cells << '\n';
    }
    return 0;
  }
};

struct SimulateCmd {
  std::vector<int> scenarios{1, 2, 3, 4};
  std::string censoring = "A";
  int replicates = 20;
  int gmin = 1;
  int gmax = 4;
  int num_items = 6;
  int num_units = 1000;
  int jobs = 0;
  std::string config_path;
  std::string out = "plmix-sim";
  bool full_scale = false;
  SeedOption seed;
  FitFlags flags;
  CLI::App* app = nullptr;

  void setup(CLI::App* a) {
    app = a;
    app->add_option("--scenario", scenarios, "True component counts")
        ->check(CLI::Range(1, 255))
        ->delimiter(',');
    app->add_option("--censoring", censoring, "Censoring settings, e.g. A or A,B,C");
    app->add_option("--replicates", replicates, "Replicates per scenario")
        ->check(CLI::PositiveNumber);
    app->add_option("--gmin", gmin, "Smallest G")->check(CLI::Range(1, 255));
    app->add_option("--gmax", gmax, "Largest G")->check(CLI::Range(1, 255));
    app->add_option("-k,--items", num_items, "Items per ordering")
        ->check(CLI::Range(2, 64));
    app->add_option("-n,--units", num_units, "Units per sample")
        ->check(CLI::PositiveNumber);
    app->add_option("--jobs", jobs, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--config", config_path, "Study description (JSON)");
    app->add_option("--out", out, "Output directory");
    app->add_flag("--full-scale", full_scale,
                  "100 replicates, 22000 iterations, G = 1..7");
    seed.option = app->add_option("--seed", seed.value, "Random seed");
    flags.iters = 5000;
    flags.burnin = 1000;
    flags.add_to(app);
  }

  bool given(const std::string& name) const {
    return app->get_option(name)->count() > 0;
  }

  StudyConfig resolve(std::uint64_t s) const {
    StudyConfig c;
    if (!config_path.empty()) c = study_config_from_json(load_json(config_path));
    if (full_scale) {
      c.replicates = 100;
      c.g_max = 7;
      c.fit.gibbs.n_iter = 22000;
      c.fit.gibbs.burn_in = 2000;
    }
    if (c.scenarios.empty() || given("--scenario") || given("--censoring")) {
      c.scenarios.clear();
      if (num_items != 6) {
        throw InputError("censoring settings A-C are defined for K = 6; "
                         "use --config for other K");
      }
      std::stringstream names(censoring);
      std::string name;
      while (std::getline(names, name, ',')) {
        if (name.size() != 1 || name[0] < 'A' || name[0] > 'C') {
          throw InputError("unknown censoring setting '" + name + "'");
        }
        for (int g : scenarios) {
          c.scenarios.push_back(make_scenario(g, name[0], 6, num_units));
        }
      }
    }
    if (given("--replicates")) c.replicates = replicates;
    if (given("--gmin")) c.g_min = gmin;
    if (given("--gmax")) c.g_max = gmax;
    if (given("--prior")) c.prior = parse_prior_kind(flags.prior);
    if (given("--iters")) c.fit.gibbs.n_iter = flags.iters;
    if (given("--burnin")) c.fit.gibbs.burn_in = flags.burnin;
    if (given("--thin")) c.fit.gibbs.thin = flags.thin;
    if (given("--em-starts")) c.fit.em.n_starts = flags.em_starts;
    if (given("--em-max-iter")) c.fit.em.max_iter = flags.em_max_iter;
    if (given("--em-tol")) c.fit.em.tol = flags.em_tol;
    if (flags.no_bic_fit) c.fit.flat_fit = false;
    if (config_path.empty() || seed.option->count() > 0 ||
        std::getenv("PLMIX_SEED") != nullptr) {
      c.seed = s;
    }
    c.jobs = jobs;
    if (c.g_max < c.g_min) throw InputError("--gmax must be at least --gmin");
    if (c.fit.gibbs.burn_in >= c.fit.gibbs.n_iter) {
      throw InputError("--burnin must be smaller than --iters");
    }
    if (c.fit.gibbs.retained() < 2) {
      throw InputError("the chain must retain at least two draws");
    }
    return c;
  }

  int run(std::ostream& os) const {
    const StudyConfig config = resolve(seed.resolve());
    const AgreementTable table = run_study(config);
    make_dir(out);
    const std::string agreement = agreement_csv(table);
    write_text(fs::path(out) / "agreement.csv", agreement);
    write_text(fs::path(out) / "distribution.csv", distribution_csv(table));
    write_text(fs::path(out) / "replicates.csv", replicate_log_csv(table));
    const json resolved = study_config_to_json(config);
    write_json(fs::path(out) / "study.json", resolved);
    std::vector<fs::path> inputs;
    if (!config_path.empty()) inputs.emplace_back(config_path);
    write_manifest(out, "simulate", resolved, config.seed, inputs);
    os << agreement;
    return 0;
  }
};

struct ReportCmd {
  std::string run_dir;
  std::string out;

  void setup(CLI::App* app) {
    app->add_option("run_dir", run_dir, "Output directory of fit, select or gof")
        ->required();
    app->add_option("--out", out, "Output directory (default: run_dir/report)");
  }

  int run(std::ostream& os) const {
    const fs::path dir(run_dir);
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + run_dir);
    const fs::path dest = out.empty() ? dir / "report" : fs::path(out);
    std::vector<fs::path> inputs;
    std::vector<std::string> written;
    make_dir(dest);

    if (fs::exists(dir / "criteria.json")) {
      const json j = load_json(dir / "criteria.json");
      std::vector<json> reports;
      if (j.contains("reports")) {
        for (const auto& r : j.at("reports")) reports.push_back(r);
      } else {
        reports.push_back(j);
      }
      std::ostringstream curve;
      curve << "G,criterion,value\n";
      for (const auto& r : reports) {
        for (Criterion c : kAllCriteria) {
          const std::string name(criterion_name(c));
          curve << r.at("G").get<int>() << ',' << name << ','
                << format_sig6(r.at(name).get<double>()) << '\n';
        }
      }
      write_text(dest / "criteria_curve.csv", curve.str());
      inputs.push_back(dir / "criteria.json");
      written.push_back("criteria_curve.csv");
    }

    std::vector<fs::path> traces;
    if (fs::exists(dir / "relabeled.csv")) traces.push_back(dir / "relabeled.csv");
    if (fs::is_directory(dir / "fits")) {
      std::vector<std::pair<int, fs::path>> found;
      for (const auto& entry : fs::directory_iterator(dir / "fits")) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 1 && name[0] == 'G' &&
            fs::exists(entry.path() / "relabeled.csv")) {
          found.emplace_back(std::stoi(name.substr(1)),
                             entry.path() / "relabeled.csv");
        }
      }
      std::sort(found.begin(), found.end());
      for (const auto& [g, path] : found) traces.push_back(path);
    }
    if (!traces.empty()) {
      std::ostringstream box;
      box << "G,component,item,min,q1,median,q3,max,mean\n";
      for (const auto& path : traces) {
        const Chain chain = load_chain(path);
        if (chain.size() > 0) append_boxplot_rows(box, chain);
        inputs.push_back(path);
      }
      write_text(dest / "support_boxplot.csv", box.str());
      written.push_back("support_boxplot.csv");
    }

    if (fs::exists(dir / "gof_scatter.csv")) {
      std::ifstream in(dir / "gof_scatter.csv", std::ios::binary);
      std::ostringstream scatter;
      std::string line;
      std::getline(in, line);
      scatter << "measure,draw,observed,replicated,exceeds\n";
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string measure, draw, obs, rep;
        std::getline(ss, measure, ',');
        std::getline(ss, draw, ',');
        std::getline(ss, obs, ',');
        std::getline(ss, rep, ',');
        const double o = std::stod(obs);
        const double r = std::stod(rep);
        scatter << measure << ',' << draw << ',' << format_sig6(o) << ','
                << format_sig6(r) << ',' << (r >= o ? 1 : 0) << '\n';
      }
      write_text(dest / "discrepancy_scatter.csv", scatter.str());
      inputs.push_back(dir / "gof_scatter.csv");
      written.push_back("discrepancy_scatter.csv");
    }

    if (written.empty()) {
      throw InputError("no fit, select or gof outputs found in " + run_dir);
    }
    write_manifest(dest, "report", {{"run_dir", run_dir}}, 0, inputs);
    for (const auto& w : written) os << "wrote " << (dest / w).string() << '\n';
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Bayesian Plackett-Luce mixtures for partial top orderings",
               "plmix"};
  app.set_version_flag("--version", std::string(PLMIX_VERSION));
  app.require_subcommand(1);

  SummaryCmd summary;
  FitCmd fit;
  SelectCmd select;
  GofCmd gof;
  SimulateCmd simulate;
  ReportCmd report;
  auto* summary_app = app.add_subcommand("summary", "Observed summary statistics");
  auto* fit_app = app.add_subcommand("fit", "MAP + Gibbs fit for one G");
  auto* select_app = app.add_subcommand("select", "Fit a range of G and compare criteria");
  auto* gof_app = app.add_subcommand("gof", "Posterior predictive checks for a fit");
  auto* simulate_app = app.add_subcommand("simulate", "Simulation study of G selection");
  auto* report_app = app.add_subcommand("report", "Plot-ready CSVs from a run directory");
  summary.setup(summary_app);
  fit.setup(fit_app);
  select.setup(select_app);
  gof.setup(gof_app);
  simulate.setup(simulate_app);
  report.setup(report_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*summary_app) return summary.run(out);
    if (*fit_app) return fit.run(out);
    if (*select_app) return select.run(out);
    if (*gof_app) return gof.run(out);
    if (*simulate_app) return simulate.run(out);
    if (*report_app) return report.run(out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace plmix::cli

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "plmix/cli.hpp"
#include "plmix/data.hpp"
#include "plmix/plcore.hpp"

namespace fs = std::filesystem;
using namespace plmix;

namespace {

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("PLMIX_TEST_TMP");
  fs::path dir = fs::path(base != nullptr ? base : fs::temp_directory_path().string()) /
                 "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path toy_data(const fs::path& dir) {
  SupportMatrix p(2, 4);
  p << 0.5, 0.3, 0.15, 0.05, 0.05, 0.15, 0.3, 0.5;
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  Rng rng = make_stream(3, 0);
  std::vector<int> lengths(120);
  for (std::size_t s = 0; s < lengths.size(); ++s) lengths[s] = 1 + static_cast<int>(s % 3);
  const auto ds = sample_mixture_dataset(MixtureParams(p, w), lengths, rng).data;
  const fs::path file = dir / "toy.csv";
  std::ofstream(file) << serialize_dataset(ds);
  return file;
}

const std::vector<std::string> kQuick = {"--iters", "300", "--burnin", "100", "--em-starts", "2"};

std::vector<std::string> with_quick(std::vector<std::string> args) {
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  return args;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(call({}).code == 2);
  CHECK(call({"bogus"}).code == 2);
  CHECK(call({"--help"}).code == 0);
  const auto missing = call({"summary", "does-not-exist.csv"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("dataset file not found: does-not-exist.csv") != std::string::npos);
}

TEST_CASE("summary") {
  const fs::path dir = scratch("summary");
  const fs::path data = toy_data(dir);
  const auto r = call({"summary", data.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["N"] == 120);
  CHECK(j["K"] == 4);
  CHECK(j["average_ranks"].size() == 4);

  const fs::path bad = dir / "bad.csv";
  std::ofstream(bad) << "# K=3\n1,1\n";
  const auto e = call({"summary", bad.string()});
  CHECK(e.code == 2);
  CHECK(e.err.find("line 2") != std::string::npos);
}

TEST_CASE("fit, gof and report") {
  const fs::path dir = scratch("fit");
  const fs::path data = toy_data(dir);
  const fs::path run = dir / "run";
  const auto r = call(with_quick({"fit", data.string(), "-G", "2", "--out", run.string(), "--seed", "4"}));
  REQUIRE(r.code == 0);
  for (const char* f : {"map.json", "map_flat.json", "chain.csv", "chain_z.csv", "relabeled.csv",
                        "summary.json", "criteria.json", "manifest.json"}) {
    CHECK(fs::exists(run / f));
  }
  const auto manifest = nlohmann::json::parse(slurp(run / "manifest.json"));
  CHECK(manifest["command"] == "fit");
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["inputs"][0]["fnv1a64"] == cli::file_digest(data));
  const std::string chain = slurp(run / "chain.csv");
  CHECK(chain.rfind("# plmix-chain v1 G=2 K=4 N=120 draws=200", 0) == 0);

  // Rerun is byte-identical.
  const fs::path again = dir / "again";
  REQUIRE(call(with_quick({"fit", data.string(), "-G", "2", "--out", again.string(), "--seed", "4"})).code == 0);
  for (const char* f : {"chain.csv", "criteria.json", "summary.json", "map.json"}) {
    CHECK(slurp(run / f) == slurp(again / f));
  }

  CHECK(call({"gof", run.string(), data.string(), "--nrep", "0"}).code == 2);
  CHECK(call({"gof", run.string(), data.string(), "--nrep", "500"}).code == 2);
  const auto g = call({"gof", run.string(), data.string(), "--nrep", "50", "--seed", "2"});
  REQUIRE(g.code == 0);
  const auto gj = nlohmann::json::parse(slurp(run / "gof.json"));
  CHECK(gj["n_rep"] == 50);
  CHECK(gj.contains("p_b1_cond"));
  CHECK(gj["p_b1"].get<double>() >= 0.0);
  CHECK(fs::exists(run / "gof_scatter.csv"));

  REQUIRE(call({"report", run.string()}).code == 0);
  for (const char* f : {"criteria_curve.csv", "support_boxplot.csv", "discrepancy_scatter.csv"}) {
    CHECK(fs::exists(run / "report" / f));
  }
  CHECK(slurp(run / "report" / "support_boxplot.csv").rfind("G,component,item,min,q1,median,q3,max,mean\n", 0) == 0);
  CHECK(call({"report", (dir / "nothing").string()}).code == 2);
}

TEST_CASE("select") {
  const fs::path dir = scratch("select");
  const fs::path data = toy_data(dir);
  const fs::path out = dir / "sel";
  const auto r = call(with_quick({"select", data.string(), "--gmin", "1", "--gmax", "3",
                                  "--out", out.string(), "--no-bic-fit"}));
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out / "criteria.csv");
  CHECK(csv.rfind("G,DIC1,DIC2,BPIC1,BPIC2,BICM1,BICM2,BIC\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto j = nlohmann::json::parse(slurp(out / "criteria.json"));
  CHECK(j["reports"].size() == 3);
  CHECK(j["reports"][0]["bic_from_flat_fit"] == false);
  CHECK(j["selected"].contains("DIC1"));
  CHECK(fs::exists(out / "fits" / "G2" / "chain.csv"));
  CHECK(call({"select", data.string(), "--gmin", "3", "--gmax", "2"}).code == 2);
}

TEST_CASE("simulate") {
  const fs::path dir = scratch("simulate");
  const fs::path cfg = dir / "study.json";
  std::ofstream(cfg) << R"({"scenarios": [{"G_star": 1, "K": 4, "N": 60,
                            "censoring": {"1": 0.3, "3": 0.7}}],
                            "replicates": 2, "g_max": 2, "n_iter": 200,
                            "burn_in": 50, "em_starts": 1})";
  const fs::path out = dir / "sim";
  const auto r = call({"simulate", "--config", cfg.string(), "--out", out.string(), "--seed", "3"});
  REQUIRE(r.code == 0);
  const std::string agreement = slurp(out / "agreement.csv");
  CHECK(agreement.rfind("G_star,censoring,valid,failed,DIC1", 0) == 0);
  CHECK(agreement.find("1,custom,2,0,") != std::string::npos);
  CHECK(fs::exists(out / "replicates.csv"));
  CHECK(fs::exists(out / "distribution.csv"));
  CHECK(nlohmann::json::parse(slurp(out / "study.json"))["seed"] == 3);

  CHECK(call({"simulate", "-k", "5", "--out", out.string()}).code == 2);
  CHECK(call({"simulate", "--censoring", "Q", "--out", out.string()}).code == 2);
}

TEST_CASE("seed from the environment") {
  const fs::path dir = scratch("env");
  const fs::path data = toy_data(dir);
  ::setenv("PLMIX_SEED", "not-a-number", 1);
  const auto bad = call(with_quick({"fit", data.string(), "-G", "1", "--out", (dir / "a").string()}));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("PLMIX_SEED") != std::string::npos);
  ::setenv("PLMIX_SEED", "77", 1);
  REQUIRE(call(with_quick({"fit", data.string(), "-G", "1", "--out", (dir / "b").string()})).code == 0);
  ::unsetenv("PLMIX_SEED");
  CHECK(nlohmann::json::parse(slurp(dir / "b" / "manifest.json"))["seed"] == 77);
}

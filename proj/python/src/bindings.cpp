#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <optional>
#include <sstream>

#include "plmix/cli.hpp"
#include "plmix/criteria.hpp"
#include "plmix/data.hpp"
#include "plmix/gof.hpp"
#include "plmix/pipeline.hpp"
#include "plmix/plcore.hpp"

namespace py = pybind11;
using namespace plmix;

namespace {

std::vector<int> to_zero_based(const std::vector<int>& items) {
  std::vector<int> out(items);
  for (int& i : out) --i;
  return out;
}

std::vector<std::vector<int>> orderings(const RankingDataset& ds) {
  std::vector<std::vector<int>> out;
  for (const auto& o : ds.orderings()) {
    std::vector<int> row(o.items().begin(), o.items().end());
    for (int& i : row) ++i;
    out.push_back(std::move(row));
  }
  return out;
}

MixtureParams make_params(const SupportMatrix& p, const Eigen::VectorXd& omega) {
  return MixtureParams(p, omega);
}

py::dict criteria_dict(const CriteriaReport& r) {
  py::dict d;
  for (Criterion c : kAllCriteria) d[py::str(std::string(criterion_name(c)))] = r.value(c);
  d["D_bar"] = r.d_bar;
  d["D_var"] = r.d_var;
  d["D_map"] = r.d_map;
  d["bic_params"] = r.bic_params;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian Plackett-Luce mixtures for partial top orderings";
  m.attr("__version__") = PLMIX_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<RankingDataset>(m, "Dataset")
      .def(py::init([](int k, const std::vector<std::vector<int>>& rows) {
             std::vector<PartialOrdering> ords;
             for (const auto& r : rows) ords.emplace_back(to_zero_based(r), k);
             return RankingDataset(k, std::move(ords));
           }),
           py::arg("num_items"), py::arg("orderings"))
      .def_property_readonly("num_items", &RankingDataset::num_items)
      .def_property_readonly("num_units", &RankingDataset::num_units)
      .def_property_readonly("item_labels", &RankingDataset::item_labels)
      .def("orderings", &orderings, "Orderings as 1-based item lists")
      .def("lengths", &RankingDataset::lengths)
      .def("top1_frequencies", &top1_frequencies)
      .def("paired_comparison_matrix", &paired_comparison_matrix)
      .def("average_ranks", &average_ranks)
      .def("summary_json",
           [](const RankingDataset& ds) {
             return summary_to_json(summarize_dataset(ds)).dump();
           })
      .def("to_csv", &serialize_dataset);

  m.def("parse_dataset",
        [](const std::string& text, std::optional<int> k) {
          return parse_dataset(text, k);
        },
        py::arg("text"), py::arg("num_items") = py::none());
  m.def("read_dataset",
        [](const std::string& path, std::optional<int> k) {
          return read_dataset(path, k);
        },
        py::arg("path"), py::arg("num_items") = py::none());

  m.def("pl_log_prob",
        [](const std::vector<int>& ordering, const std::vector<double>& p) {
          return pl_log_prob(to_zero_based(ordering), p);
        },
        py::arg("ordering"), py::arg("p"));
  m.def("mixture_log_lik",
        [](const RankingDataset& ds, const SupportMatrix& p,
           const Eigen::VectorXd& omega) {
          return mixture_log_lik(ds, make_params(p, omega));
        },
        py::arg("dataset"), py::arg("p"), py::arg("omega"));
  m.def("modal_ordering",
        [](const std::vector<double>& p) {
          auto out = modal_ordering(p);
          for (int& i : out) ++i;
          return out;
        },
        py::arg("p"));
  m.def("simulate",
        [](const SupportMatrix& p, const Eigen::VectorXd& omega,
           const std::vector<int>& lengths, std::uint64_t seed) {
          Rng rng = make_stream(seed, 0);
          SimulatedData sim = sample_mixture_dataset(make_params(p, omega), lengths, rng);
          std::vector<int> labels(sim.labels);
          for (int& g : labels) ++g;
          return py::make_tuple(std::move(sim.data), labels);
        },
        py::arg("p"), py::arg("omega"), py::arg("lengths"), py::arg("seed") = 1);

  m.def("fit_map",
        [](const RankingDataset& ds, int g, const std::string& prior,
           int n_starts, std::uint64_t seed, int max_iter, double tol) {
          EmConfig cfg;
          cfg.n_starts = n_starts;
          cfg.seed = seed;
          cfg.max_iter = max_iter;
          cfg.tol = tol;
          const MapResult r = fit_map(
              ds, g, make_prior(parse_prior_kind(prior), g, ds.num_items()), cfg);
          py::dict d;
          d["p"] = SupportMatrix(r.canonical.p);
          d["omega"] = Eigen::VectorXd(r.canonical.omega);
          d["z"] = Eigen::MatrixXd(r.z);
          d["log_posterior"] = r.final_log_posterior();
          d["trace"] = r.trace;
          d["iterations"] = r.iterations;
          d["converged"] = r.converged;
          return d;
        },
        py::arg("dataset"), py::arg("components"), py::arg("prior") = "default",
        py::arg("n_starts") = 10, py::arg("seed") = 1, py::arg("max_iter") = 1000,
        py::arg("tol") = 1e-8);

  py::class_<ModelFit>(m, "ModelFit")
      .def_readonly("num_components", &ModelFit::num_components)
      .def_property_readonly("posterior_p",
                             [](const ModelFit& f) { return f.summary.p_mean; })
      .def_property_readonly("posterior_p_sd",
                             [](const ModelFit& f) { return f.summary.p_sd; })
      .def_property_readonly("posterior_omega",
                             [](const ModelFit& f) { return f.summary.omega_mean; })
      .def_property_readonly("map_p", [](const ModelFit& f) { return f.map.canonical.p; })
      .def_property_readonly("map_omega",
                             [](const ModelFit& f) { return f.map.canonical.omega; })
      .def_property_readonly("deviance",
                             [](const ModelFit& f) { return f.chain.deviance; })
      .def_property_readonly("criteria",
                             [](const ModelFit& f) { return criteria_dict(f.criteria); })
      .def("posterior_predictive",
           [](const ModelFit& f, const RankingDataset& ds, int n_rep,
              std::uint64_t seed) {
             const GofReport r = posterior_predictive(f.chain, ds, n_rep, seed);
             py::dict d;
             d["p_b1"] = r.p_b1();
             d["p_b2"] = r.p_b2();
             if (r.has_conditional()) {
               d["p_b1_cond"] = r.p_b1_cond();
               d["p_b2_cond"] = r.p_b2_cond();
             }
             return d;
           },
           py::arg("dataset"), py::arg("n_rep"), py::arg("seed") = 1);

  m.def("fit",
        [](const RankingDataset& ds, int g, const std::string& prior, int iters,
           int burnin, int thin, std::uint64_t seed, int n_starts) {
          FitOptions opts;
          opts.em.seed = seed;
          opts.em.n_starts = n_starts;
          opts.gibbs.seed = seed;
          opts.gibbs.n_iter = iters;
          opts.gibbs.burn_in = burnin;
          opts.gibbs.thin = thin;
          opts.gibbs.store_labels = false;
          py::gil_scoped_release release;
          return std::move(
              fit_grid(ds, g, g, parse_prior_kind(prior), opts, 1).front());
        },
        py::arg("dataset"), py::arg("components"), py::arg("prior") = "default",
        py::arg("iters") = 22000, py::arg("burnin") = 2000, py::arg("thin") = 1,
        py::arg("seed") = 1, py::arg("n_starts") = 10);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = cli::run(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a plmix command; returns (exit code, stdout, stderr)");
}

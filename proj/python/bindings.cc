//
// Copyright 2026 The BVFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Python bindings: survival, metrics, privacy and training entry points.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "bvfl/bayes/kl.h"
#include "bvfl/cli/run_config.h"
#include "bvfl/common/error.h"
#include "bvfl/federation/convergence.h"
#include "bvfl/federation/trainer.h"
#include "bvfl/metrics/metrics.h"
#include "bvfl/privacy/privacy.h"
#include "bvfl/survival/survival.h"

namespace py = pybind11;

namespace bvfl {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor ToMatrix(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  Tensor t({static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))});
  std::copy(a.data(), a.data() + a.size(), t.mutable_data().begin());
  return t;
}

Array FromMatrix(const Tensor& t) {
  Array out({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict ReportDict(const MetricsReport& r) {
  py::dict d;
  d["cindex"] = r.cindex;
  d["td_cindex"] = r.td_cindex;
  d["ibs"] = r.ibs;
  d["inbll"] = r.inbll;
  d["ipcw_dropped"] = r.ipcw_dropped;
  return d;
}

RunConfig ConfigFrom(const std::map<std::string, std::string>& settings) {
  RunConfig cfg;
  for (const auto& [k, v] : settings) cfg.Set(k, v);
  cfg.Validate();
  return cfg;
}

// Trains on a generated (or configured) cohort and scores the test split.
py::dict Train(const std::map<std::string, std::string>& settings) {
  const RunConfig cfg = ConfigFrom(settings);
  const Dataset data = cfg.Get("data.path").empty()
                           ? GenerateCohort(cfg.Cohort())
                           : LoadDataset(cfg.Get("data.path"), cfg.Loading());
  if (cfg.Get("transport.kind") != "inproc") {
    throw ConfigError("transport.kind", "the Python entry point trains in process");
  }
  const ModelConfig model = ConfigForDataset(data, cfg.Model());
  TrainResult r;
  {
    py::gil_scoped_release release;
    r = cfg.vfl() ? RunVflTraining(data, model, cfg.Training())
                  : RunCentralizedTraining(data, model, cfg.Training());
  }
  py::list history;
  for (const EpochRecord& e : r.history) {
    py::dict row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["val_loss"] = e.val_loss;
    row["val_cindex"] = e.val_cindex;
    history.append(row);
  }
  py::dict out;
  out["history"] = history;
  out["best_epoch"] = r.best_epoch;
  out["t_max"] = r.t_max;
  out["digest"] = HexDigest(cfg.Digest());
  out["test"] = ReportDict(EvaluateSplit(*r.bundle, data, Split::kTest, r.t_max, r.eval));
  if (r.accountant) out["sigma"] = r.accountant->sigma;
  return out;
}

}  // namespace
}  // namespace bvfl

PYBIND11_MODULE(_bvfl, m) {
  using namespace bvfl;
  m.doc() = "Bayesian vertical federated survival analysis";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const PreconditionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DimensionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const UndefinedMetricError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });

  m.def("nll",
        [](const Array& hazards, const std::vector<double>& times, const std::vector<int>& events,
           std::size_t intervals, double t_max) {
          return Nll(ToMatrix(hazards), BuildTargets(times, events, TimeGrid(intervals, t_max)));
        },
        py::arg("hazards"), py::arg("times"), py::arg("events"), py::arg("intervals"),
        py::arg("t_max"), "Mean discrete-time negative log-likelihood.");
  m.def("hazards_to_survival",
        [](const Array& hazards) { return FromMatrix(HazardsToSurvival(ToMatrix(hazards))); },
        py::arg("hazards"));

  m.def("concordance",
        [](const std::vector<double>& risks, const std::vector<double>& times,
           const std::vector<int>& events) { return Concordance(risks, times, events); },
        py::arg("risks"), py::arg("times"), py::arg("events"), "Harrell's C-index.");
  m.def("td_concordance",
        [](const Array& survival, const std::vector<double>& times, const std::vector<int>& events,
           std::size_t intervals, double t_max) {
          return TdConcordance(ToMatrix(survival), times, events, TimeGrid(intervals, t_max));
        },
        py::arg("survival"), py::arg("times"), py::arg("events"), py::arg("intervals"),
        py::arg("t_max"));
  m.def("evaluate_survival",
        [](const Array& survival, const std::vector<double>& times, const std::vector<int>& events,
           std::size_t intervals, double t_max) {
          return ReportDict(
              EvaluateSurvival(ToMatrix(survival), times, events, TimeGrid(intervals, t_max)));
        },
        py::arg("survival"), py::arg("times"), py::arg("events"), py::arg("intervals"),
        py::arg("t_max"), "C-index, td C-index, IBS and INBLL.");

  m.def("kl_gaussian", &KlGaussian, py::arg("mu"), py::arg("sigma"), py::arg("mu0"),
        py::arg("sigma0"));

  m.def("clip_l2", [](const Array& rows, double bound) {
    return FromMatrix(ClipL2(ToMatrix(rows), bound));
  }, py::arg("rows"), py::arg("bound"));
  m.def("calibrate_sigma", &CalibrateSigma, py::arg("epsilon"), py::arg("delta"),
        py::arg("p_sample"), py::arg("tau"), py::arg("c2") = 1.0);
  m.def("delta_for",
        [](double epsilon, double sigma, std::int64_t tau, double p_sample) {
          const DeltaResult r = DeltaFor(epsilon, sigma, tau, p_sample);
          return py::make_tuple(r.delta, r.lambda_star);
        },
        py::arg("epsilon"), py::arg("sigma"), py::arg("tau"), py::arg("p_sample"));
  m.def("accountant",
        [](double epsilon, double delta, double p_sample, std::int64_t tau, double c2,
           double clip) {
          PrivacyParams p;
          p.epsilon = epsilon;
          p.delta = delta;
          p.p_sample = p_sample;
          p.tau = tau;
          p.c2 = c2;
          p.clip = clip;
          const AccountantReport r = MakeAccountantReport(p);
          py::dict d;
          d["epsilon"] = r.epsilon;
          d["delta_target"] = r.delta_target;
          d["delta_achieved"] = r.delta_achieved;
          d["sigma"] = r.sigma;
          d["tau"] = r.tau;
          d["p_sample"] = r.p_sample;
          d["c2"] = r.c2;
          d["lambda_star"] = r.lambda_star;
          return d;
        },
        py::arg("epsilon"), py::arg("delta") = 1e-5, py::arg("p_sample") = 0.01,
        py::arg("tau") = 1000, py::arg("c2") = 1.0, py::arg("clip") = 1.0);

  m.def("verify_convergence_bound",
        [](double sigma, std::size_t seeds, std::size_t epochs, std::uint64_t seed) {
          ConvergenceToy toy;
          toy.sigma = sigma;
          toy.epochs = epochs;
          const ConvergenceReport r = VerifyConvergenceBound(toy, seeds, seed);
          py::dict d;
          d["mean_gap"] = r.mean_gap;
          d["bound"] = r.bound;
          d["max_bound_ratio"] = r.max_bound_ratio;
          d["max_decay_ratio"] = r.max_decay_ratio;
          d["holds"] = r.Holds(1.05);
          return d;
        },
        py::arg("sigma"), py::arg("seeds") = 200, py::arg("epochs") = 50, py::arg("seed") = 1);

  m.def("config_digest",
        [](const std::map<std::string, std::string>& settings) {
          return HexDigest(ConfigFrom(settings).Digest());
        },
        py::arg("settings"));
  m.def("train", &Train, py::arg("settings"),
        "Train with flat config keys (e.g. {'run.mode': 'vfl'}) and score the test split.");
}

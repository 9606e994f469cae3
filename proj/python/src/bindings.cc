// Copyright 2026 The ttst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python module ttst._core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "ttst/cli/commands.h"
#include "ttst/codec/rvq.h"
#include "ttst/model/config.h"
#include "ttst/rnnt/rnnt.h"
#include "ttst/text/bpe.h"

namespace py = pybind11;
using namespace ttst;

namespace {

using Logits = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Accepts logits shaped (N, T+1, V+1).
JointLogProbGrid grid_from(const Logits& logits) {
  if (logits.ndim() != 3) throw DimensionError("logits must be 3-D (N, T+1, V+1)");
  const auto n = logits.shape(0), t1 = logits.shape(1), v1 = logits.shape(2);
  if (n < 1 || t1 < 1 || v1 < 2) throw DimensionError("logits shape must satisfy N>=1, T+1>=1, V+1>=2");
  Mat<double> m(n * t1, v1);
  std::copy(logits.data(), logits.data() + logits.size(), m.data());
  return JointLogProbGrid::from_logits(static_cast<int>(n), static_cast<int>(t1 - 1), m);
}

py::dict to_dict(const OrderedJson& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict to_dict(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_dict(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::array_t<int> codes_array(const CodeGrid& g) {
  py::array_t<int> a({g.frames(), g.books()});
  std::copy(g.data().begin(), g.data().end(), a.mutable_data());
  return a;
}

CodeGrid codes_from(const py::array_t<int, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionError("codes must be 2-D (T, K)");
  CodeGrid g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  for (int t = 0; t < g.frames(); ++t)
    for (int k = 0; k < g.books(); ++k) g.at(t, k) = a.at(t, k);
  return g;
}

ModelConfig model_config(const py::object& config) {
  if (config.is_none()) return ModelConfig::desk();
  if (py::isinstance<py::str>(config)) {
    const auto name = config.cast<std::string>();
    if (name == "desk") return ModelConfig::desk();
    if (name == "large") return ModelConfig::large();
    throw ConfigError("unknown preset '" + name + "'");
  }
  ModelConfig c;
  from_json(from_dict(config), c, "model");
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transducer text-to-speech core";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<InputError>(m, "InputError", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<IndexError>(m, "IndexError", base);
  py::register_exception<DegenerateOutputError>(m, "DegenerateOutputError", base);

  m.def("rnnt_loss", [](const Logits& logits, const std::vector<int>& target) {
    return rnnt_loss(grid_from(logits), target).loss;
  }, py::arg("logits"), py::arg("target"),
  "Negative log-likelihood of `target` given joint logits shaped (N, T+1, V+1); the last column is blank.");

  m.def("rnnt_grad", [](const Logits& logits, const std::vector<int>& target) {
    const auto grid = grid_from(logits);
    const auto r = rnnt_loss(grid, target);
    const Mat<double> g = rnnt_grad(grid, target, r.lattice);
    py::array_t<double> out({logits.shape(0), logits.shape(1), logits.shape(2)});
    std::copy(g.data(), g.data() + g.size(), out.mutable_data());
    return py::make_tuple(r.loss, out);
  }, py::arg("logits"), py::arg("target"), "(loss, d loss / d logits).");

  m.def("best_path", [](const Logits& logits, const std::vector<int>& target) {
    return to_dict(alignment_report(grid_from(logits), target));
  }, py::arg("logits"), py::arg("target"),
  "Most probable alignment: path string, frame_to_pos, dwell and log_prob.");

  m.def("param_count", [](const py::object& config) { return param_count(model_config(config)); },
        py::arg("config") = py::none(),
        "Parameter count for a model config dict or the preset name 'desk' / 'large'.");

  m.def("default_config", [] { return to_dict(RunConfig{}.to_json()); },
        "The default run configuration.");

  py::class_<BpeVocab>(m, "Vocab")
      .def_static("train", &BpeVocab::train, py::arg("sentences"), py::arg("size"))
      .def_static("characters", &BpeVocab::characters, py::arg("sentences"))
      .def_static("load", py::overload_cast<const std::string&>(&BpeVocab::load), py::arg("path"))
      .def("save", py::overload_cast<const std::string&>(&BpeVocab::save, py::const_), py::arg("path"))
      .def("encode", [](const BpeVocab& v, const std::string& s) { return v.encode(s).ids; })
      .def("decode", &BpeVocab::decode)
      .def("token", &BpeVocab::token)
      .def_property_readonly("size", &BpeVocab::size)
      .def_property_readonly("pad_id", &BpeVocab::pad_id)
      .def("__len__", &BpeVocab::size);

  py::class_<Codebooks>(m, "Codec")
      .def(py::init([](int num_codebooks, int codebook_size, int feature_dim, std::uint64_t seed) {
             CodecSpec spec;
             spec.num_codebooks = num_codebooks;
             spec.codebook_size = codebook_size;
             spec.feature_dim = feature_dim;
             spec.validate();
             return rvq_init(spec, seed);
           }),
           py::arg("num_codebooks") = 4, py::arg("codebook_size") = 64, py::arg("feature_dim") = 8,
           py::arg("seed") = 0)
      .def_property_readonly("num_codebooks", [](const Codebooks& b) { return b.spec.num_codebooks; })
      .def_property_readonly("codebook_size", [](const Codebooks& b) { return b.spec.codebook_size; })
      .def_property_readonly("feature_dim", [](const Codebooks& b) { return b.spec.feature_dim; })
      .def("encode", [](const Codebooks& b, const FeatureSeq& x) { return codes_array(rvq_encode(b, x)); },
           py::arg("features"), "Features (T, d) -> codes (T, K).")
      .def("decode", [](const Codebooks& b, const py::array_t<int, py::array::c_style | py::array::forcecast>& c,
                        std::optional<int> levels) {
             const CodeGrid g = codes_from(c);
             return rvq_decode(b, g, levels.value_or(g.books()));
           }, py::arg("codes"), py::arg("levels") = py::none(), "Codes (T, K) -> features (T, d).");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs a ttst subcommand in-process; returns (exit_code, stdout, stderr).");

  m.def("datagen", [](const std::string& out_dir, const std::string& config, std::optional<int> sentences,
                      std::optional<int> speakers, std::optional<std::uint64_t> seed) {
    std::ostringstream log;
    const CorpusStats s = cmd_datagen({config, out_dir, sentences, speakers, seed}, log);
    py::dict d;
    d["utterances"] = s.utterances;
    d["heldout"] = s.heldout;
    d["total_frames"] = s.total_frames;
    d["min_frames"] = s.min_frames;
    d["max_frames"] = s.max_frames;
    return d;
  }, py::arg("out_dir"), py::arg("config") = "", py::arg("sentences") = py::none(),
     py::arg("speakers") = py::none(), py::arg("seed") = py::none());

  m.def("train", [](const std::string& data, const std::string& out, const std::string& config,
                    const std::string& resume, std::optional<std::int64_t> until) {
    std::ostringstream log;
    std::int64_t step;
    {
      py::gil_scoped_release release;
      step = cmd_train({config, data, out, resume, until}, log);
    }
    return step;
  }, py::arg("data"), py::arg("out"), py::arg("config") = "", py::arg("resume") = "",
     py::arg("until") = py::none(), "Trains and returns the step reached.");

  m.def("synth", [](const std::string& ckpt, const std::string& text, const std::string& ref,
                    const std::string& out, double p, std::uint64_t seed) {
    std::ostringstream log;
    const Synthesis s = cmd_synth({ckpt, text, ref, out, p, seed}, log);
    py::dict d;
    d["tokens"] = s.tokens.ids;
    d["codes"] = codes_array(s.codes);
    d["features"] = s.features;
    d["path"] = s.first.path.path_string();
    d["frame_to_pos"] = s.first.path.frame_to_pos;
    return d;
  }, py::arg("ckpt"), py::arg("text"), py::arg("ref"), py::arg("out"), py::arg("p") = 0.95,
     py::arg("seed") = 0);

  m.def("align", [](const std::string& ckpt, const std::string& manifest_entry, const std::string& text,
                    const std::string& codes, const std::string& ref) {
    std::ostringstream log;
    return to_dict(cmd_align({ckpt, manifest_entry, text, codes, ref}, log));
  }, py::arg("ckpt"), py::arg("manifest_entry") = "", py::arg("text") = "", py::arg("codes") = "",
     py::arg("ref") = "");

  m.def("evaluate", [](const std::string& ckpt, const std::string& manifest, const std::string& split,
                       std::uint64_t seed, std::optional<double> p, bool oracle) {
    std::ostringstream log;
    EvalReport r;
    {
      py::gil_scoped_release release;
      r = cmd_eval({ckpt, manifest, split, seed, p, oracle}, log);
    }
    return to_dict(r.to_json());
  }, py::arg("ckpt"), py::arg("manifest"), py::arg("split") = "train", py::arg("seed") = 0,
     py::arg("p") = py::none(), py::arg("oracle") = false);
}

// Python bindings for the pipeline entry points and the scoring helpers.
#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "adgen/annotate.hpp"
#include "adgen/pipeline.hpp"
#include "adgen/shotseg.hpp"
#include "adgen/tracker.hpp"

namespace py = pybind11;
using namespace adgen;

namespace {

// nlohmann -> Python via a JSON round trip; the payloads are small.
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict output_dict(const ADOutput& o) {
  py::dict d;
  d["clip_id"] = o.clip_id;
  d["text"] = o.text;
  d["word_count"] = o.word_count;
  d["mode"] = std::string(to_string(o.mode));
  d["prompt_hash"] = o.prompt_hash;
  return d;
}

py::object report_dict(const EvalReport& r) {
  return to_py(nlohmann::json::parse(report_to_json(r)));
}

FrameBuffer frame_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("frames must be HxWx3 uint8 arrays");
  FrameBuffer f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), f.pixels.begin());
  return f;
}

BoundingBox box_from(const std::vector<double>& v) {
  if (v.size() != 4) throw py::value_error("a box is [x1, y1, x2, y2]");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

PYBIND11_MODULE(_adgen, m) {
  m.doc() = "Audio-description generation pipeline";

  // Translators run newest first, so the base class goes in first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def("set", &apply_setting, py::arg("key"), py::arg("value"),
           "Apply one section.key setting, as in the config file.")
      .def("to_dict", [](const RunConfig& c) { return to_py(to_json(c)); })
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("cache_dir", &RunConfig::cache_dir);

  m.def(
      "load_config",
      [](const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
        auto c = load_run_config(path);
        for (const auto& [k, v] : overrides) apply_setting(c, k, v);
        return c;
      },
      py::arg("path"), py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "generate",
      [](const RunConfig& config) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(config);
        }
        py::dict d;
        py::list outputs;
        for (const auto& o : r.outputs) outputs.append(output_dict(o));
        d["outputs"] = outputs;
        d["done"] = r.manifest.count(ClipStatus::done);
        d["cached"] = r.manifest.count(ClipStatus::cached);
        d["failed"] = r.manifest.count(ClipStatus::failed);
        d["passes"] = r.manifest.passes;
        return d;
      },
      py::arg("config"), "Run generation; writes ad_outputs.jsonl and manifest.json.");

  m.def(
      "evaluate", [](const RunConfig& c, const std::filesystem::path& p) { return report_dict(run_eval(c, p)); },
      py::arg("config"), py::arg("outputs_path"));

  m.def(
      "identify",
      [](const RunConfig& config) {
        const auto r = run_identify(config);
        py::dict d;
        for (const auto& c : r.clips) d[py::str(c.clip_id)] = c.cast_ids;
        return d;
      },
      py::arg("config"), "Cast ids recognized in each clip.");

  m.def("annotate_dump", &run_annotate_dump, py::arg("config"), py::arg("dir"));

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "rouge_l",
      [](const std::string& cand, const std::vector<std::string>& refs) {
        std::vector<Tokens> r;
        for (const auto& x : refs) r.push_back(tokenize(x));
        return rouge_l(tokenize(cand), r);
      },
      py::arg("candidate"), py::arg("references"));
  m.def(
      "cider_d",
      [](const std::vector<std::string>& cands, const std::vector<std::vector<std::string>>& refs) {
        if (cands.size() != refs.size()) throw py::value_error("one reference list per candidate");
        std::vector<std::vector<Tokens>> corpus;
        for (const auto& rs : refs) {
          corpus.emplace_back();
          for (const auto& x : rs) corpus.back().push_back(tokenize(x));
        }
        const CiderIdf table(corpus);
        std::vector<double> out;
        for (std::size_t i = 0; i < cands.size(); ++i) out.push_back(cider_d(tokenize(cands[i]), corpus[i], table));
        return out;
      },
      py::arg("candidates"), py::arg("references"), "Per-candidate CIDEr-D; idf from the given references.");

  m.def(
      "iou", [](const std::vector<double>& a, const std::vector<double>& b) { return iou(box_from(a), box_from(b)); },
      py::arg("a"), py::arg("b"));
  m.def("sample_frames", &sample_frames, py::arg("num_frames"), py::arg("n") = 10);
  m.def(
      "detect_shots",
      [](const std::vector<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>>& frames) {
        std::vector<FrameBuffer> fb;
        for (const auto& a : frames) fb.push_back(frame_from_array(a));
        std::vector<std::pair<int, int>> out;
        for (const auto& s : detect_shots(fb)) out.emplace_back(s.start_frame, s.end_frame);
        return out;
      },
      py::arg("frames"), "Shots as [start, end) frame ranges.");
}

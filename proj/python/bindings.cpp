#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "../tools/cli.hpp"
#include "refcam/fixtures.hpp"
#include "refcam/heatmap.hpp"
#include "refcam/metrics.hpp"
#include "refcam/rle.hpp"
#include "refcam/selector.hpp"

namespace py = pybind11;
using namespace refcam;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Heatmap to_heatmap(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  return Heatmap(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

Mask to_mask(const MaskArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D mask");
  std::vector<std::uint8_t> v(a.data(), a.data() + a.size());
  for (auto& x : v) x = x != 0;
  return Mask(a.shape(0), a.shape(1), std::move(v));
}

Tensor3 to_tensor(const Array& a) {
  if (a.ndim() != 3) throw py::value_error("expected a 3-D array");
  return Tensor3(a.shape(0), a.shape(1), a.shape(2), std::vector<double>(a.data(), a.data() + a.size()));
}

template <typename T>
py::array_t<T> from_grid(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> from_tensor(const Tensor3& t) {
  py::array_t<double> out({t.tokens(), t.height(), t.width()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

std::vector<MaskProposal> to_proposals(const py::dict& proposals) {
  std::vector<MaskProposal> out;
  for (const auto& [k, v] : proposals) out.push_back({k.cast<std::int64_t>(), to_mask(v.cast<MaskArray>())});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace

PYBIND11_MODULE(_refcam, m) {
  m.doc() = "Native core of refcam";

  m.def("compose_gradcam", [](const Array& a, const Array& g) {
    return from_tensor(compose_gradcam(to_tensor(a), to_tensor(g)));
  });
  m.def("mean_over_tokens", [](const Array& t) { return from_grid(mean_over_tokens(to_tensor(t))); });
  m.def("center_sigmoid", [](const Array& h) { return from_grid(center_sigmoid(to_heatmap(h))); });
  m.def("threshold_drop_mask",
        [](const Array& h, double theta) { return from_grid(threshold_drop_mask(to_heatmap(h), theta)); });
  m.def(
      "bilinear_upsample",
      [](const Array& h, std::size_t width, std::size_t height) {
        return from_grid(bilinear_upsample(to_heatmap(h), width, height));
      },
      py::arg("heat"), py::arg("width"), py::arg("height"));

  m.def(
      "connected_components",
      [](const MaskArray& mask, int connectivity) {
        return connected_components(to_mask(mask), connectivity_from_int(connectivity));
      },
      py::arg("mask"), py::arg("connectivity") = 4);

  m.def(
      "select_mask",
      [](const py::dict& proposals, const Array& heat, std::size_t kappa) {
        SelectorConfig cfg;
        cfg.kappa = kappa;
        const auto r = select_mask(to_proposals(proposals), to_heatmap(heat), cfg);
        py::dict out;
        out["selected_id"] = r.selected_id ? py::cast(*r.selected_id) : py::none();
        out["candidates"] = r.candidates;
        out["scores"] = r.scores;
        out["relaxation"] = std::string(to_string(r.relaxation));
        return out;
      },
      py::arg("proposals"), py::arg("heat"), py::arg("kappa") = 12,
      "Pick a proposal id from {id: mask} against an image-resolution heatmap.");

  m.def("iou", [](const MaskArray& a, const MaskArray& b) { return iou(to_mask(a), to_mask(b)); });

  m.def("rle_encode", [](const MaskArray& mask) { return rle_to_json(rle_encode(to_mask(mask))).dump(); });
  m.def("rle_decode",
        [](const std::string& text) { return from_grid(rle_decode(rle_from_json(nlohmann::json::parse(text)))); });

  m.def("parse_expression", [](const std::string& text) {
    const auto p = parse_expression(text);
    py::list tokens;
    for (const auto& t : p.tokens) tokens.append(py::make_tuple(t.surface, t.lemma, std::string(to_string(t.pos))));
    py::dict out;
    out["tokens"] = tokens;
    out["effective"] = p.effective;
    out["primary"] = p.primary;
    out["context"] = p.context;
    out["positional"] = p.positional;
    return out;
  });

  m.def("write_fixtures", [](const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& p : fixtures::write_fixtures(dir)) out.push_back(p.string());
    return out;
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"refcam"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command line tool in-process; returns (exit_code, stdout, stderr).");
}

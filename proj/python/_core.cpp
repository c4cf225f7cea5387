#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ontosearch/eval.hpp"
#include "ontosearch/kb.hpp"
#include "ontosearch/orchestrator.hpp"
#include "ontosearch/service.hpp"

namespace py = pybind11;
using namespace ontosearch;

namespace {

// Raised for requests the pipeline rejects; carries the API error code.
PyObject* g_query_error = nullptr;

std::string search_json(const KnowledgeBase& kb, const std::string& text, const std::optional<std::string>& dept,
                        std::size_t k, const ScoringParams& params) {
  SearchResponse response;
  {
    py::gil_scoped_release release;
    response = handle_request(kb, RawQuery{text, dept, k}, params);
  }
  if (response.error) {
    py::object err = py::reinterpret_borrow<py::object>(g_query_error)(response.error->message);
    err.attr("code") = response.error->code;
    PyErr_SetObject(g_query_error, err.ptr());
    throw py::error_already_set();
  }
  return render_search_response(response, kb);
}

std::string eval_json(const KnowledgeBase& kb, const std::filesystem::path& corpus, const ScoringParams& params,
                      std::size_t k, std::size_t threads) {
  const auto records = load_corpus_file(corpus);
  py::gil_scoped_release release;
  return emit_report(run_eval(kb, records, params, k, threads), ReportFormat::Json);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of ontosearch";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);
  g_query_error = PyErr_NewException("ontosearch._core.QueryError", PyExc_ValueError, nullptr);
  m.attr("QueryError") = py::handle(g_query_error);

  py::class_<ScoringParams>(m, "ScoringParams")
      .def(py::init<>())
      .def_readwrite("lambda_peer", &ScoringParams::lambda_peer)
      .def_readwrite("dept_match_boost", &ScoringParams::dept_match_boost)
      .def_readwrite("dept_mismatch_penalty", &ScoringParams::dept_mismatch_penalty)
      .def_readwrite("hard_department_filter", &ScoringParams::hard_department_filter)
      .def_readwrite("threshold", &ScoringParams::threshold)
      .def_readwrite("expansion_weight", &ScoringParams::expansion_weight)
      .def("violations", &ScoringParams::violations);

  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def_property_readonly("fingerprint", &KnowledgeBase::fingerprint)
      .def_property_readonly("employee_count", [](const KnowledgeBase& kb) { return kb.employees().size(); })
      .def_property_readonly("case_count", [](const KnowledgeBase& kb) { return kb.cases().size(); })
      .def_property_readonly("department_ids",
                             [](const KnowledgeBase& kb) {
                               std::vector<std::string> ids;
                               for (const auto& d : kb.departments()) ids.push_back(d.id);
                               return ids;
                             })
      .def("serialize", [](const KnowledgeBase& kb) { return serialize_kb(kb); })
      .def("__eq__", [](const KnowledgeBase& a, const KnowledgeBase& b) { return a == b; });

  m.def("load_kb", &load_kb_file, py::arg("path"));
  m.def("loads_kb", [](const std::string& text) { return load_kb(text); }, py::arg("text"));
  m.def(
      "validate_kb_text",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& v : validate_kb(parse_kb_document(text))) out.push_back(to_string(v));
        return out;
      },
      py::arg("text"));

  m.def("search_json", &search_json, py::arg("kb"), py::arg("text"), py::arg("dept") = std::nullopt,
        py::arg("k") = kDefaultResultLimit, py::arg("params") = ScoringParams{});
  m.def("eval_json", &eval_json, py::arg("kb"), py::arg("corpus"), py::arg("params") = ScoringParams{},
        py::arg("k") = kDefaultResultLimit, py::arg("threads") = 0);

  m.def("precision", &precision, py::arg("retrieved"), py::arg("relevant"));
  m.def("recall", &recall, py::arg("retrieved"), py::arg("relevant"));
  m.def("f_measure", &f_measure, py::arg("precision"), py::arg("recall"));
  m.def("format_metric", &format_metric, py::arg("value"));
}

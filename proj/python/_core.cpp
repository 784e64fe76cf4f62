// SPDX-License-Identifier: Apache-2.0
//
// Python bindings. Programs are opaque handles; everything else crosses as dicts and strings.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "ssv/error.hpp"
#include "ssv/harness.hpp"
#include "ssv/llm.hpp"
#include "ssv/oracle.hpp"
#include "ssv/smt.hpp"
#include "ssv/util.hpp"
#include "ssv/verifier.hpp"

namespace py = pybind11;
using namespace ssv;

namespace {

struct Program {
  std::shared_ptr<const SegmentedProgram> p;
};

std::unique_ptr<SatChecker> makeChecker(const std::string& solver, std::uint64_t cap) {
  if (solver == "oracle") {
    OracleOptions o;
    if (cap) o.cap = cap;
    return std::make_unique<OracleChecker>(o);
  }
  if (solver == "z3") return std::make_unique<SmtBackend>();
  SmtOptions o;
  o.solverCmd = solver;
  return std::make_unique<SmtBackend>(o);
}

py::object labelOrNone(const std::optional<OptionLabel>& l) {
  return l ? py::object(py::str(l->str())) : py::object(py::none());
}

py::list labels(const std::set<OptionLabel>& ls) {
  py::list out;
  for (const auto& l : ls) out.append(l.str());
  return out;
}

py::dict outcomeDict(const AnswerOutcome& o) {
  py::dict per;
  for (const auto& [l, oo] : o.perOption) {
    py::dict d;
    d["check_type"] = checkTypeName(oo.checkType);
    d["status"] = statusName(oo.status);
    d["passed"] = oo.passed;
    per[py::str(l.str())] = d;
  }
  py::dict d;
  d["answer"] = labelOrNone(o.answer);
  d["passing"] = labels(o.passing);
  d["options"] = per;
  return d;
}

py::dict execute(const Program& prog, const std::string& solver, int budgetMs, std::uint64_t cap) {
  auto checker = makeChecker(solver, cap);
  AnswerOutcome o;
  {
    py::gil_scoped_release nogil;
    o = executeProgram(*checker, *prog.p, budgetMs);
  }
  return outcomeDict(o);
}

py::dict verify(const Program& prog, const std::string& instantiations, const std::string& solver, int budgetMs) {
  const auto& program = *prog.p;
  const auto first = instantiations.find_first_not_of(" \t\r\n");
  const auto insts = first != std::string::npos && instantiations[first] == '['
                         ? instantiationsFromJson(program, instantiations)
                         : parseInstantiations(instantiations, program);
  auto checker = makeChecker(solver, 0);
  VerificationOutcome v;
  {
    py::gil_scoped_release nogil;
    v = verifyInstantiations(*checker, program, insts, budgetMs);
  }
  py::list checks;
  for (const auto& c : v.checks) {
    const auto& inst = insts.at(c.position);
    py::dict d;
    d["constraint"] = inst.constraintIndex;
    d["polarity"] = polarityName(inst.polarity);
    d["status"] = c.skipped ? "skipped" : statusName(c.status);
    d["failure"] = c.failure ? py::object(py::str(failReasonName(*c.failure))) : py::object(py::none());
    checks.append(d);
  }
  py::dict d;
  d["pass"] = v.pass;
  d["reason"] = v.reason ? py::object(py::str(failReasonName(*v.reason))) : py::object(py::none());
  d["checks"] = checks;
  return d;
}

py::dict wellFormed(const Program& prog, const std::string& solver, int budgetMs) {
  auto checker = makeChecker(solver, 0);
  AnswerOutcome o;
  WellFormedReport wf;
  {
    py::gil_scoped_release nogil;
    o = executeProgram(*checker, *prog.p, budgetMs);
    wf = isWellFormed(*checker, *prog.p, o, budgetMs);
  }
  py::list flags;
  for (const auto& dc : wf.degenerate) flags.append(py::make_tuple(dc.index, degeneracyName(dc.flag)));
  py::dict d;
  d["ok"] = wf.ok();
  d["structure_ok"] = wf.structureOk;
  d["structure_error"] = wf.structureError;
  d["single_answer_ok"] = wf.singleAnswerOk;
  d["degenerate"] = flags;
  d["passing"] = labels(o.passing);
  return d;
}

std::string runTask(const std::string& taskJson, const std::string& configPath) {
  const auto task = taskFromJson(taskJson);
  const auto cfg = SsvConfig::fromFile(configPath);
  py::gil_scoped_release nogil;
  auto llm = makeGateway(cfg);
  SmtBackend smt(SmtOptions{cfg.solverCmd, cfg.groundingBound});
  Pipeline p(cfg, *llm, smt, loadPrompts(cfg));
  return resultToJson(p.run(task));
}

std::string evaluateDataset(const std::string& datasetPath, const std::string& configPath) {
  const auto cfg = SsvConfig::fromFile(configPath);
  py::gil_scoped_release nogil;
  auto llm = makeGateway(cfg);
  SmtBackend smt(SmtOptions{cfg.solverCmd, cfg.groundingBound});
  const auto ev = evaluate(loadDataset(datasetPath), cfg, *llm, smt, loadPrompts(cfg));
  return reportToJson(ev.records, ev.metrics);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semantic self-verification engine";

  auto base = py::register_exception<Error>(m, "SsvError", PyExc_RuntimeError);
  py::register_exception<DslError>(m, "DslError", base.ptr());
  py::register_exception<OracleError>(m, "OracleError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DatasetError>(m, "DatasetError", base.ptr());
  py::register_exception<LabelError>(m, "LabelError", base.ptr());
  py::register_exception<LlmError>(m, "LlmError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Program>(m, "Program")
      .def_static(
          "parse", [](const std::string& src) { return Program{std::make_shared<SegmentedProgram>(parseProgram(src))}; },
          py::arg("source"))
      .def("__str__", [](const Program& p) { return printProgram(*p.p); })
      .def("__eq__", [](const Program& a, const Program& b) { return equal(*a.p, *b.p); })
      .def_property_readonly("num_constraints", [](const Program& p) { return p.p->constraints.size(); })
      .def_property_readonly("constraints",
                             [](const Program& p) {
                               std::vector<std::string> out;
                               for (const auto& c : p.p->constraints) out.push_back(c.nlText);
                               return out;
                             })
      .def_property_readonly("option_labels",
                             [](const Program& p) {
                               std::vector<std::string> out;
                               for (const auto& o : p.p->options) out.push_back(o.label.str());
                               return out;
                             })
      .def("constraint_code", [](const Program& p, std::size_t i) {
        if (i >= p.p->constraints.size()) throw py::index_error("constraint index out of range");
        return printConstraintCode(*p.p, i);
      });

  m.def("execute", &execute, py::arg("program"), py::arg("solver") = "z3", py::arg("budget_ms") = kDefaultBudgetMs,
        py::arg("cap") = 0, "Check every option; solver is \"z3\", \"oracle\" or a solver command line.");
  m.def("verify", &verify, py::arg("program"), py::arg("instantiations"), py::arg("solver") = "z3",
        py::arg("budget_ms") = kDefaultBudgetMs, "Instantiations as a JSON array or response blocks.");
  m.def("well_formed", &wellFormed, py::arg("program"), py::arg("solver") = "z3",
        py::arg("budget_ms") = kDefaultBudgetMs);
  m.def(
      "count_models",
      [](const Program& p, std::uint64_t cap) {
        OracleOptions o;
        if (cap) o.cap = cap;
        py::gil_scoped_release nogil;
        return countModels(*p.p->scope, p.p->fullPreconditions(), o);
      },
      py::arg("program"), py::arg("cap") = 0);

  m.def("normalize_label", [](const std::string& s) { return normalizeLabel(s).str(); });
  m.def("format_percent", &formatPercent, py::arg("num"), py::arg("den"));
  m.def(
      "metrics",
      [](long long total, long long correct, long long verified, long long verifiedCorrect) {
        RunMetrics r;
        r.total = total;
        r.correct = correct;
        r.verified = verified;
        r.verifiedCorrect = verifiedCorrect;
        return metricsToJson(r);
      },
      py::arg("total"), py::arg("correct"), py::arg("verified"), py::arg("verified_correct"));
  m.def("config_from_json", [](const std::string& s) { return SsvConfig::fromJson(s).toJson(); });
  m.def("default_config", [] { return SsvConfig{}.toJson(); });
  m.def("run_task", &runTask, py::arg("task_json"), py::arg("config_path"));
  m.def("evaluate_dataset", &evaluateDataset, py::arg("dataset_path"), py::arg("config_path"));
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "llcoach/data.hpp"
#include "llcoach/pipeline.hpp"

namespace py = pybind11;
using namespace llcoach;

namespace {

const Domain& bundled_domain() {
  static const Domain d = parse_domain(data::get("domain.txt"));
  return d;
}

const ActionCatalog& bundled_catalog() {
  static const ActionCatalog c(parse_action_file(data::get("actions.txt")));
  return c;
}

Plan plan_of(const std::string& text, bool strict_join = false) {
  return parse_plan(text, bundled_catalog(), bundled_domain(), ParseOptions{strict_join});
}

OpponentPolicyKind policy_of(const std::string& name) {
  const auto kind = opponent_policy_from_string(name);
  if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown opponent policy: " + name);
  return *kind;
}

py::dict match_dict(const MatchResult& r) {
  py::dict d;
  d["success"] = r.success;
  d["passes"] = r.passes;
  d["scoring_time"] = r.scoring_time;
  d["end_reason"] = r.end_reason;
  d["trace"] = r.trace_text();
  return d;
}

}  // namespace

PYBIND11_MODULE(_llcoach, m) {
  m.doc() = "LLCoach offline pipeline over the bundled domain and action catalog";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PipelineError& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.cause())), std::string(e.what()));
      PyErr_SetObject(error_type.ptr(), args.ptr());
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.kind())), e.detail());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def("parse_plan", [](const std::string& text, bool strict_join) { return serialize_plan(plan_of(text, strict_join)); },
        py::arg("text"), py::arg("strict_join") = false, "Parse a plan and return its canonical text.");

  m.def(
      "validate",
      [](const std::string& plan_text, const std::string& state_text) {
        const auto report =
            validate_plan(plan_of(plan_text), bundled_catalog(), bundled_domain(), parse_state(state_text));
        py::list out;
        for (const auto& v : report.violations) {
          py::dict d;
          d["step"] = v.step;
          d["action"] = v.action;
          d["kind"] = std::string(to_string(v.kind));
          d["subject"] = v.subject;
          d["message"] = v.message;
          out.append(d);
        }
        return out;
      },
      py::arg("plan"), py::arg("state") = "", "List of violations; empty when the plan is valid.");

  m.def(
      "auto_parallelize",
      [](const std::string& plan_text, const std::string& state_text) {
        return serialize_plan(
            auto_parallelize(plan_of(plan_text), bundled_catalog(), bundled_domain(), parse_state(state_text)));
      },
      py::arg("plan"), py::arg("state") = "");

  m.def(
      "simulate",
      [](const std::string& plan_text, const std::string& world_text, const std::string& opponents,
         std::uint64_t seed) {
        const auto r = run_match(compile_fsm(plan_of(plan_text)), parse_world(world_text, bundled_domain().field()),
                                 bundled_domain(), SimConfig{}, OpponentPolicy{policy_of(opponents), seed});
        return match_dict(r);
      },
      py::arg("plan"), py::arg("world"), py::arg("opponents") = "static", py::arg("seed") = 0);

  m.def(
      "evaluate",
      [](const std::string& library_dir, const std::string& scenarios_text, const std::string& opponents,
         std::uint64_t seed, const std::string& format) {
        const auto fmt = report_format_from_string(format);
        if (!fmt) throw Error(ErrorKind::InvalidArgument, "unknown report format: " + format);
        const Library lib = load_library(library_dir, bundled_catalog(), bundled_domain());
        const auto worlds = parse_world_set(scenarios_text, bundled_domain().field());
        const auto result = run_evaluate(lib, worlds, bundled_domain(), SimConfig{}, policy_of(opponents), seed);
        return format_report(result.metrics, "LLCoach", *fmt);
      },
      py::arg("library"), py::arg("scenarios"), py::arg("opponents") = "static", py::arg("seed") = 0,
      py::arg("format") = "table");

  m.def(
      "generate_replay",
      [](const std::string& frame_text, const std::string& frame_id, const std::string& transcript_text) {
        GenerateInputs in;
        in.domain = bundled_domain();
        in.catalog = bundled_catalog();
        in.frame = parse_world(frame_text, in.domain.field());
        in.frame_id = frame_id;
        ReplayProvider replay(Transcript::parse(transcript_text));
        NetworkGuard guard;
        return serialize_plan(run_generate(in, replay, HashEmbeddingProvider{}).record.plan);
      },
      py::arg("frame"), py::arg("frame_id"), py::arg("transcript"),
      "Run the generation pipeline against a recorded transcript, with no network access.");
}

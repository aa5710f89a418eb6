// Command-line front end. Talks to the library only through desopacity.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "desopacity.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitError = 2;
constexpr int kExitNoSolution = 3;

using ojson = nlohmann::ordered_json;

// Owning wrappers over the C handles.
struct StringOut {
  char* p = nullptr;
  ~StringOut() { dop_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Model = Handle<dop_model, dop_model_free>;
using Policy = Handle<dop_policy, dop_policy_free>;
using Synthesis = Handle<dop_synthesis, dop_synthesis_free>;

struct Failure {
  std::string message;
};

void check(dop_status status, const std::string& context) {
  if (status != DOP_OK) throw Failure{context + ": " + dop_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256(const std::string& bytes) {
  StringOut out;
  check(dop_sha256_hex(bytes.data(), bytes.size(), &out.p), "sha256");
  return out.str();
}

// Tracks inputs and written artifacts for the run manifest.
struct Run {
  std::string command;
  ojson inputs = ojson::array();
  ojson artifacts = ojson::array();
  ojson config = ojson::object();
  ojson outcome = ojson::object();
  std::string manifest_path;

  std::string load(const std::string& path) {
    std::string bytes = read_file(path);
    inputs.push_back({{"path", path}, {"sha256", sha256(bytes)}, {"bytes", bytes.size()}});
    return bytes;
  }

  void write(const std::string& path, const std::string& bytes) {
    if (path == "-") {
      std::cout << bytes;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
      throw Failure{"cannot write " + path};
    artifacts.push_back({{"path", path}, {"sha256", sha256(bytes)}});
    if (manifest_path.empty()) manifest_path = path + ".manifest.json";
  }

  void finish() {
    if (artifacts.empty() || manifest_path == "none") return;
    ojson doc;
    doc["tool"] = "desopacity";
    doc["version"] = dop_version();
    doc["command"] = command;
    doc["inputs"] = inputs;
    doc["config"] = config;
    doc["outcome"] = outcome;
    doc["artifacts"] = artifacts;
    std::ofstream out(manifest_path, std::ios::binary);
    if (!(out << doc.dump(2) << "\n")) throw Failure{"cannot write " + manifest_path};
  }
};

dop_mode parse_mode(const std::string& mode) {
  return mode == "decision" ? DOP_MODE_DECISION : DOP_MODE_OBSERVATION;
}

void load_model(Run& run, const std::string& path, Model& model) {
  const std::string text = run.load(path);
  check(dop_model_parse(text.data(), text.size(), &model.p), path);
}

void load_policy(Run& run, const std::string& path, const Model& model, Policy& policy) {
  const std::string text = run.load(path);
  check(dop_policy_parse(model.p, text.data(), text.size(), &policy.p), path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opacity verification and opacity-enforcing supervisor synthesis"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(dop_version()));

  std::string mode = "observation";
  std::size_t size_guard = 1'000'000;
  std::uint64_t seed = 1;
  app.add_option("--mode", mode, "Decision issuance: observation or decision")
      ->check(CLI::IsMember({"observation", "decision"}))
      ->capture_default_str();
  app.add_option("--size-guard", size_guard, "Maximum arena states")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "Seed for the random-instance generator")->capture_default_str();

  std::string model_path;
  std::string manifest;

  auto* verify = app.add_subcommand("verify", "Check current-state opacity (exit 0 opaque, 1 not opaque)");
  bool open_loop = false;
  std::string supervisor;
  std::size_t bound = 0;
  verify->add_option("model", model_path, "Model document")->required();
  auto* ol = verify->add_flag("--open-loop", open_loop, "Open-loop system, no supervisor");
  auto* sup = verify->add_option("--supervisor", supervisor, "Table or structure document");
  ol->excludes(sup);
  verify->add_option("--bound", bound, "Only check strings up to this length (0: exact)");
  verify->callback([&] {
    if (!open_loop && supervisor.empty()) throw CLI::ValidationError("verify", "one of --open-loop or --supervisor is required");
  });

  auto* synth = app.add_subcommand("synthesize", "Synthesize an opacity-enforcing supervisor (exit 3: none exists)");
  std::string extraction = "first_feasible";
  std::string out_path, dot_path, arena_dot_path, report_path;
  std::size_t cap = 0;
  bool timing = false;
  synth->add_option("model", model_path, "Model document")->required();
  synth->add_option("--policy", extraction, "Extraction policy")
      ->check(CLI::IsMember({"first_feasible", "locally_maximal", "enumerate_all"}))
      ->capture_default_str();
  synth->add_option("--out", out_path, "Write the control structure here");
  synth->add_option("--dot", dot_path, "Write the control structure as DOT");
  synth->add_option("--arena-dot", arena_dot_path, "Write the unpruned arena as DOT");
  synth->add_option("--report", report_path, "Write the synthesis report");
  synth->add_flag("--timing", timing, "Include wall time in the report (makes it non-reproducible)");
  synth->add_option("--cap", cap, "Maximum structures for enumerate_all");
  synth->add_option("--manifest", manifest, "Manifest path ('none' to skip)");

  auto* estimate = app.add_subcommand("estimate", "Controlled state estimate from an information-flow trace");
  std::string flow_path;
  estimate->add_option("model", model_path, "Model document")->required();
  estimate->add_option("--flow", flow_path, "Trace file")->required();

  auto* export_dot = app.add_subcommand("export-dot", "Render a model, structure, estimator slice, or arena");
  std::string structure_path, estimator_path, dot_out = "-";
  bool arena = false;
  export_dot->add_option("model", model_path, "Model document")->required();
  auto* xs = export_dot->add_option("--structure", structure_path, "Structure document");
  auto* xe = export_dot->add_option("--estimator", estimator_path, "Supervisor whose closed-loop estimator to draw");
  auto* xa = export_dot->add_flag("--arena", arena, "Synthesis arena with pruned states outlined");
  xs->excludes(xe)->excludes(xa);
  xe->excludes(xa);
  export_dot->add_option("--out", dot_out, "Output path ('-' for stdout)")->capture_default_str();
  export_dot->add_option("--manifest", manifest, "Manifest path ('none' to skip)");

  auto* random = app.add_subcommand("random-model", "Generate a random model (and optionally a table supervisor)");
  std::size_t max_states = 5, max_events = 4, depth = 3;
  std::string random_out = "-", policy_out;
  random->add_option("--states", max_states, "Maximum states")->check(CLI::Range(1, 64))->capture_default_str();
  random->add_option("--events", max_events, "Maximum events")->check(CLI::Range(1, 64))->capture_default_str();
  random->add_option("--out", random_out, "Model output ('-' for stdout)")->capture_default_str();
  random->add_option("--policy-out", policy_out, "Also write a random table supervisor");
  random->add_option("--depth", depth, "Table depth")->capture_default_str();
  random->add_option("--manifest", manifest, "Manifest path ('none' to skip)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  const dop_mode m = parse_mode(mode);
  Run run;
  run.manifest_path = manifest;
  run.config["mode"] = mode;
  int code = kExitOk;
  try {
    if (*verify) {
      run.command = "verify";
      Model model;
      load_model(run, model_path, model);
      if (open_loop) {
        int opaque = 0;
        StringOut witness;
        check(dop_verify_open_loop(model.p, &opaque, &witness.p), "verify");
        std::cout << (opaque ? "opaque" : "not opaque") << " (open loop)\n";
        if (!opaque) std::cout << "witness: " << witness.str() << "\n";
        code = opaque ? kExitOk : kExitNegative;
      } else {
        Policy policy;
        load_policy(run, supervisor, model, policy);
        dop_verdict v{};
        check(dop_verify_closed_loop(policy.p, m, bound, &v), "verify");
        std::cout << (v.opaque ? "opaque" : "not opaque") << " (" << mode << "-triggered";
        if (!v.exact) std::cout << ", strings up to length " << v.bound;
        std::cout << ")\n";
        if (!v.opaque) {
          std::cout << "counterexample: " << v.counterexample << "\n";
          std::cout << "revealed estimate: " << v.revealed_estimate << "\n";
        }
        code = v.opaque ? kExitOk : kExitNegative;
        dop_verdict_clear(&v);
      }
    } else if (*synth) {
      run.command = "synthesize";
      Model model;
      load_model(run, model_path, model);
      dop_synthesis_config cfg;
      dop_synthesis_config_init(&cfg);
      cfg.mode = m;
      cfg.extraction = extraction == "locally_maximal" ? DOP_EXTRACT_LOCALLY_MAXIMAL
                       : extraction == "enumerate_all" ? DOP_EXTRACT_ENUMERATE_ALL
                                                       : DOP_EXTRACT_FIRST_FEASIBLE;
      cfg.size_guard = size_guard;
      cfg.enumerate_cap = cap;
      cfg.diagnostics = arena_dot_path.empty() ? 0 : 1;
      run.config["policy"] = extraction;
      run.config["size_guard"] = size_guard;
      Synthesis syn;
      check(dop_synthesize(model.p, &cfg, &syn.p), "synthesize");
      const bool solved = dop_synthesis_solved(syn.p) != 0;
      const std::size_t count = dop_synthesis_structure_count(syn.p);
      run.outcome["solved"] = solved;
      run.outcome["structures"] = count;
      if (solved) {
        std::cout << "solution found (" << count << " structure" << (count == 1 ? "" : "s") << ")\n";
        if (!out_path.empty()) {
          StringOut s;
          check(dop_synthesis_structure(syn.p, 0, &s.p), "serialize");
          run.write(out_path, s.str());
          // enumerate_all: remaining structures next to the first.
          for (std::size_t i = 1; i < count; ++i) {
            StringOut t;
            check(dop_synthesis_structure(syn.p, i, &t.p), "serialize");
            run.write(out_path + "." + std::to_string(i), t.str());
          }
        }
        if (!dot_path.empty()) {
          StringOut s;
          check(dop_synthesis_structure_dot(syn.p, 0, &s.p), "dot");
          run.write(dot_path, s.str());
        }
      } else {
        std::cout << "no solution exists\n";
        code = kExitNoSolution;
      }
      if (!arena_dot_path.empty()) {
        StringOut s;
        check(dop_synthesis_arena_dot(syn.p, &s.p), "arena dot");
        run.write(arena_dot_path, s.str());
      }
      if (!report_path.empty()) {
        StringOut s;
        check(dop_synthesis_report(syn.p, timing, &s.p), "report");
        run.write(report_path, s.str());
      }
    } else if (*estimate) {
      run.command = "estimate";
      Model model;
      load_model(run, model_path, model);
      const std::string trace = run.load(flow_path);
      StringOut est;
      check(dop_estimate_flow(model.p, trace.data(), trace.size(), m, &est.p), flow_path);
      std::cout << est.str() << "\n";
    } else if (*export_dot) {
      run.command = "export-dot";
      Model model;
      load_model(run, model_path, model);
      StringOut s;
      if (!structure_path.empty()) {
        Policy policy;
        load_policy(run, structure_path, model, policy);
        check(dop_policy_structure_dot(policy.p, &s.p), "dot");
      } else if (!estimator_path.empty()) {
        Policy policy;
        load_policy(run, estimator_path, model, policy);
        check(dop_policy_estimator_dot(policy.p, m, &s.p), "dot");
      } else if (arena) {
        dop_synthesis_config cfg;
        dop_synthesis_config_init(&cfg);
        cfg.mode = m;
        cfg.size_guard = size_guard;
        cfg.diagnostics = 1;
        Synthesis syn;
        check(dop_synthesize(model.p, &cfg, &syn.p), "synthesize");
        check(dop_synthesis_arena_dot(syn.p, &s.p), "dot");
      } else {
        check(dop_model_dot(model.p, &s.p), "dot");
      }
      run.write(dot_out, s.str());
    } else if (*random) {
      run.command = "random-model";
      run.config["seed"] = seed;
      Model model;
      check(dop_model_random(seed, max_states, max_events, &model.p), "random-model");
      StringOut s;
      check(dop_model_serialize(model.p, &s.p), "serialize");
      run.write(random_out, s.str());
      if (!policy_out.empty()) {
        Policy policy;
        check(dop_policy_random(model.p, seed, depth, &policy.p), "random policy");
        StringOut p;
        check(dop_policy_serialize(policy.p, &p.p), "serialize");
        run.write(policy_out, p.str());
      }
    }
    run.finish();
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitError;
  }
  return code;
}

#include "desopacity.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

std::string read_text(const std::string& name) {
  std::ifstream in(std::string(DESOPACITY_TEST_DATA) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Str {
  char* p = nullptr;
  ~Str() { dop_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

dop_model* load(const std::string& text) {
  dop_model* m = nullptr;
  REQUIRE(dop_model_parse(text.data(), text.size(), &m) == DOP_OK);
  return m;
}

}  // namespace

TEST_CASE("C API: models and open-loop verification") {
  dop_model* m = load(read_text("run.json"));
  CHECK(dop_model_num_states(m) == 8);
  CHECK(dop_model_num_transitions(m) == 10);
  int opaque = -1;
  Str witness;
  CHECK(dop_verify_open_loop(m, &opaque, &witness.p) == DOP_OK);
  CHECK(opaque == 1);
  CHECK(witness.p == nullptr);
  Str text;
  CHECK(dop_model_serialize(m, &text.p) == DOP_OK);
  dop_model* again = load(text.str());
  dop_model_free(again);
  dop_model_free(m);
  CHECK(std::string(dop_version()) == "0.1.0");
}

TEST_CASE("C API: error codes") {
  dop_model* m = nullptr;
  const std::string bad = "{\n\"states\": [\n";
  CHECK(dop_model_parse(bad.data(), bad.size(), &m) == DOP_ERR_PARSE);
  CHECK(m == nullptr);
  CHECK(dop_last_error_line() > 0);
  CHECK(std::string(dop_last_error()).find("line") != std::string::npos);
  const std::string nd = R"({"states":["0","1","2"],"events":["a"],"initial":"0",
      "transitions":[["0","a","1"],["0","a","2"]]})";
  CHECK(dop_model_parse(nd.data(), nd.size(), &m) == DOP_ERR_SEMANTIC);
  CHECK(std::string(dop_last_error()).find("nondeterministic") != std::string::npos);
  CHECK(dop_model_parse(nullptr, 0, &m) == DOP_ERR_ARGUMENT);
  CHECK(dop_model_serialize(nullptr, nullptr) == DOP_ERR_ARGUMENT);

  dop_model* run = load(read_text("run.json"));
  dop_synthesis_config cfg;
  dop_synthesis_config_init(&cfg);
  cfg.size_guard = 10;
  dop_synthesis* s = nullptr;
  CHECK(dop_synthesize(run, &cfg, &s) == DOP_ERR_RESOURCE);
  CHECK(std::string(dop_last_error()).find("size guard") != std::string::npos);
  cfg.size_guard = 0;
  cfg.mode = static_cast<dop_mode>(7);
  CHECK(dop_synthesize(run, &cfg, &s) == DOP_ERR_ARGUMENT);

  const std::string flow = "event=a, decision=-\n";
  Str est;
  CHECK(dop_estimate_flow(run, flow.data(), flow.size(), DOP_MODE_OBSERVATION, &est.p) == DOP_ERR_PRECONDITION);
  dop_model_free(run);
}

TEST_CASE("C API: closed-loop verification and estimates") {
  dop_model* m = load(read_text("run.json"));
  const std::string srun = read_text("srun.json");
  dop_policy* p = nullptr;
  REQUIRE(dop_policy_parse(m, srun.data(), srun.size(), &p) == DOP_OK);
  dop_verdict v{};
  CHECK(dop_verify_closed_loop(p, DOP_MODE_OBSERVATION, 0, &v) == DOP_OK);
  CHECK(v.opaque == 0);
  CHECK(v.exact == 1);
  CHECK(std::string(v.counterexample) == "a u1 u2 u2");
  CHECK(std::string(v.revealed_estimate) == "{7}");
  dop_verdict_clear(&v);
  CHECK(v.counterexample == nullptr);
  CHECK(dop_verify_closed_loop(p, DOP_MODE_DECISION, 0, &v) == DOP_OK);
  CHECK(v.opaque == 1);
  dop_verdict_clear(&v);
  CHECK(dop_verify_closed_loop(p, DOP_MODE_OBSERVATION, 3, &v) == DOP_OK);
  CHECK(v.opaque == 1);
  CHECK(v.exact == 0);
  CHECK(v.bound == 3);
  dop_verdict_clear(&v);
  Str dot;
  CHECK(dop_policy_structure_dot(p, &dot.p) == DOP_ERR_PRECONDITION);
  dop_policy_free(p);

  const std::string flow = read_text("decision_triggered.flow");
  Str est;
  CHECK(dop_estimate_flow(m, flow.data(), flow.size(), DOP_MODE_DECISION, &est.p) == DOP_OK);
  CHECK(est.str() == "{5,6,7}");
  dop_model_free(m);
}

TEST_CASE("C API: synthesis") {
  dop_model* m = load(read_text("run.json"));
  dop_synthesis_config cfg;
  dop_synthesis_config_init(&cfg);
  CHECK(cfg.mode == DOP_MODE_OBSERVATION);
  cfg.extraction = DOP_EXTRACT_ENUMERATE_ALL;
  cfg.enumerate_cap = 3;
  cfg.diagnostics = 1;
  dop_synthesis* s = nullptr;
  REQUIRE(dop_synthesize(m, &cfg, &s) == DOP_OK);
  CHECK(dop_synthesis_solved(s) == 1);
  CHECK(dop_synthesis_structure_count(s) == 3);
  Str doc, dot, arena, report;
  CHECK(dop_synthesis_structure(s, 0, &doc.p) == DOP_OK);
  CHECK(dop_synthesis_structure(s, 3, &dot.p) == DOP_ERR_ARGUMENT);
  CHECK(dop_synthesis_structure_dot(s, 1, &dot.p) == DOP_OK);
  CHECK(dot.str().rfind("digraph structure", 0) == 0);
  CHECK(dop_synthesis_arena_dot(s, &arena.p) == DOP_OK);
  CHECK(dop_synthesis_report(s, 0, &report.p) == DOP_OK);
  CHECK(report.str().find("\"truncated\": true") != std::string::npos);

  // the structure document is a policy
  dop_policy* p = nullptr;
  REQUIRE(dop_policy_parse(m, doc.p, std::strlen(doc.p), &p) == DOP_OK);
  dop_verdict v{};
  CHECK(dop_verify_closed_loop(p, DOP_MODE_OBSERVATION, 0, &v) == DOP_OK);
  CHECK(v.opaque == 1);
  dop_verdict_clear(&v);
  Str sdot;
  CHECK(dop_policy_structure_dot(p, &sdot.p) == DOP_OK);
  dop_policy_free(p);
  dop_synthesis_free(s);
  dop_model_free(m);
}

TEST_CASE("C API: random models and hashing") {
  dop_model* a = nullptr;
  dop_model* b = nullptr;
  REQUIRE(dop_model_random(5, 4, 3, &a) == DOP_OK);
  REQUIRE(dop_model_random(5, 4, 3, &b) == DOP_OK);
  Str ta, tb;
  dop_model_serialize(a, &ta.p);
  dop_model_serialize(b, &tb.p);
  CHECK(ta.str() == tb.str());
  CHECK(dop_model_num_states(a) <= 4);
  dop_policy* p = nullptr;
  CHECK(dop_policy_random(a, 9, 2, &p) == DOP_OK);
  dop_policy_free(p);
  dop_model_free(a);
  dop_model_free(b);

  Str h;
  CHECK(dop_sha256_hex("abc", 3, &h.p) == DOP_OK);
  CHECK(h.str() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

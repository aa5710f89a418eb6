#include "desopacity.h"

#include <openssl/evp.h>

#include <cstring>
#include <memory>
#include <new>
#include <random>
#include <string>

#include "desopacity/io.hpp"
#include "desopacity/random.hpp"
#include "desopacity/synthesis.hpp"

using namespace desopacity;

struct dop_model {
  std::shared_ptr<const PlantModel> model;
};

struct dop_policy {
  std::shared_ptr<const PlantModel> model;
  std::unique_ptr<FiniteMemoryPolicy> policy;
};

struct dop_synthesis {
  std::shared_ptr<const PlantModel> model;
  SynthesisConfig cfg;
  SynthesisOutcome outcome;
};

namespace {

struct BadArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

thread_local std::string last_error;
thread_local std::size_t last_error_line = 0;

dop_status fail(dop_status status, std::string message, std::size_t line = 0) {
  last_error = std::move(message);
  last_error_line = line;
  return status;
}

// Runs `body`, mapping library exceptions onto status codes.
template <class F>
dop_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    last_error_line = 0;
    return DOP_OK;
  } catch (const ParseError& e) {
    return fail(DOP_ERR_PARSE, e.what(), e.line());
  } catch (const SemanticError& e) {
    return fail(DOP_ERR_SEMANTIC, e.what());
  } catch (const PreconditionError& e) {
    return fail(DOP_ERR_PRECONDITION, e.what());
  } catch (const ResourceError& e) {
    return fail(DOP_ERR_RESOURCE, std::string(e.what()) + " (explored " + std::to_string(e.decision_states()) +
                                      " decision states, " + std::to_string(e.observation_states()) +
                                      " observation states)");
  } catch (const BadArgument& e) {
    return fail(DOP_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DOP_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(DOP_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

IssuanceMode to_mode(dop_mode mode) {
  if (mode == DOP_MODE_OBSERVATION) return IssuanceMode::observation_triggered;
  if (mode == DOP_MODE_DECISION) return IssuanceMode::decision_triggered;
  throw BadArgument("invalid mode");
}

#define DOP_REQUIRE(cond) \
  if (!(cond)) return fail(DOP_ERR_ARGUMENT, "invalid argument: " #cond)

}  // namespace

extern "C" {

const char* dop_version(void) { return "0.1.0"; }
const char* dop_last_error(void) { return last_error.c_str(); }
size_t dop_last_error_line(void) { return last_error_line; }
void dop_string_free(char* s) { std::free(s); }

dop_status dop_model_parse(const char* text, size_t len, dop_model** out) {
  DOP_REQUIRE(text && out);
  return guarded([&] { *out = new dop_model{std::make_shared<const PlantModel>(parse_model({text, len}))}; });
}

dop_status dop_model_random(uint64_t seed, size_t max_states, size_t max_events, dop_model** out) {
  DOP_REQUIRE(out && max_states >= 1 && max_states <= kMaxIndex && max_events >= 1 && max_events <= kMaxIndex);
  return guarded([&] {
    std::mt19937_64 rng(seed);
    RandomModelParams params;
    params.min_states = std::min<std::size_t>(params.min_states, max_states);
    params.max_states = max_states;
    params.min_events = std::min<std::size_t>(params.min_events, max_events);
    params.max_events = max_events;
    *out = new dop_model{std::make_shared<const PlantModel>(random_model(rng, params))};
  });
}

void dop_model_free(dop_model* model) { delete model; }

dop_status dop_model_serialize(const dop_model* model, char** out) {
  DOP_REQUIRE(model && out);
  return guarded([&] { *out = dup(serialize_model(*model->model)); });
}

dop_status dop_model_dot(const dop_model* model, char** out) {
  DOP_REQUIRE(model && out);
  return guarded([&] { *out = dup(dot_model(*model->model)); });
}

size_t dop_model_num_states(const dop_model* model) { return model ? model->model->num_states() : 0; }
size_t dop_model_num_transitions(const dop_model* model) { return model ? model->model->num_transitions() : 0; }

dop_status dop_verify_open_loop(const dop_model* model, int* opaque, char** witness) {
  DOP_REQUIRE(model && opaque);
  return guarded([&] {
    const OpenLoopVerdict v = verify_open_loop_opacity(*model->model);
    *opaque = v.opaque ? 1 : 0;
    if (witness) *witness = v.witness ? dup(model->model->format_sequence(*v.witness)) : nullptr;
  });
}

dop_status dop_policy_parse(const dop_model* model, const char* text, size_t len, dop_policy** out) {
  DOP_REQUIRE(model && text && out);
  return guarded([&] { *out = new dop_policy{model->model, parse_policy(*model->model, {text, len})}; });
}

dop_status dop_policy_random(const dop_model* model, uint64_t seed, size_t depth, dop_policy** out) {
  DOP_REQUIRE(model && out);
  return guarded([&] {
    std::mt19937_64 rng(seed);
    *out = new dop_policy{model->model, std::make_unique<TablePolicy>(random_table_policy(*model->model, rng, depth))};
  });
}

void dop_policy_free(dop_policy* policy) { delete policy; }

dop_status dop_policy_serialize(const dop_policy* policy, char** out) {
  DOP_REQUIRE(policy && out);
  return guarded([&] {
    if (auto* t = dynamic_cast<const TablePolicy*>(policy->policy.get()))
      *out = dup(serialize_table_policy(*policy->model, *t));
    else
      *out = dup(serialize_structure(*policy->model,
                                     dynamic_cast<const DecodedSupervisor&>(*policy->policy).structure()));
  });
}

dop_status dop_policy_structure_dot(const dop_policy* policy, char** out) {
  DOP_REQUIRE(policy && out);
  return guarded([&] {
    auto* s = dynamic_cast<const DecodedSupervisor*>(policy->policy.get());
    if (!s) throw PreconditionError("a table policy has no control structure to draw");
    *out = dup(dot_structure(*policy->model, s->structure()));
  });
}

dop_status dop_policy_estimator_dot(const dop_policy* policy, dop_mode mode, char** out) {
  DOP_REQUIRE(policy && out);
  return guarded([&] { *out = dup(dot_estimator_slice(*policy->model, *policy->policy, to_mode(mode))); });
}

dop_status dop_verify_closed_loop(const dop_policy* policy, dop_mode mode, size_t depth_bound, dop_verdict* out) {
  DOP_REQUIRE(policy && out);
  *out = dop_verdict{};
  return guarded([&] {
    const auto& model = *policy->model;
    const ClosedLoopVerdict v = verify_closed_loop_opacity(
        model, *policy->policy, to_mode(mode), depth_bound ? std::optional<std::size_t>(depth_bound) : std::nullopt);
    out->opaque = v.opaque ? 1 : 0;
    out->exact = v.exact ? 1 : 0;
    out->bound = v.bound;
    out->explored_states = v.explored_states;
    if (v.counterexample) out->counterexample = dup(model.format_sequence(*v.counterexample));
    if (v.revealed_estimate) out->revealed_estimate = dup(model.format(*v.revealed_estimate));
  });
}

void dop_verdict_clear(dop_verdict* verdict) {
  if (!verdict) return;
  std::free(verdict->counterexample);
  std::free(verdict->revealed_estimate);
  *verdict = dop_verdict{};
}

dop_status dop_estimate_flow(const dop_model* model, const char* trace, size_t len, dop_mode mode, char** estimate) {
  DOP_REQUIRE(model && trace && estimate);
  return guarded([&] {
    const InformationFlow flow = parse_flow(*model->model, {trace, len});
    *estimate = dup(model->model->format(estimate_from_flow(*model->model, flow, to_mode(mode))));
  });
}

void dop_synthesis_config_init(dop_synthesis_config* cfg) {
  if (!cfg) return;
  const SynthesisConfig defaults;
  *cfg = dop_synthesis_config{DOP_MODE_OBSERVATION, DOP_EXTRACT_FIRST_FEASIBLE, defaults.size_guard,
                              defaults.enumerate_cap, 0};
}

dop_status dop_synthesize(const dop_model* model, const dop_synthesis_config* cfg, dop_synthesis** out) {
  DOP_REQUIRE(model && cfg && out);
  DOP_REQUIRE(cfg->extraction >= DOP_EXTRACT_FIRST_FEASIBLE && cfg->extraction <= DOP_EXTRACT_ENUMERATE_ALL);
  return guarded([&] {
    SynthesisConfig c;
    c.mode = to_mode(cfg->mode);
    c.extraction = static_cast<ExtractionPolicy>(cfg->extraction);
    if (cfg->size_guard) c.size_guard = cfg->size_guard;
    if (cfg->enumerate_cap) c.enumerate_cap = cfg->enumerate_cap;
    c.diagnostics = cfg->diagnostics != 0;
    auto result = std::make_unique<dop_synthesis>(dop_synthesis{model->model, c, synthesize(*model->model, c)});
    *out = result.release();
  });
}

void dop_synthesis_free(dop_synthesis* synthesis) { delete synthesis; }

int dop_synthesis_solved(const dop_synthesis* synthesis) { return synthesis && synthesis->outcome.solved ? 1 : 0; }

size_t dop_synthesis_structure_count(const dop_synthesis* synthesis) {
  return synthesis ? synthesis->outcome.structures.size() : 0;
}

dop_status dop_synthesis_structure(const dop_synthesis* synthesis, size_t index, char** out) {
  DOP_REQUIRE(synthesis && out && index < synthesis->outcome.structures.size());
  return guarded(
      [&] { *out = dup(serialize_structure(*synthesis->model, synthesis->outcome.structures[index].structure)); });
}

dop_status dop_synthesis_structure_dot(const dop_synthesis* synthesis, size_t index, char** out) {
  DOP_REQUIRE(synthesis && out && index < synthesis->outcome.structures.size());
  return guarded([&] { *out = dup(dot_structure(*synthesis->model, synthesis->outcome.structures[index].structure)); });
}

dop_status dop_synthesis_arena_dot(const dop_synthesis* synthesis, char** out) {
  DOP_REQUIRE(synthesis && out);
  return guarded([&] {
    if (!synthesis->outcome.raw_arena) throw PreconditionError("raw arena not kept; synthesize with diagnostics");
    *out = dup(dot_arena(*synthesis->model, *synthesis->outcome.raw_arena, &synthesis->outcome.prune_rounds));
  });
}

dop_status dop_synthesis_report(const dop_synthesis* synthesis, int timing, char** out) {
  DOP_REQUIRE(synthesis && out);
  return guarded([&] { *out = dup(synthesis_report(*synthesis->model, synthesis->cfg, synthesis->outcome, timing)); });
}

dop_status dop_sha256_hex(const void* data, size_t len, char** out) {
  DOP_REQUIRE((data || len == 0) && out);
  return guarded([&] {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    if (!EVP_Digest(data, len, digest, &n, EVP_sha256(), nullptr)) throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < n; ++i) {
      s += hex[digest[i] >> 4];
      s += hex[digest[i] & 0xf];
    }
    *out = dup(s);
  });
}

}  // extern "C"

#include <thread>

#include "doctest.h"
#include "support.hpp"

using namespace testing;

namespace {

ObservationPair ev(const PlantModel& m, const std::string& e) { return {*m.find_event(e), std::nullopt}; }
ObservationPair rel(const PlantModel& m, const std::string& g) { return {std::nullopt, dec(m, g)}; }
ObservationPair both(const PlantModel& m, const std::string& e, const std::string& g) {
  return {*m.find_event(e), dec(m, g)};
}

const char* kSigma = "a b u1 u2 u3";

}  // namespace

TEST_CASE("augment") {
  const PlantModel m = run_model();
  const TablePolicy s = srun(m);
  SUBCASE("running string") {
    const AugmentedString a = augment(m, seq(m, "a u1 u2 u2"), s);
    const AugmentedString expected{{std::nullopt, m.permissive()},
                                   {*m.find_event("a"), m.permissive()},
                                   {*m.find_event("u1"), dec(m, "a b u2")},
                                   {*m.find_event("u2"), dec(m, "a b u2")},
                                   {*m.find_event("u2"), m.permissive()}};
    CHECK(a == expected);
  }
  SUBCASE("empty string") { CHECK(augment(m, {}, s) == AugmentedString{{std::nullopt, m.permissive()}}); }
  SUBCASE("a u2 b") {
    const AugmentedString expected{{std::nullopt, m.permissive()},
                                   {*m.find_event("a"), m.permissive()},
                                   {*m.find_event("u2"), dec(m, "a b u1")},
                                   {*m.find_event("b"), dec(m, "a b u1")}};
    CHECK(augment(m, seq(m, "a u2 b"), s) == expected);
  }
  SUBCASE("disabled string reports the position") {
    try {
      augment(m, seq(m, "a u1 u3"), s);
      FAIL("expected rejection");
    } catch (const DisabledStringError& e) {
      CHECK(e.position() == 3);
      CHECK(std::string(e.what()).find("disabled by supervisor") != std::string::npos);
    }
    CHECK_THROWS_AS(augment(m, seq(m, "b"), s), DisabledStringError);
  }
}

TEST_CASE("information flow in both modes") {
  const PlantModel m = run_model();
  const TablePolicy s = srun(m);
  const auto str = seq(m, "a u1 u2 u2");
  const InformationFlow obs{rel(m, kSigma), ev(m, "a"), rel(m, "a b u2"), rel(m, "a b u2"), rel(m, kSigma)};
  CHECK(information_flow(m, str, s, IssuanceMode::observation_triggered) == obs);
  const InformationFlow dec_mode{rel(m, kSigma), ev(m, "a"), rel(m, "a b u2"), rel(m, kSigma)};
  CHECK(information_flow(m, str, s, IssuanceMode::decision_triggered) == dec_mode);
  for (auto mode : {IssuanceMode::observation_triggered, IssuanceMode::decision_triggered})
    CHECK(information_flow(m, {}, s, mode) == InformationFlow{rel(m, kSigma)});
}

TEST_CASE("the both-observable case releases event and decision together") {
  const PlantModel m = parse_model(R"({"states":["0","1"],"events":["o","c"],"initial":"0",
      "transitions":[["0","o","1"],["1","c","1"]],
      "observable_supervisor":["o"],"observable_intruder":["o"],"controllable":["c"]})");
  TablePolicy p(m.permissive());
  p.set(seq(m, "o"), dec(m, "o"));
  const InformationFlow f = information_flow(m, seq(m, "o"), p, IssuanceMode::observation_triggered);
  CHECK(f == InformationFlow{{std::nullopt, m.permissive()}, both(m, "o", "o")});
}

TEST_CASE("estimator step and the running-example chain") {
  const PlantModel m = run_model();
  const auto mode = IssuanceMode::observation_triggered;
  CHECK(estimator_step(m, est(m, "1", "1 2 3 4 5 6 7", kSigma), {*m.find_event("u1"), dec(m, "a b u2")}, mode) ==
        est(m, "2", "2 3 4 5 6 7", "a b u2"));
  CHECK(estimator_step(m, est(m, "5", "5 7", "a b u2"), {*m.find_event("u2"), m.permissive()}, mode) ==
        est(m, "7", "7", kSigma));

  const AugmentedString a = augment(m, seq(m, "a u1 u2 u2"), srun(m));
  std::vector<EstimatorState> chain;
  EstimatorState cur = EstimatorState::initial();
  for (const auto& e : a) chain.push_back(cur = estimator_step(m, cur, e, mode));
  const std::vector<EstimatorState> expected{est(m, "0", "0", kSigma), est(m, "1", "1 2 3 4 5 6 7", kSigma),
                                             est(m, "2", "2 3 4 5 6 7", "a b u2"), est(m, "5", "5 7", "a b u2"),
                                             est(m, "7", "7", kSigma)};
  CHECK(chain == expected);

  CHECK_THROWS_WITH_AS(estimator_step(m, EstimatorState::initial(), {*m.find_event("a"), m.permissive()}, mode),
                       doctest::Contains("event not enabled"), PreconditionError);
  CHECK_THROWS_WITH_AS(estimator_step(m, est(m, "0", "0", kSigma), {*m.find_event("b"), m.permissive()}, mode),
                       doctest::Contains("event not enabled"), PreconditionError);
  CHECK_THROWS_AS(estimator_step(m, est(m, "1", "1", "a b"), {*m.find_event("u1"), m.permissive()}, mode),
                  PreconditionError);
}

TEST_CASE("silent steps leave the estimate unchanged") {
  const PlantModel m = parse_model(R"({"states":["0","1","2"],"events":["h"],"initial":"0",
      "transitions":[["0","h","1"],["1","h","2"]],"controllable":["h"]})");
  const EstimatorState from{0, StateSet{0, 2}, m.permissive()};
  for (auto mode : {IssuanceMode::observation_triggered, IssuanceMode::decision_triggered}) {
    const EstimatorState to = estimator_step(m, from, {0, m.permissive()}, mode);
    CHECK(to.estimate == from.estimate);
    CHECK(to.plant == 1);
  }
}

TEST_CASE("run_estimator on the running example") {
  const PlantModel m = run_model();
  const auto str = seq(m, "a u1 u2 u2");
  CHECK(run_estimator(m, augment(m, str, srun(m)), IssuanceMode::observation_triggered) == est(m, "7", "7", kSigma));
  CHECK(run_estimator(m, augment(m, str, srun_prime(m)), IssuanceMode::observation_triggered) ==
        est(m, "7", "6 7", kSigma));
  CHECK(run_estimator(m, augment(m, str, srun(m)), IssuanceMode::decision_triggered) ==
        est(m, "7", "5 6 7", kSigma));
}

TEST_CASE("estimate_from_flow") {
  const PlantModel m = run_model();
  const InformationFlow ex2{rel(m, kSigma), ev(m, "a"), rel(m, "a b u2"), rel(m, "a b u2"), rel(m, kSigma)};
  CHECK(estimate_from_flow(m, ex2, IssuanceMode::observation_triggered) == states(m, "7"));
  CHECK(estimate_from_flow(m, InformationFlow{rel(m, kSigma)}, IssuanceMode::observation_triggered) == states(m, "0"));
  const InformationFlow ex9{rel(m, kSigma), ev(m, "a"), rel(m, "a b u2"), rel(m, kSigma)};
  CHECK(estimate_from_flow(m, ex9, IssuanceMode::decision_triggered) == states(m, "5 6 7"));

  CHECK_THROWS_WITH_AS(estimate_from_flow(m, InformationFlow{}, IssuanceMode::observation_triggered),
                       doctest::Contains("missing initial decision"), PreconditionError);
  CHECK_THROWS_AS(estimate_from_flow(m, InformationFlow{ev(m, "a")}, IssuanceMode::observation_triggered),
                  PreconditionError);
  CHECK_THROWS_AS(estimate_from_flow(m, InformationFlow{rel(m, kSigma), {}}, IssuanceMode::observation_triggered),
                  PreconditionError);
  // a repeated decision is never released under decision-triggered issuance
  const InformationFlow repeat{rel(m, kSigma), ev(m, "a"), rel(m, kSigma)};
  CHECK(estimate_from_flow(m, repeat, IssuanceMode::decision_triggered).empty());
}

TEST_CASE("oracle examples") {
  const PlantModel m = run_model();
  const InformationFlow ex2{rel(m, kSigma), ev(m, "a"), rel(m, "a b u2"), rel(m, "a b u2"), rel(m, kSigma)};
  CHECK(oracle_controlled_estimate(m, ex2, IssuanceMode::observation_triggered, 6) == states(m, "7"));
  CHECK(oracle_controlled_estimate(m, InformationFlow{rel(m, kSigma)}, IssuanceMode::observation_triggered, 3) ==
        states(m, "0"));
  const InformationFlow ex3{rel(m, kSigma), ev(m, "a"), rel(m, "a b u2"), rel(m, kSigma), rel(m, kSigma)};
  CHECK(oracle_controlled_estimate(m, ex3, IssuanceMode::observation_triggered, 6) == states(m, "6 7"));
  CHECK(oracle_controlled_estimate_raw(m, ex3, IssuanceMode::observation_triggered, 6) == states(m, "6 7"));
  CHECK_THROWS_AS(oracle_controlled_estimate(m, ex2, IssuanceMode::observation_triggered, 2), PreconditionError);
}

TEST_CASE("estimator equals (state, flow estimate, decision); membership; flow projection") {
  std::mt19937_64 rng(2024);
  std::size_t strings = 0;
  for (int round = 0; round < 200; ++round) {
    const PlantModel m = random_model(rng);
    const TablePolicy p = random_table_policy(m, rng);
    for (auto mode : {IssuanceMode::observation_triggered, IssuanceMode::decision_triggered}) {
      for_each_controlled_string(m, p, 5, [&](const EventSequence& s) {
        const AugmentedString a = augment(m, s, p);
        const EstimatorState r = run_estimator(m, a, mode);
        const InformationFlow f = information_flow(m, s, p, mode);
        StateId x = m.initial();
        for (auto e : s) x = m.successor(x, e);
        CHECK(r.plant == x);
        CHECK(r.estimate == estimate_from_flow(m, f, mode));
        CHECK(r.decision == p.decide(project(s, m.supervisor_observable())));
        CHECK(r.estimate.contains(x));
        EventSequence shown;
        for (const auto& pair : f)
          if (pair.event) shown.push_back(*pair.event);
        CHECK(shown == project(s, m.intruder_observable()));
        CHECK(run_estimator(m, a, mode) == r);
        ++strings;
      });
    }
  }
  CHECK(strings > 2000);
}

TEST_CASE("memoized oracle agrees with the unmemoized enumeration") {
  std::mt19937_64 rng(77);
  std::size_t flows = 0;
  // Tiny models: the raw search is exponential in its bound. A shortest
  // matching decoration repeats no plant state between two flow elements, so
  // |X|·|f| steps suffice for equality.
  const RandomModelParams tiny{2, 3, 2, 3};
  for (int round = 0; round < 120; ++round) {
    const PlantModel m = random_model(rng, tiny);
    const TablePolicy p = random_table_policy(m, rng);
    for (auto mode : {IssuanceMode::observation_triggered, IssuanceMode::decision_triggered}) {
      for_each_controlled_string(m, p, 4, [&](const EventSequence& s) {
        const InformationFlow f = information_flow(m, s, p, mode);
        const StateSet memo = oracle_controlled_estimate(m, f, mode, f.size());
        // Bounded raw search is a subset; with enough length it is equal.
        CHECK(oracle_controlled_estimate_raw(m, f, mode, 4).subset_of(memo));
        CHECK(oracle_controlled_estimate_raw(m, f, mode, m.num_states() * f.size()) == memo);
        ++flows;
      });
    }
  }
  CHECK(flows > 500);
}

TEST_CASE("Estimator cache is transparent and thread-safe") {
  std::mt19937_64 rng(3);
  const PlantModel m = random_model(rng, RandomModelParams{4, 5, 3, 4});
  const Estimator cache(m, IssuanceMode::decision_triggered);
  const auto gammas = m.decisions();
  auto work = [&](unsigned seed, std::vector<EstimatorState>& out) {
    std::mt19937_64 r(seed);
    EstimatorState cur = cache.step(EstimatorState::initial(), {std::nullopt, gammas[r() % gammas.size()]});
    for (int i = 0; i < 2000; ++i) {
      const EventSet enabled = m.active_events(cur.plant) & cur.decision.enabled();
      if (enabled.empty()) {
        cur = cache.step(EstimatorState::initial(), {std::nullopt, gammas[r() % gammas.size()]});
        continue;
      }
      std::vector<EventId> evs(enabled.begin(), enabled.end());
      const AugmentedEvent e{evs[r() % evs.size()], gammas[r() % gammas.size()]};
      const EstimatorState next = cache.step(cur, e);
      out.push_back(next);
      CHECK(next == estimator_step(m, cur, e, IssuanceMode::decision_triggered));
      cur = next;
    }
  };
  std::vector<std::vector<EstimatorState>> concurrent(4), serial(4);
  {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < 4; ++t) threads.emplace_back(work, t, std::ref(concurrent[t]));
    for (auto& t : threads) t.join();
  }
  for (unsigned t = 0; t < 4; ++t) work(t, serial[t]);
  CHECK(concurrent == serial);
  CHECK(cache.cached_transitions() > 0);
}

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "secaudit/agent.hpp"
#include "secaudit/compliance.hpp"
#include "secaudit/scenario.hpp"
#include "secaudit/windows_parsers.hpp"

namespace {

using namespace secaudit;

const std::filesystem::path kData = SECAUDIT_DATA_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void BM_ParseNetUser(benchmark::State& state) {
  const std::string text = slurp(kData / "fixtures" / "net_user_Patrick.txt");
  for (auto _ : state) benchmark::DoNotOptimize(parse_net_user(text));
}
BENCHMARK(BM_ParseNetUser);

void BM_ParseNetAccounts(benchmark::State& state) {
  const std::string text = slurp(kData / "fixtures" / "net_accounts_before.txt");
  for (auto _ : state) benchmark::DoNotOptimize(parse_net_accounts(text));
}
BENCHMARK(BM_ParseNetAccounts);

void BM_ParsePolicyText(benchmark::State& state) {
  const std::string text = slurp(kData / "fixtures" / "cis_password_policy.txt");
  for (auto _ : state) benchmark::DoNotOptimize(parse_policy_text(text, "cis"));
}
BENCHMARK(BM_ParsePolicyText);

void BM_EvaluateMachine(benchmark::State& state) {
  const auto settings = parse_net_accounts(slurp(kData / "fixtures" / "net_accounts_before.txt"));
  const auto policy = parse_policy_text(slurp(kData / "fixtures" / "cis_password_policy.txt"), "cis");
  const Date audit = make_date(2024, 12, 1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_machine(settings, policy, audit));
}
BENCHMARK(BM_EvaluateMachine);

void BM_ScriptedScenario(benchmark::State& state) {
  const auto specs = load_scenarios(kData / "scenarios");
  HarnessContext ctx;
  ctx.fixtures_dir = kData / "fixtures";
  const auto& spec = specs.at(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(spec, RunMode::Scripted, ctx));
  state.SetLabel(spec.id);
}
BENCHMARK(BM_ScriptedScenario)->DenseRange(0, 5);

}  // namespace

BENCHMARK_MAIN();

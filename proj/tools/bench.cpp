// Serial reference vs parallel kernels: wall time and bitwise agreement.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "lidfl/aggregators.hpp"
#include "lidfl/analysis.hpp"
#include "lidfl/config.hpp"
#include "lidfl/engine.hpp"
#include "lidfl/experiment.hpp"

#include <sstream>

using namespace lidfl;

namespace {

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool report(const char* name, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-22s serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, same ? "identical" : "MISMATCH");
  return same;
}

std::vector<ParamVector> random_updates(std::size_t n, std::size_t d, std::uint64_t seed) {
  RngStream rng(seed, "bench-updates");
  std::vector<ParamVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    ParamVector u(d);
    for (double& v : u) v = rng.normal();
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

int main() {
  std::printf("hardware threads: %d\n", hardware_threads());
  bool ok = true;

  {
    const auto ups = random_updates(35, 20000, 1);
    ParamVector a, b;
    const double ts = time_ms([&] { a = agg_cwm(ups, ExecPolicy::serial); });
    const double tp = time_ms([&] { b = agg_cwm(ups, ExecPolicy::parallel); });
    ok &= report("cwm 35x20000", ts, tp, a == b);
  }
  {
    const auto ups = random_updates(35, 2000, 2);
    GroupedAggregate a, b;
    const double ts = time_ms([&] { a = meb_groups(ups, 14, true, ExecPolicy::serial); });
    const double tp = time_ms([&] { b = meb_groups(ups, 14, true, ExecPolicy::parallel); });
    ok &= report("meb 35x2000 k=14", ts, tp, a.groups == b.groups && a.candidates == b.candidates);
  }
  {
    FailureTrialConfig cfg;
    cfg.m = 35;
    cfg.k = 21;
    cfg.q = 2;
    cfg.p = 0.95;
    cfg.trials = 200000;
    FailureEstimate a, b;
    const RngStream rng(7, "bench-mc");
    const double ts = time_ms([&] { a = simulate_failure_rate(cfg, rng, ExecPolicy::serial); });
    const double tp = time_ms([&] { b = simulate_failure_rate(cfg, rng, ExecPolicy::parallel); });
    ok &= report("vote failure 200k", ts, tp, a.failures == b.failures);
  }
  {
    RunConfig cfg;
    cfg.method = Method::lidfl_agg;
    cfg.agg.kind = AggregatorKind::meb;
    cfg.attack.kind = AttackKind::sf;
    cfg.rounds = 40;
    std::string a, b;
    const double ts = time_ms([&] {
      cfg.policy = ExecPolicy::serial;
      std::ostringstream s;
      write_rounds_csv(s, run(cfg));
      a = s.str();
    });
    const double tp = time_ms([&] {
      cfg.policy = ExecPolicy::parallel;
      std::ostringstream s;
      write_rounds_csv(s, run(cfg));
      b = s.str();
    });
    ok &= report("lidfl+meb 40 rounds", ts, tp, a == b);
  }
  return ok ? 0 : 1;
}

#include <benchmark/benchmark.h>

#include <cmath>

#include "morphflow/editor.hpp"
#include "morphflow/engine.hpp"
#include "morphflow/kernels.hpp"
#include "morphflow/layout.hpp"
#include "morphflow/program.hpp"

namespace {

using namespace morphflow;

ImageFrame gradient(int w, int h) {
  ImageFrame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f.at(x, y) = std::sin(0.1 * x) * std::cos(0.07 * y);
  }
  return f;
}

void BM_ConvexCombine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ImageFrame a = gradient(n, n);
  const ImageFrame b = negate(a);
  ImageFrame out(n, n);
  for (auto _ : state) {
    convex_combine_into(a, b, 0.3, out);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ConvexCombine)->Arg(64)->Arg(128)->Arg(256);

void BM_WaveWarp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ImageFrame a = gradient(n, n);
  ImageFrame out(n, n);
  double t = 0.0;
  for (auto _ : state) {
    wave_warp_into(a, {n / 2.0, n / 2.0}, t, Wave{3.0, 16.0, 1.0}, out);
    t += 1.0;
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_WaveWarp)->Arg(64)->Arg(128)->Arg(256);

// Constant -> (wave -> negation) x length, all outputs registered.
EngineState chain(int length, int n) {
  DataflowProgram p(1);
  const GraphId g = p.add_top_level_graph(true);
  VertexId prev = p.add_vertex(g, ConstantImage{gradient(n, n)});
  std::vector<VertexId> outs;
  for (int k = 0; k < length; ++k) {
    prev = p.add_vertex(g, make_dynamic(Wave{2.0, 12.0, 1.0}, n, n), {prev});
    prev = p.add_vertex(g, make_dynamic(Negation{}, n, n), {prev});
    outs.push_back(prev);
  }
  EngineState s(std::move(p));
  for (VertexId v : outs) register_output(s, v);
  return s;
}

void BM_TickChain(benchmark::State& state) {
  EngineState s = chain(static_cast<int>(state.range(0)), 128);
  for (auto _ : state) benchmark::DoNotOptimize(tick(s).tick);
}
BENCHMARK(BM_TickChain)->Arg(1)->Arg(8)->Arg(32);

void BM_LimitedDeepCopy(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  DataflowProgram base(1);
  const GraphId main = base.add_top_level_graph(true);
  const VertexId outside = base.add_vertex(main, ConstantImage{ImageFrame(16, 16, 0.2)});
  const GraphId tmpl = base.add_top_level_graph(false);
  GraphId sub = tmpl;
  VertexId prev = outside;
  for (int k = 0; k < width; ++k) {
    if (k % 8 == 7) sub = base.add_subgraph(sub);
    prev = base.add_vertex(sub, make_dynamic(Negation{}, 16, 16), {prev});
  }
  for (auto _ : state) {
    state.PauseTiming();
    DataflowProgram p = base;
    state.ResumeTiming();
    benchmark::DoNotOptimize(limited_deep_copy(p, tmpl, main));
  }
  state.SetItemsProcessed(state.iterations() * width);
}
BENCHMARK(BM_LimitedDeepCopy)->Arg(16)->Arg(128)->Arg(1024);

void BM_LayoutStep(benchmark::State& state) {
  EngineState s = chain(static_cast<int>(state.range(0)), 8);
  const GraphId g = *s.program.main_graph();
  LayoutState layout = layout_incremental(s.program, g, LayoutState{});
  for (auto _ : state) {
    layout = layout_incremental(s.program, g, layout);
    benchmark::DoNotOptimize(layout.positions.size());
  }
}
BENCHMARK(BM_LayoutStep)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();

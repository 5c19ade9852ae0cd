// Acceptance checks. Each check prints one line:
//   PASS <name>: <detail>   or   FAIL <name>: <detail>
// Run all of them, or one with --only <name>.

#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "morphflow/editor.hpp"
#include "morphflow/engine.hpp"
#include "morphflow/error.hpp"
#include "morphflow/isomorphism.hpp"
#include "morphflow/kernels.hpp"
#include "morphflow/live.hpp"
#include "morphflow/program.hpp"
#include "morphflow/sampler.hpp"
#include "morphflow/scenario.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace morphflow;
using namespace morphflow::testing;
using nlohmann::json;

namespace {

// Tolerances and sizes.
constexpr double kKernelTolerance = 1e-6;
constexpr double kMixtureLow = 0.285;
constexpr double kMixtureHigh = 0.315;
constexpr double kSignedHalfWidth = 0.015;
constexpr std::size_t kRandomCases = 200;
constexpr std::size_t kPostEditTicks = 100;
constexpr Tick kEditTick = 40;
constexpr int kW = 32;
constexpr int kH = 24;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && first_failure_.empty()) first_failure_ = what;
    failures_ += ok ? 0 : 1;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed; first: " + first_failure_};
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string first_failure_;
};

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("morphflow-acceptance-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DynamicImage wave_with_click(double amplitude, double wavelength, double speed, PixelCoord center) {
  DynamicImage d = make_dynamic(Wave{amplitude, wavelength, speed}, kW, kH);
  d.click = ClickControl{center, 0};
  return d;
}

// ---------------------------------------------------------------------------
// Benignity and s-insert delay.
//
// Main: C -> W (wave) -> I (identity) -> N (negation); S = SumOf2(N, C, 0.25).
// D is an unconsumed side constant; T is an unconsumed template graph.
// Outputs in order: W, I, N, S.

struct Bench {
  EngineState state;
  VertexId c, w, i, n, s, d;
  GraphId main, tmpl;
};

Bench make_bench() {
  DataflowProgram p(11);
  const GraphId main = p.add_top_level_graph(true);
  const VertexId c = p.add_vertex(main, ConstantImage{pattern_frame(kW, kH)});
  const VertexId d = p.add_vertex(main, ConstantImage{pattern_frame(kW, kH, 0.7)});
  const VertexId w = p.add_vertex(main, wave_with_click(2.0, 7.0, 0.75, {kW / 3.0, kH / 2.0}), {c});
  const VertexId i = p.add_vertex(main, make_dynamic(Identity{}, kW, kH), {w});
  const VertexId n = p.add_vertex(main, make_dynamic(Negation{}, kW, kH), {i});
  const VertexId s = p.add_vertex(main, make_dynamic(SumOf2{0.25}, kW, kH), {n, c});

  const GraphId tmpl = p.add_top_level_graph(false);
  const VertexId tc = p.add_vertex(tmpl, ConstantImage{pattern_frame(kW, kH, 0.3)});
  const VertexId tw = p.add_vertex(tmpl, wave_with_click(3.0, 5.0, 1.0, {4.0, 4.0}), {tc});
  p.add_vertex(tmpl, make_dynamic(Negation{}, kW, kH), {tw});

  Bench b{EngineState(std::move(p)), c, w, i, n, s, d, main, tmpl};
  for (VertexId v : {w, i, n, s}) register_output(b.state, v);
  return b;
}

using FrameTable = std::vector<std::vector<ImageFrame>>;

// frames[t][k]: the k-th registered output emitted at tick t.
FrameTable run_frames(EngineState& state, std::size_t ticks, std::string* error = nullptr) {
  FrameTable out;
  for (std::size_t t = 0; t < ticks; ++t) {
    TickResult r = tick(state);
    if (!r.failed.empty() && error) *error = r.failed.front().message;
    std::vector<ImageFrame> row;
    for (auto& e : r.emissions) row.push_back(std::move(e.frame));
    out.push_back(std::move(row));
  }
  return out;
}

Outcome check_benignity() {
  Bench ref_bench = make_bench();
  // A shifted stream switches over once the edit has propagated along its
  // path; the deepest output here sits four stages below the edit.
  constexpr std::size_t kSettle = 5;
  const std::size_t total = kEditTick + kPostEditTicks + kSettle;
  const FrameTable ref = run_frames(ref_bench.state, total);

  struct Case {
    std::string name;
    std::function<EditCommand(const Bench&)> edit;
    std::vector<int> shift;  // per output W, I, N, S
  };
  const std::vector<Case> cases{
      {"node_split", [](const Bench& b) { return EditCommand{edit::NodeSplit{b.w, std::nullopt}}; }, {1, 1, 1, 1}},
      {"add_zero_weight_source",
       [](const Bench& b) { return EditCommand{edit::AddZeroWeightSource{b.i, b.d}}; }, {0, 0, 0, 0}},
      {"s_insert", [](const Bench& b) { return EditCommand{edit::SInsert{b.n, b.d, std::nullopt}}; }, {0, 0, 1, 1}},
      {"limited_deep_copy",
       [](const Bench& b) {
         return EditCommand{edit::LimitedDeepCopy{b.tmpl, GraphSelector(b.main), std::nullopt}};
       },
       {0, 0, 0, 0}},
  };

  Tally tally;
  std::string summary;
  for (const auto& c : cases) {
    Bench b = make_bench();
    b.state.schedule(kEditTick, c.edit(b));
    std::string error;
    const FrameTable got = run_frames(b.state, total, &error);
    tally.expect(error.empty(), c.name + " failed to apply: " + error);
    if (!error.empty()) continue;
    const std::size_t from = kEditTick + kSettle;
    std::size_t compared = 0;
    for (std::size_t k = 0; k < c.shift.size(); ++k) {
      for (std::size_t t = from; t < from + kPostEditTicks; ++t) {
        const bool ok = got[t].size() == 4 && got[t][k] == ref[t - static_cast<std::size_t>(c.shift[k])][k];
        tally.expect(ok, c.name + " output " + std::to_string(k) + " tick " + std::to_string(t));
        ++compared;
      }
      // Up to the edit boundary every stream is untouched; exact edits stay so.
      const std::size_t exact_until = c.shift[k] == 0 ? from : kEditTick + 1;
      {
        for (std::size_t t = 0; t < exact_until; ++t) {
          tally.expect(got[t][k] == ref[t][k], c.name + " output " + std::to_string(k) + " pre tick " + std::to_string(t));
        }
      }
    }
    summary += c.name + " " + std::to_string(compared) + " frames; ";
  }
  return tally.outcome(summary + "bitwise equal to the reference");
}

Outcome check_s_insert_delay() {
  constexpr std::size_t kHeld = 200;
  Bench ref_bench = make_bench();
  const FrameTable ref = run_frames(ref_bench.state, kEditTick + kHeld + 1);

  Tally tally;
  // Inserted on the wave itself (index 0) and on the negation (index 2).
  for (const auto& [label, k] : std::vector<std::pair<std::string, std::size_t>>{{"wave", 0}, {"negation", 2}}) {
    Bench b = make_bench();
    const VertexId target = k == 0 ? b.w : b.n;
    b.state.schedule(kEditTick, edit::SInsert{target, b.d, std::nullopt});
    std::string error;
    const FrameTable got = run_frames(b.state, kEditTick + kHeld + 1, &error);
    tally.expect(error.empty(), label + ": " + error);
    if (!error.empty()) continue;
    tally.expect(effective_alpha(b.state.program, target) == 0.0, label + ": alpha moved");
    for (std::size_t t = kEditTick + 1; t <= kEditTick + kHeld; ++t) {
      tally.expect(quantized_equal(got[t][k], ref[t - 1][k]), label + " quantized tick " + std::to_string(t));
      tally.expect(got[t][k] == ref[t - 1][k], label + " exact tick " + std::to_string(t));
    }
    // The stream is not constant, so the delay is observable.
    std::size_t distinct = 0;
    for (std::size_t t = kEditTick + 1; t <= kEditTick + kHeld; ++t) distinct += ref[t][k] != ref[t - 1][k] ? 1 : 0;
    tally.expect(distinct > kHeld / 2, label + ": reference stream barely changes");
  }
  return tally.outcome("wave and negation targets equal the reference delayed one tick for 200 ticks");
}

// ---------------------------------------------------------------------------
// Limited deep copy structure.

bool same_data(const VertexData& a, const VertexData& b, const std::map<GraphId, GraphId>& graph_map) {
  if (a.index() != b.index()) return false;
  if (const auto* da = std::get_if<DynamicImage>(&a)) {
    const auto& db = std::get<DynamicImage>(b);
    return da->transform == db.transform && da->click == db.click;
  }
  if (const auto* ga = std::get_if<GraphRef>(&a)) {
    const auto it = graph_map.find(ga->graph);
    return std::get<GraphRef>(b).graph == (it == graph_map.end() ? ga->graph : it->second);
  }
  if (const auto* ca = std::get_if<ConstantImage>(&a)) return ca->frame == std::get<ConstantImage>(b).frame;
  if (const auto* na = std::get_if<NumericControl>(&a)) return na->value == std::get<NumericControl>(b).value;
  if (const auto* ka = std::get_if<ClickControl>(&a)) return *ka == std::get<ClickControl>(b);
  if (const auto* sa = std::get_if<Sampler>(&a)) return *sa == std::get<Sampler>(b);
  if (const auto* sa = std::get_if<SignedSampler>(&a)) return *sa == std::get<SignedSampler>(b);
  return true;
}

Outcome check_ldc_structure() {
  Tally tally;
  std::size_t vertices = 0;
  std::size_t externals = 0;
  std::size_t deepest = 0;
  for (std::size_t seed = 0; seed < kRandomCases; ++seed) {
    GeneratedProgram gen = generate_program(5000 + seed);
    DataflowProgram& p = gen.program;
    const std::string tag = "seed " + std::to_string(5000 + seed) + ": ";

    const std::vector<GraphId> orig_graphs = graph_subtree(p, gen.subject);
    const std::vector<VertexId> orig_vertices = flatten(p, gen.subject);
    const std::set<VertexId> orig_set(orig_vertices.begin(), orig_vertices.end());
    std::map<VertexId, std::vector<VertexId>> orig_sources;
    for (const auto& [id, v] : p.vertices()) orig_sources[id] = v.sources;
    const std::set<VertexId> before_ids = [&] {
      std::set<VertexId> s;
      for (const auto& [id, v] : p.vertices()) s.insert(id);
      return s;
    }();
    tally.expect(orig_vertices.size() <= 20, tag + "generator exceeded 20 vertices");
    std::size_t depth = 0;
    for (GraphId g : orig_graphs) {
      std::size_t d = 1;
      for (auto parent = p.graph(g).parent; parent; parent = p.graph(*parent).parent) ++d;
      depth = std::max(depth, d);
    }
    tally.expect(depth <= 3, tag + "generator exceeded 3 levels");
    deepest = std::max(deepest, depth);

    const CopyDestination dest = seed % 2 == 0 ? CopyDestination{} : CopyDestination{gen.main};
    GraphId copy;
    try {
      copy = limited_deep_copy(p, gen.subject, dest);
    } catch (const std::exception& e) {
      tally.expect(false, tag + "copy threw " + e.what());
      continue;
    }

    // Graph bijection in preorder, with hierarchy carried across.
    const std::vector<GraphId> copy_graphs = graph_subtree(p, copy);
    tally.expect(copy_graphs.size() == orig_graphs.size(), tag + "graph count differs");
    if (copy_graphs.size() != orig_graphs.size()) continue;
    std::map<GraphId, GraphId> gmap;
    for (std::size_t k = 0; k < orig_graphs.size(); ++k) gmap[orig_graphs[k]] = copy_graphs[k];
    tally.expect(p.graph(copy).parent == dest, tag + "copy attached to the wrong parent");
    if (!dest) {
      const auto& top = p.top_level_graphs();
      tally.expect(std::find(top.begin(), top.end(), copy) != top.end(), tag + "top-level copy not listed");
    }

    // Vertex bijection built graph by graph from the target lists.
    std::map<VertexId, VertexId> vmap;
    bool shapes_ok = true;
    for (std::size_t k = 0; k < orig_graphs.size(); ++k) {
      const auto& og = p.graph(orig_graphs[k]);
      const auto& cg = p.graph(copy_graphs[k]);
      if (k > 0) tally.expect(cg.parent && *cg.parent == gmap.at(*og.parent), tag + "subgraph parent not remapped");
      if (og.immediate_targets.size() != cg.immediate_targets.size()) {
        shapes_ok = false;
        break;
      }
      for (std::size_t j = 0; j < og.immediate_targets.size(); ++j) {
        vmap[og.immediate_targets[j]] = cg.immediate_targets[j];
      }
    }
    tally.expect(shapes_ok, tag + "target lists differ in length");
    if (!shapes_ok) continue;
    std::set<VertexId> image;
    for (const auto& [o, c] : vmap) {
      image.insert(c);
      tally.expect(!before_ids.contains(c), tag + "copy reuses an existing vertex id");
      tally.expect(p.vertex(c).parent == gmap.at(p.vertex(o).parent), tag + "vertex parent not remapped");
      tally.expect(same_data(p.vertex(o).data, p.vertex(c).data, gmap), tag + "vertex data differs");
    }
    tally.expect(vmap.size() == orig_set.size() && image.size() == vmap.size(), tag + "not a bijection");
    const std::vector<VertexId> copy_vertices = flatten(p, copy);
    tally.expect(std::set<VertexId>(copy_vertices.begin(), copy_vertices.end()) == image,
                 tag + "F(copy) differs from the mapped vertices");
    vertices += vmap.size();

    // Edges: internal remapped, external identical.
    for (const auto& [o, c] : vmap) {
      const auto& os = orig_sources.at(o);
      const auto& cs = p.vertex(c).sources;
      tally.expect(os.size() == cs.size(), tag + "source count differs");
      if (os.size() != cs.size()) continue;
      for (std::size_t j = 0; j < os.size(); ++j) {
        if (orig_set.contains(os[j])) {
          tally.expect(cs[j] == vmap.at(os[j]), tag + "internal edge not remapped");
        } else {
          tally.expect(cs[j] == os[j], tag + "external source changed");
          ++externals;
        }
      }
    }

    // Nothing outside the copy reads into it; the original is untouched.
    for (const auto& [id, v] : p.vertices()) {
      tally.expect(!v.forward_ref.has_value(), tag + "forward_ref left set");
      if (image.contains(id)) continue;
      for (VertexId s : v.sources) tally.expect(!image.contains(s), tag + "inbound reference into the copy");
      if (const auto* ref = std::get_if<GraphRef>(&v.data)) {
        tally.expect(!std::count(copy_graphs.begin(), copy_graphs.end(), ref->graph), tag + "view into the copy");
      }
      tally.expect(v.sources == orig_sources.at(id), tag + "original vertex sources changed");
    }
    tally.expect(validate(p).empty(), tag + "program invalid after copy");
  }
  return tally.outcome(std::to_string(kRandomCases) + " graphs, " + std::to_string(vertices) + " vertices, " +
                       std::to_string(externals) + " external references, depth <= " + std::to_string(deepest));
}

// ---------------------------------------------------------------------------
// Reversibility and guards.

std::vector<VertexId> image_vertices(const DataflowProgram& p) {
  std::vector<VertexId> out;
  for (const auto& [id, v] : p.vertices()) {
    if (is_image_stream(v.data)) out.push_back(id);
  }
  return out;
}

std::size_t readers_of(const DataflowProgram& p, VertexId x) {
  std::size_t n = 0;
  for (const auto& [id, v] : p.vertices()) n += std::count(v.sources.begin(), v.sources.end(), x) > 0 ? 1 : 0;
  return n;
}

bool reads(const DataflowProgram& p, VertexId reader, VertexId x) {
  const auto& s = p.vertex(reader).sources;
  return std::find(s.begin(), s.end(), x) != s.end();
}

// Merge is benign when c passes b through unchanged and nobody else sees b.
bool merge_is_benign(const DataflowProgram& p, VertexId c) {
  const auto* d = std::get_if<DynamicImage>(&p.vertex(c).data);
  if (!d || !std::holds_alternative<Identity>(d->transform)) return false;
  const auto& src = p.vertex(c).sources;
  if (src.size() != 1 || src[0] == c) return false;
  if (!is_image_stream(p.vertex(src[0]).data)) return false;
  return readers_of(p, src[0]) == 1 && reads(p, c, src[0]);
}

// S-remove is benign when the side input has weight exactly 0, the weight is
// not under outside control, and the upstream vertex feeds only the sum.
bool s_remove_is_benign(const DataflowProgram& p, VertexId t) {
  const auto* d = std::get_if<DynamicImage>(&p.vertex(t).data);
  if (!d) return false;
  const auto* sum = std::get_if<SumOf2>(&d->transform);
  if (!sum || sum->alpha != 0.0) return false;
  const auto& src = p.vertex(t).sources;
  if (src.size() != 2 || src[0] == t) return false;
  if (!is_image_stream(p.vertex(src[0]).data) || !is_image_stream(p.vertex(src[1]).data)) return false;
  return readers_of(p, src[0]) == 1;
}

Outcome check_reversibility() {
  Tally tally;
  std::map<std::string, std::size_t> per_op;
  for (std::size_t k = 0; k < kRandomCases; ++k) {
    const std::uint64_t seed = 9000 + k;
    GeneratedProgram gen = generate_program(seed);
    EngineState st(std::move(gen.program));
    Rng rng(seed);
    auto pick = [&](const std::vector<VertexId>& from) {
      return from[static_cast<std::size_t>(rng.uniform() * static_cast<double>(from.size()))];
    };
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    try {
      EditCommand cmd;
      switch (k % 4) {
        case 0:
          cmd = edit::NodeSplit{pick(image_vertices(st.program)), std::nullopt};
          break;
        case 1: {
          // Needs an identity vertex; split one into existence first.
          std::vector<VertexId> ids;
          for (const auto& [id, v] : st.program.vertices()) {
            const auto* d = std::get_if<DynamicImage>(&v.data);
            if (d && std::holds_alternative<Identity>(d->transform) && v.sources.size() == 1) ids.push_back(id);
          }
          if (ids.empty()) {
            apply_edit(st, edit::NodeSplit{pick(image_vertices(st.program)), std::nullopt});
            for (const auto& [id, v] : st.program.vertices()) {
              const auto* d = std::get_if<DynamicImage>(&v.data);
              if (d && std::holds_alternative<Identity>(d->transform)) ids.push_back(id);
            }
          }
          cmd = edit::AddZeroWeightSource{pick(ids), pick(image_vertices(st.program))};
          break;
        }
        case 2: {
          const auto images = image_vertices(st.program);
          const VertexId target = pick(images);
          VertexId side = pick(images);
          while (side == target) side = pick(images);
          cmd = edit::SInsert{target, side, std::nullopt};
          break;
        }
        default:
          cmd = edit::LimitedDeepCopy{gen.subject, k % 8 == 3 ? std::nullopt : std::optional<GraphSelector>(gen.main),
                                      std::nullopt};
          break;
      }
      const DataflowProgram before = st.program;
      const UndoRecord undo = apply_edit(st, cmd);
      tally.expect(validate(st.program).empty(), tag + "invalid after " + std::string(op_name(cmd)));
      tally.expect(undo.inverse.has_value(), tag + "no inverse");
      if (!undo.inverse) continue;
      apply_edit(st, *undo.inverse);
      const IsomorphismResult iso = structurally_isomorphic(before, st.program);
      tally.expect(iso.isomorphic, tag + std::string(op_name(cmd)) + " round trip: " + iso.mismatch);
      ++per_op[std::string(op_name(cmd))];
    } catch (const std::exception& e) {
      tally.expect(false, tag + "threw " + e.what());
    }
  }

  // Guards: random programs pushed through benign edits and perturbations,
  // then every vertex tried against an independent benign-state predicate.
  std::size_t merge_accept = 0, merge_reject = 0, remove_accept = 0, remove_reject = 0;
  for (std::size_t k = 0; k < kRandomCases; ++k) {
    const std::uint64_t seed = 12000 + k;
    GeneratedProgram gen = generate_program(seed);
    EngineState st(std::move(gen.program));
    Rng rng(seed);
    const std::string tag = "guard seed " + std::to_string(seed) + ": ";
    auto pick = [&](const std::vector<VertexId>& from) {
      return from[static_cast<std::size_t>(rng.uniform() * static_cast<double>(from.size()))];
    };
    try {
      for (int e = 0; e < 3; ++e) {
        const auto images = image_vertices(st.program);
        const VertexId target = pick(images);
        if (rng.uniform() < 0.5) {
          apply_edit(st, edit::NodeSplit{target, std::nullopt});
        } else {
          VertexId side = pick(images);
          if (side != target) apply_edit(st, edit::SInsert{target, side, std::nullopt});
        }
      }
      // Perturb: extra readers break exclusivity, nonzero weights break benign sums.
      auto& p = st.program;
      for (int e = 0; e < 2; ++e) {
        if (rng.uniform() < 0.5) {
          const VertexId x = pick(image_vertices(p));
          p.add_vertex(gen.main, make_dynamic(Identity{}, kGenWidth, kGenHeight), {x});
        }
      }
      for (const auto& [id, v] : p.vertices()) {
        const auto* d = std::get_if<DynamicImage>(&v.data);
        if (!d || !std::holds_alternative<SumOf2>(d->transform) || v.sources.size() != 2) continue;
        const double u = rng.uniform();
        if (u < 0.25) set_alpha(p, id, 0.5);
        else if (u < 0.5) set_alpha(p, id, 0.0);
      }
    } catch (const std::exception& e) {
      tally.expect(false, tag + "setup threw " + e.what());
      continue;
    }
    const DataflowProgram& p = st.program;
    for (const auto& [id, v] : p.vertices()) {
      {
        DataflowProgram trial = p;
        bool accepted = true;
        try {
          merge_identity(trial, id);
        } catch (const Error&) {
          accepted = false;
        }
        const bool benign = merge_is_benign(p, id);
        tally.expect(accepted == benign, tag + "merge_identity on " + std::to_string(id.value) +
                                             (accepted ? " accepted" : " rejected"));
        if (accepted) tally.expect(validate(trial).empty(), tag + "merge left an invalid program");
        (accepted ? merge_accept : merge_reject)++;
      }
      {
        DataflowProgram trial = p;
        bool accepted = true;
        try {
          s_remove(trial, id);
        } catch (const Error&) {
          accepted = false;
        }
        const bool benign = s_remove_is_benign(p, id);
        tally.expect(accepted == benign, tag + "s_remove on " + std::to_string(id.value) +
                                             (accepted ? " accepted" : " rejected"));
        if (accepted) tally.expect(validate(trial).empty(), tag + "s_remove left an invalid program");
        (accepted ? remove_accept : remove_reject)++;
      }
    }
  }
  tally.expect(merge_accept > 0 && remove_accept > 0, "guard cases never reach a benign state");

  std::string ops;
  for (const auto& [op, n] : per_op) ops += op + " " + std::to_string(n) + ", ";
  return tally.outcome(ops + "all isomorphic; merge_identity accepted " + std::to_string(merge_accept) + "/rejected " +
                       std::to_string(merge_reject) + ", s_remove accepted " + std::to_string(remove_accept) +
                       "/rejected " + std::to_string(remove_reject) + ", all matching the predicate");
}

// ---------------------------------------------------------------------------
// Copy isolation.

struct Isolation {
  EngineState state;
  std::vector<VertexId> orig;  // constant, click, wave, numeric, sum
  std::vector<VertexId> copy;
};

Isolation make_isolation() {
  DataflowProgram p(31);
  const GraphId main = p.add_top_level_graph(true);
  const GraphId orig = p.add_subgraph(main);
  const VertexId c = p.add_vertex(orig, ConstantImage{pattern_frame(kW, kH)});
  const VertexId click = p.add_vertex(orig, ClickControl{{10.0, 12.0}, 0});
  const VertexId w = p.add_vertex(orig, make_dynamic(Wave{2.5, 6.0, 1.0}, kW, kH), {c, click});
  const VertexId num = p.add_vertex(orig, NumericControl{0.4});
  const VertexId s = p.add_vertex(orig, make_dynamic(SumOf2{0.4}, kW, kH), {c, w, num});
  Isolation out{EngineState(std::move(p)), {c, click, w, num, s}, {}};
  const UndoRecord undo = apply_edit(out.state, edit::LimitedDeepCopy{orig, GraphSelector(main), std::nullopt});
  const GraphId copy = std::get<GraphId>(std::get<edit::RemoveSubgraph>(*undo.inverse).graph.ref);
  out.copy = out.state.program.graph(copy).immediate_targets;
  for (VertexId v : {out.orig[2], out.orig[4], out.copy[2], out.copy[4]}) register_output(out.state, v);
  return out;
}

std::map<VertexId, std::vector<std::uint64_t>> hash_streams(const RunTrace& trace) {
  std::map<VertexId, std::vector<std::uint64_t>> out;
  for (const auto& t : trace.ticks) {
    for (const auto& [v, h] : t.outputs) out[v].push_back(h);
  }
  return out;
}

void schedule_mutations(EngineState& state, const std::vector<VertexId>& group, std::uint64_t seed) {
  Rng rng(seed);
  for (int k = 0; k < 50; ++k) {
    const Tick t = 1 + static_cast<Tick>(rng.uniform() * 398.0);
    const double u = rng.uniform();
    if (u < 0.4) {
      state.schedule(t, ControlEvent{group[1], PixelCoord{std::floor(rng.uniform() * kW), std::floor(rng.uniform() * kH)}});
    } else if (u < 0.7) {
      state.schedule(t, ControlEvent{group[3], rng.uniform()});
    } else {
      state.schedule(t, edit::SetAlpha{group[4], rng.uniform()});
    }
  }
}

Outcome check_copy_isolation() {
  constexpr std::uint64_t kTicks = 400;
  Tally tally;
  Isolation base = make_isolation();
  const auto ref = hash_streams(run(base.state, kTicks));

  std::size_t changed = 0;
  for (int direction = 0; direction < 2; ++direction) {
    Isolation iso = make_isolation();
    const auto& mutated = direction == 0 ? iso.copy : iso.orig;
    const auto& watched = direction == 0 ? iso.orig : iso.copy;
    schedule_mutations(iso.state, mutated, 77 + static_cast<std::uint64_t>(direction));
    const auto got = hash_streams(run(iso.state, kTicks));
    const std::string tag = direction == 0 ? "copy mutated: " : "original mutated: ";
    for (std::size_t k : {2u, 4u}) {
      tally.expect(got.at(watched[k]) == ref.at(watched[k]), tag + "untouched side changed");
      tally.expect(got.at(watched[k]).size() == kTicks, tag + "short manifest");
      // The mutations must be visible on the side they target.
      if (got.at(mutated[k]) != ref.at(mutated[k])) ++changed;
    }
  }
  tally.expect(changed == 4, "mutations had no visible effect");
  return tally.outcome("50 mutations each way; untouched side's 400-tick hashes identical, mutated side diverged");
}

// ---------------------------------------------------------------------------
// Sampler statistics.

Outcome check_sampler_statistics() {
  constexpr std::size_t kTicks = 10000;
  Tally tally;

  DataflowProgram p(2024);
  const GraphId main = p.add_top_level_graph(true);
  const VertexId ps = p.add_vertex(main, Sampler{delta(0), 0, 0, std::nullopt});
  const VertexId qs = p.add_vertex(main, Sampler{delta(1), 0, 0, std::nullopt});
  const VertexId mix = p.add_vertex(main, Sampler{Categorical{}, 0, 0, 0.3}, {ps, qs});
  EngineState st(std::move(p));
  // Warm up until both sources show their point masses.
  tick(st);
  tick(st);
  double sum = 0.0;
  for (std::size_t t = 0; t < kTicks; ++t) {
    tick(st);
    sum += std::get<Sampler>(st.program.vertex(mix).data).latest;
  }
  const double mean = sum / kTicks;
  tally.expect(mean >= kMixtureLow && mean <= kMixtureHigh, "mixture mean " + std::to_string(mean));

  SignedSampler s;
  s.pos_channel.distribution = Categorical{{0.7, 0.3}};
  s.neg_channel.distribution = Categorical{{0.9, 0.1}};
  s.pos_weight = 1.0;
  s.neg_weight = 0.25;
  // Expectation from the weights directly: 1 * 0.3 - 0.25 * 0.1.
  const double expected = 1.0 * 0.3 - 0.25 * 0.1;
  SignedSampler n = signed_negate(s);
  Rng rng(99);
  double sp = 0.0;
  double sn = 0.0;
  for (std::size_t t = 0; t < kTicks; ++t) {
    sp += draw_signed(s, rng);
    sn += draw_signed(n, rng);
  }
  const double mp = sp / kTicks;
  const double mn = sn / kTicks;
  tally.expect(std::abs(mp - expected) <= kSignedHalfWidth, "signed mean " + std::to_string(mp));
  tally.expect(std::abs(mn + expected) <= kSignedHalfWidth, "negated signed mean " + std::to_string(mn));
  std::ostringstream detail;
  detail << "mixture mean " << mean << " in [" << kMixtureLow << ", " << kMixtureHigh << "]; signed " << mp
         << " and negated " << mn << " within " << kSignedHalfWidth << " of +/-" << expected;
  return tally.outcome(detail.str());
}

// ---------------------------------------------------------------------------
// Kernel oracles.

Outcome check_kernel_oracles() {
  constexpr int kFrames = 100;
  Tally tally;
  Rng rng(424242);
  double worst = 0.0;
  std::size_t ambiguous = 0;
  for (int k = 0; k < kFrames; ++k) {
    const int w = 8 + static_cast<int>(rng.uniform() * 40.0);
    const int h = 8 + static_cast<int>(rng.uniform() * 40.0);
    const ImageFrame a = random_frame(w, h, rng);
    const ImageFrame b = random_frame(w, h, rng);
    const double alpha = rng.uniform();
    const std::string tag = "frame " + std::to_string(k) + ": ";

    const double dc = max_abs_diff(convex_combine(a, b, alpha), ref_convex_combine(a, b, alpha));
    const double dn = max_abs_diff(negate(a), ref_negate(a));
    tally.expect(dc <= kKernelTolerance, tag + "convex_combine off by " + std::to_string(dc));
    tally.expect(dn <= kKernelTolerance, tag + "negate off by " + std::to_string(dn));

    const Wave params{0.5 + rng.uniform() * 4.0, 2.0 + rng.uniform() * 20.0, rng.uniform() * 3.0};
    const PixelCoord center{std::floor(rng.uniform() * w), std::floor(rng.uniform() * h)};
    const double t_rel = std::floor(rng.uniform() * 50.0);
    const WaveOracle oracle = ref_wave_warp(a, center.x, center.y, t_rel, params.amplitude, params.wavelength, params.speed);
    const double dw = oracle.max_error(wave_warp(a, center, t_rel, params));
    tally.expect(dw <= kKernelTolerance, tag + "wave_warp off by " + std::to_string(dw));
    ambiguous += oracle.ambiguous_pixels();

    tally.expect(negate(negate(a)) == a, tag + "negate is not an involution");
    const ImageFrame zero = convex_combine(a, negate(a), 0.5);
    tally.expect(std::all_of(zero.values().begin(), zero.values().end(), [](double v) { return v == 0.0; }),
                 tag + "a blended with -a is not zero");
    worst = std::max({worst, dc, dn, dw});
  }
  return tally.outcome(std::to_string(kFrames) + " random frames, worst error " + std::to_string(worst) +
                       " (tolerance 1e-6), " + std::to_string(ambiguous) +
                       " wave pixels on a rounding boundary; involution and self-cancel exact");
}

// ---------------------------------------------------------------------------
// Phase isolation.

Outcome check_phase_isolation() {
  Tally tally;
  {
    DataflowProgram p(1);
    const GraphId g = p.add_top_level_graph(true);
    const VertexId k = p.add_vertex(g, ConstantImage{pattern_frame(kW, kH)});
    const VertexId a = p.add_vertex(g, wave_with_click(2.0, 5.0, 1.0, {kW / 2.0, kH / 2.0}), {k});
    const VertexId b = p.add_vertex(g, make_dynamic(Negation{}, kW, kH), {a});
    const VertexId c = p.add_vertex(g, make_dynamic(Identity{}, kW, kH), {a});
    const VertexId d = p.add_vertex(g, make_dynamic(SumOf2{0.25}, kW, kH), {b, c});
    EngineState s(std::move(p));
    register_output(s, a);
    register_output(s, d);
    const FrameTable f = run_frames(s, 60);
    std::size_t off_by_one = 0;
    for (std::size_t t = 2; t < f.size(); ++t) {
      const ImageFrame& src = f[t - 2][0];
      const ImageFrame want = ref_convex_combine(ref_negate(src), src, 0.25);
      tally.expect(max_abs_diff(f[t][1], want) <= 1e-12, "diamond tick " + std::to_string(t));
      const ImageFrame& near = f[t - 1][0];
      off_by_one += max_abs_diff(f[t][1], ref_convex_combine(ref_negate(near), near, 0.25)) > 1e-6 ? 1 : 0;
    }
    tally.expect(off_by_one > 40, "A changes too slowly to distinguish t-1 from t-2");
  }
  {
    DataflowProgram p(1);
    const GraphId g = p.add_top_level_graph(true);
    const VertexId seed = p.add_vertex(g, ConstantImage{ImageFrame(kW, kH, 0.0)});
    const VertexId a = p.add_vertex(g, make_dynamic(Negation{}, kW, kH), {seed});
    const VertexId b = p.add_vertex(g, make_dynamic(Negation{}, kW, kH), {a});
    p.set_sources(a, {b});
    std::get<DynamicImage>(p.vertex(a).data).source_buffer = ImageFrame(kW, kH, 0.5);
    std::get<DynamicImage>(p.vertex(b).data).source_buffer = ImageFrame(kW, kH, 0.25);
    EngineState s(std::move(p));
    register_output(s, a);
    register_output(s, b);
    const FrameTable f = run_frames(s, 40);
    // A(t+1) = -B(t), B(t+1) = -A(t).
    for (std::size_t t = 0; t < f.size(); ++t) {
      const bool even = t % 2 == 0;
      tally.expect(f[t][0] == ImageFrame(kW, kH, even ? 0.5 : -0.25), "loop A tick " + std::to_string(t));
      tally.expect(f[t][1] == ImageFrame(kW, kH, even ? 0.25 : -0.5), "loop B tick " + std::to_string(t));
    }
  }
  {
    DataflowProgram p(1);
    p.add_top_level_graph(true);
    EngineState s(std::move(p));
    constexpr Tick kTicks = 100000;
    try {
      for (Tick t = 0; t < kTicks; ++t) tick(s);
    } catch (const std::exception& e) {
      tally.expect(false, std::string("empty main threw ") + e.what());
    }
    tally.expect(s.program.clock() == kTicks, "empty main clock");
  }
  return tally.outcome("diamond D(t) = f(A(t-2)) for 58 ticks; 2-cycle alternates with period 2; empty main ran 100000 ticks");
}

// ---------------------------------------------------------------------------
// Scenario reproduction.

Outcome check_scenario_reproduction() {
  Tally tally;
  const fs::path dir = MORPHFLOW_SCENARIO_DIR;
  const fs::path work = scratch_dir("scenarios");
  std::string detail;
  for (const std::string name : {"jun21", "jun28"}) {
    const Scenario sc = load_scenario(dir / (name + ".json"));
    std::size_t structural = 0;
    for (const auto& e : sc.schedule) structural += is_structural(e.command) ? 1 : 0;

    std::vector<std::string> manifests;
    std::size_t snapshots = 0;
    json manifest;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = work / (name + "_" + std::to_string(k));
      const RunSummary r = run_scenario(sc, RunOptions{out, std::nullopt, false});
      manifests.push_back(read_file(out / "manifest.json"));
      snapshots = r.snapshots;
      manifest = r.manifest;
    }
    tally.expect(manifests[0] == manifests[1] && !manifests[0].empty(), name + ": manifests differ between runs");
    tally.expect(manifest.at("complete") == true, name + ": incomplete run");
    tally.expect(manifest.at("ticks") == sc.ticks, name + ": tick count");
    tally.expect(snapshots == 3 && snapshots == structural, name + ": " + std::to_string(snapshots) + " snapshots");

    if (name == "jun28") {
      const EngineState st = instantiate(sc);
      const auto main = st.program.main_graph();
      const auto& targets = st.program.graph(*main).immediate_targets;
      bool lone_self_view = targets.size() == 1 && st.program.vertices().size() == 1 + [&] {
        std::size_t n = 0;
        for (const auto& g : st.program.top_level_graphs()) {
          if (g != *main) n += flatten(st.program, g).size();
        }
        return n;
      }();
      if (lone_self_view) {
        const auto* ref = std::get_if<GraphRef>(&st.program.vertex(targets[0]).data);
        lone_self_view = ref && ref->graph == *main;
      }
      tally.expect(lone_self_view, "jun28: main is not a lone self-referential view");
      std::size_t rendered = 0;
      for (const auto& t : manifest.at("frames")) {
        for (const auto& o : t.at("outputs")) rendered += o.at("vertex") == targets[0].value ? 1 : 0;
      }
      tally.expect(rendered == sc.ticks, "jun28: view rendered on " + std::to_string(rendered) + " ticks");
    }
    detail += name + " " + std::to_string(sc.ticks) + " ticks, " + std::to_string(snapshots) + " snapshots; ";
  }
  fs::remove_all(work);
  return tally.outcome(detail + "manifests byte-identical across runs");
}

// ---------------------------------------------------------------------------
// CLI/service equivalence.

json live_scenario() {
  return json::parse(R"({
    "seed": 17, "ticks": 100000, "grid": {"width": 48, "height": 48},
    "main": "main",
    "templates": [
      {"name": "main", "vertices": [
        {"name": "img", "data": {"kind": "constant", "pattern": "rings", "wavelength": 9}},
        {"name": "wave", "data": {"kind": "dynamic", "transform": "wave", "amplitude": 3, "wavelength": 11, "click": [24, 24]},
         "sources": ["img"]},
        {"name": "alpha", "data": {"kind": "numeric_control", "value": 0.5}},
        {"name": "mix", "data": {"kind": "dynamic", "transform": "sum_of_2"}, "sources": ["img", "wave", "alpha"]}
      ]},
      {"name": "neg_template", "vertices": [
        {"name": "img", "data": {"kind": "constant", "pattern": "checkerboard", "cell": 6}},
        {"name": "neg", "data": {"kind": "dynamic", "transform": "negation"}, "sources": ["img"]}
      ]}
    ],
    "schedule": [{"tick": 10, "edit": {"op": "node_split", "target": "main/wave", "as": "main/wave_src"}}],
    "outputs": [{"vertex": "main/wave"}, {"vertex": "main/mix"}]
  })");
}

Outcome check_cli_service_equivalence() {
  Tally tally;
  const fs::path work = scratch_dir("live");
  const fs::path log_path = work / "interaction_log.json";
  const fs::path live_manifest = work / "live_manifest.json";

  LiveService svc(parse_scenario(live_scenario()),
                  ServiceOptions{PacerOptions{1000.0, true, std::nullopt}, log_path, live_manifest});
  svc.start();
  auto box = std::make_shared<Outbox>();
  const ClientId a = svc.connect(box);
  const ClientId b = svc.connect(std::make_shared<Outbox>());

  auto steps = [&](int n) {
    const Tick target = svc.hub().clock() + static_cast<Tick>(n);
    for (int k = 0; k < n; ++k) svc.handle_text(a, R"({"type": "step"})");
    for (int spin = 0; spin < 20000 && svc.hub().clock() < target; ++spin) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  };
  steps(15);
  svc.handle_text(a, R"({"type": "click", "vertex": "main/wave_src", "x": 10, "y": 30})");
  steps(12);
  svc.handle_text(b, R"({"type": "set_control", "vertex": "main/alpha", "value": 0.8})");
  svc.handle_text(a, R"({"type": "edit", "command": {"op": "limited_deep_copy", "graph": "neg_template", "destination": "main", "as": "n1"}})");
  steps(9);
  svc.handle_text(b, R"({"type": "edit", "command": {"op": "s_insert", "target_vertex": "main/mix", "side_vertex": "n1/neg", "as": "main/mix_src"}})");
  steps(3);
  svc.handle_text(a, R"({"type": "edit", "command": {"op": "ramp_alpha", "vertex": "main/mix", "from": 0, "to": 0.6, "duration_ticks": 20}})");
  steps(25);
  svc.handle_text(b, R"({"type": "click", "vertex": "main/wave_src", "x": 40, "y": 5})");
  svc.handle_text(a, R"({"type": "set_control", "vertex": "main/alpha", "value": 0.1})");
  steps(30);
  svc.stop();

  const json log = json::parse(read_file(log_path));
  const std::size_t edits = log.at("schedule").size();
  const std::size_t controls = log.at("control_script").size();
  tally.expect(edits == 4 && controls == 4, "log holds " + std::to_string(edits) + " edits and " +
                                                std::to_string(controls) + " controls");
  tally.expect(svc.hub().clock() == 94, "live session ran " + std::to_string(svc.hub().clock()) + " ticks");

  const fs::path out = work / "replay";
  const std::string cmd = std::string("\"") + MORPHFLOW_CLI_PATH + "\" run \"" + log_path.string() +
                          "\" --hash-only --out \"" + out.string() + "\" > \"" + (work / "cli.txt").string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  tally.expect(rc == 0, "cli exited with " + std::to_string(rc) + ": " + read_file(work / "cli.txt"));
  const std::string replay = read_file(out / "manifest.json");
  const std::string live = read_file(live_manifest);
  tally.expect(!live.empty() && replay == live, "replayed manifest differs from the live one");
  tally.expect(live == svc.manifest().dump(2) + "\n", "written live manifest differs from the hub's");
  const std::size_t bytes = live.size();
  fs::remove_all(work);
  return tally.outcome("94-tick session, " + std::to_string(edits) + " edits and " + std::to_string(controls) +
                       " controls from two clients; replayed manifest identical (" + std::to_string(bytes) + " bytes)");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"benignity", check_benignity},
      {"s_insert_delay", check_s_insert_delay},
      {"ldc_structure", check_ldc_structure},
      {"reversibility", check_reversibility},
      {"copy_isolation", check_copy_isolation},
      {"sampler_statistics", check_sampler_statistics},
      {"kernel_oracles", check_kernel_oracles},
      {"phase_isolation", check_phase_isolation},
      {"scenario_reproduction", check_scenario_reproduction},
      {"cli_service_equivalence", check_cli_service_equivalence},
  };
  std::vector<std::string> names;
  for (const auto& [name, fn] : checks) names.push_back(name);

  CLI::App app("morphflow acceptance checks");
  std::string only;
  app.add_option("--only", only, "Run a single check")->check(CLI::IsMember(names));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && name != only) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

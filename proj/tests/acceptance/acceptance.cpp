// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.
//
//   acceptance [--only 1,2,...] [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "geolid/data/manifest.hpp"
#include "geolid/data/sampler.hpp"
#include "geolid/eval/eval.hpp"
#include "geolid/geovec.hpp"
#include "geolid/io/archive.hpp"
#include "geolid/train/schedule.hpp"
#include "geolid/train/trainer.hpp"
#include "support/model_fixtures.hpp"
#include "support/op_cases.hpp"

using namespace geolid;
using namespace geolid::model;
using geolid::testing::all_zero;
using geolid::testing::max_abs;
using geolid::testing::random_batch;
using geolid::testing::starts_with;
using geolid::testing::Term;
using geolid::testing::term_gradient;
using geolid::testing::tiny_config;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool bitwise_equal(const ad::Tensor<double>& a, const ad::Tensor<double>& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

double max_diff(const ad::Tensor<double>& a, const ad::Tensor<double>& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// 1 ------------------------------------------------------------------------

double dot_angle(const geo::GeoCoordinate& a, const geo::GeoCoordinate& b) {
  const auto u = a.to_unit_vector(), v = b.to_unit_vector();
  const double d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::acos(std::clamp(d, -1.0, 1.0));
}

Outcome geodesy(const fs::path&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-179.999999, 180.0);
  auto coord = [&] { return geo::GeoCoordinate(lat(rng), lon(rng)); };

  double worst = 0;
  bool identical_zero = true;
  for (int i = 0; i < 10000; ++i) {
    const auto a = coord(), b = coord();
    worst = std::max(worst, std::abs(geo::great_circle_distance(a, b) - dot_angle(a, b)));
    identical_zero = identical_zero && geo::great_circle_distance(a, a) == 0.0;
  }
  o.expect(worst <= 1e-9, "distance vs dot-product oracle within 1e-9 (worst " + fmt("%.3g", worst) + ")");
  o.expect(identical_zero, "identical points at distance exactly 0");

  const double pi = std::numbers::pi;
  o.expect(geo::great_circle_distance({0, 0}, {0, 180}) == pi, "(0,0)-(0,180) is exactly pi");
  o.expect(geo::great_circle_distance({90, 0}, {-90, 0}) == pi, "pole to pole is exactly pi");
  o.expect(geo::great_circle_distance({45, -90}, {-45, 90}) == pi, "(45,-90)-(-45,90) is exactly pi");

  const auto lattice = geo::fibonacci_lattice(64);
  bool in_range = true;
  for (int i = 0; i < 1000; ++i) {
    for (double v : geo::geo_vector(coord(), lattice).values) in_range = in_range && v >= 0.0 && v <= 1.0;
  }
  o.expect(in_range, "geo_vector values in [0, 1] on 1000 coordinates");

  const double secs = seconds_since(t0);
  o.expect(secs < 5.0, "runtime under 5 s");
  o.note("worst oracle gap " + fmt("%.2e", worst) + ", " + fmt("%.2f s", secs));
  return o;
}

// 2 ------------------------------------------------------------------------

Outcome gradcheck(const fs::path&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst_op = 0;
  std::size_t ops = 0;
  for (const auto& c : geolid::testing::make_op_cases(11)) {
    const auto r = geolid::testing::check_op(c);
    worst_op = std::max(worst_op, r.max_rel_error);
    o.expect(r.max_rel_error <= 1e-4, "op " + std::string(ad::op_name(c.kind)) + " (" +
                                          fmt("%.3g", r.max_rel_error) + ")");
    ++ops;
  }
  const auto r = model::gradcheck_model(tiny_config(Mode::geo_cond, {0, 1}), 0);
  o.expect(r.max_rel_error <= 1e-4, "tiny geo-cond model at " + r.worst_param + " (" +
                                        fmt("%.3g", r.max_rel_error) + ")");
  const double secs = seconds_since(t0);
  o.expect(secs < 120.0, "runtime under 2 min");
  o.note(std::to_string(ops) + " ops, worst " + fmt("%.2e", worst_op) + "; model " +
         std::to_string(r.checked) + " entries (" + std::to_string(r.skipped_kinks) +
         " at non-smooth points), worst " + fmt("%.2e", r.max_rel_error) + ", " + fmt("%.1f s", secs));
  return o;
}

// 3 ------------------------------------------------------------------------

Outcome detach(const fs::path&) {
  Outcome o;
  const auto cfg = tiny_config(Mode::geo_cond, {0, 1});
  const auto batch = random_batch<double>(cfg, 4, 32);

  LIDModel<double> m(cfg, 19);
  const auto g = term_gradient(m, batch, Term::class_loss);
  std::size_t heads = 0;
  for (const auto& [name, grad] : g) {
    if (!starts_with(name, "inter.")) continue;
    ++heads;
    o.expect(all_zero(grad), "class gradient exactly zero for " + name);
  }
  o.expect(heads > 0, "intermediate-head parameters exist");

  auto open = cfg;
  open.detach = false;
  LIDModel<double> mo(open, 19);
  double largest = 0;
  for (const auto& [name, grad] : term_gradient(mo, batch, Term::class_loss)) {
    if (starts_with(name, "inter.")) largest = std::max(largest, max_abs(grad));
  }
  o.expect(largest > 1e-8, "without detach some head gradient exceeds 1e-8");

  // Each layer's loss is blind to the projection that conditioned that layer.
  // The shared matrix also produced every earlier c^k, which later heads read,
  // so only the first conditioned layer's loss is exactly zero there.
  LIDModel<double> indep(tiny_config(Mode::geo_cond, {0, 1}, CondShare::independent), 20);
  for (std::size_t n : {0u, 1u}) {
    const auto gn = term_gradient(indep, batch, Term::geo_layer, n);
    o.expect(all_zero(gn.at(indep.cond_prefix(n) + ".w")) && all_zero(gn.at(indep.cond_prefix(n) + ".b")),
             "independent: L_geo^" + std::to_string(n) + " zero on its own CondProj");
  }
  const auto g0 = term_gradient(indep, batch, Term::geo_layer, 0);
  o.expect(all_zero(g0.at("cond.1.w")), "independent: L_geo^0 zero on a later CondProj");
  LIDModel<double> shared(cfg, 20);
  const auto gs = term_gradient(shared, batch, Term::geo_layer, 0);
  o.expect(all_zero(gs.at("cond.w")) && all_zero(gs.at("cond.b")), "shared: L_geo^0 zero on CondProj");
  o.note("heads checked " + std::to_string(heads) + ", no-detach max " + fmt("%.2e", largest) +
         "; shared CondProj is exact only for the first conditioned layer");
  return o;
}

// 4 ------------------------------------------------------------------------

Outcome identities(const fs::path&) {
  Outcome o;
  LIDModel<double> m(tiny_config(Mode::geo_cond, {0, 1}), 40);
  const auto batch = random_batch<double>(m.config(), 4, 41);
  const auto tr = m.forward(batch, nullptr, true);
  const std::set<std::size_t> layers{0, 1};
  for (double lambda : {0.0, 0.2, 0.7}) {
    const auto l1 = loss_l1(*tr.loss_class, *tr.loss_geo, lambda);
    const auto l2 = loss_l2(*tr.loss_class, *tr.loss_geo, tr.loss_geo_layer, layers, lambda, 0.0);
    o.expect(l2.item() == l1.item(), "loss_l2(gamma=0) == loss_l1 at lambda " + fmt("%g", lambda));
  }
  o.expect(loss_l1(*tr.loss_class, *tr.loss_geo, 0.0).item() == tr.loss_class->item(),
           "loss_l1(lambda=0) == L_class");

  LIDModel<double> pred(tiny_config(Mode::geo_pred), 42), empty(tiny_config(Mode::geo_cond), 42);
  const auto b2 = random_batch<double>(pred.config(), 3, 43);
  const auto tp = pred.forward(b2, nullptr, true), te = empty.forward(b2, nullptr, true);
  o.expect(bitwise_equal(tp.z_out, te.z_out) && bitwise_equal(tp.embedding, te.embedding) &&
               bitwise_equal(*tp.geo_pred, *te.geo_pred) && tp.loss_total->item() == te.loss_total->item(),
           "geo-cond with no layers equals geo-pred");

  LIDModel<double> base(tiny_config(Mode::baseline), 44), cond(tiny_config(Mode::geo_cond, {0, 1}), 44);
  cond.params().set_value("cond.w", ad::Tensor<double>(cond.params().value("cond.w").shape()));
  cond.params().set_value("cond.b", ad::Tensor<double>(cond.params().value("cond.b").shape()));
  const auto tb = base.forward(b2, nullptr, true), tc = cond.forward(b2, nullptr, true);
  bool zero_c = true;
  for (const auto& [n, c] : tc.cond) zero_c = zero_c && all_zero(c);
  const double gap = max_diff(tb.z_out, tc.z_out);
  o.expect(zero_c, "zero CondProj gives c^n = 0");
  o.expect(gap <= 1e-12, "c^n = 0 matches baseline Z_out within 1e-12 (" + fmt("%.3g", gap) + ")");
  o.note("Z_out gap " + fmt("%.1e", gap));
  return o;
}

// 5 ------------------------------------------------------------------------

Outcome aam(const fs::path&) {
  Outcome o;
  std::mt19937_64 rng(5);
  double worst = 0;
  std::size_t monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t classes = 2 + trial % 7, dim = 3 + trial % 5;
    const auto e = geolid::testing::random_tensor(rng, {1, dim});
    const auto w = geolid::testing::random_tensor(rng, {classes, dim});
    const int y = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, classes - 1)(rng));
    const double got = aam_subcenter_loss(e, w, std::vector<int>{y}, 1, 0.0, 1.0).loss.item();

    double ne = 0;
    for (double v : e.data()) ne += v * v;
    std::vector<double> cos(classes);
    for (std::size_t j = 0; j < classes; ++j) {
      double dot = 0, nw = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        dot += e[i] * w[j * dim + i];
        nw += w[j * dim + i] * w[j * dim + i];
      }
      cos[j] = dot / std::sqrt(ne * nw);
    }
    double z = 0;
    for (double c : cos) z += std::exp(c);
    const double want = std::log(z) - cos[static_cast<std::size_t>(y)];
    worst = std::max(worst, std::abs(got - want));

    const double margin = aam_subcenter_loss(e, w, std::vector<int>{y}, 1, 0.5, 1.0).loss.item();
    if (margin >= got) ++monotone;
  }
  o.expect(worst <= 1e-6, "cosine cross-entropy oracle within 1e-6 (worst " + fmt("%.3g", worst) + ")");
  o.expect(monotone == 100, "margin 0.5 never lowers the loss (" + std::to_string(monotone) + "/100)");
  o.note("worst gap " + fmt("%.2e", worst) + ", monotone " + std::to_string(monotone) + "/100");
  return o;
}

// 6 ------------------------------------------------------------------------

Outcome schedule(const fs::path&) {
  Outcome o;
  const train::ScheduleConfig s;
  const std::pair<std::uint64_t, double> anchors[] = {{0, 6e-6}, {5000, 1e-5}, {25000, 1e-5}, {100000, 1e-6}};
  double worst = 0;
  for (const auto& [step, want] : anchors) {
    const double rel = std::abs(train::tri_stage_lr(step, s) - want) / want;
    worst = std::max(worst, rel);
    o.expect(rel <= 1e-9, "step " + std::to_string(step) + " gives " + fmt("%.17g", train::tri_stage_lr(step, s)));
  }
  o.note("worst relative error " + fmt("%.1e", worst));
  return o;
}

// 7 ------------------------------------------------------------------------

const data::Dataset& small_dataset() {
  static const data::Dataset ds = [] {
    auto langs = data::default_languages();
    langs.resize(4);
    data::CorpusOptions opt;
    opt.counts = {10, 4, 2};
    opt.seed = 3;
    return data::load_dataset(data::plan_corpus(langs, opt), {}, langs,
                              train::train_preset("tiny").model.head.geo_dim);
  }();
  return ds;
}

Outcome condproj(const fs::path& work) {
  Outcome o;
  auto cfg = train::train_preset("tiny");
  train::apply_config(cfg, {{"mode", "geo-cond"},
                            {"layers", "0,1"},
                            {"cond_share", "independent"},
                            {"cond_freeze", "frozen"},
                            {"steps", "100"},
                            {"seed", "7"}});
  const auto dir = work / "frozen";
  fs::remove_all(dir);
  train::Trainer t(cfg, small_dataset(), dir);
  std::map<std::string, std::vector<float>> before;
  for (const auto& [name, p] : t.model().params()) {
    if (starts_with(name, "cond.")) before[name].assign(p.value.data().begin(), p.value.data().end());
  }
  const auto res = t.run();
  o.expect(res.log.size() == 100, "100 optimizer steps ran");
  o.expect(!before.empty(), "frozen CondProj parameters exist");
  for (const auto& [name, p] : t.model().params()) {
    if (before.count(name)) {
      o.expect(std::equal(p.value.data().begin(), p.value.data().end(), before[name].begin(), before[name].end()), name + " bit-identical after training");
    }
  }

  LIDModel<double> m(tiny_config(Mode::geo_cond, {0, 1}), 45);
  std::size_t cond_params = 0;
  for (const auto& [name, p] : m.params()) {
    if (starts_with(name, "cond.") && p.kind == ad::ParamKind::weight) ++cond_params;
  }
  o.expect(cond_params == 2, "shared mode holds one matrix and one bias");
  const auto batch = random_batch<double>(m.config(), 3, 46);
  const auto a = m.forward(batch, nullptr, false);
  auto w = m.params().value("cond.w");
  w.mutable_data()[0] += 0.5;
  m.params().set_value("cond.w", w);
  const auto b = m.forward(batch, nullptr, false);
  for (std::size_t n : {0u, 1u}) {
    o.expect(max_diff(a.cond.at(n), b.cond.at(n)) > 0, "mutating cond.w changes c^" + std::to_string(n));
  }
  o.note(std::to_string(before.size()) + " frozen tensors unchanged after 100 steps");
  return o;
}

// 8, 9 --------------------------------------------------------------------

const std::vector<std::string>& dialect_languages() {
  static const std::vector<std::string> codes = [] {
    std::vector<std::string> out;
    for (const auto& s : data::default_languages()) {
      if (s.dialects.size() > 1) out.push_back(s.code);
    }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return codes;
}

const data::Dataset& desk_dataset() {
  static const data::Dataset ds = [] {
    const auto langs = data::default_languages();
    data::CorpusOptions opt;
    opt.counts = {60, 20, 20};
    opt.seed = 0;
    return data::load_dataset(data::plan_corpus(langs, opt), {}, langs, 64);
  }();
  return ds;
}

train::TrainConfig desk_config(const std::string& mode, std::uint64_t seed) {
  train::TrainConfig cfg;
  train::apply_config(cfg, {{"preset", "desk"},
                            {"mode", mode},
                            {"layers", mode == "geo-cond" ? "3,4" : "none"},
                            {"cond_share", "shared"},
                            {"cond_freeze", "trainable"},
                            {"lambda", "0.2"},
                            {"gamma", "0.4"},
                            {"steps", "1500"},
                            {"seed", std::to_string(seed)}});
  return cfg;
}

struct DeskRun {
  double dialect_accuracy = 0;
  double compactness = 0;
  fs::path latest;
};

DeskRun desk_run(const std::string& mode, std::uint64_t seed, const fs::path& dir) {
  fs::remove_all(dir);
  const auto t0 = std::chrono::steady_clock::now();
  train::Trainer t(desk_config(mode, seed), desk_dataset(), dir);
  const auto res = t.run();
  auto best = train::load_checkpoint_model(res.best);
  const auto report = eval::evaluate(best.model, desk_dataset(), {std::string(data::kDialectDev)});
  DeskRun out;
  out.dialect_accuracy = report.splits.at(std::string(data::kDialectDev)).accuracy;
  out.compactness = eval::mean_compactness(report, data::kDialectDev, dialect_languages()).value_or(NAN);
  out.latest = res.latest;
  std::fprintf(stderr, "  %-8s seed %llu: dialect-dev %.2f%%, compactness %.4f (%.0f s)\n", mode.c_str(),
               static_cast<unsigned long long>(seed), out.dialect_accuracy, out.compactness,
               seconds_since(t0));
  return out;
}

Outcome desk(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto& cfg = desk_config("geo-cond", 0).model;
  o.expect(cfg.encoder.layers == 6 && cfg.encoder.dim == 64 && cfg.head.channels == 64 &&
               cfg.head.embedding == 32 && cfg.head.geo_dim == 64,
           "desk model is N=6, D=64, C=64, E=32, 64 lattice points");
  double base_acc = 0, cond_acc = 0;
  int tighter = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto b = desk_run("baseline", seed, work / ("baseline-" + std::to_string(seed)));
    const auto c = desk_run("geo-cond", seed, work / ("geo-cond-" + std::to_string(seed)));
    base_acc += b.dialect_accuracy / 3;
    cond_acc += c.dialect_accuracy / 3;
    if (c.compactness < b.compactness) ++tighter;
    per_seed << " seed " << seed << ": " << fmt("%.4f", b.compactness) << " vs " << fmt("%.4f", c.compactness)
             << ";";
  }
  o.expect(cond_acc >= base_acc, "(a) mean dialect-dev accuracy geo-cond " + fmt("%.2f", cond_acc) +
                                     " >= baseline " + fmt("%.2f", base_acc));
  o.expect(tighter >= 2, "(b) geo-cond compactness lower in " + std::to_string(tighter) + " of 3 seeds");

  // The budget is stated for 8 cores; scale it to the cores this run had.
  const unsigned cores = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  const double budget = 1800.0 * 8.0 / cores, secs = seconds_since(t0);
  o.expect(secs <= budget, "runtime " + fmt("%.0f s", secs) + " within " + fmt("%.0f s", budget));
  o.note("dialect-dev baseline " + fmt("%.2f", base_acc) + ", geo-cond " + fmt("%.2f", cond_acc) +
         "; compactness baseline vs geo-cond" + per_seed.str() + " " + fmt("%.0f s", secs) + " on " +
         std::to_string(cores) + " core(s)");
  return o;
}

Outcome determinism(const fs::path& work) {
  Outcome o;
  const auto first = work / "baseline-0" / train::kLatestCheckpoint;
  if (!fs::exists(first)) desk_run("baseline", 0, work / "baseline-0");
  const auto again = desk_run("baseline", 0, work / "baseline-0-rerun");
  const auto a = io::file_crc32(first), b = io::file_crc32(again.latest);
  o.expect(a == b, "final checkpoint CRC32 " + io::hex32(a) + " vs " + io::hex32(b));
  o.note("latest.ckpt crc32 " + io::hex32(a) + " both runs");
  return o;
}

// 10 -----------------------------------------------------------------------

Outcome sampler(const fs::path&) {
  Outcome o;
  const auto plan = data::balanced_sampler({{"a", 4}, {"b", 1}}, 0.5);
  o.expect(plan.probabilities.size() == 2 && plan.probabilities[0] == 2.0 / 3.0 &&
               plan.probabilities[1] == 1.0 / 3.0,
           "probabilities are exactly 2/3 and 1/3");

  std::vector<data::ManifestEntry> entries;
  for (int i = 0; i < 5; ++i) {
    entries.push_back({"u" + std::to_string(i), i < 4 ? "a" : "b", "default", "train", 1.0, 1u, std::nullopt});
  }
  const std::vector<std::size_t> pool{0, 1, 2, 3, 4};
  data::BatchIterator it(entries, pool, plan, 1.0, 10);
  double from_a = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto batch = it.next();
    if (batch.size() == 1 && entries[batch[0]].lang == "a") ++from_a;
  }
  const double freq = from_a / 10000;
  o.expect(std::abs(freq - 2.0 / 3.0) <= 0.02, "empirical frequency of a " + fmt("%.4f", freq) + " within 2%");
  o.expect(std::abs((1 - freq) - 1.0 / 3.0) <= 0.02, "empirical frequency of b within 2%");
  o.note("empirical " + fmt("%.4f", freq) + " / " + fmt("%.4f", 1 - freq));
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(const fs::path&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  fs::path work = fs::temp_directory_path() / "geolid_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--work DIR]\n";
      return 1;
    }
  }
  fs::create_directories(work);

  const std::vector<Criterion> criteria{
      {1, "geodesy oracle suite", geodesy},
      {2, "gradient check suite", gradcheck},
      {3, "detach semantics", detach},
      {4, "reduction identities", identities},
      {5, "angular-margin softmax oracle", aam},
      {6, "schedule anchors", schedule},
      {7, "frozen and shared CondProj", condproj},
      {8, "desk-scale directional experiment", desk},
      {9, "determinism of the desk baseline", determinism},
      {10, "balanced sampler", sampler},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run(work);
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << '\n';
    for (const auto& n : o.notes) std::cout << "    " << n << '\n';
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include <unistd.h>

#include "eigengaze/commands.hpp"
#include "eigengaze/experiment.hpp"
#include "eigengaze/numfmt.hpp"
#include "eigengaze/recog.hpp"
#include "eigengaze/registry.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eigengaze;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("eigengaze-acceptance-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<AppearanceVector> of_object(const std::vector<AppearanceVector>& all, const std::string& id) {
  std::vector<AppearanceVector> out;
  for (const auto& v : all)
    if (v.label().object_id == id) out.push_back(v);
  return out;
}

AppearanceVector scaled(const AppearanceVector& v, double c) {
  std::vector<double> values(v.values().begin(), v.values().end());
  for (auto& x : values) x *= c;
  return AppearanceVector(std::move(values), v.norm_mode(), v.label());
}

// 1. Seeded synthetic stand-in for the capture/learn/recognize protocol.
Verdict synthetic_protocol() {
  Verdict v;
  ProtocolConfig pc;  // 4 objects, seed 1, side 32, 0..90 step 10, 1 occluded training view, 2 occluded queries
  const auto t0 = Clock::now();
  const ProtocolOutcome outcome = run_protocol(pc);
  const double elapsed = seconds_since(t0);
  const auto& rep = outcome.report;
  std::size_t occluded_queries = 0;
  for (const auto& li : make_protocol_data(pc).queries) occluded_queries += li.label.occluded;
  v.require(rep.queries == 40, "P != 40");
  v.require(occluded_queries == 8, "expected 8 occluded queries");
  v.require(rep.rate() >= 0.90, "r below 0.90");
  v.require(elapsed <= 10.0, "slower than 10 s");
  v.detail = (v.pass ? "" : v.detail + "; ") + "r = " + numfmt::fixed(rep.rate(), 4) + " (" +
             std::to_string(rep.successes) + "/" + std::to_string(rep.queries) + "), " + numfmt::fixed(elapsed, 3) + " s";

  // not part of the verdict: the same protocol with every occluder placed independently
  ProtocolConfig per_view = pc;
  per_view.placement = OccluderPlacement::PerView;
  v.detail += "; per-view occluder placement gives r = " + numfmt::fixed(run_protocol(per_view).report.rate(), 4);
  return v;
}

// 2. Eigensolver invariants on random matrices, 3x3 roots against the cubic.
Verdict eigensolver() {
  Verdict v;
  SplitMix64 rng(0xAC02);
  const auto t0 = Clock::now();
  std::size_t cubic_checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // every size appears; the rest are random in [2, 12]
    const std::size_t n = trial < 11 ? 2 + static_cast<std::size_t>(trial) : 2 + rng.below(11);
    const SymMatrix q = oracle::random_symmetric(rng, n, 1.0 + 9.0 * rng.uniform());
    const auto e = sym_eigen(q);
    for (std::size_t i = 0; i < n; ++i) {
      double res = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        double qv = 0.0;
        for (std::size_t c = 0; c < n; ++c) qv += q(r, c) * e.vectors[i][c];
        res += (qv - e.values[i] * e.vectors[i][r]) * (qv - e.values[i] * e.vectors[i][r]);
      }
      v.require(std::sqrt(res) <= 1e-8 * (1.0 + std::abs(e.values[i])), "residual too large");
      for (std::size_t j = 0; j < n; ++j)
        v.require(std::abs(dot(e.vectors[i], e.vectors[j]) - (i == j ? 1.0 : 0.0)) <= 1e-8, "not orthonormal");
    }
    const double sum = std::accumulate(e.values.begin(), e.values.end(), 0.0);
    v.require(std::abs(sum - q.trace()) <= 1e-8 * (1.0 + std::abs(q.trace())), "trace mismatch");
    if (n == 3) {
      const auto ref = oracle::cubic_eigenvalues(oracle::to_matrix(q));
      for (std::size_t i = 0; i < 3; ++i) v.require(std::abs(e.values[i] - ref[i]) <= 1e-7, "3x3 root mismatch");
      ++cubic_checks;
    }
  }
  // dedicated 3x3 cases on top of those drawn above
  for (int trial = 0; trial < 100; ++trial) {
    const SymMatrix q = oracle::random_symmetric(rng, 3, 10.0);
    const auto e = sym_eigen(q);
    const auto ref = oracle::cubic_eigenvalues(oracle::to_matrix(q));
    for (std::size_t i = 0; i < 3; ++i) v.require(std::abs(e.values[i] - ref[i]) <= 1e-7, "3x3 root mismatch");
    ++cubic_checks;
  }
  const double elapsed = seconds_since(t0);
  v.require(elapsed <= 5.0, "slower than 5 s");
  if (v.pass)
    v.detail = "100 matrices, " + std::to_string(cubic_checks) + " cubic cross-checks, " + numfmt::fixed(elapsed, 3) + " s";
  return v;
}

// 3. Gram-matrix PCA against the direct d x d decomposition.
Verdict gram_equivalence() {
  Verdict v;
  SplitMix64 rng(0xAC03);
  double worst_value = 0.0, worst_component = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(12), m = 1 + rng.below(6);
    const bool centered = trial % 2 == 0;
    std::vector<std::vector<double>> x;
    for (std::size_t j = 0; j < m; ++j) x.push_back(oracle::random_vector(rng, d));
    const auto p = gram_pca(x, centered);
    const SymMatrix s = oracle::direct_scatter(x, centered);
    const auto direct = sym_eigen(s);
    const auto bisected = oracle::bisection_eigenvalues(oracle::to_matrix(s));
    std::size_t nonzero = 0;
    for (double ev : direct.values) nonzero += ev > retention_floor(direct.values[0]);
    v.require(p.eigenvalues.size() == nonzero, "retained count differs");
    if (p.eigenvalues.size() != nonzero) continue;
    for (std::size_t i = 0; i < nonzero; ++i) {
      const double rel = std::abs(p.eigenvalues[i] - direct.values[i]) / direct.values[i];
      worst_value = std::max(worst_value, rel);
      v.require(rel <= 1e-9, "eigenvalue mismatch");
      v.require(std::abs(p.eigenvalues[i] - bisected[i]) <= 1e-9 * std::max(1.0, bisected[i]), "bisection disagrees");
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = std::abs(p.basis[i][c] - direct.vectors[i][c]);
        worst_component = std::max(worst_component, diff);
        v.require(diff <= 1e-7, "basis vector mismatch");
      }
    }
  }
  if (v.pass)
    v.detail = "50 instances, worst eigenvalue rel err " + numfmt::real(worst_value, 3) + ", worst component " +
               numfmt::real(worst_component, 3);
  return v;
}

// 4. Pythagoras, monotone reconstruction error, exact full-rank reconstruction.
Verdict projection_properties() {
  Verdict v;
  ProtocolConfig pc;
  const auto training = vectorize_all(make_protocol_data(pc).training, NormMode::Unit);
  SplitMix64 rng(0xAC04);
  double worst_pyth = 0.0, worst_full = 0.0;
  std::size_t vectors = 0;
  for (const auto& id : pc.objects) {
    const auto views = of_object(training, id);
    const Eigenspace es = build_eigenspace(id, views, pc.eigenspace);
    for (int i = 0; i < 250; ++i, ++vectors) {
      // mix of random directions and perturbed training views
      auto x = oracle::random_vector(rng, es.dim(), 0.05);
      if (i % 2 == 0) {
        const auto& base = views[rng.below(views.size())].values();
        for (std::size_t c = 0; c < x.size(); ++c) x[c] += base[c];
      }
      const double r = es.residual(x);
      const auto coords = es.project(x);
      double diff2 = 0.0;
      for (std::size_t c = 0; c < x.size(); ++c) diff2 += (x[c] - es.mean()[c]) * (x[c] - es.mean()[c]);
      const double gap = std::abs(r * r + dot(coords, coords) - diff2);
      worst_pyth = std::max(worst_pyth, gap);
      v.require(gap <= 1e-8, "Pythagoras identity violated");
    }

    double previous = INFINITY;
    EigenspaceConfig cfg = pc.eigenspace;
    cfg.k_override = 1000;
    const std::size_t rank = build_eigenspace(id, views, cfg).k();
    for (std::size_t k = 1; k <= rank; ++k) {
      cfg.k_override = k;
      const Eigenspace sub = build_eigenspace(id, views, cfg);
      double err = 0.0;
      for (const auto& a : views) {
        const auto back = sub.reconstruct(sub.project(a));
        for (std::size_t c = 0; c < back.size(); ++c) err += (a.values()[c] - back[c]) * (a.values()[c] - back[c]);
      }
      err = std::sqrt(err);
      v.require(err <= previous + 1e-12, "reconstruction error grew with k");
      previous = err;
    }
    worst_full = std::max(worst_full, previous);
    v.require(previous <= 1e-8, "full-rank reconstruction error above 1e-8");
  }
  if (v.pass)
    v.detail = std::to_string(vectors) + " vectors, worst Pythagoras gap " + numfmt::real(worst_pyth, 3) +
               ", worst full-rank error " + numfmt::real(worst_full, 3);
  return v;
}

// 5. Full-rank self-recognition of the training set.
Verdict self_recognition() {
  Verdict v;
  ProtocolConfig pc;
  const auto training = vectorize_all(make_protocol_data(pc).training, NormMode::Unit);
  EigenspaceConfig cfg = pc.eigenspace;
  cfg.k_override = 1000;
  ObjectRegistry reg;
  for (const auto& id : pc.objects) reg.accumulate(id, of_object(training, id), cfg);
  std::vector<LabeledQuery> queries;
  for (const auto& a : training) queries.push_back({a, a.label().object_id});
  const auto rep = evaluate(reg, queries);
  v.require(rep.successes == rep.queries, "m != P");
  v.require(rep.rate() == 1.0, "r != 1");
  v.detail = "m/P = " + std::to_string(rep.successes) + "/" + std::to_string(rep.queries);
  return v;
}

// 6. Byte-identical learn and synth reruns; field-exact model round trip.
Verdict determinism() {
  Verdict v;
  const fs::path root = scratch_dir("ac6");
  std::ostringstream sink;
  cli::RunConfig cfg;
  const std::vector<std::string> objects{"keyholder", "mobile", "pencilbox", "stapler"};
  cli::cmd_synth(objects, cfg, root / "synth-a", sink);
  cli::cmd_synth(objects, cfg, root / "synth-b", sink);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(root / "synth-a")) {
    v.require(slurp(e.path()) == slurp(root / "synth-b" / e.path().filename()), "synth rerun differs");
    ++files;
  }
  v.require(files == 40, "synth wrote the wrong number of files");

  for (const auto& id : objects) {
    const cli::LearnInputs inputs{id, {(root / "synth-a" / (id + "_*.pgm")).string()}, std::nullopt};
    cli::cmd_learn(inputs, cfg, root / "reg-a", sink);
    cli::cmd_learn(inputs, cfg, root / "reg-b", sink);
    const std::string a = slurp(root / "reg-a" / (id + ".eig"));
    v.require(!a.empty() && a == slurp(root / "reg-b" / (id + ".eig")), "learn rerun differs");
    const Eigenspace es = load_model(a);
    v.require(load_model(save_model(es)) == es, "load(save(es)) != es");
    v.require(save_model(es) == a, "save(load(bytes)) != bytes");
  }
  v.require(slurp(root / "reg-a" / "registry.manifest") == slurp(root / "reg-b" / "registry.manifest"),
            "registry manifests differ");
  fs::remove_all(root);
  if (v.pass) v.detail = "40 synth files and 4 models identical across runs";
  return v;
}

// 7. Scaling raw, uncentered vectors by 3.
Verdict scale_invariance() {
  Verdict v;
  ProtocolConfig pc;
  pc.eigenspace.centered = false;
  pc.eigenspace.norm_mode = NormMode::Raw;
  const ProtocolData data = make_protocol_data(pc);
  const auto training = vectorize_all(data.training, NormMode::Raw);
  const auto queries = vectorize_all(data.queries, NormMode::Raw);
  ObjectRegistry plain, tripled;
  double worst = 0.0;
  for (const auto& id : pc.objects) {
    const auto views = of_object(training, id);
    std::vector<AppearanceVector> big;
    for (const auto& a : views) big.push_back(scaled(a, 3.0));
    const auto a = plain.accumulate(id, views, pc.eigenspace);
    const auto b = tripled.accumulate(id, big, pc.eigenspace);
    v.require(a->k() == b->k(), "k changed under scaling");
    for (std::size_t i = 0; i < std::min(a->k(), b->k()); ++i) {
      const double rel = std::abs(b->eigenvalues()[i] - 9.0 * a->eigenvalues()[i]) / (9.0 * a->eigenvalues()[i]);
      worst = std::max(worst, rel);
      v.require(rel <= 1e-8, "eigenvalue not scaled by 9");
    }
  }
  std::size_t changed = 0;
  for (const auto& q : queries) {
    const auto r1 = recognize(plain, q);
    const auto r3 = recognize(tripled, scaled(q, 3.0));
    changed += r1.best_object != r3.best_object || !(r1.best_view == r3.best_view);
  }
  v.require(changed == 0, "decisions changed under scaling");
  v.detail = std::to_string(changed) + " of " + std::to_string(queries.size()) +
             " decisions changed, worst eigenvalue rel err " + numfmt::real(worst, 3);
  return v;
}

// 8. r = m/P on constructed outcomes.
Verdict rate_arithmetic() {
  Verdict v;
  ObjectRegistry reg;
  EigenspaceConfig cfg;
  cfg.k_override = 1000;
  const auto views = fixtures::views("keyholder", NormMode::Unit);
  reg.accumulate("keyholder", views, cfg);
  const auto run = [&](std::size_t correct) {
    std::vector<LabeledQuery> qs;
    for (std::size_t i = 0; i < views.size(); ++i) qs.push_back({views[i], i < correct ? "keyholder" : "elsewhere"});
    return evaluate(reg, qs);
  };
  const auto all = run(10), none = run(0), nine = run(9);
  v.require(all.queries == 10 && all.successes == 10 && all.rate() == 1.0, "P=10, m=10 should give r = 1.0");
  v.require(none.successes == 0 && none.rate() == 0.0, "m=0 should give r = 0.0");
  v.require(nine.successes == 9 && nine.rate() == 0.9, "m=9, P=10 should give r = 0.9");
  v.require(report_csv(nine).find("\nP,m,r\n10,9,0.900000\n") != std::string::npos, "CSV summary wrong");
  if (v.pass) v.detail = "r = 1.0, 0.0, 0.9";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1 synthetic recognition protocol (r >= 0.90)", synthetic_protocol},
      {"AC2 eigensolver correctness", eigensolver},
      {"AC3 Gram-trick oracle equivalence", gram_equivalence},
      {"AC4 projection/reconstruction properties", projection_properties},
      {"AC5 full-rank self-recognition", self_recognition},
      {"AC6 determinism and persistence", determinism},
      {"AC7 scale invariance of decisions", scale_invariance},
      {"AC8 recognition-rate arithmetic", rate_arithmetic},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed\n" : "all criteria passed\n");
  return failures ? 1 : 0;
}

// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

// ust3d: command-line front end. Every subcommand writes a CSV table (or a
// tree file for `sample`) plus a JSON manifest describing the run.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ust3d/lerw.hpp"
#include "ust3d/probes.hpp"
#include "ust3d/resistance.hpp"
#include "ust3d/treewalk.hpp"
#include "ust3d/ust.hpp"
#include "ust3d/wilson.hpp"

#ifndef UST3D_GIT_DESCRIBE
#define UST3D_GIT_DESCRIBE "unknown"
#endif

namespace {

using namespace ust3d;
using json = nlohmann::ordered_json;

struct Common {
  std::uint64_t seed = 0;
  unsigned jobs = default_jobs();
  std::string out = "-";
  std::string manifest;
};

class Run {
 public:
  Run(std::string command, const Common& common) : common_(common), start_(Clock::now()) {
    manifest_["command"] = std::move(command);
    manifest_["seed"] = common.seed;
    manifest_["jobs"] = common.jobs;
    manifest_["version"] = std::string(UST3D_VERSION) + "+" + UST3D_GIT_DESCRIBE;
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest_["started"] = buf;
  }

  json& config() { return manifest_["config"]; }
  json& results() { return manifest_["results"]; }

  template <typename F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings_[name] = seconds_since(t0);
    } else {
      auto r = f();
      timings_[name] = seconds_since(t0);
      return r;
    }
  }

  std::ostream& out() {
    if (common_.out == "-") return std::cout;
    if (!file_) {
      file_ = std::make_unique<std::ofstream>(common_.out, std::ios::binary);
      if (!*file_) throw RuntimeFailure("cannot open output file " + common_.out);
    }
    return *file_;
  }

  void finish() {
    if (file_) {
      file_->flush();
      if (!*file_) throw RuntimeFailure("failed writing " + common_.out);
    }
    manifest_["output"] = common_.out == "-" ? "stdout" : common_.out;
    manifest_["timings_s"] = timings_;
    manifest_["wall_clock_s"] = seconds_since(start_);
    std::string path = common_.manifest;
    if (path.empty() && common_.out != "-") path = common_.out + ".json";
    if (path.empty()) {
      std::cerr << manifest_.dump(2) << "\n";
      return;
    }
    std::ofstream m(path);
    m << manifest_.dump(2) << "\n";
    if (!m) throw RuntimeFailure("cannot write manifest " + path);
  }

 private:
  using Clock = std::chrono::steady_clock;
  static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  const Common& common_;
  Clock::time_point start_;
  json manifest_;
  json timings_ = json::object();
  std::unique_ptr<std::ofstream> file_;
};

Point parse_point(const std::string& s) {
  std::istringstream is(s);
  std::int64_t v[3];
  char sep = 0;
  if (!(is >> v[0] >> sep >> v[1] >> sep >> v[2]) || !(is >> std::ws).eof())
    throw InvalidInput("expected a point as x,y,z: " + s);
  return {v[0], v[1], v[2]};
}

std::vector<Point> parse_points(const std::string& s) {
  std::vector<Point> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ';'))
    if (!item.empty()) out.push_back(parse_point(item));
  if (out.empty()) throw InvalidInput("expected at least one point");
  return out;
}

SpanningTree load_tree(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open tree file " + path);
  return read_tree(is);
}

FiniteGraph parse_graph(const std::string& name) {
  if (name == "K3") return FiniteGraph::complete(3);
  if (name == "C4") return FiniteGraph::cycle(4);
  if (name == "grid3") return FiniteGraph::grid(3, 3);
  const auto colon = name.find(':');
  if (colon == std::string::npos) throw InvalidInput("unknown graph " + name);
  const std::string kind = name.substr(0, colon);
  const std::string arg = name.substr(colon + 1);
  try {
    if (kind == "complete") return FiniteGraph::complete(std::stoi(arg));
    if (kind == "cycle") return FiniteGraph::cycle(std::stoi(arg));
    if (kind == "path") return FiniteGraph::path(std::stoi(arg));
    if (kind == "grid") {
      const auto x = arg.find('x');
      if (x == std::string::npos) throw InvalidInput("grid needs RxC");
      return FiniteGraph::grid(std::stoi(arg.substr(0, x)), std::stoi(arg.substr(x + 1)));
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const InvalidInput*>(&e)) throw;
    throw InvalidInput("bad graph size in " + name);
  }
  throw InvalidInput("unknown graph " + name);
}

std::string fmt(double v, int digits = 12) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

json fit_json(const ExponentFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed (default: $UST3D_SEED, else 0)");
  sub->add_option("--jobs", c.jobs, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output file, '-' for stdout");
  sub->add_option("--manifest", c.manifest,
                  "Manifest path (default: <out>.json, or stderr when writing to stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ust3d: uniform spanning trees and loop-erased walks on Z^3"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(UST3D_VERSION) + "+" + UST3D_GIT_DESCRIBE);
  Common common;
  std::function<void()> action;

  // sample
  UstWindowConfig window;
  std::string order = "lexicographic";
  auto* sample = app.add_subcommand("sample", "Sample a window UST; writes the tree file format");
  add_common(sample, common);
  sample->add_option("--radius,-R", window.radius, "Window half-width R")->required();
  sample->add_option("--root-factor,-K", window.root_factor, "Wired boundary at K*R (K >= 2)");
  sample->add_option("--order", order, "Vertex order")
      ->check(CLI::IsMember({"lexicographic", "spiral"}));
  sample->callback([&] {
    action = [&] {
      window.order = order == "spiral" ? VertexOrder::spiral : VertexOrder::lexicographic;
      Run run("sample", common);
      run.config() = {{"radius", window.radius}, {"root_factor", window.root_factor}, {"order", order}};
      const auto t = run.stage("sample", [&] { return sample_window_ust(window, {common.seed, 0}); });
      write_tree(run.out(), t);
      run.results() = {{"vertices", t.size()}};
      run.finish();
    };
  });

  // ball
  std::string tree_file;
  std::string point = "0,0,0";
  std::vector<std::uint64_t> radii_u;
  auto* ball = app.add_subcommand("ball", "Intrinsic ball volumes. CSV: r,volume,clipped");
  add_common(ball, common);
  ball->add_option("--tree", tree_file, "Tree file")->required();
  ball->add_option("--point", point, "Centre x,y,z");
  ball->add_option("--radii,-r", radii_u, "Radii")->required()->delimiter(',');
  ball->callback([&] {
    action = [&] {
      Run run("ball", common);
      run.config() = {{"tree", tree_file}, {"point", point}, {"radii", radii_u}};
      const auto t = run.stage("load", [&] { return load_tree(tree_file); });
      const Point x = parse_point(point);
      auto& os = run.out();
      os << "r,volume,clipped\n";
      for (auto r : radii_u) {
        const auto b = intrinsic_ball(t, x, r);
        os << r << ',' << b.volume() << ',' << (b.clipped ? 1 : 0) << '\n';
      }
      run.finish();
    };
  });

  // reff
  std::string x_str, y_str, set_str;
  auto* reff = app.add_subcommand(
      "reff", "Effective resistance on a tree. CSV: x,target,resistance (12 significant digits)");
  add_common(reff, common);
  reff->add_option("--tree", tree_file, "Tree file")->required();
  reff->add_option("--x", x_str, "Source x,y,z")->required();
  auto* y_opt = reff->add_option("--y", y_str, "Target x,y,z");
  auto* set_opt = reff->add_option("--set", set_str, "Target set x,y,z;x,y,z;...");
  y_opt->excludes(set_opt);
  reff->callback([&] {
    action = [&] {
      if (y_str.empty() == set_str.empty()) throw InvalidInput("reff needs exactly one of --y, --set");
      Run run("reff", common);
      run.config() = {{"tree", tree_file}, {"x", x_str}, {"y", y_str}, {"set", set_str}};
      const auto t = run.stage("load", [&] { return load_tree(tree_file); });
      const Point x = parse_point(x_str);
      double r = 0.0;
      std::string target = y_str.empty() ? set_str : y_str;
      if (!y_str.empty())
        r = tree_resistance(t, x, parse_point(y_str));
      else
        r = point_to_set_resistance(t, x, parse_points(set_str));
      run.out() << "x,target,resistance\n\"" << x_str << "\",\"" << target << "\"," << fmt(r) << '\n';
      run.finish();
    };
  });

  // hk
  bool exact = false, mc = false;
  std::vector<std::uint64_t> ns;
  std::uint64_t trials = 100000;
  auto* hk = app.add_subcommand("hk", "Heat kernel p_n(x,x) on a tree. CSV: n,value,stderr");
  add_common(hk, common);
  hk->add_option("--tree", tree_file, "Tree file")->required();
  hk->add_option("--point", point, "Vertex x,y,z");
  hk->add_option("--n", ns, "Step counts")->required()->delimiter(',');
  auto* ex = hk->add_flag("--exact", exact, "Exact distribution iteration");
  auto* mo = hk->add_flag("--mc", mc, "Monte Carlo walkers");
  ex->excludes(mo);
  hk->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  hk->callback([&] {
    action = [&] {
      if (!exact && !mc) exact = true;
      Run run("hk", common);
      run.config() = {{"tree", tree_file}, {"point", point}, {"n", ns},
                      {"method", exact ? "exact" : "mc"}, {"trials", trials}};
      const auto t = run.stage("load", [&] { return load_tree(tree_file); });
      const Point x = parse_point(point);
      auto& os = run.out();
      os << "n,value,stderr\n";
      for (auto n : ns) {
        const auto e = exact ? heat_kernel_exact(t, x, n)
                             : heat_kernel_mc(t, x, n, trials, RngConfig{common.seed, 0}.child(n),
                                              common.jobs);
        os << n << ',' << fmt(e.value) << ',' << fmt(e.std_error) << '\n';
      }
      run.finish();
    };
  });

  // beta
  std::vector<std::int64_t> radii_i;
  std::uint64_t beta_trials = 1000;
  auto* beta = app.add_subcommand("beta", "LERW growth exponent. CSV: n,mean,stderr,trials");
  add_common(beta, common);
  beta->add_option("--radii", radii_i, "Exit radii, increasing")->required()->delimiter(',');
  beta->add_option("--trials", beta_trials, "Walks per radius")->check(CLI::PositiveNumber);
  beta->callback([&] {
    action = [&] {
      Run run("beta", common);
      run.config() = {{"radii", radii_i}, {"trials", beta_trials}};
      const auto est = run.stage("sample", [&] {
        return estimate_beta(radii_i, beta_trials, {common.seed, 0}, common.jobs);
      });
      auto& os = run.out();
      os << "n,mean,stderr,trials\n";
      for (const auto& r : est.rows)
        os << r.n << ',' << fmt(r.mean) << ',' << fmt(r.std_error) << ',' << r.trials << '\n';
      run.results() = fit_json(est.fit);
      run.finish();
    };
  });

  // tails
  std::int64_t tail_n = 128;
  std::uint64_t tail_trials = 10000;
  std::vector<double> kappas{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  auto* tails = app.add_subcommand("tails", "Tails of M_n / E M_n. CSV: kappa,upper_freq,lower_freq");
  add_common(tails, common);
  tails->add_option("--n", tail_n, "Exit radius")->check(CLI::PositiveNumber);
  tails->add_option("--trials", tail_trials, "Walks")->check(CLI::PositiveNumber);
  tails->add_option("--kappa", kappas, "Kappa grid, increasing, >= 1")->delimiter(',');
  tails->callback([&] {
    action = [&] {
      Run run("tails", common);
      run.config() = {{"n", tail_n}, {"trials", tail_trials}, {"kappa", kappas}};
      const auto prof = run.stage("sample", [&] {
        return tail_profile(tail_n, tail_trials, kappas, {common.seed, 0}, common.jobs);
      });
      auto& os = run.out();
      os << "kappa,upper_freq,lower_freq\n";
      for (const auto& r : prof.rows)
        os << fmt(r.kappa) << ',' << fmt(r.upper_freq) << ',' << fmt(r.lower_freq) << '\n';
      run.results() = {{"mean", prof.mean}, {"upper_tail_fit", fit_json(upper_tail_fit(prof))}};
      run.finish();
    };
  });

  // uniformity
  std::string graph_name = "K3";
  std::uint64_t uni_samples = 100000;
  auto* uni = app.add_subcommand(
      "uniformity", "Wilson sampler vs uniform law. CSV: tree,count,expected");
  add_common(uni, common);
  uni->add_option("--graph", graph_name, "K3, C4, grid3, complete:N, cycle:N, path:N, grid:RxC");
  uni->add_option("--samples", uni_samples, "Samples")->check(CLI::PositiveNumber);
  uni->callback([&] {
    action = [&] {
      Run run("uniformity", common);
      run.config() = {{"graph", graph_name}, {"samples", uni_samples}};
      const FiniteGraph g = parse_graph(graph_name);
      const BigInt count = matrix_tree_count(g);
      if (count > 100000) throw InvalidInput("graph has too many spanning trees for a table");
      std::map<std::vector<int>, std::uint64_t> seen;
      run.stage("sample", [&] {
        const RngConfig base{common.seed, 0};
        const auto trees = parallel_map(uni_samples, common.jobs, [&](std::size_t i) {
          return wilson_finite(g, 0, base.child(i)).edge_ids(g);
        });
        for (const auto& t : trees) ++seen[t];
      });
      const auto total = count.convert_to<std::uint64_t>();
      std::vector<std::uint64_t> counts;
      for (const auto& [k, v] : seen) counts.push_back(v);
      counts.resize(total, 0);
      const auto chi = chi_square_uniform(counts);
      auto& os = run.out();
      os << "tree,count,expected\n";
      const double expected = static_cast<double>(uni_samples) / static_cast<double>(total);
      for (const auto& [k, v] : seen) {
        os << '"';
        for (std::size_t i = 0; i < k.size(); ++i) os << (i ? " " : "") << k[i];
        os << "\"," << v << ',' << fmt(expected) << '\n';
      }
      run.results() = {{"spanning_trees", total}, {"distinct_seen", seen.size()},
                       {"chi_square", chi.statistic}, {"dof", chi.degrees_of_freedom}, {"p_value", chi.p_value}};
      run.finish();
    };
  });

  // spiral
  int spiral_n = 2;
  std::int64_t spiral_m = 64;
  auto* spiral = app.add_subcommand("spiral", "Spiral box sequence. CSV: index,shell,x,y,z");
  add_common(spiral, common);
  spiral->add_option("--N", spiral_n, "Scale N")->check(CLI::PositiveNumber);
  spiral->add_option("--m", spiral_m, "Box side m")->check(CLI::PositiveNumber);
  spiral->callback([&] {
    action = [&] {
      Run run("spiral", common);
      run.config() = {{"N", spiral_n}, {"m", spiral_m}};
      const auto seq = spiral_box_sequence(spiral_n, spiral_m);
      auto& os = run.out();
      os << "index,shell,x,y,z\n";
      for (std::size_t i = 0; i < seq.size(); ++i)
        os << i << ',' << seq.shell[i] << ',' << seq.centers[i].x << ',' << seq.centers[i].y << ','
           << seq.centers[i].z << '\n';
      run.results() = {{"boxes", seq.size()}};
      run.finish();
    };
  });

  // tube-events
  double tube_n = 2.0;
  std::int64_t tube_m = 64;
  std::uint64_t tube_trials = 100;
  bool a1_only = false;
  TubeEventParams tube_params;
  auto* tube = app.add_subcommand(
      "tube-events",
      "Tube events along walks from the origin. CSV: trial,j,A,B,E,F,lambda_length,hit_prob,"
      "hit_stderr; with --a1: N,m,trials,hits,freq,stderr");
  add_common(tube, common);
  tube->add_option("--N", tube_n, "Scale N (q = m/N^2)");
  tube->add_option("--m", tube_m, "Box side m (even)");
  tube->add_option("--trials", tube_trials, "Walks")->check(CLI::PositiveNumber);
  tube->add_option("--boxes", tube_params.boxes, "Boxes 0..boxes are examined");
  tube->add_option("--C", tube_params.c, "Length constant");
  tube->add_option("--eta", tube_params.eta, "Hittability threshold");
  tube->add_option("--hit-trials", tube_params.hit_trials, "Walks per hittability estimate");
  tube->add_option("--beta", tube_params.beta, "Growth exponent used in C m^beta");
  tube->add_flag("--a1", a1_only, "Only estimate P(A_1) from the centre of the inner face");
  tube->callback([&] {
    action = [&] {
      Run run("tube-events", common);
      run.config() = {{"N", tube_n}, {"m", tube_m}, {"trials", tube_trials},
                      {"boxes", tube_params.boxes}, {"C", tube_params.c}, {"eta", tube_params.eta},
                      {"hit_trials", tube_params.hit_trials}, {"beta", tube_params.beta},
                      {"a1", a1_only}};
      const TubeGeometry g(tube_m, tube_n);
      auto& os = run.out();
      const RngConfig base{common.seed, 0};
      if (a1_only) {
        const auto est = run.stage("sample", [&] { return a1_frequency(g, tube_trials, base, common.jobs); });
        os << "N,m,trials,hits,freq,stderr\n"
           << fmt(tube_n) << ',' << tube_m << ',' << est.trials << ',' << est.hits << ','
           << fmt(est.freq) << ',' << fmt(est.std_error) << '\n';
      } else {
        const auto flags = run.stage("sample", [&] {
          return parallel_map(tube_trials, common.jobs, [&](std::size_t i) {
            const auto cfg = base.child(i);
            return tube_event_check(tube_walk(g, tube_params.boxes, cfg.child(0)), g, tube_params,
                                    cfg.child(1));
          });
        });
        os << "trial,j,A,B,E,F,lambda_length,hit_prob,hit_stderr\n";
        for (std::size_t i = 0; i < flags.size(); ++i)
          for (const auto& b : flags[i].boxes)
            os << i << ',' << b.j << ',' << to_string(b.a) << ',' << to_string(b.b) << ','
               << to_string(b.e) << ',' << to_string(b.f) << ',' << b.lambda_length << ','
               << fmt(b.hit_probability) << ',' << fmt(b.hit_std_error) << '\n';
      }
      run.finish();
    };
  });

  // vol-scaling
  SampleTreeConfig tree_cfg;
  std::uint64_t scaling_samples = 200;
  auto* vol = app.add_subcommand(
      "vol-scaling", "Intrinsic ball volume scaling. CSV: r,used,clipped,median,mean,q10,q90");
  add_common(vol, common);
  vol->add_option("--window,-R", tree_cfg.window, "Window half-width R")->check(CLI::PositiveNumber);
  vol->add_option("--root-factor,-K", tree_cfg.root_factor, "Wired boundary at K*R");
  vol->add_option("--radii", radii_u, "Intrinsic radii, increasing")->required()->delimiter(',');
  vol->add_option("--samples", scaling_samples, "Tree samples")->check(CLI::PositiveNumber);
  vol->callback([&] {
    action = [&] {
      if (tree_cfg.root_factor < 2) throw InvalidInput("root factor K must be >= 2");
      Run run("vol-scaling", common);
      run.config() = {{"window", tree_cfg.window}, {"root_factor", tree_cfg.root_factor},
                      {"radii", radii_u}, {"samples", scaling_samples}};
      const auto res = run.stage("sample", [&] {
        return volume_scaling_experiment(radii_u, scaling_samples, tree_cfg, {common.seed, 0},
                                         common.jobs);
      });
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      auto& os = run.out();
      os << "r,used,clipped,median,mean,q10,q90\n";
      for (const auto& r : res.rows)
        os << r.r << ',' << r.used << ',' << r.clipped << ',' << fmt(r.median) << ','
           << fmt(r.mean) << ',' << fmt(r.q10) << ',' << fmt(r.q90) << '\n';
      run.results() = {{"fit", fit_json(res.fit)}, {"warnings", res.warnings}};
      run.finish();
    };
  });

  // hk-scaling
  double hk_beta = kDefaultBeta;
  auto* hks = app.add_subcommand(
      "hk-scaling",
      "Return probability p_2n(0,0) scaling. CSV: n,median,mean,normalized_mean,"
      "normalized_variance,max_gap");
  add_common(hks, common);
  hks->add_option("--window,-R", tree_cfg.window, "Window half-width R")->check(CLI::PositiveNumber);
  hks->add_option("--root-factor,-K", tree_cfg.root_factor, "Wired boundary at K*R");
  hks->add_option("--n", ns, "Half step counts n, increasing")->required()->delimiter(',');
  hks->add_option("--samples", scaling_samples, "Tree samples")->check(CLI::PositiveNumber);
  hks->add_option("--beta", hk_beta, "Growth exponent used for normalization");
  hks->callback([&] {
    action = [&] {
      if (tree_cfg.root_factor < 2) throw InvalidInput("root factor K must be >= 2");
      Run run("hk-scaling", common);
      run.config() = {{"window", tree_cfg.window}, {"root_factor", tree_cfg.root_factor},
                      {"n", ns}, {"samples", scaling_samples}, {"beta", hk_beta}};
      const auto res = run.stage("sample", [&] {
        return heat_kernel_scaling_experiment(ns, scaling_samples, tree_cfg, {common.seed, 0},
                                              common.jobs, hk_beta);
      });
      auto& os = run.out();
      os << "n,median,mean,normalized_mean,normalized_variance,max_gap\n";
      for (const auto& r : res.rows)
        os << r.n << ',' << fmt(r.median) << ',' << fmt(r.mean) << ',' << fmt(r.normalized_mean)
           << ',' << fmt(r.normalized_variance) << ',' << fmt(r.max_gap) << '\n';
      run.results() = {{"fit", fit_json(res.fit)}, {"beta", res.beta}};
      run.finish();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (const char* env = std::getenv("UST3D_SEED"); env && app.get_subcommands().front()->count("--seed") == 0) {
    try {
      std::size_t used = 0;
      common.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      std::cerr << "error: UST3D_SEED is not an unsigned integer\n";
      return 1;
    }
  }

  try {
    action();
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

// Runs every acceptance criterion and prints one PASS/FAIL line each.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "cli.hpp"
#include "selfieboost/baselines.hpp"
#include "selfieboost/boost.hpp"
#include "selfieboost/data.hpp"
#include "selfieboost/nnet.hpp"
#include "selfieboost/rng.hpp"
#include "selfieboost/sampling.hpp"
#include "selfieboost/verify.hpp"

using namespace selfieboost;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size() + 1;
  return line.substr(start, line.find_first_of(" \n", start) - start);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    for (std::string cell; std::getline(cs, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "selfieboost_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

// The desk-scale run: data and learner settings of criterion 4.
const std::string& criterion4_data() {
  static const std::string path = [] {
    const auto r = cli_run({"gen-data", "--m", "2000", "--d", "10", "--teacher-hidden", "4", "--tau", "0.1", "--seed",
                            "42", "--out", p("c4.csv"), "--teacher-out", p("c4_teacher.json")});
    if (r.code != 0) throw std::runtime_error("gen-data failed: " + r.err);
    return p("c4.csv");
  }();
  return path;
}

std::vector<std::string> criterion4_flags(const std::string& sub) {
  return {sub,     "--data",      criterion4_data(), "--hidden", "32",    "--rho",   "0.1",  "--n",
          "256",   "--sgd-steps", "500",             "--lr",     "0.05",  "--batch", "32",   "--T",
          "50",    "--init-scale", "0",              "--seed",   "42"};
}

std::vector<std::string> with(std::vector<std::string> args, const std::vector<std::string>& extra) {
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const SuiteResult r = grad_suite(1, 10);
  return {r.pass && r.instances == 20 && r.worst <= 1e-6,
          fmt::format("{} nets, worst relative error {:.3g}", r.instances, r.worst)};
}

Outcome lse_inequality() {
  const SuiteResult r = lse_suite(1, 10000);
  const SuiteResult d = lse_descent_suite(1, 10000);
  return {r.pass, fmt::format("{} pairs, worst deficit {:.3g} (lambda <= theta only: worst {:.3g}, {})", r.instances,
                              r.worst, d.worst, d.pass ? "holds" : "fails")};
}

Outcome lemma_oracle() {
  const SuiteResult r = lemma_suite(1, 100);
  return {r.pass && r.instances == 100 && r.worst <= 1e-12,
          fmt::format("{} states, worst |edge + 1/2| or |max diff - 1| = {:.3g}", r.instances, r.worst)};
}

Outcome theorem_end_to_end() {
  const auto run = cli_run(with(criterion4_flags("train"), {"--out-model", p("c4_model.json"), "--metrics",
                                                            p("c4_metrics.csv")}));
  const std::string stop = field(run.out, "stop_reason");
  if (run.code != 0 && run.code != 4) return {false, fmt::format("train exited {}: {}", run.code, run.err)};
  if ((run.code == 4) != (stop == "no_candidate_found")) return {false, "exit code does not match " + stop};

  const auto records = metrics_from_csv(slurp(p("c4_metrics.csv")));
  const Dataset data = load_csv(criterion4_data());
  const double rho = 0.1;
  const double m = static_cast<double>(data.size());
  const double l1 = std::stod(field(run.out, "initial_potential"));
  if (std::abs(l1 - std::log(m)) > 1e-12) return {false, fmt::format("L(f_1) = {} is not log m", l1)};

  double worst_a = INFINITY;
  double worst_c = -INFINITY;
  bool a = true, c = true;
  for (const auto& r : records) {
    worst_a = std::min(worst_a, (r.potential_before - rho + 1e-9) - r.potential_after);
    a = a && r.potential_after <= r.potential_before - rho + 1e-9;
    worst_c = std::max(worst_c, (r.potential_after - r.potential_before) - r.edge);
    c = c && r.potential_after - r.potential_before <= r.edge + 1e-9;
  }
  const auto k = records.size();
  const double err = error_rate(load_model(p("c4_model.json")), data);
  const double bound = std::exp(-rho * static_cast<double>(k));
  const bool b = err <= bound + 1e-12;
  const bool recorded = records.empty() || records.back().train_err == err;
  return {a && b && c && recorded,
          fmt::format("stop={} accepted={} err={} bound={:.4g}; (a) min slack {:.4g} (b) {} (c) max excess {:.3g}",
                      stop, k, err, bound, worst_a, b ? "ok" : "violated", worst_c)};
}

Outcome iteration_count() {
  const auto a = iteration_count_for(0.01, 0.1);
  const auto b = iteration_count_for(std::exp(-1.0), 0.1);
  return {a == 47 && b == 10, fmt::format("T(0.01, 0.1) = {}, T(1/e, 0.1) = {}", a, b)};
}

Outcome sampler_calibration() {
  const std::size_t draws = 1000000;
  const std::vector<double> probs{0.25, 0.25, 0.5};
  SeededRng rng(42);
  const auto idx = sample_indices(build_alias(probs), draws, rng);
  std::vector<double> freq(3, 0.0);
  for (auto i : idx) freq[i] += 1.0 / static_cast<double>(draws);
  double worst_freq = 0.0;
  for (std::size_t i = 0; i < 3; ++i) worst_freq = std::max(worst_freq, std::abs(freq[i] - probs[i]));

  // Random 100-bin distribution, 10^6 draws, Pearson chi-square.
  SeededRng gen(derive_seed(42, Stream::kVerify, 100));
  std::vector<double> bins(100);
  double total = 0.0;
  for (double& w : bins) total += (w = 0.05 + gen.uniform());
  for (double& w : bins) w /= total;
  SeededRng draw(derive_seed(42, Stream::kVerify, 101));
  std::vector<double> counts(100, 0.0);
  for (auto i : sample_indices(build_alias(bins), draws, draw)) counts[i] += 1.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double expected = bins[i] * static_cast<double>(draws);
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  const double critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(99.0), 1e-6));
  const bool ok = worst_freq <= 0.005 && chi2 <= critical;
  return {ok, fmt::format("freq ({:.4f}, {:.4f}, {:.4f}), max dev {:.4f}; chi2 = {:.1f} vs critical {:.1f} (df 99)",
                          freq[0], freq[1], freq[2], worst_freq, chi2, critical)};
}

// AdaBoost run plus compare table for one weak-learner budget.
Outcome adaboost_run(const std::string& tag, const std::vector<std::string>& extra) {
  const auto ada = cli_run(with(with(criterion4_flags("train"), extra),
                                {"--algo", "adaboost", "--out-model", p(tag + ".json"), "--metrics", p(tag + ".csv")}));
  if (ada.code != 0) return {false, fmt::format("adaboost exited {}: {}", ada.code, ada.err)};
  double bound = 1.0;
  const auto rows = csv_rows(slurp(p(tag + ".csv")));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double eps = std::stod(rows[r][1]);
    if (rows[r][3] == "1") bound *= 2.0 * std::sqrt(eps * (1.0 - eps));
  }
  const Dataset data = load_csv(criterion4_data());
  const EnsembleModel model = load_ensemble(p(tag + ".json"));
  const double err = static_cast<double>(ensemble_mistakes(model, data)) / static_cast<double>(data.size());
  const bool bound_ok = err <= bound + 1e-9;

  const auto cmp = cli_run(with(criterion4_flags("compare"), extra));
  if (cmp.code != 0) return {false, fmt::format("compare exited {}: {}", cmp.code, cmp.err)};
  const auto table = csv_rows(cmp.out);
  const bool shape = table.size() == 3 && table[1].size() == 5 && table[2].size() == 5 && table[1][0] == "selfieboost" &&
                     table[2][0] == "adaboost";
  const bool costs = shape && table[1][3] == "1" && table[2][3] == std::to_string(model.members.size());
  return {bound_ok && costs, fmt::format("{}: err {} <= bound {:.4g} {}, evals per prediction {} vs {}", tag, err,
                                         bound, bound_ok ? "yes" : "NO", shape ? table[2][3] : "?",
                                         shape ? table[1][3] : "?")};
}

Outcome adaboost_consistency() {
  // Weak learners get the same SGD settings as one SelfieBoost iteration;
  // a second run uses 8 steps, about what an accepted iteration consumes.
  const Outcome matched = adaboost_run("c7_matched", {});
  const Outcome weak = adaboost_run("c7_weak8", {"--weak-steps", "8"});
  return {matched.pass && weak.pass, matched.detail + "; " + weak.detail};
}

Outcome determinism() {
  const auto base = criterion4_flags("train");
  const auto a = cli_run(with(base, {"--metrics", p("c8_a.csv"), "--out-model", p("c8_a.json")}));
  const auto b = cli_run(with(base, {"--metrics", p("c8_b.csv"), "--out-model", p("c8_b.json")}));
  const auto t = cli_run(with(base, {"--metrics", p("c8_t4.csv"), "--out-model", p("c8_t4.json"), "--threads", "4"}));
  const std::string ma = slurp(p("c8_a.csv"));
  const bool repeat = ma == slurp(p("c8_b.csv")) && slurp(p("c8_a.json")) == slurp(p("c8_b.json"));
  const bool threads = ma == slurp(p("c8_t4.csv")) && slurp(p("c8_a.json")) == slurp(p("c8_t4.json"));
  const bool codes = a.code == b.code && a.code == t.code && (a.code == 0 || a.code == 4);
  return {repeat && threads && codes && !ma.empty(),
          fmt::format("repeat identical: {}; --threads 4 identical: {}; metrics {} bytes", repeat ? "yes" : "no",
                      threads ? "yes" : "no", ma.size())};
}

Outcome widening() {
  const auto net = init_network(NetworkArchitecture(10, {32}), derive_seed(9, Stream::kLearnerInit), 1.0);
  const auto wide = widen(net, 8, derive_seed(9, Stream::kWiden));
  SeededRng rng(9);
  std::size_t differing = 0;
  std::vector<double> x(10);
  for (int k = 0; k < 1000; ++k) {
    for (double& v : x) v = rng.normal();
    const double a = forward(net, x), b = forward(wide, x);
    if (std::memcmp(&a, &b, sizeof a) != 0) ++differing;
  }
  const bool grew = wide.parameter_count() == net.parameter_count() + 8 * (10 + 1) + 8;
  return {differing == 0 && grew,
          fmt::format("1000 inputs, {} differ; parameters {} -> {}", differing, net.parameter_count(),
                      wide.parameter_count())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 gradient fidelity", gradient_fidelity},
      {"2 log-sum-exp inequality", lse_inequality},
      {"3 lemma oracle step", lemma_oracle},
      {"4 end-to-end convergence bound", theorem_end_to_end},
      {"5 iteration-count formula", iteration_count},
      {"6 sampler calibration", sampler_calibration},
      {"7 adaboost self-consistency", adaboost_consistency},
      {"8 determinism", determinism},
      {"9 function-preserving widening", widening},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "selfieboost/baselines.hpp"
#include "selfieboost/data.hpp"
#include "selfieboost/error.hpp"
#include "selfieboost/verify.hpp"

namespace selfieboost::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Strict config parsing

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw UsageError(fmt::format("config: unknown key '{}{}'", where, key));
  }
}

template <typename T>
T get_number(const json& v, const std::string& key) {
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw UsageError(fmt::format("config: '{}' must be a number", key));
  } else {
    if (!v.is_number_unsigned()) throw UsageError(fmt::format("config: '{}' must be a non-negative integer", key));
  }
  return v.get<T>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw UsageError(fmt::format("config: '{}' must be a string", key));
  return v.get<std::string>();
}

std::vector<std::size_t> parse_hidden(std::string_view text) {
  std::vector<std::size_t> widths;
  if (text.empty() || text == "none") return widths;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string part(text.substr(start, comma - start));
    std::size_t pos = 0;
    unsigned long long w = 0;
    try {
      w = std::stoull(part, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != part.size() || part.empty() || w == 0) {
      throw UsageError(fmt::format("hidden layer width '{}' is not a positive integer", part));
    }
    widths.push_back(static_cast<std::size_t>(w));
    start = comma + 1;
  }
  return widths;
}

Activation parse_activation(const std::string& name) {
  try {
    return activation_from_string(name);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("config: malformed JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  reject_unknown(doc,
                 {"algo", "data_path", "out_model", "metrics_path", "threads", "rho", "T", "n", "sgd", "retry", "seed",
                  "init_scale", "hidden_layers", "activation", "weak_steps"},
                 "");

  ExperimentConfig cfg;
  BoostConfig& b = cfg.boost;
  for (const auto& [key, v] : doc.items()) {
    if (key == "algo") {
      cfg.algo = get_string(v, key);
    } else if (key == "data_path") {
      cfg.data_path = get_string(v, key);
    } else if (key == "out_model") {
      cfg.out_model = get_string(v, key);
    } else if (key == "metrics_path") {
      cfg.metrics_path = get_string(v, key);
    } else if (key == "threads") {
      b.threads = get_number<unsigned>(v, key);
    } else if (key == "rho") {
      b.rho = get_number<double>(v, key);
    } else if (key == "T") {
      b.T = get_number<std::size_t>(v, key);
    } else if (key == "n") {
      if (!v.is_null()) b.n = get_number<std::size_t>(v, key);
    } else if (key == "seed") {
      b.seed = get_number<std::uint64_t>(v, key);
    } else if (key == "init_scale") {
      b.init_scale = get_number<double>(v, key);
    } else if (key == "weak_steps") {
      if (!v.is_null()) cfg.weak_steps = get_number<std::size_t>(v, key);
    } else if (key == "activation") {
      b.activation = parse_activation(get_string(v, key));
    } else if (key == "hidden_layers") {
      if (!v.is_array()) throw UsageError("config: 'hidden_layers' must be an array");
      b.hidden.clear();
      for (const auto& w : v) b.hidden.push_back(get_number<std::size_t>(w, "hidden_layers[]"));
    } else if (key == "sgd") {
      if (!v.is_object()) throw UsageError("config: 'sgd' must be an object");
      reject_unknown(v, {"steps", "lr", "batch", "checkpoints"}, "sgd.");
      if (v.contains("steps")) b.sgd.steps = get_number<std::size_t>(v["steps"], "sgd.steps");
      if (v.contains("lr")) b.sgd.lr = get_number<double>(v["lr"], "sgd.lr");
      if (v.contains("batch")) b.sgd.batch = get_number<std::size_t>(v["batch"], "sgd.batch");
      if (v.contains("checkpoints")) {
        if (!v["checkpoints"].is_boolean()) throw UsageError("config: 'sgd.checkpoints' must be a boolean");
        b.sgd.checkpoints = v["checkpoints"].get<bool>();
      }
    } else if (key == "retry") {
      if (!v.is_object()) throw UsageError("config: 'retry' must be an object");
      reject_unknown(v, {"max_retries", "sgd_growth", "widen_units", "lr_shrink"}, "retry.");
      auto& r = b.retry;
      if (v.contains("max_retries")) r.max_retries = get_number<std::size_t>(v["max_retries"], "retry.max_retries");
      if (v.contains("sgd_growth")) r.sgd_growth = get_number<double>(v["sgd_growth"], "retry.sgd_growth");
      if (v.contains("widen_units")) r.widen_units = get_number<std::size_t>(v["widen_units"], "retry.widen_units");
      if (v.contains("lr_shrink")) r.lr_shrink = get_number<double>(v["lr_shrink"], "retry.lr_shrink");
    }
  }
  return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// Flags shared by train and compare

struct TrainFlags {
  std::string config_path;
  std::string algo, data, out_model, metrics, hidden, activation;
  unsigned threads = 1;
  double rho = 0, lr = 0, sgd_growth = 0, lr_shrink = 0, init_scale = 0;
  std::size_t T = 0, n = 0, steps = 0, batch = 0, max_retries = 0, widen_units = 0, weak_steps = 0;
  std::uint64_t seed = 0;
  bool timing = false;
  bool no_checkpoints = false;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> overrides;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  auto over = [&](CLI::Option* opt, std::function<void(ExperimentConfig&)> apply) {
    f.overrides.emplace_back(opt, std::move(apply));
  };
  cmd->add_option("--config", f.config_path, "JSON experiment config; flags below override it");
  over(cmd->add_option("--algo", f.algo, "selfieboost | adaboost | sgd (default selfieboost)"),
       [&](ExperimentConfig& c) { c.algo = f.algo; });
  over(cmd->add_option("--data", f.data, "dataset CSV"), [&](ExperimentConfig& c) { c.data_path = f.data; });
  over(cmd->add_option("--out-model", f.out_model, "model file to write"),
       [&](ExperimentConfig& c) { c.out_model = f.out_model; });
  over(cmd->add_option("--metrics", f.metrics, "metrics CSV to write"),
       [&](ExperimentConfig& c) { c.metrics_path = f.metrics; });
  over(cmd->add_option("--threads", f.threads, "workers for full-dataset sweeps (default 1)"),
       [&](ExperimentConfig& c) { c.boost.threads = f.threads; });
  over(cmd->add_option("--rho", f.rho, "edge parameter in (0, 0.25) (default 0.1)"),
       [&](ExperimentConfig& c) { c.boost.rho = f.rho; });
  over(cmd->add_option("--T", f.T, "boosting iterations (default 50)"), [&](ExperimentConfig& c) { c.boost.T = f.T; });
  over(cmd->add_option("--n", f.n, "working-set size (default min(m, 256))"),
       [&](ExperimentConfig& c) { c.boost.n = f.n; });
  over(cmd->add_option("--sgd-steps", f.steps, "inner SGD steps (default 500)"),
       [&](ExperimentConfig& c) { c.boost.sgd.steps = f.steps; });
  over(cmd->add_option("--lr", f.lr, "inner SGD learning rate (default 0.05)"),
       [&](ExperimentConfig& c) { c.boost.sgd.lr = f.lr; });
  over(cmd->add_option("--batch", f.batch, "inner SGD minibatch (default 32)"),
       [&](ExperimentConfig& c) { c.boost.sgd.batch = f.batch; });
  over(cmd->add_option("--max-retries", f.max_retries, "retries per iteration (default 5)"),
       [&](ExperimentConfig& c) { c.boost.retry.max_retries = f.max_retries; });
  over(cmd->add_option("--sgd-growth", f.sgd_growth, "SGD step multiplier per retry (default 2)"),
       [&](ExperimentConfig& c) { c.boost.retry.sgd_growth = f.sgd_growth; });
  over(cmd->add_option("--widen-units", f.widen_units, "hidden units added per retry (default 0)"),
       [&](ExperimentConfig& c) { c.boost.retry.widen_units = f.widen_units; });
  over(cmd->add_option("--lr-shrink", f.lr_shrink, "lr multiplier after a clip violation (default 0.5)"),
       [&](ExperimentConfig& c) { c.boost.retry.lr_shrink = f.lr_shrink; });
  over(cmd->add_option("--seed", f.seed, "run seed (default 0)"), [&](ExperimentConfig& c) { c.boost.seed = f.seed; });
  over(cmd->add_option("--init-scale", f.init_scale, "output-layer scale of f_1; 0 gives f_1 == 0 (default 0)"),
       [&](ExperimentConfig& c) { c.boost.init_scale = f.init_scale; });
  over(cmd->add_option("--hidden", f.hidden, "hidden widths, e.g. 32 or 32,16; 'none' for linear (default 32)"),
       [&](ExperimentConfig& c) { c.boost.hidden = parse_hidden(f.hidden); });
  over(cmd->add_option("--activation", f.activation, "tanh | relu (default tanh)"),
       [&](ExperimentConfig& c) { c.boost.activation = parse_activation(f.activation); });
  over(cmd->add_flag("--no-checkpoints", f.no_checkpoints, "test only the final SGD iterate of each attempt"),
       [&](ExperimentConfig& c) { c.boost.sgd.checkpoints = false; });
  over(cmd->add_option("--weak-steps", f.weak_steps, "SGD steps per adaboost weak learner (default: --sgd-steps)"),
       [&](ExperimentConfig& c) { c.weak_steps = f.weak_steps; });
  cmd->add_flag("--timing", f.timing, "record wall-clock times (outputs are then not reproducible)");
}

ExperimentConfig resolve_config(const TrainFlags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", f.config_path));
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse_experiment_config(ss.str());
  }
  for (const auto& [opt, apply] : f.overrides) {
    if (opt->count() > 0) apply(cfg);
  }
  if (cfg.algo != "selfieboost" && cfg.algo != "adaboost" && cfg.algo != "sgd") {
    throw UsageError(fmt::format("unknown algo '{}'", cfg.algo));
  }
  try {
    cfg.boost.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (cfg.data_path.empty()) throw UsageError("no dataset given (--data or data_path)");
  return cfg;
}

WeakLearnerConfig weak_config_for(const ExperimentConfig& cfg, std::size_t m) {
  WeakLearnerConfig weak;
  weak.hidden = cfg.boost.hidden;
  weak.activation = cfg.boost.activation;
  weak.sgd = cfg.boost.sgd;
  if (cfg.weak_steps) weak.sgd.steps = *cfg.weak_steps;
  weak.n = cfg.boost.working_set_size(m);
  return weak;
}

std::string adaboost_metrics_csv(const AdaBoostResult& r) {
  std::string out = "round,weighted_error,alpha,kept,ensemble_train_err\n";
  for (const auto& x : r.rounds) {
    out += fmt::format("{},{:.17g},{:.17g},{},{:.17g}\n", x.round, x.weighted_error, x.alpha, x.kept ? 1 : 0,
                       x.ensemble_train_err);
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing '{}'", path));
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------------------
// Subcommands

struct GenFlags {
  std::size_t m = 0, d = 0;
  std::uint64_t seed = 0;
  std::string out, teacher_out, teacher_hidden = "4", activation = "tanh";
  double tau = 0.1;
};

int cmd_gen_data(const GenFlags& f, std::ostream& out) {
  TeacherSpec spec;
  spec.hidden = parse_hidden(f.teacher_hidden);
  spec.activation = parse_activation(f.activation);
  spec.tau = f.tau;
  spec.seed = f.seed;
  if (f.m == 0 || f.d == 0) throw UsageError("--m and --d must be positive");
  if (!(f.tau > 0.0)) throw UsageError("--tau must be positive");

  RealizableData gen = gen_realizable(f.m, f.d, spec);
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gen.data.size(); ++i) {
    min_margin = std::min(min_margin, gen.data.y(i) * forward(gen.teacher, gen.data.x(i)));
  }
  save_csv(gen.data, f.out);
  save_model(gen.teacher, f.teacher_out);
  out << fmt::format("m={} d={} min_margin={:.17g} rejected={}\n", gen.data.size(), gen.data.dim(), min_margin,
                     gen.rejected);
  return exit_code::kOk;
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f);
  const Dataset data = load_csv(cfg.data_path);
  const auto& b = cfg.boost;

  if (cfg.algo == "selfieboost") {
    const TrainResult r = run_selfieboost(data, b);
    if (!cfg.out_model.empty()) save_model(r.final_net, cfg.out_model);
    if (!cfg.metrics_path.empty()) write_file(cfg.metrics_path, metrics_csv(r.records, f.timing));
    const std::size_t final_mistakes = r.records.empty() ? r.initial_mistakes : r.records.back().mistakes;
    out << fmt::format("stop_reason={} accepted={} m={} initial_potential={:.17g} final_err={:.17g}\n",
                       to_string(r.stop_reason), r.accepted_count, r.m, r.initial_potential,
                       static_cast<double>(final_mistakes) / static_cast<double>(r.m));
    return r.stop_reason == StopReason::kNoCandidateFound ? exit_code::kBoostBreak : exit_code::kOk;
  }

  if (cfg.algo == "adaboost") {
    if (b.T == 0) throw UsageError("adaboost needs T >= 1");
    const AdaBoostResult r = run_adaboost(data, weak_config_for(cfg, data.size()), b.T, b.seed, b.threads);
    if (!cfg.out_model.empty()) save_ensemble(r.model, cfg.out_model);
    if (!cfg.metrics_path.empty()) write_file(cfg.metrics_path, adaboost_metrics_csv(r));
    out << fmt::format("members={} final_err={:.17g} bound={:.17g}\n", r.model.members.size(), r.final_train_err(),
                       r.training_error_bound());
    return exit_code::kOk;
  }

  // Plain SGD gets the same total step budget as T boosting iterations.
  const NetworkArchitecture arch(data.dim(), b.hidden, b.activation);
  const PlainSgdResult r = run_plain_sgd(data, arch, b.sgd.steps * b.T, b.sgd.lr, b.sgd.batch, b.seed);
  if (!cfg.out_model.empty()) save_model(r.net, cfg.out_model);
  if (!cfg.metrics_path.empty()) {
    std::string csv = "step,train_err\n";
    for (std::size_t k = 0; k < r.train_err.size(); ++k) csv += fmt::format("{},{:.17g}\n", k * 100, r.train_err[k]);
    write_file(cfg.metrics_path, csv);
  }
  out << fmt::format("final_err={:.17g}\n", r.train_err.back());
  return exit_code::kOk;
}

struct EvalFlags {
  std::string model, data;
  unsigned threads = 1;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const Dataset data = load_csv(f.data);
  const std::string text = [&] {
    std::ifstream in(f.model, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open model '{}'", f.model));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }();
  const bool is_ensemble = text.find("\"members\"") != std::string::npos;

  if (is_ensemble) {
    const EnsembleModel model = ensemble_from_json(text);
    if (model.members.front().architecture().input_dim() != data.dim()) {
      throw ShapeError("model input dimension does not match the dataset");
    }
    const std::size_t wrong = ensemble_mistakes(model, data);
    const CostReport c = cost(model);
    out << fmt::format("err={:.17g} mistakes={} evals_per_prediction={} params_evaluated={}\n",
                       static_cast<double>(wrong) / static_cast<double>(data.size()), wrong,
                       c.network_evals_per_prediction, c.total_params_evaluated);
    return exit_code::kOk;
  }

  const FeedForwardNet net = model_from_json(text);
  if (net.architecture().input_dim() != data.dim()) {
    throw ShapeError("model input dimension does not match the dataset");
  }
  const MarginCache cache = margins(net, data, f.threads);
  const CostReport c = cost(net);
  out << fmt::format("err={:.17g} mistakes={} potential={:.17g} evals_per_prediction={} params_evaluated={}\n",
                     static_cast<double>(cache.mistakes) / static_cast<double>(data.size()), cache.mistakes,
                     potential(cache), c.network_evals_per_prediction, c.total_params_evaluated);
  return exit_code::kOk;
}

struct VerifyFlags {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::string metrics;
  double initial_potential = std::numeric_limits<double>::quiet_NaN();
  std::size_t m = 0;
  double rho = 0.1;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out) {
  static const std::set<std::string> kSuites{"all", "lse", "lse-descent", "lemma", "grad", "bound"};
  if (!kSuites.contains(f.suite)) throw UsageError(fmt::format("unknown suite '{}'", f.suite));
  const bool all = f.suite == "all";
  const bool want_bound = f.suite == "bound" || (all && !f.metrics.empty());
  if (want_bound && (f.metrics.empty() || f.m == 0 || std::isnan(f.initial_potential))) {
    throw UsageError("the bound suite needs --metrics, --m and --initial-potential");
  }

  std::vector<SuiteResult> results;
  if (all || f.suite == "lse") results.push_back(lse_suite(f.seed));
  if (all || f.suite == "lse-descent") results.push_back(lse_descent_suite(f.seed));
  if (all || f.suite == "lemma") results.push_back(lemma_suite(f.seed));
  if (all || f.suite == "grad") results.push_back(grad_suite(f.seed));
  if (want_bound) {
    std::ifstream in(f.metrics, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open metrics '{}'", f.metrics));
    std::stringstream ss;
    ss << in.rdbuf();
    results.push_back(bound_suite(metrics_from_csv(ss.str()), f.m, f.initial_potential, f.rho));
  }

  bool ok = true;
  for (const auto& r : results) {
    out << format_suite_line(r) << '\n';
    ok = ok && r.pass;
  }
  return ok ? exit_code::kOk : exit_code::kVerifyFailed;
}

int cmd_compare(const TrainFlags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f);
  const Dataset data = load_csv(cfg.data_path);
  const auto& b = cfg.boost;
  if (b.T == 0) throw UsageError("compare needs T >= 1");

  auto started = std::chrono::steady_clock::now();
  const TrainResult sb = run_selfieboost(data, b);
  const double sb_ms = elapsed_ms(started);
  const std::size_t sb_mistakes = sb.records.empty() ? sb.initial_mistakes : sb.records.back().mistakes;

  started = std::chrono::steady_clock::now();
  const AdaBoostResult ab = run_adaboost(data, weak_config_for(cfg, data.size()), b.T, b.seed, b.threads);
  const double ab_ms = elapsed_ms(started);

  std::string table = "algo,final_train_err,boost_iters,network_evals_per_prediction,total_wall_ms\n";
  table += fmt::format("selfieboost,{:.17g},{},{},{:.17g}\n",
                       static_cast<double>(sb_mistakes) / static_cast<double>(data.size()), sb.accepted_count,
                       cost(sb.final_net).network_evals_per_prediction, f.timing ? sb_ms : 0.0);
  table += fmt::format("adaboost,{:.17g},{},{},{:.17g}\n", ab.final_train_err(), ab.model.members.size(),
                       cost(ab.model).network_evals_per_prediction, f.timing ? ab_ms : 0.0);
  if (!cfg.metrics_path.empty()) {
    write_file(cfg.metrics_path, table);
  } else {
    out << table;
  }
  return exit_code::kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SelfieBoost: boosting a single network, with baselines and proof checks", "selfieboost"};
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a realizable dataset from a random teacher network");
  gen_cmd->add_option("--m", gen.m, "number of examples")->required();
  gen_cmd->add_option("--d", gen.d, "input dimension")->required();
  gen_cmd->add_option("--seed", gen.seed, "seed (default 0)");
  gen_cmd->add_option("--out", gen.out, "dataset CSV to write")->required();
  gen_cmd->add_option("--teacher-out", gen.teacher_out, "teacher model JSON to write")->required();
  gen_cmd->add_option("--teacher-hidden", gen.teacher_hidden, "teacher hidden widths (default 4)");
  gen_cmd->add_option("--activation", gen.activation, "teacher activation (default tanh)");
  gen_cmd->add_option("--tau", gen.tau, "minimum |raw teacher score| kept (default 0.1)");

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "train with selfieboost, adaboost or plain sgd");
  add_train_flags(train_cmd, train);

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "report error, potential and prediction cost of a model");
  eval_cmd->add_option("--model", eval.model, "model or ensemble JSON")->required();
  eval_cmd->add_option("--data", eval.data, "dataset CSV")->required();
  eval_cmd->add_option("--threads", eval.threads, "workers (default 1)");

  VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "run the proof-check suites");
  verify_cmd->add_option("--suite", verify.suite, "all | lse | lse-descent | lemma | grad | bound (default all)");
  verify_cmd->add_option("--seed", verify.seed, "seed (default 0)");
  verify_cmd->add_option("--metrics", verify.metrics, "selfieboost metrics CSV for the bound suite");
  verify_cmd->add_option("--initial-potential", verify.initial_potential, "L(f_1) of the recorded run");
  verify_cmd->add_option("--m", verify.m, "training set size of the recorded run");
  verify_cmd->add_option("--rho", verify.rho, "edge parameter of the recorded run (default 0.1)");

  TrainFlags compare;
  auto* compare_cmd = app.add_subcommand("compare", "selfieboost vs adaboost on the same data and budget");
  add_train_flags(compare_cmd, compare);

  std::vector<const char*> argv{"selfieboost"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, out);
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (verify_cmd->parsed()) return cmd_verify(verify, out);
    if (compare_cmd->parsed()) return cmd_compare(compare, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const DegenerateTeacherError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kDegenerateData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_code::kNumeric;
  } catch (const ValidationError& e) {
    err << "invalid metrics: " << e.what() << '\n';
    return exit_code::kVerifyFailed;
  } catch (const Error& e) {
    // I/O, malformed files, version and shape mismatches.
    err << "error: " << e.what() << '\n';
    return exit_code::kIo;
  }
  return exit_code::kUsage;
}

}  // namespace selfieboost::cli

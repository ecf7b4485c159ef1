// advprobe: train small models, run gradient-sign and CW-L2 attacks, and
// verify the attack-efficacy bounds with randomized suites.
//
// Exit codes: 0 success, 1 usage error, 2 runtime/verification error,
// 3 theorem-suite violations detected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advprobe/arch.hpp"
#include "advprobe/attacks.hpp"
#include "advprobe/csv.hpp"
#include "advprobe/dataset.hpp"
#include "advprobe/model_io.hpp"
#include "advprobe/network.hpp"
#include "advprobe/suites.hpp"
#include "advprobe/svg.hpp"
#include "advprobe/theory.hpp"
#include "advprobe/train.hpp"

namespace {

using namespace advprobe;
using io::format_double;

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out;
  bool quiet = false;
};

void note(const CommonOpts& opts, const std::string& msg) {
  if (!opts.quiet) std::cerr << msg << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

// Payload goes to --out when given, stdout otherwise.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

Dataset load_for_model(const std::string& data_spec, std::uint64_t seed,
                       const Network& net) {
  Dataset d = realize_data(parse_data_spec(data_spec), seed);
  if (d.size() == 0) throw std::runtime_error("dataset is empty");
  if (d.inputs.front().shape != net.input_shape) {
    if (d.inputs.front().size() != Tensor::product(net.input_shape))
      throw std::runtime_error(
          "dataset input size " + std::to_string(d.inputs.front().size()) +
          " does not match model input shape " +
          shape_string(net.input_shape));
    d = reshape_inputs(std::move(d), net.input_shape);
  }
  return d;
}

Dataset pick_split(const Dataset& d, const std::string& which) {
  if (which == "all") return d;
  if (which == "train") return split(d, false);
  if (which == "test") return split(d, true);
  throw std::invalid_argument("unknown split '" + which + "'");
}

// ---------------------------------------------------------------- train ---

struct TrainOpts {
  std::string arch, data, optimizer = "sgd";
  double lr = 0.1;
  std::size_t epochs = 10, batch = 32;
  bool no_bias = false;
};

int cmd_train(const CommonOpts& common, const TrainOpts& o) {
  if (common.out.empty())
    throw std::invalid_argument("train: --out MODEL.json is required");
  const ArchSpec arch = parse_arch(o.arch);
  Network net = build_network(arch, common.seed, !o.no_bias);
  Dataset full = load_for_model(o.data, common.seed, net);
  const Dataset train_set = split(full, false);
  const Dataset test_set = split(full, true);

  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.seed = common.seed;
  if (o.optimizer == "sgd") {
    cfg.optimizer = SgdConfig{o.lr};
  } else if (o.optimizer == "adam") {
    AdamConfig a;
    a.lr = o.lr;
    cfg.optimizer = a;
  } else {
    throw std::invalid_argument("unknown optimizer '" + o.optimizer + "'");
  }

  net = train(std::move(net), train_set, cfg);
  save_model(net, common.out);

  io::CsvWriter csv(std::cout);
  csv.header({"split", "samples", "accuracy", "mean_loss"});
  for (const auto& [name, set] :
       {std::pair<const char*, const Dataset*>{"train", &train_set},
        std::pair<const char*, const Dataset*>{"test", &test_set}}) {
    const EvalStats st = evaluate(net, *set);
    csv.row({name, std::to_string(set->size()), format_double(st.accuracy),
             format_double(st.mean_loss)});
  }
  note(common, "model written to " + common.out);
  return 0;
}

// --------------------------------------------------------------- attack ---

struct AttackOpts {
  std::string model, data, method, split = "test";
  double eps = 0.0, alpha = 0.1, interp = 1.0;
  std::size_t iters = 1, limit = 0;
  int target = -1;
  CwParams cw;
};

bool method_is_targeted(const std::string& m) {
  return m == "fgsm-t" || m == "ifgsm-t" || m == "cw";
}

AttackResult run_method(const Network& net, const Tensor& x, int label,
                        const std::string& method, const AttackConfig& cfg) {
  if (method == "fgsm") return fgsm(net, x, label, cfg);
  if (method == "ifgsm") return ifgsm(net, x, label, cfg);
  if (method == "ifgsm-clip") return ifgsm_clipped(net, x, label, cfg);
  if (method == "fgsm-t") return fgsm_targeted(net, x, *cfg.target, cfg);
  if (method == "ifgsm-t") return ifgsm_targeted(net, x, *cfg.target, cfg);
  if (method == "cw") return cw_l2(net, x, *cfg.target, cfg);
  throw std::invalid_argument("unknown method '" + method + "'");
}

AttackConfig make_config(const AttackOpts& o, const Network& net) {
  AttackConfig cfg;
  cfg.epsilon = o.eps;
  cfg.iterations = o.iters;
  cfg.clip_alpha = o.alpha;
  cfg.cw = o.cw;
  if (method_is_targeted(o.method)) {
    if (o.target < 0)
      throw std::invalid_argument("targeted method requires --target");
    if (static_cast<std::size_t>(o.target) >= net.class_count)
      throw std::invalid_argument("--target out of range");
    cfg.target = o.target;
  }
  return cfg;
}

int cmd_attack(const CommonOpts& common, const AttackOpts& o) {
  const Network net = load_model(o.model);
  const Dataset all = load_for_model(o.data, common.seed, net);
  const Dataset set = pick_split(all, o.split);
  const AttackConfig cfg = make_config(o, net);

  OutputTarget target(common.out);
  io::CsvWriter csv(target.stream());
  csv.comment("model " + digest(net) + " method " + o.method);
  csv.header({"index", "label", "pred_before", "pred_after", "loss_before",
              "loss_after", "success", "l2_delta", "linf_delta"});

  std::size_t done = 0, skipped = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (o.limit > 0 && done >= o.limit) break;
    const int label = set.labels[i];
    if (cfg.target && label == *cfg.target) {
      ++skipped;  // a targeted attack needs target != ground truth
      continue;
    }
    AttackResult r = run_method(net, set.inputs[i], label, o.method, cfg);
    if (o.method == "cw" && o.interp != 1.0) {
      r.adversarial =
          interpolate_adversarial(set.inputs[i], r.adversarial, o.interp);
      r.loss_after = loss(net, r.adversarial, *cfg.target);
      r.label_after = predict(net, r.adversarial);
      r.success = r.label_after == *cfg.target;
    }
    csv.row({std::to_string(i), std::to_string(label),
             std::to_string(r.label_before), std::to_string(r.label_after),
             format_double(r.loss_before), format_double(r.loss_after),
             r.success ? "1" : "0",
             format_double(l2_distance(set.inputs[i], r.adversarial)),
             format_double(linf_distance(set.inputs[i], r.adversarial))});
    ++done;
  }
  if (skipped > 0)
    csv.comment("skipped " + std::to_string(skipped) +
                " samples already labeled as the target class");
  return 0;
}

// ---------------------------------------------------------------- sweep ---

struct SweepOpts {
  std::string model, data, method = "fgsm", grid, grid_type = "eps",
              split = "test";
  double eps = 0.02, alpha = 0.1;
  std::size_t iters = 1, limit = 0;
  int target = -1;
  CwParams cw;
};

int cmd_sweep(const CommonOpts& common, const SweepOpts& o) {
  const Network net = load_model(o.model);
  const Dataset all = load_for_model(o.data, common.seed, net);
  Dataset set = pick_split(all, o.split);
  if (o.limit > 0 && set.size() > o.limit) {
    set.inputs.resize(o.limit);
    set.labels.resize(o.limit);
  }
  if (o.grid_type != "eps" && o.grid_type != "iters")
    throw std::invalid_argument("unknown --grid-type '" + o.grid_type + "'");
  const std::vector<double> grid = parse_grid(o.grid);

  AttackOpts base;
  base.method = o.method;
  base.eps = o.eps;
  base.alpha = o.alpha;
  base.iters = o.iters;
  base.target = o.target;
  base.cw = o.cw;
  AttackConfig cfg = make_config(base, net);
  const bool targeted = method_is_targeted(o.method);

  std::vector<double> accuracy, success_rate, mean_loss;
  for (const double g : grid) {
    if (o.grid_type == "eps") {
      cfg.epsilon = g;
    } else {
      if (g < 1.0 || g != std::floor(g))
        throw std::invalid_argument("iteration grid values must be integers >= 1");
      cfg.iterations = static_cast<std::size_t>(g);
    }
    std::size_t correct = 0, success = 0, counted = 0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const int label = set.labels[i];
      if (cfg.target && label == *cfg.target) continue;
      const AttackResult r =
          run_method(net, set.inputs[i], label, o.method, cfg);
      ++counted;
      if (predict(net, r.adversarial) == label) ++correct;
      if (r.success) ++success;
      loss_sum += targeted ? r.loss_after : loss(net, r.adversarial, label);
    }
    if (counted == 0) throw std::runtime_error("sweep: no usable samples");
    accuracy.push_back(static_cast<double>(correct) / counted);
    success_rate.push_back(static_cast<double>(success) / counted);
    mean_loss.push_back(loss_sum / counted);
  }

  std::ostringstream csv_text;
  {
    io::CsvWriter csv(csv_text);
    csv.comment("model " + digest(net) + " method " + o.method + " samples " +
                std::to_string(set.size()));
    csv.header({o.grid_type == "eps" ? "epsilon" : "iterations", "accuracy",
                "success_rate", "mean_loss"});
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv.row({format_double(grid[i]), format_double(accuracy[i]),
               format_double(success_rate[i]), format_double(mean_loss[i])});
  }

  const std::string x_label =
      o.grid_type == "eps" ? "attack strength epsilon" : "iterations";
  const std::string y_label = targeted ? "success rate" : "accuracy";
  const std::string svg = io::svg_line_chart(
      o.method + " sweep", x_label, y_label, grid,
      targeted ? success_rate : accuracy);

  if (common.out.empty()) {
    std::cout << csv_text.str();
  } else {
    write_text_file(common.out + ".csv", csv_text.str());
    write_text_file(common.out + ".svg", svg);
    note(common, "wrote " + common.out + ".csv and " + common.out + ".svg");
  }
  return 0;
}

// --------------------------------------------------------------- verify ---

struct VerifyOpts {
  std::string theorem;
  std::size_t trials = 1000;
};

int cmd_verify(const CommonOpts& common, const VerifyOpts& o) {
  const auto& ids = theory::suite_ids();
  if (std::find(ids.begin(), ids.end(), o.theorem) == ids.end()) {
    std::string known;
    for (const auto& id : ids) known += (known.empty() ? "" : ", ") + id;
    throw std::invalid_argument("unknown theorem id '" + o.theorem +
                                "' (known: " + known + ")");
  }
  if (o.trials < 1) throw std::invalid_argument("--trials must be >= 1");

  const theory::SuiteResult res =
      theory::run_theorem_suite(o.theorem, o.trials, common.seed);

  OutputTarget target(common.out);
  io::CsvWriter csv(target.stream());
  csv.header({"theorem_id", "threshold", "epsilon_used", "verdict",
              "violation_magnitude", "seed"});
  for (const auto& rep : res.reports)
    csv.row({rep.theorem_id, format_double(rep.threshold),
             format_double(rep.epsilon_used), theory::to_string(rep.verdict),
             format_double(rep.violation_magnitude),
             std::to_string(rep.seed)});

  std::string summary =
      "summary trials=" + std::to_string(res.summary.trials) +
      " applicable=" + std::to_string(res.summary.applicable) +
      " holds=" + std::to_string(res.summary.holds) +
      " violated=" + std::to_string(res.summary.violated);
  if (res.summary.census >= 0.0)
    summary += " sign_preservation_census=" + format_double(res.summary.census);
  csv.comment(summary);
  note(common, "theorem " + o.theorem + " " + summary);
  return res.summary.violated == 0 ? 0 : 3;
}

// ----------------------------------------------------------- cw-compare ---

struct CwCompareOpts {
  std::string model;
  std::size_t instances = 100;
  double c_frac = 0.5;
  CwParams cw{10.0, 0.0, 0.01, 2000};
};

int cmd_cw_compare(const CommonOpts& common, const CwCompareOpts& o) {
  const Network net = load_model(o.model);
  if (net.layers.size() != 1 || net.layers[0].kind != LayerKind::Linear ||
      net.layers[0].has_bias())
    throw std::runtime_error(
        "theorem scope: cw-compare needs a single bias-free linear layer");
  const Tensor& w = net.layers[0].weights;
  const std::size_t n = w.cols();

  OutputTarget target(common.out);
  io::CsvWriter csv(target.stream());
  csv.comment("model " + digest(net));
  csv.header({"index", "c", "bound", "rel_l2_diff", "verdict_closed",
              "verdict_iter"});

  std::vector<double> rels;
  std::size_t agree = 0, usable = 0;
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng(common.seed + i);
    Tensor x({n});
    for (auto& v : x.data) v = rng.uniform(0.25, 0.75);
    const int y = static_cast<int>(argmax(matvec(w, x)));
    int t = static_cast<int>(rng.index(w.rows() - 1));
    if (t >= y) ++t;
    const auto bound = theory::c_bound_cw(w, x, y, t);
    if (!bound) {
      csv.row({std::to_string(i), "0", "0", "0", "not_applicable",
               "not_applicable"});
      continue;
    }
    const double c = o.c_frac * *bound;

    const Tensor delta_closed = closed_form_cw_delta(w, x, y, t, c);
    Tensor x_closed = x;
    for (std::size_t j = 0; j < n; ++j) x_closed[j] += delta_closed[j];

    AttackConfig cfg;
    cfg.cw = o.cw;
    cfg.cw.c = c;
    const AttackResult res = cw_l2(net, x, t, cfg);
    Tensor delta_iter({n});
    for (std::size_t j = 0; j < n; ++j)
      delta_iter[j] = res.adversarial[j] - x[j];

    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      diff += (delta_iter[j] - delta_closed[j]) * (delta_iter[j] - delta_closed[j]);
    const double rel = std::sqrt(diff) /
                       std::max(1e-300, std::sqrt(l2_norm_sq(delta_closed)));
    rels.push_back(rel);

    const auto v_closed = theory::ratio_verdict(w, x, x_closed, y, t);
    const auto v_iter = theory::ratio_verdict(w, x, res.adversarial, y, t);
    ++usable;
    if (v_closed == v_iter) ++agree;
    csv.row({std::to_string(i), format_double(c), format_double(*bound),
             format_double(rel), theory::to_string(v_closed),
             theory::to_string(v_iter)});
  }
  if (!rels.empty()) {
    std::vector<double> sorted = rels;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    csv.comment("summary instances=" + std::to_string(o.instances) +
                " usable=" + std::to_string(usable) +
                " median_rel_l2=" + format_double(median) +
                " verdict_agreement=" + std::to_string(agree));
  }
  return 0;
}

// ----------------------------------------------------------- prob-shift ---

struct ProbShiftOpts {
  std::string model, data, split = "test";
  int source = -1, target = -1;
  std::size_t limit = 0;
  CwParams cw;
};

int cmd_prob_shift(const CommonOpts& common, const ProbShiftOpts& o) {
  const Network net = load_model(o.model);
  if (o.source < 0 || o.target < 0)
    throw std::invalid_argument("prob-shift requires --source and --target");
  if (o.source == o.target)
    throw std::invalid_argument("prob-shift: source == target");
  if (static_cast<std::size_t>(o.source) >= net.class_count ||
      static_cast<std::size_t>(o.target) >= net.class_count)
    throw std::invalid_argument("prob-shift: class index out of range");

  const Dataset all = load_for_model(o.data, common.seed, net);
  const Dataset set = pick_split(all, o.split);

  AttackConfig cfg;
  cfg.cw = o.cw;
  cfg.target = o.target;

  std::vector<double> before(net.class_count, 0.0), after(net.class_count, 0.0);
  std::size_t count = 0, success = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.labels[i] != o.source) continue;
    if (o.limit > 0 && count >= o.limit) break;
    const Tensor pb = softmax(forward(net, set.inputs[i]).logits);
    const AttackResult r = cw_l2(net, set.inputs[i], o.target, cfg);
    const Tensor pa = softmax(forward(net, r.adversarial).logits);
    for (std::size_t k = 0; k < net.class_count; ++k) {
      before[k] += pb[k];
      after[k] += pa[k];
    }
    if (r.success) ++success;
    ++count;
  }
  if (count == 0) throw std::runtime_error("no source-class samples");
  for (std::size_t k = 0; k < net.class_count; ++k) {
    before[k] /= static_cast<double>(count);
    after[k] /= static_cast<double>(count);
  }

  std::ostringstream csv_text;
  {
    io::CsvWriter csv(csv_text);
    csv.comment("model " + digest(net) + " source " + std::to_string(o.source) +
                " target " + std::to_string(o.target) + " samples " +
                std::to_string(count) + " cw_success " +
                std::to_string(success));
    csv.header({"class", "mean_prob_before", "mean_prob_after"});
    for (std::size_t k = 0; k < net.class_count; ++k)
      csv.row({std::to_string(k), format_double(before[k]),
               format_double(after[k])});
  }

  std::vector<std::string> classes;
  for (std::size_t k = 0; k < net.class_count; ++k)
    classes.push_back(std::to_string(k));
  const std::string svg = io::svg_paired_bars(
      "mean class probability, source " + std::to_string(o.source) +
          " to target " + std::to_string(o.target),
      "class", "mean probability", classes, before, after, "before", "after");

  if (common.out.empty()) {
    std::cout << csv_text.str();
  } else {
    write_text_file(common.out + ".csv", csv_text.str());
    write_text_file(common.out + ".svg", svg);
    note(common, "wrote " + common.out + ".csv and " + common.out + ".svg");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial attack and efficacy-bound workbench"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CommonOpts common;
  app.add_option("--seed", common.seed, "master seed (default 0)");
  app.add_option("--out", common.out, "output file (or prefix for csv+svg)");
  app.add_flag("--quiet", common.quiet, "suppress progress notes on stderr");

  TrainOpts train_o;
  auto* train_cmd = app.add_subcommand("train", "train a model and save JSON");
  train_cmd->add_option("--arch", train_o.arch, "mlp:d0-d1-... or cnn:CxHxW:conv(oc,k,s,p)-...-mlp(d...)")->required();
  train_cmd->add_option("--data", train_o.data, "blobs:DIMS:K:SPREAD:N or idx:IMAGES:LABELS")->required();
  train_cmd->add_option("--epochs", train_o.epochs, "training epochs");
  train_cmd->add_option("--lr", train_o.lr, "learning rate");
  train_cmd->add_option("--optimizer", train_o.optimizer, "sgd or adam");
  train_cmd->add_option("--batch", train_o.batch, "batch size");
  train_cmd->add_flag("--no-bias", train_o.no_bias, "build bias-free layers");

  AttackOpts attack_o;
  auto* attack_cmd = app.add_subcommand("attack", "attack every sample, one CSV row each");
  attack_cmd->add_option("--model", attack_o.model, "model JSON")->required();
  attack_cmd->add_option("--data", attack_o.data, "data spec")->required();
  attack_cmd->add_option("--method", attack_o.method, "fgsm|ifgsm|ifgsm-clip|fgsm-t|ifgsm-t|cw")->required();
  attack_cmd->add_option("--eps", attack_o.eps, "attack strength epsilon");
  attack_cmd->add_option("--iters", attack_o.iters, "IFGSM iterations");
  attack_cmd->add_option("--alpha", attack_o.alpha, "clip radius for ifgsm-clip");
  attack_cmd->add_option("--target", attack_o.target, "target class for targeted methods");
  attack_cmd->add_option("--c", attack_o.cw.c, "CW multiplier c");
  attack_cmd->add_option("--kappa", attack_o.cw.kappa, "CW confidence kappa");
  attack_cmd->add_option("--steps", attack_o.cw.steps, "CW Adam steps");
  attack_cmd->add_option("--lr", attack_o.cw.learning_rate, "CW Adam learning rate");
  attack_cmd->add_option("--interp", attack_o.interp, "CW interpolation level");
  attack_cmd->add_option("--split", attack_o.split, "train|test|all (default test)");
  attack_cmd->add_option("--limit", attack_o.limit, "max samples (0 = all)");

  SweepOpts sweep_o;
  auto* sweep_cmd = app.add_subcommand("sweep", "metric vs epsilon (or iterations) grid; CSV + SVG");
  sweep_cmd->add_option("--model", sweep_o.model, "model JSON")->required();
  sweep_cmd->add_option("--data", sweep_o.data, "data spec")->required();
  sweep_cmd->add_option("--method", sweep_o.method, "attack method");
  sweep_cmd->add_option("--grid", sweep_o.grid, "start:end:step")->required();
  sweep_cmd->add_option("--grid-type", sweep_o.grid_type, "eps|iters");
  sweep_cmd->add_option("--eps", sweep_o.eps, "epsilon for iteration grids");
  sweep_cmd->add_option("--iters", sweep_o.iters, "iterations for eps grids");
  sweep_cmd->add_option("--alpha", sweep_o.alpha, "clip radius for ifgsm-clip");
  sweep_cmd->add_option("--target", sweep_o.target, "target class");
  sweep_cmd->add_option("--split", sweep_o.split, "train|test|all");
  sweep_cmd->add_option("--limit", sweep_o.limit, "max samples (0 = all)");

  VerifyOpts verify_o;
  auto* verify_cmd = app.add_subcommand("verify", "run one theorem's randomized suite");
  verify_cmd->add_option("--theorem", verify_o.theorem, "3.1|3.2|3.3-lemma|3.3-deep|4.1|4.2|7|5.3")->required();
  verify_cmd->add_option("--trials", verify_o.trials, "trial count");

  CwCompareOpts cwc_o;
  auto* cwc_cmd = app.add_subcommand("cw-compare", "closed-form vs iterative CW on a single-layer model");
  cwc_cmd->add_option("--model", cwc_o.model, "single-linear-layer model JSON")->required();
  cwc_cmd->add_option("--n", cwc_o.instances, "instance count");
  cwc_cmd->add_option("--c-frac", cwc_o.c_frac, "c as a fraction of the bound");
  cwc_cmd->add_option("--steps", cwc_o.cw.steps, "Adam steps");
  cwc_cmd->add_option("--lr", cwc_o.cw.learning_rate, "Adam learning rate");

  ProbShiftOpts ps_o;
  auto* ps_cmd = app.add_subcommand("prob-shift", "per-class mean probability before/after CW; CSV + SVG");
  ps_cmd->add_option("--model", ps_o.model, "model JSON")->required();
  ps_cmd->add_option("--data", ps_o.data, "data spec")->required();
  ps_cmd->add_option("--source", ps_o.source, "source class")->required();
  ps_cmd->add_option("--target", ps_o.target, "target class")->required();
  ps_cmd->add_option("--c", ps_o.cw.c, "CW multiplier c");
  ps_cmd->add_option("--kappa", ps_o.cw.kappa, "CW confidence kappa");
  ps_cmd->add_option("--steps", ps_o.cw.steps, "CW Adam steps");
  ps_cmd->add_option("--lr", ps_o.cw.learning_rate, "CW Adam learning rate");
  ps_cmd->add_option("--split", ps_o.split, "train|test|all");
  ps_cmd->add_option("--limit", ps_o.limit, "max source samples (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(common, train_o);
    if (attack_cmd->parsed()) return cmd_attack(common, attack_o);
    if (sweep_cmd->parsed()) return cmd_sweep(common, sweep_o);
    if (verify_cmd->parsed()) return cmd_verify(common, verify_o);
    if (cwc_cmd->parsed()) return cmd_cw_compare(common, cwc_o);
    if (ps_cmd->parsed()) return cmd_prob_shift(common, ps_o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

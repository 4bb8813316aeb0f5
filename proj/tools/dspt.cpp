// Command-line surface: data generation, training, gradient audits, theorem
// verification and sweeps. Every command honors --seed and writes a manifest
// (config hash, seed, artifact version) next to its outputs; reruns with the
// same flags produce byte-identical files.
//
// Exit codes: 0 ok, 2 usage, 3 data format, 4 numeric abort, 5 verification
// failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dspt/data.hpp"
#include "dspt/io.hpp"
#include "dspt/kernels.hpp"
#include "dspt/losses.hpp"
#include "dspt/model.hpp"
#include "dspt/noise.hpp"
#include "dspt/pinned.hpp"
#include "dspt/rng.hpp"
#include "dspt/trainer.hpp"
#include "dspt/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDataFormat = 3;
constexpr int kExitNumericAbort = 4;
constexpr int kExitVerifyFailed = 5;

// --out is resolved under DSPT_OUT_ROOT when relative and the variable is set.
fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* root = std::getenv("DSPT_OUT_ROOT"); root && *root)
      p = fs::path(root) / p;
  }
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw dspt::DataFormatError(dspt::DataFormatError::Code::Truncated,
                                       "cannot write " + path.string());
  os << text;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
  json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_hash"] = dspt::io::hex64(dspt::io::fnv1a(config.dump()));
  manifest["seed"] = seed;
  manifest["outputs"] = outputs;
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

struct LoadedData {
  dspt::Dataset train;
  dspt::Dataset test;
  std::vector<dspt::Vec> anchors;
};

// Loads <name>.dsptemb, falling back to the <name>.csv alternative.
dspt::Dataset load_part(const fs::path& base, const std::string& name) {
  const fs::path bin = base / (name + ".dsptemb");
  if (fs::exists(bin)) return dspt::load_embeddings(bin.string());
  const fs::path csv = base / (name + ".csv");
  if (fs::exists(csv)) return dspt::load_embeddings_csv(csv.string());
  throw dspt::DataFormatError(dspt::DataFormatError::Code::Truncated,
                              "missing " + bin.string() + " (or .csv)");
}

LoadedData load_data_dir(const std::string& dir) {
  const fs::path base(dir);
  LoadedData data;
  data.train = load_part(base, "train");
  data.test = load_part(base, "test");
  data.test.split = dspt::Split::Test;

  auto anchor_set = load_part(base, "anchors");
  if (anchor_set.n != anchor_set.classes)
    throw dspt::DataFormatError(dspt::DataFormatError::Code::BadDimensions,
                                "anchors file must hold exactly one row per class");
  data.anchors.assign(static_cast<size_t>(anchor_set.classes), dspt::Vec());
  std::vector<bool> seen(static_cast<size_t>(anchor_set.classes), false);
  for (long i = 0; i < anchor_set.n; ++i) {
    const int c = anchor_set.clean[static_cast<size_t>(i)];
    if (seen[static_cast<size_t>(c)])
      throw dspt::DataFormatError(dspt::DataFormatError::Code::LabelOutOfRange,
                                  "duplicate anchor for class " + std::to_string(c));
    seen[static_cast<size_t>(c)] = true;
    const auto row = anchor_set.feature(i);
    data.anchors[static_cast<size_t>(c)].assign(row.begin(), row.end());
  }
  return data;
}

dspt::TransitionMatrix matrix_for(const dspt::NoiseSpec& spec, int classes) {
  if (spec.kind == dspt::NoiseSpec::Kind::Symmetric)
    return dspt::TransitionMatrix::symmetric(classes, spec.eta);
  if (spec.kind == dspt::NoiseSpec::Kind::PairFlip)
    return dspt::TransitionMatrix::pair_flip(classes, spec.eta);
  throw dspt::InvalidInputError("no transition matrix for noise kind none");
}

dspt::ShiftMode parse_mode(const std::string& mode) {
  if (mode == "shared") return dspt::ShiftMode::SharedShift;
  if (mode == "perclass") return dspt::ShiftMode::PerClass;
  throw dspt::InvalidInputError("mode must be shared or perclass");
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  int classes = 10;
  int dim = 64;
  long n_train = 5000;
  long n_test = 2000;
  double kappa = 20.0;
  double anchor_perturb = 0.4;
  std::uint64_t seed = 1;
  std::string out = "data";
};

int cmd_gen_data(const GenDataArgs& args) {
  const fs::path dir = resolve_out(args.out);
  fs::create_directories(dir);

  auto bundle = dspt::gen_synthetic(args.classes, args.dim, args.n_train,
                                    args.n_test, args.kappa,
                                    args.anchor_perturb, args.seed);
  dspt::save_embeddings(bundle.train, (dir / "train.dsptemb").string());
  dspt::save_embeddings(bundle.test, (dir / "test.dsptemb").string());

  dspt::Dataset anchor_set;
  anchor_set.classes = args.classes;
  anchor_set.dim = args.dim;
  anchor_set.n = args.classes;
  anchor_set.features.reserve(static_cast<size_t>(args.classes) * args.dim);
  for (const auto& row : bundle.anchors)
    anchor_set.features.insert(anchor_set.features.end(), row.begin(), row.end());
  for (int c = 0; c < args.classes; ++c) anchor_set.clean.push_back(c);
  anchor_set.noisy = anchor_set.clean;
  anchor_set.mask.assign(static_cast<size_t>(args.classes), 0);
  dspt::save_embeddings(anchor_set, (dir / "anchors.dsptemb").string());

  json config = {{"classes", args.classes},
                 {"dim", args.dim},
                 {"n_train", args.n_train},
                 {"n_test", args.n_test},
                 {"kappa", args.kappa},
                 {"anchor_perturb", args.anchor_perturb},
                 {"seed", args.seed}};
  json extra;
  extra["zero_shot_train_acc"] = bundle.zero_shot_train_acc;
  extra["zero_shot_test_acc"] = bundle.zero_shot_test_acc;
  extra["warnings"] =
      bundle.warning ? json::array({*bundle.warning}) : json::array();
  write_manifest(dir, "gen-data", config, args.seed,
                 {"train.dsptemb", "test.dsptemb", "anchors.dsptemb"}, extra);

  std::cout << "wrote " << dir.string() << " (zero-shot test acc "
            << dspt::io::format_double(bundle.zero_shot_test_acc) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string loss = "ce";
  std::optional<double> tau;
  std::string noise = "none";
  int epochs = 50;
  long batch = 32;
  double lr0 = 0.002;
  double scale = 30.0;
  std::string mode = "shared";
  bool selection = false;
  std::uint64_t seed = 0;
  std::string out = "run";
  std::string config_file;
};

// Config-file values fill in whatever the command line left untouched;
// explicitly passed flags win. Unknown keys are rejected outright.
void apply_config_file(TrainArgs& args, const std::set<std::string>& from_flags) {
  std::ifstream is(args.config_file);
  if (!is)
    throw dspt::DataFormatError(dspt::DataFormatError::Code::Truncated,
                                "cannot open config: " + args.config_file);
  json cfg = json::parse(is, nullptr, /*allow_exceptions=*/true);
  static const std::set<std::string> known = {
      "data", "loss", "tau",       "noise", "epochs", "batch",
      "lr0",  "scale", "mode", "selection", "seed",  "out"};
  for (const auto& [key, value] : cfg.items())
    if (known.find(key) == known.end())
      throw dspt::InvalidInputError("unknown config key: " + key);

  auto wants = [&](const char* key) {
    return cfg.contains(key) && from_flags.find(key) == from_flags.end();
  };
  if (wants("data")) args.data = cfg["data"].get<std::string>();
  if (wants("loss")) args.loss = cfg["loss"].get<std::string>();
  if (wants("tau")) args.tau = cfg["tau"].get<double>();
  if (wants("noise")) args.noise = cfg["noise"].get<std::string>();
  if (wants("epochs")) args.epochs = cfg["epochs"].get<int>();
  if (wants("batch")) args.batch = cfg["batch"].get<long>();
  if (wants("lr0")) args.lr0 = cfg["lr0"].get<double>();
  if (wants("scale")) args.scale = cfg["scale"].get<double>();
  if (wants("mode")) args.mode = cfg["mode"].get<std::string>();
  if (wants("selection")) args.selection = cfg["selection"].get<bool>();
  if (wants("seed")) args.seed = cfg["seed"].get<std::uint64_t>();
  if (wants("out")) args.out = cfg["out"].get<std::string>();
}

json train_config_json(const TrainArgs& args) {
  json config = {{"data", args.data},     {"loss", args.loss},
                 {"noise", args.noise},   {"epochs", args.epochs},
                 {"batch", args.batch},   {"lr0", args.lr0},
                 {"scale", args.scale},   {"mode", args.mode},
                 {"selection", args.selection}, {"seed", args.seed}};
  if (args.tau) config["tau"] = *args.tau;
  return config;
}

int cmd_train(TrainArgs args, const std::set<std::string>& from_flags) {
  if (!args.config_file.empty()) apply_config_file(args, from_flags);
  if (args.data.empty())
    throw dspt::InvalidInputError("train needs --data (or data in --config)");

  // Validate everything before any work starts.
  dspt::LossKind loss = dspt::LossKind::parse(args.loss, args.tau);
  const auto noise = dspt::NoiseSpec::parse(args.noise);
  const auto mode = parse_mode(args.mode);
  const fs::path dir = resolve_out(args.out);

  auto data = load_data_dir(args.data);
  fs::create_directories(dir);

  dspt::NoiseReport noise_report;
  if (noise.kind != dspt::NoiseSpec::Kind::None) {
    const auto t = matrix_for(noise, data.train.classes);
    noise_report = dspt::apply_noise(
        data.train, t, dspt::rng::substream(args.seed, dspt::rng::Stream::Noise));
  }

  dspt::PrototypeModel model(data.anchors, mode, args.scale);

  dspt::TrainConfig config;
  config.loss = loss;
  config.epochs = args.epochs;
  config.batch = args.batch;
  config.lr0 = args.lr0;
  config.seed = args.seed;
  config.noise = noise;
  config.model = {mode, args.scale};
  config.selection = args.selection || loss.drops_mismatched();

  const auto metrics = dspt::train(config, data.train, data.test, model);

  write_text(dir / "metrics.csv", metrics.to_csv());
  write_text(dir / "metrics.json", metrics.to_json_string() + "\n");
  model.save_checkpoint((dir / "checkpoint.bin").string());

  json extra;
  extra["final_acc"] = metrics.final_acc;
  extra["noise_report"] = json::parse(noise_report.to_json_string());
  write_manifest(dir, "train", train_config_json(args), args.seed,
                 {"metrics.csv", "metrics.json", "checkpoint.bin"}, extra);

  std::cout << "final_acc " << dspt::io::format_double(metrics.final_acc)
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
  std::string data;
  std::vector<std::string> losses = {"ce", "dspt"};
  std::optional<double> tau;
  std::string noise = "sym:0.6";
  double scale = 30.0;
  std::string mode = "shared";
  std::uint64_t seed = 0;
  std::string out = "audit";
};

int cmd_audit(const AuditArgs& args) {
  if (args.data.empty()) throw dspt::InvalidInputError("audit needs --data");
  const auto noise = dspt::NoiseSpec::parse(args.noise);
  const auto mode = parse_mode(args.mode);
  std::vector<dspt::LossKind> kinds;
  for (const auto& spec : args.losses)
    kinds.push_back(dspt::LossKind::parse(spec, args.tau));

  auto data = load_data_dir(args.data);
  const fs::path dir = resolve_out(args.out);
  fs::create_directories(dir);

  dspt::NoiseReport noise_report;
  if (noise.kind != dspt::NoiseSpec::Kind::None) {
    const auto t = matrix_for(noise, data.train.classes);
    noise_report = dspt::apply_noise(
        data.train, t, dspt::rng::substream(args.seed, dspt::rng::Stream::Noise));
  }

  dspt::PrototypeModel model(data.anchors, mode, args.scale);

  json summary;
  summary["noise"] = args.noise;
  summary["noise_report"] = json::parse(noise_report.to_json_string());
  std::vector<std::string> outputs;
  double ce_noisy = std::numeric_limits<double>::quiet_NaN();
  double dspt_noisy = std::numeric_limits<double>::quiet_NaN();

  json per_loss = json::object();
  for (size_t i = 0; i < kinds.size(); ++i) {
    const auto records = dspt::grad_audit(model, data.train, kinds[i]);
    const auto stats = dspt::summarize_audit(records);
    const std::string file = "audit_" + kinds[i].name() + ".csv";
    write_text(dir / file, dspt::audit_to_csv(records));
    outputs.push_back(file);

    json entry;
    entry["clean_count"] = stats.clean_count;
    entry["noisy_count"] = stats.noisy_count;
    entry["clean_grad_l1_mean"] = stats.clean_mean;
    // Noisy-group mean is null when eta = 0 leaves the group empty.
    entry["noisy_grad_l1_mean"] =
        std::isfinite(stats.noisy_mean) ? json(stats.noisy_mean) : json();
    per_loss[kinds[i].name()] = entry;

    if (kinds[i].tag() == dspt::LossTag::CE) ce_noisy = stats.noisy_mean;
    if (kinds[i].tag() == dspt::LossTag::DSPT) dspt_noisy = stats.noisy_mean;
  }
  summary["losses"] = per_loss;
  summary["separation_factor"] =
      (std::isfinite(ce_noisy) && std::isfinite(dspt_noisy) && dspt_noisy > 0.0)
          ? json(ce_noisy / dspt_noisy)
          : json();

  write_text(dir / "summary.json", summary.dump(2) + "\n");
  outputs.push_back("summary.json");

  json config = {{"data", args.data}, {"losses", args.losses},
                 {"noise", args.noise}, {"scale", args.scale},
                 {"mode", args.mode},  {"seed", args.seed}};
  if (args.tau) config["tau"] = *args.tau;
  write_manifest(dir, "audit", config, args.seed, outputs);

  std::cout << "audit summary in " << (dir / "summary.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  bool all = false;
  std::string check;
  long trials = 10000;
  int classes = 3;
  double eta = 0.4;
  int grid = 40;
  int inputs = 4;
  int instances = 20;
  bool random_t = false;
  std::uint64_t seed = 7;
  std::string out = "verify";
};

int cmd_verify(const VerifyArgs& args) {
  std::vector<dspt::VerificationReport> reports;
  using dspt::rng::Stream;
  using dspt::rng::substream;

  if (args.all || args.check.empty()) {
    reports = dspt::run_all_checks(args.seed);
  } else if (args.check == "prop31") {
    reports.push_back(dspt::check_prop31(args.trials, 2, 50, args.seed));
  } else if (args.check == "thm32") {
    const double deltas[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    reports.push_back(dspt::check_thm32(
        deltas, std::max(args.classes, 2),
        std::max<long>(args.trials / 10, 1), args.seed));
  } else if (args.check == "prop33") {
    const int counts[] = {args.classes};
    reports.push_back(dspt::check_prop33(counts, args.trials, args.seed));
  } else if (args.check == "thm34") {
    reports.push_back(dspt::check_thm34(args.classes, args.eta, args.inputs,
                                        args.grid, args.instances, args.seed));
  } else if (args.check == "thm35") {
    const auto t = args.random_t
                       ? dspt::random_admissible_matrix(args.classes, args.seed)
                       : dspt::TransitionMatrix::pair_flip(args.classes, args.eta);
    reports.push_back(dspt::check_thm35(t, args.inputs, args.grid,
                                        args.instances, args.seed));
  } else if (args.check == "gradsep") {
    auto instance = dspt::pinned::make();
    reports.push_back(dspt::check_grad_suppression(
        instance.train, instance.model, substream(args.seed, Stream::Verify, 6)));
  } else {
    throw dspt::InvalidInputError(
        "unknown check (want prop31|thm32|prop33|thm34|thm35|gradsep): " +
        args.check);
  }

  const fs::path dir = resolve_out(args.out);
  fs::create_directories(dir);
  write_text(dir / "reports.json",
             dspt::reports_to_json_string(reports) + "\n");

  bool all_ok = true;
  for (const auto& r : reports) {
    const char* status = r.passed() ? "pass" : (r.applicable() ? "FAIL" : "n/a");
    std::cout << status << " " << r.name << " worst="
              << dspt::io::format_double(r.worst_violation) << " " << r.note
              << "\n";
    if (r.applicable() && !r.passed()) all_ok = false;
  }

  json config = {{"all", args.all},       {"check", args.check},
                 {"trials", args.trials}, {"classes", args.classes},
                 {"eta", args.eta},       {"grid", args.grid},
                 {"inputs", args.inputs}, {"instances", args.instances},
                 {"random_t", args.random_t}, {"seed", args.seed}};
  write_manifest(dir, "verify", config, args.seed, {"reports.json"});
  return all_ok ? kExitOk : kExitVerifyFailed;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string data;
  std::vector<std::string> losses = {"ce", "dspt"};
  std::vector<double> rates = {0.2, 0.4, 0.6, 0.8};
  std::vector<double> tau_values;
  std::string noise_kind = "sym";
  int epochs = 50;
  long batch = 32;
  double lr0 = 0.002;
  double scale = 30.0;
  std::string mode = "shared";
  std::uint64_t seed = 0;
  std::string out = "sweep";
};

int cmd_sweep(const SweepArgs& args) {
  if (args.data.empty()) throw dspt::InvalidInputError("sweep needs --data");
  if (args.noise_kind != "sym" && args.noise_kind != "pair")
    throw dspt::InvalidInputError("noise kind must be sym or pair");
  const auto mode = parse_mode(args.mode);

  // Expand the loss list: bare logitclip fans out over --tau-values.
  struct Setting {
    dspt::LossKind kind;
    std::optional<double> tau;
  };
  std::vector<Setting> settings;
  for (const auto& spec : args.losses) {
    if (spec == "logitclip") {
      if (args.tau_values.empty())
        throw dspt::InvalidInputError(
            "logitclip in a sweep needs --tau-values (no default threshold)");
      for (double tau : args.tau_values)
        settings.push_back({dspt::LossKind::logit_clip(tau), tau});
    } else {
      settings.push_back({dspt::LossKind::parse(spec), std::nullopt});
    }
  }

  const auto base = load_data_dir(args.data);
  const fs::path dir = resolve_out(args.out);
  fs::create_directories(dir);

  dspt::PrototypeModel zero_model(base.anchors, mode, args.scale);
  const double zero_shot = dspt::evaluate(zero_model, base.test);

  std::string csv =
      "row,loss,tau,noise_kind,rate,status,final_acc,zero_shot_test_acc,error\n";
  std::vector<std::string> outputs;
  long row = 0;

  for (size_t ri = 0; ri < args.rates.size(); ++ri) {
    const double rate = args.rates[ri];
    // All losses at one rate share the same corrupted labels.
    dspt::Dataset train = base.train;
    const auto t = args.noise_kind == "sym"
                       ? dspt::TransitionMatrix::symmetric(train.classes, rate)
                       : dspt::TransitionMatrix::pair_flip(train.classes, rate);
    dspt::apply_noise(train, t,
                      dspt::rng::substream(args.seed, dspt::rng::Stream::Noise,
                                           static_cast<std::uint64_t>(ri)));

    for (const auto& setting : settings) {
      std::string row_name = "run_" + std::to_string(row) + "_" +
                             setting.kind.name() +
                             (setting.tau ? "_" + dspt::io::format_double(*setting.tau)
                                          : "") +
                             "_" + args.noise_kind +
                             dspt::io::format_double(rate);
      std::string status = "ok";
      std::string error;
      double final_acc = std::numeric_limits<double>::quiet_NaN();
      try {
        dspt::PrototypeModel model(base.anchors, mode, args.scale);
        dspt::TrainConfig config;
        config.loss = setting.kind;
        config.epochs = args.epochs;
        config.batch = args.batch;
        config.lr0 = args.lr0;
        config.seed = dspt::rng::substream(args.seed, dspt::rng::Stream::Sweep,
                                           static_cast<std::uint64_t>(row));
        config.model = {mode, args.scale};
        config.selection = setting.kind.drops_mismatched();

        const auto metrics = dspt::train(config, train, base.test, model);
        final_acc = metrics.final_acc;

        const fs::path run_dir = dir / row_name;
        fs::create_directories(run_dir);
        write_text(run_dir / "metrics.csv", metrics.to_csv());
        outputs.push_back(row_name + "/metrics.csv");
      } catch (const std::exception& e) {
        status = "error";
        error = e.what();
      }
      csv += std::to_string(row) + "," + setting.kind.name() + "," +
             (setting.tau ? dspt::io::format_double(*setting.tau) : "") + "," +
             args.noise_kind + "," + dspt::io::format_double(rate) + "," +
             status + "," + dspt::io::format_double(final_acc) + "," +
             dspt::io::format_double(zero_shot) + "," + error + "\n";
      ++row;
    }
  }

  write_text(dir / "sweep.csv", csv);
  outputs.push_back("sweep.csv");

  json config = {{"data", args.data},     {"losses", args.losses},
                 {"rates", args.rates},   {"tau_values", args.tau_values},
                 {"noise_kind", args.noise_kind}, {"epochs", args.epochs},
                 {"batch", args.batch},   {"lr0", args.lr0},
                 {"scale", args.scale},   {"mode", args.mode},
                 {"seed", args.seed}};
  write_manifest(dir, "sweep", config, args.seed, outputs);

  std::cout << "sweep rows: " << row << ", table in "
            << (dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"double-softmax prompt-tuning laboratory"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 2 usage, 3 data format, 4 numeric abort, "
      "5 verification failure.\n"
      "DSPT_OUT_ROOT, when set, is prepended to relative --out paths.");

  GenDataArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset bundle");
  gen->add_option("--classes", gen_args.classes, "number of classes")->check(CLI::Range(2, 1 << 20));
  gen->add_option("--dim", gen_args.dim, "feature dimension");
  gen->add_option("--n-train", gen_args.n_train, "train sample count");
  gen->add_option("--n-test", gen_args.n_test, "test sample count");
  gen->add_option("--kappa", gen_args.kappa, "cluster concentration");
  gen->add_option("--anchor-perturb", gen_args.anchor_perturb,
                  "anchor perturbation (controls zero-shot accuracy)");
  gen->add_option("--seed", gen_args.seed, "rng seed");
  gen->add_option("--out", gen_args.out, "output directory");

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "run the SGD prompt-tuning loop");
  tr->add_option("--data", train_args.data, "dataset directory from gen-data");
  tr->add_option("--loss", train_args.loss,
                 "ce|dspt|smoothing[:a]|logitnorm[:t]|logitclip:t|bootstrap[:b]|"
                 "nce|gce[:q]|squarenorm|selectce");
  double tau_holder = 0.0;
  auto* tau_opt = tr->add_option("--tau", tau_holder, "logitclip threshold");
  tr->add_option("--noise", train_args.noise, "none|sym:<rate>|pair:<rate>");
  tr->add_option("--epochs", train_args.epochs, "training epochs");
  tr->add_option("--batch", train_args.batch, "batch size");
  tr->add_option("--lr", train_args.lr0, "initial learning rate");
  tr->add_option("--scale", train_args.scale, "logit temperature");
  tr->add_option("--mode", train_args.mode, "shared|perclass");
  tr->add_flag("--selection", train_args.selection,
               "drop samples whose prediction disagrees with the noisy label");
  tr->add_option("--seed", train_args.seed, "rng seed");
  tr->add_option("--out", train_args.out, "output directory");
  tr->add_option("--config", train_args.config_file,
                 "JSON config file (unknown keys rejected; flags override)");

  AuditArgs audit_args;
  auto* au = app.add_subcommand("audit", "epoch-0 per-sample gradient audit");
  au->add_option("--data", audit_args.data, "dataset directory");
  au->add_option("--losses", audit_args.losses, "comma list of losses")
      ->delimiter(',');
  double audit_tau_holder = 0.0;
  auto* audit_tau_opt = au->add_option("--tau", audit_tau_holder, "logitclip threshold");
  au->add_option("--noise", audit_args.noise, "noise spec");
  au->add_option("--scale", audit_args.scale, "logit temperature");
  au->add_option("--mode", audit_args.mode, "shared|perclass");
  au->add_option("--seed", audit_args.seed, "rng seed");
  au->add_option("--out", audit_args.out, "output directory");

  VerifyArgs verify_args;
  auto* ve = app.add_subcommand("verify", "run the certification checks");
  ve->add_flag("--all", verify_args.all, "run the full bundle");
  ve->add_option("--check", verify_args.check,
                 "prop31|thm32|prop33|thm34|thm35|gradsep");
  ve->add_option("--trials", verify_args.trials, "trial count");
  ve->add_option("--classes", verify_args.classes, "class count");
  ve->add_option("--eta", verify_args.eta, "noise rate");
  ve->add_option("--grid", verify_args.grid, "simplex grid resolution");
  ve->add_option("--inputs", verify_args.inputs, "instance input count");
  ve->add_option("--instances", verify_args.instances, "randomized instances");
  ve->add_flag("--random-t", verify_args.random_t,
               "thm35: use a random admissible matrix instead of pair-flip");
  ve->add_option("--seed", verify_args.seed, "rng seed");
  ve->add_option("--out", verify_args.out, "output directory");

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep", "train over rates x losses, one CSV");
  sw->add_option("--data", sweep_args.data, "dataset directory");
  sw->add_option("--losses", sweep_args.losses, "comma list of losses")
      ->delimiter(',');
  sw->add_option("--rates", sweep_args.rates, "comma list of noise rates")
      ->delimiter(',');
  sw->add_option("--tau-values", sweep_args.tau_values,
                 "logitclip thresholds to fan out")
      ->delimiter(',');
  sw->add_option("--noise-kind", sweep_args.noise_kind, "sym|pair");
  sw->add_option("--epochs", sweep_args.epochs, "training epochs");
  sw->add_option("--batch", sweep_args.batch, "batch size");
  sw->add_option("--lr", sweep_args.lr0, "initial learning rate");
  sw->add_option("--scale", sweep_args.scale, "logit temperature");
  sw->add_option("--mode", sweep_args.mode, "shared|perclass");
  sw->add_option("--seed", sweep_args.seed, "rng seed");
  sw->add_option("--out", sweep_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (tau_opt->count() > 0) train_args.tau = tau_holder;
  if (audit_tau_opt->count() > 0) audit_args.tau = audit_tau_holder;

  std::set<std::string> train_set_flags;
  {
    const std::map<std::string, std::string> flag_to_key = {
        {"--data", "data"},     {"--loss", "loss"},
        {"--tau", "tau"},       {"--noise", "noise"},
        {"--epochs", "epochs"}, {"--batch", "batch"},
        {"--lr", "lr0"},        {"--scale", "scale"},
        {"--mode", "mode"},     {"--selection", "selection"},
        {"--seed", "seed"},     {"--out", "out"}};
    for (const auto& [flag, key] : flag_to_key)
      if (tr->count(flag) > 0) train_set_flags.insert(key);
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (tr->parsed()) return cmd_train(train_args, train_set_flags);
    if (au->parsed()) return cmd_audit(audit_args);
    if (ve->parsed()) return cmd_verify(verify_args);
    if (sw->parsed()) return cmd_sweep(sweep_args);
  } catch (const dspt::DataFormatError& e) {
    std::cerr << "data format error: " << e.what() << "\n";
    return kExitDataFormat;
  } catch (const dspt::NumericAbortError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumericAbort;
  } catch (const dspt::InvalidInputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

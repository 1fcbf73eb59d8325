#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "sigverify/config.hpp"
#include "sigverify/error.hpp"
#include "sigverify/features.hpp"
#include "sigverify/model_io.hpp"
#include "sigverify/protocol.hpp"
#include "sigverify/rng.hpp"
#include "sigverify/synthetic.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using namespace sigverify;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

struct Paths {
  std::string corpus;
  std::string dataset;
  std::string bank;
  std::string models;
  std::string out;
  std::string report;
  std::string signature;
  std::string user;
  bool emit_roc = false;
  // grid mode
  std::vector<int> grid_hidden;
  std::vector<int> grid_iters;
  // make-testkit
  int kit_users = 10;
  int kit_genuine = 16;
  int kit_forgery = 16;
  double kit_jitter = 0.05;
};

void require_dir(const std::string& path, const char* flag) {
  if (!fs::is_directory(path))
    raise(ErrorCode::ConfigError, "'" + path + "' is not a readable directory (" + flag + ")");
}

Dataset load_checked(const std::string& root, const RunConfig& cfg, const char* flag) {
  require_dir(root, flag);
  std::vector<ParseFailure> failures;
  Dataset ds = load_dataset(root, cfg.dataset_layout(), cfg.fail_fast, &failures);
  for (const auto& f : failures) std::cerr << "warning: skipped " << f.path << ": " << f.message << "\n";
  return ds;
}

std::vector<SignatureImage> all_images(const Dataset& ds, const PreprocessConfig& pre) {
  std::vector<SignatureImage> images;
  images.reserve(ds.signature_count());
  for (const auto& [user, sigs] : ds.users) {
    for (const auto& s : sigs.genuine) images.push_back(preprocess_pipeline(s, pre));
    for (const auto& s : sigs.forgeries) images.push_back(preprocess_pipeline(s, pre));
  }
  return images;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) raise(ErrorCode::IoFailure, "short write to '" + path + "'");
}

int cmd_learn_features(const RunConfig& cfg, const Paths& paths) {
  Dataset corpus = load_checked(paths.corpus, cfg, "--corpus");
  std::vector<SignatureImage> images = all_images(corpus, cfg.preprocess_config());
  PatchSet patches = sample_patches(images, cfg.n_patches, cfg.patch_h, cfg.patch_w,
                                    named_seed(cfg.seed, "patches"));
  FeatureBank bank = train_features(patches, cfg.hidden, cfg.hyper_config(), cfg.whiten_config());
  save_model({bank, {}, cfg.to_text()}, paths.out);

  const auto& trace = bank.training_cost_trace;
  std::cout << "learned " << bank.hidden_dim() << " features from " << patches.count()
            << " patches (" << corpus.signature_count() << " signatures)\n";
  std::cout << "cost: initial " << fmt(trace.front()) << ", final " << fmt(trace.back()) << " after "
            << trace.size() - 1 << " accepted steps\n";
  std::cout << "bank written to " << paths.out << "\n";
  return kExitOk;
}

int cmd_enroll(const RunConfig& cfg, const Paths& paths, const ModelFile& bank_file) {
  Dataset ds = load_checked(paths.dataset, cfg, "--dataset");

  std::vector<std::string> users;
  if (!paths.user.empty()) {
    if (ds.users.find(paths.user) == ds.users.end())
      raise(ErrorCode::EmptyDataset, "unknown user '" + paths.user + "' in dataset");
    users.push_back(paths.user);
  } else {
    for (const auto& [u, sigs] : ds.users) users.push_back(u);
  }

  const PreprocessConfig pre = cfg.preprocess_config();
  const std::uint64_t enroll_ns = named_seed(cfg.seed, "enroll");
  std::vector<UserModel> models;
  for (const std::string& user : users) {
    const auto& genuine = ds.users.at(user).genuine;
    const int n = static_cast<int>(genuine.size());
    if (n < 2)
      raise(ErrorCode::InsufficientGenuine,
            "user " + user + " has " + std::to_string(n) + " genuine signatures; need at least 2");
    int train = static_cast<int>(std::llround(cfg.train_fraction * n));
    train = std::clamp(train, 2, n);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(named_seed(enroll_ns, user));
    shuffle(order, gen);

    std::vector<FeatureVector> feats;
    feats.reserve(train);
    for (int i = 0; i < train; ++i)
      feats.push_back(extract(bank_file.bank, preprocess_pipeline(genuine[order[i]], pre),
                              cfg.pool_rows, cfg.pool_cols));
    UserModel model = fit_user_model(feats, cfg.reg, user);
    model = calibrate_threshold(std::move(model), feats, cfg.quantile, cfg.slack);
    std::cout << "enrolled " << user << " train_count=" << model.train_count
              << " threshold=" << fmt(*model.threshold) << "\n";
    models.push_back(std::move(model));
  }

  save_model({bank_file.bank, models, cfg.to_text()}, paths.out);
  std::cout << models.size() << " user model(s) written to " << paths.out << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const Paths& paths, const ModelFile& models_file) {
  const FeatureBank bank_override = paths.bank.empty() ? FeatureBank{} : load_model(paths.bank).bank;
  const FeatureBank& bank = paths.bank.empty() ? models_file.bank : bank_override;

  const UserModel* model = nullptr;
  for (const auto& u : models_file.users)
    if (u.user_id == paths.user) model = &u;
  if (model == nullptr)
    raise(ErrorCode::EmptyDataset, "unknown user '" + paths.user + "' in model file");

  std::ifstream f(paths.signature, std::ios::binary);
  if (!f) raise(ErrorCode::IoFailure, "cannot open signature file '" + paths.signature + "'");
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  RawSignature sig = parse_signature(content, cfg.dataset_layout());

  FeatureVector v = extract(bank, preprocess_pipeline(sig, cfg.preprocess_config()),
                            cfg.pool_rows, cfg.pool_cols);
  Decision d = verify(*model, v);
  std::cout << (d.accepted ? "ACCEPT" : "REJECT") << " distance=" << fmt(d.distance)
            << " threshold=" << fmt(d.threshold) << "\n";
  return d.accepted ? kExitOk : kExitReject;
}

int cmd_evaluate(const RunConfig& cfg, const Paths& paths, const ModelFile* bank_file) {
  Dataset ds = load_checked(paths.dataset, cfg, "--dataset");

  if (!paths.grid_hidden.empty() || !paths.grid_iters.empty()) {
    if (paths.grid_hidden.empty() || paths.grid_iters.empty())
      raise(ErrorCode::ConfigError, "grid mode needs both --grid_hidden and --grid_iters");
    GridConfig grid;
    grid.hidden_sizes = paths.grid_hidden;
    grid.iteration_counts = paths.grid_iters;
    grid.patch_h = cfg.patch_h;
    grid.patch_w = cfg.patch_w;
    grid.n_patches = cfg.n_patches;
    grid.seed = cfg.seed;
    grid.hyper = cfg.hyper_config();
    grid.whiten = cfg.whiten_config();

    Dataset corpus;
    const Dataset* corpus_ptr = nullptr;
    if (!paths.corpus.empty()) {
      corpus = load_checked(paths.corpus, cfg, "--corpus");
      corpus_ptr = &corpus;
    }
    std::vector<GridCell> table = hyperparameter_grid(ds, corpus_ptr, grid, cfg.protocol_config());

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    nlohmann::ordered_json snap = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.snapshot()) snap[k] = v;
    j["protocol"]["config"] = std::move(snap);
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : table) {
      cells.push_back({{"hidden", c.hidden},
                       {"iters", c.iterations},
                       {"mean_eer", c.mean_eer},
                       {"mean_auc", c.mean_auc}});
      std::cout << "hidden=" << c.hidden << " iters=" << c.iterations << " mean_eer="
                << fmt(c.mean_eer) << " mean_auc=" << fmt(c.mean_auc) << "\n";
    }
    j["grid"] = std::move(cells);
    write_text(paths.report, j.dump(2) + "\n");
    std::cout << "grid report written to " << paths.report << "\n";
    return kExitOk;
  }

  EvaluationReport report = run_protocol(ds, bank_file->bank, cfg.protocol_config());
  report.config_snapshot = cfg.snapshot();
  write_text(paths.report, report_to_json(report, paths.emit_roc));
  std::cout << "users=" << report.per_user.size() << " mean_eer=" << fmt(report.mean_eer)
            << " mean_auc=" << fmt(report.mean_auc) << "\n";
  if (report.global_eer.has_value())
    std::cout << "global_eer=" << fmt(*report.global_eer) << " global_auc="
              << fmt(*report.global_auc) << "\n";
  std::cout << "report written to " << paths.report << "\n";
  return kExitOk;
}

int cmd_make_testkit(const RunConfig& cfg, const Paths& paths) {
  DatasetLayout layout = write_testkit(paths.out, paths.kit_users, paths.kit_genuine,
                                       paths.kit_forgery, paths.kit_jitter, cfg.seed);
  std::cout << "testkit with " << paths.kit_users << " users written to " << paths.out << "\n";
  std::cout << "evaluate with: --genuine_per_user " << layout.genuine_per_user
            << " --forgery_per_user " << layout.forgery_per_user << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online signature verification with self-taught sparse features"};
  app.require_subcommand(1);

  RunConfig cfg;
  Paths paths;

  app.set_config("--config", "", "Flat key=value config file (flags win over file entries)");

  // One flag per config key; names match the file keys exactly.
  app.add_option("--raster_width", cfg.raster_width)->capture_default_str();
  app.add_option("--raster_height", cfg.raster_height)->capture_default_str();
  app.add_option("--smooth", cfg.smooth)->capture_default_str();
  app.add_option("--smooth_factor", cfg.smooth_factor)->capture_default_str();
  app.add_option("--rotate", cfg.rotate)->capture_default_str();
  app.add_option("--normalize", cfg.normalize)->capture_default_str();
  app.add_option("--patch_h", cfg.patch_h)->capture_default_str();
  app.add_option("--patch_w", cfg.patch_w)->capture_default_str();
  app.add_option("--n_patches", cfg.n_patches)->capture_default_str();
  app.add_option("--hidden", cfg.hidden)->capture_default_str();
  app.add_option("--rho", cfg.rho)->capture_default_str();
  app.add_option("--beta", cfg.beta)->capture_default_str();
  app.add_option("--lambda", cfg.lambda)->capture_default_str();
  app.add_option("--iters", cfg.iters)->capture_default_str();
  app.add_option("--lbfgs_history", cfg.lbfgs_history)->capture_default_str();
  app.add_option("--squared_rho_hat", cfg.squared_rho_hat)->capture_default_str();
  app.add_option("--whiten_eps", cfg.whiten_eps)->capture_default_str();
  app.add_option("--variance_keep", cfg.variance_keep)->capture_default_str();
  app.add_option("--whiten_mode", cfg.whiten_mode)->capture_default_str();
  app.add_option("--pool_rows", cfg.pool_rows)->capture_default_str();
  app.add_option("--pool_cols", cfg.pool_cols)->capture_default_str();
  app.add_option("--reg", cfg.reg)->capture_default_str();
  app.add_option("--quantile", cfg.quantile)->capture_default_str();
  app.add_option("--slack", cfg.slack)->capture_default_str();
  app.add_option("--forgery_kind,--protocol", cfg.forgery_kind)->capture_default_str();
  app.add_option("--folds", cfg.folds)->capture_default_str();
  app.add_option("--train_fraction,--train-fraction", cfg.train_fraction)->capture_default_str();
  app.add_option("--random_forgery_cap", cfg.random_forgery_cap)->capture_default_str();
  app.add_option("--pooled", cfg.pooled)->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--layout_preset", cfg.layout_preset)->capture_default_str();
  app.add_option("--filename_rule", cfg.filename_rule)->capture_default_str();
  app.add_option("--column_map", cfg.column_map)->capture_default_str();
  app.add_option("--genuine_per_user", cfg.genuine_per_user)->capture_default_str();
  app.add_option("--forgery_per_user", cfg.forgery_per_user)->capture_default_str();
  app.add_option("--fail_fast", cfg.fail_fast)->capture_default_str();

  CLI::App* learn = app.add_subcommand("learn-features", "Train the feature bank on a corpus");
  learn->fallthrough();
  learn->add_option("--corpus", paths.corpus, "Unlabeled signature corpus directory")->required();
  learn->add_option("--out", paths.out, "Output bank file")->required();

  CLI::App* enroll = app.add_subcommand("enroll", "Fit per-user models from genuine signatures");
  enroll->fallthrough();
  enroll->add_option("--bank", paths.bank, "Learned feature bank file")->required();
  enroll->add_option("--dataset", paths.dataset, "Dataset directory")->required();
  enroll->add_option("--user", paths.user, "Enroll only this user (default: all)");
  enroll->add_option("--out", paths.out, "Output model file")->required();

  CLI::App* verify_cmd = app.add_subcommand("verify", "Verify one signature against a user model");
  verify_cmd->fallthrough();
  verify_cmd->add_option("--models", paths.models, "Model file from enroll")->required();
  verify_cmd->add_option("--bank", paths.bank, "Feature bank override (default: bank in --models)");
  verify_cmd->add_option("--user", paths.user, "Claimed user id")->required();
  verify_cmd->add_option("--signature", paths.signature, "Signature file to verify")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "Run the verification protocol and report");
  evaluate->fallthrough();
  evaluate->add_option("--bank", paths.bank, "Learned feature bank file");
  evaluate->add_option("--dataset", paths.dataset, "Dataset directory")->required();
  evaluate->add_option("--report", paths.report, "Output JSON report path")->required();
  evaluate->add_flag("--emit-roc", paths.emit_roc, "Include per-user ROC points in the report");
  evaluate->add_option("--grid_hidden", paths.grid_hidden,
                       "Comma-separated hidden sizes (grid mode; retrains per cell)")
      ->delimiter(',');
  evaluate->add_option("--grid_iters", paths.grid_iters,
                       "Comma-separated iteration counts (grid mode)")
      ->delimiter(',');
  evaluate->add_option("--corpus", paths.corpus,
                       "Separate unlabeled corpus for grid-mode feature learning");

  CLI::App* testkit = app.add_subcommand("make-testkit", "Generate a synthetic svc2004-style dataset");
  testkit->fallthrough();
  testkit->add_option("--out", paths.out, "Output directory")->required();
  testkit->add_option("--users", paths.kit_users)->capture_default_str();
  testkit->add_option("--genuine", paths.kit_genuine)->capture_default_str();
  testkit->add_option("--forgery", paths.kit_forgery)->capture_default_str();
  testkit->add_option("--jitter", paths.kit_jitter)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.validate();

    // Commands that read a saved artifact take every key the caller did not
    // pass (by flag or config file) from the snapshot embedded in that
    // artifact, so a model enrolled under one geometry verifies under the
    // same geometry without the flags being repeated.
    std::optional<ModelFile> artifact;
    const bool plain_evaluate =
        evaluate->parsed() && paths.grid_hidden.empty() && paths.grid_iters.empty();
    if (enroll->parsed() || verify_cmd->parsed() || plain_evaluate) {
      if (plain_evaluate) require_dir(paths.dataset, "--dataset");
      artifact = load_model(verify_cmd->parsed() ? paths.models : paths.bank);
      std::set<std::string> keep;
      for (const auto& [key, value] : cfg.snapshot())
        if (app.get_option("--" + key)->count() > 0) keep.insert(key);
      cfg.apply_text(artifact->config_text, keep);
      cfg.validate();
    }

    if (learn->parsed()) return cmd_learn_features(cfg, paths);
    if (enroll->parsed()) return cmd_enroll(cfg, paths, *artifact);
    if (verify_cmd->parsed()) return cmd_verify(cfg, paths, *artifact);
    if (evaluate->parsed()) return cmd_evaluate(cfg, paths, artifact ? &*artifact : nullptr);
    if (testkit->parsed()) return cmd_make_testkit(cfg, paths);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

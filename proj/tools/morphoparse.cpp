// Command-line front end. Talks to the toolkit only through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "morpho/morpho.h"

namespace {

// Thrown when a C API call fails; carries its status as the exit code.
struct ApiFailure {
  morpho_status status;
};

void check(morpho_status s) {
  if (s != MORPHO_OK) {
    std::cerr << "morphoparse: " << morpho_status_name(s) << ": " << morpho_last_error() << "\n";
    throw ApiFailure{s};
  }
}

struct Str {
  char* p = nullptr;
  ~Str() { morpho_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using ConfigPtr = std::unique_ptr<morpho_config, decltype(&morpho_config_free)>;
using TreebankPtr = std::unique_ptr<morpho_treebank, decltype(&morpho_treebank_free)>;
using ModelPtr = std::unique_ptr<morpho_model, decltype(&morpho_model_free)>;

ConfigPtr load_config(const std::string& path, const std::vector<std::string>& overrides, bool env) {
  morpho_config* c = nullptr;
  check(morpho_config_load(path.c_str(), &c));
  ConfigPtr cfg(c, morpho_config_free);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "morphoparse: --set expects key=value, got '" << kv << "'\n";
      throw ApiFailure{MORPHO_E_INVALID_ARGUMENT};
    }
    check(morpho_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (env) {
    int applied = 0;
    check(morpho_config_apply_env(cfg.get(), &applied));
    if (applied) std::cerr << "morphoparse: seed taken from MORPHOPARSE_SEED\n";
  }
  return cfg;
}

TreebankPtr read_treebank(const std::string& path, bool strict) {
  morpho_treebank* t = nullptr;
  Str warnings;
  check(morpho_treebank_read(path.c_str(), strict ? 1 : 0, &t, &warnings.p));
  std::cerr << warnings.str();
  return TreebankPtr(t, morpho_treebank_free);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    std::cerr << "morphoparse: cannot write " << path << "\n";
    throw ApiFailure{MORPHO_E_IO};
  }
}

std::vector<double> read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "morphoparse: cannot read " << path << "\n";
    throw ApiFailure{MORPHO_E_IO};
  }
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      std::cerr << "morphoparse: " << path << ": not a number: '" << token << "'\n";
      throw ApiFailure{MORPHO_E_PARSE};
    }
  }
  return out;
}

// "correct total" from a score file.
std::pair<long long, long long> read_counts(const std::string& path) {
  auto v = read_scores(path);
  if (v.size() != 2) {
    std::cerr << "morphoparse: " << path << ": expected two numbers, correct and total\n";
    throw ApiFailure{MORPHO_E_PARSE};
  }
  return {static_cast<long long>(v[0]), static_cast<long long>(v[1])};
}

void print_result(const morpho_test_result& r) {
  Str row;
  check(morpho_test_result_format(&r, &row.p));
  std::cout << row.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphology-aware parsing, tagging and classification"};
  app.set_version_flag("--version", morpho_version());
  app.require_subcommand(1);

  // train
  std::string config_path, checkpoint, log_path, csv_path, json_path;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "Train every cell of an experiment and report test scores");
  train->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--set", overrides, "Override a config value, e.g. --set encoder.hidden=200");
  train->add_option("--checkpoint", checkpoint, "Write the selected model(s) here");
  train->add_option("--log", log_path, "JSON-lines run log");
  train->add_option("--csv", csv_path, "Also write the report table as CSV");
  train->add_option("--json", json_path, "Also write the full report as JSON");

  // evaluate
  std::string data_config, split = "test";
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on gold data");
  evaluate->add_option("--checkpoint", checkpoint, "Trained model")->required()->check(CLI::ExistingFile);
  evaluate->add_option("-c,--config", data_config, "Config naming the data (default: the model's own)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--split", split, "train, dev or test (parsers only)")
      ->check(CLI::IsMember({"train", "dev", "test"}));

  // predict
  std::string input, ctx_path, output;
  auto* predict = app.add_subcommand("predict", "Annotate a CoNLL-U file with a trained model");
  predict->add_option("--checkpoint", checkpoint, "Trained model")->required()->check(CLI::ExistingFile);
  predict->add_option("input", input, "CoNLL-U input")->required()->check(CLI::ExistingFile);
  predict->add_option("--ctx", ctx_path, "Context dump aligned with the input")->check(CLI::ExistingFile);
  predict->add_option("-o,--output", output, "Output file (default: stdout)");

  // ablate
  int extra_epochs = 0;
  auto* ablate = app.add_subcommand("ablate", "Run the baseline/+UPOS/+UPOS+feats/+feats grid");
  ablate->add_option("-c,--config", config_path, "Base config (JSON)")->required()->check(CLI::ExistingFile);
  ablate->add_option("--set", overrides, "Override a config value");
  ablate->add_option("--extra-epochs", extra_epochs, "Also train every variant this many epochs longer")
      ->check(CLI::NonNegativeNumber);
  ablate->add_option("--log", log_path, "JSON-lines run log");
  ablate->add_option("--csv", csv_path, "Also write the table as CSV");
  ablate->add_option("--json", json_path, "Also write the full report as JSON");

  // stats
  std::string file_a, file_b;
  double alpha = 0.01;
  auto* stats = app.add_subcommand("stats", "Significance tests on score files");
  stats->require_subcommand(1);
  auto* wilcoxon = stats->add_subcommand("wilcoxon", "Paired Wilcoxon signed-rank test (one score per line)");
  wilcoxon->add_option("a", file_a, "Scores of system A")->required()->check(CLI::ExistingFile);
  wilcoxon->add_option("b", file_b, "Scores of system B")->required()->check(CLI::ExistingFile);
  wilcoxon->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  auto* ztest = stats->add_subcommand("ztest", "Two-proportion z-test (files hold \"correct total\")");
  ztest->add_option("a", file_a, "Counts of system A")->required()->check(CLI::ExistingFile);
  ztest->add_option("b", file_b, "Counts of system B")->required()->check(CLI::ExistingFile);
  ztest->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));

  // convert
  bool strict = false, lenient = false;
  auto* convert = app.add_subcommand("convert", "Validate and normalise a CoNLL-U file");
  auto* strict_flag = convert->add_flag("--strict", strict, "Reject malformed input");
  convert->add_flag("--lenient", lenient, "Repair what can be repaired, with warnings")->excludes(strict_flag);
  convert->add_option("input", input, "CoNLL-U input")->required()->check(CLI::ExistingFile);
  convert->add_option("-o,--output", output, "Output file (default: stdout)");

  // feats-quality
  std::string gold_path, predicted_path;
  auto* quality = app.add_subcommand("feats-quality", "UPOS and feature agreement of predicted with gold");
  quality->add_option("gold", gold_path, "Gold CoNLL-U")->required()->check(CLI::ExistingFile);
  quality->add_option("predicted", predicted_path, "Predicted CoNLL-U")->required()->check(CLI::ExistingFile);

  // dump-table
  std::string table;
  auto* dump = app.add_subcommand("dump-table", "List checkpoint entries or print one as text");
  dump->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  dump->add_option("name", table, "Entry to print (default: list all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the invalid-argument status; --help exits 0.
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : MORPHO_E_INVALID_ARGUMENT;
  }

  try {
    if (*train || *ablate) {
      ConfigPtr cfg = load_config(config_path, overrides, true);
      Str report;
      if (*train)
        check(morpho_train(cfg.get(), checkpoint.empty() ? nullptr : checkpoint.c_str(),
                           log_path.empty() ? nullptr : log_path.c_str(), &report.p));
      else
        check(morpho_ablate(cfg.get(), extra_epochs, log_path.empty() ? nullptr : log_path.c_str(), &report.p));
      const auto j = nlohmann::json::parse(report.str());
      std::cout << j.at("text").get<std::string>();
      if (!csv_path.empty()) emit(j.at("csv").get<std::string>(), csv_path);
      if (!json_path.empty()) emit(report.str() + "\n", json_path);
    } else if (*evaluate) {
      morpho_model* m = nullptr;
      check(morpho_model_load(checkpoint.c_str(), &m));
      ModelPtr model(m, morpho_model_free);
      ConfigPtr cfg(nullptr, morpho_config_free);
      if (!data_config.empty()) cfg = load_config(data_config, {}, false);
      Str metrics;
      check(morpho_model_evaluate(model.get(), cfg.get(), split.c_str(), &metrics.p));
      std::cout << metrics.str() << "\n";
    } else if (*predict) {
      morpho_model* m = nullptr;
      check(morpho_model_load(checkpoint.c_str(), &m));
      ModelPtr model(m, morpho_model_free);
      TreebankPtr in = read_treebank(input, false);
      Str out;
      check(morpho_model_predict(model.get(), in.get(), ctx_path.empty() ? nullptr : ctx_path.c_str(), &out.p));
      emit(out.str(), output);
    } else if (*stats) {
      morpho_test_result r{};
      if (*wilcoxon) {
        const auto a = read_scores(file_a);
        const auto b = read_scores(file_b);
        if (a.size() != b.size()) {
          std::cerr << "morphoparse: score files differ in length (" << a.size() << " vs " << b.size() << ")\n";
          return MORPHO_E_INVALID_ARGUMENT;
        }
        check(morpho_stats_wilcoxon(a.data(), b.data(), a.size(), alpha, &r));
      } else {
        const auto [x1, n1] = read_counts(file_a);
        const auto [x2, n2] = read_counts(file_b);
        check(morpho_stats_ztest(x1, n1, x2, n2, alpha, &r));
      }
      print_result(r);
    } else if (*convert) {
      TreebankPtr tb = read_treebank(input, !lenient);
      Str out;
      check(morpho_treebank_serialize(tb.get(), &out.p));
      emit(out.str(), output);
    } else if (*quality) {
      TreebankPtr gold = read_treebank(gold_path, false);
      TreebankPtr predicted = read_treebank(predicted_path, false);
      Str out;
      check(morpho_feats_quality(gold.get(), predicted.get(), &out.p));
      std::cout << out.str();
    } else if (*dump) {
      Str out;
      check(morpho_dump_table(checkpoint.c_str(), table.empty() ? nullptr : table.c_str(), &out.p));
      std::cout << out.str();
    }
  } catch (const ApiFailure& f) {
    return static_cast<int>(f.status);
  }
  return 0;
}

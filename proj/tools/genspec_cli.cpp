#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "genspec/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual learning-to-rank experiments with safe query specialization"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "simulate click logs and evaluate every method");
  std::string config_path;
  std::string alpha, epsilon, beta, budgets, repeats, seed, out, mode, dataset, threads, epochs;
  bool synthetic = false;
  run->add_option("--config", config_path, "key = value experiment file");
  run->add_option("--alpha", alpha, "click noise slope");
  run->add_option("--epsilon", epsilon, "comma-separated confidence levels");
  run->add_option("--beta", beta, "fraction of the log held out for selection");
  run->add_option("--budgets", budgets, "comma-separated interaction budgets");
  run->add_option("--repeats", repeats, "independent runs per budget");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out, "CSV output path (stdout when empty)");
  run->add_option("--mode", mode, "comma-separated: genspec, sea, bandits, no-bounds");
  run->add_option("--dataset", dataset, "LETOR directory with train.txt, vali.txt, test.txt");
  run->add_option("--threads", threads, "worker threads across repeats");
  run->add_option("--epochs", epochs, "feature-model training epochs");
  run->add_flag("--synthetic", synthetic, "use the synthetic generator, ignoring any dataset");

  auto* summary = app.add_subcommand("summarize", "mean and standard deviation per group");
  std::string input, summary_out;
  summary->add_option("input", input, "result CSV")->required();
  summary->add_option("--out", summary_out, "summary CSV path (stdout when empty)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      genspec::KeyValueConfig config;
      if (!config_path.empty()) config = genspec::KeyValueConfig::load(config_path);
      const std::pair<const char*, std::string*> overrides[] = {
          {"alpha", &alpha},     {"epsilon", &epsilon}, {"beta", &beta},
          {"budgets", &budgets}, {"repeats", &repeats}, {"seed", &seed},
          {"out", &out},         {"mode", &mode},       {"dataset", &dataset},
          {"threads", &threads}, {"epochs", &epochs}};
      for (const auto& [key, value] : overrides) {
        if (!value->empty()) config.set(key, *value);
      }
      auto experiment = genspec::ExperimentConfig::from_config(config);
      if (synthetic) experiment.dataset_dir.clear();
      const auto rows = genspec::run_experiment(experiment);
      if (experiment.out.empty()) {
        genspec::write_csv(std::cout, rows);
      } else {
        std::ofstream file(experiment.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + experiment.out);
        genspec::write_csv(file, rows);
      }
    } else if (*summary) {
      std::ifstream file(input, std::ios::binary);
      if (!file) throw std::runtime_error("cannot read " + input);
      const auto rows = genspec::read_csv(file);
      const auto table = genspec::summarize(rows);
      if (summary_out.empty()) {
        genspec::write_summary_csv(std::cout, table);
      } else {
        std::ofstream dest(summary_out, std::ios::binary);
        if (!dest) throw std::runtime_error("cannot write " + summary_out);
        genspec::write_summary_csv(dest, table);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

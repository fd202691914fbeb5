#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "printguard/app/commands.hpp"

namespace pg = printguard;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic print-error corpora, CNN training and text-segment classification"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value config file")->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("generate", "Render, corrupt and split a labeled corpus");
  std::string gen_out;
  int gen_count = 0;
  gen->add_option("-o,--out", gen_out, "Output directory")->required();
  gen->add_option("-n,--count", gen_count, "Number of samples (overrides config)")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train the classifier on a manifest's train split");
  std::string train_manifest, model_out;
  train->add_option("-m,--manifest", train_manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
  train->add_option("-o,--model-out", model_out, "Model file to write")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a model on one split");
  std::string eval_model, eval_manifest, eval_split = "test", metrics_out, dump_dir;
  eval->add_option("--model", eval_model, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("-m,--manifest", eval_manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
  eval->add_option("-s,--split", eval_split, "train, test or validation")
      ->check(CLI::IsMember({"train", "test", "validation"}));
  eval->add_option("-o,--out", metrics_out, "Metrics JSON to write")->required();
  eval->add_option("-d,--dump", dump_dir, "Directory for misclassified samples");

  auto* predict = app.add_subcommand("predict", "Classify one PGM text segment");
  std::string predict_model, predict_image;
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("image", predict_image, "PGM image")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer");

  auto* segment = app.add_subcommand("segment", "Split a scanned sheet into word segments");
  std::string sheet_path, segment_out;
  segment->add_option("sheet", sheet_path, "PGM or PPM sheet")->required()->check(CLI::ExistingFile);
  segment->add_option("-o,--out", segment_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (predict->parsed()) return pg::app::cmd_predict(predict_model, predict_image, std::cout, std::cerr);

  try {
    if (gradcheck->parsed()) return pg::app::cmd_gradcheck(std::cout);

    pg::app::RunConfig cfg;
    if (!config_path.empty()) cfg = pg::app::load_config(config_path);
    pg::app::apply_environment(cfg);
    if (gen_count > 0) cfg.data.count = gen_count;
    cfg.validate();

    if (gen->parsed()) {
      const auto manifest = pg::app::cmd_generate(cfg, gen_out, std::cout);
      std::cout << "manifest " << manifest.string() << "\n";
    } else if (train->parsed()) {
      const auto s = pg::app::cmd_train(cfg, train_manifest, model_out, std::cout);
      std::cout << "model " << model_out << " (" << s.result.iterations << " iterations, " << s.wall_seconds
                << " s)\n";
    } else if (eval->parsed()) {
      pg::app::cmd_eval(cfg, eval_model, eval_manifest, pg::dataset::parse_split(eval_split), metrics_out, dump_dir,
                        std::cout);
    } else if (segment->parsed()) {
      pg::app::cmd_segment(cfg, sheet_path, segment_out, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pg::app::kExitError;
  }
  return pg::app::kExitOk;
}

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "graspsynth/pipeline.hpp"

using namespace graspsynth;

int main(int argc, char** argv) {
  CLI::App app{"grasp synthesis pipeline: scene capture, dense annotation, "
               "regressor training, selection, and evaluation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "run";
  std::uint64_t seed = 7;
  int scenes = 2;
  int objects = 4;
  int top_k = 10;

  CLI::App* synth = app.add_subcommand("synth", "settle cluttered scenes and sample their complete clouds");
  synth->add_option("--config", config_path, "base config file (JSON)")->check(CLI::ExistingFile);
  CLI::Option* seed_opt = synth->add_option("--seed", seed, "master seed");
  CLI::Option* scenes_opt = synth->add_option("--scenes", scenes, "number of scenes");
  CLI::Option* objects_opt = synth->add_option("--objects", objects, "objects per scene (1-15)");
  synth->add_option("--out", out_dir, "run directory");

  CLI::App* render = app.add_subcommand("render", "cast depth views, add noise, filter, estimate normals");
  render->add_option("--out", out_dir, "run directory");

  CLI::App* annotate = app.add_subcommand("annotate", "synthesize scored grasps and build the training dataset");
  annotate->add_option("--out", out_dir, "run directory");

  CLI::App* train = app.add_subcommand("train", "fit the per-point grasp regressor");
  train->add_option("--out", out_dir, "run directory");

  CLI::App* select = app.add_subcommand("select", "run NMS selection over regressor proposals");
  select->add_option("--out", out_dir, "run directory");
  select->add_option("--top-k", top_k, "grasps to keep per scene")->check(CLI::PositiveNumber);

  CLI::App* eval = app.add_subcommand("eval", "score selected grasps and tabulate recall by angle");
  eval->add_option("--out", out_dir, "run directory");

  CLI::App* exp = app.add_subcommand("export", "write viewer meshes and grasp markers");
  exp->add_option("--out", out_dir, "run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) {
      PipelineConfig config;
      if (!config_path.empty()) config = load_pipeline_config(config_path);
      if (*seed_opt) config.seed = seed;
      if (*scenes_opt) config.scenes = scenes;
      if (*objects_opt) config.objects = objects;
      run_synth(config, out_dir);
      std::printf("synth: %d scenes of %d objects -> %s\n", config.scenes, config.objects,
                  out_dir.c_str());
    } else if (render->parsed()) {
      run_render(out_dir);
      std::printf("render: views written to %s/views\n", out_dir.c_str());
    } else if (annotate->parsed()) {
      run_annotate(out_dir);
      std::printf("annotate: dataset written to %s/dataset.gsds\n", out_dir.c_str());
    } else if (train->parsed()) {
      run_train(out_dir);
      std::printf("train: model written to %s/model.gsnn\n", out_dir.c_str());
    } else if (select->parsed()) {
      run_select(out_dir, top_k);
      std::printf("select: top-%d grasps written to %s/selection\n", top_k, out_dir.c_str());
    } else if (eval->parsed()) {
      run_eval(out_dir);
      std::printf("eval: report written to %s/eval\n", out_dir.c_str());
    } else if (exp->parsed()) {
      run_export(out_dir);
      std::printf("export: meshes written to %s/export\n", out_dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

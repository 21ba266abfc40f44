// eigengaze: learn per-object eigenspaces from appearance images and
// recognize unknown appearances by nearest-neighbour search.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eigengaze/commands.hpp"
#include "eigengaze/numfmt.hpp"

namespace fs = std::filesystem;
using namespace eigengaze;

namespace {

struct SharedFlags {
  std::size_t side = 32;
  std::string angles = "0:90:10";
  double tau = 0.95;
  bool uncentered = false;
  std::string norm = "unit";
  std::uint64_t seed = 1;
  std::string threshold = "auto";
  std::optional<std::size_t> k;
  bool in_space_only = false;
  bool text_pgm = false;

  cli::RunConfig resolve() const {
    cli::RunConfig cfg;
    cfg.side = side;
    cfg.angles = cli::parse_angles(angles);
    cfg.tau = tau;
    cfg.centered = !uncentered;
    cfg.norm = parse_norm_mode(norm);
    cfg.seed = seed;
    if (threshold != "auto") {
      cfg.threshold = numfmt::parse_real(threshold);
      if (!cfg.threshold || !(*cfg.threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "--threshold must be positive or 'auto'");
    }
    cfg.k = k;
    cfg.in_space_only = in_space_only;
    cfg.text_pgm = text_pgm;
    return cfg;
  }
};

void add_synth_flags(CLI::App* app, SharedFlags& f) {
  app->add_option("--side", f.side, "Image side in pixels")->check(CLI::PositiveNumber);
  app->add_option("--angles", f.angles, "View angles: 'a,b,c' or 'start:stop:step'");
  app->add_option("--seed", f.seed, "Seed for synthetic objects and occlusions");
  app->add_flag("--text", f.text_pgm, "Write plain (P2) instead of binary (P5) PGM");
}

void add_model_flags(CLI::App* app, SharedFlags& f) {
  app->add_option("--tau", f.tau, "Energy threshold for choosing k")->check(CLI::Range(0.0, 1.0));
  app->add_flag("--uncentered,!--centered", f.uncentered, "Skip mean subtraction (Q = X X^T on raw columns)");
  app->add_option("--norm", f.norm, "Appearance normalization")->check(CLI::IsMember({"raw", "unit"}));
  app->add_option("--k", f.k, "Fix the eigenspace dimension instead of using --tau")->check(CLI::PositiveNumber);
}

void add_recognition_flags(CLI::App* app, SharedFlags& f) {
  app->add_option("--threshold", f.threshold, "Unknown-object threshold, or 'auto'");
  app->add_flag("--in-space-only", f.in_space_only, "Score by in-space distance only (ignore residual)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Appearance eigenspaces: synthesize, learn, recognize, evaluate"};
  app.require_subcommand(1);

  SharedFlags flags;
  std::optional<std::string> registry;
  std::vector<std::string> objects;
  fs::path out_dir, in_file, out_file, image_file, manifest_file, model_file;
  std::optional<fs::path> csv_out, text_out, dataset_dir, learn_manifest;
  std::optional<std::string> object_id;
  std::vector<std::string> images, enroll;
  OcclusionSpec occ;
  std::optional<std::size_t> dims;
  unsigned threads = 1;
  cli::ExperimentOptions exp_opts;

  auto* synth = app.add_subcommand("synth", "Render synthetic views <obj>_<angle>.pgm");
  synth->add_option("objects", objects, "Object ids")->required();
  synth->add_option("-o,--out", out_dir, "Output directory")->required();
  add_synth_flags(synth, flags);

  auto* occlude = app.add_subcommand("occlude", "Paint a rectangular occlusion onto a PGM");
  occlude->add_option("input", in_file, "Input PGM")->required();
  occlude->add_option("output", out_file, "Output PGM")->required();
  occlude->add_option("--x0", occ.x0, "Left edge")->required();
  occlude->add_option("--y0", occ.y0, "Top edge")->required();
  occlude->add_option("--width", occ.w, "Width")->required();
  occlude->add_option("--height", occ.h, "Height")->required();
  occlude->add_option("--fill", occ.fill, "Fill value");
  occlude->add_flag("--text", flags.text_pgm, "Write plain (P2) PGM");

  auto* learn = app.add_subcommand("learn", "Build an object's eigenspace and add it to the registry");
  learn->add_option("images", images, "Image files or wildcard patterns (<name>_<angle>[_occ].pgm)");
  learn->add_option("--manifest", learn_manifest, "Labeled image list: path<TAB>object_id[<TAB>angle[<TAB>occluded]]");
  learn->add_option("--object", object_id, "Object id (required with image files; filters a manifest)");
  learn->add_option("--registry", registry, "Registry directory (default $EIGENGAZE_REGISTRY)");
  learn->add_option("--threshold", flags.threshold, "Unknown-object threshold stored in the registry, or 'auto'");
  add_model_flags(learn, flags);

  auto* recognize = app.add_subcommand("recognize", "Recognize one image; exit 0 known, 2 unknown");
  recognize->add_option("image", image_file, "Query PGM")->required();
  recognize->add_option("--registry", registry, "Registry directory (default $EIGENGAZE_REGISTRY)");
  recognize->add_option("--enroll", enroll, "Views to enroll as a new object if the query is unknown");
  add_recognition_flags(recognize, flags);
  add_model_flags(recognize, flags);

  auto* evaluate = app.add_subcommand("evaluate", "Recognition rate r = m/P over a labeled manifest");
  evaluate->add_option("manifest", manifest_file, "Query manifest")->required();
  evaluate->add_option("--registry", registry, "Registry directory (default $EIGENGAZE_REGISTRY)");
  evaluate->add_option("--csv", csv_out, "Write confusion matrix + summary CSV");
  evaluate->add_option("--report", text_out, "Write the text report");
  evaluate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  evaluate->add_flag("--in-space-only", flags.in_space_only, "Score by in-space distance only (ignore residual)");

  auto* inspect = app.add_subcommand("inspect", "Dump manifold coordinates of a model as CSV");
  inspect->add_option("model", model_file, "Model file (.eig)")->required();
  inspect->add_option("--dims", dims, "Leading eigenvector axes to print (default min(3, k))")->check(CLI::PositiveNumber);

  auto* experiment = app.add_subcommand("experiment", "Run the synthetic capture/learn/recognize protocol");
  experiment->add_option("objects", objects, "Object ids (default: four synthetic objects)");
  experiment->add_option("--out", dataset_dir, "Also write the generated dataset here");
  add_synth_flags(experiment, flags);
  add_model_flags(experiment, flags);
  experiment->add_flag("--in-space-only", flags.in_space_only, "Score by in-space distance only (ignore residual)");
  experiment->add_option("--occluded-train", exp_opts.occluded_train, "Occluded training views per object");
  experiment->add_option("--occluded-queries", exp_opts.occluded_queries, "Occluded query views per object");
  experiment->add_flag("--per-view-occluder", exp_opts.per_view_occluder,
                       "Place each occluder independently instead of once per object");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors share exit code 1 with every other failure
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitError;
  }

  return cli::run_command(
      [&]() -> int {
        const cli::RunConfig cfg = flags.resolve();
        if (*synth) return cli::cmd_synth(objects, cfg, out_dir, std::cout);
        if (*occlude) return cli::cmd_occlude(in_file, occ, out_file, !cfg.text_pgm, std::cout);
        if (*learn)
          return cli::cmd_learn({object_id, images, learn_manifest}, cfg, cli::resolve_registry(registry), std::cout);
        if (*recognize) return cli::cmd_recognize(image_file, cli::resolve_registry(registry), cfg, enroll, std::cout);
        if (*evaluate)
          return cli::cmd_evaluate(manifest_file, cli::resolve_registry(registry), csv_out, text_out, cfg, threads,
                                   std::cout);
        if (*inspect) return cli::cmd_inspect(model_file, dims, std::cout);
        if (*experiment) return cli::cmd_experiment(objects, cfg, dataset_dir, std::cout, exp_opts);
        return cli::kExitError;
      },
      std::cerr);
}

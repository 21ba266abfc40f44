#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "eigengaze/eigenspace.hpp"
#include "eigengaze/imgio.hpp"

// Implementations behind the `eigengaze` subcommands. Each returns the
// process exit code (0 success or Known, 2 Unknown) and throws
// eigengaze::Error on failure; run_command() maps that to exit code 1.
namespace eigengaze::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnknown = 2;

struct RunConfig {
  std::size_t side = 32;
  std::vector<int> angles{0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  double tau = 0.95;
  bool centered = true;
  NormMode norm = NormMode::Unit;
  std::uint64_t seed = 1;
  std::optional<double> threshold;  // nullopt = auto
  std::optional<std::size_t> k;
  bool in_space_only = false;
  bool text_pgm = false;

  EigenspaceConfig eigenspace() const;
};

/// "0,10,20" or "start:stop:step" (inclusive); every angle in [0, 359].
std::vector<int> parse_angles(std::string_view text);

/// One `path<TAB>object_id[<TAB>angle[<TAB>occluded]]` line.
struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest's directory
  std::string object_id;
  int angle = 0;
  bool occluded = false;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
std::string format_manifest(const std::vector<ManifestEntry>& entries);

/// Angle and occlusion flag from a file name `<anything>_<angle>[_occ].pgm`.
ViewLabel label_from_filename(const std::filesystem::path& path, const std::string& object_id);

/// Expands shell-style wildcards; names without wildcards pass through.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns);

RasterImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const RasterImage& image, bool binary);

int cmd_synth(const std::vector<std::string>& objects, const RunConfig& config, const std::filesystem::path& out_dir,
              std::ostream& out);

int cmd_occlude(const std::filesystem::path& in_file, const OcclusionSpec& spec, const std::filesystem::path& out_file,
                bool binary, std::ostream& out);

struct LearnInputs {
  std::optional<std::string> object_id;
  std::vector<std::string> images;              // files or wildcard patterns
  std::optional<std::filesystem::path> manifest;
};

int cmd_learn(const LearnInputs& inputs, const RunConfig& config, const std::filesystem::path& registry_dir,
              std::ostream& out);

/// Known/Unknown decision for one image; with enroll_views an Unknown query
/// enrolls those views as a new object and the registry is saved.
int cmd_recognize(const std::filesystem::path& image_file, const std::filesystem::path& registry_dir,
                  const RunConfig& config, const std::vector<std::string>& enroll_views, std::ostream& out);

int cmd_evaluate(const std::filesystem::path& manifest, const std::filesystem::path& registry_dir,
                 const std::optional<std::filesystem::path>& csv_out,
                 const std::optional<std::filesystem::path>& text_out, const RunConfig& config, unsigned threads,
                 std::ostream& out);

/// CSV of manifold coordinates; dims defaults to min(3, k).
int cmd_inspect(const std::filesystem::path& model_file, std::optional<std::size_t> dims, std::ostream& out);

struct ExperimentOptions {
  std::size_t occluded_train = 1;    // per object
  std::size_t occluded_queries = 2;  // per object
  bool per_view_occluder = false;
};

/// Full synthetic capture-learn-recognize protocol; optionally writes the
/// generated dataset (PGMs plus train/query manifests) to out_dir.
int cmd_experiment(const std::vector<std::string>& objects, const RunConfig& config,
                   const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
                   const ExperimentOptions& options = {});

/// --registry value, else $EIGENGAZE_REGISTRY, else InvalidArgument.
std::filesystem::path resolve_registry(const std::optional<std::string>& flag);

/// Runs a command, printing any Error to `err` and returning kExitError.
template <class F>
int run_command(F&& f, std::ostream& err);

}  // namespace eigengaze::cli

#include "eigengaze/error.hpp"

template <class F>
int eigengaze::cli::run_command(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const eigengaze::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

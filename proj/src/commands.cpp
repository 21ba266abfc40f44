#include "eigengaze/commands.hpp"

#include <glob.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "eigengaze/experiment.hpp"
#include "eigengaze/linalg.hpp"
#include "eigengaze/numfmt.hpp"
#include "eigengaze/recog.hpp"
#include "eigengaze/registry.hpp"

namespace fs = std::filesystem;

namespace eigengaze::cli {

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

void require_object_id(const std::string& id) {
  if (!valid_object_id(id))
    throw Error(ErrorCode::InvalidArgument, "object id '" + id + "' must match [A-Za-z0-9._-]+ and not start with '.'");
}

bool has_wildcard(std::string_view s) { return s.find_first_of("*?[") != std::string_view::npos; }

std::string view_file_name(const ViewLabel& label) {
  return label.object_id + "_" + std::to_string(label.view_angle_deg) + (label.occluded ? "_occ" : "") + ".pgm";
}

NormMode registry_norm(const std::vector<std::shared_ptr<const Eigenspace>>& spaces, NormMode fallback) {
  return spaces.empty() ? fallback : spaces.front()->config().norm_mode;
}

std::unique_ptr<ObjectRegistry> open_or_create(const fs::path& dir, const RunConfig& config) {
  if (fs::exists(dir / "registry.manifest")) {
    auto reg = load_registry(dir);
    if (config.threshold) {
      auto policy = reg->policy();
      policy.unknown_threshold = config.threshold;
      reg->set_policy(policy);
    }
    return reg;
  }
  return std::make_unique<ObjectRegistry>(EnrollmentPolicy{config.threshold, 1.5});
}

void print_energy_table(std::ostream& out, const std::vector<double>& spectrum, std::size_t k) {
  double total = 0.0;
  for (double v : spectrum) total += v;
  out << "  i  eigenvalue  energy  cumulative\n";
  double cumulative = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    cumulative += spectrum[i];
    out << "  " << (i + 1) << "  " << numfmt::real(spectrum[i], 6) << "  " << numfmt::fixed(spectrum[i] / total, 4)
        << "  " << numfmt::fixed(cumulative / total, 4) << (i + 1 == k ? "  <- k" : "") << "\n";
  }
}

}  // namespace

EigenspaceConfig RunConfig::eigenspace() const {
  EigenspaceConfig cfg;
  cfg.centered = centered;
  cfg.norm_mode = norm;
  cfg.energy_threshold = tau;
  cfg.k_override = k;
  return cfg;
}

std::vector<int> parse_angles(std::string_view text) {
  const auto bad = [&] { return Error(ErrorCode::InvalidArgument, "bad angle list '" + std::string(text) + "'"); };
  std::vector<int> angles;
  if (text.find(':') != std::string_view::npos) {
    std::vector<std::int64_t> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = text.find(':', start);
      auto v = numfmt::parse_int(text.substr(start, colon == std::string_view::npos ? text.npos : colon - start));
      if (!v) throw bad();
      parts.push_back(*v);
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0]) throw bad();
    for (auto a = parts[0]; a <= parts[1]; a += parts[2]) angles.push_back(static_cast<int>(a));
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      auto v = numfmt::parse_int(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
      if (!v) throw bad();
      angles.push_back(static_cast<int>(*v));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  if (angles.empty()) throw bad();
  for (int a : angles) {
    if (a < 0 || a > 359) throw Error(ErrorCode::InvalidArgument, "angle " + std::to_string(a) + " outside [0, 359]");
  }
  return angles;
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest) {
  std::istringstream in(read_bytes(manifest));
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const auto bad = [&](const std::string& what) {
      return Error(ErrorCode::InvalidArgument, manifest.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (cols.size() < 2 || cols.size() > 4 || cols[0].empty()) throw bad("expected path<TAB>object_id[<TAB>angle[<TAB>occluded]]");
    if (!valid_object_id(cols[1])) throw bad("invalid object id '" + cols[1] + "'");
    ManifestEntry e;
    e.path = fs::path(cols[0]).is_absolute() ? fs::path(cols[0]) : manifest.parent_path() / cols[0];
    e.object_id = cols[1];
    if (cols.size() >= 3) {
      auto angle = numfmt::parse_int(cols[2]);
      if (!angle || *angle < 0 || *angle > 359) throw bad("angle must be an integer in [0, 359]");
      e.angle = static_cast<int>(*angle);
    } else {
      e.angle = label_from_filename(e.path, e.object_id).view_angle_deg;
    }
    if (cols.size() == 4) {
      if (cols[3] != "0" && cols[3] != "1") throw bad("occluded flag must be 0 or 1");
      e.occluded = cols[3] == "1";
    } else if (cols.size() == 2) {
      e.occluded = label_from_filename(e.path, e.object_id).occluded;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.path.generic_string() + "\t" + e.object_id + "\t" + std::to_string(e.angle) + "\t" +
           (e.occluded ? "1" : "0") + "\n";
  }
  return out;
}

ViewLabel label_from_filename(const fs::path& path, const std::string& object_id) {
  std::string stem = path.stem().string();
  bool occluded = false;
  if (stem.size() > 4 && stem.ends_with("_occ")) {
    occluded = true;
    stem.resize(stem.size() - 4);
  }
  int angle = 0;
  const auto underscore = stem.rfind('_');
  if (underscore != std::string::npos) {
    auto v = numfmt::parse_int(std::string_view(stem).substr(underscore + 1));
    if (v && *v >= 0 && *v <= 359) angle = static_cast<int>(*v);
  }
  return ViewLabel(object_id, angle, occluded);
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> out;
  for (const auto& p : patterns) {
    if (!has_wildcard(p)) {
      out.emplace_back(p);
      continue;
    }
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    ::globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw Error(ErrorCode::IoError, "cannot expand '" + p + "'");
  }
  return out;
}

RasterImage read_image(const fs::path& path) { return parse_pgm(read_bytes(path)); }

void write_image(const fs::path& path, const RasterImage& image, bool binary) {
  write_bytes(path, write_pgm(image, binary));
}

fs::path resolve_registry(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("EIGENGAZE_REGISTRY"); env && *env) return env;
  throw Error(ErrorCode::InvalidArgument, "no registry directory: pass --registry or set EIGENGAZE_REGISTRY");
}

int cmd_synth(const std::vector<std::string>& objects, const RunConfig& config, const fs::path& out_dir,
              std::ostream& out) {
  if (objects.empty()) throw Error(ErrorCode::InvalidArgument, "no object ids given");
  for (const auto& id : objects) require_object_id(id);
  std::size_t written = 0;
  for (const auto& id : objects) {
    for (int angle : config.angles) {
      write_image(out_dir / view_file_name(ViewLabel(id, angle, false)), synth_view(id, angle, config.side, config.seed),
                  !config.text_pgm);
      ++written;
    }
  }
  out << "wrote " << written << " images to " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_occlude(const fs::path& in_file, const OcclusionSpec& spec, const fs::path& out_file, bool binary,
                std::ostream& out) {
  const RasterImage img = read_image(in_file);
  const RasterImage occluded = apply_occlusion(img, spec);
  write_image(out_file, occluded, binary);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < img.size(); ++i) changed += img.samples()[i] != occluded.samples()[i] ? 1 : 0;
  out << "occluded " << out_file.string() << " (" << changed << " samples changed)\n";
  return kExitOk;
}

int cmd_learn(const LearnInputs& inputs, const RunConfig& config, const fs::path& registry_dir, std::ostream& out) {
  // object id -> (path, label), objects in first-seen order
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<fs::path, ViewLabel>>> groups;
  const auto add = [&](const std::string& id, fs::path path, ViewLabel label) {
    if (!groups.count(id)) order.push_back(id);
    groups[id].emplace_back(std::move(path), std::move(label));
  };

  if (inputs.manifest) {
    for (auto& e : read_manifest(*inputs.manifest)) {
      if (inputs.object_id && e.object_id != *inputs.object_id) continue;
      add(e.object_id, e.path, ViewLabel(e.object_id, e.angle, e.occluded));
    }
  } else {
    if (!inputs.object_id) throw Error(ErrorCode::InvalidArgument, "--object is required when learning from image files");
    require_object_id(*inputs.object_id);
    for (auto& p : expand_inputs(inputs.images)) add(*inputs.object_id, p, label_from_filename(p, *inputs.object_id));
  }
  if (order.empty()) throw Error(ErrorCode::NoImages, "no images to learn from");

  auto reg = open_or_create(registry_dir, config);
  const EigenspaceConfig cfg = config.eigenspace();
  for (const auto& id : order) {
    std::vector<AppearanceVector> views;
    std::size_t occluded = 0;
    for (const auto& [path, label] : groups[id]) {
      views.push_back(vectorize(read_image(path), cfg.norm_mode, label));
      occluded += label.occluded ? 1 : 0;
    }
    if (reg->contains(id)) throw Error(ErrorCode::DuplicateObject, "object '" + id + "' already enrolled");
    std::vector<double> spectrum;
    Eigenspace es = build_eigenspace(id, views, cfg, &spectrum);
    out << "object " << id << ": " << views.size() << " appearances (" << occluded << " occluded), dim " << es.dim()
        << "\n";
    print_energy_table(out, spectrum, es.k());
    out << "chosen k = " << es.k() << (cfg.k_override ? " (override)" : " (tau " + numfmt::real(cfg.energy_threshold, 6) + ")")
        << "\n";
    reg->add(std::move(es));
  }
  save_registry(*reg, registry_dir);
  out << "registry " << registry_dir.string() << ": " << reg->size() << " object(s)\n";
  return kExitOk;
}

int cmd_recognize(const fs::path& image_file, const fs::path& registry_dir, const RunConfig& config,
                  const std::vector<std::string>& enroll_views, std::ostream& out) {
  auto reg = load_registry(registry_dir);
  const auto saved_policy = reg->policy();
  if (config.threshold) {
    auto policy = saved_policy;
    policy.unknown_threshold = config.threshold;
    reg->set_policy(policy);
  }
  const auto spaces = reg->snapshot();
  if (spaces.empty() && enroll_views.empty()) throw Error(ErrorCode::EmptyRegistry, "registry " + registry_dir.string() + " is empty");

  const NormMode mode = registry_norm(spaces, config.norm);
  const AppearanceVector query = vectorize(read_image(image_file), mode);
  RecognitionOptions options;
  options.in_space_only = config.in_space_only;

  std::optional<std::vector<AppearanceVector>> pending;
  EigenspaceConfig cfg = config.eigenspace();
  cfg.norm_mode = mode;
  if (!enroll_views.empty()) {
    pending.emplace();
    for (const auto& p : expand_inputs(enroll_views)) pending->push_back(vectorize(read_image(p), mode, label_from_filename(p, "")));
    if (pending->empty()) throw Error(ErrorCode::NoImages, "no enrollment views found");
  }
  const Decision d = pending ? classify_or_enroll(*reg, query, std::span<const AppearanceVector>(*pending), cfg, options)
                             : classify_or_enroll(*reg, query, std::nullopt, cfg, options);

  if (d.result) {
    const auto& r = *d.result;
    out << "best " << r.best_object << "\n";
    out << "view " << r.best_view.view_angle_deg << (r.best_view.occluded ? " (occluded)" : "") << "\n";
    out << "in_space " << numfmt::real(r.in_space_distance, 8) << "\n";
    out << "residual " << numfmt::real(r.residual, 8) << "\n";
    out << "score " << numfmt::real(r.combined_score, 8) << "\n";
    out << "threshold " << numfmt::real(d.threshold, 8) << "\n";
    out << "candidates";
    for (const auto& c : r.ranked_candidates) out << " " << c.object_id << ":" << numfmt::real(c.score, 8);
    out << "\n";
  }
  out << "decision " << (d.known ? "known " + d.result->best_object : std::string("unknown")) << "\n";
  if (d.enrolled_id) {
    reg->set_policy(saved_policy);
    save_registry(*reg, registry_dir);
    out << "enrolled " << *d.enrolled_id << "\n";
  }
  return d.known ? kExitOk : kExitUnknown;
}

int cmd_evaluate(const fs::path& manifest, const fs::path& registry_dir, const std::optional<fs::path>& csv_out,
                 const std::optional<fs::path>& text_out, const RunConfig& config, unsigned threads,
                 std::ostream& out) {
  const auto entries = read_manifest(manifest);
  if (entries.empty()) throw Error(ErrorCode::EmptyQuerySet, "manifest " + manifest.string() + " lists no queries");
  auto reg = load_registry(registry_dir);
  const auto spaces = reg->snapshot();
  if (spaces.empty()) throw Error(ErrorCode::EmptyRegistry, "registry " + registry_dir.string() + " is empty");
  const NormMode mode = registry_norm(spaces, config.norm);

  std::vector<LabeledQuery> queries;
  queries.reserve(entries.size());
  for (const auto& e : entries)
    queries.push_back({vectorize(read_image(e.path), mode, ViewLabel(e.object_id, e.angle, e.occluded)), e.object_id});

  RecognitionOptions options;
  options.in_space_only = config.in_space_only;
  const EvaluationReport report = evaluate(*reg, queries, options, threads);
  const std::string text = report_text(report);
  if (csv_out) write_bytes(*csv_out, report_csv(report));
  if (text_out) write_bytes(*text_out, text);
  out << text;
  out << "r = " << numfmt::fixed(report.rate(), 4) << "\n";
  return kExitOk;
}

int cmd_inspect(const fs::path& model_file, std::optional<std::size_t> dims, std::ostream& out) {
  const Eigenspace es = load_model(read_bytes(model_file));
  const std::size_t n = dims.value_or(std::min<std::size_t>(3, es.k()));
  const auto rows = dump_coordinates(es, n);
  out << "angle_deg,occluded";
  for (std::size_t i = 1; i <= n; ++i) out << ",e" << i;
  out << "\n";
  for (const auto& row : rows) {
    out << row.angle_deg << "," << (row.occluded ? 1 : 0);
    for (double c : row.coords) out << "," << numfmt::real(c);
    out << "\n";
  }
  return kExitOk;
}

int cmd_experiment(const std::vector<std::string>& objects, const RunConfig& config,
                   const std::optional<fs::path>& out_dir, std::ostream& out, const ExperimentOptions& options) {
  ProtocolConfig pc;
  if (!objects.empty()) pc.objects = objects;
  for (const auto& id : pc.objects) require_object_id(id);
  pc.side = config.side;
  pc.train_angles = config.angles;
  pc.seed = config.seed;
  pc.eigenspace = config.eigenspace();
  pc.recognition.in_space_only = config.in_space_only;
  pc.occluded_train_per_object = options.occluded_train;
  pc.occluded_queries_per_object = options.occluded_queries;
  pc.placement = options.per_view_occluder ? OccluderPlacement::PerView : OccluderPlacement::PerObject;

  if (out_dir) {
    const ProtocolData data = make_protocol_data(pc);
    const auto dump = [&](const std::vector<LabeledImage>& set, const std::string& sub) {
      std::vector<ManifestEntry> entries;
      for (const auto& li : set) {
        const fs::path rel = fs::path(sub) / view_file_name(li.label);
        write_image(*out_dir / rel, li.image, !config.text_pgm);
        entries.push_back({rel, li.label.object_id, li.label.view_angle_deg, li.label.occluded});
      }
      write_bytes(*out_dir / (sub + ".tsv"), format_manifest(entries));
    };
    dump(data.training, "train");
    dump(data.queries, "queries");
    out << "dataset written to " << out_dir->string() << " (train.tsv, queries.tsv)\n";
  }

  const ProtocolOutcome outcome = run_protocol(pc);
  for (std::size_t i = 0; i < pc.objects.size(); ++i) out << "object " << pc.objects[i] << ": k = " << outcome.chosen_k[i] << "\n";
  out << report_text(outcome.report);
  out << "r = " << numfmt::fixed(outcome.report.rate(), 4) << "\n";
  return kExitOk;
}

}  // namespace eigengaze::cli

/******************************************************************************
 * Copyright 2026 The cisca-kit Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cisca/grid.hpp"
#include "cisca/gt_encode.hpp"
#include "cisca/io.hpp"
#include "cisca/loss.hpp"
#include "cisca/metrics.hpp"
#include "cisca/parallel.hpp"
#include "cisca/postprocess.hpp"
#include "cisca/sampling.hpp"
#include "cisca/stain.hpp"
#include "cisca/tiling.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using cisca::DataError;

namespace {

// Raised for flag combinations CLI11 cannot express; exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kFlagTable = R"(
Flag table:
  global       --threads N (fallback: CISCA_KIT_THREADS, default: logical cores)
  encode       --labels PNG16 --mag 20x|40x --out-dir DIR
               writes ternary.png, prob.f32, dist.f32, mask.f32 (+ .json sidecars)
  postprocess  --prob F32 --dist F32 [--types F32] --mag 20x|40x [--theta1 0.57]
               [--theta2 N] --out PNG16 [--types-out JSON]
  tile         --in PNG|F32 --out-dir DIR [--size 256] [--overlap 0.5]
  untile       --manifest JSON --out F32
  metrics      --gt-dir DIR --pred-dir DIR --mag 20x|40x [--gt-types DIR]
               [--pred-types DIR] [--tissue-map JSON] [--classes 1,2,..]
               [--r2-mode ols|identity] [--match-radius PX] [--out JSON]
  loss         --gt-prob F32 --pred-prob F32 --gt-dist F32 --pred-dist F32
               --mask F32 [--gt-types F32 --pred-types F32] [--out JSON]
  sample-plan  --manifest CSV [--alphas JSON] [--seed 42] [--batch 4]
               [--height 256] --out JSON
  stain normalize --in PNG --out PNG --method macenko|reinhard|ruifrok|style
               --template PNG... [--seed N]
  stain augment   --in PNG --out PNG --template PNG... [--seed N]
               [--no-style] [--no-jitter] [--no-template]
Exit status: 0 success, 1 data error, 2 usage error.
)";

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw DataError("cannot create directory '" + p.string() + "'");
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw DataError("input '" + p.string() + "' does not exist");
}

void emit_json(const std::string& out, const json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    ensure_parent(out);
    cisca::io::write_json(out, j);
  }
}

cisca::MagProfile profile_from(const std::string& mag) {
  try {
    return cisca::MagProfile::for_magnification(cisca::parse_magnification(mag));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

const auto r6 = cisca::io::round6;

// ---------------------------------------------------------------- encode
struct EncodeArgs {
  std::string labels, mag = "20x", out_dir;
};

void run_encode(const EncodeArgs& a) {
  const auto profile = profile_from(a.mag);
  require_file(a.labels);
  const auto labels = cisca::io::read_label_png(a.labels);
  const auto ternary = cisca::gt::ternary_from_labels(labels, profile);
  const auto dist = cisca::gt::distance_maps_from_labels(labels);
  const auto mask = cisca::gt::weight_mask(ternary, profile);
  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  cisca::io::write_gray8_png(dir / "ternary.png", ternary);
  cisca::io::write_f32(dir / "prob.f32", cisca::gt::one_hot_ternary(ternary));
  cisca::io::write_f32(dir / "dist.f32", dist);
  cisca::io::write_f32(dir / "mask.f32", mask);
}

// ----------------------------------------------------------- postprocess
struct PostArgs {
  std::string prob, dist, types, mag = "20x", out, types_out;
  double theta1 = 0.57;
  std::optional<int> theta2;
};

void run_postprocess(const PostArgs& a) {
  if (!a.types_out.empty() && a.types.empty()) {
    throw UsageError("--types-out requires --types");
  }
  auto cfg = cisca::post::PostprocessConfig::for_profile(profile_from(a.mag));
  cfg.theta1 = a.theta1;
  if (a.theta2) cfg.theta2 = *a.theta2;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  require_file(a.prob);
  require_file(a.dist);
  if (!a.types.empty()) require_file(a.types);
  const auto prob = cisca::io::read_f32(a.prob);
  const auto dist = cisca::io::read_f32(a.dist);
  std::optional<cisca::Tensor> types;
  if (!a.types.empty()) types = cisca::io::read_f32(a.types);
  const auto result = cisca::post::postprocess(prob, dist, types ? &*types : nullptr, cfg);
  ensure_parent(a.out);
  cisca::io::write_label_png(a.out, result.labels);
  if (!a.types_out.empty() && result.types) {
    ensure_parent(a.types_out);
    cisca::io::write_json(a.types_out, cisca::io::type_table_json(*result.types));
  }
}

// ------------------------------------------------------------ tile/untile
struct TileArgs {
  std::string in, out_dir;
  std::size_t size = 256;
  double overlap = 0.5;
};

cisca::Tensor read_raster_any(const fs::path& p) {
  require_file(p);
  if (p.extension() == ".png") {
    const auto img = cisca::io::read_rgb_png(p);
    cisca::Tensor t(img.height(), img.width(), 3, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) t[i] = img[i];
    return t;
  }
  return cisca::io::read_f32(p);
}

void run_tile(const TileArgs& a) {
  if (a.overlap != 0.5) throw UsageError("only --overlap 0.5 is supported");
  const auto image = read_raster_any(a.in);
  cisca::tiling::TileGrid grid;
  try {
    grid = cisca::tiling::plan_tiles(image.height(), image.width(), a.size, a.size / 2);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto tiles = cisca::tiling::extract_tiles(image, grid);
  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  json entries = json::array();
  for (const auto& t : tiles) {
    char name[64];
    std::snprintf(name, sizeof(name), "tile_r%05zu_c%05zu.f32", t.offset.row, t.offset.col);
    cisca::io::write_f32(dir / name, t.data);
    entries.push_back({{"row", t.offset.row}, {"col", t.offset.col}, {"file", name}});
  }
  json m;
  m["height"] = grid.height;
  m["width"] = grid.width;
  m["channels"] = image.channels();
  m["tile"] = grid.tile;
  m["stride"] = grid.stride;
  m["padded_height"] = grid.padded_height;
  m["padded_width"] = grid.padded_width;
  m["tiles"] = entries;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw DataError("cannot write manifest in '" + dir.string() + "'");
  out << m.dump(2) << "\n";
}

struct UntileArgs {
  std::string manifest, out;
};

void run_untile(const UntileArgs& a) {
  require_file(a.manifest);
  const auto m = cisca::io::read_json(a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();
  cisca::tiling::TileGrid grid;
  std::vector<cisca::tiling::Tile> tiles;
  try {
    grid = cisca::tiling::plan_tiles(m.at("height").get<std::size_t>(),
                                     m.at("width").get<std::size_t>(),
                                     m.at("tile").get<std::size_t>(),
                                     m.at("stride").get<std::size_t>());
    for (const auto& e : m.at("tiles")) {
      cisca::tiling::Tile t;
      t.offset = {e.at("row").get<std::size_t>(), e.at("col").get<std::size_t>()};
      t.data = cisca::io::read_f32(base / e.at("file").get<std::string>());
      tiles.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed tile manifest: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw DataError("tile manifest has an invalid grid: " + std::string(e.what()));
  }
  const auto window = cisca::tiling::spline_window(grid.tile);
  const auto blended = cisca::tiling::blend_untile(tiles, grid, window);
  ensure_parent(a.out);
  cisca::io::write_f32(a.out, blended);
}

// ---------------------------------------------------------------- metrics
struct MetricsArgs {
  std::string gt_dir, pred_dir, mag = "20x", gt_types, pred_types, tissue_map, out;
  std::vector<int> classes;
  std::string r2_mode = "ols";
  std::optional<double> match_radius;
};

json detection_json(const cisca::metrics::Detection& d) {
  return {{"p", r6(d.p)}, {"r", r6(d.r)}, {"f1", r6(d.f1)}};
}

json opt_json(const std::optional<double>& v) { return v ? json(r6(*v)) : json(nullptr); }

json report_json(const cisca::metrics::MetricsReport& rep) {
  json j;
  j["dice"] = r6(rep.dice);
  j["aji"] = r6(rep.aji);
  j["p"] = r6(rep.p);
  j["r"] = r6(rep.r);
  j["f1"] = r6(rep.f1);
  j["dq"] = r6(rep.dq);
  j["sq"] = r6(rep.sq);
  j["pq"] = r6(rep.pq);
  j["tp"] = rep.tp;
  j["fp"] = rep.fp;
  j["fn"] = rep.fn;
  j["mpq_plus"] = opt_json(rep.mpq_plus);
  j["mpq"] = opt_json(rep.mpq);
  j["bpq"] = opt_json(rep.bpq);
  j["r2"] = opt_json(rep.r2);
  json classes = json::array();
  for (const auto& c : rep.classes) {
    classes.push_back({{"class", c.cls}, {"pq_plus", opt_json(c.pq_plus)}, {"r2", opt_json(c.r2)}});
  }
  j["classes"] = classes;
  json images = json::array();
  for (const auto& im : rep.images) {
    json e;
    e["name"] = im.name;
    e["dice"] = r6(im.dice);
    e["aji"] = r6(im.aji);
    e["p"] = r6(im.detection.p);
    e["r"] = r6(im.detection.r);
    e["f1"] = r6(im.detection.f1);
    e["dq"] = r6(im.panoptic.dq);
    e["sq"] = r6(im.panoptic.sq);
    e["pq"] = r6(im.panoptic.pq);
    e["tp"] = im.tp;
    e["fp"] = im.fp;
    e["fn"] = im.fn;
    e["gt_count"] = im.gt_count;
    e["pred_count"] = im.pred_count;
    images.push_back(e);
  }
  j["images"] = images;
  return j;
}

void run_metrics(const MetricsArgs& a) {
  if (a.gt_types.empty() != a.pred_types.empty()) {
    throw UsageError("--gt-types and --pred-types must be given together");
  }
  if (a.r2_mode != "ols" && a.r2_mode != "identity") {
    throw UsageError("--r2-mode must be ols or identity");
  }
  const auto profile = profile_from(a.mag);
  if (!fs::is_directory(a.gt_dir)) throw DataError("'" + a.gt_dir + "' is not a directory");
  if (!fs::is_directory(a.pred_dir)) throw DataError("'" + a.pred_dir + "' is not a directory");
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a.gt_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") names.push_back(e.path().filename());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw DataError("no .png label maps in '" + a.gt_dir + "'");

  std::map<std::string, std::string> tissues;
  if (!a.tissue_map.empty()) {
    try {
      for (const auto& [k, v] : cisca::io::read_json(a.tissue_map).items()) {
        tissues[k] = v.get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed tissue map: " + std::string(e.what()));
    }
  }

  const bool typed = !a.gt_types.empty();
  std::vector<cisca::LabelMap> gts, preds;
  std::vector<cisca::metrics::TypeTable> gtt, prt;
  gts.reserve(names.size());
  preds.reserve(names.size());
  gtt.reserve(names.size());
  prt.reserve(names.size());
  std::set<std::int32_t> seen_classes;
  for (const auto& n : names) {
    const fs::path pred = fs::path(a.pred_dir) / n;
    require_file(pred);
    gts.push_back(cisca::io::read_label_png(fs::path(a.gt_dir) / n));
    preds.push_back(cisca::io::read_label_png(pred));
    if (typed) {
      auto stem = n;
      stem.replace_extension(".json");
      gtt.push_back(cisca::io::read_type_map(fs::path(a.gt_types) / stem));
      prt.push_back(cisca::io::read_type_map(fs::path(a.pred_types) / stem));
      for (const auto& [id, t] : gtt.back()) {
        if (t > 0) seen_classes.insert(t);
      }
    }
  }
  std::vector<cisca::metrics::ImageRecord> records;
  for (std::size_t i = 0; i < names.size(); ++i) {
    cisca::metrics::ImageRecord r;
    r.name = names[i].stem().string();
    r.gt = &gts[i];
    r.pred = &preds[i];
    if (typed) {
      r.gt_types = &gtt[i];
      r.pred_types = &prt[i];
    }
    if (auto it = tissues.find(r.name); it != tissues.end()) r.tissue = it->second;
    records.push_back(std::move(r));
  }

  cisca::metrics::EvalOptions opts;
  opts.match_radius = a.match_radius.value_or(profile.match_radius);
  opts.r2_mode = a.r2_mode == "identity" ? cisca::metrics::R2Mode::kIdentity
                                         : cisca::metrics::R2Mode::kOlsFit;
  if (typed) {
    if (a.classes.empty()) {
      opts.classes.assign(seen_classes.begin(), seen_classes.end());
    } else {
      opts.classes.assign(a.classes.begin(), a.classes.end());
    }
  }
  auto report = report_json(cisca::metrics::evaluate(records, opts));
  report["conventions"] = {
      {"match_radius", opts.match_radius},
      {"r2", a.r2_mode},
      {"empty_gt_and_pred", "dice=aji=p=r=f1=pq=1"},
      {"empty_gt_with_pred", "p=0 r=1 f1=0"},
      {"empty_pred_with_gt", "p=1 r=0 f1=0"},
      {"image_means_include_empty_images", true},
  };
  emit_json(a.out, report);
}

// ------------------------------------------------------------------- loss
struct LossArgs {
  std::string gt_prob, pred_prob, gt_dist, pred_dist, mask, gt_types, pred_types, out;
};

void run_loss(const LossArgs& a) {
  if (a.gt_types.empty() != a.pred_types.empty()) {
    throw UsageError("--gt-types and --pred-types must be given together");
  }
  for (const auto* p : {&a.gt_prob, &a.pred_prob, &a.gt_dist, &a.pred_dist, &a.mask}) require_file(*p);
  const auto gp = cisca::io::read_f32(a.gt_prob);
  const auto pp = cisca::io::read_f32(a.pred_prob);
  const auto gd = cisca::io::read_f32(a.gt_dist);
  const auto pd = cisca::io::read_f32(a.pred_dist);
  const auto mask = cisca::io::read_f32(a.mask);
  std::optional<cisca::Tensor> gt_t, pr_t;
  if (!a.gt_types.empty()) {
    gt_t = cisca::io::read_f32(a.gt_types);
    pr_t = cisca::io::read_f32(a.pred_types);
  }
  cisca::loss::LossInputs in{&gp, &pp, &gd, &pd, &mask, gt_t ? &*gt_t : nullptr,
                             pr_t ? &*pr_t : nullptr};
  const auto b = cisca::loss::total_loss(in);
  json j;
  j["loss_p"] = r6(b.loss_p);
  j["loss_r"] = r6(b.loss_r);
  j["loss_t"] = opt_json(b.loss_t);
  j["total"] = r6(b.total);
  emit_json(a.out, j);
}

// ------------------------------------------------------------ sample-plan
struct PlanArgs {
  std::string manifest, alphas, out;
  std::uint64_t seed = 42;
  std::int64_t batch = 4;
  std::int64_t height = 256;
};

void run_sample_plan(const PlanArgs& a) {
  require_file(a.manifest);
  std::ifstream in(a.manifest);
  const auto manifest = cisca::sampling::parse_manifest_csv(in);
  std::map<std::string, double> alphas;
  if (!a.alphas.empty()) {
    try {
      for (const auto& [k, v] : cisca::io::read_json(a.alphas).items()) alphas[k] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed alphas: " + std::string(e.what()));
    }
  }
  auto plan = cisca::sampling::oversample_counts(manifest, alphas);
  plan.seed = a.seed;
  const auto draws = cisca::sampling::sample_extra_images(manifest, plan, a.seed);
  std::int64_t batches = 0;
  try {
    batches = cisca::sampling::epoch_batch_count(plan.total_images(), a.batch, a.height);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json j;
  j["seed"] = a.seed;
  j["n_train"] = plan.n_train;
  j["cell_total"] = plan.cell_total;
  j["majority"] = manifest.classes[plan.majority];
  json classes = json::array();
  for (std::size_t i = 0; i < plan.minority.size(); ++i) {
    const auto& c = plan.minority[i];
    json e;
    e["name"] = c.name;
    e["cells"] = c.cells;
    e["alpha"] = r6(c.alpha);
    e["beta"] = r6(c.beta);
    e["n_extra"] = c.n_extra;
    json ids = json::array();
    for (auto row : draws[i]) ids.push_back(manifest.rows[row].image_id);
    e["images"] = ids;
    classes.push_back(e);
  }
  j["classes"] = classes;
  j["total_extra"] = plan.total_extra();
  j["total_images"] = plan.total_images();
  j["batches_per_epoch"] = batches;
  emit_json(a.out, j);
}

// ------------------------------------------------------------------ stain
struct StainArgs {
  std::string in, out, method;
  std::vector<std::string> templates;
  std::uint64_t seed = 0;
  bool no_style = false, no_jitter = false, no_template = false;
};

std::vector<cisca::Image8> read_templates(const std::vector<std::string>& paths) {
  std::vector<cisca::Image8> out;
  for (const auto& p : paths) {
    require_file(p);
    out.push_back(cisca::io::read_rgb_png(p));
  }
  return out;
}

void run_stain_normalize(const StainArgs& a) {
  using cisca::stain::Method;
  require_file(a.in);
  if (a.templates.empty()) throw UsageError("--template is required");
  const auto img = cisca::io::read_rgb_png(a.in);
  const auto tmpls = read_templates(a.templates);
  cisca::Image8 out;
  if (a.method == "style") {
    if (tmpls.size() < 2) throw UsageError("--method style needs at least two --template images");
    std::vector<cisca::stain::LabStats> stats;
    for (const auto& t : tmpls) stats.push_back(cisca::stain::lab_stats(t));
    const auto model = cisca::stain::fit_style_model(stats);
    out = cisca::stain::apply_style(img, cisca::stain::sample_style(model, a.seed));
  } else {
    Method m = Method::kNone;
    if (a.method == "reinhard") m = Method::kReinhard;
    else if (a.method == "ruifrok") m = Method::kRuifrok;
    else if (a.method == "macenko") m = Method::kMacenko;
    else throw UsageError("unknown --method '" + a.method + "'");
    if (tmpls.size() != 1) throw UsageError("--method " + a.method + " takes exactly one --template");
    out = cisca::stain::normalize_to_template(img, cisca::stain::prepare_template(tmpls[0]), m);
  }
  ensure_parent(a.out);
  cisca::io::write_rgb_png(a.out, out);
}

void run_stain_augment(const StainArgs& a) {
  require_file(a.in);
  const auto img = cisca::io::read_rgb_png(a.in);
  const auto tmpls = read_templates(a.templates);
  cisca::stain::AugmentPolicy policy;
  policy.use_jitter = !a.no_jitter;
  policy.use_template = !a.no_template && !tmpls.empty();
  policy.use_style = !a.no_style && tmpls.size() >= 2;
  std::vector<cisca::stain::LabStats> stats;
  for (const auto& t : tmpls) {
    policy.templates.push_back(cisca::stain::prepare_template(t));
    stats.push_back(policy.templates.back().lab);
  }
  if (policy.use_style) policy.style_model = cisca::stain::fit_style_model(stats);
  if (!policy.use_jitter && !policy.use_template && !policy.use_style) {
    throw UsageError("no augmentation strategy is enabled");
  }
  const auto res = cisca::stain::augment(img, policy, a.seed);
  ensure_parent(a.out);
  cisca::io::write_rgb_png(a.out, res.image);
  std::cerr << "strategy=" << cisca::stain::to_string(res.strategy)
            << " method=" << cisca::stain::to_string(res.method) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cisca-kit: cell instance segmentation pipeline tools"};
  app.footer(kFlagTable);
  app.require_subcommand(1, 1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "Encode a GT label map into training targets");
  c_enc->add_option("--labels", enc.labels, "16-bit label PNG")->required();
  c_enc->add_option("--mag", enc.mag, "Magnification profile (20x|40x)");
  c_enc->add_option("--out-dir", enc.out_dir, "Output directory")->required();

  PostArgs pp;
  auto* c_pp = app.add_subcommand("postprocess", "Instance labels from network outputs");
  c_pp->add_option("--prob", pp.prob, "3-channel BD/CB/BG probabilities (f32)")->required();
  c_pp->add_option("--dist", pp.dist, "4-channel distance maps (f32)")->required();
  c_pp->add_option("--types", pp.types, "Per-pixel type probabilities (f32)");
  c_pp->add_option("--mag", pp.mag, "Magnification profile (20x|40x)");
  c_pp->add_option("--theta1", pp.theta1, "Edge threshold in (0, 1)");
  c_pp->add_option("--theta2", pp.theta2, "Minimum instance area");
  c_pp->add_option("--out", pp.out, "Output label PNG")->required();
  c_pp->add_option("--types-out", pp.types_out, "Output instance type table (json)");

  TileArgs tl;
  auto* c_tile = app.add_subcommand("tile", "Split an image into overlapping tiles");
  c_tile->add_option("--in", tl.in, "Input PNG or f32")->required();
  c_tile->add_option("--out-dir", tl.out_dir, "Tile directory")->required();
  c_tile->add_option("--size", tl.size, "Tile size (even)");
  c_tile->add_option("--overlap", tl.overlap, "Overlap fraction (0.5)");

  UntileArgs ut;
  auto* c_untile = app.add_subcommand("untile", "Blend tiles back into one raster");
  c_untile->add_option("--manifest", ut.manifest, "Tile manifest json")->required();
  c_untile->add_option("--out", ut.out, "Blended f32 output")->required();

  MetricsArgs mt;
  auto* c_met = app.add_subcommand("metrics", "Evaluate predicted label maps against GT");
  c_met->add_option("--gt-dir", mt.gt_dir, "GT label PNG directory")->required();
  c_met->add_option("--pred-dir", mt.pred_dir, "Predicted label PNG directory")->required();
  c_met->add_option("--mag", mt.mag, "Magnification profile (20x|40x)");
  c_met->add_option("--gt-types", mt.gt_types, "GT type tables (<name>.json)");
  c_met->add_option("--pred-types", mt.pred_types, "Predicted type tables (<name>.json)");
  c_met->add_option("--tissue-map", mt.tissue_map, "json {image: tissue}");
  c_met->add_option("--classes", mt.classes, "Class ids to score")->delimiter(',');
  c_met->add_option("--r2-mode", mt.r2_mode, "ols|identity");
  c_met->add_option("--match-radius", mt.match_radius, "Centroid match radius in pixels")
      ->check(CLI::PositiveNumber);
  c_met->add_option("--out", mt.out, "Report json (stdout if omitted)");

  LossArgs ls;
  auto* c_loss = app.add_subcommand("loss", "Evaluate the training loss");
  c_loss->add_option("--gt-prob", ls.gt_prob, "GT one-hot BD/CB/BG (f32)")->required();
  c_loss->add_option("--pred-prob", ls.pred_prob, "Predicted BD/CB/BG (f32)")->required();
  c_loss->add_option("--gt-dist", ls.gt_dist, "GT distance maps (f32)")->required();
  c_loss->add_option("--pred-dist", ls.pred_dist, "Predicted distance maps (f32)")->required();
  c_loss->add_option("--mask", ls.mask, "Weight mask (f32)")->required();
  c_loss->add_option("--gt-types", ls.gt_types, "GT one-hot types (f32)");
  c_loss->add_option("--pred-types", ls.pred_types, "Predicted types (f32)");
  c_loss->add_option("--out", ls.out, "Output json (stdout if omitted)");

  PlanArgs pl;
  auto* c_plan = app.add_subcommand("sample-plan", "Minority-class oversampling plan");
  c_plan->add_option("--manifest", pl.manifest, "Per-image class counts (csv)")->required();
  c_plan->add_option("--alphas", pl.alphas, "json {class: alpha}");
  c_plan->add_option("--seed", pl.seed, "Sampling seed");
  c_plan->add_option("--batch", pl.batch, "Batch size for the epoch length");
  c_plan->add_option("--height", pl.height, "Image height for the epoch length");
  c_plan->add_option("--out", pl.out, "Plan json (stdout if omitted)");

  StainArgs st;
  auto* c_stain = app.add_subcommand("stain", "Stain normalisation and augmentation");
  c_stain->require_subcommand(1, 1);
  auto* c_norm = c_stain->add_subcommand("normalize", "Normalise to a template");
  c_norm->add_option("--in", st.in, "Input RGB PNG")->required();
  c_norm->add_option("--out", st.out, "Output RGB PNG")->required();
  c_norm->add_option("--method", st.method, "macenko|reinhard|ruifrok|style")->required();
  c_norm->add_option("--template", st.templates, "Template RGB PNG (repeatable)");
  c_norm->add_option("--seed", st.seed, "Seed for --method style");
  auto* c_aug = c_stain->add_subcommand("augment", "Random stain augmentation");
  c_aug->add_option("--in", st.in, "Input RGB PNG")->required();
  c_aug->add_option("--out", st.out, "Output RGB PNG")->required();
  c_aug->add_option("--template", st.templates, "Template RGB PNG (repeatable)");
  c_aug->add_option("--seed", st.seed, "Augmentation seed");
  c_aug->add_flag("--no-style", st.no_style, "Disable style sampling");
  c_aug->add_flag("--no-jitter", st.no_jitter, "Disable colour jitter");
  c_aug->add_flag("--no-template", st.no_template, "Disable template normalisation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    cisca::configure_threads(threads);
    if (*c_enc) run_encode(enc);
    else if (*c_pp) run_postprocess(pp);
    else if (*c_tile) run_tile(tl);
    else if (*c_untile) run_untile(ut);
    else if (*c_met) run_metrics(mt);
    else if (*c_loss) run_loss(ls);
    else if (*c_plan) run_sample_plan(pl);
    else if (*c_norm) run_stain_normalize(st);
    else if (*c_aug) run_stain_augment(st);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

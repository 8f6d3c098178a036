// Batch CLI for the tracking pipeline. All work happens behind the shared
// library's C interface.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cptrack/capi.h"

namespace {

struct CtxDeleter {
  void operator()(cpt_ctx* c) const { cpt_ctx_free(c); }
};

int finish(cpt_ctx* ctx, cpt_status st) {
  if (st != CPT_OK)
    std::fprintf(stderr, "error: %s\n", cpt_ctx_error(ctx));
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-camera tracking-by-detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(cpt_version()));

  std::string config_path, out, camera, cls = "person";
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "Pipeline configuration JSON")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Scenario seed override")
      ->each([&](const std::string&) { seed_set = true; });

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  simulate->add_option("--out", out, "Output directory")->required();

  std::string detections, fused, tracklets_path, primary, aux, homography;
  std::string gt, tracks, ledger, events, person_tracks, bag_tracks;

  auto* fuse = app.add_subcommand("fuse", "Fuse rotation-augmented detections");
  fuse->add_option("--detections", detections, "Per-angle detections file")
      ->required();
  fuse->add_option("--out", out, "Fused detections file")->required();
  fuse->add_option("--class", cls, "Object class (person|bag)");

  auto* track = app.add_subcommand("track", "Track fused detections");
  track->add_option("--detections", fused, "Fused detections file")->required();
  track->add_option("--camera", camera, "Camera identifier")->required();
  track->add_option("--class", cls, "Object class (person|bag)");
  track->add_option("--out", out, "Tracklets file")->required();

  auto* stitch = app.add_subcommand("stitch", "Merge fragmented tracklets");
  stitch->add_option("--tracklets", tracklets_path, "Tracklets file")->required();
  stitch->add_option("--out", out, "Stitched tracklets file")->required();

  auto* handoff = app.add_subcommand("handoff", "Associate tracklets across cameras");
  handoff->add_option("--primary", primary, "Primary-camera tracklets")->required();
  handoff->add_option("--aux", aux, "Auxiliary-camera tracklets")->required();
  handoff->add_option("--homography", homography, "Auxiliary-to-primary homography")
      ->required();
  handoff->add_option("--out", out, "Relabeled primary tracklets")->required();

  auto* bags = app.add_subcommand("bags", "Associate bags with owners");
  bags->add_option("--persons", person_tracks, "Person tracklets")->required();
  bags->add_option("--bags", bag_tracks, "Bag tracklets")->required();
  bags->add_option("--ledger", ledger, "Ownership ledger output")->required();
  bags->add_option("--events", events, "Ownership verification output")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score tracks against ground truth");
  evaluate->add_option("--gt", gt, "Ground-truth file")->required();
  evaluate->add_option("--tracks", tracks, "Tracklets file")->required();
  evaluate->add_option("--out", out, "Report file")->required();

  auto* occupancy =
      app.add_subcommand("occupancy-export", "Dump pooled remapped detections");
  occupancy->add_option("--detections", detections, "Per-angle detections file")
      ->required();
  occupancy->add_option("--out", out, "Occupancy records file")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  pipeline->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<cpt_ctx, CtxDeleter> ctx(cpt_ctx_new());
  if (!ctx) {
    std::fprintf(stderr, "error: out of memory\n");
    return static_cast<int>(CPT_ERR_INTERNAL);
  }
  cpt_status st =
      cpt_load_config(ctx.get(), config_path.empty() ? nullptr : config_path.c_str());
  if (st != CPT_OK) return finish(ctx.get(), st);
  if (seed_set) {
    st = cpt_set_seed(ctx.get(), seed);
    if (st != CPT_OK) return finish(ctx.get(), st);
  }

  if (simulate->parsed())
    st = cpt_simulate(ctx.get(), out.c_str());
  else if (fuse->parsed())
    st = cpt_fuse(ctx.get(), detections.c_str(), out.c_str(), cls.c_str());
  else if (track->parsed())
    st = cpt_track(ctx.get(), fused.c_str(), camera.c_str(), cls.c_str(),
                   out.c_str());
  else if (stitch->parsed())
    st = cpt_stitch(ctx.get(), tracklets_path.c_str(), out.c_str());
  else if (handoff->parsed())
    st = cpt_handoff(ctx.get(), primary.c_str(), aux.c_str(), homography.c_str(),
                     out.c_str());
  else if (bags->parsed())
    st = cpt_bags(ctx.get(), person_tracks.c_str(), bag_tracks.c_str(),
                  ledger.c_str(), events.c_str());
  else if (evaluate->parsed())
    st = cpt_evaluate(ctx.get(), gt.c_str(), tracks.c_str(), out.c_str());
  else if (occupancy->parsed())
    st = cpt_occupancy_export(ctx.get(), detections.c_str(), out.c_str());
  else if (pipeline->parsed())
    st = cpt_pipeline(ctx.get(), out.c_str());

  return finish(ctx.get(), st);
}

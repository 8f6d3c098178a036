#pragma once

#include <map>
#include <string>
#include <vector>

#include "cptrack/bagassoc.hpp"
#include "cptrack/detection.hpp"
#include "cptrack/metrics.hpp"
#include "cptrack/scenario.hpp"
#include "cptrack/tracklets.hpp"

namespace cpt {

struct PipelineConfig {
  ScenarioConfig scenario;
  FusionConfig fusion;
  TrackerParams tracker_person;
  TrackerParams tracker_bag;
  StitchConfig stitch;
  double handoff_d_max = 100.0;
  AssocConfig assoc;
  double iou_thr = 0.4;
};

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig pipeline_config_from_json_text(const std::string& text);
std::string pipeline_config_to_json_text(const PipelineConfig& cfg);

struct RunManifest {
  int artifact_version = 1;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::map<std::string, std::string> input_digests;   // relative path -> digest
  std::map<std::string, std::string> output_paths;    // stage -> relative path
};

void write_manifest(const std::string& path, const RunManifest& m);

// FNV-1a over the raw bytes, hex-encoded.
std::string digest_bytes(const std::string& bytes);
std::string digest_file(const std::string& path);

// Flattens tracklets into per-frame output entries, frame-major.
TrackOutput tracklets_to_output(const std::vector<Tracklet>& ts);

// Rewrites per-camera labels into one global namespace ordered by first
// appearance (then camera order, then local label), so the smallest label on
// any cross-camera component is the earliest-seen identity.
void globalize_labels(std::vector<std::vector<Tracklet>*> per_camera);

// Stage entry points. Each reads and writes the versioned file formats, so
// any stage can run standalone from a prior stage's persisted output.
void stage_simulate(const PipelineConfig& cfg, const std::string& out_dir);
void stage_fuse(const PipelineConfig& cfg, const std::string& detections_path,
                const std::string& out_path, ObjectClass cls);
void stage_track(const PipelineConfig& cfg, const std::string& fused_path,
                 const std::string& camera, ObjectClass cls,
                 const std::string& out_path);
void stage_stitch(const PipelineConfig& cfg, const std::string& tracklets_path,
                  const std::string& out_path);
void stage_handoff(const PipelineConfig& cfg, const std::string& primary_path,
                   const std::string& aux_path, const std::string& homography_path,
                   const std::string& out_path);
void stage_bags(const PipelineConfig& cfg, const std::string& person_tracks_path,
                const std::string& bag_tracks_path, const std::string& out_ledger,
                const std::string& out_events);
EvalReport stage_evaluate(const PipelineConfig& cfg, const std::string& gt_path,
                          const std::string& tracks_path,
                          const std::string& out_path);
// Dumps the pooled remapped per-frame detection set with scores, as
// plot-ready records (occupancy data).
void stage_occupancy_export(const PipelineConfig& cfg,
                            const std::string& detections_path,
                            const std::string& out_path);

// Full run: simulate, then fuse/track/stitch per camera and class, associate
// across cameras, associate bags, evaluate, and write the manifest.
RunManifest run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace cpt

#include "cptrack/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cptrack/fusion.hpp"
#include "cptrack/io.hpp"
#include "cptrack/tracker.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace cpt {

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Homography homography_from_json(const json& j) {
  Homography h;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h.m[r][c] = j.at(r).at(c).get<double>();
  if (!h.invertible()) throw ValidationError("config: singular homography");
  return h.normalized();
}

json homography_to_json(const Homography& h) {
  json m = json::array();
  for (int r = 0; r < 3; ++r)
    m.push_back(json::array({h.m[r][0], h.m[r][1], h.m[r][2]}));
  return m;
}

void parse_tracker(const json& j, TrackerParams& p) {
  maybe(j, "gate_chi2", p.gate_chi2);
  maybe(j, "process_noise", p.process_noise);
  maybe(j, "meas_noise", p.meas_noise);
  maybe(j, "size_process_noise", p.size_process_noise);
  maybe(j, "confirm_hits", p.confirm_hits);
  maybe(j, "delete_misses", p.delete_misses);
  maybe(j, "nscan", p.nscan);
  maybe(j, "max_hyp", p.max_hyp);
  maybe(j, "score_decay", p.score_decay);
}

json tracker_to_json(const TrackerParams& p) {
  return json{{"gate_chi2", p.gate_chi2},
              {"process_noise", p.process_noise},
              {"meas_noise", p.meas_noise},
              {"size_process_noise", p.size_process_noise},
              {"confirm_hits", p.confirm_hits},
              {"delete_misses", p.delete_misses},
              {"nscan", p.nscan},
              {"max_hyp", p.max_hyp},
              {"score_decay", p.score_decay}};
}

}  // namespace

PipelineConfig pipeline_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  PipelineConfig cfg;
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    maybe(s, "seed", cfg.scenario.seed);
    maybe(s, "passengers", cfg.scenario.passengers);
    maybe(s, "bags", cfg.scenario.bags);
    maybe(s, "reentry_events", cfg.scenario.reentry_events);
    maybe(s, "frames", cfg.scenario.frames);
    maybe(s, "speed", cfg.scenario.speed);
    maybe(s, "rotation_count", cfg.scenario.rotation_count);
    if (s.contains("ownership"))
      for (const auto& [bag, owner] : s.at("ownership").items())
        cfg.scenario.ownership[std::stoi(bag)] = owner.get<int>();
    if (s.contains("cameras")) {
      for (const auto& cj : s.at("cameras")) {
        CameraSpec cam;
        cam.id = cj.at("id").get<std::string>();
        maybe(cj, "width", cam.width);
        maybe(cj, "height", cam.height);
        maybe(cj, "world_x0", cam.world_x0);
        maybe(cj, "world_x1", cam.world_x1);
        if (cj.contains("to_primary"))
          cam.to_primary = homography_from_json(cj.at("to_primary"));
        cam.roi = {0, 0, cam.width, cam.height};
        cfg.scenario.cameras.push_back(std::move(cam));
      }
    }
    if (s.contains("noise")) {
      const json& n = s.at("noise");
      NoiseModel& nm = cfg.scenario.noise;
      maybe(n, "p_peak", nm.p_peak);
      maybe(n, "p_trough", nm.p_trough);
      maybe(n, "dip_sigma", nm.dip_sigma);
      maybe(n, "center_jitter", nm.center_jitter);
      maybe(n, "size_jitter", nm.size_jitter);
      maybe(n, "spurious_rate", nm.spurious_rate);
      maybe(n, "score_min", nm.score_min);
      maybe(n, "score_max", nm.score_max);
    }
  }
  if (j.contains("fusion")) {
    const json& f = j.at("fusion");
    maybe(f, "n", cfg.fusion.n);
    maybe(f, "lambda", cfg.fusion.lambda);
    maybe(f, "eta_det", cfg.fusion.eta_det);
    maybe(f, "eta_nms", cfg.fusion.eta_nms);
    maybe(f, "convergence_eps", cfg.fusion.convergence_eps);
    maybe(f, "max_iters", cfg.fusion.max_iters);
    maybe(f, "merge_radius", cfg.fusion.merge_radius);
    if (f.contains("bandwidth_floor")) {
      const auto& b = f.at("bandwidth_floor");
      for (int k = 0; k < 4; ++k) cfg.fusion.bandwidth_floor[k] = b.at(k);
    }
    if (cfg.fusion.n < 1) throw ValidationError("config: fusion.n must be >= 1");
  }
  if (j.contains("tracker")) {
    if (j.at("tracker").contains("person"))
      parse_tracker(j.at("tracker").at("person"), cfg.tracker_person);
    if (j.at("tracker").contains("bag"))
      parse_tracker(j.at("tracker").at("bag"), cfg.tracker_bag);
  }
  if (j.contains("stitch")) maybe(j.at("stitch"), "t_th", cfg.stitch.t_th);
  if (j.contains("handoff")) maybe(j.at("handoff"), "d_max", cfg.handoff_d_max);
  if (j.contains("assoc")) maybe(j.at("assoc"), "alpha_d", cfg.assoc.alpha_d);
  maybe(j, "iou_thr", cfg.iou_thr);
  cfg.fusion.n = std::max(cfg.fusion.n, 1);
  cfg.scenario.rotation_count = cfg.fusion.n;
  return cfg;
}

std::string pipeline_config_to_json_text(const PipelineConfig& cfg) {
  const ScenarioConfig sc = with_default_cameras(cfg.scenario);
  json cams = json::array();
  for (const auto& c : sc.cameras)
    cams.push_back(json{{"id", c.id},
                        {"width", c.width},
                        {"height", c.height},
                        {"world_x0", c.world_x0},
                        {"world_x1", c.world_x1},
                        {"to_primary", homography_to_json(c.to_primary)}});
  json own = json::object();
  for (const auto& [bag, owner] : sc.ownership) own[std::to_string(bag)] = owner;
  const NoiseModel& nm = sc.noise;
  json j{
      {"scenario",
       {{"seed", sc.seed},
        {"passengers", sc.passengers},
        {"bags", sc.bags},
        {"reentry_events", sc.reentry_events},
        {"frames", sc.frames},
        {"speed", sc.speed},
        {"rotation_count", sc.rotation_count},
        {"cameras", cams},
        {"ownership", own},
        {"noise",
         {{"p_peak", nm.p_peak},
          {"p_trough", nm.p_trough},
          {"dip_sigma", nm.dip_sigma},
          {"center_jitter", nm.center_jitter},
          {"size_jitter", nm.size_jitter},
          {"spurious_rate", nm.spurious_rate},
          {"score_min", nm.score_min},
          {"score_max", nm.score_max}}}}},
      {"fusion",
       {{"n", cfg.fusion.n},
        {"lambda", cfg.fusion.lambda},
        {"bandwidth_floor", cfg.fusion.bandwidth_floor},
        {"eta_det", cfg.fusion.eta_det},
        {"eta_nms", cfg.fusion.eta_nms},
        {"convergence_eps", cfg.fusion.convergence_eps},
        {"max_iters", cfg.fusion.max_iters},
        {"merge_radius", cfg.fusion.merge_radius}}},
      {"tracker",
       {{"person", tracker_to_json(cfg.tracker_person)},
        {"bag", tracker_to_json(cfg.tracker_bag)}}},
      {"stitch", {{"t_th", cfg.stitch.t_th}}},
      {"handoff", {{"d_max", cfg.handoff_d_max}}},
      {"assoc", {{"alpha_d", cfg.assoc.alpha_d}}},
      {"iou_thr", cfg.iou_thr}};
  return j.dump(2) + "\n";
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return pipeline_config_from_json_text(read_text_file(path));
}

std::string digest_bytes(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest_file(const std::string& path) {
  return digest_bytes(read_text_file(path));
}

void write_manifest(const std::string& path, const RunManifest& m) {
  json j{{"format", "cptrack-manifest"},
         {"version", m.artifact_version},
         {"seed", m.seed},
         {"config_digest", m.config_digest},
         {"inputs", m.input_digests},
         {"outputs", m.output_paths}};
  write_text_file(path, j.dump(2) + "\n");
}

TrackOutput tracklets_to_output(const std::vector<Tracklet>& ts) {
  TrackOutput out;
  for (const auto& t : ts)
    for (const auto& [frame, box] : t.entries)
      out.push_back({frame, t.label, box, t.cls});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.label) < std::tie(b.frame, b.label);
  });
  return out;
}

void globalize_labels(std::vector<std::vector<Tracklet>*> per_camera) {
  struct Key {
    long first_frame;
    std::size_t camera;
    long label;
    Tracklet* t;
  };
  std::vector<Key> keys;
  for (std::size_t c = 0; c < per_camera.size(); ++c)
    for (auto& t : *per_camera[c])
      keys.push_back({t.entries.front().first, c, t.label, &t});
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.first_frame, a.camera, a.label) <
           std::tie(b.first_frame, b.camera, b.label);
  });
  long next = 1;
  for (auto& k : keys) k.t->label = next++;
}

namespace {

std::string cam_path(const std::string& dir, const std::string& name,
                     const std::string& camera, const std::string& ext) {
  return dir + "/" + name + "_" + camera + ext;
}

GroundTruth truth_to_gt(const ScenarioTruth& truth, const std::string& camera,
                        std::optional<ObjectClass> cls = std::nullopt) {
  GroundTruth gt;
  const auto it = truth.frames.find(camera);
  if (it == truth.frames.end()) return gt;
  for (const auto& [frame, boxes] : it->second)
    for (const auto& b : boxes)
      if (!cls || b.cls == *cls) gt.frames[frame].push_back({b.object_id, b.cls, b.box});
  return gt;
}

Roi roi_for_camera(const ScenarioConfig& sc, const std::string& camera) {
  for (const auto& c : sc.cameras)
    if (c.id == camera) return c.roi;
  return {0, 0, 1920, 1080};
}

}  // namespace

void stage_simulate(const PipelineConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ScenarioTruth truth = generate(cfg.scenario);
  const ScenarioConfig& sc = truth.cfg;
  const int n = sc.rotation_count;

  for (const auto& cam : sc.cameras) {
    std::vector<Detection> dets;
    for (long f = 0; f < sc.frames; ++f)
      for (int a = 0; a < n; ++a) {
        auto part = mock_detect(truth, f, a, n, cam.id);
        dets.insert(dets.end(), part.begin(), part.end());
      }
    write_detections(cam_path(out_dir, "det", cam.id, ".ndjson"), dets);
    write_ground_truth(cam_path(out_dir, "gt", cam.id, ".ndjson"),
                       truth_to_gt(truth, cam.id));
  }
  for (std::size_t c = 1; c < sc.cameras.size(); ++c)
    save_homography(cam_path(out_dir, "homography", sc.cameras[c].id, ".json"),
                    sc.cameras[c].to_primary);

  AssociationLedger truth_ledger;
  for (const auto& [bag, owner] : truth.ownership)
    truth_ledger.entries.push_back({owner, bag, 0});
  write_ledger(out_dir + "/truth_ledger.ndjson", truth_ledger);

  json cams = json::array();
  for (const auto& c : sc.cameras) cams.push_back(c.id);
  json summary{{"format", "cptrack-scenario"},
               {"version", kFormatVersion},
               {"seed", sc.seed},
               {"passengers", sc.passengers},
               {"bags", sc.bags},
               {"frames", sc.frames},
               {"reentry_events", static_cast<long>(truth.reentries.size())},
               {"cameras", cams}};
  write_text_file(out_dir + "/scenario.json", summary.dump(2) + "\n");
}

void stage_fuse(const PipelineConfig& cfg, const std::string& detections_path,
                const std::string& out_path, ObjectClass cls) {
  const std::vector<Detection> all = read_detections(detections_path);
  std::vector<Detection> mine;
  std::string camera;
  for (const auto& d : all) {
    if (camera.empty()) camera = d.camera;
    if (d.cls == cls) mine.push_back(d);
  }
  const Roi roi = roi_for_camera(with_default_cameras(cfg.scenario), camera);
  const AugmentedGroup grouped = group_augmented(mine, roi, cfg.fusion.n);
  std::vector<Detection> fused;
  for (const auto& af : grouped.frames) {
    auto part = fuse_frame(af, cls, cfg.fusion);
    for (auto& d : part) d.camera = camera;
    fused.insert(fused.end(), part.begin(), part.end());
  }
  write_detections(out_path, fused);
}

void stage_track(const PipelineConfig& cfg, const std::string& fused_path,
                 const std::string& camera, ObjectClass cls,
                 const std::string& out_path) {
  const std::vector<Detection> fused = read_detections(fused_path);
  long max_frame = -1;
  for (const auto& d : fused) {
    if (d.cls != cls)
      throw ValidationError("track: input holds detections of another class");
    max_frame = std::max(max_frame, d.frame);
  }
  std::vector<std::vector<Detection>> frames(
      static_cast<std::size_t>(max_frame + 1));
  for (const auto& d : fused) frames[static_cast<std::size_t>(d.frame)].push_back(d);

  Tracker tracker(cls, camera,
                  cls == ObjectClass::person ? cfg.tracker_person : cfg.tracker_bag);
  const std::vector<Tracklet> ts = tracker.run(frames, 0);
  write_tracklets(out_path, ts);
}

void stage_stitch(const PipelineConfig& cfg, const std::string& tracklets_path,
                  const std::string& out_path) {
  write_tracklets(out_path, stitch(read_tracklets(tracklets_path), cfg.stitch));
}

void stage_handoff(const PipelineConfig& cfg, const std::string& primary_path,
                   const std::string& aux_path, const std::string& homography_path,
                   const std::string& out_path) {
  std::vector<Tracklet> primary = read_tracklets(primary_path);
  std::vector<Tracklet> aux = read_tracklets(aux_path);
  globalize_labels({&primary, &aux});
  HandoffConfig hc;
  hc.d_max = cfg.handoff_d_max;
  hc.homography = load_homography(homography_path);
  const HandoffResult res = associate_cameras(primary, aux, hc);
  write_tracklets(out_path, res.primary);
}

void stage_bags(const PipelineConfig& cfg, const std::string& person_tracks_path,
                const std::string& bag_tracks_path, const std::string& out_ledger,
                const std::string& out_events) {
  const TrackOutput persons =
      tracklets_to_output(read_tracklets(person_tracks_path));
  const TrackOutput bags = tracklets_to_output(read_tracklets(bag_tracks_path));
  const AssociationLedger ledger = associate(persons, bags, cfg.assoc);
  write_ledger(out_ledger, ledger);

  json events = json::array();
  for (const auto& ev : verify_ownership(persons, bags, ledger, cfg.assoc))
    events.push_back(json{{"bag", ev.bag_label},
                          {"owner", ev.person_label},
                          {"nearest_person", ev.nearest_person},
                          {"match", ev.match}});
  write_text_file(out_events,
                  json{{"format", "cptrack-ownership"},
                       {"version", kFormatVersion},
                       {"events", events}}
                          .dump(2) +
                      "\n");
}

EvalReport stage_evaluate(const PipelineConfig& cfg, const std::string& gt_path,
                          const std::string& tracks_path,
                          const std::string& out_path) {
  const std::vector<Tracklet> ts = read_tracklets(tracks_path);
  const TrackOutput hyp = tracklets_to_output(ts);

  GroundTruth gt_all = read_ground_truth(gt_path);
  GroundTruth gt;
  if (!ts.empty()) {
    const ObjectClass cls = ts.front().cls;
    for (const auto& [frame, boxes] : gt_all.frames)
      for (const auto& b : boxes)
        if (b.cls == cls) gt.frames[frame].push_back(b);
  } else {
    gt = gt_all;
  }

  EvalReport r = evaluate_tracking(gt, hyp, cfg.iou_thr);
  const EvalReport ident = evaluate_identity(gt, hyp, cfg.iou_thr);
  r.idtp = ident.idtp;
  r.idfp = ident.idfp;
  r.idfn = ident.idfn;
  r.idf1 = ident.idf1;
  r.idr = ident.idr;
  r.idp = ident.idp;
  if (!out_path.empty()) write_reports(out_path, {{"sequence", r}});
  return r;
}

void stage_occupancy_export(const PipelineConfig& cfg,
                            const std::string& detections_path,
                            const std::string& out_path) {
  const std::vector<Detection> all = read_detections(detections_path);
  std::string camera;
  for (const auto& d : all)
    if (camera.empty()) camera = d.camera;
  const Roi roi = roi_for_camera(with_default_cameras(cfg.scenario), camera);

  // Pool the remapped per-angle detections per frame, keeping scores.
  std::map<long, std::map<int, std::vector<Detection>>> by_frame_angle;
  for (const auto& d : all)
    by_frame_angle[d.frame][d.angle_index.value_or(0)].push_back(d);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + out_path);
  out << json{{"format", "cptrack-occupancy"}, {"version", kFormatVersion}}.dump()
      << "\n";
  const int n = cfg.fusion.n;
  for (const auto& [frame, by_angle] : by_frame_angle) {
    for (const auto& [angle, dets] : by_angle) {
      const double theta = 2.0 * std::numbers::pi * angle / n;
      for (const auto& d : remap_detections(dets, theta, roi)) {
        out << json{{"frame", frame},
                    {"class", to_string(d.cls)},
                    {"cx", d.box.cx},
                    {"cy", d.box.cy},
                    {"w", d.box.w},
                    {"h", d.box.h},
                    {"score", d.score},
                    {"angle", angle}}
                   .dump()
            << "\n";
      }
    }
  }
}

namespace {

template <typename Fn>
void run_stage(const std::string& name, Fn fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    throw ValidationError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const ScenarioConfig sc = with_default_cameras(cfg.scenario);
  PipelineConfig full = cfg;
  full.scenario = sc;

  RunManifest manifest;
  manifest.seed = sc.seed;
  const std::string cfg_text = pipeline_config_to_json_text(full);
  manifest.config_digest = digest_bytes(cfg_text);
  write_text_file(out_dir + "/config.json", cfg_text);

  std::vector<std::string> artifacts{"config.json"};
  auto track_artifact = [&](const std::string& rel) { artifacts.push_back(rel); };

  run_stage("simulate", [&] { stage_simulate(full, out_dir); });
  track_artifact("scenario.json");
  track_artifact("truth_ledger.ndjson");
  for (const auto& cam : sc.cameras) {
    track_artifact("det_" + cam.id + ".ndjson");
    track_artifact("gt_" + cam.id + ".ndjson");
  }
  for (std::size_t c = 1; c < sc.cameras.size(); ++c)
    track_artifact("homography_" + sc.cameras[c].id + ".json");

  const std::vector<ObjectClass> classes{ObjectClass::person, ObjectClass::bag};
  for (const auto& cam : sc.cameras) {
    for (const ObjectClass cls : classes) {
      const std::string tag = cam.id + "_" + to_string(cls);
      run_stage("fuse", [&] {
        stage_fuse(full, cam_path(out_dir, "det", cam.id, ".ndjson"),
                   out_dir + "/fused_" + tag + ".ndjson", cls);
      });
      run_stage("track", [&] {
        stage_track(full, out_dir + "/fused_" + tag + ".ndjson", cam.id, cls,
                    out_dir + "/tracklets_" + tag + ".ndjson");
      });
      run_stage("stitch", [&] {
        stage_stitch(full, out_dir + "/tracklets_" + tag + ".ndjson",
                     out_dir + "/stitched_" + tag + ".ndjson");
      });
      track_artifact("fused_" + tag + ".ndjson");
      track_artifact("tracklets_" + tag + ".ndjson");
      track_artifact("stitched_" + tag + ".ndjson");
    }
  }

  // Cross-camera association against the primary camera, one class at a time.
  const std::string primary_id = sc.cameras.front().id;
  for (const ObjectClass cls : classes) {
    std::string current =
        out_dir + "/stitched_" + primary_id + "_" + to_string(cls) + ".ndjson";
    for (std::size_t c = 1; c < sc.cameras.size(); ++c) {
      const std::string out_path = out_dir + "/handoff_" + to_string(cls) +
                                   (c + 1 < sc.cameras.size()
                                        ? "_" + sc.cameras[c].id
                                        : "") +
                                   ".ndjson";
      run_stage("handoff", [&] {
        stage_handoff(full, current,
                      out_dir + "/stitched_" + sc.cameras[c].id + "_" +
                          to_string(cls) + ".ndjson",
                      cam_path(out_dir, "homography", sc.cameras[c].id, ".json"),
                      out_path);
      });
      current = out_path;
    }
    if (sc.cameras.size() == 1) {
      run_stage("handoff", [&] {
        write_tracklets(out_dir + "/handoff_" + to_string(cls) + ".ndjson",
                        read_tracklets(current));
      });
    }
    track_artifact("handoff_" + to_string(cls) + ".ndjson");
  }

  run_stage("bags", [&] {
    stage_bags(full, out_dir + "/handoff_person.ndjson",
               out_dir + "/handoff_bag.ndjson", out_dir + "/ledger.ndjson",
               out_dir + "/ownership.json");
  });
  track_artifact("ledger.ndjson");
  track_artifact("ownership.json");

  std::map<std::string, EvalReport> reports;
  for (const auto& cam : sc.cameras) {
    for (const ObjectClass cls : classes) {
      const std::string tag = cam.id + "_" + to_string(cls);
      run_stage("evaluate", [&] {
        reports[tag] = stage_evaluate(
            full, cam_path(out_dir, "gt", cam.id, ".ndjson"),
            out_dir + "/stitched_" + tag + ".ndjson", "");
        export_mot_csv(out_dir + "/tracks_" + tag + ".csv",
                       tracklets_to_output(
                           read_tracklets(out_dir + "/stitched_" + tag + ".ndjson")),
                       cam.id);
      });
      track_artifact("tracks_" + tag + ".csv");
    }
  }
  run_stage("evaluate", [&] {
    write_reports(out_dir + "/report.json", reports);
    write_text_file(out_dir + "/report.txt", report_table(reports));
  });
  track_artifact("report.json");
  track_artifact("report.txt");

  for (const auto& rel : artifacts) {
    manifest.input_digests[rel] = digest_file(out_dir + "/" + rel);
    manifest.output_paths[rel] = rel;
  }
  write_manifest(out_dir + "/manifest.json", manifest);
  return manifest;
}

}  // namespace cpt

#include "cptrack/capi.h"

#include <string>

#include "cptrack/io.hpp"
#include "cptrack/pipeline.hpp"

struct cpt_ctx {
  cpt::PipelineConfig cfg;
  bool seed_override = false;
  std::uint64_t seed = 0;
  std::string error;
};

namespace {

template <typename Fn>
cpt_status guarded(cpt_ctx* ctx, Fn fn) {
  if (!ctx) return CPT_ERR_INVALID;
  ctx->error.clear();
  try {
    fn();
    return CPT_OK;
  } catch (const cpt::ValidationError& e) {
    ctx->error = e.what();
    return CPT_ERR_INVALID;
  } catch (const std::exception& e) {
    ctx->error = e.what();
    return CPT_ERR_INTERNAL;
  } catch (...) {
    ctx->error = "unknown error";
    return CPT_ERR_INTERNAL;
  }
}

std::string require(const char* s, const char* what) {
  if (!s) throw cpt::ValidationError(std::string(what) + " is required");
  return s;
}

cpt::PipelineConfig effective_config(const cpt_ctx* ctx) {
  cpt::PipelineConfig cfg = ctx->cfg;
  if (ctx->seed_override) cfg.scenario.seed = ctx->seed;
  return cfg;
}

}  // namespace

extern "C" {

const char* cpt_version(void) { return "1.0.0"; }

cpt_ctx* cpt_ctx_new(void) { return new (std::nothrow) cpt_ctx(); }

void cpt_ctx_free(cpt_ctx* ctx) { delete ctx; }

const char* cpt_ctx_error(const cpt_ctx* ctx) {
  return ctx ? ctx->error.c_str() : "";
}

cpt_status cpt_load_config(cpt_ctx* ctx, const char* path) {
  return guarded(ctx, [&] {
    ctx->cfg = path ? cpt::load_pipeline_config(path) : cpt::PipelineConfig{};
  });
}

cpt_status cpt_set_seed(cpt_ctx* ctx, uint64_t seed) {
  return guarded(ctx, [&] {
    ctx->seed_override = true;
    ctx->seed = seed;
  });
}

cpt_status cpt_simulate(cpt_ctx* ctx, const char* out_dir) {
  return guarded(ctx, [&] {
    cpt::stage_simulate(effective_config(ctx), require(out_dir, "out_dir"));
  });
}

cpt_status cpt_fuse(cpt_ctx* ctx, const char* detections_path,
                    const char* out_path, const char* cls) {
  return guarded(ctx, [&] {
    cpt::stage_fuse(effective_config(ctx),
                    require(detections_path, "detections_path"),
                    require(out_path, "out_path"),
                    cpt::object_class_from_string(require(cls, "cls")));
  });
}

cpt_status cpt_track(cpt_ctx* ctx, const char* fused_path, const char* camera,
                     const char* cls, const char* out_path) {
  return guarded(ctx, [&] {
    cpt::stage_track(effective_config(ctx), require(fused_path, "fused_path"),
                     require(camera, "camera"),
                     cpt::object_class_from_string(require(cls, "cls")),
                     require(out_path, "out_path"));
  });
}

cpt_status cpt_stitch(cpt_ctx* ctx, const char* tracklets_path,
                      const char* out_path) {
  return guarded(ctx, [&] {
    cpt::stage_stitch(effective_config(ctx),
                      require(tracklets_path, "tracklets_path"),
                      require(out_path, "out_path"));
  });
}

cpt_status cpt_handoff(cpt_ctx* ctx, const char* primary_path,
                       const char* aux_path, const char* homography_path,
                       const char* out_path) {
  return guarded(ctx, [&] {
    cpt::stage_handoff(effective_config(ctx),
                       require(primary_path, "primary_path"),
                       require(aux_path, "aux_path"),
                       require(homography_path, "homography_path"),
                       require(out_path, "out_path"));
  });
}

cpt_status cpt_bags(cpt_ctx* ctx, const char* person_tracks_path,
                    const char* bag_tracks_path, const char* out_ledger,
                    const char* out_events) {
  return guarded(ctx, [&] {
    cpt::stage_bags(effective_config(ctx),
                    require(person_tracks_path, "person_tracks_path"),
                    require(bag_tracks_path, "bag_tracks_path"),
                    require(out_ledger, "out_ledger"),
                    require(out_events, "out_events"));
  });
}

cpt_status cpt_evaluate(cpt_ctx* ctx, const char* gt_path,
                        const char* tracks_path, const char* out_path) {
  return guarded(ctx, [&] {
    cpt::stage_evaluate(effective_config(ctx), require(gt_path, "gt_path"),
                        require(tracks_path, "tracks_path"),
                        require(out_path, "out_path"));
  });
}

cpt_status cpt_occupancy_export(cpt_ctx* ctx, const char* detections_path,
                                const char* out_path) {
  return guarded(ctx, [&] {
    cpt::stage_occupancy_export(effective_config(ctx),
                                require(detections_path, "detections_path"),
                                require(out_path, "out_path"));
  });
}

cpt_status cpt_pipeline(cpt_ctx* ctx, const char* out_dir) {
  return guarded(ctx, [&] {
    cpt::run_pipeline(effective_config(ctx), require(out_dir, "out_dir"));
  });
}

}  // extern "C"

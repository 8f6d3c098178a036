#ifndef CPTRACK_CAPI_H
#define CPTRACK_CAPI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every operation. */
typedef enum cpt_status {
  CPT_OK = 0,
  CPT_ERR_INVALID = 1, /* bad input, config, or file contents */
  CPT_ERR_INTERNAL = 2
} cpt_status;

/* Opaque context holding the loaded configuration and the last error. */
typedef struct cpt_ctx cpt_ctx;

const char* cpt_version(void);

cpt_ctx* cpt_ctx_new(void);
void cpt_ctx_free(cpt_ctx* ctx);

/* Message of the last failed call on this context; empty string if none. */
const char* cpt_ctx_error(const cpt_ctx* ctx);

/* Loads a pipeline configuration document. Defaults apply when path is
 * NULL or fields are absent. */
cpt_status cpt_load_config(cpt_ctx* ctx, const char* path);
cpt_status cpt_set_seed(cpt_ctx* ctx, uint64_t seed);

/* Stage entry points. Paths are UTF-8 file or directory paths; cls is
 * "person" or "bag". */
cpt_status cpt_simulate(cpt_ctx* ctx, const char* out_dir);
cpt_status cpt_fuse(cpt_ctx* ctx, const char* detections_path,
                    const char* out_path, const char* cls);
cpt_status cpt_track(cpt_ctx* ctx, const char* fused_path, const char* camera,
                     const char* cls, const char* out_path);
cpt_status cpt_stitch(cpt_ctx* ctx, const char* tracklets_path,
                      const char* out_path);
cpt_status cpt_handoff(cpt_ctx* ctx, const char* primary_path,
                       const char* aux_path, const char* homography_path,
                       const char* out_path);
cpt_status cpt_bags(cpt_ctx* ctx, const char* person_tracks_path,
                    const char* bag_tracks_path, const char* out_ledger,
                    const char* out_events);
cpt_status cpt_evaluate(cpt_ctx* ctx, const char* gt_path,
                        const char* tracks_path, const char* out_path);
cpt_status cpt_occupancy_export(cpt_ctx* ctx, const char* detections_path,
                                const char* out_path);
cpt_status cpt_pipeline(cpt_ctx* ctx, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* CPTRACK_CAPI_H */

#pragma once

#include <map>
#include <string>
#include <vector>

#include "cptrack/bagassoc.hpp"
#include "cptrack/metrics.hpp"
#include "cptrack/scenario.hpp"
#include "cptrack/tracker.hpp"

namespace cpt {

inline constexpr int kFormatVersion = 1;

// Line-delimited JSON files. The first line is a header record carrying the
// format name and version; every following line is one record. Boxes are
// stored corner-format (x, y, w, h) on disk.

void write_detections(const std::string& path, const std::vector<Detection>& dets);
std::vector<Detection> read_detections(const std::string& path);

// Groups per-angle detections of one camera into complete n-slot frames.
// Missing (frame, angle) slots stay empty; their count is reported so
// callers can emit a warning.
struct AugmentedGroup {
  std::vector<AugmentedFrame> frames;
  long missing_slots = 0;
};
AugmentedGroup group_augmented(const std::vector<Detection>& dets, const Roi& roi,
                               int n);

void write_tracklets(const std::string& path, const std::vector<Tracklet>& ts);
std::vector<Tracklet> read_tracklets(const std::string& path);

void write_track_output(const std::string& path, const TrackOutput& out);
TrackOutput read_track_output(const std::string& path);

void write_ledger(const std::string& path, const AssociationLedger& ledger);
AssociationLedger read_ledger(const std::string& path);

void write_ground_truth(const std::string& path, const GroundTruth& gt);
GroundTruth read_ground_truth(const std::string& path);

// Single JSON document holding one 3x3 matrix; checked for invertibility.
Homography load_homography(const std::string& path);
void save_homography(const std::string& path, const Homography& h);

// MOTChallenge-style CSV: frame,id,x,y,w,h,score,class,camera.
void export_mot_csv(const std::string& path, const TrackOutput& out,
                    const std::string& camera);

void write_reports(const std::string& path,
                   const std::map<std::string, EvalReport>& reports);
std::map<std::string, EvalReport> read_reports(const std::string& path);
std::string report_table(const std::map<std::string, EvalReport>& reports);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);

}  // namespace cpt

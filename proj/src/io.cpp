#include "cptrack/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace cpt {

std::string to_string(ObjectClass c) {
  return c == ObjectClass::person ? "person" : "bag";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "person") return ObjectClass::person;
  if (s == "bag") return ObjectClass::bag;
  throw ValidationError("unknown object class '" + s + "'");
}

namespace {

json box_to_json(const BBox& b) {
  return json{{"x", b.x0()}, {"y", b.y0()}, {"w", b.w}, {"h", b.h}};
}

BBox box_from_json(const json& j) {
  const double w = j.at("w").get<double>();
  const double h = j.at("h").get<double>();
  if (!(w > 0) || !(h > 0)) throw ValidationError("box has nonpositive size");
  const double x = j.at("x").get<double>();
  const double y = j.at("y").get<double>();
  return {x + w / 2, y + h / 2, w, h};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  return in;
}

void write_header(std::ofstream& out, const std::string& format) {
  out << json{{"format", format}, {"version", kFormatVersion}}.dump() << "\n";
}

// Reads an ndjson file, checks the header, and applies fn to each record.
// Errors carry "path:line".
template <typename Fn>
void for_each_record(const std::string& path, const std::string& format, Fn fn) {
  std::ifstream in = open_in(path);
  std::string line;
  long lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (!header_seen) {
        if (j.value("format", "") != format)
          throw ValidationError("expected format '" + format + "'");
        if (j.value("version", -1) != kFormatVersion)
          throw ValidationError("unsupported format version");
        header_seen = true;
        continue;
      }
      fn(j);
    } catch (const std::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header_seen && lineno > 0)
    throw ValidationError(path + ": missing header record");
}

json polygon_to_json(const Polygon& p) {
  json arr = json::array();
  for (const auto& v : p.vertices) arr.push_back(json::array({v.x, v.y}));
  return arr;
}

Polygon polygon_from_json(const json& j) {
  Polygon p;
  for (const auto& v : j) p.vertices.push_back({v.at(0), v.at(1)});
  if (p.vertices.size() < 3)
    throw ValidationError("footprint needs at least 3 vertices");
  return p;
}

}  // namespace

void write_detections(const std::string& path, const std::vector<Detection>& dets) {
  std::ofstream out = open_out(path);
  write_header(out, "cptrack-detections");
  for (const auto& d : dets) {
    json j{{"frame", d.frame}, {"camera", d.camera},
           {"class", to_string(d.cls)}, {"score", d.score},
           {"box", box_to_json(d.box)}};
    if (d.angle_index) j["angle"] = *d.angle_index;
    if (d.footprint) j["footprint"] = polygon_to_json(*d.footprint);
    out << j.dump() << "\n";
  }
}

std::vector<Detection> read_detections(const std::string& path) {
  std::vector<Detection> dets;
  for_each_record(path, "cptrack-detections", [&](const json& j) {
    Detection d;
    d.frame = j.at("frame").get<long>();
    if (d.frame < 0) throw ValidationError("frame must be >= 0");
    d.camera = j.at("camera").get<std::string>();
    d.cls = object_class_from_string(j.at("class").get<std::string>());
    d.score = j.at("score").get<double>();
    if (d.score < 0.0 || d.score > 1.0)
      throw ValidationError("score outside [0, 1]");
    d.box = box_from_json(j.at("box"));
    if (j.contains("angle")) {
      const int a = j.at("angle").get<int>();
      if (a < 0) throw ValidationError("angle index must be >= 0");
      d.angle_index = a;
    }
    if (j.contains("footprint")) d.footprint = polygon_from_json(j.at("footprint"));
    dets.push_back(std::move(d));
  });
  return dets;
}

AugmentedGroup group_augmented(const std::vector<Detection>& dets, const Roi& roi,
                               int n) {
  if (n < 1) throw ValidationError("rotation count must be >= 1");
  std::map<long, AugmentedFrame> by_frame;
  for (const auto& d : dets) {
    const int a = d.angle_index.value_or(0);
    if (a >= n)
      throw ValidationError("detection angle index " + std::to_string(a) +
                            " outside rotation count " + std::to_string(n));
    auto& af = by_frame[d.frame];
    if (af.per_angle.empty()) {
      af.frame = d.frame;
      af.roi = roi;
      af.per_angle.resize(static_cast<std::size_t>(n));
    }
    af.per_angle[static_cast<std::size_t>(a)].push_back(d);
  }
  AugmentedGroup g;
  for (auto& [f, af] : by_frame) {
    for (const auto& slot : af.per_angle)
      if (slot.empty()) g.missing_slots += 1;
    g.frames.push_back(std::move(af));
  }
  return g;
}

void write_tracklets(const std::string& path, const std::vector<Tracklet>& ts) {
  std::ofstream out = open_out(path);
  write_header(out, "cptrack-tracklets");
  for (const auto& t : ts) {
    json entries = json::array();
    for (const auto& [frame, box] : t.entries)
      entries.push_back(json{{"frame", frame}, {"box", box_to_json(box)}});
    out << json{{"label", t.label}, {"camera", t.camera},
                {"class", to_string(t.cls)}, {"entries", entries}}
               .dump()
        << "\n";
  }
}

std::vector<Tracklet> read_tracklets(const std::string& path) {
  std::vector<Tracklet> ts;
  for_each_record(path, "cptrack-tracklets", [&](const json& j) {
    Tracklet t;
    t.label = j.at("label").get<long>();
    t.camera = j.at("camera").get<std::string>();
    t.cls = object_class_from_string(j.at("class").get<std::string>());
    long prev = -1;
    for (const auto& e : j.at("entries")) {
      const long frame = e.at("frame").get<long>();
      if (frame <= prev)
        throw ValidationError("tracklet frames must be strictly increasing");
      prev = frame;
      t.entries.emplace_back(frame, box_from_json(e.at("box")));
    }
    if (t.entries.empty()) throw ValidationError("tracklet has no entries");
    ts.push_back(std::move(t));
  });
  return ts;
}

void write_track_output(const std::string& path, const TrackOutput& out_entries) {
  std::ofstream out = open_out(path);
  write_header(out, "cptrack-tracks");
  for (const auto& e : out_entries)
    out << json{{"frame", e.frame}, {"label", e.label},
                {"class", to_string(e.cls)}, {"box", box_to_json(e.box)}}
               .dump()
        << "\n";
}

TrackOutput read_track_output(const std::string& path) {
  TrackOutput out;
  for_each_record(path, "cptrack-tracks", [&](const json& j) {
    TrackOutputEntry e;
    e.frame = j.at("frame").get<long>();
    e.label = j.at("label").get<long>();
    e.cls = object_class_from_string(j.at("class").get<std::string>());
    e.box = box_from_json(j.at("box"));
    out.push_back(e);
  });
  return out;
}

void write_ledger(const std::string& path, const AssociationLedger& ledger) {
  std::ofstream out = open_out(path);
  write_header(out, "cptrack-ledger");
  for (const auto& e : ledger.entries)
    out << json{{"person", e.person_label}, {"bag", e.bag_label},
                {"frame", e.frame_created}}
               .dump()
        << "\n";
}

AssociationLedger read_ledger(const std::string& path) {
  AssociationLedger ledger;
  for_each_record(path, "cptrack-ledger", [&](const json& j) {
    OwnershipEntry e;
    e.person_label = j.at("person").get<long>();
    e.bag_label = j.at("bag").get<long>();
    e.frame_created = j.at("frame").get<long>();
    if (ledger.owner_of(e.bag_label))
      throw ValidationError("duplicate ledger entry for bag " +
                            std::to_string(e.bag_label));
    ledger.entries.push_back(e);
  });
  return ledger;
}

void write_ground_truth(const std::string& path, const GroundTruth& gt) {
  std::ofstream out = open_out(path);
  write_header(out, "cptrack-gt");
  for (const auto& [frame, boxes] : gt.frames)
    for (const auto& b : boxes)
      out << json{{"frame", frame}, {"id", b.id}, {"class", to_string(b.cls)},
                  {"box", box_to_json(b.box)}}
                 .dump()
          << "\n";
}

GroundTruth read_ground_truth(const std::string& path) {
  GroundTruth gt;
  for_each_record(path, "cptrack-gt", [&](const json& j) {
    GtBox b;
    b.id = j.at("id").get<long>();
    b.cls = object_class_from_string(j.at("class").get<std::string>());
    b.box = box_from_json(j.at("box"));
    gt.frames[j.at("frame").get<long>()].push_back(b);
  });
  return gt;
}

Homography load_homography(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  const auto& m = j.at("m");
  if (m.size() != 3) throw ValidationError(path + ": homography must be 3x3");
  Homography h;
  for (int r = 0; r < 3; ++r) {
    if (m[r].size() != 3) throw ValidationError(path + ": homography must be 3x3");
    for (int c = 0; c < 3; ++c) h.m[r][c] = m[r][c].get<double>();
  }
  if (!h.invertible()) throw ValidationError(path + ": singular homography");
  return h.normalized();
}

void save_homography(const std::string& path, const Homography& h) {
  json m = json::array();
  for (int r = 0; r < 3; ++r)
    m.push_back(json::array({h.m[r][0], h.m[r][1], h.m[r][2]}));
  std::ofstream out = open_out(path);
  out << json{{"format", "cptrack-homography"}, {"version", kFormatVersion},
              {"m", m}}
             .dump(2)
      << "\n";
}

void export_mot_csv(const std::string& path, const TrackOutput& entries,
                    const std::string& camera) {
  std::ofstream out = open_out(path);
  out << "frame,id,x,y,w,h,score,class,camera\n";
  for (const auto& e : entries) {
    std::ostringstream row;
    row << e.frame << ',' << e.label << ',' << e.box.x0() << ',' << e.box.y0()
        << ',' << e.box.w << ',' << e.box.h << ",1," << to_string(e.cls) << ','
        << camera << '\n';
    out << row.str();
  }
}

namespace {

json report_to_json(const EvalReport& r) {
  return json{{"tp", r.tp},     {"fp", r.fp},       {"fn", r.fn},
              {"ids", r.ids},   {"gt", r.gt_total}, {"frames", r.frames},
              {"rcll", r.rcll}, {"prcn", r.prcn},   {"moda", r.moda},
              {"mota", r.mota}, {"motp", r.motp},   {"far", r.far},
              {"mt", r.mt},     {"ml", r.ml},       {"idf1", r.idf1},
              {"idr", r.idr},   {"idp", r.idp},     {"idtp", r.idtp},
              {"idfp", r.idfp}, {"idfn", r.idfn}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.tp = j.at("tp");
  r.fp = j.at("fp");
  r.fn = j.at("fn");
  r.ids = j.at("ids");
  r.gt_total = j.at("gt");
  r.frames = j.at("frames");
  r.rcll = j.at("rcll");
  r.prcn = j.at("prcn");
  r.moda = j.at("moda");
  r.mota = j.at("mota");
  r.motp = j.at("motp");
  r.far = j.at("far");
  r.mt = j.at("mt");
  r.ml = j.at("ml");
  r.idf1 = j.at("idf1");
  r.idr = j.at("idr");
  r.idp = j.at("idp");
  r.idtp = j.at("idtp");
  r.idfp = j.at("idfp");
  r.idfn = j.at("idfn");
  return r;
}

}  // namespace

void write_reports(const std::string& path,
                   const std::map<std::string, EvalReport>& reports) {
  json j{{"format", "cptrack-report"}, {"version", kFormatVersion}};
  for (const auto& [name, r] : reports) j["reports"][name] = report_to_json(r);
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

std::map<std::string, EvalReport> read_reports(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  std::map<std::string, EvalReport> reports;
  if (j.contains("reports"))
    for (const auto& [name, rj] : j.at("reports").items())
      reports[name] = report_from_json(rj);
  return reports;
}

std::string report_table(const std::map<std::string, EvalReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %6s %6s %6s %5s %7s %7s %7s %7s %7s\n",
                "sequence", "TP", "FP", "FN", "IDs", "Rcll", "Prcn", "MODA",
                "MOTA", "IDF1");
  out << line;
  for (const auto& [name, r] : reports) {
    std::snprintf(line, sizeof(line),
                  "%-24s %6ld %6ld %6ld %5ld %6.1f%% %6.1f%% %6.1f%% %6.1f%% "
                  "%6.1f%%\n",
                  name.c_str(), r.tp, r.fp, r.fn, r.ids, 100 * r.rcll,
                  100 * r.prcn, 100 * r.moda, 100 * r.mota, 100 * r.idf1);
    out << line;
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out = open_out(path);
  out << body;
}

}  // namespace cpt

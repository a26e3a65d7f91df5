#include "llcoach/plan_library.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <numeric>
#include <set>

#include "llcoach/coach.hpp"
#include "llcoach/error.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

bool valid_frame_id(std::string_view id) {
  if (id.empty() || id.front() == '.' || id.front() == '-') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

// Strict weak order used for every tie: distance, then created_at, then frame_id.
bool better(double d, const PlanRecord& r, double best_d, const PlanRecord& best) {
  if (d != best_d) return d < best_d;
  if (r.created_at != best.created_at) return r.created_at < best.created_at;
  return r.frame_id < best.frame_id;
}

Selection nearest(const Library& library, const std::vector<std::size_t>& candidates, Scenario live,
                  const Domain& domain) {
  Selection out;
  out.live_scenario = std::move(live);
  for (std::size_t i : candidates) {
    const PlanRecord& r = library.records[i];
    const double d = scenario_distance(out.live_scenario, r.scenario, domain);
    if (out.record == nullptr || better(d, r, out.distance, *out.record)) {
      out.record = &r;
      out.distance = d;
    }
  }
  return out;
}

constexpr std::string_view kFrameTag = "# frame_id: ";
constexpr std::string_view kAdviceTag = "# advice_hash: ";

}  // namespace

const PlanRecord* Library::find(std::string_view frame_id) const {
  for (const auto& r : records) {
    if (r.frame_id == frame_id) return &r;
  }
  return nullptr;
}

std::int64_t Library::next_timestamp() const {
  std::int64_t next = 1;
  for (const auto& r : records) next = std::max(next, r.created_at + 1);
  return next;
}

Library add(const Library& library, PlanRecord record, const ActionCatalog& catalog, const Domain& domain) {
  if (!valid_frame_id(record.frame_id)) {
    throw Error(ErrorKind::InvalidArgument, "invalid frame id '" + record.frame_id + "'");
  }
  if (library.find(record.frame_id) != nullptr) throw Error(ErrorKind::DuplicateFrameId, record.frame_id);
  if (record.scenario.empty()) throw Error(ErrorKind::InvalidPlan, record.frame_id + ": empty scenario");
  if (record.plan.steps.empty()) throw Error(ErrorKind::InvalidPlan, record.frame_id + ": empty plan");
  const auto report =
      validate_plan(record.plan, catalog, domain, initial_state_from_scenario(record.scenario, domain));
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidPlan, record.frame_id + ": plan does not validate:\n" + report.to_lines());
  }
  Library out = library;
  out.records.push_back(std::move(record));
  return out;
}

Selection select_plan(const Library& library, const WorldState& world, const Domain& domain) {
  if (library.empty()) throw Error(ErrorKind::EmptyLibrary, "plan library is empty");
  std::vector<std::size_t> all(library.size());
  std::iota(all.begin(), all.end(), 0);
  return nearest(library, all, scenario_from_world(world, domain), domain);
}

std::vector<Cluster> cluster_scenarios(const Library& library, std::size_t k, const Domain& domain) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be positive");
  const std::size_t n = library.size();
  if (k > n) {
    throw Error(ErrorKind::KTooLarge,
                "k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " stored records");
  }
  const auto& recs = library.records;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] = scenario_distance(recs[i].scenario, recs[j].scenario, domain);
    }
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return recs[a].frame_id < recs[b].frame_id; };

  // Farthest-first seeding.
  std::vector<std::size_t> medoids;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), by_id);
  medoids.push_back(order.front());
  while (medoids.size() < k) {
    std::size_t pick = n;
    double pick_d = -1.0;
    for (std::size_t i : order) {
      if (std::find(medoids.begin(), medoids.end(), i) != medoids.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t m : medoids) d = std::min(d, dist[i][m]);
      if (d > pick_d) {
        pick = i;
        pick_d = d;
      }
    }
    medoids.push_back(pick);
  }

  std::vector<std::size_t> owner(n);
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 0; c < medoids.size(); ++c) {
        if (medoids[c] == i) {
          best = c;
          break;
        }
        const double d = dist[i][medoids[c]];
        const double bd = dist[i][medoids[best]];
        if (d < bd || (d == bd && by_id(medoids[c], medoids[best]))) best = c;
      }
      owner[i] = best;
    }
  };

  assign();
  for (int iteration = 0; iteration < 100; ++iteration) {
    bool changed = false;
    for (std::size_t c = 0; c < medoids.size(); ++c) {
      std::size_t best = medoids[c];
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::size_t cand : order) {
        if (owner[cand] != c) continue;
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (owner[j] == c) cost += dist[cand][j];
        }
        if (cost < best_cost) {
          best = cand;
          best_cost = cost;
        }
      }
      if (best != medoids[c]) {
        medoids[c] = best;
        changed = true;
      }
    }
    if (!changed) break;
    assign();
  }

  std::vector<Cluster> clusters(medoids.size());
  for (std::size_t c = 0; c < medoids.size(); ++c) {
    clusters[c].centroid = recs[medoids[c]].scenario;
    clusters[c].medoid_frame_id = recs[medoids[c]].frame_id;
  }
  for (std::size_t i = 0; i < n; ++i) clusters[owner[i]].members.push_back(recs[i].frame_id);
  return clusters;
}

Selection select_plan_clustered(const Library& library, const WorldState& world, const Domain& domain,
                                std::size_t k) {
  if (library.empty()) throw Error(ErrorKind::EmptyLibrary, "plan library is empty");
  const auto clusters = cluster_scenarios(library, k, domain);
  Scenario live = scenario_from_world(world, domain);
  const Cluster* best = nullptr;
  double best_d = 0.0;
  for (const auto& c : clusters) {
    const double d = scenario_distance(live, c.centroid, domain);
    if (best == nullptr || d < best_d || (d == best_d && c.medoid_frame_id < best->medoid_frame_id)) {
      best = &c;
      best_d = d;
    }
  }
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < library.size(); ++i) {
    const auto& m = best->members;
    if (std::find(m.begin(), m.end(), library.records[i].frame_id) != m.end()) members.push_back(i);
  }
  return nearest(library, members, std::move(live), domain);
}

void save_library(const Library& library, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + directory + ": " + ec.message());
  std::string manifest;
  for (const auto& r : library.records) {
    if (!valid_frame_id(r.frame_id)) throw Error(ErrorKind::InvalidArgument, "invalid frame id '" + r.frame_id + "'");
    manifest += "FRAME " + r.frame_id + " " + std::to_string(r.created_at) + "\n";
    std::string plan;
    if (!r.plan.provenance.frame_id.empty()) plan += std::string(kFrameTag) + r.plan.provenance.frame_id + "\n";
    if (!r.plan.provenance.advice_hash.empty()) plan += std::string(kAdviceTag) + r.plan.provenance.advice_hash + "\n";
    plan += serialize_plan(r.plan);
    text::write_file((fs::path(directory) / (r.frame_id + ".plan")).string(), plan);
    text::write_file((fs::path(directory) / (r.frame_id + ".scenario")).string(), serialize_scenario(r.scenario));
  }
  text::write_file((fs::path(directory) / "manifest.txt").string(), manifest);
}

Library load_library(const std::string& directory, const ActionCatalog& catalog, const Domain& domain) {
  namespace fs = std::filesystem;
  const std::string manifest_path = (fs::path(directory) / "manifest.txt").string();
  const auto lines = text::split_lines(text::read_file(manifest_path));
  Library library;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = manifest_path + ":" + std::to_string(i + 1) + ": ";
    std::vector<std::string> fields;
    if (!text::tokenize_quoted(line, fields) || fields.size() != 3 || fields[0] != "FRAME") {
      throw Error(ErrorKind::ParseError, where + "expected 'FRAME <id> <created_at>'");
    }
    PlanRecord record;
    record.frame_id = fields[1];
    if (!valid_frame_id(record.frame_id)) throw Error(ErrorKind::ParseError, where + "invalid frame id");
    try {
      std::size_t used = 0;
      record.created_at = std::stoll(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, where + "invalid created_at '" + fields[2] + "'");
    }
    const std::string base = (fs::path(directory) / record.frame_id).string();
    const std::string plan_text = text::read_file(base + ".plan");
    try {
      record.plan = parse_plan(plan_text, catalog, domain);
      record.scenario = parse_scenario_block(text::read_file(base + ".scenario"), domain);
    } catch (const Error& e) {
      throw Error(e.kind(), record.frame_id + ": " + e.detail());
    }
    for (const auto& pl : text::split_lines(plan_text)) {
      if (pl.starts_with(kFrameTag)) record.plan.provenance.frame_id = pl.substr(kFrameTag.size());
      if (pl.starts_with(kAdviceTag)) record.plan.provenance.advice_hash = pl.substr(kAdviceTag.size());
    }
    library = add(library, std::move(record), catalog, domain);
  }
  return library;
}

}  // namespace llcoach

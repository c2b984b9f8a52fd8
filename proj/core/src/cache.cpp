#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "buslink/candidates.hpp"
#include "buslink/errors.hpp"
#include "buslink/netio.hpp"

namespace buslink {

namespace {

using nlohmann::json;

constexpr const char* kCacheFormat = "buslink-cache";
constexpr int kCacheVersion = 1;

json edge_to_json(const CandidateEdge& e) {
  return {{"a", e.stop_a},
          {"b", e.stop_b},
          {"path", e.road_path},
          {"length", e.length_m},
          {"demand", e.demand},
          {"delta", e.delta}};
}

CandidateEdge edge_from_json(const json& j, bool is_new) {
  CandidateEdge e;
  e.stop_a = j.at("a").get<std::int32_t>();
  e.stop_b = j.at("b").get<std::int32_t>();
  e.road_path = j.at("path").get<std::vector<RoadVertexId>>();
  e.length_m = j.at("length").get<double>();
  e.demand = j.at("demand").get<double>();
  e.delta = j.at("delta").get<double>();
  e.is_new = is_new;
  return e;
}

}  // namespace

void save_cache(const PrecomputeCache& cache, const std::string& path) {
  json doc;
  doc["format"] = kCacheFormat;
  doc["version"] = kCacheVersion;
  doc["input_hash"] = cache.input_hash;
  doc["tau_m"] = cache.tau_m;
  doc["spectral"] = {{"probes", cache.params.probes},
                     {"lanczos_steps", cache.params.lanczos_steps},
                     {"seed", cache.params.seed},
                     {"epsilon", cache.params.epsilon},
                     {"delta", cache.params.delta}};
  doc["exact"] = cache.exact;
  doc["lambda_base"] = cache.lambda_base;
  doc["stats"] = {{"pairs_within_tau", cache.stats.pairs_within_tau},
                  {"unreachable_dropped", cache.stats.unreachable_dropped}};
  json cand = json::array();
  for (const auto& e : cache.candidates) cand.push_back(edge_to_json(e));
  doc["candidates"] = cand;
  json exist = json::array();
  for (const auto& e : cache.existing) exist.push_back(edge_to_json(e));
  doc["existing"] = exist;
  io::write_text_file(path, doc.dump() + "\n");
}

PrecomputeCache load_cache(const std::string& path) {
  json doc;
  try {
    doc = json::parse(io::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kCacheFormat) {
      throw ParseError(path + ": not a preprocessing cache");
    }
    if (doc.at("version").get<int>() != kCacheVersion) {
      throw ParseError(path + ": unsupported cache version");
    }
    PrecomputeCache cache;
    cache.input_hash = doc.at("input_hash").get<std::string>();
    cache.tau_m = doc.at("tau_m").get<double>();
    const auto& sp = doc.at("spectral");
    cache.params.probes = sp.at("probes").get<int>();
    cache.params.lanczos_steps = sp.at("lanczos_steps").get<int>();
    cache.params.seed = sp.at("seed").get<std::uint64_t>();
    cache.params.epsilon = sp.at("epsilon").get<double>();
    cache.params.delta = sp.at("delta").get<double>();
    cache.exact = doc.at("exact").get<bool>();
    cache.lambda_base = doc.at("lambda_base").get<double>();
    cache.stats.pairs_within_tau = doc.at("stats").at("pairs_within_tau").get<std::size_t>();
    cache.stats.unreachable_dropped =
        doc.at("stats").at("unreachable_dropped").get<std::size_t>();
    for (const auto& j : doc.at("candidates")) cache.candidates.push_back(edge_from_json(j, true));
    for (const auto& j : doc.at("existing")) cache.existing.push_back(edge_from_json(j, false));
    return cache;
  } catch (const json::exception& e) {
    throw ParseError(path + ": malformed cache: " + e.what());
  }
}

std::string hash_inputs(const std::vector<std::string>& file_paths,
                        const std::vector<std::string>& extra_tokens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  const auto mix_string = [&](const std::string& s) {
    for (unsigned char c : s) mix_byte(c);
    mix_byte(0xff);  // separator so token boundaries matter
  };
  for (const auto& p : file_paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError(p + ": cannot open file for hashing");
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
      const auto got = in.gcount();
      for (std::streamsize i = 0; i < got; ++i) mix_byte(static_cast<unsigned char>(buf[i]));
      if (!in) break;
    }
    mix_byte(0xfe);
  }
  for (const auto& t : extra_tokens) mix_string(t);
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace buslink

#include "splitflow/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace splitflow {

namespace {

using json = nlohmann::ordered_json;

double number_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + ": missing \"" + key + "\"");
  if (!it->is_number()) throw InputError(where + ": \"" + key + "\" must be a number");
  return it->get<double>();
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("instance: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("instance: top level must be an object");
  if (!doc.contains("links") || !doc["links"].is_array()) throw InputError("instance: \"links\" must be an array");
  if (!doc.contains("players") || !doc["players"].is_array())
    throw InputError("instance: \"players\" must be an array");

  Instance inst;
  std::size_t j = 0;
  for (const auto& l : doc["links"]) {
    const std::string where = "links[" + std::to_string(j++) + "]";
    if (!l.is_object()) throw InputError(where + ": must be an object");
    LatencyFn fn;
    fn.a = number_field(l, "a", where);
    fn.b = number_field(l, "b", where);
    if (l.contains("d")) {
      if (!l["d"].is_number_integer()) throw InputError(where + ": \"d\" must be an integer");
      fn.d = l["d"].get<int>();
    }
    if (l.contains("allow_zero")) {
      if (!l["allow_zero"].is_boolean()) throw InputError(where + ": \"allow_zero\" must be a boolean");
      fn.allow_zero = l["allow_zero"].get<bool>();
    }
    inst.links.push_back(fn);
  }
  std::size_t i = 0;
  for (const auto& p : doc["players"]) {
    const std::string where = "players[" + std::to_string(i++) + "]";
    if (!p.is_object()) throw InputError(where + ": must be an object");
    PlayerSpec spec;
    spec.flow = number_field(p, "flow", where);
    if (p.contains("behavior")) {
      const auto& b = p["behavior"];
      if (b == "atomic") spec.behavior = Behavior::atomic;
      else if (b == "wardrop") spec.behavior = Behavior::wardrop;
      else throw InputError(where + ": \"behavior\" must be \"atomic\" or \"wardrop\"");
    }
    if (p.contains("links")) {
      if (!p["links"].is_array()) throw InputError(where + ": \"links\" must be an array");
      for (const auto& idx : p["links"]) {
        if (!idx.is_number_integer() || idx.get<long long>() < 0)
          throw InputError(where + ": link indices must be nonnegative integers");
        spec.links.push_back(idx.get<std::size_t>());
      }
      if (spec.links.empty()) throw InputError(where + ": \"links\" must not be empty");
    }
    inst.players.push_back(std::move(spec));
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string format_instance(const Instance& instance) {
  const std::size_t n = instance.num_links();
  auto raw = [&](std::size_t k) { return instance.raw_index.empty() ? k : instance.raw_index[k]; };
  std::vector<LatencyFn> links(n);
  for (std::size_t k = 0; k < n; ++k) links[raw(k)] = instance.links[k];

  json doc;
  doc["links"] = json::array();
  for (const auto& l : links) {
    json o = {{"a", l.a}, {"b", l.b}, {"d", l.d}};
    if (l.allow_zero) o["allow_zero"] = true;
    doc["links"].push_back(o);
  }
  doc["players"] = json::array();
  for (const auto& p : instance.players) {
    json o = {{"flow", p.flow}, {"behavior", p.behavior == Behavior::atomic ? "atomic" : "wardrop"}};
    json ids = json::array();
    std::vector<std::size_t> mapped;
    for (std::size_t k : p.links) mapped.push_back(raw(k));
    std::sort(mapped.begin(), mapped.end());
    for (std::size_t k : mapped) ids.push_back(k);
    if (!mapped.empty()) o["links"] = ids;
    doc["players"].push_back(o);
  }
  return doc.dump();
}

}  // namespace splitflow

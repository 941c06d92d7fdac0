#include "quantiscene/record.hpp"

#include <stdexcept>

namespace quantiscene {

std::string CellRef::label() const {
  return std::string(to_string(mode)) + "/" + (area_controlled ? "area" : "size") + "/" + ratio;
}

CellRef CellRef::of(const EvalConfig& config) {
  return {config.mode, config.area_controlled, config.ratio_label()};
}

Json to_json(const InstanceRecord& record) {
  Json j;
  j["id"] = record.id;
  j["image_path"] = record.image_path;
  j["seed"] = record.seed;
  if (record.cell) {
    j["cell"] = {{"mode", to_string(record.cell->mode)},
                 {"area_controlled", record.cell->area_controlled},
                 {"ratio", record.cell->ratio}};
  }
  if (record.counts) j["counts"] = {record.counts->first, record.counts->second};
  j["caption_text"] = record.caption_text;
  j["caption"] = to_json(record.caption_ast);
  if (record.agreement) j["agreement"] = *record.agreement;
  if (record.scene) j["scene"] = to_json(*record.scene);
  return j;
}

InstanceRecord record_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("instance record must be a JSON object");
  InstanceRecord r;
  r.id = j.at("id").get<std::string>();
  r.image_path = j.at("image_path").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (const auto it = j.find("cell"); it != j.end()) {
    CellRef cell;
    cell.mode = position_mode_from_string(it->at("mode").get<std::string>());
    cell.area_controlled = it->at("area_controlled").get<bool>();
    cell.ratio = it->at("ratio").get<std::string>();
    r.cell = cell;
  }
  if (const auto it = j.find("counts"); it != j.end()) {
    r.counts = std::pair{it->at(0).get<int>(), it->at(1).get<int>()};
  }
  r.caption_text = j.at("caption_text").get<std::string>();
  r.caption_ast = caption_from_json(j.at("caption"));
  if (const auto it = j.find("agreement"); it != j.end()) r.agreement = it->get<bool>();
  if (const auto it = j.find("scene"); it != j.end()) r.scene = scene_from_json(*it);
  return r;
}

std::optional<std::string> consistency_violation(const InstanceRecord& record) {
  if (realize(record.caption_ast) != record.caption_text) {
    return "caption_text does not realize caption";
  }
  if (!record.agreement) return "agreement missing";
  if (record.scene) {
    if (evaluate(record.caption_ast, *record.scene) != *record.agreement) {
      return "agreement disagrees with evaluation on the scene";
    }
    if (record.counts && record.cell) {
      // Counts must match the two groups the caption contrasts.
      const auto total = static_cast<int>(record.scene->objects.size());
      if (record.counts->first + record.counts->second != total) {
        return "counts do not add up to the scene's object count";
      }
    }
  }
  return std::nullopt;
}

}  // namespace quantiscene

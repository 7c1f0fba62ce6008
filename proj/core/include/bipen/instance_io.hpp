#pragma once

#include <string>
#include <variant>

#include "bipen/generators.hpp"

namespace bipen {

using Instance = std::variant<UncLinQuadInstance, ConLinearInstance>;

inline constexpr int kInstanceVersion = 1;

std::string instance_to_json(const Instance& inst);
/// Throws SchemaError on a wrong format tag, version, kind or shape.
Instance instance_from_json(const std::string& text);

void save_instance(const std::string& path, const Instance& inst);
Instance load_instance(const std::string& path);

/// Candidate solution file {"x": [...], "y": [...], "z": [...]}.
struct PointFile {
  Vec x;
  Vec y;
  Vec z;
};
std::string point_to_json(const PointFile& pt);
PointFile point_from_json(const std::string& text);
void save_point(const std::string& path, const PointFile& pt);
PointFile load_point(const std::string& path);

}  // namespace bipen

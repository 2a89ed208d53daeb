#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "potlab/core/measure.hpp"

namespace potlab {

/// Shortest decimal text that reads back as the same double (17 significant digits).
std::string format_number(double v);

/// GridMeasure CSV: header x1,...,xd,weight, one row per cell.
std::string measure_csv(const GridMeasure& mu);
/// Reads weights from CSV text; rows must match the cells of grid in order and position.
GridMeasure parse_measure_csv(const std::string& text, const GridPtr& grid);
/// Same, from a file; weights only (cells are taken as points when grid is null).
GridMeasure read_measure_csv(const std::string& path, const GridPtr& grid);

/// Field CSV: header x1,...,xd,value.
std::string field_csv(const PotentialField& f);

nlohmann::json ball_union_to_json(const BallUnionMeasure& mu);
BallUnionMeasure ball_union_from_json(const nlohmann::json& j);
BallUnionMeasure read_ball_union(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace potlab

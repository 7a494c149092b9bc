#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "polarpl/busemann.hpp"
#include "polarpl/grid.hpp"
#include "polarpl/inequalities.hpp"

namespace polarpl {

/// Function spec JSON.
/// Schema A: {"kind":"grid","box":[[lo,hi],...],"shape":[N,...],
///            "values":[...numbers or "inf"...]}  (row-major)
/// Schema B: {"kind":"max_affine","box":...,"terms":[[[a...],b],...]}
///           meaning phi(x) = max(0, max_i(<a_i,x> - b_i)), all b_i >= 0;
///           optional "shape" (defaults 513 in 1D, 129 per axis in 2D).
GridFunction grid_from_json(const nlohmann::json& j);
nlohmann::ordered_json grid_to_json(const GridFunction& f);

GridFunction load_grid(const std::filesystem::path& path);
void save_grid(const GridFunction& f, const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);
/// Writes atomically (temp file + rename).
void save_json(const nlohmann::json& j, const std::filesystem::path& path);
void save_text(const std::string& text, const std::filesystem::path& path);

/// Busemann instance / reduction embedding JSON (field layout mirrors the
/// structs; see README).
BusemannInstance busemann_from_json(const nlohmann::json& j);
ReductionEmbedding reduction_from_json(const nlohmann::json& j);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Minimal SVG line plot of a 1D grid function (infinite values break the
/// polyline).
std::string svg_plot_function(const GridFunction& f, const std::string& title);
/// Margin-vs-lambda scatter/line plot from sweep rows.
std::string svg_plot_margins(const std::vector<SweepRow>& rows, const std::string& title);

}  // namespace polarpl

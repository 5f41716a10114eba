#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lgcpfuse/grid.hpp"

// Raster images of per-cell values. The format follows the file extension:
// .svg (default choice for reports) or .png (RGBA, stored-deflate zlib
// stream, no external dependencies). Both carry a color legend with min/max
// labels; inactive cells are transparent. Output bytes are a pure function
// of the inputs.

namespace lgcpfuse {

struct HeatmapOptions {
  int cell_px = 12;
  std::string title;  // drawn above the map (SVG only)
};

void render_heatmap(const Grid& grid, const std::vector<double>& values,
                    const std::string& path, const HeatmapOptions& opt = {});

// Palette ramp, t in [0,1].
std::array<std::uint8_t, 3> heat_color(double t);

// Reads back an RGBA PNG written by render_heatmap (stored-deflate only);
// returns row-major RGBA bytes, top row first.
std::vector<std::uint8_t> read_png_rgba(const std::string& path, int& width,
                                        int& height);

}  // namespace lgcpfuse

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lgcpfuse/grid.hpp"

// File formats. Rasters carry one value per grid cell (inactive cells are
// NODATA); all floating-point output is printed with %.17g so files
// round-trip exactly and reruns are byte-identical.

namespace lgcpfuse::io {

// ESRI ASCII grid (.asc), rows written north to south.
void write_raster_asc(const std::string& path, const Grid& grid,
                      const std::vector<double>& active_values,
                      double nodata = -9999.0);

// Reads an .asc raster; cells equal to NODATA become inactive.
std::pair<Grid, std::vector<double>> read_raster_asc(const std::string& path);

// Sparse raster as CSV: cell_ix,cell_iy,value (active cells only).
void write_raster_csv(const std::string& path, const Grid& grid,
                      const std::vector<double>& active_values);
std::vector<double> read_raster_csv(const std::string& path, const Grid& grid);

// Point pattern CSV: x,y[,observer_id].
void write_pattern_csv(const std::string& path, const Pattern& pattern);
Pattern read_pattern_csv(const std::string& path);

// Line network as GeoJSON (FeatureCollection of LineString /
// MultiLineString features).
void write_network_geojson(const std::string& path, const Network& net);
Network read_network_geojson(const std::string& path);

// Observer registry CSV: observer_id,cx,cy,activity_level.
void write_observers_csv(const std::string& path,
                         const std::vector<Observer>& observers);
std::vector<Observer> read_observers_csv(const std::string& path);

// %.17g formatting used across all writers.
std::string fmt_g17(double v);

}  // namespace lgcpfuse::io

#include "lgcpfuse/io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace lgcpfuse::io {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str())
    throw std::runtime_error("bad numeric field '" + s + "' in " + path);
  return v;
}

}  // namespace

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_raster_asc(const std::string& path, const Grid& grid,
                      const std::vector<double>& active_values,
                      double nodata) {
  if (static_cast<int>(active_values.size()) != grid.n_active())
    throw std::runtime_error("raster value count != active cell count");
  auto f = open_out(path);
  f << "ncols " << grid.nx << "\n"
    << "nrows " << grid.ny << "\n"
    << "xllcorner " << fmt_g17(grid.x0) << "\n"
    << "yllcorner " << fmt_g17(grid.y0) << "\n"
    << "cellsize " << fmt_g17(grid.h) << "\n"
    << "NODATA_value " << fmt_g17(nodata) << "\n";
  for (int iy = grid.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int a = grid.active_of_cell[grid.flat(ix, iy)];
      if (ix) f << ' ';
      f << fmt_g17(a >= 0 ? active_values[a] : nodata);
    }
    f << '\n';
  }
}

std::pair<Grid, std::vector<double>> read_raster_asc(const std::string& path) {
  auto f = open_in(path);
  Grid g;
  double nodata = -9999.0;
  std::string key;
  for (int i = 0; i < 6; ++i) {
    double val;
    if (!(f >> key >> val))
      throw std::runtime_error("truncated raster header in " + path);
    for (auto& ch : key) ch = static_cast<char>(std::tolower(ch));
    if (key == "ncols") g.nx = static_cast<int>(val);
    else if (key == "nrows") g.ny = static_cast<int>(val);
    else if (key == "xllcorner") g.x0 = val;
    else if (key == "yllcorner") g.y0 = val;
    else if (key == "cellsize") g.h = val;
    else if (key == "nodata_value") nodata = val;
    else throw std::runtime_error("unknown raster header key '" + key +
                                  "' in " + path);
  }
  if (g.nx <= 0 || g.ny <= 0)
    throw std::runtime_error("bad raster dimensions in " + path);
  std::vector<double> full(static_cast<std::size_t>(g.nx) * g.ny);
  g.active_of_cell.assign(full.size(), -1);
  for (int iy = g.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      double v;
      if (!(f >> v)) throw std::runtime_error("truncated raster in " + path);
      full[g.flat(ix, iy)] = v;
      if (v != nodata) g.active_of_cell[g.flat(ix, iy)] = 0;
    }
  g.index_active();
  std::vector<double> vals(g.n_active());
  for (int c = 0; c < g.n_active(); ++c) vals[c] = full[g.cell_of_active[c]];
  return {std::move(g), std::move(vals)};
}

void write_raster_csv(const std::string& path, const Grid& grid,
                      const std::vector<double>& active_values) {
  if (static_cast<int>(active_values.size()) != grid.n_active())
    throw std::runtime_error("raster value count != active cell count");
  auto f = open_out(path);
  f << "cell_ix,cell_iy,value\n";
  for (int c = 0; c < grid.n_active(); ++c) {
    const int flat = grid.cell_of_active[c];
    f << grid.ix_of(flat) << ',' << grid.iy_of(flat) << ','
      << fmt_g17(active_values[c]) << '\n';
  }
}

std::vector<double> read_raster_csv(const std::string& path,
                                    const Grid& grid) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty raster csv: " + path);
  std::vector<double> vals(grid.n_active(),
                           std::numeric_limits<double>::quiet_NaN());
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3)
      throw std::runtime_error("expected 3 fields per row in " + path);
    const int ix = static_cast<int>(to_double(fields[0], path));
    const int iy = static_cast<int>(to_double(fields[1], path));
    if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny)
      throw std::runtime_error("cell index out of range in " + path);
    const int a = grid.active_of_cell[grid.flat(ix, iy)];
    if (a < 0) throw std::runtime_error("inactive cell in " + path);
    vals[a] = to_double(fields[2], path);
  }
  return vals;
}

void write_pattern_csv(const std::string& path, const Pattern& pattern) {
  auto f = open_out(path);
  bool any_obs = false;
  for (int o : pattern.observer) any_obs |= (o >= 0);
  f << (any_obs ? "x,y,observer_id\n" : "x,y\n");
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    f << fmt_g17(pattern.x[i]) << ',' << fmt_g17(pattern.y[i]);
    if (any_obs) f << ',' << pattern.observer[i];
    f << '\n';
  }
}

Pattern read_pattern_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty pattern csv: " + path);
  const auto header = split_csv(line);
  const bool has_obs = header.size() >= 3;
  Pattern p;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() < 2)
      throw std::runtime_error("expected at least x,y in " + path);
    const double x = to_double(fields[0], path);
    const double y = to_double(fields[1], path);
    int obs = -1;
    if (has_obs && fields.size() >= 3 && !fields[2].empty())
      obs = static_cast<int>(to_double(fields[2], path));
    p.add(x, y, obs);
  }
  return p;
}

void write_network_geojson(const std::string& path, const Network& net) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& line : net.lines) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& pt : line) coords.push_back({pt[0], pt[1]});
    features.push_back({{"type", "Feature"},
                        {"properties", nlohmann::json::object()},
                        {"geometry",
                         {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  auto f = open_out(path);
  f << doc.dump(2) << '\n';
}

Network read_network_geojson(const std::string& path) {
  auto f = open_in(path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad geojson in " + path + ": " + e.what());
  }
  Network net;
  auto add_linestring = [&](const nlohmann::json& coords) {
    std::vector<std::array<double, 2>> line;
    for (const auto& pt : coords)
      line.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    if (line.size() >= 2) net.lines.push_back(std::move(line));
  };
  auto add_geometry = [&](const nlohmann::json& geom) {
    const std::string type = geom.at("type").get<std::string>();
    if (type == "LineString") {
      add_linestring(geom.at("coordinates"));
    } else if (type == "MultiLineString") {
      for (const auto& part : geom.at("coordinates")) add_linestring(part);
    } else {
      throw std::runtime_error("unsupported geometry '" + type + "' in " +
                               path);
    }
  };
  if (doc.value("type", "") == "FeatureCollection") {
    for (const auto& feat : doc.at("features")) add_geometry(feat.at("geometry"));
  } else if (doc.contains("coordinates")) {
    add_geometry(doc);
  } else {
    throw std::runtime_error("expected FeatureCollection or geometry in " +
                             path);
  }
  return net;
}

void write_observers_csv(const std::string& path,
                         const std::vector<Observer>& observers) {
  auto f = open_out(path);
  f << "observer_id,cx,cy,activity_level\n";
  for (const auto& o : observers)
    f << o.id << ',' << fmt_g17(o.x) << ',' << fmt_g17(o.y) << ','
      << o.activity_level << '\n';
}

std::vector<Observer> read_observers_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty observer csv: " + path);
  std::vector<Observer> out;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4)
      throw std::runtime_error("expected 4 fields per row in " + path);
    Observer o;
    o.id = static_cast<int>(to_double(fields[0], path));
    o.x = to_double(fields[1], path);
    o.y = to_double(fields[2], path);
    o.activity_level = static_cast<int>(to_double(fields[3], path));
    out.push_back(o);
  }
  return out;
}

}  // namespace lgcpfuse::io

#include "lgcpfuse/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lgcpfuse {

namespace {

// ---- palette --------------------------------------------------------------

constexpr double kStops[5][3] = {{0.267, 0.005, 0.329},
                                 {0.229, 0.322, 0.546},
                                 {0.128, 0.567, 0.551},
                                 {0.369, 0.789, 0.383},
                                 {0.993, 0.906, 0.144}};

// ---- tiny 3x5 glyphs for PNG labels ----------------------------------------

// Each glyph is five rows of three bits, top row first.
const std::uint16_t* glyph_rows(char c) {
  static const std::uint16_t d0[5] = {0b111, 0b101, 0b101, 0b101, 0b111};
  static const std::uint16_t d1[5] = {0b010, 0b110, 0b010, 0b010, 0b111};
  static const std::uint16_t d2[5] = {0b111, 0b001, 0b111, 0b100, 0b111};
  static const std::uint16_t d3[5] = {0b111, 0b001, 0b111, 0b001, 0b111};
  static const std::uint16_t d4[5] = {0b101, 0b101, 0b111, 0b001, 0b001};
  static const std::uint16_t d5[5] = {0b111, 0b100, 0b111, 0b001, 0b111};
  static const std::uint16_t d6[5] = {0b111, 0b100, 0b111, 0b101, 0b111};
  static const std::uint16_t d7[5] = {0b111, 0b001, 0b001, 0b010, 0b010};
  static const std::uint16_t d8[5] = {0b111, 0b101, 0b111, 0b101, 0b111};
  static const std::uint16_t d9[5] = {0b111, 0b101, 0b111, 0b001, 0b111};
  static const std::uint16_t dot[5] = {0b000, 0b000, 0b000, 0b000, 0b010};
  static const std::uint16_t minus[5] = {0b000, 0b000, 0b111, 0b000, 0b000};
  static const std::uint16_t plus[5] = {0b000, 0b010, 0b111, 0b010, 0b000};
  static const std::uint16_t ee[5] = {0b011, 0b101, 0b111, 0b100, 0b011};
  static const std::uint16_t blank[5] = {0b000, 0b000, 0b000, 0b000, 0b000};
  switch (c) {
    case '0': return d0;
    case '1': return d1;
    case '2': return d2;
    case '3': return d3;
    case '4': return d4;
    case '5': return d5;
    case '6': return d6;
    case '7': return d7;
    case '8': return d8;
    case '9': return d9;
    case '.': return dot;
    case '-': return minus;
    case '+': return plus;
    case 'e': return ee;
    default: return blank;
  }
}

std::string format_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---- PNG plumbing ----------------------------------------------------------

std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* p,
                           std::size_t n) {
  static std::uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xedb88320u ^ (c >> 1) : (c >> 1);
      table[i] = c;
    }
    init = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    crc = table[(crc ^ p[i]) & 0xffu] ^ (crc >> 8);
  return crc;
}

std::uint32_t adler32(const std::uint8_t* p, std::size_t n) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    a = (a + p[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void push_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back((x >> 24) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back(x & 0xff);
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& data) {
  push_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const std::uint32_t crc =
      crc32_update(0xffffffffu, out.data() + crc_start,
                   out.size() - crc_start) ^
      0xffffffffu;
  push_be32(out, crc);
}

void write_png(const std::string& path, int w, int h,
               const std::vector<std::uint8_t>& rgba) {
  std::vector<std::uint8_t> raw;  // filter byte 0 + scanline, per row
  raw.reserve(static_cast<std::size_t>(h) * (1 + 4 * w));
  for (int y = 0; y < h; ++y) {
    raw.push_back(0);
    const std::uint8_t* row = rgba.data() + static_cast<std::size_t>(y) * w * 4;
    raw.insert(raw.end(), row, row + 4 * w);
  }

  std::vector<std::uint8_t> out{137, 80, 78, 71, 13, 10, 26, 10};
  std::vector<std::uint8_t> ihdr;
  push_be32(ihdr, static_cast<std::uint32_t>(w));
  push_be32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(6);   // RGBA
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  push_chunk(out, "IHDR", ihdr);

  std::vector<std::uint8_t> idat{0x78, 0x01};  // zlib header, stored blocks
  std::size_t off = 0;
  while (off < raw.size()) {
    const std::size_t len = std::min<std::size_t>(65535, raw.size() - off);
    const bool last = off + len == raw.size();
    idat.push_back(last ? 1 : 0);
    idat.push_back(len & 0xff);
    idat.push_back((len >> 8) & 0xff);
    idat.push_back(~len & 0xff);
    idat.push_back((~len >> 8) & 0xff);
    idat.insert(idat.end(), raw.begin() + off, raw.begin() + off + len);
    off += len;
  }
  push_be32(idat, adler32(raw.data(), raw.size()));
  push_chunk(out, "IDAT", idat);
  push_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
}

void draw_text(std::vector<std::uint8_t>& rgba, int w, int h,
               const std::string& text, int x0, int y0, int scale) {
  int x = x0;
  for (char c : text) {
    const std::uint16_t* rows = glyph_rows(c);
    for (int ry = 0; ry < 5; ++ry)
      for (int rx = 0; rx < 3; ++rx) {
        if (!(rows[ry] & (1 << (2 - rx)))) continue;
        for (int sy = 0; sy < scale; ++sy)
          for (int sx = 0; sx < scale; ++sx) {
            const int px = x + rx * scale + sx;
            const int py = y0 + ry * scale + sy;
            if (px < 0 || px >= w || py < 0 || py >= h) continue;
            std::uint8_t* p = rgba.data() +
                              (static_cast<std::size_t>(py) * w + px) * 4;
            p[0] = p[1] = p[2] = 32;
            p[3] = 255;
          }
      }
    x += 4 * scale;
  }
}

void fill_rect(std::vector<std::uint8_t>& rgba, int w, int h, int x0, int y0,
               int rw, int rh, std::array<std::uint8_t, 3> col,
               std::uint8_t a = 255) {
  for (int y = y0; y < y0 + rh; ++y) {
    if (y < 0 || y >= h) continue;
    for (int x = x0; x < x0 + rw; ++x) {
      if (x < 0 || x >= w) continue;
      std::uint8_t* p = rgba.data() + (static_cast<std::size_t>(y) * w + x) * 4;
      p[0] = col[0];
      p[1] = col[1];
      p[2] = col[2];
      p[3] = a;
    }
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::array<std::uint8_t, 3> heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int k = std::min(3, static_cast<int>(pos));
  const double f = pos - k;
  std::array<std::uint8_t, 3> rgb;
  for (int i = 0; i < 3; ++i) {
    const double v = kStops[k][i] * (1.0 - f) + kStops[k + 1][i] * f;
    rgb[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return rgb;
}

void render_heatmap(const Grid& grid, const std::vector<double>& values,
                    const std::string& path, const HeatmapOptions& opt) {
  const int n = grid.n_active();
  if (static_cast<int>(values.size()) != n)
    throw std::invalid_argument("value count does not match active cells");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (n == 0) lo = hi = 0.0;
  const double span = hi - lo;
  auto tval = [&](double v) { return span > 0 ? (v - lo) / span : 0.5; };

  const int px = opt.cell_px;
  const int map_w = grid.nx * px;
  const int map_h = grid.ny * px;

  if (ends_with(path, ".png")) {
    const int legend_h = 30;
    const int w = map_w, h = map_h + legend_h;
    std::vector<std::uint8_t> rgba(static_cast<std::size_t>(w) * h * 4, 0);
    fill_rect(rgba, w, h, 0, map_h, w, legend_h, {255, 255, 255});
    for (int c = 0; c < n; ++c) {
      const int flat = grid.cell_of_active[c];
      const int ix = grid.ix_of(flat);
      const int iy = grid.iy_of(flat);
      fill_rect(rgba, w, h, ix * px, (grid.ny - 1 - iy) * px, px, px,
                heat_color(tval(values[c])));
    }
    const int bar_y = map_h + 3, bar_h = 10;
    for (int x = 0; x < w; ++x) {
      const double t = w > 1 ? double(x) / (w - 1) : 0.5;
      fill_rect(rgba, w, h, x, bar_y, 1, bar_h, heat_color(t));
    }
    const std::string smin = format_label(lo), smax = format_label(hi);
    draw_text(rgba, w, h, smin, 2, bar_y + bar_h + 2, 2);
    draw_text(rgba, w, h, smax,
              w - 2 - 4 * 2 * static_cast<int>(smax.size()),
              bar_y + bar_h + 2, 2);
    write_png(path, w, h, rgba);
    return;
  }

  // SVG
  const int title_h = opt.title.empty() ? 0 : 18;
  const int legend_h = 34;
  const int w = map_w, h = title_h + map_h + legend_h;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
    << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  if (!opt.title.empty())
    f << "<text x=\"2\" y=\"13\" font-family=\"monospace\" font-size=\"12\">"
      << opt.title << "</text>\n";
  char hex[8];
  for (int c = 0; c < n; ++c) {
    const int flat = grid.cell_of_active[c];
    const int ix = grid.ix_of(flat);
    const int iy = grid.iy_of(flat);
    const auto col = heat_color(tval(values[c]));
    std::snprintf(hex, sizeof hex, "#%02x%02x%02x", col[0], col[1], col[2]);
    f << "<rect x=\"" << ix * px << "\" y=\"" << title_h + (grid.ny - 1 - iy) * px
      << "\" width=\"" << px << "\" height=\"" << px << "\" fill=\"" << hex
      << "\"/>\n";
  }
  const int bar_y = title_h + map_h + 4;
  const int steps = 64;
  for (int i = 0; i < steps; ++i) {
    const auto col = heat_color((i + 0.5) / steps);
    std::snprintf(hex, sizeof hex, "#%02x%02x%02x", col[0], col[1], col[2]);
    const int x0 = i * w / steps;
    const int x1 = (i + 1) * w / steps;
    f << "<rect x=\"" << x0 << "\" y=\"" << bar_y << "\" width=\"" << x1 - x0
      << "\" height=\"10\" fill=\"" << hex << "\"/>\n";
  }
  f << "<text x=\"2\" y=\"" << bar_y + 24
    << "\" font-family=\"monospace\" font-size=\"11\">" << format_label(lo)
    << "</text>\n";
  f << "<text x=\"" << w - 2 << "\" y=\"" << bar_y + 24
    << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
    << format_label(hi) << "</text>\n";
  f << "</svg>\n";
}

std::vector<std::uint8_t> read_png_rgba(const std::string& path, int& width,
                                        int& height) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
    throw std::runtime_error("not a PNG: " + path);

  auto be32 = [&](std::size_t off) {
    return (std::uint32_t(bytes[off]) << 24) |
           (std::uint32_t(bytes[off + 1]) << 16) |
           (std::uint32_t(bytes[off + 2]) << 8) | std::uint32_t(bytes[off + 3]);
  };

  width = height = 0;
  std::vector<std::uint8_t> idat;
  std::size_t off = 8;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t len = be32(off);
    const std::string type(bytes.begin() + off + 4, bytes.begin() + off + 8);
    const std::size_t data = off + 8;
    if (type == "IHDR") {
      width = static_cast<int>(be32(data));
      height = static_cast<int>(be32(data + 4));
      if (bytes[data + 8] != 8 || bytes[data + 9] != 6)
        throw std::runtime_error("unsupported PNG layout");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), bytes.begin() + data, bytes.begin() + data + len);
    } else if (type == "IEND") {
      break;
    }
    off = data + len + 4;
  }

  // Stored-deflate zlib stream: 2-byte header, then stored blocks.
  std::vector<std::uint8_t> raw;
  std::size_t p = 2;
  while (p < idat.size()) {
    const std::uint8_t hdr = idat[p++];
    if ((hdr & 0x06) != 0)
      throw std::runtime_error("PNG uses compressed deflate blocks");
    const std::size_t len = idat[p] | (std::size_t(idat[p + 1]) << 8);
    p += 4;  // len + one's complement
    raw.insert(raw.end(), idat.begin() + p, idat.begin() + p + len);
    p += len;
    if (hdr & 1) break;
  }

  std::vector<std::uint8_t> rgba(static_cast<std::size_t>(width) * height * 4);
  const std::size_t stride = 1 + 4 * static_cast<std::size_t>(width);
  for (int y = 0; y < height; ++y) {
    if (raw[y * stride] != 0)
      throw std::runtime_error("unexpected PNG row filter");
    std::copy_n(raw.data() + y * stride + 1, 4 * width,
                rgba.data() + static_cast<std::size_t>(y) * width * 4);
  }
  return rgba;
}

}  // namespace lgcpfuse

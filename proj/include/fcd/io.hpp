#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fcd/errors.hpp"
#include "fcd/format.hpp"
#include "fcd/mesh.hpp"
#include "fcd/point_cloud.hpp"

namespace fcd {

/// A cloud whose dimension is only known after reading a file.
using AnyCloud = std::variant<PointCloud<2>, PointCloud<3>>;

inline std::size_t dimension_of(const AnyCloud& c) {
  return std::visit([](const auto& cloud) { return std::decay_t<decltype(cloud)>::dim; }, c);
}

inline std::size_t size_of(const AnyCloud& c) {
  return std::visit([](const auto& cloud) { return cloud.size(); }, c);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

inline double parse_coord(std::string_view tok, const std::filesystem::path& path, std::size_t line) {
  auto v = parse_double(tok);
  if (!v)
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
  return *v;
}

template <std::size_t D>
PointCloud<D> to_cloud(const std::vector<double>& flat) {
  std::vector<Point<D>> pts(flat.size() / D);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < D; ++k) pts[i][k] = flat[i * D + k];
  return PointCloud<D>(std::move(pts));
}

}  // namespace detail

/// Parses XYZ text: one point per line, 2 or 3 whitespace-separated numbers,
/// '#' comments and blank lines skipped. The column count of the first point
/// fixes the dimension.
inline AnyCloud parse_xyz(std::istream& in, const std::filesystem::path& name = "<stream>") {
  std::vector<double> flat;
  std::size_t dim = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (dim == 0) {
      dim = toks.size();
      if (dim != 2 && dim != 3)
        throw IoError(name.string() + ":" + std::to_string(lineno) + ": expected 2 or 3 coordinates, got " +
                      std::to_string(dim));
    } else if (toks.size() != dim) {
      throw IoError(name.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                    " coordinates, got " + std::to_string(toks.size()));
    }
    for (auto t : toks) flat.push_back(detail::parse_coord(t, name, lineno));
  }
  if (dim == 2) return detail::to_cloud<2>(flat);
  return detail::to_cloud<3>(flat);  // empty files become an empty 3D cloud
}

struct PlyData {
  std::vector<Vec3> vertices;
  std::vector<std::vector<std::uint32_t>> faces;
};

/// ASCII PLY: vertex x/y/z (other vertex properties skipped) and, when
/// present, a face element with a vertex index list.
inline PlyData parse_ply(std::istream& in, const std::filesystem::path& name = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };
  auto fail = [&](const std::string& msg) -> IoError {
    return IoError(name.string() + ":" + std::to_string(lineno) + ": " + msg);
  };

  if (!next_line() || detail::split_ws(line) != std::vector<std::string_view>{"ply"})
    throw fail("missing 'ply' magic");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (true) {
    if (!next_line()) throw fail("unterminated header");
    const auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0] == "comment" || toks[0] == "obj_info") continue;
    if (toks[0] == "end_header") break;
    if (toks[0] == "format") {
      if (toks.size() < 2) throw fail("bad format line");
      if (toks[1] != "ascii") throw fail("only ASCII PLY is supported");
      ascii = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw fail("bad element line");
      Element e;
      e.name = toks[1];
      e.count = static_cast<std::size_t>(detail::parse_coord(toks[2], name, lineno));
      elements.push_back(e);
    } else if (toks[0] == "property") {
      if (elements.empty() || toks.size() < 3) throw fail("property outside element");
      if (toks[1] == "list") {
        if (toks.size() != 5) throw fail("bad list property");
        elements.back().has_list = true;
        elements.back().props.emplace_back(toks[4]);
      } else {
        elements.back().props.emplace_back(toks[2]);
      }
    } else {
      throw fail("unexpected header keyword '" + std::string(toks[0]) + "'");
    }
  }
  if (!ascii) throw fail("missing format line");

  PlyData out;
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        if (e.props[k] == "x") ix = static_cast<int>(k);
        if (e.props[k] == "y") iy = static_cast<int>(k);
        if (e.props[k] == "z") iz = static_cast<int>(k);
      }
      if (ix < 0 || iy < 0 || iz < 0) throw fail("vertex element lacks x/y/z");
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next_line()) throw fail("truncated vertex list");
        const auto toks = detail::split_ws(line);
        if (toks.size() < e.props.size()) throw fail("short vertex line");
        out.vertices.push_back({detail::parse_coord(toks[ix], name, lineno),
                                detail::parse_coord(toks[iy], name, lineno),
                                detail::parse_coord(toks[iz], name, lineno)});
      }
    } else if (e.name == "face") {
      if (!e.has_list || e.props.size() != 1) throw fail("face element must hold one index list");
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next_line()) throw fail("truncated face list");
        const auto toks = detail::split_ws(line);
        if (toks.empty()) throw fail("empty face line");
        const auto n = static_cast<std::size_t>(detail::parse_coord(toks[0], name, lineno));
        if (toks.size() != n + 1) throw fail("face index count mismatch");
        std::vector<std::uint32_t> face;
        for (std::size_t k = 1; k <= n; ++k)
          face.push_back(static_cast<std::uint32_t>(detail::parse_coord(toks[k], name, lineno)));
        out.faces.push_back(std::move(face));
      }
    } else {
      for (std::size_t i = 0; i < e.count; ++i)
        if (!next_line()) throw fail("truncated element '" + e.name + "'");
    }
  }
  return out;
}

inline bool has_ply_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".ply";
}

/// Reads a cloud from .ply (ASCII, 3D) or any other extension as XYZ.
inline AnyCloud read_cloud(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  if (has_ply_extension(path)) return PointCloud<3>(parse_ply(in, path).vertices);
  return parse_xyz(in, path);
}

template <std::size_t D>
PointCloud<D> read_cloud_as(const std::filesystem::path& path) {
  auto any = read_cloud(path);
  if (auto* c = std::get_if<PointCloud<D>>(&any)) return std::move(*c);
  throw InvalidInput("'" + path.string() + "' holds " + std::to_string(dimension_of(any)) +
                     "D points, expected " + std::to_string(D) + "D");
}

/// Reads a triangle mesh from ASCII PLY. Polygons are fan-triangulated.
inline TriangleMesh read_mesh(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  auto ply = parse_ply(in, path);
  std::vector<TriangleMesh::Triangle> tris;
  for (const auto& f : ply.faces) {
    if (f.size() < 3) throw InvalidInput("face with fewer than 3 vertices in '" + path.string() + "'");
    for (std::size_t k = 1; k + 1 < f.size(); ++k) tris.push_back({f[0], f[k], f[k + 1]});
  }
  return TriangleMesh(std::move(ply.vertices), std::move(tris));
}

template <std::size_t D>
void write_xyz(std::ostream& out, const PointCloud<D>& cloud) {
  for (const auto& p : cloud) {
    for (std::size_t k = 0; k < D; ++k) {
      if (k) out << ' ';
      out << format_double(p[k]);
    }
    out << '\n';
  }
}

template <std::size_t D>
void write_xyz(const std::filesystem::path& path, const PointCloud<D>& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_xyz(out, cloud);
}

}  // namespace fcd

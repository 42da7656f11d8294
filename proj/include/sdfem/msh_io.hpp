#pragma once

// Gmsh MSH reader/writer (ASCII 2.2 and 4.1, 3-node triangles and 2-node
// lines only) and a JSON mesh summary used by test fixtures.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sdfem/mesh.hpp"

namespace sdfem {

namespace detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct RawMsh {
  std::map<std::pair<int, int>, std::string> physical_names;  // (dim, tag) -> name
  std::unordered_map<long, Point> nodes;
  struct Element {
    int type;
    std::vector<int> physical;  // physical tags
    std::vector<long> nodes;
  };
  std::vector<Element> elements;
};

inline void expect_section_end(std::istream& in, const std::string& name) {
  std::string tok;
  while (in >> tok)
    if (tok == "$End" + name) return;
  throw MeshError("MSH: missing $End" + name);
}

inline void check_element_type(int type) {
  // 1: 2-node line, 2: 3-node triangle, 15: point
  if (type != 1 && type != 2 && type != 15)
    throw MeshError("MSH: unsupported element type " + std::to_string(type) +
                    " (only 3-node triangles and 2-node lines are supported)");
}

inline std::size_t nodes_per_element(int type) {
  switch (type) {
    case 1: return 2;
    case 2: return 3;
    case 15: return 1;
    default: return 0;
  }
}

inline void read_physical_names(std::istream& in, RawMsh& raw) {
  int n = 0;
  in >> n;
  for (int i = 0; i < n; ++i) {
    int dim = 0, tag = 0;
    in >> dim >> tag;
    std::string rest;
    std::getline(in, rest);
    const auto a = rest.find('"');
    const auto b = rest.rfind('"');
    if (a == std::string::npos || b == a) throw MeshError("MSH: malformed $PhysicalNames entry");
    raw.physical_names[{dim, tag}] = lower(rest.substr(a + 1, b - a - 1));
  }
  expect_section_end(in, "PhysicalNames");
}

inline void read_v22(std::istream& in, RawMsh& raw) {
  std::string tok;
  while (in >> tok) {
    if (tok == "$PhysicalNames") {
      read_physical_names(in, raw);
    } else if (tok == "$Nodes") {
      long n = 0;
      in >> n;
      for (long i = 0; i < n; ++i) {
        long id;
        double x, y, z;
        in >> id >> x >> y >> z;
        raw.nodes[id] = Point(x, y);
      }
      expect_section_end(in, "Nodes");
    } else if (tok == "$Elements") {
      long n = 0;
      in >> n;
      for (long i = 0; i < n; ++i) {
        long id;
        int type, ntags;
        in >> id >> type >> ntags;
        check_element_type(type);
        std::vector<int> tags(static_cast<std::size_t>(ntags));
        for (auto& t : tags) in >> t;
        RawMsh::Element el{type, {}, {}};
        if (!tags.empty() && tags[0] != 0) el.physical.push_back(tags[0]);
        el.nodes.resize(nodes_per_element(type));
        for (auto& v : el.nodes) in >> v;
        raw.elements.push_back(std::move(el));
      }
      expect_section_end(in, "Elements");
    } else if (tok.rfind("$", 0) == 0 && tok.rfind("$End", 0) != 0) {
      expect_section_end(in, tok.substr(1));
    }
  }
}

inline void read_v41(std::istream& in, RawMsh& raw) {
  std::map<std::pair<int, int>, std::vector<int>> entity_physical;  // (dim, entity) -> physical tags
  std::string tok;
  while (in >> tok) {
    if (tok == "$PhysicalNames") {
      read_physical_names(in, raw);
    } else if (tok == "$Entities") {
      std::array<long, 4> counts{};
      for (auto& c : counts) in >> c;
      for (int dim = 0; dim < 4; ++dim) {
        for (long i = 0; i < counts[static_cast<std::size_t>(dim)]; ++i) {
          int tag;
          in >> tag;
          const int nbox = dim == 0 ? 3 : 6;
          for (int k = 0; k < nbox; ++k) {
            double x;
            in >> x;
          }
          long nphys;
          in >> nphys;
          std::vector<int> phys(static_cast<std::size_t>(nphys));
          for (auto& p : phys) in >> p;
          entity_physical[{dim, tag}] = phys;
          if (dim > 0) {
            long nb;
            in >> nb;
            for (long k = 0; k < nb; ++k) {
              long b;
              in >> b;
            }
          }
        }
      }
      expect_section_end(in, "Entities");
    } else if (tok == "$Nodes") {
      long nblocks, nnodes, mintag, maxtag;
      in >> nblocks >> nnodes >> mintag >> maxtag;
      for (long b = 0; b < nblocks; ++b) {
        int edim, etag, parametric;
        long nin;
        in >> edim >> etag >> parametric >> nin;
        std::vector<long> ids(static_cast<std::size_t>(nin));
        for (auto& id : ids) in >> id;
        const int npar = parametric ? edim : 0;
        for (long k = 0; k < nin; ++k) {
          double x, y, z;
          in >> x >> y >> z;
          for (int p = 0; p < npar; ++p) {
            double u;
            in >> u;
          }
          raw.nodes[ids[static_cast<std::size_t>(k)]] = Point(x, y);
        }
      }
      expect_section_end(in, "Nodes");
    } else if (tok == "$Elements") {
      long nblocks, nelem, mintag, maxtag;
      in >> nblocks >> nelem >> mintag >> maxtag;
      for (long b = 0; b < nblocks; ++b) {
        int edim, etag, type;
        long nin;
        in >> edim >> etag >> type >> nin;
        check_element_type(type);
        const auto it = entity_physical.find({edim, etag});
        const std::vector<int> phys = it == entity_physical.end() ? std::vector<int>{} : it->second;
        for (long k = 0; k < nin; ++k) {
          long id;
          in >> id;
          RawMsh::Element el{type, phys, std::vector<long>(nodes_per_element(type))};
          for (auto& v : el.nodes) in >> v;
          raw.elements.push_back(std::move(el));
        }
      }
      expect_section_end(in, "Elements");
    } else if (tok.rfind("$", 0) == 0 && tok.rfind("$End", 0) != 0) {
      expect_section_end(in, tok.substr(1));
    }
  }
}

}  // namespace detail

/// Parses an MSH 2.2 or 4.1 ASCII stream. Triangles must carry a physical
/// group named "stokes" or "darcy"; lines may be tagged "interface", "lid",
/// or "wall" (case-insensitive).
inline Mesh read_msh(std::istream& in) {
  std::string tok;
  in >> tok;
  if (tok != "$MeshFormat") throw MeshError("MSH: missing $MeshFormat header");
  std::string version;
  int file_type = 0, data_size = 0;
  in >> version >> file_type >> data_size;
  detail::expect_section_end(in, "MeshFormat");
  if (file_type != 0) throw MeshError("MSH: binary files are not supported");
  detail::RawMsh raw;
  if (version == "2.2" || version == "2.1" || version == "2")
    detail::read_v22(in, raw);
  else if (version == "4.1")
    detail::read_v41(in, raw);
  else
    throw MeshError("MSH: unsupported MSH version " + version + " (expected 2.2 or 4.1)");

  auto name_of = [&raw](int dim, const std::vector<int>& phys) -> std::string {
    for (int p : phys) {
      const auto it = raw.physical_names.find({dim, p});
      if (it != raw.physical_names.end()) return it->second;
    }
    return {};
  };

  std::unordered_map<long, int> node_index;
  std::vector<Point> verts;
  auto vertex = [&](long id) {
    const auto it = node_index.find(id);
    if (it != node_index.end()) return it->second;
    const auto n = raw.nodes.find(id);
    if (n == raw.nodes.end()) throw MeshError("MSH: element references unknown node " + std::to_string(id));
    const int idx = static_cast<int>(verts.size());
    verts.push_back(n->second);
    node_index.emplace(id, idx);
    return idx;
  };

  std::vector<std::array<int, 3>> tris;
  std::vector<Subdomain> tags;
  std::vector<MarkedSegment> markers;
  std::vector<std::pair<int, int>> interface_segments;
  for (const auto& el : raw.elements) {
    if (el.type == 2) {
      const std::string name = name_of(2, el.physical);
      if (name == "stokes")
        tags.push_back(Subdomain::stokes);
      else if (name == "darcy")
        tags.push_back(Subdomain::darcy);
      else
        throw MeshError("MSH: untagged triangle (expected physical group \"stokes\" or \"darcy\")");
      tris.push_back({vertex(el.nodes[0]), vertex(el.nodes[1]), vertex(el.nodes[2])});
    }
  }
  for (const auto& el : raw.elements) {
    if (el.type != 1) continue;
    const std::string name = name_of(1, el.physical);
    const auto a = node_index.find(el.nodes[0]);
    const auto b = node_index.find(el.nodes[1]);
    if (a == node_index.end() || b == node_index.end()) throw MeshError("MSH: line element not attached to triangles");
    if (name == "interface")
      interface_segments.emplace_back(a->second, b->second);
    else if (name == "lid")
      markers.push_back({a->second, b->second, BoundaryMarker::lid});
    else if (name == "wall")
      markers.push_back({a->second, b->second, BoundaryMarker::wall});
  }
  Mesh mesh = Mesh::from_triangles(std::move(verts), std::move(tris), std::move(tags), markers);
  for (const auto& [a, b] : interface_segments) {
    const int e = mesh.find_edge(a, b);
    if (e < 0 || mesh.edge(e).cls != EdgeClass::interface)
      throw MeshError("MSH: non-matching interface (interface segment without a Stokes/Darcy triangle pair)");
  }
  if (!interface_segments.empty() &&
      interface_segments.size() != mesh.interface_edges().size())
    throw MeshError("MSH: interface physical group does not cover the Stokes/Darcy contact edges");
  return mesh;
}

inline Mesh load_msh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  return read_msh(in);
}

enum class MshVersion { v22, v41 };

/// Writes the mesh with physical groups stokes(1), darcy(2), interface(3),
/// lid(4), wall(5); unmarked boundary edges go to wall.
inline void write_msh(const Mesh& mesh, std::ostream& out, MshVersion version = MshVersion::v41) {
  out.precision(17);
  struct Line {
    int a, b, phys;
  };
  std::vector<Line> lines;
  for (const auto& e : mesh.edges()) {
    if (e.cls == EdgeClass::interface)
      lines.push_back({e.v[0], e.v[1], 3});
    else if (e.tris[1] < 0)
      lines.push_back({e.v[0], e.v[1], e.marker == BoundaryMarker::lid ? 4 : 5});
  }
  const char* names = "$PhysicalNames\n5\n2 1 \"stokes\"\n2 2 \"darcy\"\n1 3 \"interface\"\n1 4 \"lid\"\n1 5 \"wall\"\n$EndPhysicalNames\n";
  if (version == MshVersion::v22) {
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n" << names;
    out << "$Nodes\n" << mesh.n_vertices() << "\n";
    for (int i = 0; i < mesh.n_vertices(); ++i)
      out << i + 1 << ' ' << mesh.vertices()[static_cast<std::size_t>(i)].x() << ' '
          << mesh.vertices()[static_cast<std::size_t>(i)].y() << " 0\n";
    out << "$EndNodes\n$Elements\n" << lines.size() + static_cast<std::size_t>(mesh.n_triangles()) << "\n";
    long id = 1;
    for (const auto& l : lines) out << id++ << " 1 2 " << l.phys << ' ' << l.phys << ' ' << l.a + 1 << ' ' << l.b + 1 << "\n";
    for (const auto& t : mesh.triangles()) {
      const int phys = t.domain == Subdomain::stokes ? 1 : 2;
      out << id++ << " 2 2 " << phys << ' ' << phys << ' ' << t.v[0] + 1 << ' ' << t.v[1] + 1 << ' ' << t.v[2] + 1
          << "\n";
    }
    out << "$EndElements\n";
    return;
  }
  Point lo = mesh.vertices().front(), hi = lo;
  for (const auto& p : mesh.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  out << "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n" << names;
  // One curve entity per line group, one surface entity per subdomain.
  out << "$Entities\n0 3 2 0\n";
  for (int c = 3; c <= 5; ++c)
    out << c << ' ' << lo.x() << ' ' << lo.y() << " 0 " << hi.x() << ' ' << hi.y() << " 0 1 " << c << " 0\n";
  for (int s = 1; s <= 2; ++s)
    out << s << ' ' << lo.x() << ' ' << lo.y() << " 0 " << hi.x() << ' ' << hi.y() << " 0 1 " << s << " 0\n";
  out << "$EndEntities\n";
  out << "$Nodes\n1 " << mesh.n_vertices() << " 1 " << mesh.n_vertices() << "\n2 1 0 " << mesh.n_vertices() << "\n";
  for (int i = 0; i < mesh.n_vertices(); ++i) out << i + 1 << "\n";
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << " 0\n";
  out << "$EndNodes\n";
  std::map<int, std::vector<Line>> by_group;
  for (const auto& l : lines) by_group[l.phys].push_back(l);
  const auto stokes = mesh.triangles_in(Subdomain::stokes);
  const auto darcy = mesh.triangles_in(Subdomain::darcy);
  const std::size_t nblocks = by_group.size() + (stokes.empty() ? 0 : 1) + (darcy.empty() ? 0 : 1);
  const std::size_t nel = lines.size() + static_cast<std::size_t>(mesh.n_triangles());
  out << "$Elements\n" << nblocks << ' ' << nel << " 1 " << nel << "\n";
  long id = 1;
  for (const auto& [phys, group] : by_group) {
    out << "1 " << phys << " 1 " << group.size() << "\n";
    for (const auto& l : group) out << id++ << ' ' << l.a + 1 << ' ' << l.b + 1 << "\n";
  }
  for (int s = 1; s <= 2; ++s) {
    const auto& ids = s == 1 ? stokes : darcy;
    if (ids.empty()) continue;
    out << "2 " << s << " 2 " << ids.size() << "\n";
    for (int t : ids) {
      const auto& v = mesh.triangle(t).v;
      out << id++ << ' ' << v[0] + 1 << ' ' << v[1] + 1 << ' ' << v[2] + 1 << "\n";
    }
  }
  out << "$EndElements\n";
}

inline void write_msh(const Mesh& mesh, const std::filesystem::path& path, MshVersion version = MshVersion::v41) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  write_msh(mesh, out, version);
}

/// Entity counts, mesh size, and edge classification histogram.
inline nlohmann::json mesh_summary(const Mesh& mesh) {
  nlohmann::json j;
  j["vertices"] = mesh.n_vertices();
  j["edges"] = mesh.n_edges();
  j["triangles"] = mesh.n_triangles();
  j["triangles_stokes"] = mesh.triangles_in(Subdomain::stokes).size();
  j["triangles_darcy"] = mesh.triangles_in(Subdomain::darcy).size();
  j["h"] = mesh.h();
  nlohmann::json cls;
  for (auto c : {EdgeClass::interior_s, EdgeClass::interior_d, EdgeClass::interface, EdgeClass::boundary_s,
                 EdgeClass::boundary_d})
    cls[to_string(c)] = mesh.edges_of_class(c).size();
  j["edge_classes"] = cls;
  std::size_t lid = 0, wall = 0;
  for (const auto& e : mesh.edges()) {
    lid += e.marker == BoundaryMarker::lid;
    wall += e.marker == BoundaryMarker::wall;
  }
  j["lid_edges"] = lid;
  j["wall_edges"] = wall;
  return j;
}

}  // namespace sdfem

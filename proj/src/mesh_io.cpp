#include "shrinker/mesh_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace shrinker {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void finish(TriMesh& m, const std::string& path) {
  for (const Tri& t : m.triangles) {
    for (int v : t) {
      if (v < 0 || v >= m.num_vertices()) throw Error(ErrorKind::InvalidInput, "'" + path + "': face index out of range");
    }
  }
  update_boundary_flags(m);
}

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& data, size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw Error(ErrorKind::InvalidInput, "PLY: truncated body");
  T value;
  std::memcpy(&value, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

} // namespace

MeshFormat format_from_path(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".ply") return MeshFormat::Ply;
  throw Error(ErrorKind::InvalidInput, "unknown mesh extension in '" + path + "'");
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move result into '" + path + "'");
  }
}

void write_obj(const TriMesh& mesh, const std::string& path) {
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.triangles.size() * 24);
  char buf[128];
  for (const Vec3& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  for (const Tri& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  if (mesh.orbit_labels.size() == mesh.vertices.size()) {
    for (size_t v = 0; v < mesh.orbit_labels.size(); ++v) {
      if (mesh.orbit_labels[v] < 0) continue;
      std::snprintf(buf, sizeof buf, "# orbit %zu %d\n", v + 1, mesh.orbit_labels[v] + 1);
      out += buf;
    }
  }
  write_file_atomic(path, out);
}

TriMesh read_obj(const std::string& path) {
  std::istringstream in(read_all(path));
  TriMesh m;
  std::vector<std::pair<int, int>> labels;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::InvalidInput, path + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("malformed vertex");
      m.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        int i = 0;
        try {
          i = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          fail("malformed face index");
        }
        idx.push_back(i < 0 ? static_cast<int>(m.vertices.size()) + i : i - 1);
      }
      if (idx.size() < 3) fail("face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k) m.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    } else if (tag == "#") {
      std::string kw;
      int v, label;
      if (ls >> kw && kw == "orbit" && ls >> v >> label) labels.emplace_back(v - 1, label - 1);
    }
  }
  if (!labels.empty()) {
    m.orbit_labels.assign(m.vertices.size(), -1);
    for (auto [v, label] : labels) {
      if (v < 0 || v >= m.num_vertices()) fail("orbit label for unknown vertex");
      m.orbit_labels[v] = label;
    }
  }
  finish(m, path);
  return m;
}

void write_ply(const TriMesh& mesh, const std::string& path) {
  std::string out = "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  out.reserve(out.size() + mesh.vertices.size() * 24 + mesh.triangles.size() * 13);
  for (const Vec3& p : mesh.vertices) {
    put(out, p.x());
    put(out, p.y());
    put(out, p.z());
  }
  for (const Tri& t : mesh.triangles) {
    put(out, static_cast<unsigned char>(3));
    for (int v : t) put(out, static_cast<std::int32_t>(v));
  }
  write_file_atomic(path, out);
}

TriMesh read_ply(const std::string& path) {
  const std::string data = read_all(path);
  const std::string marker = "end_header\n";
  size_t hdr_end = data.find(marker);
  if (data.rfind("ply", 0) != 0 || hdr_end == std::string::npos) {
    throw Error(ErrorKind::InvalidInput, "'" + path + "' is not a PLY file");
  }
  std::istringstream hdr(data.substr(0, hdr_end));
  std::string line;
  long nv = -1, nf = -1;
  bool binary_le = false, doubles = false;
  while (std::getline(hdr, line)) {
    std::istringstream ls(line);
    std::string a, b, c;
    ls >> a >> b >> c;
    if (a == "format") binary_le = (b == "binary_little_endian");
    if (a == "element" && b == "vertex") nv = std::stol(c);
    if (a == "element" && b == "face") nf = std::stol(c);
    if (a == "property" && b == "double" && c == "x") doubles = true;
  }
  if (!binary_le || !doubles || nv < 0 || nf < 0) {
    throw Error(ErrorKind::InvalidInput, "'" + path + "': only binary little-endian float64 PLY is supported");
  }
  size_t pos = hdr_end + marker.size();
  TriMesh m;
  m.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    double x = get<double>(data, pos), y = get<double>(data, pos), z = get<double>(data, pos);
    m.vertices.emplace_back(x, y, z);
  }
  for (long i = 0; i < nf; ++i) {
    int k = get<unsigned char>(data, pos);
    std::vector<int> idx(k);
    for (int& v : idx) v = get<std::int32_t>(data, pos);
    if (k < 3) throw Error(ErrorKind::InvalidInput, "'" + path + "': face with fewer than 3 vertices");
    for (int j = 1; j + 1 < k; ++j) m.triangles.push_back({idx[0], idx[j], idx[j + 1]});
  }
  finish(m, path);
  return m;
}

void export_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format) {
  if (format == MeshFormat::Obj) write_obj(mesh, path);
  else write_ply(mesh, path);
}

void export_mesh(const TriMesh& mesh, const std::string& path) { export_mesh(mesh, path, format_from_path(path)); }

TriMesh import_mesh(const std::string& path) {
  return format_from_path(path) == MeshFormat::Obj ? read_obj(path) : read_ply(path);
}

} // namespace shrinker

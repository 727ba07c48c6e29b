#pragma once

#include "shrinker/trimesh.hpp"

#include <string>

namespace shrinker {

enum class MeshFormat { Obj, Ply };

// Picks the format from the file extension (.obj / .ply); throws InvalidInput otherwise.
MeshFormat format_from_path(const std::string& path);

// ASCII OBJ with `v` and `f` records (1-based) and `# orbit <vertex> <label>` comments,
// vertex also 1-based. Coordinates use 17 significant digits so the round trip is exact.
void write_obj(const TriMesh& mesh, const std::string& path);
TriMesh read_obj(const std::string& path);

// Binary little-endian PLY, float64 positions, uchar/int face lists.
void write_ply(const TriMesh& mesh, const std::string& path);
TriMesh read_ply(const std::string& path);

void export_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format);
void export_mesh(const TriMesh& mesh, const std::string& path);
TriMesh import_mesh(const std::string& path);

// Writes `contents` to a temporary file next to `path` and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace shrinker

#pragma once

#include <hkflow/mesh.hpp>

#include <iosfwd>
#include <string>

namespace hkflow {

/// ASCII OFF with triangular faces. '#' starts a comment that runs to end of line.
Hypersurface read_off(std::istream& in);
Hypersurface read_off(const std::string& path);

/// Wavefront OBJ; only 'v' and triangular 'f' records are used, other records are skipped.
Hypersurface read_obj(std::istream& in);
Hypersurface read_obj(const std::string& path);

/// Dispatches on the extension (.off / .obj, case-insensitive).
Hypersurface read_mesh(const std::string& path);

/// Writes OFF with round-trip precision.
void write_off(std::ostream& out, const Hypersurface& mesh);
void write_off(const std::string& path, const Hypersurface& mesh);

/// Builtin surfaces:
///   icosphere:LEVEL[:RADIUS]
///   ellipsoid:A:B:C[:LEVEL]
///   torus:MAJOR:MINOR[:N_MAJOR:N_MINOR]
/// Anything else is treated as a file path.
Hypersurface load_mesh(const std::string& source);

bool is_builtin_mesh(const std::string& source);

} // namespace hkflow

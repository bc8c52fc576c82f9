#include <hkflow/io.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace hkflow {

namespace {

/// Whitespace-separated tokens with '#' comments removed.
class TokenStream
{
public:
    explicit TokenStream(std::istream& in) : m_in(in) {}

    bool next(std::string& token)
    {
        if (m_line >> token) return true;
        std::string raw;
        while (std::getline(m_in, raw)) {
            ++m_line_number;
            if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            m_line.clear();
            m_line.str(raw);
            if (m_line >> token) return true;
        }
        return false;
    }

    std::string expect(const char* what)
    {
        std::string token;
        require(next(token), ErrorCode::ParseError, std::string("unexpected end of file, expected ") + what);
        return token;
    }

    long long expect_int(const char* what)
    {
        const std::string t = expect(what);
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used == t.size(), ErrorCode::ParseError,
            "line " + std::to_string(m_line_number) + ": expected integer " + what + ", got '" + t + "'");
        return v;
    }

    double expect_double(const char* what)
    {
        const std::string t = expect(what);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used == t.size(), ErrorCode::ParseError,
            "line " + std::to_string(m_line_number) + ": expected number " + what + ", got '" + t + "'");
        return v;
    }

    int line_number() const { return m_line_number; }

private:
    std::istream& m_in;
    std::istringstream m_line;
    int m_line_number = 0;
};

std::ifstream open_input(const std::string& path)
{
    require(std::filesystem::exists(path), ErrorCode::MeshNotFound, "no such file: " + path);
    std::ifstream in(path);
    require(in.good(), ErrorCode::IoError, "cannot open " + path);
    return in;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    return out;
}

double parse_number(const std::string& s, const std::string& context)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(!s.empty() && used == s.size(), ErrorCode::ParseError, "bad number '" + s + "' in " + context);
    return v;
}

int parse_int(const std::string& s, const std::string& context)
{
    const double v = parse_number(s, context);
    require(v == std::floor(v), ErrorCode::ParseError, "expected integer '" + s + "' in " + context);
    return static_cast<int>(v);
}

} // namespace

Hypersurface read_off(std::istream& in)
{
    TokenStream tokens(in);
    std::string header = tokens.expect("OFF header");
    require(header == "OFF", ErrorCode::ParseError, "missing OFF header, got '" + header + "'");
    const long long nv = tokens.expect_int("vertex count");
    const long long nf = tokens.expect_int("face count");
    tokens.expect_int("edge count");
    require(nv >= 0 && nf >= 0, ErrorCode::ParseError, "negative element count");

    Hypersurface mesh;
    mesh.vertices.resize(nv, 3);
    for (long long i = 0; i < nv; ++i) {
        for (int j = 0; j < 3; ++j) mesh.vertices(i, j) = tokens.expect_double("vertex coordinate");
    }
    mesh.faces.resize(nf, 3);
    for (long long f = 0; f < nf; ++f) {
        const long long arity = tokens.expect_int("face arity");
        require(arity == 3, ErrorCode::ParseError,
            "face " + std::to_string(f) + " has " + std::to_string(arity) + " vertices; only triangles are supported");
        for (int j = 0; j < 3; ++j) {
            const long long idx = tokens.expect_int("face index");
            require(idx >= 0 && idx < nv, ErrorCode::ParseError, "face index " + std::to_string(idx) + " out of range");
            mesh.faces(f, j) = static_cast<int>(idx);
        }
    }
    return mesh;
}

Hypersurface read_off(const std::string& path)
{
    std::ifstream in = open_input(path);
    return read_off(in);
}

Hypersurface read_obj(std::istream& in)
{
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> faces;
    std::string raw;
    int line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream line(raw);
        std::string tag;
        if (!(line >> tag)) continue;
        const std::string where = "OBJ line " + std::to_string(line_number);
        if (tag == "v") {
            std::array<double, 3> p{};
            for (auto& c : p) {
                std::string t;
                require(static_cast<bool>(line >> t), ErrorCode::ParseError, where + ": vertex needs 3 coordinates");
                c = parse_number(t, where);
            }
            vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string t;
            while (line >> t) {
                const std::string first = t.substr(0, t.find('/'));
                int i = parse_int(first, where);
                if (i < 0) i = static_cast<int>(vertices.size()) + i + 1;
                idx.push_back(i - 1);
            }
            require(idx.size() == 3, ErrorCode::ParseError, where + ": only triangular faces are supported");
            faces.push_back({idx[0], idx[1], idx[2]});
        }
    }
    Hypersurface mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        for (int j = 0; j < 3; ++j) mesh.vertices(static_cast<Eigen::Index>(i), j) = vertices[i][j];
    }
    mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int j = 0; j < 3; ++j) {
            require(faces[f][j] >= 0 && faces[f][j] < static_cast<int>(vertices.size()), ErrorCode::ParseError,
                "OBJ face index out of range");
            mesh.faces(static_cast<Eigen::Index>(f), j) = faces[f][j];
        }
    }
    return mesh;
}

Hypersurface read_obj(const std::string& path)
{
    std::ifstream in = open_input(path);
    return read_obj(in);
}

Hypersurface read_mesh(const std::string& path)
{
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".obj") return read_obj(path);
    return read_off(path);
}

void write_off(std::ostream& out, const Hypersurface& mesh)
{
    char buf[96];
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
    for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", mesh.vertices(i, 0), mesh.vertices(i, 1), mesh.vertices(i, 2));
        out << buf;
    }
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
        out << "3 " << mesh.faces(f, 0) << ' ' << mesh.faces(f, 1) << ' ' << mesh.faces(f, 2) << '\n';
    }
}

void write_off(const std::string& path, const Hypersurface& mesh)
{
    std::ofstream out(path);
    require(out.good(), ErrorCode::IoError, "cannot write " + path);
    write_off(out, mesh);
    require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

bool is_builtin_mesh(const std::string& source)
{
    for (const char* prefix : {"icosphere:", "ellipsoid:", "torus:"}) {
        if (source.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

Hypersurface load_mesh(const std::string& source)
{
    if (!is_builtin_mesh(source)) return read_mesh(source);
    const std::vector<std::string> parts = split(source, ':');
    const std::string& kind = parts[0];
    std::vector<std::string> args(parts.begin() + 1, parts.end());
    if (kind == "icosphere") {
        require(args.size() == 1 || args.size() == 2, ErrorCode::ParseError, "expected icosphere:LEVEL[:RADIUS]");
        const int level = parse_int(args[0], source);
        require(level >= 0 && level <= 8, ErrorCode::InvalidArgument, "icosphere level must lie in [0, 8]");
        return icosphere<double>(level, args.size() == 2 ? parse_number(args[1], source) : 1.0);
    }
    if (kind == "ellipsoid") {
        require(args.size() == 3 || args.size() == 4, ErrorCode::ParseError, "expected ellipsoid:A:B:C[:LEVEL]");
        const int level = args.size() == 4 ? parse_int(args[3], source) : 4;
        require(level >= 0 && level <= 8, ErrorCode::InvalidArgument, "ellipsoid level must lie in [0, 8]");
        return ellipsoid<double>(parse_number(args[0], source), parse_number(args[1], source),
            parse_number(args[2], source), level);
    }
    require(args.size() == 2 || args.size() == 4, ErrorCode::ParseError, "expected torus:MAJOR:MINOR[:N_MAJOR:N_MINOR]");
    const int nu = args.size() == 4 ? parse_int(args[2], source) : 64;
    const int nv = args.size() == 4 ? parse_int(args[3], source) : 32;
    return torus<double>(parse_number(args[0], source), parse_number(args[1], source), nu, nv);
}

} // namespace hkflow

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "slf/errors.h"
#include "slf/io.h"

namespace slf {

namespace {

enum class PropType { Float32, Float64, Uint8, Int8, Uint16, Int16, Uint32, Int32 };

size_t prop_size(PropType t) {
    switch (t) {
        case PropType::Float32: return 4;
        case PropType::Float64: return 8;
        case PropType::Uint8:
        case PropType::Int8: return 1;
        case PropType::Uint16:
        case PropType::Int16: return 2;
        case PropType::Uint32:
        case PropType::Int32: return 4;
    }
    return 0;
}

PropType parse_type(const std::string& s, const std::string& path) {
    if (s == "float" || s == "float32") return PropType::Float32;
    if (s == "double" || s == "float64") return PropType::Float64;
    if (s == "uchar" || s == "uint8") return PropType::Uint8;
    if (s == "char" || s == "int8") return PropType::Int8;
    if (s == "ushort" || s == "uint16") return PropType::Uint16;
    if (s == "short" || s == "int16") return PropType::Int16;
    if (s == "uint" || s == "uint32") return PropType::Uint32;
    if (s == "int" || s == "int32") return PropType::Int32;
    throw ParseError(path + ": unsupported PLY property type '" + s + "'");
}

double read_scalar(std::ifstream& in, PropType t, const std::string& path) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), std::streamsize(prop_size(t)));
    if (!in) throw ParseError(path + ": truncated PLY data");
    switch (t) {
        case PropType::Float32: { float f; std::memcpy(&f, buf, 4); return f; }
        case PropType::Float64: { double d; std::memcpy(&d, buf, 8); return d; }
        case PropType::Uint8: return buf[0];
        case PropType::Int8: return int8_t(buf[0]);
        case PropType::Uint16: { uint16_t v; std::memcpy(&v, buf, 2); return v; }
        case PropType::Int16: { int16_t v; std::memcpy(&v, buf, 2); return v; }
        case PropType::Uint32: { uint32_t v; std::memcpy(&v, buf, 4); return v; }
        case PropType::Int32: { int32_t v; std::memcpy(&v, buf, 4); return v; }
    }
    return 0;
}

struct Property {
    std::string name;
    PropType type = PropType::Float32;
    bool is_list = false;
    PropType count_type = PropType::Uint8;
};

struct Element {
    std::string name;
    size_t count = 0;
    std::vector<Property> props;
};

// Integer color channels are normalized to [0, 1] by their type range.
double color_scale(PropType t) {
    switch (t) {
        case PropType::Uint8: return 255.0;
        case PropType::Uint16: return 65535.0;
        default: return 1.0;
    }
}

} // namespace

void write_ply(const std::string& path, const TriangleMesh& mesh, bool float_colors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");

    const bool has_normals = !mesh.normals.empty();
    const bool has_colors = !mesh.albedo.empty();
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << mesh.vertex_count() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (has_normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
    if (has_colors) {
        const char* t = float_colors ? "float" : "ushort";
        out << "property " << t << " red\nproperty " << t << " green\nproperty " << t
            << " blue\n";
    }
    out << "element face " << mesh.face_count() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";

    for (size_t i = 0; i < mesh.vertex_count(); ++i) {
        float p[3] = {float(mesh.positions[i].x), float(mesh.positions[i].y),
                      float(mesh.positions[i].z)};
        out.write(reinterpret_cast<char*>(p), 12);
        if (has_normals) {
            float n[3] = {float(mesh.normals[i].x), float(mesh.normals[i].y),
                          float(mesh.normals[i].z)};
            out.write(reinterpret_cast<char*>(n), 12);
        }
        if (has_colors) {
            if (float_colors) {
                float c[3] = {float(mesh.albedo[i].x), float(mesh.albedo[i].y),
                              float(mesh.albedo[i].z)};
                out.write(reinterpret_cast<char*>(c), 12);
            } else {
                uint16_t c[3];
                for (int k = 0; k < 3; ++k)
                    c[k] = uint16_t(std::lround(clamp(mesh.albedo[i][k], 0.0, 1.0) * 65535.0));
                out.write(reinterpret_cast<char*>(c), 6);
            }
        }
    }
    for (const auto& f : mesh.faces) {
        uint8_t n = 3;
        int32_t idx[3] = {f[0], f[1], f[2]};
        out.write(reinterpret_cast<char*>(&n), 1);
        out.write(reinterpret_cast<char*>(idx), 12);
    }
    if (!out) throw DataError("write failed: " + path);
}

TriangleMesh read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line != "ply") throw ParseError(path + ": not a PLY file");

    std::vector<Element> elements;
    bool binary_le = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian")
                throw ParseError(path + ": only binary little-endian PLY is supported, got '" +
                                fmt + "'");
            binary_le = true;
        } else if (word == "element") {
            Element e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (word == "property") {
            if (elements.empty()) throw ParseError(path + ": property before element");
            Property p;
            std::string t;
            ls >> t;
            if (t == "list") {
                std::string ct, vt;
                ls >> ct >> vt >> p.name;
                p.is_list = true;
                p.count_type = parse_type(ct, path);
                p.type = parse_type(vt, path);
            } else {
                ls >> p.name;
                p.type = parse_type(t, path);
            }
            elements.back().props.push_back(p);
        } else if (word == "end_header") {
            break;
        } // comments and obj_info are skipped
    }
    if (!binary_le) throw ParseError(path + ": missing PLY format line");

    TriangleMesh mesh;
    for (const Element& elem : elements) {
        if (elem.name == "vertex") {
            mesh.positions.resize(elem.count);
            bool has_normals = false, has_colors = false;
            for (const auto& p : elem.props) {
                if (p.name == "nx") has_normals = true;
                if (p.name == "red") has_colors = true;
            }
            if (has_normals) mesh.normals.resize(elem.count);
            if (has_colors) mesh.albedo.resize(elem.count);
            for (size_t i = 0; i < elem.count; ++i) {
                for (const auto& p : elem.props) {
                    if (p.is_list) throw ParseError(path + ": list property on vertex element");
                    double v = read_scalar(in, p.type, path);
                    if (p.name == "x") mesh.positions[i].x = v;
                    else if (p.name == "y") mesh.positions[i].y = v;
                    else if (p.name == "z") mesh.positions[i].z = v;
                    else if (p.name == "nx") mesh.normals[i].x = v;
                    else if (p.name == "ny") mesh.normals[i].y = v;
                    else if (p.name == "nz") mesh.normals[i].z = v;
                    else if (p.name == "red") mesh.albedo[i].x = v / color_scale(p.type);
                    else if (p.name == "green") mesh.albedo[i].y = v / color_scale(p.type);
                    else if (p.name == "blue") mesh.albedo[i].z = v / color_scale(p.type);
                    // other properties are read and dropped
                }
            }
        } else if (elem.name == "face") {
            mesh.faces.reserve(elem.count);
            for (size_t i = 0; i < elem.count; ++i) {
                for (const auto& p : elem.props) {
                    if (!p.is_list) {
                        read_scalar(in, p.type, path);
                        continue;
                    }
                    int n = int(read_scalar(in, p.count_type, path));
                    if (n != 3)
                        throw MeshFormatError(path + ": face " + std::to_string(i) + " has " +
                                        std::to_string(n) + " vertices; only triangles are supported");
                    std::array<int, 3> f;
                    for (int k = 0; k < 3; ++k) f[k] = int(read_scalar(in, p.type, path));
                    mesh.faces.push_back(f);
                }
            }
        } else {
            // Unknown element: skip its payload. Lists make the stride
            // data-dependent, so read it property by property.
            for (size_t i = 0; i < elem.count; ++i) {
                for (const auto& p : elem.props) {
                    if (p.is_list) {
                        int n = int(read_scalar(in, p.count_type, path));
                        for (int k = 0; k < n; ++k) read_scalar(in, p.type, path);
                    } else {
                        read_scalar(in, p.type, path);
                    }
                }
            }
        }
    }
    mesh.validate();
    return mesh;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.precision(9);
    for (const auto& p : mesh.positions) out << "v " << p.x << " " << p.y << " " << p.z << "\n";
    for (const auto& n : mesh.normals) out << "vn " << n.x << " " << n.y << " " << n.z << "\n";
    const bool vn = !mesh.normals.empty();
    for (const auto& f : mesh.faces) {
        if (vn)
            out << "f " << f[0] + 1 << "//" << f[0] + 1 << " " << f[1] + 1 << "//" << f[1] + 1
                << " " << f[2] + 1 << "//" << f[2] + 1 << "\n";
        else
            out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

TriangleMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("cannot open " + path);
    TriangleMesh mesh;
    std::vector<Vec3> normals;
    std::vector<int> normal_of_vertex;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 p;
            ls >> p.x >> p.y >> p.z;
            mesh.positions.push_back(p);
        } else if (tag == "vn") {
            Vec3 n;
            ls >> n.x >> n.y >> n.z;
            normals.push_back(n);
        } else if (tag == "f") {
            std::vector<std::pair<int, int>> verts; // (vertex, normal) 1-based
            std::string tok;
            while (ls >> tok) {
                int vi = 0, ni = 0;
                size_t s1 = tok.find('/');
                vi = std::stoi(tok.substr(0, s1));
                if (s1 != std::string::npos) {
                    size_t s2 = tok.find('/', s1 + 1);
                    if (s2 != std::string::npos && s2 + 1 < tok.size())
                        ni = std::stoi(tok.substr(s2 + 1));
                }
                verts.push_back({vi, ni});
            }
            if (verts.size() != 3)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                ": face is not a triangle");
            std::array<int, 3> f;
            for (int k = 0; k < 3; ++k) {
                f[k] = verts[k].first - 1;
                if (verts[k].second > 0) {
                    normal_of_vertex.resize(std::max(normal_of_vertex.size(),
                                                     size_t(verts[k].first)),
                                            0);
                    normal_of_vertex[verts[k].first - 1] = verts[k].second;
                }
            }
            mesh.faces.push_back(f);
        }
    }
    if (!normals.empty() && !normal_of_vertex.empty()) {
        mesh.normals.assign(mesh.positions.size(), Vec3{0, 0, 1});
        for (size_t v = 0; v < mesh.positions.size() && v < normal_of_vertex.size(); ++v) {
            int ni = normal_of_vertex[v];
            if (ni > 0 && size_t(ni) <= normals.size()) mesh.normals[v] = normals[ni - 1];
        }
    }
    mesh.validate();
    return mesh;
}

} // namespace slf
